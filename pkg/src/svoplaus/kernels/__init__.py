"""Sampling hot loops: compiled extension when built, numpy fallback otherwise.

Both lanes implement the same scalar recurrences with the same floating
point operation order, so switching lanes never changes a single output
bit. Set ``SVOPLAUS_NO_EXT=1`` to force the fallback (used by the
equivalence tests and the benchmark).
"""

from __future__ import annotations

import os

if os.environ.get("SVOPLAUS_NO_EXT"):
    from . import _fallback as _impl

    HAS_EXT = False
else:
    try:
        from . import _ext as _impl  # type: ignore[attr-defined]

        HAS_EXT = True
    except ImportError:
        from . import _fallback as _impl

        HAS_EXT = False

IMPL = _impl.IMPL
build_alias_arrays = _impl.build_alias_arrays
alias_draw = _impl.alias_draw
membership = _impl.membership

__all__ = ["HAS_EXT", "IMPL", "build_alias_arrays", "alias_draw", "membership"]
