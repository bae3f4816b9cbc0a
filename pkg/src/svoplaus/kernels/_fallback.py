"""Pure Python/numpy lane for the sampling kernels.

The alias builder runs the identical scalar recurrence as the compiled
lane (left-to-right summation, LIFO worklists); draws and membership use
only exact elementwise operations, so outputs match the extension
bit-for-bit.
"""

from __future__ import annotations

import numpy as np

IMPL = "python"


def build_alias_arrays(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias construction. Caller guarantees non-empty positive weights."""
    w = np.ascontiguousarray(weights, dtype=np.float64).tolist()
    n = len(w)
    total = 0.0
    for x in w:
        total += x
    scale = n / total
    scaled = [x * scale for x in w]

    prob = np.empty(n, dtype=np.float64)
    alias = np.empty(n, dtype=np.int64)
    small: list[int] = []
    large: list[int] = []
    for i in range(n):
        if scaled[i] < 1.0:
            small.append(i)
        else:
            large.append(i)
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    while large:
        i = large.pop()
        prob[i] = 1.0
        alias[i] = i
    while small:
        i = small.pop()
        prob[i] = 1.0
        alias[i] = i
    return prob, alias


def alias_draw(prob: np.ndarray, alias: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map 2k uniforms in [0,1) to k item indices (index pick, accept test)."""
    n = prob.shape[0]
    u0 = u[0::2]
    u1 = u[1::2]
    j = (u0 * n).astype(np.int64)
    np.minimum(j, n - 1, out=j)
    return np.where(u1 < prob[j], j, alias[j])


def membership(keys: np.ndarray, sorted_keys: np.ndarray) -> np.ndarray:
    """Byte mask marking which keys occur in the sorted array."""
    if sorted_keys.shape[0] == 0:
        return np.zeros(keys.shape[0], dtype=np.uint8)
    pos = np.searchsorted(sorted_keys, keys)
    np.minimum(pos, sorted_keys.shape[0] - 1, out=pos)
    return (sorted_keys[pos] == keys).astype(np.uint8)
