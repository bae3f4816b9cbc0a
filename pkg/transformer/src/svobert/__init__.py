"""Masked-language-model fine-tuning for s-v-o plausibility.

Triples are wrapped in entity marker tokens and classified from the
encoder's pooled representation; training restarts with a fresh seed when
the loss fails to decrease, a known failure mode of small-data
fine-tuning. Consumes and produces the extraction pipeline's TSV dataset
and key-value report formats.
"""

from .encoding import (
    MARKERS,
    MarkedSequence,
    Triple,
    build_tokenizer,
    decode_sequence,
    encode_triple,
)
from .finetune import (
    AllRestartsFailedError,
    FinetuneConfig,
    FinetuneResult,
    TrainTrace,
    finetune,
    loss_decrease,
    should_restart,
)
from .protocols import TRANSFORMER_GRID

__version__ = "0.1.0"
