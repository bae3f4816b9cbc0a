"""Classifier construction: a compact from-scratch variant for desk-scale
runs, or any pretrained checkpoint by name/path when weights are available.

Both variants expose the same bundle: a tokenizer with registered marker
tokens and a sequence-classification model whose embedding matrix covers
them.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from transformers import (
    AutoModelForSequenceClassification,
    AutoTokenizer,
    BertConfig,
    BertForSequenceClassification,
)

from .encoding import build_tokenizer, register_markers


@dataclass
class ModelBundle:
    tokenizer: object
    make_model: object  # callable seed -> nn.Module, fresh weights per call


def compact_bundle(
    vocabulary,
    hidden_size: int = 128,
    num_layers: int = 2,
    num_heads: int = 4,
    max_positions: int = 64,
) -> ModelBundle:
    """Small randomly-initialized encoder trained from scratch."""
    tokenizer = build_tokenizer(vocabulary)

    config = BertConfig(
        vocab_size=len(tokenizer),
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=4 * hidden_size,
        max_position_embeddings=max_positions,
        num_labels=2,
        pad_token_id=tokenizer.pad_token_id,
    )

    def make_model(seed: int):
        torch.manual_seed(seed)
        return BertForSequenceClassification(config)

    return ModelBundle(tokenizer=tokenizer, make_model=make_model)


def pretrained_bundle(name_or_path: str) -> ModelBundle:
    """Any sequence-classification checkpoint; markers are added and the
    embedding matrix resized. Requires downloaded or local weights."""
    tokenizer = AutoTokenizer.from_pretrained(name_or_path)
    added = register_markers(tokenizer)

    def make_model(seed: int):
        torch.manual_seed(seed)  # seeds the fresh classification head
        model = AutoModelForSequenceClassification.from_pretrained(name_or_path, num_labels=2)
        if added:
            model.resize_token_embeddings(len(tokenizer))
        return model

    return ModelBundle(tokenizer=tokenizer, make_model=make_model)
