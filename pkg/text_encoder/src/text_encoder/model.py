"""A compact trainable transformer encoder over entity descriptions.

Descriptions are tokenized at the word level against a corpus-built
vocabulary and framed with [CLS]/[SEP] markers; the final [CLS] hidden
state is the sequence representation.  Pretrained multilingual weights
are not assumed: the encoder trains from scratch on the task's own
supervision, which is all the toy-scale contracts require.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

PAD, UNK, CLS, SEP = 0, 1, 2, 3
_SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"]


@dataclass(frozen=True)
class EncoderConfig:
    mode: str = "pairwise"  # or "pointwise"
    output_dim: int = 300
    margin: float = 1.0  # pairwise ranking margin
    max_len: int = 48
    seed: int = 0
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 2
    ffn_dim: int = 128
    learning_rate: float = 1e-3
    epochs: int = 100
    neg_k: int = 2
    batch_size: int = 32

    def __post_init__(self):
        if self.mode not in ("pairwise", "pointwise"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.output_dim < 1:
            raise ValueError("output_dim must be positive")
        if self.max_len < 4:
            raise ValueError("max_len must leave room for the marker tokens")


class Vocab:
    """Word-level vocabulary with the special marker tokens."""

    def __init__(self, corpora):
        words = sorted({w for corpus in corpora for text in corpus.texts.values()
                        for w in text.lower().split()})
        self.index = {w: i + len(_SPECIALS) for i, w in enumerate(words)}

    def __len__(self) -> int:
        return len(self.index) + len(_SPECIALS)

    def encode(self, text: str, limit: int):
        ids = [self.index.get(w, UNK) for w in text.lower().split()]
        return ids[:limit]


class DescriptionEncoder(nn.Module):
    """Token + position (+ segment) embeddings into a transformer stack."""

    def __init__(self, vocab_size: int, config: EncoderConfig, segments: int = 1):
        super().__init__()
        self.config = config
        self.token_emb = nn.Embedding(vocab_size, config.d_model, padding_idx=PAD)
        self.pos_emb = nn.Embedding(config.max_len, config.d_model)
        self.seg_emb = nn.Embedding(segments, config.d_model) if segments > 1 else None
        layer = nn.TransformerEncoderLayer(
            d_model=config.d_model, nhead=config.n_heads,
            dim_feedforward=config.ffn_dim, batch_first=True,
            dropout=0.0, activation="gelu")
        # the nested-tensor fast path is nondeterministic across runs
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.n_layers,
                                             enable_nested_tensor=False)

    def forward(self, tokens: torch.Tensor, segments: torch.Tensor | None = None):
        positions = torch.arange(tokens.shape[1], device=tokens.device)
        x = self.token_emb(tokens) + self.pos_emb(positions)[None, :, :]
        if self.seg_emb is not None and segments is not None:
            x = x + self.seg_emb(segments)
        mask = tokens == PAD
        hidden = self.encoder(x, src_key_padding_mask=mask)
        return hidden[:, 0, :]  # the [CLS] state


def pad_batch(sequences, max_len: int):
    out = torch.full((len(sequences), max_len), PAD, dtype=torch.long)
    for i, seq in enumerate(sequences):
        out[i, :len(seq)] = torch.tensor(seq[:max_len], dtype=torch.long)
    return out


def single_input(vocab: Vocab, text: str, max_len: int):
    """[CLS] tokens [SEP], truncated to max_len."""
    body = vocab.encode(text, max_len - 2)
    return [CLS] + body + [SEP]


def pair_input(vocab: Vocab, text_a: str, text_b: str, max_len: int):
    """[CLS] a [SEP] b [SEP] with segment ids 0/1, truncated evenly."""
    budget = max_len - 3
    a = vocab.encode(text_a, budget // 2)
    b = vocab.encode(text_b, budget - len(a))
    tokens = [CLS] + a + [SEP] + b + [SEP]
    segments = [0] * (len(a) + 2) + [1] * (len(b) + 1)
    return tokens, segments


def seed_everything(seed: int) -> None:
    torch.manual_seed(seed)
    torch.set_num_threads(1)  # keeps seeded runs bit-reproducible on CPU
