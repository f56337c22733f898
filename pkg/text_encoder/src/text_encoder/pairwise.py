"""Dual-encoder textual embeddings trained with a margin ranking loss.

Each side's description is encoded independently ([CLS] d [SEP]); an FC
head maps the [CLS] state to the 300-dim output space.  Training pulls
gold description pairs together under L1 distance and pushes corrupted
pairs at least a margin apart, mirroring the graph trainer's
corruption scheme (k replacements per side per positive).
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .corpus import DescriptionCorpus
from .model import (
    DescriptionEncoder,
    EncoderConfig,
    Vocab,
    pad_batch,
    seed_everything,
    single_input,
)


class PairwiseModel(nn.Module):
    def __init__(self, vocab_size: int, config: EncoderConfig):
        super().__init__()
        self.encoder = DescriptionEncoder(vocab_size, config, segments=1)
        self.head = nn.Linear(config.d_model, config.output_dim)

    def forward(self, tokens):
        return self.head(self.encoder(tokens))


def _embed_all(model, vocab, corpus, config, device="cpu"):
    model.eval()
    ids = sorted(corpus.texts)
    rows = {}
    with torch.no_grad():
        for start in range(0, len(ids), config.batch_size):
            chunk = ids[start:start + config.batch_size]
            tokens = pad_batch(
                [single_input(vocab, corpus.texts[i], config.max_len) for i in chunk],
                config.max_len).to(device)
            vecs = model(tokens).cpu().numpy().astype(np.float64)
            for i, v in zip(chunk, vecs):
                rows[i] = v
    return rows


def encode_pairwise(src_corpus: DescriptionCorpus, tgt_corpus: DescriptionCorpus,
                    train_ills, config: EncoderConfig) -> tuple[dict, list]:
    """Fine-tune the dual encoder and embed every described entity.

    Returns (entity id -> 300-dim vector, per-epoch loss list).  Training
    pairs need descriptions on both sides; other described entities still
    receive embeddings at inference time.
    """
    if not src_corpus.texts or not tgt_corpus.texts:
        raise ValueError("empty description corpus")
    pairs = [(s, t) for s, t in train_ills
             if src_corpus.get(s) is not None and tgt_corpus.get(t) is not None]
    if not pairs:
        raise ValueError("no training pair has descriptions on both sides")

    seed_everything(config.seed)
    rng = np.random.default_rng(config.seed)
    vocab = Vocab([src_corpus, tgt_corpus])
    model = PairwiseModel(len(vocab), config)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)

    src_ids = sorted(src_corpus.texts)
    tgt_ids = sorted(tgt_corpus.texts)

    def tokens_for(corpus, ids):
        return pad_batch([single_input(vocab, corpus.texts[i], config.max_len)
                          for i in ids], config.max_len)

    def draw_not(ids, gold):
        if len(ids) < 2:
            return ids[0]
        while True:
            cand = ids[int(rng.integers(len(ids)))]
            if cand != gold:
                return cand

    losses = []
    model.train()
    for _ in range(config.epochs):
        total = 0.0
        order = rng.permutation(len(pairs))
        for start in range(0, len(pairs), config.batch_size):
            batch = [pairs[i] for i in order[start:start + config.batch_size]]
            b = len(batch)
            k = config.neg_k
            # corruptions: k source-side and k target-side replacements per
            # positive, never the gold entity itself
            neg_src = [draw_not(src_ids, batch[j // k][0]) for j in range(b * k)]
            neg_tgt = [draw_not(tgt_ids, batch[j // k][1]) for j in range(b * k)]
            src_vec = model(tokens_for(src_corpus, [s for s, _ in batch]))
            tgt_vec = model(tokens_for(tgt_corpus, [t for _, t in batch]))
            ns_vec = model(tokens_for(src_corpus, neg_src))
            nt_vec = model(tokens_for(tgt_corpus, neg_tgt))

            d_pos = (src_vec - tgt_vec).abs().sum(dim=1)
            d_pos_rep = d_pos.repeat_interleave(k)
            d_neg_left = (ns_vec - tgt_vec.repeat_interleave(k, dim=0)).abs().sum(dim=1)
            d_neg_right = (src_vec.repeat_interleave(k, dim=0) - nt_vec).abs().sum(dim=1)
            hinge = (torch.relu(d_pos_rep + config.margin - d_neg_left)
                     + torch.relu(d_pos_rep + config.margin - d_neg_right))
            loss = hinge.mean()

            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * b
        losses.append(total / len(pairs))

    rows = _embed_all(model, vocab, DescriptionCorpus({**src_corpus.texts,
                                                       **tgt_corpus.texts}), config)
    return rows, losses
