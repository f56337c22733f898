"""Cross-encoder pair scoring for candidate-pool reranking.

The two descriptions are packed into one sequence ([CLS] d1 [SEP] d2
[SEP] with segment markers) and the [CLS] state feeds a sigmoid head,
giving the probability that the pair denotes the same entity.  The model
is fine-tuned on the gold pairs against sampled corruptions, then scores
every (source, candidate) pair of the pool.
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
    pair_input,
    seed_everything,
)


class PointwiseModel(nn.Module):
    def __init__(self, vocab_size: int, config: EncoderConfig):
        super().__init__()
        self.encoder = DescriptionEncoder(vocab_size, config, segments=2)
        self.head = nn.Linear(config.d_model, 1)

    def forward(self, tokens, segments):
        return self.head(self.encoder(tokens, segments)).squeeze(-1)


def _batch_pairs(vocab, src_corpus, tgt_corpus, pairs, max_len):
    tokens, segments = [], []
    for s, t in pairs:
        tok, seg = pair_input(vocab, src_corpus.texts[s], tgt_corpus.texts[t], max_len)
        tokens.append(tok)
        segments.append(seg)
    return pad_batch(tokens, max_len), pad_batch(segments, max_len)


def score_pointwise(src_corpus: DescriptionCorpus, tgt_corpus: DescriptionCorpus,
                    train_ills, pool, config: EncoderConfig):
    """Fine-tune the cross-encoder, then score every pool pair.

    Returns (entries, skipped) where entries is a list of
    (src, candidate, probability) covering the pool completely; pairs
    with a missing description are scored 0.0 and counted in ``skipped``.
    """
    if not src_corpus.texts or not tgt_corpus.texts:
        raise ValueError("empty description corpus")
    gold = [(s, t) for s, t in train_ills
            if src_corpus.get(s) is not None and tgt_corpus.get(t) is not None]
    if not gold:
        raise ValueError("no training pair has descriptions on both sides")

    seed_everything(config.seed)
    rng = np.random.default_rng(config.seed)
    vocab = Vocab([src_corpus, tgt_corpus])
    model = PointwiseModel(len(vocab), config)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    bce = nn.BCEWithLogitsLoss()

    src_ids = sorted(src_corpus.texts)
    tgt_ids = sorted(tgt_corpus.texts)

    def draw_not(ids, avoid):
        if len(ids) < 2:
            return ids[0]
        while True:
            cand = ids[int(rng.integers(len(ids)))]
            if cand != avoid:
                return cand

    model.train()
    for _ in range(config.epochs):
        order = rng.permutation(len(gold))
        for start in range(0, len(gold), config.batch_size):
            batch = [gold[i] for i in order[start:start + config.batch_size]]
            negatives = []
            for s, t in batch:
                for _ in range(config.neg_k):
                    negatives.append((draw_not(src_ids, s), t))
                    negatives.append((s, draw_not(tgt_ids, t)))
            examples = batch + negatives
            labels = torch.cat([torch.ones(len(batch)), torch.zeros(len(negatives))])
            tokens, segments = _batch_pairs(vocab, src_corpus, tgt_corpus,
                                            examples, config.max_len)
            logits = model(tokens, segments)
            loss = bce(logits, labels)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

    model.eval()
    entries = []
    skipped = 0
    scorable = []
    for src, candidates in pool:
        for cand in candidates:
            if src_corpus.get(src) is None or tgt_corpus.get(cand) is None:
                entries.append((src, cand, 0.0))
                skipped += 1
            else:
                scorable.append((src, cand))
    with torch.no_grad():
        for start in range(0, len(scorable), config.batch_size):
            chunk = scorable[start:start + config.batch_size]
            tokens, segments = _batch_pairs(vocab, src_corpus, tgt_corpus,
                                            chunk, config.max_len)
            probs = torch.sigmoid(model(tokens, segments)).numpy().astype(np.float64)
            entries.extend((s, c, float(p)) for (s, c), p in zip(chunk, probs))
    return entries, skipped
