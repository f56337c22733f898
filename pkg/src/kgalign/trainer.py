"""Margin-based ranking loss, negative sampling and full-batch SGD.

The loss is the summed hinge over every (positive, corrupted) pairing,
with L1 distance between embedding rows.  The SGD step normalizes the
summed gradient by the number of hinge terms, so learning rates stay O(1)
regardless of the ILL count or the negative-sampling factor.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .data import AlignmentTask
from .features import FeatureSet
from .linalg import normalize_adjacency
from .models import HMAN, MAN, ModelParams, backward, forward, init_params, sgd_step

DEFAULT_EPOCHS = {MAN: 2000, HMAN: 50000}
DEFAULT_LEARNING_RATE = {MAN: 1.0, HMAN: 0.01}


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    variant: str = MAN
    margin: float = 3.0
    epochs: int | None = None  # None: variant default (2000 MAN, 50000 HMAN)
    learning_rate: float | None = None  # None: variant default
    neg_k: int = 5
    resample_interval: int = 10
    seed: int = 0
    drop: frozenset = frozenset()
    highway: bool = True
    dims: tuple = (200, 100, 100)
    layers: int = 2

    def __post_init__(self):
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.neg_k < 1:
            raise ValueError("neg_k must be at least 1")
        if self.resample_interval < 1:
            raise ValueError("resample_interval must be at least 1")

    def resolved_epochs(self) -> int:
        return DEFAULT_EPOCHS[self.variant] if self.epochs is None else self.epochs

    def resolved_learning_rate(self) -> float:
        if self.learning_rate is None:
            return DEFAULT_LEARNING_RATE[self.variant]
        return self.learning_rate


@dataclass(frozen=True)
class NegativePool:
    """Corrupted pairs, row-aligned with their expanded positives."""

    pos: np.ndarray  # (P*2k, 2) each positive repeated for its negatives
    neg: np.ndarray  # (P*2k, 2)


def sample_negatives(task: AlignmentTask, k: int, rng: np.random.Generator) -> NegativePool:
    """Draw k left-corrupted and k right-corrupted pairs per train ILL.

    The replacement entity comes from the corrupted side's own graph, is
    never the gold entity it replaces, and the corrupted pair avoids the
    train ILL set when possible (repeats are allowed on tiny graphs).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    pos = task.train_ills
    offset, total = task.offset, task.total_entities
    if offset < 2 or total - offset < 2:
        raise ValueError("negative sampling needs at least 2 entities per graph")
    train_keys = pos[:, 0] * total + pos[:, 1]

    def draw(golds, others, lo, hi, left_side):
        cand = rng.integers(lo, hi, size=golds.size)
        for attempt in range(48):
            bad = cand == golds
            if attempt < 24:  # avoid train pairs while alternatives remain
                keys = cand * total + others if left_side else others * total + cand
                bad |= np.isin(keys, train_keys)
            if not bad.any():
                return cand
            cand[bad] = rng.integers(lo, hi, size=int(bad.sum()))
        while (cand == golds).any():  # tiny graphs: repeats allowed, gold never
            bad = cand == golds
            cand[bad] = rng.integers(lo, hi, size=int(bad.sum()))
        return cand

    e1 = np.repeat(pos[:, 0], k)
    e2 = np.repeat(pos[:, 1], k)
    left = draw(e1, e2, 0, offset, left_side=True)
    right = draw(e2, e1, offset, total, left_side=False)
    pos_expanded = np.vstack([np.column_stack([e1, e2]), np.column_stack([e1, e2])])
    neg = np.vstack([np.column_stack([left, e2]), np.column_stack([e1, right])])
    return NegativePool(pos=pos_expanded, neg=neg)


def margin_loss(emb: np.ndarray, pos: np.ndarray, neg: np.ndarray,
                margin: float) -> tuple[float, np.ndarray]:
    """Summed hinge [d1(pos) + margin - d1(neg)]+ and its embedding gradient.

    ``pos`` and ``neg`` are row-aligned index pairs.  The hinge is inactive
    at an exact zero, and the L1 subgradient at coordinate equality is 0,
    so the gradient on each embedding row is an exact signed integer count
    and accumulation order cannot change it.
    """
    pos = np.asarray(pos, dtype=np.int64).reshape(-1, 2)
    neg = np.asarray(neg, dtype=np.int64).reshape(-1, 2)
    if pos.shape != neg.shape:
        raise ValueError("pos and neg must pair up row by row")
    if pos.size and (min(pos.min(), neg.min()) < 0 or max(pos.max(), neg.max()) >= emb.shape[0]):
        raise ValueError("pair index out of range of the embedding matrix")

    diff_pos = emb[pos[:, 0]] - emb[pos[:, 1]]
    diff_neg = emb[neg[:, 0]] - emb[neg[:, 1]]
    d_pos = np.abs(diff_pos).sum(axis=1)
    d_neg = np.abs(diff_neg).sum(axis=1)
    slack = d_pos + margin - d_neg
    active = slack > 0.0
    # sorted summation: the loss value is independent of pair order
    loss = float(np.sum(np.sort(slack[active]))) if active.any() else 0.0

    grad = np.zeros_like(emb)
    if active.any():
        sp = np.sign(diff_pos[active])
        sn = np.sign(diff_neg[active])
        np.add.at(grad, pos[active, 0], sp)
        np.add.at(grad, pos[active, 1], -sp)
        np.add.at(grad, neg[active, 0], -sn)
        np.add.at(grad, neg[active, 1], sn)
    return loss, grad


def build_adjacency(task: AlignmentTask):
    """Normalized adjacency of the combined graph (relation triples only)."""
    return normalize_adjacency(task.undirected_edges(), task.total_entities)


@dataclass
class TrainResult:
    params: ModelParams
    loss_curve: list = field(default_factory=list)
    wall_time_s: float = 0.0


def train(task: AlignmentTask, feats: FeatureSet, config: TrainConfig) -> TrainResult:
    """Full-batch SGD training of MAN or HMAN on the task's train ILLs."""
    from .features import ablate  # local import to avoid cycle at module load

    t0 = time.perf_counter()
    feats = ablate(feats, config.drop)
    a_hat = build_adjacency(task)
    params = init_params(config.variant, feats, dims=config.dims, layers=config.layers,
                         highway=config.highway, seed=config.seed)
    neg_rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(4)[3])

    epochs = config.resolved_epochs()
    lr = config.resolved_learning_rate()
    loss_curve = []
    pool = None
    for epoch in range(epochs):
        if epoch % config.resample_interval == 0:
            pool = sample_negatives(task, config.neg_k, neg_rng)
        emb, cache = forward(params, a_hat, feats)
        loss, grad_emb = margin_loss(emb, pool.pos, pool.neg, config.margin)
        if not np.isfinite(loss):
            raise TrainingDiverged(
                f"non-finite loss at epoch {epoch} (learning rate {lr})")
        grads = backward(params, a_hat, feats, cache, grad_emb)
        sgd_step(params, grads, lr / max(len(pool.pos), 1))
        loss_curve.append(loss)
    return TrainResult(params=params, loss_curve=loss_curve,
                       wall_time_s=time.perf_counter() - t0)
