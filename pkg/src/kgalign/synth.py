"""Synthetic bilingual alignment tasks with known ground truth.

The source graph is Erdos-Renyi with uniformly random relation labels and
per-entity attribute sets.  The target graph is an isomorphic copy under a
random entity permutation, optionally degraded by rewiring a fraction of
its edges (structural noise) and dropping a fraction of its relation and
attribute incidences (feature noise).  The hidden permutation provides
the gold ILLs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import AlignmentTask, LanguageGraph, split_ills

# expected attributes per entity (capped by the attribute vocabulary size)
_ATTRS_PER_ENTITY = 4.0


@dataclass(frozen=True)
class SynthConfig:
    n_entities: int = 200
    n_relations: int = 8
    n_attributes: int = 12
    edge_density: float = 0.02
    structural_noise: float = 0.0
    feature_noise: float = 0.0
    ill_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_entities < 2:
            raise ValueError("n_entities must be at least 2")
        if self.n_relations < 1 or self.n_attributes < 1:
            raise ValueError("need at least one relation and one attribute type")
        for name in ("edge_density", "structural_noise", "feature_noise", "ill_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


def _collapse(rows: np.ndarray, width: int):
    if rows.size == 0:
        return rows.reshape(0, width), np.zeros(0, dtype=np.int64)
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    return uniq, counts.astype(np.int64)


def _graph(tag, offset, n, triples, attrs, uri_prefix):
    triples, tri_counts = _collapse(triples, 3)
    attrs, attr_counts = _collapse(attrs, 2)
    return LanguageGraph(
        language_tag=tag,
        entity_count=n,
        id_offset=offset,
        relation_triples=triples,
        triple_counts=tri_counts,
        attribute_pairs=attrs,
        attribute_counts=attr_counts,
        uri_map={offset + i: f"{uri_prefix}{i}" for i in range(n)},
    )


def generate(config: SynthConfig, split_fraction: float = 0.3) -> AlignmentTask:
    """Generate a task whose ILLs are a hidden isomorphism, bit-reproducibly."""
    n = config.n_entities
    rng = np.random.default_rng(config.seed)

    # source: ER edges over the upper triangle, one relation label per edge
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < config.edge_density
    heads, tails = iu[keep].astype(np.int64), ju[keep].astype(np.int64)
    if heads.size == 0:
        raise ValueError("edge_density produced a graph with no edges")
    labels = rng.integers(0, config.n_relations, size=heads.size)
    src_triples = np.column_stack([heads, labels, tails])

    p_attr = min(1.0, _ATTRS_PER_ENTITY / config.n_attributes)
    attr_mask = rng.random((n, config.n_attributes)) < p_attr
    ent_idx, attr_idx = np.nonzero(attr_mask)
    src_attrs = np.column_stack([ent_idx.astype(np.int64), attr_idx.astype(np.int64)])

    # target: permuted copy, then structural rewiring, then feature drops
    perm = rng.permutation(n).astype(np.int64)
    tgt_triples = np.column_stack([perm[heads], labels, perm[tails]])
    tgt_attrs = np.column_stack([perm[ent_idx], attr_idx.astype(np.int64)])

    m = tgt_triples.shape[0]
    n_rewire = int(round(config.structural_noise * m))
    if n_rewire:
        which = rng.choice(m, size=n_rewire, replace=False)
        new_heads = rng.integers(0, n, size=n_rewire)
        shift = rng.integers(1, n, size=n_rewire)
        new_tails = (new_heads + shift) % n  # distinct endpoint, uniform over the rest
        tgt_triples[which, 0] = new_heads
        tgt_triples[which, 2] = new_tails

    n_drop = int(round(config.feature_noise * m))
    if n_drop:
        dropped = rng.choice(m, size=n_drop, replace=False)
        keep_mask = np.ones(m, dtype=bool)
        keep_mask[dropped] = False
        tgt_triples = tgt_triples[keep_mask]
    a = tgt_attrs.shape[0]
    n_drop_attr = int(round(config.feature_noise * a))
    if n_drop_attr:
        dropped = rng.choice(a, size=n_drop_attr, replace=False)
        keep_mask = np.ones(a, dtype=bool)
        keep_mask[dropped] = False
        tgt_attrs = tgt_attrs[keep_mask]

    source = _graph("syn1", 0, n, src_triples, src_attrs, "synth://src/")
    target = _graph("syn2", n, n, tgt_triples + np.array([n, 0, n]), tgt_attrs + np.array([n, 0]),
                    "synth://tgt/")

    ills = np.column_stack([np.arange(n, dtype=np.int64), n + perm])
    n_ill = int(round(config.ill_fraction * n))
    if n_ill < 2:
        raise ValueError("ill_fraction keeps fewer than 2 ILL pairs")
    chosen = np.sort(rng.choice(n, size=n_ill, replace=False))
    ills = ills[chosen]

    split_seed = int(rng.integers(0, 2**31 - 1))
    train, test = split_ills(ills, split_fraction, split_seed)
    return AlignmentTask(source=source, target=target, train_ills=train,
                         test_ills=test, seed=config.seed)
