"""Count-based relation and attribute input features.

The relation and attribute vocabularies are shared across both languages:
the top-F ids by total frequency over the combined task, ties broken by
ascending id.  Feature rows hold raw participation counts; an entity's
relation count includes both head and tail occurrences, its attribute
count head occurrences only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _binio
from .data import AlignmentTask
from .linalg import SparseMatrix

CHANNELS = ("te", "re", "ae")

FEATS_MAGIC = b"KGFT"
FEATS_VERSION = 1


@dataclass(frozen=True)
class FeatureSet:
    """The three raw model input channels for the combined graph."""

    n_entities: int
    top_f: int
    include_topology: bool
    relation_feats: SparseMatrix | None
    attribute_feats: SparseMatrix | None
    vocab_relations: dict
    vocab_attributes: dict

    def active_channels(self) -> tuple[str, ...]:
        active = []
        if self.include_topology:
            active.append("te")
        if self.relation_feats is not None:
            active.append("re")
        if self.attribute_feats is not None:
            active.append("ae")
        return tuple(active)


def _top_f_vocab(ids: np.ndarray, weights: np.ndarray, top_f: int) -> dict:
    """Column map for the top-F ids by weight, ties broken by ascending id."""
    if ids.size == 0:
        return {}
    uniq, inverse = np.unique(ids, return_inverse=True)
    totals = np.zeros(uniq.size, dtype=np.int64)
    np.add.at(totals, inverse, weights)
    order = np.lexsort((uniq, -totals))
    kept = uniq[order][:top_f]
    return {int(v): col for col, v in enumerate(kept)}


def _count_matrix(entity_ids, column_ids, weights, n_entities, vocab, width) -> SparseMatrix:
    cols = np.array([vocab.get(int(c), -1) for c in column_ids], dtype=np.int64)
    keep = cols >= 0
    return SparseMatrix.from_coo(
        n_entities, width,
        entity_ids[keep], cols[keep], weights[keep].astype(np.float64))


def build_features(task: AlignmentTask, top_f: int = 1000) -> FeatureSet:
    """Build the relation and attribute count channels for ``task``."""
    if top_f < 1:
        raise ValueError("top_f must be at least 1")
    n = task.total_entities

    triples, tri_counts = task.all_relation_triples()
    vocab_rel = _top_f_vocab(triples[:, 1], tri_counts, top_f)
    rel_width = max(len(vocab_rel), 1)
    # head and tail occurrences both count
    rel_entities = np.concatenate([triples[:, 0], triples[:, 2]])
    rel_columns = np.concatenate([triples[:, 1], triples[:, 1]])
    rel_weights = np.concatenate([tri_counts, tri_counts])
    relation_feats = _count_matrix(rel_entities, rel_columns, rel_weights, n, vocab_rel, rel_width)

    pairs, attr_counts = task.all_attribute_pairs()
    vocab_attr = _top_f_vocab(pairs[:, 1], attr_counts, top_f)
    attr_width = max(len(vocab_attr), 1)
    attribute_feats = _count_matrix(pairs[:, 0], pairs[:, 1], attr_counts, n, vocab_attr, attr_width)

    return FeatureSet(
        n_entities=n,
        top_f=top_f,
        include_topology=True,
        relation_feats=relation_feats,
        attribute_feats=attribute_feats,
        vocab_relations=vocab_rel,
        vocab_attributes=vocab_attr,
    )


def parse_drop(spec: str) -> frozenset:
    """Parse an ablation flag value like ``none`` or ``te,re``."""
    spec = (spec or "none").strip().lower()
    if spec in ("", "none"):
        return frozenset()
    names = [s.strip() for s in spec.split(",") if s.strip()]
    return frozenset(names)


def ablate(features: FeatureSet, drop) -> FeatureSet:
    """Remove feature channels from downstream model construction."""
    drop = frozenset(drop)
    unknown = drop - set(CHANNELS)
    if unknown:
        raise ValueError(f"unknown feature channels {sorted(unknown)}; valid: {CHANNELS}")
    if drop == set(CHANNELS):
        raise ValueError("cannot drop all three feature channels")
    return replace(
        features,
        include_topology=features.include_topology and "te" not in drop,
        relation_feats=None if "re" in drop else features.relation_feats,
        attribute_feats=None if "ae" in drop else features.attribute_feats,
    )


def _write_sparse(f, m: SparseMatrix) -> None:
    _binio.write_array(f, np.array([m.rows, m.cols], dtype=np.int64))
    _binio.write_array(f, m.row_ptr)
    _binio.write_array(f, m.col_idx)
    _binio.write_array(f, m.values)


def _read_sparse(f) -> SparseMatrix:
    rows, cols = (int(v) for v in _binio.read_array(f))
    return SparseMatrix(rows, cols, _binio.read_array(f), _binio.read_array(f), _binio.read_array(f))


def save_features(features: FeatureSet, path) -> None:
    if features.relation_feats is None or features.attribute_feats is None:
        raise ValueError("only unablated feature sets are serialized")
    meta = {
        "n_entities": features.n_entities,
        "top_f": features.top_f,
        "vocab_relations": {str(k): v for k, v in features.vocab_relations.items()},
        "vocab_attributes": {str(k): v for k, v in features.vocab_attributes.items()},
    }
    with _binio.atomic_write(path) as f:
        _binio.write_header(f, FEATS_MAGIC, FEATS_VERSION, meta)
        _write_sparse(f, features.relation_feats)
        _write_sparse(f, features.attribute_feats)


def load_features(path) -> FeatureSet:
    with open(path, "rb") as f:
        meta = _binio.read_header(f, FEATS_MAGIC, FEATS_VERSION)
        relation_feats = _read_sparse(f)
        attribute_feats = _read_sparse(f)
    return FeatureSet(
        n_entities=meta["n_entities"],
        top_f=meta["top_f"],
        include_topology=True,
        relation_feats=relation_feats,
        attribute_feats=attribute_feats,
        vocab_relations={int(k): v for k, v in meta["vocab_relations"].items()},
        vocab_attributes={int(k): v for k, v in meta["vocab_attributes"].items()},
    )
