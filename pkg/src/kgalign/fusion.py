"""Fusing graph embeddings with externally produced textual signals.

Two integration routes: weighted concatenation of a textual embedding
table with the graph embedding (both row-normalized first, so the blend
weight compares like with like), and score-based reranking of candidate
pools.  This module never computes textual embeddings itself; it trusts
the TSV file contracts.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ._binio import atomic_write
from .linalg import l2_normalize_rows


@dataclass(frozen=True)
class TextualEmbeddingFile:
    """Entity id -> dense vector table with a single fixed dimension."""

    dim: int
    rows: dict


def save_text_embeddings(path, dim: int, rows: dict) -> None:
    """Write the embedding TSV: ``#dim <d>`` then ``<id>\\t<v1> <v2> ...``."""
    with atomic_write(path) as f:
        out = io.StringIO()
        out.write(f"#dim {dim}\n")
        for eid in sorted(rows):
            vec = np.asarray(rows[eid], dtype=np.float64)
            if vec.shape != (dim,):
                raise ValueError(f"entity {eid}: vector has shape {vec.shape}, expected ({dim},)")
            out.write(f"{int(eid)}\t{' '.join(repr(float(v)) for v in vec)}\n")
        f.write(out.getvalue().encode("utf-8"))


def load_text_embeddings(path, total_entities: int | None = None) -> TextualEmbeddingFile:
    rows = {}
    with io.open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if not header.startswith("#dim "):
            raise ValueError("embedding file must start with '#dim <d>'")
        try:
            dim = int(header.split()[1])
        except (IndexError, ValueError):
            raise ValueError("malformed '#dim' header") from None
        if dim < 1:
            raise ValueError("embedding dimension must be positive")
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"embedding file line {lineno}: expected '<id>\\t<values>'")
            eid = int(parts[0])
            vec = np.array(parts[1].split(" "), dtype=np.float64)
            if vec.size != dim:
                raise ValueError(f"embedding file line {lineno}: {vec.size} values, expected {dim}")
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"embedding file line {lineno}: non-finite value")
            if total_entities is not None and not 0 <= eid < total_entities:
                raise ValueError(f"embedding file line {lineno}: entity {eid} outside the task")
            if eid in rows:
                raise ValueError(f"embedding file line {lineno}: duplicate entity {eid}")
            rows[eid] = vec
    if not rows:
        raise ValueError("embedding file has no rows")
    return TextualEmbeddingFile(dim=dim, rows=rows)


def save_scores(path, entries) -> None:
    """Write the score TSV: ``<src>\\t<tgt>\\t<score>`` per pair."""
    with atomic_write(path) as f:
        out = io.StringIO()
        for src, tgt, score in entries:
            out.write(f"{int(src)}\t{int(tgt)}\t{repr(float(score))}\n")
        f.write(out.getvalue().encode("utf-8"))


def load_scores(path) -> dict:
    scores = {}
    with io.open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"score file line {lineno}: expected '<src>\\t<tgt>\\t<score>'")
            key = (int(parts[0]), int(parts[1]))
            value = float(parts[2])
            if not np.isfinite(value):
                raise ValueError(f"score file line {lineno}: non-finite score")
            if key in scores:
                raise ValueError(f"score file line {lineno}: duplicate pair {key}")
            scores[key] = value
    if not scores:
        raise ValueError("score file has no entries")
    return scores


def weighted_concat(graph_emb: np.ndarray, text: TextualEmbeddingFile,
                    tau: float) -> tuple[np.ndarray, int]:
    """Blend graph and textual embeddings: [tau * G | (1 - tau) * B].

    Both sources are row-L2-normalized before scaling.  Entities missing
    from the textual table get a zero text block; the count of such rows
    is returned alongside the fused matrix.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    graph_emb = np.asarray(graph_emb, dtype=np.float64)
    n = graph_emb.shape[0]
    text_mat = np.zeros((n, text.dim))
    missing = 0
    for eid in range(n):
        vec = text.rows.get(eid)
        if vec is None:
            missing += 1
        else:
            text_mat[eid] = vec
    fused = np.concatenate([
        tau * l2_normalize_rows(graph_emb),
        (1.0 - tau) * l2_normalize_rows(text_mat),
    ], axis=1)
    return fused, missing
