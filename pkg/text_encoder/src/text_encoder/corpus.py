"""Description corpora and the TSV formats shared with the alignment engine."""

from __future__ import annotations

import io
from dataclasses import dataclass


@dataclass(frozen=True)
class DescriptionCorpus:
    """Entity id -> description text for one language side."""

    texts: dict

    def __len__(self) -> int:
        return len(self.texts)

    def get(self, entity_id: int):
        return self.texts.get(int(entity_id))


def load_descriptions(path) -> DescriptionCorpus:
    """Read a ``<entity_id>\\t<text>`` TSV; missing entities are simply absent."""
    texts = {}
    with io.open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2 or not parts[1].strip():
                raise ValueError(f"{path}:{lineno}: expected '<entity_id>\\t<text>'")
            try:
                eid = int(parts[0])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer entity id") from None
            if eid in texts:
                raise ValueError(f"{path}:{lineno}: duplicate entity id {eid}")
            texts[eid] = parts[1].strip()
    if not texts:
        raise ValueError(f"{path}: no descriptions")
    return DescriptionCorpus(texts=texts)


def save_descriptions(path, texts: dict) -> None:
    with io.open(path, "w", encoding="utf-8") as f:
        for eid in sorted(texts):
            f.write(f"{int(eid)}\t{texts[eid]}\n")


def load_ills(path):
    """Read ``<src_id>\\t<tgt_id>`` pairs."""
    pairs = []
    with io.open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected '<src>\\t<tgt>'")
            pairs.append((int(parts[0]), int(parts[1])))
    if not pairs:
        raise ValueError(f"{path}: no pairs")
    return pairs


def load_pool(path):
    """Read the candidate-pool TSV emitted by the alignment engine."""
    pools = []
    with io.open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected '<src>\\t<c1,c2,...>'")
            pools.append((int(parts[0]), [int(c) for c in parts[1].split(",") if c]))
    if not pools:
        raise ValueError(f"{path}: empty pool file")
    return pools


def save_embeddings(path, dim: int, rows: dict) -> None:
    """Write the embedding TSV consumed by the alignment engine's fusion."""
    with io.open(path, "w", encoding="utf-8") as f:
        f.write(f"#dim {dim}\n")
        for eid in sorted(rows):
            vec = rows[eid]
            if len(vec) != dim:
                raise ValueError(f"entity {eid}: vector length {len(vec)} != {dim}")
            f.write(f"{int(eid)}\t{' '.join(repr(float(v)) for v in vec)}\n")


def save_scores(path, entries) -> None:
    """Write the ``<src>\\t<tgt>\\t<score>`` TSV consumed by rerank."""
    with io.open(path, "w", encoding="utf-8") as f:
        for src, tgt, score in entries:
            f.write(f"{int(src)}\t{int(tgt)}\t{repr(float(score))}\n")
