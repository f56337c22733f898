"""Bilingual knowledge-graph ingestion and the train/test ILL split.

Input directories follow the tab-separated DBP layout: ``ent_ids_1/2``
(``<int id>\\t<uri>``), ``triples_1/2`` (``<head>\\t<relation>\\t<tail>``),
``attrs_1/2`` (``<entity>\\t<attribute>``) and ``ill_ent_ids``
(``<source>\\t<target>``).  Raw ids are remapped to one dense id space:
source entities get 0..n1-1 in ascending raw-id order, target entities
n1..n1+n2-1, so the loaded task is independent of input line order.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np

from . import _binio

TASK_MAGIC = b"KGTK"
TASK_VERSION = 1


@dataclass(frozen=True)
class LanguageGraph:
    """One monolingual graph, addressed in the combined dense id space."""

    language_tag: str
    entity_count: int
    id_offset: int
    relation_triples: np.ndarray  # (m, 3) unique (head, relation, tail)
    triple_counts: np.ndarray  # (m,) input multiplicity of each triple
    attribute_pairs: np.ndarray  # (a, 2) unique (entity, attribute)
    attribute_counts: np.ndarray
    uri_map: dict = field(repr=False)

    def __post_init__(self):
        lo, hi = self.id_offset, self.id_offset + self.entity_count
        for name in ("relation_triples", "attribute_pairs"):
            arr = getattr(self, name)
            ids = arr[:, [0, 2]] if name == "relation_triples" else arr[:, [0]]
            if ids.size and (ids.min() < lo or ids.max() >= hi):
                raise ValueError(f"{name} references an entity outside [{lo}, {hi})")

    def entity_ids(self) -> np.ndarray:
        return np.arange(self.id_offset, self.id_offset + self.entity_count, dtype=np.int64)


@dataclass(frozen=True)
class AlignmentTask:
    """A source/target graph pair with seed ILLs split into train and test."""

    source: LanguageGraph
    target: LanguageGraph
    train_ills: np.ndarray  # (k, 2) rows (source id, target id)
    test_ills: np.ndarray
    seed: int

    def __post_init__(self):
        offset = self.source.entity_count
        total = offset + self.target.entity_count
        for name in ("train_ills", "test_ills"):
            ills = getattr(self, name)
            if ills.size == 0:
                continue
            if ills[:, 0].min() < 0 or ills[:, 0].max() >= offset:
                raise ValueError(f"{name} source entity out of range")
            if ills[:, 1].min() < offset or ills[:, 1].max() >= total:
                raise ValueError(f"{name} target entity out of range")
        combined = np.vstack([self.train_ills, self.test_ills])
        for col in (0, 1):
            if np.unique(combined[:, col]).size != combined.shape[0]:
                raise ValueError("an entity appears in more than one ILL")

    @property
    def offset(self) -> int:
        return self.source.entity_count

    @property
    def total_entities(self) -> int:
        return self.source.entity_count + self.target.entity_count

    def all_relation_triples(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique triples of both graphs with their multiplicities."""
        triples = np.vstack([self.source.relation_triples, self.target.relation_triples])
        counts = np.concatenate([self.source.triple_counts, self.target.triple_counts])
        return triples, counts

    def all_attribute_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = np.vstack([self.source.attribute_pairs, self.target.attribute_pairs])
        counts = np.concatenate([self.source.attribute_counts, self.target.attribute_counts])
        return pairs, counts

    def undirected_edges(self) -> np.ndarray:
        """(head, tail) pairs of all relation triples, for adjacency building."""
        triples, _ = self.all_relation_triples()
        return triples[:, [0, 2]]


def disjoint_union_ids(task: AlignmentTask) -> tuple[int, int]:
    """Return (offset of the first target entity, total entity count)."""
    return task.offset, task.total_entities


def _parse_int_lines(path: str, n_fields: int) -> np.ndarray:
    rows = []
    with io.open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != n_fields:
                raise ValueError(
                    f"{os.path.basename(path)}:{lineno}: expected {n_fields} "
                    f"tab-separated fields, got {len(parts)}"
                )
            try:
                rows.append([int(p) for p in parts])
            except ValueError:
                raise ValueError(f"{os.path.basename(path)}:{lineno}: non-integer field") from None
            if any(v < 0 for v in rows[-1]):
                raise ValueError(f"{os.path.basename(path)}:{lineno}: negative id")
    return np.asarray(rows, dtype=np.int64).reshape(-1, n_fields)


def _parse_entity_file(path: str) -> dict:
    uri_by_raw = {}
    with io.open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(
                    f"{os.path.basename(path)}:{lineno}: expected '<id>\\t<uri>'"
                )
            try:
                raw = int(parts[0])
            except ValueError:
                raise ValueError(f"{os.path.basename(path)}:{lineno}: non-integer entity id") from None
            if raw < 0:
                raise ValueError(f"{os.path.basename(path)}:{lineno}: negative entity id")
            if raw in uri_by_raw:
                raise ValueError(f"{os.path.basename(path)}:{lineno}: duplicate entity id {raw}")
            uri_by_raw[raw] = parts[1]
    return uri_by_raw


def _collapse_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deduplicate rows keeping multiplicities, in lexicographic order."""
    if rows.size == 0:
        return rows, np.zeros(0, dtype=np.int64)
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    return uniq, counts.astype(np.int64)


def _remap(values: np.ndarray, sorted_raw: np.ndarray, offset: int, what: str,
           filename: str) -> np.ndarray:
    """Map raw ids to dense ids (rank in sorted order plus offset)."""
    ranks = np.searchsorted(sorted_raw, values)
    bad = (ranks >= sorted_raw.size) | (sorted_raw[np.minimum(ranks, sorted_raw.size - 1)] != values)
    if bad.any():
        raise ValueError(f"{filename}: unknown {what} id {int(values[bad][0])}")
    return ranks.astype(np.int64) + offset


def _build_graph(tag, offset, uri_by_raw, triples_raw, attrs_raw, tri_name, attr_name):
    raw_ids = np.asarray(sorted(uri_by_raw), dtype=np.int64)
    uri_map = {offset + dense: uri_by_raw[int(raw)] for dense, raw in enumerate(raw_ids)}

    triples = triples_raw.copy()
    triples[:, 0] = _remap(triples_raw[:, 0], raw_ids, offset, "entity", tri_name)
    triples[:, 2] = _remap(triples_raw[:, 2], raw_ids, offset, "entity", tri_name)
    triples, tri_counts = _collapse_rows(triples)

    attrs = attrs_raw.copy()
    attrs[:, 0] = _remap(attrs_raw[:, 0], raw_ids, offset, "entity", attr_name)
    attrs, attr_counts = _collapse_rows(attrs)

    graph = LanguageGraph(
        language_tag=tag,
        entity_count=len(raw_ids),
        id_offset=offset,
        relation_triples=triples,
        triple_counts=tri_counts,
        attribute_pairs=attrs,
        attribute_counts=attr_counts,
        uri_map=uri_map,
    )
    return graph, raw_ids


def split_ills(ills: np.ndarray, split_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform random split of ILL rows, deterministic in the seed."""
    if not 0.0 < split_fraction < 1.0:
        raise ValueError("split_fraction must lie strictly between 0 and 1")
    n = ills.shape[0]
    n_train = int(round(split_fraction * n))
    if n_train < 1 or n_train >= n:
        raise ValueError(f"split of {n} ILLs at fraction {split_fraction} leaves an empty side")
    # canonical order first so the split ignores input line order
    order = np.lexsort((ills[:, 1], ills[:, 0]))
    ills = ills[order]
    perm = np.random.default_rng(seed).permutation(n)
    train = ills[np.sort(perm[:n_train])]
    test = ills[np.sort(perm[n_train:])]
    return train, test


def _language_tags(dir_path: str) -> tuple[str, str]:
    base = os.path.basename(os.path.normpath(dir_path))
    parts = base.split("_")
    if len(parts) == 2 and all(p.isalpha() for p in parts):
        return parts[0], parts[1]
    return "lang1", "lang2"


def load_task(dir_path, split_fraction: float = 0.3, seed: int = 0) -> AlignmentTask:
    """Ingest a task directory and split its ILLs into train/test."""
    dir_path = os.fspath(dir_path)
    paths = {name: os.path.join(dir_path, name) for name in (
        "ent_ids_1", "ent_ids_2", "triples_1", "triples_2",
        "attrs_1", "attrs_2", "ill_ent_ids")}
    for name, p in paths.items():
        if not os.path.exists(p):
            raise FileNotFoundError(f"missing input file {name} in {dir_path}")

    tag1, tag2 = _language_tags(dir_path)
    uris_1 = _parse_entity_file(paths["ent_ids_1"])
    uris_2 = _parse_entity_file(paths["ent_ids_2"])
    if not uris_1 or not uris_2:
        raise ValueError("each graph needs at least one entity")

    source, raw_1 = _build_graph(
        tag1, 0, uris_1,
        _parse_int_lines(paths["triples_1"], 3),
        _parse_int_lines(paths["attrs_1"], 2),
        "triples_1", "attrs_1")
    target, raw_2 = _build_graph(
        tag2, source.entity_count, uris_2,
        _parse_int_lines(paths["triples_2"], 3),
        _parse_int_lines(paths["attrs_2"], 2),
        "triples_2", "attrs_2")

    ills_raw = _parse_int_lines(paths["ill_ent_ids"], 2)
    if ills_raw.shape[0] == 0:
        raise ValueError("ill_ent_ids is empty")
    ills = np.empty_like(ills_raw)
    ills[:, 0] = _remap(ills_raw[:, 0], raw_1, 0, "source entity", "ill_ent_ids")
    ills[:, 1] = _remap(ills_raw[:, 1], raw_2, source.entity_count, "target entity", "ill_ent_ids")

    train, test = split_ills(ills, split_fraction, seed)
    return AlignmentTask(source=source, target=target, train_ills=train, test_ills=test, seed=seed)


def _graph_meta(g: LanguageGraph) -> dict:
    return {
        "language_tag": g.language_tag,
        "entity_count": g.entity_count,
        "id_offset": g.id_offset,
        "uris": [g.uri_map[i] for i in range(g.id_offset, g.id_offset + g.entity_count)],
    }


def save_task(task: AlignmentTask, path) -> None:
    meta = {
        "seed": task.seed,
        "source": _graph_meta(task.source),
        "target": _graph_meta(task.target),
    }
    with _binio.atomic_write(path) as f:
        _binio.write_header(f, TASK_MAGIC, TASK_VERSION, meta)
        for g in (task.source, task.target):
            _binio.write_array(f, g.relation_triples)
            _binio.write_array(f, g.triple_counts)
            _binio.write_array(f, g.attribute_pairs)
            _binio.write_array(f, g.attribute_counts)
        _binio.write_array(f, task.train_ills)
        _binio.write_array(f, task.test_ills)


def load_task_bin(path) -> AlignmentTask:
    with open(path, "rb") as f:
        meta = _binio.read_header(f, TASK_MAGIC, TASK_VERSION)
        graphs = []
        for key in ("source", "target"):
            gm = meta[key]
            triples = _binio.read_array(f).reshape(-1, 3)
            tri_counts = _binio.read_array(f)
            attrs = _binio.read_array(f).reshape(-1, 2)
            attr_counts = _binio.read_array(f)
            uri_map = {gm["id_offset"] + i: u for i, u in enumerate(gm["uris"])}
            graphs.append(LanguageGraph(
                language_tag=gm["language_tag"],
                entity_count=gm["entity_count"],
                id_offset=gm["id_offset"],
                relation_triples=triples,
                triple_counts=tri_counts,
                attribute_pairs=attrs,
                attribute_counts=attr_counts,
                uri_map=uri_map,
            ))
        train = _binio.read_array(f).reshape(-1, 2)
        test = _binio.read_array(f).reshape(-1, 2)
    return AlignmentTask(source=graphs[0], target=graphs[1],
                         train_ills=train, test_ills=test, seed=meta["seed"])


def export_task_dir(task: AlignmentTask, out_dir) -> None:
    """Write a task back out in the raw tab-separated directory layout.

    Local (per-graph) ids are used in the files; duplicate triples are
    repeated to preserve multiplicity.  The train/test split is not part of
    this layout, only the combined ILL list.
    """
    os.makedirs(out_dir, exist_ok=True)

    def local(g, ids):
        return ids - g.id_offset

    for suffix, g in (("1", task.source), ("2", task.target)):
        with io.open(os.path.join(out_dir, f"ent_ids_{suffix}"), "w", encoding="utf-8") as f:
            for gid in g.entity_ids():
                f.write(f"{gid - g.id_offset}\t{g.uri_map[int(gid)]}\n")
        with io.open(os.path.join(out_dir, f"triples_{suffix}"), "w", encoding="utf-8") as f:
            for (h, r, t), c in zip(g.relation_triples, g.triple_counts):
                line = f"{h - g.id_offset}\t{r}\t{t - g.id_offset}\n"
                f.write(line * int(c))
        with io.open(os.path.join(out_dir, f"attrs_{suffix}"), "w", encoding="utf-8") as f:
            for (e, a), c in zip(g.attribute_pairs, g.attribute_counts):
                f.write(f"{e - g.id_offset}\t{a}\n" * int(c))

    ills = np.vstack([task.train_ills, task.test_ills])
    ills = ills[np.lexsort((ills[:, 1], ills[:, 0]))]
    with io.open(os.path.join(out_dir, "ill_ent_ids"), "w", encoding="utf-8") as f:
        for s, t in ills:
            f.write(f"{local(task.source, s)}\t{local(task.target, t)}\n")
