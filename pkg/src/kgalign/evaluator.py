"""L1-distance ranking, Hits@k and candidate-pool export.

The default candidate universe is the gold side of the test ILLs; pass
``universe="all"`` to rank against every entity of the counterpart graph.
Ties in distance are broken by ascending entity id, so rankings are fully
deterministic.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import AlignmentTask

SRC_TO_TGT = "src_to_tgt"
TGT_TO_SRC = "tgt_to_src"

_BLOCK = 64  # query rows per distance block; keeps peak memory bounded


@dataclass(frozen=True)
class RankingResult:
    direction: str
    hits: dict
    per_query_rank: np.ndarray  # 1-based gold ranks, one per test query
    mean_rank: float
    mrr: float

    def as_report(self) -> dict:
        return {
            "hits": {str(k): v for k, v in self.hits.items()},
            "mean_rank": self.mean_rank,
            "mrr": self.mrr,
            "queries": int(self.per_query_rank.size),
        }


@dataclass(frozen=True)
class CandidatePool:
    """Per source test entity, its nearest target candidates in order."""

    q: int
    src_ids: np.ndarray  # (Q,)
    candidates: np.ndarray  # (Q, m) with m = min(q, universe size)


def hits_at_k(per_query_rank, k: int) -> float:
    ranks = np.asarray(per_query_rank)
    if ranks.size == 0:
        raise ValueError("empty rank list")
    if ranks.min() < 1:
        raise ValueError("ranks are 1-based")
    return float(np.count_nonzero(ranks <= k) / ranks.size)


def _query_gold_candidates(task: AlignmentTask, direction: str, universe: str):
    if direction == SRC_TO_TGT:
        queries, golds = task.test_ills[:, 0], task.test_ills[:, 1]
        lo, hi = task.offset, task.total_entities
    elif direction == TGT_TO_SRC:
        queries, golds = task.test_ills[:, 1], task.test_ills[:, 0]
        lo, hi = 0, task.offset
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if universe == "test":
        candidates = np.sort(golds)
    elif universe == "all":
        candidates = np.arange(lo, hi, dtype=np.int64)
    else:
        raise ValueError(f"unknown universe {universe!r}")
    return queries, golds, candidates


def _check_rows(emb: np.ndarray, ids: np.ndarray) -> None:
    if ids.size and ids.max() >= emb.shape[0]:
        raise ValueError(f"entity {int(ids.max())} has no embedding row")


def _summarize(direction: str, ranks: np.ndarray, ks) -> RankingResult:
    hits = {int(k): hits_at_k(ranks, int(k)) for k in ks}
    return RankingResult(
        direction=direction,
        hits=hits,
        per_query_rank=ranks,
        mean_rank=float(ranks.mean()),
        mrr=float((1.0 / ranks).mean()),
    )


def rank_all(emb: np.ndarray, task: AlignmentTask, direction: str = SRC_TO_TGT,
             ks=(1, 10, 50), universe: str = "test") -> RankingResult:
    """Rank every test query's gold counterpart by ascending L1 distance."""
    emb = np.asarray(emb, dtype=np.float64)
    queries, golds, candidates = _query_gold_candidates(task, direction, universe)
    _check_rows(emb, queries)
    _check_rows(emb, candidates)

    cand_emb = emb[candidates]
    ranks = np.empty(queries.size, dtype=np.int64)
    for start in range(0, queries.size, _BLOCK):
        stop = min(start + _BLOCK, queries.size)
        dist = cdist(emb[queries[start:stop]], cand_emb, metric="cityblock")
        gold_block = golds[start:stop]
        gold_pos = np.searchsorted(candidates, gold_block) if universe == "test" \
            else gold_block - candidates[0]
        d_gold = dist[np.arange(stop - start), gold_pos]
        closer = (dist < d_gold[:, None]).sum(axis=1)
        tied_before = ((dist == d_gold[:, None]) & (candidates[None, :] < gold_block[:, None])).sum(axis=1)
        ranks[start:stop] = 1 + closer + tied_before
    return _summarize(direction, ranks, ks)


def top_q_candidates(emb: np.ndarray, task: AlignmentTask, q: int,
                     universe: str = "test") -> CandidatePool:
    """The q nearest target candidates per source test entity."""
    if q < 1:
        raise ValueError("q must be at least 1")
    emb = np.asarray(emb, dtype=np.float64)
    queries, _, candidates = _query_gold_candidates(task, SRC_TO_TGT, universe)
    _check_rows(emb, queries)
    _check_rows(emb, candidates)

    m = min(q, candidates.size)
    cand_emb = emb[candidates]
    out = np.empty((queries.size, m), dtype=np.int64)
    for start in range(0, queries.size, _BLOCK):
        stop = min(start + _BLOCK, queries.size)
        dist = cdist(emb[queries[start:stop]], cand_emb, metric="cityblock")
        for row in range(stop - start):
            order = np.lexsort((candidates, dist[row]))
            out[start + row] = candidates[order[:m]]
    return CandidatePool(q=q, src_ids=queries.copy(), candidates=out)


def pool_recall_at_q(pool: CandidatePool, task: AlignmentTask) -> float:
    """Fraction of pools that contain the gold counterpart at all."""
    gold_of = {int(s): int(t) for s, t in task.test_ills}
    found = sum(gold_of[int(s)] in set(map(int, row))
                for s, row in zip(pool.src_ids, pool.candidates))
    return found / len(pool.src_ids)


def rerank_pool(pool: CandidatePool, scores: dict, task: AlignmentTask,
                ks=(1, 10, 50)) -> RankingResult:
    """Reorder each pool by descending score and rank the gold counterpart.

    ``scores`` maps (source id, candidate id) to a real score; every pool
    pair must be covered.  Ties keep the original pool order.  A gold
    counterpart missing from its pool gets the sentinel rank q + 1 and is
    a miss at every cutoff, so Hits@k never exceeds the pool's recall.
    """
    gold_of = {int(s): int(t) for s, t in task.test_ills}
    ranks = np.empty(pool.src_ids.size, dtype=np.int64)
    found = np.zeros(pool.src_ids.size, dtype=bool)
    for i, (src, cands) in enumerate(zip(pool.src_ids, pool.candidates)):
        src = int(src)
        missing = [(src, int(c)) for c in cands if (src, int(c)) not in scores]
        if missing:
            raise ValueError(f"missing scores for pool pairs: {missing[:5]}")
        vals = np.array([scores[(src, int(c))] for c in cands], dtype=np.float64)
        order = np.argsort(-vals, kind="stable")
        reordered = cands[order]
        gold = gold_of[src]
        where = np.nonzero(reordered == gold)[0]
        found[i] = bool(where.size)
        ranks[i] = int(where[0]) + 1 if where.size else pool.q + 1
    hits = {int(k): float(np.count_nonzero(found & (ranks <= int(k))) / ranks.size)
            for k in ks}
    return RankingResult(direction=SRC_TO_TGT, hits=hits, per_query_rank=ranks,
                         mean_rank=float(ranks.mean()), mrr=float((1.0 / ranks).mean()))


def save_pool(pool: CandidatePool, path) -> None:
    from ._binio import atomic_write
    with atomic_write(path) as f:
        text = io.StringIO()
        for src, cands in zip(pool.src_ids, pool.candidates):
            text.write(f"{int(src)}\t{','.join(str(int(c)) for c in cands)}\n")
        f.write(text.getvalue().encode("utf-8"))


def load_pool(path, q: int | None = None) -> CandidatePool:
    src_ids, rows = [], []
    with io.open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"pool file line {lineno}: expected '<src>\\t<c1,c2,...>'")
            src_ids.append(int(parts[0]))
            rows.append([int(c) for c in parts[1].split(",") if c])
    if not rows:
        raise ValueError("pool file is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("pool rows have inconsistent candidate counts")
    return CandidatePool(q=q if q is not None else width,
                         src_ids=np.asarray(src_ids, dtype=np.int64),
                         candidates=np.asarray(rows, dtype=np.int64))
