"""Filtered link-prediction evaluation: per-query ranks, MRR, Hits@N.

Both directions are ranked for every triple (2*|split| queries, pooled),
with per-direction breakdowns. Candidates present in the filter are
removed, except the query itself. Ties use the mean-rank policy:
rank = 1 + #strictly_higher + #ties/2, with exact float equality.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import DatasetBundle, Triple
from .errors import DataError, UsageError
from .model import ModelParams, candidate_scores

HITS_NS = (1, 3, 10)
DIRECTIONS = ("replace_head", "replace_tail")


@dataclass(frozen=True)
class DirectionMetrics:
    mrr: float
    hits: dict
    count: int


@dataclass(frozen=True)
class MetricsReport:
    mrr: float
    hits: dict
    per_direction: dict
    count: int

    def kv_line(self) -> str:
        return (f"mrr={self.mrr:.3f} hits1={self.hits[1]:.3f} "
                f"hits3={self.hits[3]:.3f} hits10={self.hits[10]:.3f}")

    def table(self) -> str:
        header = f"{'direction':<10} {'mrr':>7} {'h@1':>7} {'h@3':>7} {'h@10':>7} {'count':>7}"
        rows = [header]
        entries = [("both", self.mrr, self.hits, self.count)]
        for name in ("head", "tail"):
            sub = self.per_direction[name]
            entries.append((name, sub.mrr, sub.hits, sub.count))
        for name, mrr, hits, count in entries:
            rows.append(f"{name:<10} {mrr:>7.3f} {hits[1]:>7.3f} "
                        f"{hits[3]:>7.3f} {hits[10]:>7.3f} {count:>7}")
        return "\n".join(rows)


def rank_from_scores(scores: np.ndarray, target: int, removed) -> float:
    """Mean-tie rank of `target` among the candidates left after deleting
    `removed` (the target survives even if listed). Exact score equality."""
    keep = np.ones(scores.shape[0], dtype=bool)
    removed = np.asarray(list(removed), dtype=np.int64)
    if removed.size:
        keep[removed] = False
    keep[target] = True
    q = scores[target]
    kept = scores[keep]
    higher = int((kept > q).sum())
    ties = int((kept == q).sum()) - 1  # the target always ties itself
    return 1.0 + higher + ties / 2.0


def rank_one(params: ModelParams, query: Triple, direction: str,
             bundle: DatasetBundle) -> float:
    """Filtered rank of the query under head or tail replacement."""
    if direction not in DIRECTIONS:
        raise DataError(f"invalid direction {direction!r}")
    h, r, t = query
    scores = candidate_scores(params, query, direction)
    if direction == "replace_tail":
        known = bundle.tails_by_hr.get((h, r), ())
        target = t
    else:
        known = bundle.heads_by_rt.get((r, t), ())
        target = h
    return rank_from_scores(scores, target, known)


def _metrics(ranks: np.ndarray) -> tuple:
    mrr = float((1.0 / ranks).mean())
    hits = {n: float((ranks <= n).mean()) for n in HITS_NS}
    return mrr, hits


def evaluate(params: ModelParams, split: list, bundle: DatasetBundle,
             workers: int = 1) -> MetricsReport:
    """Rank every triple in both directions and aggregate.

    workers > 1 fans the queries out over a thread pool; results are
    aggregated in query order, so the report is identical at any width.
    """
    if not split:
        raise DataError("empty evaluation split")
    if workers < 1:
        raise UsageError("workers must be >= 1")
    queries = [(triple, direction) for triple in split for direction in DIRECTIONS]

    def run(q):
        triple, direction = q
        return rank_one(params, triple, direction, bundle)

    if workers == 1:
        ranks = [run(q) for q in queries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ranks = list(pool.map(run, queries))
    ranks = np.asarray(ranks)

    head_ranks = ranks[0::2]
    tail_ranks = ranks[1::2]
    mrr, hits = _metrics(ranks)
    per_direction = {}
    for name, sub in (("head", head_ranks), ("tail", tail_ranks)):
        sub_mrr, sub_hits = _metrics(sub)
        per_direction[name] = DirectionMetrics(mrr=sub_mrr, hits=sub_hits, count=sub.size)
    return MetricsReport(mrr=mrr, hits=hits, per_direction=per_direction,
                         count=ranks.size)
