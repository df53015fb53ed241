"""Hamming-space retrieval over a packed code database, plus metrics.

Rankings sort by ascending distance with ties broken by ascending
database index, so every reported number is reproducible bit for bit.
Two items are relevant to each other iff their label sets intersect.

Per-query quantities are exact integer ratios and means accumulate in
query order, which keeps results independent of vectorization details.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import hamming
from .centers import CenterSet
from .errors import DimensionError
from .hamming import PackedCode


@dataclass(frozen=True)
class CodeIndex:
    """A searchable database: packed codes aligned with multi-hot labels."""

    k: int
    codes: np.ndarray  # (n, W) uint64
    labels: np.ndarray  # (n, q) uint8

    def __post_init__(self):
        if self.codes.shape[0] != self.labels.shape[0]:
            raise DimensionError(
                f"{self.codes.shape[0]} codes but {self.labels.shape[0]} label rows"
            )
        if self.codes.shape[1] != hamming.words_per_code(self.k):
            raise DimensionError(
                f"codes have {self.codes.shape[1]} words, k={self.k} needs "
                f"{hamming.words_per_code(self.k)}"
            )

    @property
    def n(self) -> int:
        return self.codes.shape[0]


def rank_by_distance(index: CodeIndex, query: PackedCode) -> np.ndarray:
    """Database indices by ascending distance, ties by ascending index."""
    if query.k != index.k:
        raise DimensionError(f"query has {query.k} bits, index has {index.k}")
    dists = hamming.distances_to(query.words, index.codes)
    return np.argsort(dists, kind="stable")


def relevant(query_labels, db_labels) -> bool:
    """True iff the two multi-hot label sets share at least one category."""
    a = np.asarray(query_labels, dtype=np.uint8)
    b = np.asarray(db_labels, dtype=np.uint8)
    if a.shape != b.shape:
        raise DimensionError(f"label shapes differ: {a.shape} vs {b.shape}")
    return bool(np.any(a & b))


def average_precision_at_n(relevance, n: int) -> float:
    """AP over the top n of a ranked 0/1 relevance list.

    Precision values at the relevant ranks are averaged over the number
    of relevant items found within the top n; no relevant items means 0.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    hits = 0
    acc = 0.0
    for rank, flag in enumerate(relevance[:n], start=1):
        if flag:
            hits += 1
            acc += hits / rank
    return acc / hits if hits else 0.0


def _ranked_relevance(index: CodeIndex, query_words, query_label) -> np.ndarray:
    dists = hamming.distances_to(query_words, index.codes)
    order = np.argsort(dists, kind="stable")
    rel = (index.labels @ query_label.astype(np.int64)) > 0
    return rel[order], dists


def _check_queries(index, query_words, query_labels):
    query_words = np.asarray(query_words, dtype=np.uint64)
    query_labels = np.asarray(query_labels, dtype=np.uint8)
    if query_words.ndim != 2 or query_words.shape[0] != query_labels.shape[0]:
        raise DimensionError("query codes and labels must align")
    if query_words.shape[0] == 0:
        raise ValueError("query set is empty")
    if query_labels.shape[1] != index.labels.shape[1]:
        raise DimensionError(
            f"queries have {query_labels.shape[1]} categories, index has {index.labels.shape[1]}"
        )
    return query_words, query_labels


def mean_average_precision(index: CodeIndex, query_words, query_labels, n: int) -> float:
    """Mean over queries of AP at rank cutoff n."""
    query_words, query_labels = _check_queries(index, query_words, query_labels)
    total = 0.0
    for qw, ql in zip(query_words, query_labels):
        rel, _ = _ranked_relevance(index, qw, ql)
        total += average_precision_at_n(rel, n)
    return total / query_words.shape[0]


def precision_at_n_curve(index: CodeIndex, query_words, query_labels, max_n: int) -> list:
    """[(r, mean precision in the top r)] for r = 1..max_n."""
    query_words, query_labels = _check_queries(index, query_words, query_labels)
    max_n = min(max_n, index.n)
    ranks = np.arange(1, max_n + 1, dtype=np.float64)
    acc = np.zeros(max_n)
    for qw, ql in zip(query_words, query_labels):
        rel, _ = _ranked_relevance(index, qw, ql)
        acc += np.cumsum(rel[:max_n], dtype=np.int64) / ranks
    acc /= query_words.shape[0]
    return [(r, float(p)) for r, p in zip(range(1, max_n + 1), acc)]


def precision_within_radius(index: CodeIndex, query_words, query_labels, radius: int = 2) -> float:
    """Mean precision among database items within the Hamming ball.

    A query whose ball is empty contributes 0.
    """
    query_words, query_labels = _check_queries(index, query_words, query_labels)
    total = 0.0
    for qw, ql in zip(query_words, query_labels):
        dists = hamming.distances_to(qw, index.codes)
        inside = dists <= radius
        hit = int(inside.sum())
        if hit:
            rel = (index.labels @ ql.astype(np.int64)) > 0
            total += int(rel[inside].sum()) / hit
    return total / query_words.shape[0]


def pr_curve(index: CodeIndex, query_words, query_labels) -> list:
    """[(recall, precision)] at every rank cutoff 1..n, in rank order.

    A query with no relevant database item counts as fully recalled at
    every cutoff (its precision contribution is zero anyway).
    """
    query_words, query_labels = _check_queries(index, query_words, query_labels)
    n = index.n
    ranks = np.arange(1, n + 1, dtype=np.float64)
    recall_acc = np.zeros(n)
    prec_acc = np.zeros(n)
    for qw, ql in zip(query_words, query_labels):
        rel, _ = _ranked_relevance(index, qw, ql)
        cum = np.cumsum(rel, dtype=np.int64)
        total_rel = int(cum[-1])
        recall_acc += cum / total_rel if total_rel else 1.0
        prec_acc += cum / ranks
    nq = query_words.shape[0]
    recall_acc /= nq
    prec_acc /= nq
    return list(zip(map(float, recall_acc), map(float, prec_acc)))


def center_distance_matrix(code_words, group_ids, cs: CenterSet) -> np.ndarray:
    """Mean distance from each code group to each center.

    Entry (i, j) is the mean Hamming distance between center j and the
    codes assigned to center i; rows for empty groups are NaN.
    """
    code_words = np.asarray(code_words, dtype=np.uint64)
    group_ids = np.asarray(group_ids, dtype=np.int64)
    if group_ids.shape != (code_words.shape[0],):
        raise DimensionError("one group id per code required")
    if group_ids.size and (group_ids.min() < 0 or group_ids.max() >= cs.m):
        raise ValueError(f"group ids must lie in [0, {cs.m})")
    dists = hamming.pairwise_distances(code_words, cs.packed())  # (n, m) ints
    out = np.full((cs.m, cs.m), np.nan)
    for i in range(cs.m):
        members = group_ids == i
        count = int(members.sum())
        if count:
            out[i] = dists[members].sum(axis=0, dtype=np.int64) / count
    return out


@dataclass
class EvalReport:
    """All retrieval metrics for one query set against one database.

    ``runtimes`` is informational only and never serialized, so report
    files stay byte-identical across reruns.
    """

    map_at_n: float
    p_at_h2: float
    precision_at_n: list  # [(rank, precision)]
    pr_curve: list  # [(recall, precision)]
    center_distances: np.ndarray | None = None  # (m, m), NaN for empty groups
    runtimes: dict = field(default_factory=dict)


def evaluate(
    index: CodeIndex,
    query_words,
    query_labels,
    map_n: int,
    pn_max: int | None = None,
    radius: int = 2,
    center_distances: np.ndarray | None = None,
) -> EvalReport:
    """Run the full metric battery for a query set."""
    runtimes = {}
    t0 = time.perf_counter()
    map_val = mean_average_precision(index, query_words, query_labels, map_n)
    runtimes["map"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    pn = precision_at_n_curve(index, query_words, query_labels, pn_max or map_n)
    runtimes["p_at_n"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    ph2 = precision_within_radius(index, query_words, query_labels, radius)
    runtimes["p_at_h2"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    pr = pr_curve(index, query_words, query_labels)
    runtimes["pr"] = time.perf_counter() - t0
    return EvalReport(
        map_at_n=map_val,
        p_at_h2=ph2,
        precision_at_n=pn,
        pr_curve=pr,
        center_distances=center_distances,
        runtimes=runtimes,
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def write_report(path, report: EvalReport) -> None:
    """Serialize a report as CSV sections (scalars, P@N, PR, distances)."""
    lines = ["metric,value"]
    lines.append(f"map_at_n,{_fmt(report.map_at_n)}")
    lines.append(f"p_at_h2,{_fmt(report.p_at_h2)}")
    lines.append("")
    lines.append("rank,precision")
    for rank, prec in report.precision_at_n:
        lines.append(f"{rank},{_fmt(prec)}")
    lines.append("")
    lines.append("recall,precision")
    for rec, prec in report.pr_curve:
        lines.append(f"{_fmt(rec)},{_fmt(prec)}")
    if report.center_distances is not None:
        lines.append("")
        lines.append("center_i,center_j,mean_distance")
        m = report.center_distances.shape[0]
        for i in range(m):
            for j in range(m):
                lines.append(f"{i},{j},{_fmt(report.center_distances[i, j])}")
    with open(path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")
