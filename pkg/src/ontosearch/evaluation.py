"""Retrieval effectiveness: AP, 11-point curves, MAP and the Fisher randomization test."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

RECALL_LEVELS = tuple(i / 10 for i in range(11))
DEFAULT_PERMUTATIONS = 100_000
MAX_EXHAUSTIVE = 20
TIE_TOLERANCE = 1e-9


class EvaluationError(Exception):
    pass


# -- per-query metrics -----------------------------------------------------------


def average_precision(ranking: Sequence[str], relevant: Iterable[str]) -> float:
    relevant = set(relevant)
    if not relevant:
        raise EvaluationError("average precision needs at least one relevant document")
    hits = 0
    total = 0.0
    for rank, doc in enumerate(ranking, 1):
        if doc in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


def interpolated_precision_curve(ranking: Sequence[str], relevant: Iterable[str]) -> list[float]:
    """Max precision at any cutoff whose recall reaches each of 0.0, 0.1, ..., 1.0."""
    relevant = set(relevant)
    if not relevant:
        raise EvaluationError("interpolated precision needs at least one relevant document")
    n_rel = len(relevant)
    curve = [0.0] * 11
    hits = 0
    for rank, doc in enumerate(ranking, 1):
        if doc not in relevant:
            continue
        hits += 1
        p = hits / rank
        # recall hits/n_rel reaches level i/10 iff 10*hits >= i*n_rel
        for i in range(11):
            if 10 * hits >= i * n_rel and p > curve[i]:
                curve[i] = p
    return curve


def f_measure(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def mean_average_precision(aps: Iterable[float]) -> float:
    aps = list(aps)
    if not aps:
        raise EvaluationError("MAP needs at least one evaluated query")
    return math.fsum(aps) / len(aps)


def improvement(map_a: float, map_b: float) -> float:
    """Relative gain of A over B, as a fraction."""
    return (map_a - map_b) / map_b


def format_percent(x: float, decimals: int = 1) -> str:
    return f"{100 * x:.{decimals}f}%"


# -- randomization test ---------------------------------------------------------------


@dataclass(frozen=True)
class RandomizationReport:
    observed_diff: float
    n_minus: int
    n_plus: int
    permutations: int
    p_two_sided: float
    seed: int | None
    mode: str  # "sampled" | "exhaustive"

    def __post_init__(self):
        if not (0 <= self.n_minus <= self.permutations and 0 <= self.n_plus <= self.permutations):
            raise EvaluationError("permutation counts out of range")
        expected = two_sided_p(self.n_minus, self.n_plus, self.permutations)
        if not math.isclose(self.p_two_sided, expected, rel_tol=0, abs_tol=1e-15):
            raise EvaluationError(f"p={self.p_two_sided} does not match counts (expected {expected})")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "RandomizationReport":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def two_sided_p(n_minus: int, n_plus: int, permutations: int) -> float:
    return min(1.0, (n_minus + n_plus) / permutations)


def _count_extremes(signs: np.ndarray, d: np.ndarray, bound: float, tol: float) -> tuple[int, int]:
    sums = signs @ d
    return int(np.count_nonzero(sums <= -bound + tol)), int(np.count_nonzero(sums >= bound - tol))


def fisher_randomization(ap_a: Sequence[float], ap_b: Sequence[float], permutations: int = DEFAULT_PERMUTATIONS,
                         seed: int | None = 0, exhaustive: bool = False, chunk: int = 1 << 15) -> RandomizationReport:
    """Paired two-sided sign-flip test on per-query score differences.

    Each permutation flips the sign of every difference independently; a
    permutation counts toward ``n_plus`` when its mean difference is at least
    the observed absolute mean, toward ``n_minus`` when at most its negative.
    With ``exhaustive`` all 2**n sign vectors are enumerated and
    ``permutations`` is ignored.
    """
    a = np.asarray(ap_a, dtype=float)
    b = np.asarray(ap_b, dtype=float)
    if a.shape != b.shape:
        raise EvaluationError(f"score lists differ in length ({a.size} vs {b.size})")
    if a.size == 0:
        raise EvaluationError("score lists are empty")
    d = a - b
    n = d.size
    # compare sums rather than means; boundary ties count (non-strict)
    bound = abs(math.fsum(d))
    tol = 1e-12 * max(1.0, float(np.abs(d).sum()))
    n_minus = n_plus = 0
    if exhaustive:
        if n > MAX_EXHAUSTIVE:
            raise EvaluationError(f"exhaustive mode supports at most {MAX_EXHAUSTIVE} queries, got {n}")
        total = 1 << n
        shifts = np.arange(n, dtype=np.int64)
        for lo in range(0, total, chunk):
            idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
            signs = (((idx[:, None] >> shifts) & 1) * 2 - 1).astype(float)
            m, p = _count_extremes(signs, d, bound, tol)
            n_minus += m
            n_plus += p
        permutations, seed, mode = total, None, "exhaustive"
    else:
        if permutations < 1:
            raise EvaluationError("permutation count must be >= 1")
        rng = np.random.default_rng(seed)
        done = 0
        while done < permutations:
            m_rows = min(chunk, permutations - done)
            signs = rng.integers(0, 2, size=(m_rows, n), dtype=np.int8).astype(float) * 2 - 1
            m, p = _count_extremes(signs, d, bound, tol)
            n_minus += m
            n_plus += p
            done += m_rows
        mode = "sampled"
    return RandomizationReport(
        observed_diff=float(a.mean() - b.mean()),
        n_minus=n_minus,
        n_plus=n_plus,
        permutations=permutations,
        p_two_sided=two_sided_p(n_minus, n_plus, permutations),
        seed=seed,
        mode=mode,
    )


# -- run-level evaluation ------------------------------------------------------------------


@dataclass
class EvalReport:
    ap: dict[str, float]
    curves: dict[str, list[float]]
    map: float
    mean_precision: list[float]
    mean_f: list[float]  # per-query F at each recall level, averaged
    f_of_mean_precision: list[float]  # F of the averaged precision at each level
    excluded: list[str] = field(default_factory=list)
    name: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Comparison:
    name_a: str
    name_b: str
    map_a: float
    map_b: float
    improvement: float
    wins: int
    ties: int
    losses: int
    randomization: RandomizationReport

    def to_dict(self) -> dict:
        d = asdict(self)
        d["randomization"] = self.randomization.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Comparison":
        d = dict(d)
        d["randomization"] = RandomizationReport.from_dict(d["randomization"])
        return cls(**d)


def evaluate_run(run: Mapping[str, Sequence[str]], qrels: Mapping[str, set[str]], name: str = "") -> EvalReport:
    """Score a run against qrels.

    Queries judged with no relevant document are excluded and listed; judged
    queries missing from the run count as AP 0.
    """
    evaluated = sorted(q for q, rel in qrels.items() if rel)
    excluded = sorted(q for q, rel in qrels.items() if not rel)
    if not evaluated:
        raise EvaluationError("no query has relevant documents")
    if run and not set(run) & set(qrels):
        raise EvaluationError("run and qrels share no query ids")
    ap, curves = {}, {}
    for q in evaluated:
        ranking = run.get(q, ())
        ap[q] = average_precision(ranking, qrels[q])
        curves[q] = interpolated_precision_curve(ranking, qrels[q])
    n = len(evaluated)
    mean_p = [math.fsum(curves[q][i] for q in evaluated) / n for i in range(11)]
    mean_f = [math.fsum(f_measure(curves[q][i], RECALL_LEVELS[i]) for q in evaluated) / n for i in range(11)]
    f_mean = [f_measure(mean_p[i], RECALL_LEVELS[i]) for i in range(11)]
    return EvalReport(ap, curves, mean_average_precision(ap.values()), mean_p, mean_f, f_mean, excluded, name)


def win_tie_loss(ap_a: Mapping[str, float], ap_b: Mapping[str, float], tol: float = TIE_TOLERANCE):
    wins = ties = losses = 0
    for q in sorted(ap_a):
        diff = ap_a[q] - ap_b[q]
        if abs(diff) <= tol:
            ties += 1
        elif diff > 0:
            wins += 1
        else:
            losses += 1
    return wins, ties, losses


def compare(a: EvalReport, b: EvalReport, permutations: int = DEFAULT_PERMUTATIONS, seed: int | None = 0,
            exhaustive: bool = False) -> Comparison:
    if sorted(a.ap) != sorted(b.ap):
        raise EvaluationError("reports cover different query sets")
    queries = sorted(a.ap)
    test = fisher_randomization([a.ap[q] for q in queries], [b.ap[q] for q in queries],
                                permutations, seed, exhaustive)
    imp = improvement(a.map, b.map) if b.map > 0 else math.inf
    return Comparison(a.name, b.name, a.map, b.map, imp, *win_tie_loss(a.ap, b.ap), test)


# -- TREC files -----------------------------------------------------------------------------


def read_qrels(path: str | Path) -> dict[str, set[str]]:
    """``query_id 0 doc_id relevance`` per line; relevance > 0 means relevant."""
    qrels: dict[str, set[str]] = defaultdict(set)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise EvaluationError(f"{path}:{lineno}: expected 4 fields in qrels line")
            qid, _, doc, rel = parts
            try:
                relevant = int(rel) > 0
            except ValueError:
                raise EvaluationError(f"{path}:{lineno}: relevance must be an integer") from None
            qrels[qid]  # judged, possibly with nothing relevant
            if relevant:
                qrels[qid].add(doc)
    return dict(qrels)


def read_run(path: str | Path) -> dict[str, list[str]]:
    """``query_id Q0 doc_id rank score tag`` per line, ordered by score within a query."""
    rows: dict[str, list[tuple[float, int, str]]] = defaultdict(list)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise EvaluationError(f"{path}:{lineno}: expected 6 fields in run line")
            qid, _, doc, rank, score, _tag = parts
            try:
                rows[qid].append((-float(score), int(rank), doc))
            except ValueError:
                raise EvaluationError(f"{path}:{lineno}: bad rank or score") from None
    return {q: [doc for *_, doc in sorted(r)] for q, r in rows.items()}


def format_run_lines(qid: str, scored, tag: str) -> list[str]:
    return [f"{qid} Q0 {doc} {i} {score:.6f} {tag}" for i, (doc, score) in enumerate(scored, 1)]


# -- presentation ---------------------------------------------------------------------------


def format_report(report: EvalReport) -> str:
    head = "recall(%)      " + " ".join(f"{int(r * 100):>6d}" for r in RECALL_LEVELS)
    lines = [f"run: {report.name or '-'}", f"queries evaluated: {len(report.ap)}"]
    if report.excluded:
        lines.append(f"excluded (no relevant docs): {', '.join(report.excluded)}")
    lines += [
        head,
        "precision(%)   " + " ".join(f"{100 * v:6.1f}" for v in report.mean_precision),
        "F macro(%)     " + " ".join(f"{100 * v:6.1f}" for v in report.mean_f),
        "F of mean P(%) " + " ".join(f"{100 * v:6.1f}" for v in report.f_of_mean_precision),
        f"MAP {report.map:.4f}",
    ]
    for q in sorted(report.ap):
        lines.append(f"  AP[{q}] = {report.ap[q]:.4f}")
    return "\n".join(lines)


def format_comparison(c: Comparison) -> str:
    r = c.randomization
    return "\n".join([
        f"{'model A':<10} {'model B':<10} {'MAP(A)':>8} {'MAP(B)':>8} {'gain':>7} {'|diff|':>8} "
        f"{'N-':>8} {'N+':>8} {'p':>8}",
        f"{c.name_a:<10} {c.name_b:<10} {c.map_a:8.4f} {c.map_b:8.4f} {format_percent(c.improvement):>7} "
        f"{abs(r.observed_diff):8.4f} {r.n_minus:8d} {r.n_plus:8d} {r.p_two_sided:8.5f}",
        f"A better / equal / worse on {c.wins} / {c.ties} / {c.losses} queries "
        f"({r.mode}, S={r.permutations}, seed={r.seed})",
    ])


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
