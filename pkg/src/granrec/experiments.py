"""Evaluation protocol: five scenarios, repeated random splits, N/M accuracy.

A repeat recommends top-k item granules to every test user; M counts the
distinct items those granules denote in the test item universe, N the ones
the user actually rated there.  Users matching no rule abstain: they add
nothing to M or N and are tallied separately, so coverage loss is visible
instead of silently dragging accuracy down.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .core import MMER, Bitset, extension
from .errors import GranrecError
from .recommend import Recommendation, recommend_rows
from .rules import RuleStore, train

SCENARIO_KINDS = ("random", "on-training", "new-user", "new-item", "both-new")
SPLIT_KINDS = ("new-user", "new-item", "both-new")

REPORT_COLUMNS = (
    "scenario", "ms", "mt", "k", "repeat", "M", "N", "accuracy",
    "abstaining_users", "mean_items_per_recommendation", "note",
)


@dataclass(frozen=True)
class Scenario:
    kind: str
    train_fraction: float = 0.6
    repeats: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario {self.kind!r}")
        if self.kind in SPLIT_KINDS and not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train fraction must be strictly between 0 and 1")
        if self.repeats < 1:
            raise ValueError("at least one repeat required")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class RepeatResult:
    repeat: int
    users: int
    recommended: int
    hits: int
    abstaining_users: int
    per_rank: tuple[tuple[int, int], ...]  # (recommended, hits) per rank

    @property
    def accuracy(self) -> float | None:
        return self.hits / self.recommended if self.recommended else None

    @property
    def mean_items_per_recommendation(self) -> float:
        served = self.users - self.abstaining_users
        return self.recommended / served if served else 0.0


@dataclass(frozen=True)
class AccuracyReport:
    scenario: Scenario
    ms: float | None
    mt: float | None
    k: int
    results: tuple[RepeatResult, ...]

    @property
    def accuracies(self) -> list[float]:
        return [r.accuracy for r in self.results if r.accuracy is not None]

    @property
    def mean_accuracy(self) -> float | None:
        acc = self.accuracies
        return sum(acc) / len(acc) if acc else None

    @property
    def std_accuracy(self) -> float | None:
        acc = self.accuracies
        if not acc:
            return None
        if len(acc) == 1:
            return 0.0
        mean = sum(acc) / len(acc)
        return math.sqrt(sum((a - mean) ** 2 for a in acc) / (len(acc) - 1))

    @property
    def mean_recommended(self) -> float:
        return sum(r.recommended for r in self.results) / len(self.results)

    def rank_accuracies(self) -> list[float | None]:
        """Mean accuracy of each rank on its own, over repeats where the rank
        recommended anything."""
        out: list[float | None] = []
        for rank in range(self.k):
            vals = []
            for r in self.results:
                if rank < len(r.per_rank) and r.per_rank[rank][0] > 0:
                    vals.append(r.per_rank[rank][1] / r.per_rank[rank][0])
            out.append(sum(vals) / len(vals) if vals else None)
        return out


def _partition(n: int, fraction: float, rng: np.random.Generator):
    """Uniform split without replacement; train takes floor(fraction * n)."""
    n_train = math.floor(fraction * n)
    if not 1 <= n_train <= n - 1:
        raise ValueError(
            f"fraction {fraction} leaves an empty side for universe size {n}"
        )
    perm = rng.permutation(n)
    return sorted(int(i) for i in perm[:n_train]), sorted(int(i) for i in perm[n_train:])


def split(
    es: MMER, kind: str, fraction: float, rng: np.random.Generator
) -> tuple[MMER, MMER]:
    """Partition an MMER for one of the cold-start scenarios.

    new-user splits users and keeps all items; new-item is symmetric;
    both-new applies both partitions (users are drawn before items, so a
    given generator state always produces the same split).
    """
    if kind not in SPLIT_KINDS:
        raise ValueError(f"not a split scenario: {kind!r}")
    if kind == "new-user":
        tr, te = _partition(es.users.n_objects, fraction, rng)
        return (
            MMER(es.users.subset(tr), es.items, es.relation.restrict_left(tr)),
            MMER(es.users.subset(te), es.items, es.relation.restrict_left(te)),
        )
    if kind == "new-item":
        tr, te = _partition(es.items.n_objects, fraction, rng)
        return (
            MMER(es.users, es.items.subset(tr), es.relation.restrict_right(tr)),
            MMER(es.users, es.items.subset(te), es.relation.restrict_right(te)),
        )
    utr, ute = _partition(es.users.n_objects, fraction, rng)
    itr, ite = _partition(es.items.n_objects, fraction, rng)
    return (
        MMER(es.users.subset(utr), es.items.subset(itr),
             es.relation.restrict_left(utr).restrict_right(itr)),
        MMER(es.users.subset(ute), es.items.subset(ite),
             es.relation.restrict_left(ute).restrict_right(ite)),
    )


def _repeat_rng(seed: int, cell_index: int, repeat: int) -> np.random.Generator:
    # One independent stream per (cell, repeat): parallel and serial runs agree.
    return np.random.default_rng([seed, cell_index, repeat])


def _rank_extensions(
    recs: list[Recommendation], test: MMER
) -> list[list[Bitset]]:
    """Per test user, the recommended granules' extensions over the test item
    table, in rank order."""
    cache: dict[int, Bitset] = {}
    out = []
    for rec in recs:
        exts = []
        for entry in rec.entries:
            bits = cache.get(entry.target_index)
            if bits is None:
                bits = extension(test.items, entry.target.attrs, entry.target.values)
                cache[entry.target_index] = bits
            exts.append(bits)
        out.append(exts)
    return out


def _count_repeat(
    repeat: int, rank_exts: list[list[Bitset]], test: MMER, k: int
) -> RepeatResult:
    m_total = n_total = abstaining = 0
    per_rank = [[0, 0] for _ in range(k)]
    for u, exts in enumerate(rank_exts):
        if not exts:
            abstaining += 1
            continue
        rated = test.relation.rows[u]
        union = 0
        for rank, bits in enumerate(exts[:k]):
            per_rank[rank][0] += bits.bit_count()
            per_rank[rank][1] += (bits & rated).bit_count()
            union |= bits
        m_total += union.bit_count()
        n_total += (union & rated).bit_count()
    return RepeatResult(
        repeat=repeat,
        users=len(rank_exts),
        recommended=m_total,
        hits=n_total,
        abstaining_users=abstaining,
        per_rank=tuple((m, n) for m, n in per_rank),
    )


def _random_repeat(repeat: int, es: MMER, rng: np.random.Generator) -> RepeatResult:
    m = es.users.n_objects
    n = 0
    picks = rng.integers(es.items.n_objects, size=m)
    for u, j in enumerate(picks):
        n += (es.relation.rows[u] >> int(j)) & 1
    return RepeatResult(repeat, m, m, n, 0, ((m, n),))


def _run_cell(
    es: MMER,
    scenario: Scenario,
    ms: float | None,
    mt: float | None,
    ks: Sequence[int],
    *,
    cell_index: int = 0,
    **train_options,
) -> dict[int, AccuracyReport]:
    """Evaluate one (ms, mt) cell for every requested k in a single pass.

    Ranked lists are prefixes of each other as k grows, so the repeat is run
    once at max(k) and each smaller k is read off by truncation.
    """
    if any(k < 1 for k in ks):
        raise ValueError("k must be at least 1")
    k_max = max(ks)

    if scenario.kind == "random":
        # No training; one uniformly random test item per user per repeat,
        # so k plays no role and is reported as 1.
        results = tuple(
            _random_repeat(rep, es, _repeat_rng(scenario.seed, cell_index, rep))
            for rep in range(scenario.repeats)
        )
        report = AccuracyReport(scenario, None, None, 1, results)
        return {k: report for k in ks}

    if ms is None or mt is None:
        raise ValueError("ms and mt are required for trained scenarios")

    per_repeat: list[tuple[list[list[Bitset]], MMER]] = []
    if scenario.kind == "on-training":
        # Deterministic: no sampling, so a single repeat carries the result.
        store = train(es, ms, mt, **train_options)
        recs = recommend_rows(store, es.users, k_max)
        per_repeat.append((_rank_extensions(recs, es), es))
    else:
        for rep in range(scenario.repeats):
            rng = _repeat_rng(scenario.seed, cell_index, rep)
            train_es, test_es = split(es, scenario.kind, scenario.train_fraction, rng)
            store = train(train_es, ms, mt, **train_options)
            recs = recommend_rows(store, test_es.users, k_max)
            per_repeat.append((_rank_extensions(recs, test_es), test_es))

    out = {}
    for k in ks:
        results = tuple(
            _count_repeat(rep, rank_exts, test_es, k)
            for rep, (rank_exts, test_es) in enumerate(per_repeat)
        )
        out[k] = AccuracyReport(scenario, ms, mt, k, results)
    return out


def evaluate(
    es: MMER,
    scenario: Scenario,
    ms: float | None,
    mt: float | None,
    k: int = 1,
    **train_options,
) -> AccuracyReport:
    """Run one scenario at one parameter setting and aggregate over repeats."""
    return _run_cell(es, scenario, ms, mt, [k], **train_options)[k]


@dataclass(frozen=True)
class SweepCell:
    ms: float | None
    mt: float | None
    k: int
    report: AccuracyReport | None
    error: str | None = None


def sweep(
    es: MMER,
    scenario: Scenario,
    ms_grid: Sequence[float],
    mt_grid: Sequence[float],
    k_grid: Sequence[int],
    **train_options,
) -> list[SweepCell]:
    """Cross-product evaluation over threshold and k grids.

    A cell whose training fails (typically: no granules at the threshold)
    is recorded with its error and the sweep moves on.
    """
    if not ms_grid or not mt_grid or not k_grid:
        raise ValueError("grids must be non-empty")
    cells: list[SweepCell] = []
    for cell_index, (ms, mt) in enumerate(product(ms_grid, mt_grid)):
        try:
            reports = _run_cell(es, scenario, ms, mt, k_grid,
                                cell_index=cell_index, **train_options)
        except GranrecError as exc:
            cells.extend(SweepCell(ms, mt, k, None, str(exc)) for k in k_grid)
            continue
        cells.extend(SweepCell(ms, mt, k, reports[k]) for k in k_grid)
    return cells


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def report_rows(scenario: Scenario, cells: Iterable[SweepCell]) -> list[list[str]]:
    """Flatten reports into CSV rows: every repeat, then mean and std lines."""
    rows = []
    for cell in cells:
        base = [scenario.kind, _fmt(cell.ms), _fmt(cell.mt), str(cell.k)]
        if cell.report is None:
            rows.append(base + ["error", "", "", "", "", "", cell.error or ""])
            continue
        rep = cell.report
        for r in rep.results:
            note = "" if r.recommended else "no recommendations"
            rows.append(base + [
                str(r.repeat), str(r.recommended), str(r.hits),
                _fmt(r.accuracy), str(r.abstaining_users),
                _fmt(r.mean_items_per_recommendation), note,
            ])
        rows.append(base + [
            "mean", _fmt(rep.mean_recommended),
            _fmt(sum(r.hits for r in rep.results) / len(rep.results)),
            _fmt(rep.mean_accuracy),
            _fmt(sum(r.abstaining_users for r in rep.results) / len(rep.results)),
            _fmt(sum(r.mean_items_per_recommendation for r in rep.results)
                 / len(rep.results)),
            "" if rep.mean_accuracy is not None else "no recommendations",
        ])
        rows.append(base + ["std", "", "", _fmt(rep.std_accuracy), "", "", ""])
    return rows


def write_report_csv(path, scenario: Scenario, cells: Iterable[SweepCell]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(report_rows(scenario, cells))
