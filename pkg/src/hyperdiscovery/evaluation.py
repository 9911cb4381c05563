"""Prediction protocol: unstudied candidates, hit rates, and beta sweeps.

Temporal hygiene is structural: scorers only ever see the before-partition,
and this module receives predictions as a finished list before it reads any
record from the prediction year onward.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace, asdict
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus, normalize_keywords, record_mentions_any
from .errors import DomainError, ValidationError
from .scoring import ScoreTable, apply_sentinel, combine_scores, rank_candidates


@dataclass(frozen=True)
class PredictionReport:
    t: int
    k: int
    predictions: tuple[str, ...]
    method: dict = field(default_factory=dict)
    per_year: dict[int, float] | None = None
    cumulative: tuple[float, ...] | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.predictions) > self.k:
            raise ValidationError("more predictions than k")
        if self.per_year is not None:
            for tau, a in self.per_year.items():
                if not 0.0 <= a <= 1.0:
                    raise ValidationError(f"hit rate for year {tau} outside [0, 1]")
        if self.cumulative is not None:
            if any(b < a - 1e-12 for a, b in zip(self.cumulative, self.cumulative[1:])):
                raise ValidationError("cumulative vector must be non-decreasing")


def unstudied_set(
    before: Corpus, keywords: Iterable[str], min_mentions: int = 3
) -> set[str]:
    """Entities in the pre-t corpus that never co-occur with the property.

    Entities mentioned in at most `min_mentions` records are ignored
    (default 3); pass 0 to keep everything.
    """
    kw = keywords if isinstance(keywords, frozenset) else normalize_keywords(keywords)
    counts: dict[str, int] = {}
    studied: set[str] = set()
    for rec in before.records:
        mentions = record_mentions_any(rec, kw)
        for ent in rec.entities:
            if ent.lower() in kw:
                continue
            counts[ent] = counts.get(ent, 0) + 1
            if mentions:
                studied.add(ent)
    return {
        ent for ent, cnt in counts.items() if cnt > min_mentions and ent not in studied
    }


def cumulative_hit_rate(
    report: PredictionReport,
    from_corpus: Corpus,
    keywords: Iterable[str],
    normalize_by_k: bool = True,
) -> PredictionReport:
    """Fill in per-year and cumulative hit rates by scanning years t, t+1, ...

    A prediction scores in the first year it co-occurs (same record) with any
    property keyword and is then retired, so nothing double-counts.  Each
    year's rate divides by k (or by |predictions| with normalize_by_k=False).
    """
    kw = keywords if isinstance(keywords, frozenset) else normalize_keywords(keywords)
    denom = report.k if normalize_by_k else max(len(report.predictions), 1)
    flags = report.flags if normalize_by_k else report.flags + ("normalized_by_len",)

    future = [r for r in from_corpus.records if r.year >= report.t]
    if not future:
        return replace(
            report, per_year={}, cumulative=(), flags=flags + ("empty_future",)
        )
    max_year = max(r.year for r in future)
    by_year: dict[int, list] = {}
    for rec in future:
        by_year.setdefault(rec.year, []).append(rec)

    remaining = set(report.predictions)
    per_year: dict[int, float] = {}
    cumulative: list[float] = []
    running = 0.0
    for tau in range(report.t, max_year + 1):
        discovered: set[str] = set()
        for rec in by_year.get(tau, []):
            if not record_mentions_any(rec, kw):
                continue
            discovered.update(ent for ent in rec.entities if ent in remaining)
        per_year[tau] = len(discovered) / denom
        remaining -= discovered
        running += per_year[tau]
        cumulative.append(running)
    return replace(report, per_year=per_year, cumulative=tuple(cumulative), flags=flags)


def save_report(report: PredictionReport, path, extra: dict | None = None) -> None:
    payload = asdict(report)
    payload["predictions"] = list(report.predictions)
    payload["cumulative"] = list(report.cumulative) if report.cumulative else None
    payload["flags"] = list(report.flags)
    if report.per_year is not None:
        payload["per_year"] = {str(y): v for y, v in report.per_year.items()}
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_report(path) -> PredictionReport:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    per_year = payload.get("per_year")
    if per_year is not None:
        per_year = {int(y): float(v) for y, v in per_year.items()}
    cumulative = payload.get("cumulative")
    return PredictionReport(
        t=int(payload["t"]),
        k=int(payload["k"]),
        predictions=tuple(payload["predictions"]),
        method=payload.get("method", {}),
        per_year=per_year,
        cumulative=tuple(cumulative) if cumulative is not None else None,
        flags=tuple(payload.get("flags", ())),
    )


DEFAULT_BETA_GRID = tuple(round(0.1 * i, 1) for i in range(11))


@dataclass(frozen=True)
class SweepRow:
    method: str
    beta: float
    candidate: str
    sp_d: float
    s2: float


def beta_sweep_self_eval(
    s1: ScoreTable,
    s2: ScoreTable,
    k: int,
    betas: Sequence[float] = DEFAULT_BETA_GRID,
    methods: Sequence[str] = ("vdw_z", "geometric", "harmonic"),
) -> list[SweepRow]:
    """Self-evaluation sweep: for every (method, beta), record the avoidance
    and plausibility values of the fused top-k candidates.

    s1 is the avoidance table (sentinel substitution applied here if needed);
    s2 the plausibility/external table.  Rows carry raw values so any summary
    statistic can be recomputed downstream.
    """
    if s1.provenance == "sp_d":
        s1 = apply_sentinel(s1)
    rows: list[SweepRow] = []
    for method in methods:
        for beta in betas:
            fused = combine_scores(s1, s2, beta, method)
            for cand in rank_candidates(fused, k, "max_first"):
                rows.append(
                    SweepRow(
                        method=method,
                        beta=float(beta),
                        candidate=cand,
                        sp_d=s1.values[cand],
                        s2=s2.values[cand],
                    )
                )
    return rows


def save_sweep_csv(rows: Sequence[SweepRow], path, header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("method,beta,candidate,sp_d,s2\n")
        for r in rows:
            fh.write(f"{r.method},{r.beta!r},{r.candidate},{r.sp_d!r},{r.s2!r}\n")


def sweep_mean_spd(rows: Sequence[SweepRow], method: str) -> dict[float, float]:
    """Mean avoidance value of the top-k per beta, one fusion method."""
    acc: dict[float, list[float]] = {}
    for r in rows:
        if r.method == method:
            acc.setdefault(r.beta, []).append(r.sp_d)
    return {beta: float(np.mean(vals)) for beta, vals in sorted(acc.items())}


def halfway_crossing(curve: dict[float, float]) -> float:
    """First beta where the curve reaches halfway between its endpoint levels,
    linearly interpolated between grid points."""
    betas = sorted(curve)
    if len(betas) < 2:
        raise DomainError("need at least two grid points")
    lo, hi = curve[betas[0]], curve[betas[-1]]
    target = 0.5 * (lo + hi)
    ascending = hi >= lo
    for b0, b1 in zip(betas, betas[1:]):
        y0, y1 = curve[b0], curve[b1]
        reached = y1 >= target if ascending else y1 <= target
        if reached:
            if y1 == y0:
                return b1
            frac = (target - y0) / (y1 - y0)
            frac = min(max(frac, 0.0), 1.0)
            return b0 + frac * (b1 - b0)
    return betas[-1]


def make_anticorrelated_benchmark(
    n: int = 400, seed: int = 7, noise: float = 2.0
) -> tuple[ScoreTable, ScoreTable]:
    """Synthetic avoidance/plausibility pair with anticorrelated ranks.

    Avoidance values look like hop counts (many small, few large), which is
    where the harmonic mean's sensitivity to small components shows; noisy
    plausibility mirrors the ordering, clipped positive so every fusion
    method applies.
    """
    rng = np.random.default_rng(seed)
    u = (np.arange(n) + 1.0) / (n + 1.0)
    s1_vals = 1.0 + np.floor(8.0 * u**2)
    s2_vals = np.clip(1.0 + 9.0 * (1.0 - u) + noise * rng.normal(size=n), 0.05, None)
    names = [f"c{i:05d}" for i in range(n)]
    s1 = ScoreTable(
        values=dict(zip(names, map(float, s1_vals))),
        provenance="sp_d",
        metadata={"benchmark": "anticorrelated"},
    )
    s2 = ScoreTable(
        values=dict(zip(names, map(float, s2_vals))),
        provenance="plausibility",
        metadata={"benchmark": "anticorrelated"},
    )
    return s1, s2
