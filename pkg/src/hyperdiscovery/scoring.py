"""Candidate score tables: human-avoidance distances, rank-normal transforms,
and beta-weighted fusion rules.

Sign convention: larger shortest-path distance means less available to human
experts, which is the desirable direction for the avoidance signal; fused
rankings therefore use max_first throughout, recorded in table metadata.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import DomainError, FormatError, ValidationError
from .hypergraph import Hypergraph, NodeKind

logger = logging.getLogger(__name__)

INF = float("inf")

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the standard normal quantile, refined by
# one Halley step against erfc so the absolute error is far below 1e-9.
_ACK_A = (
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
)
_ACK_B = (
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
)
_ACK_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
)
_ACK_D = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
    3.754408661907416e00,
)
_ACK_SPLIT = 0.02425


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile argument must lie in (0, 1), got {p}")
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    if p < _ACK_SPLIT:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    elif p <= 1.0 - _ACK_SPLIT:
        q = p - 0.5
        r = q * q
        x = (
            (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5])
            * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    # one Halley correction step
    err = 0.5 * math.erfc(-x / _SQRT2) - p
    u = err * _SQRT_2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


@dataclass
class ScoreTable:
    """Named per-candidate scalar scores with explicit infinity semantics."""

    values: dict[str, float]
    provenance: str
    metadata: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()
    candidate_flags: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for cand, val in self.values.items():
            if isinstance(val, float) and math.isnan(val):
                raise ValidationError(f"NaN score for candidate {cand!r}")
            if math.isinf(val) and self.provenance != "sp_d":
                raise ValidationError(
                    f"infinite score for {cand!r} only allowed for sp_d tables"
                )

    def candidates(self) -> list[str]:
        return sorted(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def array(self, order: list[str] | None = None) -> np.ndarray:
        order = order if order is not None else self.candidates()
        return np.array([self.values[c] for c in order], dtype=np.float64)

    def restrict(self, candidates) -> "ScoreTable":
        keep = set(candidates)
        return replace(
            self,
            values={c: v for c, v in self.values.items() if c in keep},
            candidate_flags={
                c: f for c, f in self.candidate_flags.items() if c in keep
            },
        )


def save_score_csv(table: ScoreTable, path, header_comment: str | None = None) -> None:
    """CSV export: `candidate,score,flags` with a provenance comment line."""
    with open(path, "w", encoding="utf-8") as fh:
        meta = f"# provenance={table.provenance}"
        if header_comment:
            meta += f" {header_comment}"
        fh.write(meta + "\n")
        fh.write("candidate,score,flags\n")
        for cand in table.candidates():
            flags = ";".join(table.candidate_flags.get(cand, ()))
            fh.write(f"{cand},{table.values[cand]!r},{flags}\n")


def load_score_csv(path) -> ScoreTable:
    provenance = "external"
    values: dict[str, float] = {}
    cand_flags: dict[str, tuple[str, ...]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    body = []
    for line in lines:
        line = line.rstrip("\n")
        if line.startswith("#"):
            for part in line[1:].split():
                if part.startswith("provenance="):
                    provenance = part.split("=", 1)[1]
            continue
        if line:
            body.append(line)
    if not body or body[0].split(",")[:2] != ["candidate", "score"]:
        raise FormatError(f"{path}: expected header `candidate,score,flags`")
    for line_no, line in enumerate(body[1:], start=2):
        parts = line.split(",")
        if len(parts) < 2:
            raise FormatError(f"{path}: line {line_no}: expected candidate,score")
        cand = parts[0]
        try:
            values[cand] = float(parts[1])
        except ValueError as exc:
            raise FormatError(f"{path}: line {line_no}: bad score {parts[1]!r}") from exc
        if len(parts) > 2 and parts[2]:
            cand_flags[cand] = tuple(parts[2].split(";"))
    return ScoreTable(values=values, provenance=provenance, candidate_flags=cand_flags)


def shortest_path_distances(
    h: Hypergraph,
    adj: Mapping[int, set[int]],
    source: int | None = None,
) -> ScoreTable:
    """Unweighted BFS hop counts from the property node to every material.

    Materials unreachable in `adj` (or absent from it) score infinity.
    """
    if source is None:
        source = h.property_node()
    if source is None or source not in adj:
        raise LookupError("source node is missing from the adjacency")
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    values = {}
    for v in h.nodes_of_kind(NodeKind.MATERIAL):
        values[h.labels[v]] = float(dist.get(v, INF))
    return ScoreTable(values=values, provenance="sp_d", metadata={"source": h.labels[source]})


def apply_sentinel(t: ScoreTable) -> ScoreTable:
    """Replace every infinite distance by (max finite value + 1).

    Degenerate all-infinite tables map to 1.0 everywhere, flagged.
    """
    if t.provenance != "sp_d":
        raise DomainError("sentinel substitution applies to sp_d tables only")
    finite = [v for v in t.values.values() if math.isfinite(v)]
    infinite = [c for c, v in t.values.items() if math.isinf(v)]
    if not infinite:
        return t
    flags = t.flags + ("sentinel_applied",)
    cand_flags = dict(t.candidate_flags)
    if finite:
        sentinel = max(finite) + 1.0
    else:
        sentinel = 1.0
        flags = flags + ("all_infinite",)
    values = dict(t.values)
    for c in infinite:
        values[c] = sentinel
        cand_flags[c] = cand_flags.get(c, ()) + ("sentinel",)
    metadata = dict(t.metadata)
    metadata["sentinel"] = sentinel
    return ScoreTable(
        values=values,
        provenance=t.provenance,
        metadata=metadata,
        flags=flags,
        candidate_flags=cand_flags,
    )


def _average_ranks(vals: np.ndarray) -> np.ndarray:
    """1-based ranks, ties averaged."""
    order = np.argsort(vals, kind="mergesort")
    ranks = np.empty(len(vals), dtype=np.float64)
    i = 0
    svals = vals[order]
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and svals[j + 1] == svals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def van_der_waerden(t: ScoreTable) -> ScoreTable:
    """Rank-based normal scores: quantile(rank / (N + 1)), average ranks on ties."""
    if len(t) == 0:
        raise DomainError("cannot transform an empty score table")
    order = t.candidates()
    vals = t.array(order)
    if not np.all(np.isfinite(vals)):
        raise DomainError("van_der_waerden requires finite values; apply the sentinel first")
    ranks = _average_ranks(vals)
    n = len(vals)
    transformed = np.array([normal_quantile(r / (n + 1.0)) for r in ranks])
    return ScoreTable(
        values={c: float(v) for c, v in zip(order, transformed)},
        provenance=t.provenance,
        metadata={**t.metadata, "transform": "van_der_waerden"},
        flags=t.flags,
        candidate_flags=dict(t.candidate_flags),
    )


def _zscore(vals: np.ndarray) -> np.ndarray:
    std = float(vals.std())
    if std == 0.0:
        return np.zeros_like(vals)
    return (vals - vals.mean()) / std


FUSION_METHODS = ("vdw_z", "geometric", "harmonic", "linear_lambda")


def combine_scores(
    s1: ScoreTable, s2: ScoreTable, beta: float, method: str
) -> ScoreTable:
    """Fuse avoidance (s1) and plausibility (s2) tables at mixing weight beta.

    vdw_z:         beta * z(vdw(s1)) + (1-beta) * z(vdw(s2))
    geometric:     (s1^beta * s2^(1-beta))^(1/2)
    harmonic:      2 / (beta/s1 + (1-beta)/s2)
    linear_lambda: beta * s1 + lambda * (1-beta) * s2,
                   lambda = mean(s1) / mean(s2 restricted to positives)
    """
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    if method not in FUSION_METHODS:
        raise DomainError(f"unknown fusion method {method!r}")
    if set(s1.values) != set(s2.values):
        raise ValidationError(
            f"candidate sets differ: {len(s1)} vs {len(s2)} entries, "
            f"{len(set(s1.values) ^ set(s2.values))} mismatched"
        )
    order = s1.candidates()
    a = s1.array(order)
    b = s2.array(order)
    flags: tuple[str, ...] = ()
    metadata = {"beta": beta, "method": method, "direction": "max_first"}

    if method == "vdw_z":
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise DomainError("vdw_z requires finite inputs; apply the sentinel first")
        za = _zscore(van_der_waerden(s1).array(order))
        zb = _zscore(van_der_waerden(s2).array(order))
        fused = beta * za + (1.0 - beta) * zb
    elif method in ("geometric", "harmonic"):
        for name, arr, table in (("s1", a, s1), ("s2", b, s2)):
            bad = np.flatnonzero(~(arr > 0) | ~np.isfinite(arr))
            if bad.size:
                raise DomainError(
                    f"{method} fusion needs strictly positive finite {name}; "
                    f"candidate {order[bad[0]]!r} has {arr[bad[0]]}"
                )
        if method == "geometric":
            fused = np.sqrt(a**beta * b ** (1.0 - beta))
        else:
            fused = 2.0 / (beta / a + (1.0 - beta) / b)
    else:  # linear_lambda
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise DomainError("linear_lambda requires finite inputs")
        positives = b[b > 0]
        if positives.size:
            lam = float(a.mean() / positives.mean())
        else:
            lam = 1.0
            flags = ("lambda_default",)
        metadata["lambda"] = lam
        fused = beta * a + lam * (1.0 - beta) * b

    if not np.all(np.isfinite(fused)):
        raise DomainError("fusion produced non-finite scores")
    return ScoreTable(
        values={c: float(v) for c, v in zip(order, fused)},
        provenance="fused",
        metadata=metadata,
        flags=flags,
    )


def rank_candidates(
    t: ScoreTable, k: int, direction: str = "max_first"
) -> list[str]:
    """Stable top-k, ties broken by candidate label; k > |table| returns all."""
    if direction not in ("max_first", "min_first"):
        raise DomainError(f"unknown direction {direction!r}")
    if k < 1:
        raise DomainError("k must be >= 1")
    if k > len(t.values):
        logger.warning("requested top-%d of %d candidates; returning all", k, len(t.values))
    sign = -1.0 if direction == "max_first" else 1.0
    ordered = sorted(t.values, key=lambda c: (sign * t.values[c], c))
    return ordered[: min(k, len(ordered))]


def save_fused_csv(
    fused: ScoreTable, s1: ScoreTable, s2: ScoreTable, path,
    header_comment: str | None = None,
) -> None:
    """Fused-score CSV: `candidate,s1,s2,fused,beta,method`."""
    beta = fused.metadata.get("beta")
    method = fused.metadata.get("method")
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("candidate,s1,s2,fused,beta,method\n")
        for cand in fused.candidates():
            fh.write(
                f"{cand},{s1.values[cand]!r},{s2.values[cand]!r},"
                f"{fused.values[cand]!r},{beta!r},{method}\n"
            )
