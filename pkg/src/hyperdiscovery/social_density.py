"""Social-density signals between keyword sets and the yearwise score family.

SD(X, Y) = |A(X) ∩ A(Y)| / (|A(X)| + |A(Y)|), where A(X) is the set of authors
who used any keyword of X in at least one paper; the yearwise variant
restricts to a single publication year.  The denominator is the size sum, not
the union, so SD is bounded by 1/2; pass denominator="union" for a true
Jaccard comparison run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus, normalize_keywords, record_mentions_any
from .errors import DomainError, ValidationError
from .scoring import ScoreTable


def authors_using(
    c: Corpus, keywords: Iterable[str], year: int | None = None
) -> frozenset[str]:
    """Authors with at least one (optionally year-restricted) paper mentioning
    any keyword in the set."""
    kw = keywords if isinstance(keywords, frozenset) else normalize_keywords(keywords)
    out: set[str] = set()
    for rec in c.records:
        if year is not None and rec.year != year:
            continue
        if record_mentions_any(rec, kw):
            out.update(rec.authors)
    return frozenset(out)


def social_density(
    c: Corpus,
    x_keywords: Iterable[str],
    y_keywords: Iterable[str],
    year: int | None = None,
    denominator: str = "sum",
) -> float:
    """Author-overlap density of two keyword sets; 0 when either set is unused."""
    ax = authors_using(c, x_keywords, year)
    ay = authors_using(c, y_keywords, year)
    if denominator == "sum":
        denom = len(ax) + len(ay)
    elif denominator == "union":
        denom = len(ax | ay)
    else:
        raise DomainError(f"unknown denominator rule {denominator!r}")
    if denom == 0:
        return 0.0
    return len(ax & ay) / denom


@dataclass(frozen=True)
class SdSeries:
    """Yearwise SD values for years t-1, t-2, ..., t-gamma."""

    values: tuple[float, ...]
    gamma: int
    x: tuple[str, ...]
    y: tuple[str, ...]
    t: int


def yearwise_sd(
    c: Corpus,
    x_keywords: Iterable[str],
    y_keywords: Iterable[str],
    t: int,
    gamma: int,
    denominator: str = "sum",
) -> SdSeries:
    if gamma < 1:
        raise ValidationError("gamma must be >= 1")
    xs = tuple(sorted(normalize_keywords(x_keywords)))
    ys = tuple(sorted(normalize_keywords(y_keywords)))
    vals = tuple(
        social_density(c, xs, ys, year=t - i, denominator=denominator)
        for i in range(1, gamma + 1)
    )
    return SdSeries(values=vals, gamma=gamma, x=xs, y=ys, t=t)


@dataclass
class SdClassifier:
    """Logistic regression over SD series: sigmoid(intercept + weights . s)."""

    weights: np.ndarray
    intercept: float

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        z = features @ self.weights + self.intercept
        return 1.0 / (1.0 + np.exp(-z))


def logistic_loss_and_grad(
    theta: np.ndarray, features: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean log-loss and gradient; theta[0] is the intercept."""
    z = theta[0] + features @ theta[1:]
    # log(1 + exp(z)) computed stably
    softplus = np.where(z > 0, z + np.log1p(np.exp(-np.abs(z))), np.log1p(np.exp(z)))
    loss = float(np.mean(softplus - labels * z))
    p = 1.0 / (1.0 + np.exp(-z))
    resid = p - labels
    grad = np.empty_like(theta)
    grad[0] = float(resid.mean())
    grad[1:] = features.T @ resid / len(labels)
    return loss, grad


def train_sd_classifier(
    features: Sequence[Sequence[float]],
    labels: Sequence[int],
    lr: float = 1.0,
    max_iter: int = 20000,
    tol: float = 1e-6,
) -> SdClassifier:
    """Full-batch gradient descent with backtracking until the gradient norm
    drops below tol (or max_iter)."""
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValidationError("features must be 2-D and match labels in length")
    classes = set(np.unique(y))
    if not classes <= {0.0, 1.0} or len(classes) < 2:
        raise DomainError("need both classes present, labeled 0 and 1")
    theta = np.zeros(X.shape[1] + 1)
    loss, grad = logistic_loss_and_grad(theta, X, y)
    step = lr
    for _ in range(max_iter):
        if float(np.linalg.norm(grad)) < tol:
            break
        candidate = theta - step * grad
        new_loss, new_grad = logistic_loss_and_grad(candidate, X, y)
        if new_loss <= loss:
            theta, loss, grad = candidate, new_loss, new_grad
            step = min(step * 1.1, 1e3)
        else:
            step *= 0.5
    return SdClassifier(weights=theta[1:].copy(), intercept=float(theta[0]))


def sd_score(
    series_by_candidate: Mapping[str, SdSeries | Sequence[float]],
    method: str = "sum",
    k: int | None = None,
    rng: np.random.Generator | None = None,
    classifier: SdClassifier | None = None,
) -> ScoreTable:
    """Collapse yearwise SD series into scalar candidate scores.

    sum:   plain sum of the series.
    rand:  indicator of membership in k uniform draws (without replacement)
           from the candidates whose summed series is positive.
    class: classifier posterior on the series.
    """
    candidates = sorted(series_by_candidate)
    series = {
        c: tuple(v.values) if isinstance(v, SdSeries) else tuple(v)
        for c, v in series_by_candidate.items()
    }
    flags: tuple[str, ...] = ()
    if method == "sum":
        values = {c: float(sum(series[c])) for c in candidates}
    elif method == "rand":
        if k is None or rng is None:
            raise DomainError("method 'rand' requires k and rng")
        eligible = [c for c in candidates if sum(series[c]) > 0]
        if len(eligible) < k:
            chosen = set(eligible)
            flags = ("fewer_nonzero_than_k",)
        else:
            idx = rng.choice(len(eligible), size=k, replace=False)
            chosen = {eligible[i] for i in idx}
        values = {c: 1.0 if c in chosen else 0.0 for c in candidates}
    elif method == "class":
        if classifier is None:
            raise DomainError("method 'class' requires a trained classifier")
        X = np.array([series[c] for c in candidates], dtype=np.float64)
        probs = classifier.predict_proba(X) if len(candidates) else np.array([])
        values = {c: float(p) for c, p in zip(candidates, probs)}
    else:
        raise DomainError(f"unknown sd scoring method {method!r}")
    return ScoreTable(
        values=values, provenance="sd", metadata={"method": method}, flags=flags
    )


def first_cooccurrence_years(c: Corpus, keywords: Iterable[str]) -> dict[str, int]:
    """Earliest year each entity co-occurs (same record) with the property."""
    kw = keywords if isinstance(keywords, frozenset) else normalize_keywords(keywords)
    first: dict[str, int] = {}
    for rec in c.records:
        if not record_mentions_any(rec, kw):
            continue
        for ent in rec.entities:
            if ent.lower() in kw:
                continue
            if ent not in first or rec.year < first[ent]:
                first[ent] = rec.year
    return first


def build_sd_training_set(
    before: Corpus,
    keywords: Iterable[str],
    t: int,
    gamma: int,
    label_window: int = 5,
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Training rows for the SD classifier from the pre-t corpus.

    Positives are entities first co-occurring with the property inside the
    label_window years before t, featurized by their yearwise SD series
    anchored at that co-occurrence year; negatives are entities still
    unstudied at t, anchored at t.  Rows with an all-zero series are dropped.
    """
    kw = keywords if isinstance(keywords, frozenset) else normalize_keywords(keywords)
    first = first_cooccurrence_years(before, kw)
    entities = sorted(
        {e for rec in before.records for e in rec.entities if e.lower() not in kw}
    )
    rows, labels, names = [], [], []
    for ent in entities:
        if ent in first:
            tau = first[ent]
            if not (t - label_window <= tau < t):
                continue
            anchor, label = tau, 1
        else:
            anchor, label = t, 0
        series = yearwise_sd(before, (ent,), kw, anchor, gamma).values
        if not any(v > 0 for v in series):
            continue
        rows.append(series)
        labels.append(label)
        names.append(ent)
    return (
        np.array(rows, dtype=np.float64).reshape(len(rows), gamma),
        np.array(labels, dtype=np.float64),
        names,
    )
