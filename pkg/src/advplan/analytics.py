"""Outcome metrics, Pareto fronts with knee points, and R/V/C segmentation.

All fronts minimize both coordinates. Zone segmentation runs multi-level Otsu
thresholding on the grid of cell means and splits it into resilience,
vulnerability, and collapse bands.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .engine import RunOutcome
from .errors import (
    DegenerateInputError,
    InvalidInputError,
    InvalidThresholdError,
)


class RvcLabel(str, Enum):
    RESILIENCE = "resilience"
    VULNERABILITY = "vulnerability"
    COLLAPSE = "collapse"


@dataclass(frozen=True)
class MetricPoint:
    """Aggregated metrics of one sweep cell (means over run_count runs)."""

    beta: float
    adversary_fraction: float
    inefficiency: float
    discomfort_total: float
    discomfort_legitimate: float
    compromised: float
    run_count: int


def compromised_discomfort(
    with_adv: RunOutcome, baseline: RunOutcome, legitimate: set[int]
) -> float:
    """Extra mean discomfort the legitimate agents carry versus the baseline."""
    agents = set(with_adv.discomfort_per_agent)
    if agents != set(baseline.discomfort_per_agent):
        raise InvalidInputError("runs cover different agent populations")
    unknown = set(legitimate) - agents
    if unknown:
        raise InvalidInputError(f"legitimate ids not in the runs: {sorted(unknown)}")
    if not legitimate:
        warnings.warn(
            "no legitimate agents; compromised discomfort defined as 0",
            stacklevel=2,
        )
        return 0.0
    return with_adv.mean_discomfort(legitimate) - baseline.mean_discomfort(legitimate)


def pareto_front(points) -> list[tuple[float, float]]:
    """Non-dominated subset under minimize-both dominance, sorted by x.

    Duplicates collapse to one representative. A point is dominated when some
    other point is <= in both coordinates and < in at least one.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if not pts:
        raise InvalidInputError("cannot take the Pareto front of no points")
    front: list[tuple[float, float]] = []
    best_y = np.inf
    for p in sorted(set(pts)):
        if p[1] < best_y:
            front.append(p)
            best_y = p[1]
    return front


def knee_mmd(front) -> tuple[float, float]:
    """Front member closest to the ideal corner in normalized Manhattan distance.

    Each coordinate is min-max normalized over the front (a flat coordinate
    contributes zero), the ideal point is the normalized origin, and ties
    break toward lower raw x, then lower raw y.
    """
    pts = [(float(x), float(y)) for x, y in front]
    if not pts:
        raise InvalidInputError("cannot locate a knee on an empty front")
    arr = np.asarray(pts)
    spans = arr.max(axis=0) - arr.min(axis=0)
    normed = np.zeros_like(arr)
    for j in range(2):
        if spans[j] > 0:
            normed[:, j] = (arr[:, j] - arr[:, j].min()) / spans[j]
    dist = normed.sum(axis=1)
    order = sorted(range(len(pts)), key=lambda i: (dist[i], pts[i][0], pts[i][1]))
    return pts[order[0]]


def _between_class_variance(
    weights: np.ndarray, moments: np.ndarray, cuts: tuple[int, ...]
) -> float:
    """Between-class variance of a histogram split after the given bin indices."""
    total_w = weights[-1]
    total_mu = moments[-1] / total_w
    sigma = 0.0
    lo = 0
    for cut in (*cuts, len(weights) - 1):
        w = weights[cut] - (weights[lo - 1] if lo > 0 else 0.0)
        if w > 0:
            m = moments[cut] - (moments[lo - 1] if lo > 0 else 0.0)
            mu = m / w
            sigma += (w / total_w) * (mu - total_mu) ** 2
        lo = cut + 1
    return sigma


def multi_otsu(values, classes: int = 3, bins: int = 256) -> list[float]:
    """Histogram thresholds separating the values into the given class count.

    The values are binned into equal-width bins over [min, max]; every
    combination of class boundaries is scored and the one maximizing
    between-class variance (equivalently minimizing intra-class variance)
    wins. When several splits tie, which happens whenever empty bins separate
    clusters, the middle of each boundary's tying range is taken, so
    well-separated clusters split at their midpoints. Thresholds come back
    ascending, as bin-edge values.
    """
    data = np.asarray(list(values), dtype=float)
    if classes < 2:
        raise InvalidInputError(f"need at least 2 classes, got {classes}")
    if bins < classes:
        raise InvalidInputError(f"{bins} bins cannot hold {classes} classes")
    if data.size == 0 or np.unique(data).size < classes:
        raise DegenerateInputError(
            f"need at least {classes} distinct values to form {classes} classes"
        )
    hist, edges = np.histogram(data, bins=bins)
    hist = hist.astype(float)
    centers = (edges[:-1] + edges[1:]) / 2.0
    weights = np.cumsum(hist)
    moments = np.cumsum(hist * centers)

    scored = [
        (cuts, _between_class_variance(weights, moments, cuts))
        for cuts in itertools.combinations(range(bins - 1), classes - 1)
    ]
    best = max(sigma for _, sigma in scored)
    # Splits that differ only in where empty bins land score identically up
    # to summation noise; a relative tolerance keeps the whole plateau.
    cutoff = best - 1e-9 * abs(best)
    winners = [cuts for cuts, sigma in scored if sigma >= cutoff]

    cut_matrix = np.asarray(winners)
    mids = [
        (int(cut_matrix[:, j].min()) + int(cut_matrix[:, j].max())) // 2
        for j in range(classes - 1)
    ]
    thresholds = [float(edges[m + 1]) for m in mids]
    assert all(a < b for a, b in zip(thresholds, thresholds[1:]))
    return thresholds


def classify_rvc(
    value: float, thresholds: tuple[float, float], reverse: bool = False
) -> RvcLabel:
    """Map an inefficiency-style value to its zone given two thresholds.

    Values at or below the first threshold are resilient, values above the
    second collapsed. ``reverse`` flips the orientation for metrics where low
    values are the degraded side (discomfort vanishing under full attack).
    """
    t1, t2 = thresholds
    if not t1 < t2:
        raise InvalidThresholdError(f"thresholds must increase, got ({t1}, {t2})")
    if value <= t1:
        band = 0
    elif value <= t2:
        band = 1
    else:
        band = 2
    if reverse:
        band = 2 - band
    return (RvcLabel.RESILIENCE, RvcLabel.VULNERABILITY, RvcLabel.COLLAPSE)[band]
