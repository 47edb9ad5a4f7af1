"""System-level inefficiency costs and agent-level discomfort aggregation.

The global response is the elementwise sum of all selected plans; the
inefficiency of a response is either its dispersion (population variance) or
its residual sum of squares against a target signal, optionally after scaling
both vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError
from .plans import TargetSignal

# The global response is a plain length-d float vector.
GlobalResponse = np.ndarray

SCALING_MODES = ("identity", "min-max", "zero-mean-unit-norm")


def _canonical_scaling(mode: str) -> str:
    name = mode.strip().lower().replace("_", "-")
    if name not in SCALING_MODES:
        raise InvalidInputError(f"unknown scaling mode {mode!r}; pick one of {SCALING_MODES}")
    return name


def scale_vector(values: np.ndarray, mode: str) -> np.ndarray:
    """Apply one of the supported scaling modes; flat vectors scale to zeros."""
    mode = _canonical_scaling(mode)
    values = np.asarray(values, dtype=float)
    if mode == "identity":
        return values
    if mode == "min-max":
        lo, hi = values.min(), values.max()
        if hi == lo:
            return np.zeros_like(values)
        return (values - lo) / (hi - lo)
    centered = values - values.mean()
    norm = np.linalg.norm(centered)
    if norm == 0.0:
        return np.zeros_like(values)
    return centered / norm


def variance_cost(g: GlobalResponse) -> float:
    """Population variance (divisor d) of the response entries."""
    g = np.asarray(g, dtype=float)
    if g.size == 0:
        raise InvalidInputError("variance of an empty response is undefined")
    return float(np.var(g))


def rss_cost(g: GlobalResponse, target: TargetSignal | np.ndarray, scaling: str = "identity") -> float:
    """Sum of squared differences to the target after scaling both vectors."""
    g = np.asarray(g, dtype=float)
    t = target.values if isinstance(target, TargetSignal) else np.asarray(target, dtype=float)
    if g.shape != t.shape:
        raise DimensionMismatchError(f"response has shape {g.shape}, target {t.shape}")
    diff = scale_vector(g, scaling) - scale_vector(t, scaling)
    return float(diff @ diff)


def aggregate_discomfort(discomforts) -> float:
    """Arithmetic mean of the per-agent discomforts."""
    values = np.asarray(discomforts, dtype=float)
    if values.size == 0:
        raise InvalidInputError("cannot aggregate an empty discomfort list")
    return float(values.mean())


@dataclass(frozen=True)
class InefficiencyFn:
    """Configured system-cost function: plain variance or RSS to a target."""

    kind: str = "variance"
    target: np.ndarray | None = None
    scaling: str = "identity"

    def __post_init__(self) -> None:
        kind = self.kind.strip().lower()
        if kind not in ("variance", "rss"):
            raise InvalidInputError(f"unknown inefficiency kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "scaling", _canonical_scaling(self.scaling))
        if kind == "rss":
            if self.target is None:
                raise InvalidInputError("rss inefficiency requires a target signal")
            target = self.target.values if isinstance(self.target, TargetSignal) else self.target
            object.__setattr__(self, "target", np.asarray(target, dtype=float))

    def __call__(self, g: GlobalResponse) -> float:
        if self.kind == "variance":
            return variance_cost(g)
        return rss_cost(g, self.target, self.scaling)

    def batch(self, candidates: np.ndarray) -> np.ndarray:
        """Cost of every row of a (k, d) candidate-response matrix."""
        candidates = np.asarray(candidates, dtype=float)
        if self.kind == "variance":
            return np.var(candidates, axis=1)
        if candidates.shape[1] != self.target.shape[0]:
            raise DimensionMismatchError(
                f"candidates have dimension {candidates.shape[1]}, target {self.target.shape[0]}"
            )
        scaled_t = scale_vector(self.target, self.scaling)
        if self.scaling == "identity":
            diff = candidates - scaled_t
        else:
            diff = np.stack([scale_vector(row, self.scaling) for row in candidates]) - scaled_t
        return np.einsum("ij,ij->i", diff, diff)
