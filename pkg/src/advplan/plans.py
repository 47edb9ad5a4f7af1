"""Per-agent plan sets: file ingestion, synthetic generation, target signals.

Plan files are UTF-8 text named ``agent_<id>.plans``, one plan per line in the
form ``<discomfort>:<v1>,<v2>,...,<vd>``. A target-signal file is a single
line of comma-separated reals.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidInputError,
    InvalidSizeError,
    NoDataError,
    ParseError,
)

_PLAN_FILE_RE = re.compile(r"^agent_(\d+)\.plans$")


@dataclass(frozen=True, eq=False)
class Plan:
    """One candidate action vector plus the agent-local cost of picking it."""

    values: np.ndarray
    discomfort: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or self.values.size == 0:
            raise InvalidSizeError("plan values must form a non-empty vector")
        if self.discomfort < 0:
            raise InvalidInputError(f"discomfort must be >= 0, got {self.discomfort}")


@dataclass(frozen=True, eq=False)
class PlanSet:
    """Ordered candidate plans of one agent; the order is the tie-break order."""

    agent_id: int
    plans: tuple[Plan, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "plans", tuple(self.plans))
        if not self.plans:
            raise InvalidSizeError(f"agent {self.agent_id} has no plans")
        dims = {p.values.shape[0] for p in self.plans}
        if len(dims) != 1:
            raise DimensionMismatchError(
                f"agent {self.agent_id} mixes plan dimensions {sorted(dims)}"
            )

    @property
    def k(self) -> int:
        return len(self.plans)

    @property
    def dimension(self) -> int:
        return self.plans[0].values.shape[0]

    def value_matrix(self) -> np.ndarray:
        """Plans stacked as a (k, d) array."""
        return np.stack([p.values for p in self.plans])

    def discomforts(self) -> np.ndarray:
        return np.array([p.discomfort for p in self.plans], dtype=float)


@dataclass(frozen=True, eq=False)
class TargetSignal:
    """System-wide target vector the aggregate response is steered towards."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or self.values.size == 0:
            raise InvalidSizeError("target signal must be a non-empty vector")


def _parse_plan_line(line: str, path: Path, lineno: int) -> Plan:
    head, sep, tail = line.partition(":")
    if not sep:
        raise ParseError(f"{path}:{lineno}: missing ':' separator")
    try:
        discomfort = float(head)
        values = [float(tok) for tok in tail.split(",")]
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: {exc}") from None
    if discomfort < 0:
        raise ParseError(f"{path}:{lineno}: negative discomfort {discomfort}")
    return Plan(values=np.array(values), discomfort=discomfort)


def load_plan_set(path: Path | str, agent_id: int | None = None) -> PlanSet:
    """Read one plan file; the agent id defaults to the one in the file name."""
    path = Path(path)
    if agent_id is None:
        match = _PLAN_FILE_RE.match(path.name)
        if not match:
            raise ParseError(f"{path}: file name does not look like agent_<id>.plans")
        agent_id = int(match.group(1))
    plans: list[Plan] = []
    dim: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            plan = _parse_plan_line(line, path, lineno)
            if dim is None:
                dim = plan.values.shape[0]
            elif plan.values.shape[0] != dim:
                raise DimensionMismatchError(
                    f"{path}:{lineno}: plan has {plan.values.shape[0]} values, expected {dim}"
                )
            plans.append(plan)
    if not plans:
        raise NoDataError(f"{path}: no plans found")
    return PlanSet(agent_id=agent_id, plans=tuple(plans))


def load_plan_sets(path: Path | str, uniform: bool = True) -> list[PlanSet]:
    """Load every ``agent_<id>.plans`` file in a directory, sorted by agent id.

    With ``uniform`` (the default) all agents must agree on plan dimension and
    plan count, which is what the optimization engine expects.
    """
    path = Path(path)
    files = sorted(
        (int(m.group(1)), p)
        for p in path.iterdir()
        if (m := _PLAN_FILE_RE.match(p.name))
    ) if path.is_dir() else None
    if files is None:
        raise NoDataError(f"{path} is not a directory")
    if not files:
        raise NoDataError(f"{path} contains no agent_<id>.plans files")
    plan_sets = [load_plan_set(p, agent_id=aid) for aid, p in files]
    if uniform:
        dims = {ps.dimension for ps in plan_sets}
        if len(dims) != 1:
            raise DimensionMismatchError(f"plan dimension differs across agents: {sorted(dims)}")
        counts = {ps.k for ps in plan_sets}
        if len(counts) != 1:
            raise DimensionMismatchError(f"plan count differs across agents: {sorted(counts)}")
    return plan_sets


def _format_real(x: float) -> str:
    return repr(float(x))


def save_plan_set(plan_set: PlanSet, directory: Path | str) -> Path:
    """Write one agent's plans in the canonical text format; returns the path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"agent_{plan_set.agent_id}.plans"
    lines = [
        _format_real(p.discomfort) + ":" + ",".join(_format_real(v) for v in p.values)
        for p in plan_set.plans
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def save_plan_sets(plan_sets: list[PlanSet], directory: Path | str) -> list[Path]:
    return [save_plan_set(ps, directory) for ps in plan_sets]


def generate_gaussian_plans(
    n_agents: int, k_plans: int, d: int, seed: int = 0
) -> list[PlanSet]:
    """Synthesize standard-normal plan sets with rank-based discomfort.

    Every plan value is an i.i.d. N(0, 1) draw from the seeded generator.
    Within an agent, plan ``i`` (zero-based) gets discomfort ``i``, so the
    first plan is the most preferred one at cost 0.
    """
    if n_agents < 1 or k_plans < 1 or d < 1:
        raise InvalidSizeError(
            f"n_agents, k_plans and d must be positive, got ({n_agents}, {k_plans}, {d})"
        )
    rng = np.random.default_rng(seed)
    plan_sets = []
    for agent_id in range(1, n_agents + 1):
        values = rng.standard_normal((k_plans, d))
        plans = tuple(
            Plan(values=values[i], discomfort=float(i)) for i in range(k_plans)
        )
        plan_sets.append(PlanSet(agent_id=agent_id, plans=plans))
    return plan_sets


def generate_voting_targets(levels: list[float], d: int) -> list[TargetSignal]:
    """All orderings of the level values, one target signal per permutation."""
    if len(set(levels)) != len(levels):
        raise InvalidInputError(f"levels must be distinct, got {levels}")
    if d != len(levels):
        raise InvalidInputError(f"d={d} must equal the number of levels ({len(levels)})")
    return [
        TargetSignal(values=np.array(perm, dtype=float))
        for perm in itertools.permutations(levels)
    ]


def load_target_signal(path: Path | str) -> TargetSignal:
    """Read a one-line comma-separated target-signal file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8").strip()
    if not text:
        raise NoDataError(f"{path}: empty target file")
    try:
        values = [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ParseError(f"{path}:1: {exc}") from None
    return TargetSignal(values=np.array(values))


def save_target_signal(signal: TargetSignal, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(",".join(_format_real(v) for v in signal.values) + "\n", encoding="utf-8")
    return path
