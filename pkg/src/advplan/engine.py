"""Iterative hierarchical plan selection over a tree of agents.

Each iteration runs a bottom-up phase, where every agent re-selects a plan
against the aggregate choices of its subtree plus last iteration's view of
the rest of the network, followed by a top-down phase that approves or rolls
back the proposed changes subtree by subtree. Only changes that strictly
decrease the scalarized global cost survive, so the accepted-cost trace is
non-increasing by construction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .costs import GlobalResponse, InefficiencyFn
from .errors import ConfigError, DimensionMismatchError, InvalidInputError
from .plans import PlanSet
from .topology import TreeTopology

INITIAL_SELECTION_MODES = ("first_plan", "random")

# Reference costs below this are treated as zero when normalizing.
_TINY = 1e-12


@dataclass(frozen=True)
class BehaviorProfile:
    """Per-agent weighting between system inefficiency and own discomfort.

    ``beta[a]`` is agent a's weight on its own discomfort; the inefficiency
    weight is always ``1 - beta[a]``. Legitimate agents sit at beta 0,
    adversaries anywhere in (0, 1].
    """

    beta: dict[int, float]

    def __post_init__(self) -> None:
        for agent, b in self.beta.items():
            if not 0.0 <= b <= 1.0:
                raise InvalidInputError(f"beta for agent {agent} must be in [0, 1], got {b}")

    @classmethod
    def uniform(cls, agent_ids, beta: float) -> "BehaviorProfile":
        return cls(beta={int(a): float(beta) for a in agent_ids})

    def alpha(self, agent_id: int) -> float:
        return 1.0 - self.beta[agent_id]

    @property
    def adversaries(self) -> set[int]:
        return {a for a, b in self.beta.items() if b > 0.0}

    @property
    def legitimate(self) -> set[int]:
        return {a for a, b in self.beta.items() if b == 0.0}

    def mean_weights(self) -> tuple[float, float]:
        """Population means of (alpha, beta), used for the global cost."""
        betas = np.fromiter(self.beta.values(), dtype=float)
        mean_beta = float(betas.mean())
        return 1.0 - mean_beta, mean_beta


@dataclass(frozen=True)
class RunConfig:
    max_iterations: int = 40
    inefficiency: InefficiencyFn = field(default_factory=InefficiencyFn)
    rng_seed: int = 0
    initial_selection: str = "first_plan"

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        mode = self.initial_selection.strip().lower().replace("-", "_")
        if mode == "first":
            mode = "first_plan"
        if mode not in INITIAL_SELECTION_MODES:
            raise ConfigError(f"unknown initial_selection mode {self.initial_selection!r}")
        object.__setattr__(self, "initial_selection", mode)


@dataclass
class RunOutcome:
    """Final joint selection plus per-iteration traces of one run."""

    selections: dict[int, int]
    global_response: GlobalResponse
    global_inefficiency: float
    discomfort_per_agent: dict[int, float]
    iterations_used: int
    inefficiency_trace: list[float]
    combined_cost_trace: list[float]
    mean_alpha: float
    mean_beta: float

    def mean_discomfort(self, agents=None) -> float:
        """Mean selected discomfort over the given agents (all by default)."""
        pool = self.discomfort_per_agent if agents is None else {
            a: self.discomfort_per_agent[a] for a in agents
        }
        if not pool:
            return 0.0
        return float(np.mean(list(pool.values())))


def _normalized(values: np.ndarray) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def _argmin_weighted(
    values: np.ndarray,
    discomforts: np.ndarray,
    alpha: float,
    beta: float,
    context_response: np.ndarray,
    context_disc_sum: float,
    context_disc_count: int,
    ineff: InefficiencyFn,
) -> int:
    """Index minimizing alpha * normalized inefficiency + beta * normalized discomfort.

    Both cost terms are min-max normalized over the k candidates so the
    weights interpolate between the pure regimes; ties resolve to the lowest
    index.
    """
    ineff_costs = ineff.batch(context_response[None, :] + values)
    disc_costs = (context_disc_sum + discomforts) / (context_disc_count + 1)
    score = alpha * _normalized(ineff_costs) + beta * _normalized(disc_costs)
    return int(np.argmin(score))


def select_plan(
    agent: PlanSet,
    behavior: tuple[float, float],
    context_response: GlobalResponse,
    context_discomforts,
    ineff: InefficiencyFn,
) -> int:
    """Pick the plan index for one agent given the rest of the network.

    ``context_response`` must already exclude the agent's own contribution;
    ``context_discomforts`` holds the other agents' current discomforts, which
    the candidate's own discomfort joins through the mean aggregation.
    """
    alpha, beta = behavior
    context_response = np.asarray(context_response, dtype=float)
    if context_response.shape[0] != agent.dimension:
        raise DimensionMismatchError(
            f"context has dimension {context_response.shape[0]}, plans {agent.dimension}"
        )
    others = np.asarray(list(context_discomforts), dtype=float)
    return _argmin_weighted(
        agent.value_matrix(),
        agent.discomforts(),
        alpha,
        beta,
        context_response,
        float(others.sum()),
        int(others.size),
        ineff,
    )


def subtree_sums(
    topology: TreeTopology, values_by_pos: list[np.ndarray], selections: np.ndarray
) -> np.ndarray:
    """Aggregate selected plans per subtree without double counting.

    Returns an (n, d) array where row p-1 is the elementwise sum of the plans
    selected inside the subtree rooted at position p: the node's own selection
    plus its children's aggregates.
    """
    n = topology.node_count
    d = values_by_pos[0].shape[1]
    sums = np.zeros((n, d))
    for pos in range(n, 0, -1):
        acc = values_by_pos[pos - 1][selections[pos - 1]].copy()
        for child in topology.children_of(pos):
            acc += sums[child - 1]
        sums[pos - 1] = acc
    return sums


def _scalar_subtree_sums(topology: TreeTopology, values: np.ndarray) -> np.ndarray:
    sums = np.zeros(topology.node_count)
    for pos in range(topology.node_count, 0, -1):
        acc = values[pos - 1]
        for child in topology.children_of(pos):
            acc += sums[child - 1]
        sums[pos - 1] = acc
    return sums


class _RunState:
    """Mutable per-position view of one run, always kept self-consistent."""

    def __init__(self, topology, values_by_pos, disc_by_pos, selections):
        self.topology = topology
        self.values_by_pos = values_by_pos
        self.disc_by_pos = disc_by_pos
        self.set_selections(selections)

    def set_selections(self, selections: np.ndarray) -> None:
        n = self.topology.node_count
        self.selections = selections
        self.disc = np.array(
            [self.disc_by_pos[p][selections[p]] for p in range(n)]
        )
        self.subtree = subtree_sums(self.topology, self.values_by_pos, selections)
        self.disc_subtree = _scalar_subtree_sums(self.topology, self.disc)
        self.response = self.subtree[0].copy()
        self.disc_total = float(self.disc.sum())


def run(
    topology: TreeTopology,
    plan_sets: list[PlanSet],
    behavior: BehaviorProfile,
    config: RunConfig,
) -> RunOutcome:
    """Execute the iterative optimization until convergence or the limit.

    Per iteration, positions are processed leaves-to-root: each agent sees the
    previous global response with its own subtree's stale contribution swapped
    for the children's fresh aggregates, re-selects, and hands its subtree
    aggregate upward. The top-down phase then decides, per subtree, between
    adopting its proposed changes wholesale and keeping the node at its
    previous selection while the children are considered on their own;
    whichever leaves the working global state at the strictly lower
    scalarized cost is kept, so unhelpful proposals revert. Iterations stop
    once a pass approves no change, since the process is deterministic from
    there on.
    """
    n = topology.node_count
    if len(plan_sets) != n:
        raise ConfigError(f"{len(plan_sets)} plan sets for a {n}-node topology")
    by_agent = {ps.agent_id: ps for ps in plan_sets}
    if set(by_agent) != set(range(1, n + 1)):
        raise ConfigError("plan-set agent ids must cover 1..n exactly")
    if set(behavior.beta) != set(by_agent):
        raise ConfigError("behavior profile must cover every agent exactly once")
    dims = {ps.dimension for ps in plan_sets}
    if len(dims) != 1:
        raise ConfigError(f"plan dimensions differ across agents: {sorted(dims)}")
    d = dims.pop()
    ineff = config.inefficiency
    if ineff.kind == "rss" and ineff.target.shape[0] != d:
        raise ConfigError(
            f"target signal has dimension {ineff.target.shape[0]}, plans {d}"
        )

    # Per-position views, so tree arithmetic never touches agent ids.
    agent_by_pos = [topology.agent_at[p] for p in range(n)]
    values_by_pos = [by_agent[a].value_matrix() for a in agent_by_pos]
    disc_by_pos = [by_agent[a].discomforts() for a in agent_by_pos]
    alpha_by_pos = np.array([behavior.alpha(a) for a in agent_by_pos])
    beta_by_pos = np.array([behavior.beta[a] for a in agent_by_pos])
    mean_alpha, mean_beta = behavior.mean_weights()

    if config.initial_selection == "random":
        rng = np.random.default_rng(config.rng_seed)
        initial = np.array(
            [rng.integers(len(disc_by_pos[p])) for p in range(n)], dtype=int
        )
    else:
        initial = np.zeros(n, dtype=int)

    state = _RunState(topology, values_by_pos, disc_by_pos, initial)

    # Fixed per-run references keep the scalarized cost comparable across
    # iterations; a monotone accepted-cost trace follows from strict-decrease
    # approvals against them.
    ineff_ref = ineff(state.response)
    ineff_ref = ineff_ref if ineff_ref > _TINY else 1.0
    disc_ref = float(np.mean([dc.max() for dc in disc_by_pos]))
    disc_ref = disc_ref if disc_ref > _TINY else 1.0

    def combined(g: np.ndarray, disc_sum: float) -> float:
        return (
            mean_alpha * ineff(g) / ineff_ref
            + mean_beta * (disc_sum / n) / disc_ref
        )

    inefficiency_trace = [ineff(state.response)]
    combined_trace = [combined(state.response, state.disc_total)]

    iterations_used = 0
    for _ in range(config.max_iterations):
        iterations_used += 1

        # Bottom-up: propose selections using fresh subtree info below,
        # last accepted state elsewhere.
        cand_sel = np.empty(n, dtype=int)
        cand_subtree = np.zeros((n, d))
        cand_disc_subtree = np.zeros(n)
        for pos in range(n, 0, -1):
            children = topology.children_of(pos)
            child_g = np.zeros(d)
            child_disc = 0.0
            for child in children:
                child_g += cand_subtree[child - 1]
                child_disc += cand_disc_subtree[child - 1]
            ctx_g = state.response - state.subtree[pos - 1] + child_g
            ctx_disc = state.disc_total - state.disc_subtree[pos - 1] + child_disc
            choice = _argmin_weighted(
                values_by_pos[pos - 1],
                disc_by_pos[pos - 1],
                alpha_by_pos[pos - 1],
                beta_by_pos[pos - 1],
                ctx_g,
                ctx_disc,
                n - 1,
                ineff,
            )
            cand_sel[pos - 1] = choice
            cand_subtree[pos - 1] = values_by_pos[pos - 1][choice] + child_g
            cand_disc_subtree[pos - 1] = disc_by_pos[pos - 1][choice] + child_disc

        # Top-down: per subtree, either adopt the proposed changes wholesale
        # or keep the node at its previous selection and let the children
        # argue for theirs; whichever of the two leaves the working global
        # state cheaper wins, and nothing is kept without a strict gain.
        def approve(pos: int, g_run: np.ndarray, disc_run: float):
            cost_keep = combined(g_run, disc_run)
            delta_g = cand_subtree[pos - 1] - state.subtree[pos - 1]
            delta_disc = cand_disc_subtree[pos - 1] - state.disc_subtree[pos - 1]
            cost_whole = combined(g_run + delta_g, disc_run + delta_disc)
            g_parts, disc_parts = g_run, disc_run
            part_marks: list[int] = []
            for child in topology.children_of(pos):
                g_parts, disc_parts, marks = approve(child, g_parts, disc_parts)
                part_marks.extend(marks)
            cost_parts = combined(g_parts, disc_parts)
            if cost_whole < cost_parts and cost_whole < cost_keep:
                return g_run + delta_g, disc_run + delta_disc, [pos]
            if cost_parts < cost_keep:
                return g_parts, disc_parts, part_marks
            return g_run, disc_run, []

        _, _, approved = approve(1, state.response.copy(), state.disc_total)
        new_sel = state.selections.copy()
        stack = deque(approved)
        while stack:
            pos = stack.popleft()
            new_sel[pos - 1] = cand_sel[pos - 1]
            stack.extend(topology.children_of(pos))

        changed = bool(np.any(new_sel != state.selections))
        if changed:
            state.set_selections(new_sel)
        inefficiency_trace.append(ineff(state.response))
        combined_trace.append(combined(state.response, state.disc_total))
        if not changed:
            break

    # Approval rule makes this hold by construction; guard against regressions.
    assert all(
        b <= a + 1e-9 for a, b in zip(combined_trace, combined_trace[1:])
    ), "accepted combined-cost trace must be non-increasing"

    selections_by_agent = {
        agent_by_pos[p]: int(state.selections[p]) for p in range(n)
    }
    discomfort_by_agent = {
        agent_by_pos[p]: float(disc_by_pos[p][state.selections[p]]) for p in range(n)
    }
    return RunOutcome(
        selections=selections_by_agent,
        global_response=state.response,
        global_inefficiency=float(ineff(state.response)),
        discomfort_per_agent=discomfort_by_agent,
        iterations_used=iterations_used,
        inefficiency_trace=inefficiency_trace,
        combined_cost_trace=combined_trace,
        mean_alpha=mean_alpha,
        mean_beta=mean_beta,
    )


def run_baseline(
    topology: TreeTopology, plan_sets: list[PlanSet], config: RunConfig
) -> RunOutcome:
    """Reference run with every agent legitimate (beta 0 across the board)."""
    profile = BehaviorProfile.uniform((ps.agent_id for ps in plan_sets), 0.0)
    return run(topology, plan_sets, profile, config)
