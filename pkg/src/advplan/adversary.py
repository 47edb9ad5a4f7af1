"""Adversarial configuration generators: severity levels and placements.

Placements come in three families: uniform random subsets, layer-confined
subsets at a ratio of the layer population, and cumulative prefixes of the
breadth-first order (top-down) or its reverse (bottom-up).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .engine import BehaviorProfile
from .errors import InvalidInputError, InvalidSizeError, RangeError
from .topology import TreeTopology, agents_in_layer

SEVERITY_LEVELS = 30
LAYER_RATIOS = (25, 50, 75, 100)
DIRECTIONS = ("top_down", "bottom_up")


def severity_grid() -> list[float]:
    """The 30-level severity ladder b/30 for b = 1..30 (last level exactly 1)."""
    return [b / SEVERITY_LEVELS for b in range(1, SEVERITY_LEVELS + 1)]


def layer_adversary_count(layer_size: int, p: int) -> int:
    """Number of adversaries a ratio p prescribes inside a layer, at least 1."""
    if layer_size < 1:
        raise InvalidSizeError(f"layer size must be >= 1, got {layer_size}")
    if p not in LAYER_RATIOS:
        raise InvalidInputError(f"ratio must be one of {LAYER_RATIOS}, got {p}")
    return max(1, -(-p * layer_size // 100))


def sample_k_subsets(
    population: list[int], k: int, cap: int, seed: int = 0
) -> list[frozenset[int]]:
    """All k-subsets if few enough, otherwise cap distinct uniform samples."""
    if cap < 1:
        raise InvalidInputError(f"cap must be >= 1, got {cap}")
    if not 1 <= k <= len(population):
        raise InvalidInputError(f"cannot choose {k} of {len(population)} agents")
    population = sorted(population)
    total = math.comb(len(population), k)
    if total <= cap:
        return [frozenset(c) for c in itertools.combinations(population, k)]
    rng = np.random.default_rng(seed)
    pool = np.array(population)
    seen: set[tuple[int, ...]] = set()
    out: list[frozenset[int]] = []
    while len(out) < cap:
        pick = tuple(sorted(int(a) for a in rng.choice(pool, size=k, replace=False)))
        if pick not in seen:
            seen.add(pick)
            out.append(frozenset(pick))
    return out


def enumerate_layer_configs(
    topology: TreeTopology, layer: int, p: int, cap: int = 100, seed: int = 0
) -> list[frozenset[int]]:
    """Adversary sets confined to one layer at ratio p, capped and seeded."""
    agents = sorted(agents_in_layer(topology, layer))
    k = layer_adversary_count(len(agents), p)
    return sample_k_subsets(agents, k, cap, seed)


def _canonical_direction(direction: str) -> str:
    name = direction.strip().lower().replace("-", "_")
    if name not in DIRECTIONS:
        raise InvalidInputError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    return name


def cumulative_positions(topology: TreeTopology, direction: str, m: int) -> set[int]:
    """First m agents along the breadth-first order or its exact reverse."""
    direction = _canonical_direction(direction)
    n = topology.node_count
    if not 1 <= m <= n:
        raise RangeError(f"m={m} outside 1..{n}")
    if direction == "top_down":
        span = range(1, m + 1)
    else:
        span = range(n, n - m, -1)
    return {topology.agent_at[pos - 1] for pos in span}


def random_adversaries(topology: TreeTopology, count: int, seed: int = 0) -> set[int]:
    """Uniform adversary subset of the given size, drawn without replacement."""
    n = topology.node_count
    if not 0 <= count <= n:
        raise RangeError(f"count={count} outside 0..{n}")
    if count == 0:
        return set()
    rng = np.random.default_rng(seed)
    return {int(a) for a in rng.choice(np.arange(1, n + 1), size=count, replace=False)}


def make_profile(
    topology: TreeTopology, adversaries, beta_d: float
) -> BehaviorProfile:
    """Behavior profile with beta_d on the listed agents and 0 elsewhere."""
    if not 0.0 < beta_d <= 1.0:
        raise InvalidInputError(f"adversarial severity must be in (0, 1], got {beta_d}")
    adversaries = set(adversaries)
    all_agents = set(range(1, topology.node_count + 1))
    unknown = adversaries - all_agents
    if unknown:
        raise InvalidInputError(f"unknown agent ids {sorted(unknown)}")
    return BehaviorProfile(
        beta={a: (beta_d if a in adversaries else 0.0) for a in sorted(all_agents)}
    )


@dataclass(frozen=True)
class AttackSpec:
    """One adversarial setting: severity plus a placement recipe.

    ``placement`` is one of ``random``, ``layer``, ``cumulative``. Random
    placements need ``count`` or ``fraction``; layer placements a ``layer``
    and ``ratio``; cumulative placements a ``direction`` and ``m``.
    """

    severity: float
    placement: str = "random"
    count: int | None = None
    fraction: float | None = None
    layer: int | None = None
    ratio: int | None = None
    direction: str | None = None
    m: int | None = None
    sample_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.severity <= 1.0:
            raise InvalidInputError(f"severity must be in (0, 1], got {self.severity}")
        if self.placement not in ("random", "layer", "cumulative"):
            raise InvalidInputError(f"unknown placement {self.placement!r}")

    def resolve_count(self, n: int) -> int:
        if self.count is not None:
            return self.count
        if self.fraction is not None:
            return round(self.fraction * n)
        raise InvalidInputError("random placement needs a count or fraction")

    def materialize(self, topology: TreeTopology) -> set[int]:
        """Concrete adversary set on the given topology."""
        if self.placement == "random":
            return random_adversaries(
                topology, self.resolve_count(topology.node_count), self.sample_seed
            )
        if self.placement == "layer":
            if self.layer is None or self.ratio is None:
                raise InvalidInputError("layer placement needs layer and ratio")
            configs = enumerate_layer_configs(
                topology, self.layer, self.ratio, cap=1, seed=self.sample_seed
            )
            return set(configs[0])
        if self.direction is None or self.m is None:
            raise InvalidInputError("cumulative placement needs direction and m")
        return cumulative_positions(topology, self.direction, self.m)
