import itertools

import numpy as np
import pytest

from advplan.adversary import make_profile, random_adversaries
from advplan.costs import InefficiencyFn
from advplan.engine import (
    BehaviorProfile,
    RunConfig,
    RunOutcome,
    run,
    run_baseline,
    select_plan,
    subtree_sums,
)
from advplan.errors import ConfigError, DimensionMismatchError, InvalidInputError
from advplan.plans import Plan, PlanSet, generate_gaussian_plans
from advplan.topology import build_balanced_binary


def toy_plan_set(agent_id, rows, discomforts):
    return PlanSet(
        agent_id=agent_id,
        plans=tuple(
            Plan(values=np.array(row, dtype=float), discomfort=d)
            for row, d in zip(rows, discomforts)
        ),
    )


def test_select_plan_pure_selfish_ignores_context():
    agent = toy_plan_set(1, [[5, 5], [0, 0], [1, 1]], [0.9, 0.4, 0.7])
    idx = select_plan(agent, (0.0, 1.0), np.array([100.0, -100.0]), [2.0, 3.0], InefficiencyFn())
    assert idx == 1


def test_select_plan_pure_altruistic_minimizes_inefficiency():
    # Context [1, -1]: plan [-1, 1] flattens the sum exactly.
    agent = toy_plan_set(1, [[2, 0], [-1, 1], [5, 5]], [0.0, 9.0, 1.0])
    idx = select_plan(agent, (1.0, 0.0), np.array([1.0, -1.0]), [0.5], InefficiencyFn())
    assert idx == 1


def test_select_plan_matches_exhaustive_weighted_objective():
    agent = toy_plan_set(1, [[1, 0], [0, 1], [0.4, 0.4]], [0.1, 0.5, 0.9])
    ctx = np.array([0.3, -0.3])
    others = [0.2, 0.6]
    ineff = InefficiencyFn()
    alpha = beta = 0.5

    ineff_costs = np.array([ineff(ctx + p.values) for p in agent.plans])
    disc_costs = np.array(
        [(sum(others) + p.discomfort) / (len(others) + 1) for p in agent.plans]
    )

    def norm(v):
        return (v - v.min()) / (v.max() - v.min()) if v.max() > v.min() else v * 0

    expected = int(np.argmin(alpha * norm(ineff_costs) + beta * norm(disc_costs)))
    assert select_plan(agent, (alpha, beta), ctx, others, ineff) == expected


def test_select_plan_dimension_mismatch():
    agent = toy_plan_set(1, [[1, 2]], [0.0])
    with pytest.raises(DimensionMismatchError):
        select_plan(agent, (1.0, 0.0), np.zeros(3), [], InefficiencyFn())


def test_select_plan_discomfort_rescaling_invariance():
    rng = np.random.default_rng(8)
    for _ in range(20):
        k = int(rng.integers(2, 6))
        rows = rng.normal(size=(k, 3))
        discomforts = rng.random(k)
        agent = toy_plan_set(1, rows, discomforts)
        scaled = toy_plan_set(1, rows, discomforts * float(rng.uniform(0.5, 10)))
        ctx = rng.normal(size=3)
        for beta in (0.0, 0.3, 1.0):
            a = select_plan(agent, (1 - beta, beta), ctx, [0.1, 0.2], InefficiencyFn())
            b = select_plan(scaled, (1 - beta, beta), ctx, [0.1, 0.2], InefficiencyFn())
            assert a == b


def test_run_forced_when_single_plan():
    plan_sets = generate_gaussian_plans(5, 1, 3, seed=2)
    topo = build_balanced_binary(5, permutation_seed=2)
    out = run_baseline(topo, plan_sets, RunConfig())
    assert out.iterations_used == 1
    expected = np.sum([ps.plans[0].values for ps in plan_sets], axis=0)
    assert np.allclose(out.global_response, expected)


def test_run_all_selfish_selects_minimum_discomfort():
    rng = np.random.default_rng(3)
    n, k = 9, 4
    plan_sets = []
    for agent in range(1, n + 1):
        discomforts = rng.permutation(k).astype(float)
        plan_sets.append(
            toy_plan_set(agent, rng.normal(size=(k, 2)), discomforts)
        )
    topo = build_balanced_binary(n, permutation_seed=1)
    profile = BehaviorProfile.uniform(range(1, n + 1), 1.0)
    out = run(topo, plan_sets, profile, RunConfig())
    by_id = {ps.agent_id: ps for ps in plan_sets}
    expected_g = np.zeros(2)
    for agent, idx in out.selections.items():
        discomforts = by_id[agent].discomforts()
        assert discomforts[idx] == discomforts.min()
        expected_g += by_id[agent].plans[idx].values
    assert np.allclose(out.global_response, expected_g)


def test_run_conservation_and_determinism():
    plan_sets = generate_gaussian_plans(15, 3, 4, seed=11)
    topo = build_balanced_binary(15, permutation_seed=5)
    profile = make_profile(topo, random_adversaries(topo, 4, seed=3), 0.6)
    out1 = run(topo, plan_sets, profile, RunConfig())
    out2 = run(topo, plan_sets, profile, RunConfig())
    assert out1.selections == out2.selections
    assert np.array_equal(out1.global_response, out2.global_response)
    assert out1.combined_cost_trace == out2.combined_cost_trace
    by_id = {ps.agent_id: ps for ps in plan_sets}
    flat = np.sum(
        [by_id[a].plans[i].values for a, i in out1.selections.items()], axis=0
    )
    assert np.allclose(out1.global_response, flat)


def test_monotone_combined_cost_trace_random_configs():
    rng = np.random.default_rng(17)
    for trial in range(40):
        n = int(rng.integers(2, 24))
        k = int(rng.integers(1, 5))
        d = int(rng.integers(1, 5))
        plan_sets = generate_gaussian_plans(n, k, d, seed=trial)
        topo = build_balanced_binary(n, permutation_seed=trial)
        count = int(rng.integers(0, n + 1))
        beta = float(rng.uniform(0.05, 1.0))
        profile = (
            make_profile(topo, random_adversaries(topo, count, seed=trial), beta)
            if count
            else BehaviorProfile.uniform(range(1, n + 1), 0.0)
        )
        out = run(topo, plan_sets, profile, RunConfig())
        trace = out.combined_cost_trace
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))
        assert len(trace) == out.iterations_used + 1


def test_baseline_equals_all_legitimate_run():
    plan_sets = generate_gaussian_plans(10, 3, 2, seed=4)
    topo = build_balanced_binary(10, permutation_seed=4)
    base = run_baseline(topo, plan_sets, RunConfig())
    same = run(topo, plan_sets, BehaviorProfile.uniform(range(1, 11), 0.0), RunConfig())
    assert base.selections == same.selections
    assert base.global_inefficiency == same.global_inefficiency


def test_baseline_not_worse_than_adversarial_statistically():
    wins = 0
    trials = 50
    rng = np.random.default_rng(23)
    for trial in range(trials):
        n = int(rng.integers(4, 13))
        plan_sets = generate_gaussian_plans(n, int(rng.integers(2, 5)), 2, seed=trial)
        topo = build_balanced_binary(n, permutation_seed=trial)
        base = run_baseline(topo, plan_sets, RunConfig())
        count = 1 + int(rng.integers(n))
        adv = random_adversaries(topo, count, seed=trial + 1000)
        out = run(
            topo, plan_sets,
            make_profile(topo, adv, float(rng.uniform(0.1, 1.0))),
            RunConfig(),
        )
        if base.global_inefficiency <= out.global_inefficiency + 1e-12:
            wins += 1
    assert wins >= 0.9 * trials


def test_baseline_identical_to_adversarial_when_no_choice():
    plan_sets = generate_gaussian_plans(6, 1, 2, seed=9)
    topo = build_balanced_binary(6, permutation_seed=9)
    base = run_baseline(topo, plan_sets, RunConfig())
    adv = run(topo, plan_sets, BehaviorProfile.uniform(range(1, 7), 1.0), RunConfig())
    assert base.selections == adv.selections
    assert base.global_inefficiency == adv.global_inefficiency


def test_brute_force_quality_on_tiny_instances():
    # The engine is a descent heuristic; on 3^5 toy instances it should land
    # well inside the best fifth of the joint-selection cost distribution and
    # never beat the enumerated optimum.
    for seed in range(10):
        plan_sets = generate_gaussian_plans(5, 3, 2, seed=seed)
        topo = build_balanced_binary(5, permutation_seed=seed)
        out = run_baseline(topo, plan_sets, RunConfig())
        mats = [ps.value_matrix() for ps in plan_sets]
        costs = sorted(
            float(np.var(sum(m[i] for m, i in zip(mats, combo))))
            for combo in itertools.product(range(3), repeat=5)
        )
        assert out.global_inefficiency >= costs[0] - 1e-12
        assert out.global_inefficiency <= costs[len(costs) // 5]


def test_subtree_sums_match_flat_recomputation():
    plan_sets = generate_gaussian_plans(13, 3, 2, seed=6)
    topo = build_balanced_binary(13, permutation_seed=6)
    values_by_pos = [
        {ps.agent_id: ps for ps in plan_sets}[topo.agent_at[p]].value_matrix()
        for p in range(13)
    ]
    rng = np.random.default_rng(0)
    selections = rng.integers(0, 3, size=13)
    sums = subtree_sums(topo, values_by_pos, selections)

    def descendants(pos):
        out = [pos]
        for child in topo.children_of(pos):
            out.extend(descendants(child))
        return out

    for pos in range(1, 14):
        flat = np.sum(
            [values_by_pos[q - 1][selections[q - 1]] for q in descendants(pos)], axis=0
        )
        assert np.allclose(sums[pos - 1], flat)


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(max_iterations=0)
    with pytest.raises(ConfigError):
        RunConfig(initial_selection="best")
    assert RunConfig(initial_selection="first-plan").initial_selection == "first_plan"


def test_run_input_validation():
    plan_sets = generate_gaussian_plans(4, 2, 2, seed=0)
    topo = build_balanced_binary(5)
    with pytest.raises(ConfigError):
        run_baseline(topo, plan_sets, RunConfig())
    topo4 = build_balanced_binary(4)
    profile = BehaviorProfile.uniform(range(1, 4), 0.0)
    with pytest.raises(ConfigError):
        run(topo4, plan_sets, profile, RunConfig())


def test_behavior_profile_validation_and_views():
    with pytest.raises(InvalidInputError):
        BehaviorProfile(beta={1: 1.5})
    profile = BehaviorProfile(beta={1: 0.0, 2: 0.5, 3: 0.0})
    assert profile.adversaries == {2}
    assert profile.legitimate == {1, 3}
    assert profile.alpha(2) == 0.5
    assert profile.mean_weights() == (pytest.approx(5 / 6), pytest.approx(1 / 6))


def test_random_initial_selection_seeded():
    plan_sets = generate_gaussian_plans(12, 4, 2, seed=3)
    topo = build_balanced_binary(12, permutation_seed=3)
    cfg_a = RunConfig(initial_selection="random", rng_seed=7)
    out_a = run_baseline(topo, plan_sets, cfg_a)
    out_b = run_baseline(topo, plan_sets, cfg_a)
    assert out_a.selections == out_b.selections
    out_c = run_baseline(topo, plan_sets, RunConfig(initial_selection="random", rng_seed=8))
    assert isinstance(out_c, RunOutcome)
