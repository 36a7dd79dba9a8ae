"""Fixed-order trajectory optimization and the independent solution checker."""

import numpy as np
import pytest

from aoiplan import (
    CoincidentTimesError,
    ScheduleError,
    check_solution,
    nwaoi,
    per_count_floor,
    solve_min_speed,
    solve_schedule,
)
from aoiplan.bounds import min_speed_upper_bound
from aoiplan.physics import UpdateTimes, split_by_node
from aoiplan.solver import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    build_time_quadratic,
    node_time_quadratic,
    validate_order,
)
from conftest import build_scenario
from oracle_grid import oracle_objective


def test_node_quadratic_two_updates():
    assert node_time_quadratic(2).tolist() == [[2.0, -1.0], [-1.0, 2.0]]


def test_node_quadratic_three_update_spectrum():
    eigs = np.sort(np.linalg.eigvalsh(node_time_quadratic(3)))
    expected = np.sort([2.0 - np.sqrt(2.0), 2.0, 2.0 + np.sqrt(2.0)])
    assert np.allclose(eigs, expected, atol=1e-12)


def test_node_quadratic_positive_definite():
    for n in range(1, 8):
        assert np.min(np.linalg.eigvalsh(node_time_quadratic(n))) > 0.0


def test_quadratic_matches_metric():
    # sum of squared gaps = s'Qs - 2*tau*s_last + tau^2 per node.
    scenario = build_scenario([2, 1], weights=[0.3, 0.7])
    horizon = scenario.uav.horizon_s
    weights = scenario.weights()
    rng = np.random.default_rng(11)
    order = [1, 2, 1]
    forms = build_time_quadratic(order, scenario.num_nodes)
    for _ in range(25):
        times = np.sort(rng.uniform(0.0, horizon, len(order)))
        value = 0.0
        for m, (pos, quad) in enumerate(forms):
            if pos.size == 0:
                value += weights[m]
                continue
            s = times[pos]
            value += (
                weights[m]
                * (s @ quad @ s - 2.0 * horizon * s[-1] + horizon**2)
                / horizon**2
            )
        direct = nwaoi(
            scenario, UpdateTimes(split_by_node(order, times, scenario.num_nodes))
        )
        assert value == pytest.approx(direct, abs=1e-12)


def test_validate_order_rejects_bad_entries():
    with pytest.raises(ScheduleError):
        validate_order([0], 2)
    with pytest.raises(ScheduleError):
        validate_order([3], 2)


def test_empty_order_is_do_nothing():
    scenario = build_scenario([1])
    solution = solve_schedule(scenario, [])
    assert solution.status == STATUS_OPTIMAL
    assert solution.objective == 1.0
    assert solution.times_s.size == 0
    assert check_solution(scenario, solution).ok


def test_hover_mission_halves_metric():
    scenario = build_scenario(
        [1], positions=[(500.0, 500.0)], initial=(500.0, 500.0), final=(500.0, 500.0)
    )
    solution = solve_schedule(scenario, [1])
    assert solution.status == STATUS_OPTIMAL
    assert solution.objective == pytest.approx(0.5, abs=1e-9)
    assert solution.times_s[0] == pytest.approx(450.0, abs=1e-3)


def test_unaffordable_count_is_infeasible():
    scenario = build_scenario([1])
    solution = solve_schedule(scenario, [1, 1])
    assert solution.status == STATUS_INFEASIBLE
    assert "cannot afford" in solution.message
    assert solution.objective == np.inf


def test_iteration_cap_reported():
    scenario = build_scenario([1, 2])
    solution = solve_schedule(scenario, [2, 1, 2], max_iters=2)
    assert solution.status != STATUS_OPTIMAL


def test_generous_speed_reaches_per_count_floor():
    scenario = build_scenario([1, 2], vmax=1e6)
    solution = solve_schedule(scenario, [2, 1, 2])
    floor = per_count_floor(scenario, [1, 2])
    assert solution.status == STATUS_OPTIMAL
    assert solution.objective >= floor - 1e-9
    assert solution.objective == pytest.approx(floor, rel=1e-6)


def test_objective_matches_metric_recomputation():
    scenario = build_scenario([2, 1])
    solution = solve_schedule(scenario, [1, 2, 1])
    direct = nwaoi(scenario, solution.update_times(scenario.num_nodes))
    assert solution.objective == pytest.approx(direct, rel=1e-9)


def test_coincident_times_reported():
    scenario = build_scenario(
        [1, 1],
        positions=[(400.0, 400.0), (400.0, 400.0)],
        initial=(400.0, 400.0),
        final=(400.0, 400.0),
    )
    solution = solve_schedule(scenario, [1, 2])
    assert solution.status == STATUS_OPTIMAL
    assert solution.objective == pytest.approx(0.5, abs=1e-6)
    assert solution.coincident_pairs, "both nodes want the midpoint instant"


def test_random_instances_pass_independent_checker():
    rng = np.random.default_rng(2024)
    for trial in range(25):
        m = 1 + trial % 3
        counts = rng.integers(0, 3, m)
        if counts.sum() == 0:
            counts[rng.integers(0, m)] = 1
        weights = rng.uniform(0.2, 1.0, m)
        scenario = build_scenario(
            counts,
            positions=[tuple(rng.uniform(100.0, 900.0, 2)) for _ in range(m)],
            weights=list(weights / weights.sum()),
            initial=tuple(rng.uniform(0.0, 1000.0, 2)),
            final=tuple(rng.uniform(0.0, 1000.0, 2)),
        )
        order = [mm + 1 for mm in range(m) for _ in range(counts[mm])]
        rng.shuffle(order)
        solution = solve_schedule(scenario, order)
        assert solution.status == STATUS_OPTIMAL, solution.message
        assert solution.kkt_residual <= 1e-5
        assert np.all(solution.duals >= -1e-8)
        report = check_solution(scenario, solution)
        assert report.ok, report.messages
        direct = nwaoi(scenario, solution.update_times(m))
        assert solution.objective == pytest.approx(direct, rel=1e-9)


def test_objective_convex_along_feasible_times():
    # The metric is a convex quadratic of the merged instants; the solver's
    # reported optimum cannot exceed any interior blend evaluation.
    scenario = build_scenario([2])
    solution = solve_schedule(scenario, [1, 1])
    base = solution.times_s
    other = np.array([200.0, 700.0])
    for alpha in (0.0, 0.25, 0.5, 1.0):
        blend = (1 - alpha) * base + alpha * other
        value = nwaoi(scenario, UpdateTimes([blend]))
        assert solution.objective <= value + 1e-9


def test_solver_matches_lattice_oracle():
    # One node on a line, three updates, generous energy ball: the full
    # continuous optimum is the uniform split, value 1/4.
    scenario = build_scenario(
        [3],
        positions=[(200.0, 0.0)],
        initial=(0.0, 0.0),
        final=(400.0, 0.0),
        vmax=5.0,
    )
    solution = solve_schedule(scenario, [1, 1, 1])
    assert solution.status == STATUS_OPTIMAL
    oracle = oracle_objective(node_x=200.0, span=400.0, v=5.0, tau=900.0, n=3, ball=3200.0)
    assert abs(solution.objective - oracle) <= 0.02 * oracle
    assert solution.objective <= oracle + 1e-6
    assert oracle == pytest.approx(0.25, abs=1e-9)


def test_min_speed_below_closed_form_bound():
    scenario = build_scenario(
        [1, 2],
        positions=[(0.0, 0.0), (300.0, 0.0)],
        initial=(0.0, 0.0),
        final=(300.0, 0.0),
    )
    result = solve_min_speed(scenario)
    assert result.status == STATUS_OPTIMAL
    assert result.speed <= min_speed_upper_bound(scenario) + 1e-9
    assert result.speed > 0.0


def test_min_speed_colocated_is_zero():
    scenario = build_scenario(
        [1, 2],
        positions=[(100.0, 100.0), (100.0, 100.0)],
        initial=(100.0, 100.0),
        final=(100.0, 100.0),
    )
    result = solve_min_speed(scenario)
    assert result.speed <= 1e-6


def test_min_speed_rejects_coincident_schedule():
    with pytest.raises(CoincidentTimesError):
        solve_min_speed(build_scenario([1, 3]))


def test_min_speed_random_instances_within_bound():
    rng = np.random.default_rng(77)
    cases = 0
    while cases < 12:
        counts = [int(rng.integers(1, 4)), int(rng.integers(1, 4))]
        if (counts[0] + 1) % (counts[1] + 1) == 0 or (counts[1] + 1) % (
            counts[0] + 1
        ) == 0:
            continue
        scenario = build_scenario(
            counts,
            positions=[tuple(rng.uniform(100.0, 900.0, 2)) for _ in range(2)],
            initial=tuple(rng.uniform(0.0, 1000.0, 2)),
            final=tuple(rng.uniform(0.0, 1000.0, 2)),
        )
        result = solve_min_speed(scenario)
        assert result.status == STATUS_OPTIMAL
        assert result.speed <= min_speed_upper_bound(scenario) + 1e-6
        cases += 1


def test_check_report_document_keys():
    scenario = build_scenario([1])
    report = check_solution(scenario, solve_schedule(scenario, [1]))
    doc = report.to_document()
    for key in ("ok", "feasibility", "stationarity", "complementarity"):
        assert key in doc
