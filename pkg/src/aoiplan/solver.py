"""Trajectory optimization for a fixed visit order.

Given the order in which nodes upload, the remaining problem (choose the
update instants and the hover points) is convex: a quadratic age objective
under per-node energy balls, per-axis speed couplings, ordering, and box
constraints. A primal-dual interior-point method solves it directly; a
phase-I program finds a strictly interior start when the straight-run
initial guess is not one.

The same machinery also solves the minimum-cruise-speed program over the
fixed evenly spaced full-budget schedule (linear objective in the speed
variable).

Everything inside the solver runs in nondimensional units: times divided
by the horizon, coordinates by the scenario's length scale, and each
constraint by a characteristic magnitude. Reported duals and the KKT
residual refer to that scaled canonical form, which `check_solution`
rebuilds independently.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .bounds import all_max_updates, uniform_schedule
from .errors import CoincidentTimesError, ScheduleError
from .physics import UpdateTimes, energy_budget_constant, nwaoi, split_by_node
from .scenario import Scenario

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_MAX_ITERATIONS = "max_iterations"

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 200

_MU = 10.0
_LS_ALPHA = 0.01
_LS_BETA = 0.5
_STRICT_MARGIN = 1e-7


def validate_order(order: Sequence[int], num_nodes: int) -> tuple[int, ...]:
    """Normalize a visit order to a tuple of 1-based node indices."""
    out = []
    for v in order:
        iv = int(v)
        if iv != v:
            raise ScheduleError("visit order entries must be integers")
        if iv < 1 or iv > num_nodes:
            raise ScheduleError(f"visit order entry {iv} outside [1, {num_nodes}]")
        out.append(iv)
    return tuple(out)


def node_time_quadratic(n: int) -> np.ndarray:
    """Tridiagonal form whose quadratic, plus boundary terms, equals the sum
    of squared gaps between consecutive update instants of one node."""
    if n < 1:
        raise ValueError("n must be at least 1")
    q = 2.0 * np.eye(n)
    for i in range(n - 1):
        q[i, i + 1] = -1.0
        q[i + 1, i] = -1.0
    return q


def build_time_quadratic(
    order: Sequence[int], num_nodes: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-node (merged-position indices, quadratic form) pairs for a visit
    order. Nodes that never appear contribute an empty index list."""
    order_arr = np.asarray(order, dtype=int)
    out = []
    for m in range(num_nodes):
        pos = np.flatnonzero(order_arr == m + 1)
        if pos.size:
            out.append((pos, node_time_quadratic(pos.size)))
        else:
            out.append((pos, np.zeros((0, 0))))
    return out


# ---------------------------------------------------------------------------
# Canonical scaled program construction
# ---------------------------------------------------------------------------


@dataclass
class _Program:
    """minimize 0.5 z'Pz + q'z + r0  s.t.  a_k sum((z_Jk - c_k)^2) + Gz + g <= 0."""

    P: np.ndarray
    q: np.ndarray
    r0: float
    G: np.ndarray
    g: np.ndarray
    balls: list[tuple[int, np.ndarray, np.ndarray, float]]
    labels: list[str]

    @property
    def num_vars(self) -> int:
        return self.q.size

    @property
    def num_cons(self) -> int:
        return self.g.size

    def constraint_values(self, z: np.ndarray) -> np.ndarray:
        f = self.G @ z + self.g
        for row, idx, center, coef in self.balls:
            d = z[idx] - center
            f[row] += coef * float(d @ d)
        return f

    def constraint_jacobian(self, z: np.ndarray) -> np.ndarray:
        jac = self.G.copy()
        for row, idx, center, coef in self.balls:
            jac[row, idx] += 2.0 * coef * (z[idx] - center)
        return jac

    def objective(self, z: np.ndarray) -> float:
        return 0.5 * float(z @ self.P @ z) + float(self.q @ z) + self.r0

    def objective_grad(self, z: np.ndarray) -> np.ndarray:
        return self.P @ z + self.q

    def hessian_weighted(self, lam: np.ndarray) -> np.ndarray:
        h = self.P.copy()
        for row, idx, center, coef in self.balls:
            h[idx, idx] += 2.0 * coef * lam[row]
        return h


@dataclass
class _IpmResult:
    z: np.ndarray
    lam: np.ndarray
    status: str
    iterations: int
    kkt_residual: float


def _initial_duals(program: _Program, z: np.ndarray) -> np.ndarray:
    f = program.constraint_values(z)
    return 1.0 / np.maximum(-f, 1e-8)


def _solve_ipm(
    program: _Program,
    z0: np.ndarray,
    tol: float,
    max_iters: int,
    stop_below: float | None = None,
) -> _IpmResult:
    """Primal-dual interior-point iteration from a strictly feasible start.

    ``stop_below`` allows phase-I callers to bail out as soon as the
    objective sinks under a threshold.
    """
    z = z0.copy()
    f = program.constraint_values(z)
    if np.any(f >= 0.0):
        raise ValueError("interior-point start must be strictly feasible")
    lam = _initial_duals(program, z)
    m = program.num_cons

    status = STATUS_MAX_ITERATIONS
    iterations = 0
    kkt = math.inf
    for it in range(max_iters):
        iterations = it + 1
        jac = program.constraint_jacobian(z)
        grad0 = program.objective_grad(z)
        r_dual = grad0 + jac.T @ lam
        eta = -float(f @ lam)
        t_bar = _MU * m / max(eta, 1e-300)
        r_cent = -lam * f - 1.0 / t_bar
        res_norm = math.sqrt(float(r_dual @ r_dual) + float(r_cent @ r_cent))

        kkt = max(
            float(np.max(np.abs(r_dual))),
            float(np.max(np.abs(lam * f))),
        )
        if float(np.max(np.abs(r_dual))) <= tol and eta <= tol:
            status = STATUS_OPTIMAL
            break
        if stop_below is not None and program.objective(z) < stop_below:
            status = STATUS_OPTIMAL
            break

        weights = lam / (-f)
        h = program.hessian_weighted(lam)
        m_red = h + (jac.T * weights) @ jac
        rhs = -(r_dual + jac.T @ (r_cent / f))
        dz = None
        ridge = 0.0
        for _ in range(6):
            try:
                dz = np.linalg.solve(m_red + ridge * np.eye(program.num_vars), rhs)
            except np.linalg.LinAlgError:
                dz = None
            if dz is not None and np.all(np.isfinite(dz)):
                break
            ridge = max(ridge * 100.0, 1e-10 * max(1.0, float(np.max(np.abs(m_red)))))
        if dz is None or not np.all(np.isfinite(dz)):
            break
        dlam = (r_cent - lam * (jac @ dz)) / f

        step = 1.0
        neg = dlam < 0.0
        if np.any(neg):
            step = min(1.0, 0.99 * float(np.min(-lam[neg] / dlam[neg])))
        # Stay strictly inside the constraint set.
        for _ in range(80):
            f_new = program.constraint_values(z + step * dz)
            if np.all(f_new < 0.0):
                break
            step *= _LS_BETA
        else:
            break
        # Backtrack on the combined residual.
        accepted = False
        for _ in range(80):
            z_new = z + step * dz
            lam_new = lam + step * dlam
            f_new = program.constraint_values(z_new)
            if np.all(f_new < 0.0) and np.all(lam_new > 0.0):
                jac_new = program.constraint_jacobian(z_new)
                rd_new = program.objective_grad(z_new) + jac_new.T @ lam_new
                rc_new = -lam_new * f_new - 1.0 / t_bar
                new_norm = math.sqrt(float(rd_new @ rd_new) + float(rc_new @ rc_new))
                if new_norm <= (1.0 - _LS_ALPHA * step) * res_norm + 1e-14:
                    accepted = True
                    break
            step *= _LS_BETA
        if not accepted:
            break
        z = z + step * dz
        lam = lam + step * dlam
        f = program.constraint_values(z)

    return _IpmResult(z=z, lam=lam, status=status, iterations=iterations, kkt_residual=kkt)


def _phase1(
    program: _Program, z0: np.ndarray, tol: float, max_iters: int
) -> tuple[np.ndarray | None, float, int]:
    """Find a strictly interior point, or certify there is none.

    Minimizes the worst scaled violation s over (z, s). Returns
    (interior point or None, final s, iterations used).
    """
    n = program.num_vars
    g_aug = np.hstack([program.G, -np.ones((program.num_cons, 1))])
    prog1 = _Program(
        P=np.zeros((n + 1, n + 1)),
        q=np.concatenate([np.zeros(n), [1.0]]),
        r0=0.0,
        G=g_aug,
        g=program.g.copy(),
        balls=program.balls,
        labels=program.labels,
    )
    f0 = program.constraint_values(z0)
    # Keep the worst-violated row's slack comparable to the others; starting
    # with max(f) + 1 leaves it absurdly uncentered and the iteration crawls.
    s0 = 2.0 * float(np.max(f0)) + 1.0
    z_aug = np.concatenate([z0, [s0]])
    result = _solve_ipm(prog1, z_aug, tol, max_iters, stop_below=-_STRICT_MARGIN)
    s_final = float(result.z[-1])
    z_final = result.z[:-1]
    if s_final < -_STRICT_MARGIN and np.all(program.constraint_values(z_final) < 0.0):
        return z_final, s_final, result.iterations
    return None, s_final, result.iterations


# ---------------------------------------------------------------------------
# Fixed-order trajectory program
# ---------------------------------------------------------------------------


@dataclass
class TrajectorySolution:
    """Result of optimizing update instants and hover points for one order."""

    status: str
    order: tuple[int, ...]
    times_s: np.ndarray
    waypoints_xy: np.ndarray
    objective: float
    solver_objective: float
    kkt_residual: float
    iterations: int
    duals: np.ndarray
    constraint_labels: list[str]
    coincident_pairs: list[tuple[int, int]]
    used_phase1: bool
    message: str = ""

    def update_times(self, num_nodes: int) -> UpdateTimes:
        return UpdateTimes(split_by_node(list(self.order), self.times_s, num_nodes))

    def to_document(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "order": [int(v) for v in self.order],
            "times_s": [float(v) for v in self.times_s],
            "waypoints_xy": [[float(a), float(b)] for a, b in self.waypoints_xy],
            "objective": None if math.isinf(self.objective) else float(self.objective),
            "solver_objective": None
            if math.isinf(self.solver_objective)
            else float(self.solver_objective),
            "kkt_residual": float(self.kkt_residual),
            "iterations": int(self.iterations),
            "coincident_pairs": [[int(a), int(b)] for a, b in self.coincident_pairs],
            "used_phase1": bool(self.used_phase1),
            "message": self.message,
        }

    def write_trajectory_csv(self, path: str | Path, scenario: Scenario) -> None:
        """Waypoint table including both mission endpoints."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time_s", "x_m", "y_m", "node"])
            writer.writerow(
                ["0", f"{scenario.uav.initial[0]:.10g}", f"{scenario.uav.initial[1]:.10g}", ""]
            )
            for i in range(self.times_s.size):
                writer.writerow(
                    [
                        f"{self.times_s[i]:.10g}",
                        f"{self.waypoints_xy[i, 0]:.10g}",
                        f"{self.waypoints_xy[i, 1]:.10g}",
                        int(self.order[i]),
                    ]
                )
            writer.writerow(
                [
                    f"{scenario.uav.horizon_s:.10g}",
                    f"{scenario.uav.final[0]:.10g}",
                    f"{scenario.uav.final[1]:.10g}",
                    "",
                ]
            )


def _infeasible_solution(order: tuple[int, ...], message: str) -> TrajectorySolution:
    return TrajectorySolution(
        status=STATUS_INFEASIBLE,
        order=order,
        times_s=np.zeros(0),
        waypoints_xy=np.zeros((0, 2)),
        objective=math.inf,
        solver_objective=math.inf,
        kkt_residual=math.inf,
        iterations=0,
        duals=np.zeros(0),
        constraint_labels=[],
        coincident_pairs=[],
        used_phase1=False,
        message=message,
    )


def _schedule_program(
    scenario: Scenario, order: tuple[int, ...]
) -> tuple[_Program, dict[str, Any]] | str:
    """Build the scaled fixed-order program. Returns an error message string
    when some node cannot afford its update count."""
    n = len(order)
    m_nodes = scenario.num_nodes
    weights = scenario.weights()
    horizon = scenario.uav.horizon_s
    r_scale = scenario.coordinate_scale()
    xy = scenario.node_xy() / r_scale
    start = np.asarray(scenario.uav.initial) / r_scale
    end = np.asarray(scenario.uav.final) / r_scale
    vx = scenario.uav.vmax_x * horizon / r_scale
    vy = scenario.uav.vmax_y * horizon / r_scale

    counts = np.bincount(np.asarray(order, dtype=int), minlength=m_nodes + 1)[1:]
    budgets = {}
    for m in range(m_nodes):
        if counts[m] == 0:
            continue
        c = energy_budget_constant(scenario, m, int(counts[m]))
        if c < 0.0:
            return (
                f"node {m + 1} cannot afford {int(counts[m])} updates; "
                f"energy budget constant is {c:.6g}"
            )
        budgets[m] = c / (r_scale * r_scale)

    nv = 3 * n
    t_idx = np.arange(n)
    x_idx = n + np.arange(n)
    y_idx = 2 * n + np.arange(n)

    p_mat = np.zeros((nv, nv))
    q_vec = np.zeros(nv)
    forms = build_time_quadratic(order, m_nodes)
    for m in range(m_nodes):
        pos, q_form = forms[m]
        if pos.size == 0:
            continue
        p_mat[np.ix_(t_idx[pos], t_idx[pos])] += 2.0 * weights[m] * q_form
        q_vec[t_idx[pos[-1]]] += -2.0 * weights[m]
    r0 = 1.0

    rows_g: list[np.ndarray] = []
    offs: list[float] = []
    balls: list[tuple[int, np.ndarray, np.ndarray, float]] = []
    labels: list[str] = []

    def add_row(label: str) -> int:
        rows_g.append(np.zeros(nv))
        offs.append(0.0)
        labels.append(label)
        return len(rows_g) - 1

    order_arr = np.asarray(order, dtype=int)
    for m in sorted(budgets):
        c_scaled = budgets[m]
        pos = np.flatnonzero(order_arr == m + 1)
        idx = np.concatenate([x_idx[pos], y_idx[pos]])
        center = np.concatenate([np.full(pos.size, xy[m, 0]), np.full(pos.size, xy[m, 1])])
        row = add_row(f"energy_node_{m + 1}")
        scale = max(c_scaled, 1e-12)
        offs[row] = -c_scaled / scale
        balls.append((row, idx, center, 1.0 / scale))

    def speed_rows(axis: str, w_idx: np.ndarray, w0: float, w1: float, vmax: float) -> None:
        scale = max(vmax, 1.0)
        for sign, tag in ((1.0, "pos"), (-1.0, "neg")):
            for leg in range(n + 1):
                row = add_row(f"speed_{axis}_{tag}_leg_{leg}")
                vec = rows_g[row]
                off = 0.0
                if leg == 0:
                    vec[w_idx[0]] = sign / scale
                    off += -sign * w0 / scale
                    vec[t_idx[0]] += -vmax / scale
                elif leg == n:
                    vec[w_idx[n - 1]] = -sign / scale
                    off += sign * w1 / scale
                    vec[t_idx[n - 1]] += vmax / scale
                    off += -vmax / scale
                else:
                    vec[w_idx[leg]] = sign / scale
                    vec[w_idx[leg - 1]] = -sign / scale
                    vec[t_idx[leg]] += -vmax / scale
                    vec[t_idx[leg - 1]] += vmax / scale
                offs[row] = off

    speed_rows("x", x_idx, start[0], end[0], vx)
    speed_rows("y", y_idx, start[1], end[1], vy)

    for i in range(n - 1):
        row = add_row(f"order_{i + 1}")
        rows_g[row][t_idx[i]] = 1.0
        rows_g[row][t_idx[i + 1]] = -1.0
    for i in range(n):
        row = add_row(f"time_lo_{i + 1}")
        rows_g[row][t_idx[i]] = -1.0
    for i in range(n):
        row = add_row(f"time_hi_{i + 1}")
        rows_g[row][t_idx[i]] = 1.0
        offs[row] = -1.0

    program = _Program(
        P=p_mat,
        q=q_vec,
        r0=r0,
        G=np.vstack(rows_g),
        g=np.array(offs),
        balls=balls,
        labels=labels,
    )
    meta = {
        "r_scale": r_scale,
        "horizon": horizon,
        "start": start,
        "end": end,
        "t_idx": t_idx,
        "x_idx": x_idx,
        "y_idx": y_idx,
    }
    return program, meta


def _schedule_start(scenario: Scenario, order: tuple[int, ...], meta: dict) -> np.ndarray:
    n = len(order)
    frac = (np.arange(n) + 1.0) / (n + 1.0)
    start = meta["start"]
    end = meta["end"]
    z = np.zeros(3 * n)
    z[meta["t_idx"]] = frac
    z[meta["x_idx"]] = start[0] + (end[0] - start[0]) * frac
    z[meta["y_idx"]] = start[1] + (end[1] - start[1]) * frac
    return z


def solve_schedule(
    scenario: Scenario,
    order: Sequence[int],
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> TrajectorySolution:
    """Optimize update instants and hover points for a fixed visit order.

    Returns the age metric, the trajectory, scaled duals, and the final
    KKT residual. An empty order is the do-nothing mission with metric
    exactly 1. Orders whose per-node counts exceed the energy budget, or
    whose constraint set has no interior, come back with status
    'infeasible'.
    """
    order_t = validate_order(order, scenario.num_nodes)
    scenario.validate()
    if len(order_t) == 0:
        return TrajectorySolution(
            status=STATUS_OPTIMAL,
            order=order_t,
            times_s=np.zeros(0),
            waypoints_xy=np.zeros((0, 2)),
            objective=1.0,
            solver_objective=1.0,
            kkt_residual=0.0,
            iterations=0,
            duals=np.zeros(0),
            constraint_labels=[],
            coincident_pairs=[],
            used_phase1=False,
        )

    built = _schedule_program(scenario, order_t)
    if isinstance(built, str):
        return _infeasible_solution(order_t, built)
    program, meta = built

    z0 = _schedule_start(scenario, order_t, meta)
    used_phase1 = False
    phase1_iters = 0
    f0 = program.constraint_values(z0)
    if np.max(f0) >= -_STRICT_MARGIN:
        used_phase1 = True
        z_feas, s_final, phase1_iters = _phase1(program, z0, tol, max_iters)
        if z_feas is None:
            return _infeasible_solution(
                order_t,
                f"no strictly interior trajectory exists (best scaled violation {s_final:.3g})",
            )
        z0 = z_feas

    result = _solve_ipm(program, z0, tol, max_iters)

    n = len(order_t)
    horizon = meta["horizon"]
    r_scale = meta["r_scale"]
    times = result.z[meta["t_idx"]] * horizon
    waypoints = np.column_stack(
        [result.z[meta["x_idx"]] * r_scale, result.z[meta["y_idx"]] * r_scale]
    )
    per_node = split_by_node(list(order_t), times, scenario.num_nodes)
    objective = nwaoi(scenario, UpdateTimes(per_node))
    # A duality gap of tol blurs each instant by about sqrt(tol)*horizon,
    # so gaps below that are numerically a single instant.
    coincident = [
        (i + 1, i + 2)
        for i in range(n - 1)
        if times[i + 1] - times[i] <= math.sqrt(tol) * horizon
    ]
    return TrajectorySolution(
        status=result.status,
        order=order_t,
        times_s=times,
        waypoints_xy=waypoints,
        objective=objective,
        solver_objective=program.objective(result.z),
        kkt_residual=result.kkt_residual,
        iterations=result.iterations + phase1_iters,
        duals=result.lam,
        constraint_labels=list(program.labels),
        coincident_pairs=coincident,
        used_phase1=used_phase1,
    )


# ---------------------------------------------------------------------------
# Minimum cruise speed over the fixed full-budget schedule
# ---------------------------------------------------------------------------


@dataclass
class MinSpeedSolution:
    """Smallest symmetric per-axis speed limit that flies the full-budget
    evenly spaced schedule."""

    status: str
    speed: float
    times_s: np.ndarray
    order: tuple[int, ...]
    waypoints_xy: np.ndarray
    kkt_residual: float
    iterations: int

    def to_document(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "speed": float(self.speed),
            "times_s": [float(v) for v in self.times_s],
            "order": [int(v) for v in self.order],
            "waypoints_xy": [[float(a), float(b)] for a, b in self.waypoints_xy],
            "kkt_residual": float(self.kkt_residual),
            "iterations": int(self.iterations),
        }


def solve_min_speed(
    scenario: Scenario,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> MinSpeedSolution:
    """Minimize the speed limit needed to fly the evenly spaced full-budget
    schedule, choosing hover points freely within each node's energy ball.

    Raises CoincidentTimesError when two merged updates share an instant;
    no finite speed orders the visits in that case.
    """
    scenario.validate()
    times, order = uniform_schedule(scenario)
    n = times.size
    if n == 0:
        return MinSpeedSolution(
            status=STATUS_OPTIMAL,
            speed=0.0,
            times_s=times,
            order=tuple(),
            waypoints_xy=np.zeros((0, 2)),
            kkt_residual=0.0,
            iterations=0,
        )
    for i in range(n - 1):
        if times[i + 1] - times[i] <= 0.0:
            raise CoincidentTimesError(i + 1, i + 2, float(times[i]))

    horizon = scenario.uav.horizon_s
    r_scale = scenario.coordinate_scale()
    xy = scenario.node_xy() / r_scale
    start = np.asarray(scenario.uav.initial) / r_scale
    end = np.asarray(scenario.uav.final) / r_scale
    t_scaled = times / horizon
    counts = all_max_updates(scenario)

    # Nodes whose budget lands exactly on the boundary must hover overhead;
    # pin those waypoints instead of giving the ball an empty interior.
    budgets = {}
    pinned: dict[int, np.ndarray] = {}
    for m in range(scenario.num_nodes):
        if counts[m] == 0:
            continue
        c = energy_budget_constant(scenario, m, int(counts[m])) / (r_scale * r_scale)
        if c <= 1e-16:
            pinned[m] = xy[m]
        else:
            budgets[m] = c

    free_pos = [i for i in range(n) if (order[i] - 1) not in pinned]
    pos_of: dict[int, int] = {p: j for j, p in enumerate(free_pos)}
    nf = len(free_pos)
    nv = 2 * nf + 1
    v_idx = nv - 1

    def x_of(i: int) -> int:
        return 2 * pos_of[i]

    def y_of(i: int) -> int:
        return 2 * pos_of[i] + 1

    fixed_xy = np.zeros((n, 2))
    for i in range(n):
        m = order[i] - 1
        fixed_xy[i] = xy[m]

    rows_g: list[np.ndarray] = []
    offs: list[float] = []
    balls: list[tuple[int, np.ndarray, np.ndarray, float]] = []
    labels: list[str] = []

    def add_row(label: str) -> int:
        rows_g.append(np.zeros(nv))
        offs.append(0.0)
        labels.append(label)
        return len(rows_g) - 1

    for m in sorted(budgets):
        c_scaled = budgets[m]
        pos = [i for i in range(n) if order[i] == m + 1]
        idx = np.array([x_of(i) for i in pos] + [y_of(i) for i in pos], dtype=int)
        center = np.concatenate(
            [np.full(len(pos), xy[m, 0]), np.full(len(pos), xy[m, 1])]
        )
        row = add_row(f"energy_node_{m + 1}")
        offs[row] = -1.0
        balls.append((row, idx, center, 1.0 / c_scaled))

    leg_t = np.concatenate(([0.0], t_scaled, [1.0]))
    for axis, col in (("x", 0), ("y", 1)):
        for sign in (1.0, -1.0):
            tag = "pos" if sign > 0 else "neg"
            for leg in range(n + 1):
                dt = leg_t[leg + 1] - leg_t[leg]
                row = add_row(f"speed_{axis}_{tag}_leg_{leg}")
                vec = rows_g[row]
                off = 0.0
                # leading point of the leg
                if leg == 0:
                    off += -sign * (start[col])
                elif (order[leg - 1] - 1) in pinned:
                    off += -sign * fixed_xy[leg - 1, col]
                else:
                    vec[x_of(leg - 1) + col] += -sign
                # trailing point
                if leg == n:
                    off += sign * (end[col])
                elif (order[leg] - 1) in pinned:
                    off += sign * fixed_xy[leg, col]
                else:
                    vec[x_of(leg) + col] += sign
                vec[v_idx] += -dt
                offs[row] = off

    row = add_row("speed_nonneg")
    rows_g[row][v_idx] = -1.0

    program = _Program(
        P=np.zeros((nv, nv)),
        q=np.concatenate([np.zeros(nv - 1), [1.0]]),
        r0=0.0,
        G=np.vstack(rows_g),
        g=np.array(offs),
        balls=balls,
        labels=labels,
    )

    z0 = np.zeros(nv)
    for i in free_pos:
        z0[x_of(i)] = fixed_xy[i, 0]
        z0[y_of(i)] = fixed_xy[i, 1]
    pts = np.vstack([start[None, :], fixed_xy, end[None, :]])
    v_need = 0.0
    for leg in range(n + 1):
        dt = leg_t[leg + 1] - leg_t[leg]
        v_need = max(v_need, float(np.max(np.abs(pts[leg + 1] - pts[leg]))) / dt)
    z0[v_idx] = v_need * 1.5 + 0.1

    result = _solve_ipm(program, z0, tol, max_iters)

    waypoints = np.zeros((n, 2))
    for i in range(n):
        if (order[i] - 1) in pinned:
            waypoints[i] = fixed_xy[i] * r_scale
        else:
            waypoints[i] = [result.z[x_of(i)] * r_scale, result.z[y_of(i)] * r_scale]
    speed = float(result.z[v_idx]) * r_scale / horizon
    return MinSpeedSolution(
        status=result.status,
        speed=speed,
        times_s=times,
        order=tuple(int(v) for v in order),
        waypoints_xy=waypoints,
        kkt_residual=result.kkt_residual,
        iterations=result.iterations,
    )


# ---------------------------------------------------------------------------
# Independent solution checker
# ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    """Outcome of re-verifying a returned trajectory from first principles."""

    ok: bool
    feasibility: float
    stationarity: float
    complementarity: float
    objective_gap: float
    energy_rel_violation: float
    speed_abs_violation: float
    messages: list[str] = field(default_factory=list)

    def to_document(self) -> dict[str, Any]:
        return {
            "ok": bool(self.ok),
            "feasibility": float(self.feasibility),
            "stationarity": float(self.stationarity),
            "complementarity": float(self.complementarity),
            "objective_gap": float(self.objective_gap),
            "energy_rel_violation": float(self.energy_rel_violation),
            "speed_abs_violation": float(self.speed_abs_violation),
            "messages": list(self.messages),
        }


def _check_constraint_values(
    scenario: Scenario, order: tuple[int, ...], z: np.ndarray
) -> tuple[np.ndarray, float]:
    """Fresh evaluation of the scaled constraint vector and objective.

    Deliberately rebuilt from the scenario here rather than reusing the
    solver's matrices, so checker and solver can disagree.
    """
    n = len(order)
    horizon = scenario.uav.horizon_s
    r_scale = scenario.coordinate_scale()
    t = z[:n]
    x = z[n : 2 * n]
    y = z[2 * n : 3 * n]
    start = np.asarray(scenario.uav.initial) / r_scale
    end = np.asarray(scenario.uav.final) / r_scale
    xy = scenario.node_xy() / r_scale
    vx = scenario.uav.vmax_x * horizon / r_scale
    vy = scenario.uav.vmax_y * horizon / r_scale

    values: list[float] = []
    order_arr = np.asarray(order, dtype=int)
    scheduled = sorted(set(order_arr.tolist()))
    for node_id in scheduled:
        m = node_id - 1
        count = int(np.sum(order_arr == node_id))
        c = energy_budget_constant(scenario, m, count) / (r_scale * r_scale)
        pos = np.flatnonzero(order_arr == node_id)
        lhs = float(np.sum((x[pos] - xy[m, 0]) ** 2 + (y[pos] - xy[m, 1]) ** 2))
        scale = max(c, 1e-12)
        values.append((lhs - c) / scale)

    t_fence = np.concatenate(([0.0], t, [1.0]))
    for coords, w0, w1, vmax in ((x, start[0], end[0], vx), (y, start[1], end[1], vy)):
        fence = np.concatenate(([w0], coords, [w1]))
        scale = max(vmax, 1.0)
        for sign in (1.0, -1.0):
            for leg in range(n + 1):
                dw = fence[leg + 1] - fence[leg]
                dt = t_fence[leg + 1] - t_fence[leg]
                values.append((sign * dw - vmax * dt) / scale)
    for i in range(n - 1):
        values.append(t[i] - t[i + 1])
    for i in range(n):
        values.append(-t[i])
    for i in range(n):
        values.append(t[i] - 1.0)

    weights = scenario.weights()
    obj = 0.0
    for m in range(scenario.num_nodes):
        pos = np.flatnonzero(order_arr == m + 1)
        fenced = np.concatenate(([0.0], t[pos], [1.0]))
        gaps = np.diff(fenced)
        obj += weights[m] * float(np.sum(gaps * gaps))

    return np.array(values), obj


def check_solution(
    scenario: Scenario,
    solution: TrajectorySolution,
    tol: float = DEFAULT_TOL,
) -> CheckReport:
    """Re-verify feasibility, stationarity, and complementarity of a returned
    trajectory without trusting the solver's internal state.

    Constraint values come from formulas rewritten here; gradients come from
    central differences of those values (exact for quadratics up to
    roundoff). Raw-unit energy and speed margins are reported as well.
    """
    msgs: list[str] = []
    order = solution.order
    n = len(order)
    horizon = scenario.uav.horizon_s
    r_scale = scenario.coordinate_scale()

    if solution.status == STATUS_INFEASIBLE:
        return CheckReport(
            ok=False,
            feasibility=math.inf,
            stationarity=math.inf,
            complementarity=math.inf,
            objective_gap=math.inf,
            energy_rel_violation=math.inf,
            speed_abs_violation=math.inf,
            messages=["solution is infeasible; nothing to verify"],
        )
    if n == 0:
        gap = abs(solution.objective - 1.0)
        return CheckReport(
            ok=gap <= 1e-12,
            feasibility=0.0,
            stationarity=0.0,
            complementarity=0.0,
            objective_gap=gap,
            energy_rel_violation=0.0,
            speed_abs_violation=0.0,
        )

    z = np.concatenate(
        [
            solution.times_s / horizon,
            solution.waypoints_xy[:, 0] / r_scale,
            solution.waypoints_xy[:, 1] / r_scale,
        ]
    )
    values, obj_scaled = _check_constraint_values(scenario, order, z)
    feasibility = float(np.max(values))
    if feasibility > tol:
        msgs.append(f"scaled constraint violation {feasibility:.3g}")

    lam = solution.duals
    if lam.size != values.size:
        return CheckReport(
            ok=False,
            feasibility=feasibility,
            stationarity=math.inf,
            complementarity=math.inf,
            objective_gap=math.inf,
            energy_rel_violation=math.inf,
            speed_abs_violation=math.inf,
            messages=["dual vector length mismatch"],
        )

    # Central-difference gradient of the Lagrangian; exact for quadratics.
    step = 1e-5
    lagr_grad = np.zeros(z.size)
    for j in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[j] += step
        zm[j] -= step
        vp, op = _check_constraint_values(scenario, order, zp)
        vm, om = _check_constraint_values(scenario, order, zm)
        lagr_grad[j] = (op - om) / (2 * step) + float(lam @ (vp - vm)) / (2 * step)
    stationarity = float(np.max(np.abs(lagr_grad)))
    if stationarity > tol:
        msgs.append(f"stationarity residual {stationarity:.3g}")

    complementarity = float(np.max(np.abs(lam * values)))
    if complementarity > tol:
        msgs.append(f"complementarity residual {complementarity:.3g}")

    recomputed = nwaoi(scenario, solution.update_times(scenario.num_nodes))
    objective_gap = abs(obj_scaled + 0.0 - recomputed)
    # obj_scaled already includes the never-updating contribution of each
    # node because the fence spans the whole scaled horizon.
    gap_vs_reported = abs(recomputed - solution.objective)
    if gap_vs_reported > 1e-9 * max(1.0, abs(recomputed)):
        msgs.append(f"objective mismatch {gap_vs_reported:.3g}")
    solver_gap = abs(solution.solver_objective - recomputed)
    if solver_gap > 1e-9 * max(1.0, abs(recomputed)):
        msgs.append(f"solver objective mismatch {solver_gap:.3g}")

    # Raw-unit margins.
    energy_rel = 0.0
    order_arr = np.asarray(order, dtype=int)
    ch = scenario.channel
    snr_gap = 2.0 ** (ch.packet_bits / ch.bandwidth_hz) - 1.0
    for node_id in sorted(set(order_arr.tolist())):
        m = node_id - 1
        pos = np.flatnonzero(order_arr == node_id)
        spent = 0.0
        for i in pos:
            dx = solution.waypoints_xy[i, 0] - scenario.nodes[m].x
            dy = solution.waypoints_xy[i, 1] - scenario.nodes[m].y
            d2 = scenario.uav.altitude_m**2 + dx * dx + dy * dy
            spent += ch.noise_power_w * snr_gap * d2 / ch.beta0
        energy_rel = max(
            energy_rel, (spent - scenario.nodes[m].battery_j) / scenario.nodes[m].battery_j
        )
    if energy_rel > 1e-9:
        msgs.append(f"energy overdraw {energy_rel:.3g} relative")

    speed_abs = 0.0
    fence_t = np.concatenate(([0.0], solution.times_s, [horizon]))
    fence_x = np.concatenate(
        ([scenario.uav.initial[0]], solution.waypoints_xy[:, 0], [scenario.uav.final[0]])
    )
    fence_y = np.concatenate(
        ([scenario.uav.initial[1]], solution.waypoints_xy[:, 1], [scenario.uav.final[1]])
    )
    for leg in range(n + 1):
        dt = fence_t[leg + 1] - fence_t[leg]
        speed_abs = max(
            speed_abs,
            abs(fence_x[leg + 1] - fence_x[leg]) - scenario.uav.vmax_x * dt,
            abs(fence_y[leg + 1] - fence_y[leg]) - scenario.uav.vmax_y * dt,
        )
    if speed_abs > 1e-6:
        msgs.append(f"speed excess {speed_abs:.3g} m")

    ok = (
        feasibility <= tol
        and stationarity <= tol
        and complementarity <= tol
        and gap_vs_reported <= 1e-9 * max(1.0, abs(recomputed))
        and energy_rel <= 1e-9
        and speed_abs <= 1e-6
    )
    return CheckReport(
        ok=ok,
        feasibility=feasibility,
        stationarity=stationarity,
        complementarity=complementarity,
        objective_gap=objective_gap,
        energy_rel_violation=energy_rel,
        speed_abs_violation=speed_abs,
        messages=msgs,
    )
