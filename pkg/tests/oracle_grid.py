"""Brute-force oracle for one node on a line.

Times live on a uniform grid and hover points on a coordinate lattice, so
the search space is finite and the minimum is found by exhaustion. The
objective depends only on the update instants; hover points enter through
speed reachability and the shared energy ball sum((x_i - node)^2) <= c.
A coarse pass locates the neighborhood, a fine pass polishes it.
"""

import itertools

import numpy as np

LATTICE = 5.0
INF = np.inf


def _interval_cost(node_x, lo, hi, step):
    """Smallest (x - node_x)^2 over lattice points of [lo, hi]."""
    lo_lat = step * np.ceil(lo / step - 1e-9)
    hi_lat = step * np.floor(hi / step + 1e-9)
    nearest = step * np.round(node_x / step)
    best = np.clip(nearest, lo_lat, hi_lat)
    cost = (best - node_x) ** 2
    return np.where(lo_lat > hi_lat + 1e-9, INF, cost)


def _chain_cost(node_x, span, v, tau, times, step):
    """Minimum energy-ball usage over lattice hover chains, per time tuple.

    times has shape (num_tuples, n). Chains start at x=0, end at x=span,
    and every hop obeys the per-axis speed limit.
    """
    n = times.shape[1]
    lo_span, hi_span = 0.0, span
    lattice = np.arange(lo_span, hi_span + step / 2, step)
    if n == 1:
        t1 = times[:, 0]
        lo = np.maximum(lo_span, span - v * (tau - t1))
        hi = np.minimum(np.minimum(hi_span, v * t1), span + v * (tau - t1))
        return _interval_cost(node_x, lo, hi, step)
    best = np.full(times.shape[0], INF)
    if n == 2:
        t1, t2 = times[:, 0], times[:, 1]
        d12 = v * (t2 - t1)
        d2f = v * (tau - t2)
        for x1 in lattice:
            feasible = x1 <= v * t1 + 1e-9
            lo = np.maximum(np.maximum(lo_span, x1 - d12), span - d2f)
            hi = np.minimum(np.minimum(hi_span, x1 + d12), span + d2f)
            total = (x1 - node_x) ** 2 + _interval_cost(node_x, lo, hi, step)
            best = np.minimum(best, np.where(feasible, total, INF))
        return best
    if n == 3:
        t1, t2, t3 = times[:, 0], times[:, 1], times[:, 2]
        d12 = v * (t2 - t1)
        d23 = v * (t3 - t2)
        d3f = v * (tau - t3)
        for x2 in lattice:
            lo1 = np.maximum(lo_span, x2 - d12)
            hi1 = np.minimum(np.minimum(hi_span, v * t1), x2 + d12)
            lo3 = np.maximum(np.maximum(lo_span, x2 - d23), span - d3f)
            hi3 = np.minimum(np.minimum(hi_span, x2 + d23), span + d3f)
            total = (
                _interval_cost(node_x, lo1, hi1, step)
                + (x2 - node_x) ** 2
                + _interval_cost(node_x, lo3, hi3, step)
            )
            best = np.minimum(best, total)
        return best
    raise ValueError("oracle supports 1 to 3 updates")


def _objective(times, tau):
    fenced = np.concatenate(
        [np.zeros((times.shape[0], 1)), times, np.full((times.shape[0], 1), tau)],
        axis=1,
    )
    gaps = np.diff(fenced, axis=1)
    return np.sum(gaps * gaps, axis=1) / tau**2


def _tuples(values, n):
    combos = np.array(list(itertools.combinations(values, n)), dtype=float)
    return combos.reshape(-1, n)


def oracle_objective(
    node_x,
    span,
    v,
    tau,
    n,
    ball,
    coarse=10.0,
    fine=0.5,
    step=LATTICE,
):
    """Best discretized metric for n updates of one node at (node_x, 0) with
    mission endpoints (0, 0) and (span, 0)."""
    coarse_values = np.arange(coarse, tau, coarse)
    times = _tuples(coarse_values, n)
    usage = _chain_cost(node_x, span, v, tau, times, step)
    feasible = usage <= ball + 1e-9
    if not np.any(feasible):
        raise AssertionError("oracle found no feasible coarse schedule")
    objective = np.where(feasible, _objective(times, tau), INF)
    seed = times[int(np.argmin(objective))]

    windows = [
        np.arange(max(fine, t - coarse), min(tau - fine, t + coarse) + fine / 2, fine)
        for t in seed
    ]
    grids = np.meshgrid(*windows, indexing="ij")
    times = np.stack([g.ravel() for g in grids], axis=1)
    ordered = np.all(np.diff(times, axis=1) > 0.0, axis=1) if n > 1 else np.ones(
        times.shape[0], dtype=bool
    )
    times = times[ordered]
    usage = _chain_cost(node_x, span, v, tau, times, step)
    feasible = usage <= ball + 1e-9
    objective = np.where(feasible, _objective(times, tau), INF)
    best = float(np.min(objective))
    if not np.isfinite(best):
        raise AssertionError("oracle refinement lost feasibility")
    return best
