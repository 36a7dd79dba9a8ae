"""Exhaustive search over visit orders.

The number of distinct visit orders for a given per-node update allocation
is the multinomial coefficient, and the grid of allocations is bounded by
each node's energy budget, so small instances can be enumerated exactly.
Every candidate order is scored with a full trajectory solve. A budget
guard refuses enumerations that would need more solves than allowed.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Sequence

from .bounds import all_max_updates
from .errors import BudgetExceededError
from .scenario import Scenario
from .solver import (
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    STATUS_INFEASIBLE,
    TrajectorySolution,
    solve_schedule,
)

DEFAULT_BUDGET = 100_000


def schedule_count(counts: Sequence[int]) -> int:
    """Number of distinct visit orders with counts[m] updates for node m.

    Exact arbitrary-precision arithmetic; the result easily exceeds 64-bit
    range for realistic budgets.
    """
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("counts must be nonnegative")
    total = sum(counts)
    result = math.factorial(total)
    for c in counts:
        result //= math.factorial(c)
    return result


def count_grid(
    max_counts: Sequence[int],
    include_zero: bool = True,
    max_total: int | None = None,
) -> Iterator[tuple[int, ...]]:
    """All per-node count vectors within the budget, ascending lexicographic."""
    ranges = [range(int(c) + 1) for c in max_counts]
    for combo in itertools.product(*ranges):
        total = sum(combo)
        if total == 0 and not include_zero:
            continue
        if max_total is not None and total > max_total:
            continue
        yield combo


def total_candidates(
    max_counts: Sequence[int],
    include_zero: bool = True,
    max_total: int | None = None,
) -> int:
    """Exact number of candidate orders the enumeration would score."""
    return sum(
        schedule_count(combo)
        for combo in count_grid(max_counts, include_zero, max_total)
    )


def multiset_permutations(counts: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Distinct orders of the multiset {m+1 repeated counts[m] times},
    in ascending lexicographic order."""
    symbols = [m + 1 for m, c in enumerate(counts) for _ in range(int(c))]
    if not symbols:
        yield tuple()
        return
    remaining = {m + 1: int(c) for m, c in enumerate(counts) if c > 0}
    total = len(symbols)
    prefix: list[int] = []

    def rec() -> Iterator[tuple[int, ...]]:
        if len(prefix) == total:
            yield tuple(prefix)
            return
        for sym in sorted(remaining):
            if remaining[sym] == 0:
                continue
            remaining[sym] -= 1
            prefix.append(sym)
            yield from rec()
            prefix.pop()
            remaining[sym] += 1

    yield from rec()


@dataclass
class EnumerationResult:
    """Best order found by exhaustive search, with the full scoring table."""

    best_order: tuple[int, ...]
    best_solution: TrajectorySolution
    objective: float
    num_candidates: int
    num_solves: int
    per_count: dict[tuple[int, ...], tuple[tuple[int, ...], float, str]]
    rows: list[tuple[str, float, str, float]] = field(default_factory=list)

    def to_document(self) -> dict[str, Any]:
        return {
            "best_order": [int(v) for v in self.best_order],
            "objective": float(self.objective),
            "num_candidates": int(self.num_candidates),
            "num_solves": int(self.num_solves),
            "best_solution": self.best_solution.to_document(),
        }

    def write_table_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["order", "objective", "status", "kkt_residual"])
            for order_str, objective, status, kkt in self.rows:
                writer.writerow(
                    [
                        order_str,
                        "" if math.isinf(objective) else f"{objective:.12g}",
                        status,
                        "" if math.isinf(kkt) else f"{kkt:.3g}",
                    ]
                )


def _order_str(order: tuple[int, ...]) -> str:
    return "-".join(str(v) for v in order)


def enumerate_optimal(
    scenario: Scenario,
    budget: int = DEFAULT_BUDGET,
    include_zero: bool = True,
    max_total: int | None = None,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    keep_rows: bool = True,
) -> EnumerationResult:
    """Score every admissible visit order and return the best trajectory.

    Ties on the objective break toward the lexicographically smallest
    order. Raises BudgetExceededError up front when the candidate count
    exceeds ``budget``; nothing is solved in that case.
    """
    scenario.validate()
    max_counts = all_max_updates(scenario)
    required = total_candidates(max_counts, include_zero, max_total)
    if required > budget:
        raise BudgetExceededError(required, budget)

    best_key: tuple[float, tuple[int, ...]] | None = None
    best_solution: TrajectorySolution | None = None
    per_count: dict[tuple[int, ...], tuple[tuple[int, ...], float, str]] = {}
    rows: list[tuple[str, float, str, float]] = []
    num_solves = 0
    num_candidates = 0

    for combo in count_grid(max_counts, include_zero, max_total):
        count_best: tuple[float, tuple[int, ...]] | None = None
        count_best_status = STATUS_INFEASIBLE
        for order in multiset_permutations(combo):
            num_candidates += 1
            solution = solve_schedule(scenario, order, tol=tol, max_iters=max_iters)
            if len(order) > 0:
                num_solves += 1
            if keep_rows:
                rows.append(
                    (
                        _order_str(order),
                        solution.objective,
                        solution.status,
                        solution.kkt_residual,
                    )
                )
            key = (solution.objective, order)
            if solution.status != STATUS_INFEASIBLE:
                if best_key is None or key < best_key:
                    best_key = key
                    best_solution = solution
                if count_best is None or key < count_best:
                    count_best = key
                    count_best_status = solution.status
        if count_best is not None:
            per_count[combo] = (count_best[1], count_best[0], count_best_status)

    if best_solution is None or best_key is None:
        raise RuntimeError("no feasible candidate; even the empty order failed")
    return EnumerationResult(
        best_order=best_key[1],
        best_solution=best_solution,
        objective=best_key[0],
        num_candidates=num_candidates,
        num_solves=num_solves,
        per_count=per_count,
        rows=rows,
    )


def per_count_best(
    scenario: Scenario,
    budget: int = DEFAULT_BUDGET,
    max_total: int | None = None,
    tol: float = DEFAULT_TOL,
) -> dict[tuple[int, ...], tuple[tuple[int, ...], float, str]]:
    """Best order and objective for each per-node update allocation."""
    result = enumerate_optimal(
        scenario,
        budget=budget,
        include_zero=True,
        max_total=max_total,
        tol=tol,
        keep_rows=False,
    )
    return result.per_count
