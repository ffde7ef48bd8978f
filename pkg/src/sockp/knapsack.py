"""Exact solver for the ordinary 0/1 knapsack with integer profits.

Weights and capacity are integers (callers integer-scale fractional data with
:func:`scale_to_integers`).  The solver runs a dynamic program over achievable
profit values, bounded by the Dantzig relaxation, and falls back to depth-first
branch and bound when the profit range exceeds the state ceiling.  Among
equal-value optima it returns the lexicographically smallest selection vector,
so results are reproducible across runs and platforms.

All operations are pure functions of their inputs; problems may be solved
concurrently from multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "KnapsackSolution",
    "KnapsackSubproblem",
    "dantzig_bound",
    "scale_to_integers",
    "solve_knapsack",
    "solve_knapsack_value",
]

# DP is used while the Dantzig profit bound stays below this many states.
DEFAULT_STATE_CAP = 10_000_000
# Cell budget for the suffix tables used by solution reconstruction; beyond
# it the tables are checkpointed and rebuilt block by block.
DEFAULT_LEX_CELLS = 60_000_000

_INF = 1 << 62


@dataclass(frozen=True)
class KnapsackSubproblem:
    """One ordinary 0/1 knapsack: integer profits/weights and capacity.

    ``origin_label`` optionally records which pivot of the decomposition
    produced the subproblem; it does not affect solving.
    """

    profits: tuple[int, ...]
    weights: tuple[int, ...]
    capacity: int
    origin_label: int | None = None

    def __post_init__(self):
        if len(self.profits) != len(self.weights):
            raise ValueError("profits and weights must have equal length")
        if any(p < 0 for p in self.profits):
            raise ValueError("profits must be nonnegative")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.profits)


@dataclass(frozen=True)
class KnapsackSolution:
    selected: tuple[int, ...]
    value: int
    feasible: bool = True


def scale_to_integers(weights: Sequence, capacity, factor: int,
                      *, max_magnitude: int = 2 ** 63 - 1):
    """Conservatively integer-scale real weights and capacity.

    Each weight becomes ceil(weight * factor) and the capacity becomes
    floor(capacity * factor), so any selection feasible for the scaled
    problem is feasible for the original one.  Raises OverflowError instead
    of letting a scaled value leave ``[-max_magnitude, max_magnitude]``.
    """
    factor = int(factor)
    if factor < 1:
        raise ValueError(f"scale factor must be a positive integer, got {factor}")
    scaled_w = []
    for w in weights:
        fw = Fraction(w)
        if fw < 0:
            raise ValueError(f"weights must be nonnegative, got {w}")
        scaled_w.append(math.ceil(fw * factor))
    scaled_c = math.floor(Fraction(capacity) * factor)
    if any(abs(w) > max_magnitude for w in scaled_w) or abs(scaled_c) > max_magnitude:
        raise OverflowError(
            f"scaled values exceed the integer range +-{max_magnitude}")
    return scaled_w, scaled_c


def dantzig_bound(profits: Sequence[int], weights: Sequence[int],
                  capacity: int) -> int:
    """Integer upper bound from the LP relaxation (greedy fractional fill).

    Exact integer arithmetic; items are ordered by profit/weight with exact
    ratio comparisons, so the bound is valid even for pathological ties.
    """
    if capacity < 0:
        return 0
    free = 0
    items = []
    for p, w in zip(profits, weights):
        if p <= 0 or w > capacity:
            continue
        if w == 0:
            free += p
        else:
            items.append((Fraction(p, w), p, w))
    items.sort(key=lambda t: (-t[0], t[1]))
    total = free
    room = capacity
    for _, p, w in items:
        if w <= room:
            total += p
            room -= w
        else:
            total += (p * room) // w
            break
    return total


def _fast_profit_ceiling(kept, capacity) -> int:
    """Cheap integer bound >= the optimum, for sizing the DP profit axis.

    Float greedy fill in float-sorted ratio order, padded by one unit; the
    padding dwarfs every rounding effect (items fit in float64 exactly and
    mis-sorting near-equal ratios perturbs the LP value by ~1e-12 relative).
    Data outside the float64-exact integer range fall back to the exact bound.
    """
    if max(max(p, w) for _, p, w in kept) >= 2 ** 53 or capacity >= 2 ** 53:
        return dantzig_bound([p for _, p, _ in kept],
                             [w for _, _, w in kept], capacity)
    profits = np.array([p for _, p, _ in kept], dtype=float)
    weights = np.array([w for _, _, w in kept], dtype=float)
    order = np.argsort(-profits / weights, kind="stable")
    cum_w = np.cumsum(weights[order])
    cum_p = np.cumsum(profits[order])
    k = int(np.searchsorted(cum_w, float(capacity), side="right"))
    if k >= len(kept):
        return int(cum_p[-1]) + 1
    full = float(cum_p[k - 1]) if k else 0.0
    room = float(capacity) - (float(cum_w[k - 1]) if k else 0.0)
    frac = profits[order[k]] * max(room, 0.0) / weights[order[k]]
    return int(math.floor(full + frac)) + 1


def _split_items(problem: KnapsackSubproblem):
    """Forced bits and the residual item list.

    Zero-profit and oversized items are never selected; a zero-weight item
    with positive profit belongs to every optimal solution.
    """
    bits = [0] * problem.n
    base_value = 0
    kept = []  # (original index, profit, weight), ascending index
    for j, (p, w) in enumerate(zip(problem.profits, problem.weights)):
        if p <= 0 or w > problem.capacity:
            continue
        if w == 0:
            bits[j] = 1
            base_value += p
        else:
            kept.append((j, p, w))
    return bits, base_value, kept


def solve_knapsack_value(problem: KnapsackSubproblem,
                         *,
                         state_cap: int = DEFAULT_STATE_CAP) -> int:
    """Optimal objective only (no selection vector); same exactness contract."""
    if problem.capacity < 0:
        return 0
    _, base_value, kept = _split_items(problem)
    if not kept:
        return base_value
    upper = _fast_profit_ceiling(kept, problem.capacity)
    if upper + 1 > state_cap:
        value, _ = _branch_and_bound(kept, problem.capacity)
        return base_value + value
    return base_value + _dp_value_only(kept, problem.capacity, upper)


def solve_knapsack(problem: KnapsackSubproblem,
                   *,
                   state_cap: int = DEFAULT_STATE_CAP,
                   lex_cells: int = DEFAULT_LEX_CELLS) -> KnapsackSolution:
    """Solve a 0/1 knapsack exactly.

    Returns the optimal value together with the lexicographically smallest
    optimal selection vector.  A negative capacity yields the empty selection
    flagged infeasible rather than an exception.
    """
    if problem.capacity < 0:
        return KnapsackSolution(selected=(0,) * problem.n, value=0, feasible=False)

    bits, base_value, kept = _split_items(problem)
    if not kept:
        return KnapsackSolution(selected=tuple(bits), value=base_value)

    upper = _fast_profit_ceiling(kept, problem.capacity)
    if upper + 1 > state_cap:
        value, chosen = _branch_and_bound(kept, problem.capacity)
    else:
        value, chosen = _dp_by_profit(kept, problem.capacity, upper, lex_cells)
    for j in chosen:
        bits[j] = 1
    return KnapsackSolution(selected=tuple(bits), value=base_value + value)


# ---------------------------------------------------------------------------
# DP over profit values: minw[t] = least weight achieving profit exactly t.
# ---------------------------------------------------------------------------

def _dp_value_only(kept, capacity, upper):
    max_w = max(w for _, _, w in kept)
    width = upper + 1
    if (_INF + max_w) < 2 ** 63 and capacity < 2 ** 62:
        row = np.full(width, _INF, dtype=np.int64)
        row[0] = 0
        for _, p, w in kept:
            np.minimum(row[p:], row[:width - p] + w, out=row[p:])
        return int(np.nonzero(row <= capacity)[0][-1])
    inf = sum(w for _, _, w in kept) + capacity + 1
    row = [inf] * width
    row[0] = 0
    for _, p, w in kept:
        for t in range(width - 1, p - 1, -1):
            cand = row[t - p] + w
            if cand < row[t]:
                row[t] = cand
    return max(t for t in range(width) if row[t] <= capacity)


def _dp_by_profit(kept, capacity, upper, lex_cells):
    k = len(kept)
    max_w = max(w for _, _, w in kept)
    int64_safe = (_INF + max_w) < 2 ** 63 and capacity < 2 ** 62
    if not int64_safe:
        return _dp_by_profit_python(kept, capacity, upper)

    width = upper + 1
    rows_budget = max(4, lex_cells // width)

    def advance(row, p, w):
        nxt = row.copy()
        np.minimum(nxt[p:], row[:width - p] + w, out=nxt[p:])
        return nxt

    base = np.full(width, _INF, dtype=np.int64)
    base[0] = 0

    if k + 1 <= rows_budget:
        # Full suffix table: suffix[i][t] = min weight over items kept[i:].
        suffix = np.empty((k + 1, width), dtype=np.int64)
        suffix[k] = base
        for i in range(k - 1, -1, -1):
            suffix[i] = advance(suffix[i + 1], kept[i][1], kept[i][2])
        top = suffix[0]

        def row_after(i):
            return suffix[i + 1]
    else:
        # Checkpointed suffix rows, rebuilt block by block during the
        # reconstruction walk; same results, bounded memory.
        stride = max(1, math.ceil((k + 1) / max(2, rows_budget // 2)))
        stored = {k: base}
        row = base
        for i in range(k - 1, -1, -1):
            row = advance(row, kept[i][1], kept[i][2])
            if i % stride == 0:
                stored[i] = row
        top = stored[0]
        block = {}

        def row_after(i):
            idx = i + 1
            if idx not in block:
                block.clear()
                anchor = min(k, ((idx // stride) + 1) * stride)
                cur = stored[anchor] if anchor in stored else stored[k]
                start = anchor if anchor in stored else k
                block[start] = cur
                for i2 in range(start - 1, (idx // stride) * stride - 1, -1):
                    cur = advance(cur, kept[i2][1], kept[i2][2])
                    block[i2] = cur
            return block[idx]

    achievable = np.nonzero(top <= capacity)[0]
    value = int(achievable[-1])
    if value == 0:
        return 0, []

    # Lexicographically smallest optimum: prefer leaving each item out when
    # the remaining suffix can still deliver the missing profit in budget.
    chosen = []
    target = value
    budget = capacity
    for i, (j, p, w) in enumerate(kept):
        after = row_after(i)
        if int(after[target]) <= budget:
            continue
        chosen.append(j)
        target -= p
        budget -= w
    assert target == 0
    return value, chosen


def _dp_by_profit_python(kept, capacity, upper):
    # Big-integer path for weights outside the int64 range.
    k = len(kept)
    width = upper + 1
    inf = sum(w for _, _, w in kept) + capacity + 1
    suffix = [None] * (k + 1)
    row = [inf] * width
    row[0] = 0
    suffix[k] = row
    for i in range(k - 1, -1, -1):
        _, p, w = kept[i]
        prev = suffix[i + 1]
        row = prev.copy()
        for t in range(width - 1, p - 1, -1):
            cand = prev[t - p] + w
            if cand < row[t]:
                row[t] = cand
        suffix[i] = row
    value = max(t for t in range(width) if suffix[0][t] <= capacity)
    if value == 0:
        return 0, []
    chosen = []
    target = value
    budget = capacity
    for i, (j, p, w) in enumerate(kept):
        if suffix[i + 1][target] <= budget:
            continue
        chosen.append(j)
        target -= p
        budget -= w
    assert target == 0
    return value, chosen


# ---------------------------------------------------------------------------
# Depth-first branch and bound (profit range too large for the DP).
# ---------------------------------------------------------------------------

def _ratio_order(kept):
    return sorted(range(len(kept)),
                  key=lambda i: (-Fraction(kept[i][1], kept[i][2]), i))


def _greedy_bound(kept, order, start, capacity):
    total = 0
    room = capacity
    for oi in range(start, len(order)):
        _, p, w = kept[order[oi]]
        if w <= room:
            total += p
            room -= w
        else:
            total += (p * room) // w
            break
    return total


def _branch_and_bound(kept, capacity):
    order = _ratio_order(kept)
    best = 0

    # Pass 1: optimal value by include-first DFS with Dantzig pruning.
    stack = [(0, 0, capacity)]
    while stack:
        depth, value, room = stack.pop()
        if value > best:
            best = value
        if depth == len(order):
            continue
        if value + _greedy_bound(kept, order, depth, room) <= best:
            continue
        _, p, w = kept[order[depth]]
        stack.append((depth + 1, value, room))
        if w <= room:
            stack.append((depth + 1, value + p, room - w))
    if best == 0:
        return 0, []

    # Pass 2: fix bits in index order, keeping the lexicographically
    # smallest vector that still completes to the optimal value.
    def reachable(start, target, budget):
        if target <= 0:
            return True
        sub = kept[start:]
        sub_order = _ratio_order(sub)
        stack = [(0, 0, budget)]
        while stack:
            depth, value, room = stack.pop()
            if value >= target:
                return True
            if depth == len(sub_order):
                continue
            if value + _greedy_bound(sub, sub_order, depth, room) < target:
                continue
            _, p, w = sub[sub_order[depth]]
            stack.append((depth + 1, value, room))
            if w <= room:
                stack.append((depth + 1, value + p, room - w))
        return False

    chosen = []
    target = best
    budget = capacity
    for i, (j, p, w) in enumerate(kept):
        if reachable(i + 1, target, budget):
            continue
        chosen.append(j)
        target -= p
        budget -= w
    assert target == 0
    return best, chosen
