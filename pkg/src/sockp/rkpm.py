"""Bounds for the SOC-constrained knapsack via a family of ordinary knapsacks.

The robust problem over the polyhedral approximation decomposes into one
ordinary 0/1 knapsack per pivot segment: pivot l with gain/budget ratio r
contributes the feasible set

    sum_j mean_j x_j + sum_{l' before l} (d_l' - r f_l') x_{j(l')} <= cap - r * delta,

where "before" means strictly greater d/f ratio, plus a final subproblem with
weights mean_j + sum_k d_jk and the plain capacity for the zero-ratio dummy
pivot.  The best solution over the family solves the robust problem exactly;
budget delta = m^2 yields an upper bound on the SOC optimum and
delta = m^2 + n/4 a feasible lower bound.

Subproblem weights are built in exact integer arithmetic and conservatively
scaled (ceil weights, floor capacity), so returned lower bounds are always
genuinely SOC-feasible.  A float Dantzig screen with generous safety margins
picks the few pivots whose knapsack must actually be solved; margins only
ever cause extra exact solves, never wrong answers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import localcontext
from fractions import Fraction
from typing import Sequence

import numpy as np

from .approx import HORIZONTAL, SegmentTable, beta_exact, build_segments
from .knapsack import (KnapsackSubproblem, solve_knapsack,
                       solve_knapsack_value)
from .model import EXACT_PREC, SockpInstance, as_omega, is_soc_feasible

__all__ = [
    "BoundResult",
    "SolverInvariantError",
    "UPPER",
    "LOWER",
    "EXACT",
    "lower_bound",
    "solve_rkpm",
    "upper_bound",
]

UPPER = "upper"
LOWER = "lower"
EXACT = "exact"

DEFAULT_SCALE_FACTOR = 10 ** 6


class SolverInvariantError(RuntimeError):
    """An internal solver invariant failed; results cannot be trusted."""


@dataclass(frozen=True)
class BoundResult:
    """Outcome of one bound computation (or of the exact doubling solve)."""

    solution: tuple[int, ...]
    objective: int
    kind: str
    m: int
    delta: Fraction
    subproblems_solved: int
    subproblems_skipped: int
    wall_time: float
    iterations: int | None = None
    objective_history: tuple[int, ...] = ()


def _frac_digits(dec) -> int:
    exp = dec.as_tuple().exponent
    return max(0, -exp) if isinstance(exp, int) else 0


class _Family:
    """Shared exact/float data for one (instance, table, delta) family."""

    def __init__(self, inst: SockpInstance, table: SegmentTable, delta: Fraction):
        self.inst = inst
        self.table = table
        self.delta = delta
        self.da = max([_frac_digits(inst.capacity)]
                      + [_frac_digits(v) for v in inst.means])
        self.pow_da = 10 ** self.da
        with localcontext() as ctx:
            ctx.prec = EXACT_PREC
            self.a_int = [int(v.scaleb(self.da)) for v in inst.means]
            self.b_int = int(inst.capacity.scaleb(self.da))
        self.profits_f = np.array(inst.profits, dtype=float)
        self.means_f = np.array([float(v) for v in inst.means])
        self.cap_f = float(inst.capacity)
        self.dn = delta.numerator
        self.dd = delta.denominator

    def capacity_is_negative(self, i: int | None) -> bool:
        """Exact sign of cap - r * delta for the pivot at sorted index i."""
        if i is None:
            return self.b_int < 0
        t = self.table
        lhs = self.b_int * t.q * t.f[i] * self.dd
        rhs = t.dnum[i] * self.dn * self.pow_da
        return lhs < rhs

    def _pivot_parts(self, i: int | None):
        t = self.table
        if i is None:
            return t.size, 0, 1  # dummy: full prefix, ratio zero
        return t.group_start[i], t.dnum[i], t.f[i]

    def scaled_subproblem(self, i: int | None, factor: int) -> KnapsackSubproblem:
        """Exact conservatively-scaled knapsack for the pivot at index i.

        ``None`` denotes the dummy pivot (ratio zero, full gain sums, plain
        capacity).  Weights are ceil'd and the capacity floor'd at ``factor``.
        """
        t = self.table
        n = self.inst.n
        gs, rnum, f_i = self._pivot_parts(i)
        sd, sf = t.prefix_state(gs)
        den = self.pow_da * t.q * f_i
        weights = []
        for j in range(n):
            extra = sd[j] * f_i - rnum * sf[j]
            if extra < 0:
                raise SolverInvariantError(
                    "negative modified weight; ratio ordering violated")
            num = factor * (self.a_int[j] * t.q * f_i + self.pow_da * extra)
            weights.append(-((-num) // den))
        cap_num = factor * (self.b_int * t.q * f_i * self.dd
                            - rnum * self.dn * self.pow_da)
        capacity = cap_num // (den * self.dd)
        label = t.size + 1 if i is None else i + 1
        return KnapsackSubproblem(profits=self.inst.profits,
                                  weights=tuple(weights),
                                  capacity=capacity, origin_label=label)

    def screen(self):
        """Candidate pivots with a dominating Dantzig bound each.

        Returns ([(rank, sorted index or None, bound)], skipped).  The bound
        is the LP relaxation of the pivot's own (unscaled, true-weight)
        subproblem in float arithmetic; it dominates the scaled integer
        optimum up to ~1e-8, absorbed by the callers' 0.5 margins.  Weight
        vectors are accumulated incrementally across ratio groups, so the
        whole family costs O(size * n) float work.  Negative-capacity pivots
        are dropped and counted (exact sign tests, float-banded).
        """
        t = self.table
        n = self.inst.n
        family_set = set(t.family(self.delta))
        delta_f = self.dn / self.dd
        sd_f = np.zeros(n)
        sf_f = np.zeros(n)
        candidates = []
        skipped = 0
        group_accum: list[int] = []

        def flush() -> None:
            for idx in group_accum:
                j = t.js[idx]
                sd_f[j] += t.d_float[idx]
                sf_f[j] += t.f[idx]
            group_accum.clear()

        def cap_negative(i, cap_float) -> bool:
            tol = 1e-6 * (1.0 + abs(self.cap_f) + abs(cap_float))
            if cap_float < -tol:
                return True
            if cap_float > tol:
                return False
            return self.capacity_is_negative(i)

        for i in range(t.size):
            if t.group_start[i] == i and group_accum:
                flush()
            rank = i + 1
            if rank in family_set:
                r_f = t.d_float[i] / t.f[i]
                cap = self.cap_f - r_f * delta_f
                if cap_negative(i, cap):
                    skipped += 1
                else:
                    w = self.means_f + sd_f - r_f * sf_f
                    candidates.append(
                        (rank, i, _dantzig_float(self.profits_f, w, max(cap, 0.0))))
            group_accum.append(i)
        flush()
        if cap_negative(None, self.cap_f):
            skipped += 1
        else:
            w = self.means_f + sd_f
            candidates.append((t.size + 1, None,
                               _dantzig_float(self.profits_f, w, self.cap_f)))
        return candidates, skipped


def _dantzig_float(profits: np.ndarray, weights: np.ndarray, cap: float) -> float:
    if cap < 0:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(weights > 0, profits / np.maximum(weights, 1e-300), np.inf)
        ratios = np.where(profits > 0, ratios, 0.0)
    order = np.argsort(-ratios, kind="stable")
    w_sorted = weights[order]
    p_sorted = profits[order]
    cum_w = np.cumsum(w_sorted)
    k = int(np.searchsorted(cum_w, cap, side="right"))
    if k >= len(order):
        return float(p_sorted.sum())
    full = float(p_sorted[:k].sum())
    room = cap - (float(cum_w[k - 1]) if k else 0.0)
    if w_sorted[k] > 0 and room > 0:
        full += float(p_sorted[k]) * room / float(w_sorted[k])
    return full


def _solve_family(fam: _Family, factor: int, threads: int):
    """Best (value, rank, bits) over the pivot family, with solve/skip counts.

    Deterministic: candidates are walked in (bound desc, rank asc) order, the
    incumbent only improves strictly, and an ascending-rank tie sweep restores
    the smallest-rank winner among equal objectives.
    """
    candidates, skipped = fam.screen()
    examined = len(candidates)
    candidates.sort(key=lambda c: (-c[2], c[0]))

    best_value = -1
    best_rank = None
    best_bits = None
    values = {}  # rank -> exact subproblem optimum, for the tie sweep

    def evaluate(cand):
        rank, i, _ = cand
        return rank, i, solve_knapsack_value(fam.scaled_subproblem(i, factor))

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        pos = 0
        while pos < len(candidates):
            gate = -math.inf if best_rank is None else best_value + 0.5
            batch = []
            while (pos < len(candidates) and len(batch) < max(1, threads)
                   and candidates[pos][2] >= gate):
                batch.append(candidates[pos])
                pos += 1
            if not batch:
                break
            if pool is not None and len(batch) > 1:
                results = list(pool.map(evaluate, batch))
            else:
                results = [evaluate(cand) for cand in batch]
            for rank, i, value in results:
                values[rank] = value
                if best_rank is None or value > best_value:
                    sol = solve_knapsack(fam.scaled_subproblem(i, factor))
                    best_value, best_rank, best_bits = sol.value, rank, sol.selected

        # Equal-objective pivots with smaller rank may have been gated out:
        # sweep ranks upward and stop at the first tie.
        for rank, i, bound in sorted(candidates, key=lambda c: c[0]):
            if best_rank is None or rank >= best_rank:
                break
            if bound < best_value - 0.5:
                continue
            value = values.get(rank)
            if value is None:
                value = solve_knapsack_value(fam.scaled_subproblem(i, factor))
                values[rank] = value
            if value > best_value:
                raise SolverInvariantError(
                    "screen admitted an improving pivot after the main pass")
            if value == best_value:
                sol = solve_knapsack(fam.scaled_subproblem(i, factor))
                best_value, best_rank, best_bits = sol.value, rank, sol.selected
                break
    finally:
        if pool is not None:
            pool.shutdown(wait=False)

    if best_bits is None:
        # Entire family empty; only possible with a negative capacity.
        best_value, best_bits = 0, (0,) * fam.inst.n
    return best_value, best_bits, examined, skipped


def solve_rkpm(inst: SockpInstance, omega, m: int, delta,
               *,
               scheme: str = HORIZONTAL,
               scale_factor: int = DEFAULT_SCALE_FACTOR,
               threads: int = 1,
               table: SegmentTable | None = None,
               kind: str | None = None) -> BoundResult:
    """Solve the robust knapsack over the m-segment approximation exactly.

    ``delta`` is the budget of the support-function knapsack; the inner
    budget gives an upper bound on the SOC optimum and the outer budget a
    feasible lower bound.  Returns the best solution across the pivot family
    together with bookkeeping counts.
    """
    start = time.perf_counter()
    omega_d = as_omega(omega)
    if table is None:
        table = build_segments(inst, omega_d, m, scheme)
    elif table.m != m or table.scheme != scheme or table.n != inst.n:
        raise ValueError("supplied segment table does not match the arguments")
    delta = Fraction(delta)
    if delta < table.inner_budget:
        raise ValueError(
            f"budget {delta} is below the inner budget {table.inner_budget}")

    fam = _Family(inst, table, delta)
    value, bits, examined, skipped = _solve_family(fam, scale_factor, threads)

    if kind is None:
        if delta == table.inner_budget:
            kind = UPPER
        elif table.scheme == HORIZONTAL and delta == table.outer_budget:
            kind = LOWER
        else:
            kind = UPPER

    _validate_result(inst, table, delta, bits, value, kind, omega_d)
    return BoundResult(solution=bits, objective=value, kind=kind, m=table.m,
                       delta=delta, subproblems_solved=examined,
                       subproblems_skipped=skipped,
                       wall_time=time.perf_counter() - start)


def _validate_result(inst, table, delta, bits, value, kind, omega_d):
    if value != sum(p for p, b in zip(inst.profits, bits) if b):
        raise SolverInvariantError("objective does not match the selection")
    lhs = _means_fraction(inst, bits) + beta_exact(bits, table, delta)
    if lhs > Fraction(inst.capacity):
        raise SolverInvariantError(
            "returned solution violates the robust constraint")
    if kind in (LOWER, EXACT) and not is_soc_feasible(bits, inst, omega_d):
        raise SolverInvariantError(
            f"{kind} result is not SOC-feasible")


def _means_fraction(inst: SockpInstance, bits: Sequence[int]) -> Fraction:
    total = Fraction(0)
    for v, b in zip(inst.means, bits):
        if b:
            total += Fraction(v)
    return total


def upper_bound(inst: SockpInstance, omega, m: int, *,
                scheme: str = HORIZONTAL,
                scale_factor: int = DEFAULT_SCALE_FACTOR,
                threads: int = 1,
                table: SegmentTable | None = None) -> BoundResult:
    """Upper bound on the SOC optimum (inner approximation budget)."""
    if table is None:
        table = build_segments(inst, as_omega(omega), m, scheme)
    return solve_rkpm(inst, omega, m, table.inner_budget, scheme=scheme,
                      scale_factor=scale_factor, threads=threads, table=table,
                      kind=UPPER)


def lower_bound(inst: SockpInstance, omega, m: int, *,
                scale_factor: int = DEFAULT_SCALE_FACTOR,
                threads: int = 1,
                table: SegmentTable | None = None) -> BoundResult:
    """Feasible lower bound on the SOC optimum (outer approximation budget).

    The returned solution is guaranteed SOC-feasible; this is checked in
    exact arithmetic before returning.
    """
    if table is None:
        table = build_segments(inst, as_omega(omega), m, HORIZONTAL)
    return solve_rkpm(inst, omega, m, table.outer_budget, scheme=HORIZONTAL,
                      scale_factor=scale_factor, threads=threads, table=table,
                      kind=LOWER)


def subproblem_exact(inst: SockpInstance, table: SegmentTable, rank: int,
                     delta) -> tuple[list[Fraction], Fraction]:
    """Exact (weights, capacity) of the pivot-``rank`` subproblem.

    Reference form used by enumeration tests; rank ``size + 1`` denotes the
    dummy pivot.
    """
    delta = Fraction(delta)
    fam = _Family(inst, table, delta)
    i = None if rank == table.size + 1 else rank - 1
    if i is not None and not 0 <= i < table.size:
        raise ValueError(f"pivot rank {rank} out of range")
    t = table
    n = inst.n
    if i is None:
        gs, rnum, f_i = t.size, 0, 1
    else:
        gs, rnum, f_i = t.group_start[i], t.dnum[i], t.f[i]
    ratio = Fraction(rnum, t.q * f_i)
    sd = [Fraction(0)] * n
    sf = [0] * n
    for idx in range(gs):
        j = t.js[idx]
        sd[j] += Fraction(t.dnum[idx], t.q)
        sf[j] += t.f[idx]
    weights = [Fraction(fam.a_int[j], fam.pow_da) + sd[j] - ratio * sf[j]
               for j in range(n)]
    capacity = Fraction(fam.b_int, fam.pow_da) - ratio * delta
    return weights, capacity
