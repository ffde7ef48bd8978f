"""Shared oracles and instance builders for the test suite.

The oracles here are deliberately independent of the library's solver paths:
plain subset enumeration with exact integer arithmetic, so they can vouch for
the optimized implementations.
"""

import random
from decimal import Decimal
from fractions import Fraction

import pytest

from sockp import SockpInstance


def enumerate_knapsack(profits, weights, capacity):
    """Brute-force 0/1 knapsack: (optimal value, lexicographically least bits)."""
    n = len(profits)
    best_value = 0
    best_bits = (0,) * n
    for mask in range(1 << n):
        bits = tuple((mask >> j) & 1 for j in range(n))
        weight = sum(w for w, b in zip(weights, bits) if b)
        if weight > capacity:
            continue
        value = sum(p for p, b in zip(profits, bits) if b)
        if value > best_value or (value == best_value and bits < best_bits):
            best_value, best_bits = value, bits
    return best_value, best_bits


def soc_brute_force(inst, omega):
    """Exhaustive SOC-feasible optimum via exact integer arithmetic."""
    from sockp.model import as_omega

    a_ints, b_int, v_ints, lhs_shift, rhs_shift = inst.exact_view(as_omega(omega))
    n = inst.n
    best = 0
    best_bits = (0,) * n
    for mask in range(1 << n):
        lin = 0
        var = 0
        value = 0
        for j in range(n):
            if (mask >> j) & 1:
                lin += a_ints[j]
                var += v_ints[j]
                value += inst.profits[j]
        if value <= best:
            continue
        slack = b_int - lin
        if slack >= 0 and slack * slack * lhs_shift >= var * rhs_shift:
            best = value
            best_bits = tuple((mask >> j) & 1 for j in range(n))
    return best, best_bits


def beta_pair_oracle(x, table, delta):
    """Support-function value by enumerating every prefix/pivot pair.

    Candidate values come from sets T of saturated entries plus one pivot t
    absorbing the leftover budget; the optimum is their maximum.  Exponential,
    for tiny tables only.
    """
    delta = Fraction(delta)
    entries = [(Fraction(table.dnum[i], table.q), Fraction(table.f[i]))
               for i in range(table.size) if x[table.js[i]]]
    entries.append((Fraction(0), delta))  # dummy element
    k = len(entries)
    best = Fraction(0)
    for mask in range(1 << k):
        chosen = [i for i in range(k) if (mask >> i) & 1]
        f_sum = sum((entries[i][1] for i in chosen), Fraction(0))
        if f_sum >= delta:
            continue
        d_sum = sum((entries[i][0] for i in chosen), Fraction(0))
        for t in range(k):
            if t in chosen:
                continue
            if f_sum + entries[t][1] < delta:
                continue
            value = d_sum + entries[t][0] * (delta - f_sum) / entries[t][1]
            best = max(best, value)
    return best


def random_instance(rng: random.Random, n, *, sigma_lo=1, sigma_hi=2000,
                    sigma_digits=2, profit_hi=100, mean_hi=100,
                    capacity_ratio=0.5) -> SockpInstance:
    profits = tuple(rng.randint(1, profit_hi) for _ in range(n))
    means = tuple(Decimal(rng.randint(1, mean_hi)) for _ in range(n))
    sigmas = tuple(Decimal(rng.randint(sigma_lo, sigma_hi)).scaleb(-sigma_digits)
                   for _ in range(n))
    total = sum(int(v) for v in means)
    capacity = Decimal(int(total * capacity_ratio))
    return SockpInstance(profits=profits, means=means, sigmas=sigmas,
                         capacity=capacity)


@pytest.fixture
def rng():
    return random.Random(20240817)
