"""Exact moment/cumulant combinatorics and unbiased cumulant estimation.

All identities (Stirling numbers, Bell polynomials, partition sums, Touchard
moments, factorial inequalities) are computed in exact integer or rational
arithmetic; floating point enters only in the k-statistics, which estimate
cumulants from data.  The moment <-> cumulant conversions have two
independent code paths each -- a binomial recurrence and an explicit
partition sum -- cross-checked in the test suite for orders up to 12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy

from .errors import InsufficientDataError, RangeError

__all__ = [
    "CumulantVector",
    "stirling2",
    "bell_number",
    "partial_bell",
    "complete_bell",
    "set_partitions",
    "moments_from_cumulants",
    "cumulants_from_moments",
    "touchard_moment",
    "k_statistics",
    "factorial_inequalities",
]

_STIRLING_GUARD = 30
_BELL_GUARD = 20
_PARTITION_GUARD = 12
_KSTAT_GUARD = 6


@dataclass
class CumulantVector:
    """Cumulants c_1..c_K, exact or estimated."""

    values: list
    stderrs: list | None = None
    provenance: str = "exact"

    def __len__(self):
        return len(self.values)

    def __getitem__(self, order: int):
        """1-based access: cv[k] is the order-k cumulant."""
        return self.values[order - 1]


@lru_cache(maxsize=None)
def stirling2(k: int, i: int) -> int:
    """Stirling number of the second kind, by the standard recurrence."""
    if k > _STIRLING_GUARD or k < 0:
        raise RangeError(f"stirling2 guarded to k <= {_STIRLING_GUARD}, got {k}")
    if not 0 <= i <= k:
        return 0
    if k == 0:
        return 1 if i == 0 else 0
    if i == 0:
        return 0
    return i * stirling2(k - 1, i) + stirling2(k - 1, i - 1)


def bell_number(k: int) -> int:
    return sum(stirling2(k, i) for i in range(k + 1))


def _bell_tuples(k: int, i: int):
    """Tuples (j_1, ..., j_{k-i+1}) with sum j = i and sum l*j_l = k."""
    length = k - i + 1

    def rec(pos, jsum, wsum):
        if pos == length:
            if jsum == i and wsum == k:
                yield ()
            return
        l = pos + 1
        max_j = min(i - jsum, (k - wsum) // l)
        for j in range(max_j + 1):
            for rest in rec(pos + 1, jsum + j, wsum + l * j):
                yield (j,) + rest

    return rec(0, 0, 0)


def partial_bell(k: int, i: int, x) -> object:
    """Partial Bell polynomial B_{k,i}(x_1, ..., x_{k-i+1}).

    Exact when the arguments are ints or Fractions.
    """
    if not 1 <= i <= k or k > _BELL_GUARD:
        raise RangeError(
            f"partial_bell needs 1 <= i <= k <= {_BELL_GUARD}, got k={k}, i={i}")
    x = list(x)
    if len(x) < k - i + 1:
        raise RangeError(f"need {k - i + 1} arguments, got {len(x)}")
    total = 0
    kfac = math.factorial(k)
    for js in _bell_tuples(k, i):
        coeff = Fraction(kfac)
        term = 1
        for l, j in enumerate(js, start=1):
            if j:
                coeff /= math.factorial(j) * math.factorial(l) ** j
                term *= x[l - 1] ** j
        total += coeff * term
    if isinstance(total, Fraction) and total.denominator == 1:
        return total.numerator
    return total


def complete_bell(k: int, x) -> object:
    """B_k(x_1, ..., x_k) = sum_i B_{k,i}."""
    return sum(partial_bell(k, i, x) for i in range(1, k + 1))


def set_partitions(k: int):
    """Unordered partitions of {0, ..., k-1} via restricted-growth strings."""
    if k > _PARTITION_GUARD:
        raise RangeError(
            f"partition enumeration guarded to k <= {_PARTITION_GUARD}")

    def rec(element, blocks):
        if element == k:
            yield [tuple(b) for b in blocks]
            return
        for b in blocks:
            b.append(element)
            yield from rec(element + 1, blocks)
            b.pop()
        blocks.append([element])
        yield from rec(element + 1, blocks)
        blocks.pop()

    return rec(0, [])


def _exactify(values):
    """Floats are exact binary rationals; route them through Fractions so the
    recurrences below never accumulate rounding error."""
    had_float = any(isinstance(v, float) for v in values)
    if had_float:
        values = [Fraction(v) for v in values]
    return values, had_float


def moments_from_cumulants(c) -> list:
    """m_k = B_k(c_1, ..., c_k) via the binomial recurrence."""
    values = c.values if isinstance(c, CumulantVector) else list(c)
    if len(values) > _BELL_GUARD:
        raise RangeError(f"order guarded to {_BELL_GUARD}")
    values, had_float = _exactify(values)
    m = []
    for k in range(1, len(values) + 1):
        mk = sum(math.comb(k - 1, i - 1) * values[i - 1]
                 * (m[k - i - 1] if k - i >= 1 else 1)
                 for i in range(1, k + 1))
        m.append(mk)
    return [float(x) for x in m] if had_float else m


def cumulants_from_moments(m) -> CumulantVector:
    """Invert the moment sequence; binomial recurrence for all orders.

    Equals the signed partition sum
    c_k = sum over partitions (-1)^{p-1} (p-1)! prod m_|L|, which is
    enumerated directly only up to order 12 (Bell numbers explode beyond).
    """
    m = list(m)
    if len(m) > _BELL_GUARD:
        raise RangeError(f"order guarded to {_BELL_GUARD}")
    m, had_float = _exactify(m)
    c = []
    for k in range(1, len(m) + 1):
        ck = m[k - 1] - sum(math.comb(k - 1, i - 1) * c[i - 1] * m[k - i - 1]
                            for i in range(1, k))
        c.append(ck)
    if had_float:
        c = [float(x) for x in c]
    return CumulantVector(c, provenance="exact")


def cumulants_from_moments_partition(m) -> CumulantVector:
    """Partition-sum route, exact, guarded to order 12."""
    m = list(m)
    if len(m) > _PARTITION_GUARD:
        raise RangeError(f"partition route guarded to {_PARTITION_GUARD}")
    m, had_float = _exactify(m)
    c = []
    for k in range(1, len(m) + 1):
        ck = 0
        for blocks in set_partitions(k):
            p = len(blocks)
            term = (-1) ** (p - 1) * math.factorial(p - 1)
            for b in blocks:
                term *= m[len(b) - 1]
            ck += term
        c.append(ck)
    if had_float:
        c = [float(x) for x in c]
    return CumulantVector(c, provenance="exact")


def touchard_moment(alpha, k: int):
    """E[Poisson(alpha)^k] = sum_i alpha^i * S(k, i); exact for exact alpha."""
    if k > _STIRLING_GUARD:
        raise RangeError(f"guarded to k <= {_STIRLING_GUARD}")
    if alpha < 0:
        raise RangeError(f"alpha must be nonnegative, got {alpha}")
    return sum(alpha ** i * stirling2(k, i) for i in range(1, k + 1)) \
        if k >= 1 else 1


@lru_cache(maxsize=None)
def _kstat_coefficients(r: int):
    """Coefficients of the order-r k-statistic in power sums.

    The estimator is a linear combination over integer partitions of r of
    the monomials prod s_a, with coefficients rational in the sample size n,
    fixed by requiring E[k_r] = c_r identically in the population cumulants.
    E[prod s_{a_t}] expands over set partitions of the factor indices into
    falling factorials of n times products of raw moments.
    """
    n = sympy.Symbol("n", positive=True)
    kappa = sympy.symbols(f"kappa1:{r + 1}")

    # raw moments in terms of cumulants
    raw = {0: sympy.Integer(1)}
    for k in range(1, r + 1):
        raw[k] = sympy.expand(sum(
            math.comb(k - 1, i - 1) * kappa[i - 1] * raw[k - i]
            for i in range(1, k + 1)))

    monomials = []
    for pdict in sympy.utilities.iterables.partitions(r):
        mon = []
        for a, mult in sorted(pdict.items()):
            mon.extend([a] * mult)
        monomials.append(tuple(mon))

    coeffs = sympy.symbols(f"a0:{len(monomials)}")
    expectation = sympy.Integer(0)
    for coeff, mon in zip(coeffs, monomials):
        e_mon = sympy.Integer(0)
        for blocks in set_partitions(len(mon)):
            term = sympy.ff(n, len(blocks))
            for b in blocks:
                term *= raw[sum(mon[t] for t in b)]
            e_mon += term
        expectation += coeff * e_mon

    residual = sympy.Poly(sympy.expand(expectation - kappa[r - 1]), *kappa)
    eqs = [sympy.Eq(v, 0) for v in residual.as_dict().values()]
    sol = sympy.solve(eqs, coeffs, dict=True)
    if not sol:
        raise RuntimeError(f"no k-statistic of order {r}")
    sol = sol[0]
    return tuple(
        (mon, sympy.simplify(sol.get(c, sympy.Integer(0))))
        for mon, c in zip(monomials, coeffs))


def k_statistics(samples, kmax: int) -> CumulantVector:
    """Classical k-statistics k_1..k_K: unbiased cumulant estimators.

    Coefficient tables are derived symbolically once per order and cached;
    evaluation uses power sums of the data.
    """
    if kmax > _KSTAT_GUARD:
        raise RangeError(f"k-statistics guarded to order {_KSTAT_GUARD}")
    data = np.asarray(samples, dtype=float).ravel()
    n = data.size
    if n <= kmax:
        raise InsufficientDataError(
            f"need more than K={kmax} samples, got {n}")
    power_sums = {a: float(np.sum(data ** a)) for a in range(1, kmax + 1)}
    nsym = sympy.Symbol("n", positive=True)
    values = []
    for r in range(1, kmax + 1):
        total = 0.0
        for mon, coeff in _kstat_coefficients(r):
            c = float(coeff.subs(nsym, n))
            term = c
            for a in mon:
                term *= power_sums[a]
            total += term
        values.append(total)
    return CumulantVector(values, provenance="k-statistic")


def factorial_inequalities(p: int, d: int, j: int) -> tuple:
    """Exact checks of the three factorial inequalities
    (3pj)! <= 27^{pj} ((pj)!)^3, (2pd)! <= 4^{pd} ((pd)!)^2 and
    (2p)! <= 4^p (p!)^2.

    The constants are the multinomial-theorem ones: (am)!/((m)!)^a <= a^{am},
    the number of ways to interleave a blocks of m.
    """
    guard = 64
    if max(3 * p * j, 2 * p * d, 2 * p) > 3 * guard or min(p, d, j) < 1:
        raise RangeError("arguments outside the exact-integer guard")
    first = math.factorial(3 * p * j) <= 27 ** (p * j) * math.factorial(p * j) ** 3
    second = math.factorial(2 * p * d) <= 4 ** (p * d) * math.factorial(p * d) ** 2
    third = math.factorial(2 * p) <= 4 ** p * math.factorial(p) ** 2
    return first, second, third
