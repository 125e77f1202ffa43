"""Stirling, degenerate Stirling, Bernoulli and derangement numbers.

Every family is served from a memoized, append-only table filled by its
canonical route.  A second, independent route (generating-function
coefficients or a different recurrence) is exposed for each family so the two
can be compared; see :func:`dual_route_mismatches`.

Conventions: Stirling numbers of the first kind are signed, ``0**0 == 1``,
and out-of-triangle entries are zero.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from math import comb, factorial
from typing import Callable

from .exact import (
    Fraction,
    Poly,
    Series,
    as_fraction,
    exp_series,
    geometric_series,
    poly_eval,
    series_exp,
    series_inv,
    series_log1p,
    series_mul,
    series_pow_int,
    series_shift_down,
)

LAMBDA = "l"
LRING = f"QQ[{LAMBDA}]"

_ZERO = Fraction(0)
_ONE = Fraction(1)
_PZERO = Poly((), LAMBDA)
_PONE = Poly((1,), LAMBDA)
_LAM = Poly((0, 1), LAMBDA)


class TriangleTable:
    """Rows ``T(n, 0..n)`` built one at a time and cached.

    Extension is serialized by a lock; reads of filled rows take no lock.
    """

    def __init__(self, family: str, build_row: Callable[[int, list], list], zero):
        self.family = family
        self.zero = zero
        self._build_row = build_row
        self._rows: list[list] = []
        self._lock = threading.Lock()

    def ensure(self, n: int) -> None:
        if n < len(self._rows):
            return
        with self._lock:
            while len(self._rows) <= n:
                self._rows.append(self._build_row(len(self._rows), self._rows))

    def __call__(self, n: int, k: int):
        if n < 0 or k < 0 or k > n:
            return self.zero
        self.ensure(n)
        return self._rows[n][k]

    def rows(self, n_max: int) -> list[list]:
        self.ensure(n_max)
        return [list(r) for r in self._rows[: n_max + 1]]

    def __len__(self):
        return len(self._rows)


class SequenceTable:
    """Values ``a(0), a(1), ...`` cached; ``extend(values, target)`` appends the missing tail."""

    def __init__(self, family: str, extend: Callable[[list, int], list]):
        self.family = family
        self._extend = extend
        self._values: list = []
        self._lock = threading.Lock()

    def ensure(self, n: int) -> None:
        if n < len(self._values):
            return
        with self._lock:
            if n >= len(self._values):
                target = max(n, 2 * len(self._values))
                new = self._extend(list(self._values), target)
                self._values.extend(new[len(self._values) :])

    def __call__(self, n: int):
        if n < 0:
            raise ValueError("index must be >= 0")
        self.ensure(n)
        return self._values[n]

    def values(self, n_max: int) -> list:
        self.ensure(n_max)
        return list(self._values[: n_max + 1])

    def __len__(self):
        return len(self._values)


# --- canonical routes ---------------------------------------------------------

def _s1_row(n: int, rows: list) -> list:
    if n == 0:
        return [_ONE]
    prev = rows[n - 1]
    get = lambda k: prev[k] if 0 <= k < len(prev) else _ZERO  # noqa: E731
    return [get(k - 1) - (n - 1) * get(k) for k in range(n + 1)]


def _s2_row(n: int, rows: list) -> list:
    if n == 0:
        return [_ONE]
    prev = rows[n - 1]
    get = lambda k: prev[k] if 0 <= k < len(prev) else _ZERO  # noqa: E731
    return [k * get(k) + get(k - 1) for k in range(n + 1)]


def _s1deg_row(n: int, rows: list) -> list:
    if n == 0:
        return [_PONE]
    prev = rows[n - 1]
    get = lambda k: prev[k] if 0 <= k < len(prev) else _PZERO  # noqa: E731
    step = _LAM * (n - 1)
    return [get(k - 1) - step * get(k) for k in range(n + 1)]


def _s2deg_row(n: int, rows: list) -> list:
    # finite sum over lambda^(n-m) S1(n,m) (1/k!) Delta^k 0^m
    row = []
    for k in range(n + 1):
        coeffs = [_ZERO] * (n - k + 1)
        for m in range(k, n + 1):
            coeffs[n - m] += stirling1(n, m) * forward_difference_power(k, m)
        row.append(Poly(coeffs, LAMBDA))
    return row


def _derange_extend(values: list, target: int) -> list:
    out = list(values)
    while len(out) <= target:
        n = len(out)
        out.append(1 if n == 0 else n * out[-1] + (-1) ** n)
    return out


def _log1p_over_t(order: int) -> Series:
    """``log(1+t)/t`` through ``t**order``."""
    return Series([Fraction((-1) ** j, j + 1) for j in range(order + 1)], order)


def _expm1_over_t(order: int) -> Series:
    """``(e^t - 1)/t`` through ``t**order``."""
    return series_shift_down(exp_series(order + 1) - 1)


def _bern2_extend(values: list, target: int) -> list:
    return series_inv(_log1p_over_t(target)).egf_coefficients()


def _bernoulli_order_series(r: int, order: int) -> Series:
    """``(t/(e^t-1))**r`` for any integer r."""
    base = _expm1_over_t(order)
    if r >= 0:
        return series_pow_int(series_inv(base), r)
    return series_pow_int(base, -r)


def _bern_higher_extender(r: int):
    def extend(values: list, target: int) -> list:
        return _bernoulli_order_series(r, target).egf_coefficients()

    return extend


S1_TABLE = TriangleTable("s1", _s1_row, _ZERO)
S2_TABLE = TriangleTable("s2", _s2_row, _ZERO)
S1DEG_TABLE = TriangleTable("s1deg", _s1deg_row, _PZERO)
S2DEG_TABLE = TriangleTable("s2deg", _s2deg_row, _PZERO)
BERN2_TABLE = SequenceTable("bern2", _bern2_extend)
DERANGE_TABLE = SequenceTable("derange", _derange_extend)
_BERN_HIGHER: dict[int, SequenceTable] = {}
_BERN_HIGHER_LOCK = threading.Lock()


def bern_higher_table(r: int) -> SequenceTable:
    table = _BERN_HIGHER.get(r)
    if table is None:
        with _BERN_HIGHER_LOCK:
            table = _BERN_HIGHER.setdefault(r, SequenceTable(f"bern-higher:{r}", _bern_higher_extender(r)))
    return table


def stirling1(n: int, k: int) -> Fraction:
    """Signed Stirling number of the first kind, ``(x)_n = sum S1(n,k) x^k``."""
    return S1_TABLE(n, k)


def stirling2(n: int, k: int) -> Fraction:
    """Stirling number of the second kind."""
    return S2_TABLE(n, k)


def stirling1_deg(n: int, k: int) -> Poly:
    """Degenerate Stirling number of the first kind as a polynomial in lambda."""
    return S1DEG_TABLE(n, k)


def stirling2_deg(n: int, k: int) -> Poly:
    """Degenerate Stirling number of the second kind as a polynomial in lambda."""
    return S2DEG_TABLE(n, k)


def forward_difference_power(k: int, m: int) -> Fraction:
    """``(1/k!) * Delta^k x^m`` at ``x = 0``, with ``0**0 == 1``."""
    if k < 0 or m < 0:
        raise ValueError("k and m must be >= 0")
    total = sum(comb(k, l) * (-1) ** (k - l) * l**m for l in range(k + 1))
    return Fraction(total, factorial(k))


def bernoulli_second_kind(n: int) -> Fraction:
    """``b_n``: n! times the t^n coefficient of ``t / log(1+t)``."""
    return BERN2_TABLE(n)


def bernoulli_higher(n: int, r: int, x=0) -> Fraction:
    """Order-r Bernoulli polynomial ``B_n^(r)(x)``; negative orders are allowed."""
    x = as_fraction(x)
    table = bern_higher_table(r)
    if x == 0:
        return table(n)
    return sum((comb(n, j) * table(j) * x ** (n - j) for j in range(n + 1)), _ZERO)


def bernoulli_higher_poly(n: int, r: int) -> Poly:
    """``B_n^(r)(x)`` as a polynomial in ``x``."""
    table = bern_higher_table(r)
    return Poly([comb(n, j) * table(j) for j in range(n, -1, -1)], "x")


def derangement(n: int) -> int:
    return DERANGE_TABLE(n)


def derangement_poly(n: int, x) -> Fraction:
    """``d_n(x) = sum_k (n!/k!) (-1)^k x^(n-k)``; ``d_n(1) == d_n``."""
    x = as_fraction(x)
    if n < 0:
        raise ValueError("n must be >= 0")
    return sum(
        (Fraction(factorial(n), factorial(k)) * (-1) ** k * x ** (n - k) for k in range(n + 1)),
        _ZERO,
    )


# --- independent routes -------------------------------------------------------

def _lambda_log_series(order: int) -> Series:
    """``log(1 + lambda t) / lambda`` over Q[lambda]."""
    lt = Series([_PZERO, _LAM], order, LRING)
    return Series([c.divide_by_var() if not c.is_zero() else c for c in series_log1p(lt).coeffs], order, LRING)


def _triangle_from_powers(base: Series, n_max: int, zero) -> list[list]:
    """Rows of ``n! [t^n] base**k / k!`` for ``0 <= k <= n <= n_max``; base has zero constant term."""
    rows = [[zero] * (n + 1) for n in range(n_max + 1)]
    power = Series.constant(1, n_max, base.ring)
    for k in range(n_max + 1):
        egf = power.egf_coefficients()
        for n in range(k, n_max + 1):
            rows[n][k] = egf[n] / factorial(k)
        power = series_mul(power, base)
    return rows


def stirling1_gf(n_max: int) -> list[list[Fraction]]:
    """S1 rows from ``log(1+t)**k / k!``."""
    log1p_t = series_log1p(Series.variable(n_max))
    return _triangle_from_powers(log1p_t, n_max, _ZERO)


def stirling2_gf(n_max: int) -> list[list[Fraction]]:
    """S2 rows from ``(e^t - 1)**k / k!``."""
    return _triangle_from_powers(exp_series(n_max) - 1, n_max, _ZERO)


def stirling1_deg_gf(n_max: int) -> list[list[Poly]]:
    """Degenerate S1 rows from ``(log(1+lambda t)/lambda)**k / k!``."""
    return _triangle_from_powers(_lambda_log_series(n_max), n_max, _PZERO)


def stirling2_deg_gf(n_max: int) -> list[list[Poly]]:
    """Degenerate S2 rows from ``((1+lambda t)**(1/lambda) - 1)**k / k!``."""
    return _triangle_from_powers(series_exp(_lambda_log_series(n_max)) - 1, n_max, _PZERO)


def stirling2_deg_recurrence(n_max: int) -> list[list[Poly]]:
    """Degenerate S2 rows from ``S(n+1,k) = (k - n lambda) S(n,k) + S(n,k-1)``."""
    rows = [[_PONE]]
    for n in range(n_max):
        prev = rows[-1]
        get = lambda k: prev[k] if 0 <= k < len(prev) else _PZERO  # noqa: E731
        rows.append([(_LAM * (-n) + k) * get(k) + get(k - 1) for k in range(n + 2)])
    return rows


def bernoulli_second_kind_recurrence(n_max: int) -> list[Fraction]:
    """b_n from ``t = log(1+t) * sum b_n t^n/n!`` solved coefficient by coefficient."""
    scaled: list[Fraction] = []  # b_j / j!
    for n in range(n_max + 1):
        if n == 0:
            scaled.append(_ONE)
            continue
        acc = sum(scaled[j] * Fraction((-1) ** (n - j), n - j + 1) for j in range(n))
        scaled.append(-acc)
    return [s * factorial(n) for n, s in enumerate(scaled)]


def bernoulli_recurrence(n_max: int) -> list[Fraction]:
    """Classical Bernoulli numbers from ``sum_{j<=n} C(n+1,j) B_j = 0``."""
    out = [_ONE]
    for n in range(1, n_max + 1):
        out.append(-sum(comb(n + 1, j) * out[j] for j in range(n)) / (n + 1))
    return out


def bernoulli_higher_recurrence(n_max: int, r: int) -> list[Fraction]:
    """``B_n^(r)`` for r >= 0 via ``B_n^(s+1) = (1 - n/s) B_n^(s) - n B_{n-1}^(s)``."""
    if r < 0:
        raise ValueError("the order recurrence is only used for r >= 0")
    if r == 0:
        return [_ONE] + [_ZERO] * n_max
    cur = bernoulli_recurrence(n_max)
    for s in range(1, r):
        cur = [(1 - Fraction(n, s)) * cur[n] - (n * cur[n - 1] if n else 0) for n in range(n_max + 1)]
    return cur


def derangement_gf(n_max: int) -> list[Fraction]:
    """d_n from ``e^{-t} / (1 - t)``."""
    return series_mul(exp_series(n_max, -1), geometric_series(n_max)).egf_coefficients()


def derangement_poly_gf(n: int, x) -> Fraction:
    """d_n(x) from ``e^{-t} / (1 - x t)``."""
    x = as_fraction(x)
    return series_mul(exp_series(n, -1), geometric_series(n, x)).egf_coefficients()[n]


def dual_route_mismatches(n_max: int = 12, r_max: int | None = None) -> list[str]:
    """Compare canonical tables with their independent routes; returns mismatch descriptions."""
    problems: list[str] = []
    r_max = n_max if r_max is None else r_max

    def cmp_triangle(name, table, other):
        for n in range(n_max + 1):
            for k in range(n + 1):
                if table(n, k) != other[n][k]:
                    problems.append(f"{name}({n},{k}): {table(n, k)} != {other[n][k]}")

    cmp_triangle("s1", stirling1, stirling1_gf(n_max))
    cmp_triangle("s2", stirling2, stirling2_gf(n_max))
    cmp_triangle("s1deg", stirling1_deg, stirling1_deg_gf(n_max))
    cmp_triangle("s2deg/recurrence", stirling2_deg, stirling2_deg_recurrence(n_max))
    cmp_triangle("s2deg/gf", stirling2_deg, stirling2_deg_gf(n_max))

    for n, (a, b) in enumerate(zip(BERN2_TABLE.values(n_max), bernoulli_second_kind_recurrence(n_max))):
        if a != b:
            problems.append(f"bern2({n}): {a} != {b}")
    for n, (a, b) in enumerate(zip(DERANGE_TABLE.values(n_max), derangement_gf(n_max))):
        if a != b:
            problems.append(f"derange({n}): {a} != {b}")
    for r in range(r_max + 1):
        for n, (a, b) in enumerate(zip(bern_higher_table(r).values(n_max), bernoulli_higher_recurrence(n_max, r))):
            if a != b:
                problems.append(f"bern-higher:{r}({n}): {a} != {b}")
    for n in range(n_max + 1):
        for x in (Fraction(2), Fraction(-1, 3), Fraction(5, 2)):
            if derangement_poly(n, x) != derangement_poly_gf(n, x):
                problems.append(f"derange-poly({n},{x})")
    return problems


# --- testing aid --------------------------------------------------------------

def _resolve_table(family: str):
    if family.startswith("bern-higher:"):
        return bern_higher_table(int(family.split(":", 1)[1]))
    tables = {t.family: t for t in (S1_TABLE, S2_TABLE, S1DEG_TABLE, S2DEG_TABLE, BERN2_TABLE, DERANGE_TABLE)}
    try:
        return tables[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}") from None


@contextmanager
def perturbed(family: str, index: tuple[int, ...], delta=1):
    """Temporarily add ``delta`` to one cached table entry (fault injection)."""
    table = _resolve_table(family)
    if isinstance(table, TriangleTable):
        n, k = index
        if not 0 <= k <= n:
            raise ValueError("entry outside the triangle")
        table.ensure(n)
        row = table._rows[n]
        original = row[k]
        row[k] = original + delta
        try:
            yield original
        finally:
            row[k] = original
    else:
        (n,) = index
        table.ensure(n)
        original = table._values[n]
        table._values[n] = original + delta
        try:
            yield original
        finally:
            table._values[n] = original


def warm_tables(n_max: int, r_values=()) -> None:
    """Fill every table through row ``n_max`` (single-threaded warm-up)."""
    for t in (S1_TABLE, S2_TABLE, S1DEG_TABLE, S2DEG_TABLE, BERN2_TABLE, DERANGE_TABLE):
        t.ensure(n_max)
    for r in r_values:
        bern_higher_table(r).ensure(n_max)
