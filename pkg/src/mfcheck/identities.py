"""Exact checks of identities linking special numbers to moments.

Each ``verify_*`` function evaluates the two sides of one identity along
separate code paths (special-number tables on one side, the moment engine or
an independent series computation on the other) and compares them exactly.
A mismatch is reported, never raised.

Identity ids: thm1, cor2, lemma-bn, thm3, thm4, thm5, thm6, eq41, limit,
thm8, thm9, remark, eq52, pfrac, recurrences.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Callable, Iterable, Iterator

from .exact import Fraction, Poly, Series, geometric_series, poly_eval, series_mul
from .moments import Atom, Kind, RVExpression, Term, atom_moment, linear_combination, moment, uniform_sum
from .special import (
    LAMBDA,
    bern_higher_table,
    bernoulli_higher,
    bernoulli_second_kind,
    derangement,
    derangement_poly,
    stirling1,
    stirling1_deg,
    stirling2,
    stirling2_deg,
    warm_tables,
)

PASS = "PASS"
FAIL = "FAIL"

SAMPLED_LAMBDAS = (Fraction(0), Fraction(1), Fraction(1, 2), Fraction(-1, 3))


@dataclass
class IdentityReport:
    identity_id: str
    params: dict
    lhs: object
    rhs: object
    verdict: str
    elapsed: float = field(default=0.0, compare=False)
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


def _check(identity_id: str, params: dict, lhs: Callable, rhs: Callable, note: str = "") -> IdentityReport:
    start = time.perf_counter()
    left = lhs()
    right = rhs()
    verdict = PASS if left == right else FAIL
    return IdentityReport(identity_id, params, left, right, verdict, time.perf_counter() - start, note)


def _params(n=None, k=None, lam=None, **extra) -> dict:
    params = {}
    if n is not None:
        params["n"] = n
    if k is not None:
        params["k"] = k
    if lam is not None:
        params["lambda_mode"] = "sampled"
        params["lambda"] = lam
    params.update(extra)
    return params


def _lam_params(n, k, lam) -> dict:
    if lam is None:
        return {"n": n, "k": k, "lambda_mode": "symbolic"}
    return _params(n, k, Fraction(lam))


def _specialize(p: Poly, lam):
    return p if lam is None else poly_eval(p, lam)


def _lambda_power(c: Fraction, power: int, lam):
    """``c * (-lambda)**power`` as a polynomial, or a number when lambda is sampled."""
    if lam is None:
        return Poly.monomial(c * (-1) ** power, power, LAMBDA)
    return c * (-Fraction(lam)) ** power


def _zero(lam):
    return Poly((), LAMBDA) if lam is None else Fraction(0)


# --- classical Stirling / Bernoulli ------------------------------------------

def _thm1_lhs(n: int, k: int) -> Fraction:
    total = Fraction(0)
    for m in range(n + 1):
        inner = sum((stirling2(l, k) * stirling2(m + k, l) for l in range(k, m + k + 1)), Fraction(0))
        total += Fraction(comb(n, m), comb(m + k, m)) * inner * bernoulli_higher(n - m, k)
    return total


def verify_thm1(n: int, k: int) -> IdentityReport:
    def rhs():
        e = uniform_sum(k)
        return sum((stirling2(n, m) * moment(e, m) for m in range(n + 1)), Fraction(0))

    return _check("thm1", _params(n, k), lambda: _thm1_lhs(n, k), rhs)


def _positive_compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _positive_compositions(total - first, parts - 1):
            yield (first,) + rest


def verify_cor2(n: int, k: int) -> IdentityReport:
    """The thm1 left side against the composition sum ``m!/(l_1!...l_k!)``."""
    if k < 1:
        raise ValueError("cor2 needs k >= 1")

    def rhs():
        total = Fraction(0)
        for m in range(n + 1):
            inner = Fraction(0)
            for ls in _positive_compositions(m + k, k):
                denom = 1
                for l in ls:
                    denom *= factorial(l)
                inner += Fraction(factorial(m), denom)
            total += stirling2(n, m) * inner
        return total

    return _check("cor2", _params(n, k), lambda: _thm1_lhs(n, k), rhs)


def verify_lemma_bn(n: int) -> IdentityReport:
    return _check(
        "lemma-bn",
        _params(n),
        lambda: bernoulli_second_kind(n),
        lambda: sum((atom_moment(Kind.UNIFORM, k) * stirling1(n, k) for k in range(n + 1)), Fraction(0)),
    )


def verify_thm3(n: int) -> IdentityReport:
    if n < 1:
        raise ValueError("thm3 needs n >= 1")
    return _check(
        "thm3",
        _params(n),
        lambda: atom_moment(Kind.MIXTURE, n) - n * atom_moment(Kind.MIXTURE, n - 1),
        lambda: (-1) ** n * bernoulli_second_kind(n),
    )


def verify_thm5(n: int, k: int) -> IdentityReport:
    if k < 1:
        raise ValueError("thm5 needs k >= 1")
    return _check(
        "thm5",
        _params(n, k),
        lambda: moment(linear_combination(Kind.MIXTURE, [1] * k), n),
        lambda: (-1) ** n * bernoulli_higher(n, n - k + 1, 1 - k),
    )


# --- degenerate Stirling ------------------------------------------------------

def _product_sum(k: int) -> RVExpression:
    """``U1*X1 + ... + Uk*Xk``."""
    return RVExpression(
        tuple(Term(Fraction(1), frozenset({Atom(Kind.UNIFORM, i), Atom(Kind.EXPGAMMA, i)})) for i in range(1, k + 1))
    )


def verify_thm4(n: int, k: int, lam=None) -> IdentityReport:
    """Degenerate S1 against moments of ``U1*X1 + ... + Uk*Xk``; ``lam=None`` is symbolic."""
    if not 0 <= k <= n:
        raise ValueError("thm4 needs 0 <= k <= n")

    def rhs():
        return _lambda_power(comb(n, k) * moment(_product_sum(k), n - k), n - k, lam)

    return _check("thm4", _lam_params(n, k, lam), lambda: _specialize(stirling1_deg(n, k), lam), rhs)


def verify_thm6(n: int, k: int, lam=None) -> IdentityReport:
    if not 0 <= k <= n:
        raise ValueError("thm6 needs 0 <= k <= n")

    def rhs():
        e = uniform_sum(k)
        total = _zero(lam)
        for m in range(k, n + 1):
            total = total + _specialize(stirling1_deg(n, m), lam) * (comb(m, k) * moment(e, m - k))
        return total

    return _check("thm6", _lam_params(n, k, lam), lambda: _specialize(stirling2_deg(n, k), lam), rhs)


def verify_eq41(n: int, k: int, lam=None) -> IdentityReport:
    """Shifted-sum identity with ``U1 + ... + U_{k-1} + 1``."""
    if n < 1 or k < 1:
        raise ValueError("eq41 needs n >= 1 and k >= 1")

    def lhs():
        shift = Poly.monomial(n - 1, 1, LAMBDA) if lam is None else (n - 1) * Fraction(lam)
        return _specialize(stirling2_deg(n, k), lam) + shift * _specialize(stirling2_deg(n - 1, k), lam)

    def rhs():
        e = uniform_sum(k - 1, shift=1)
        total = _zero(lam)
        for m in range(k - 1, n):
            total = total + _specialize(stirling1_deg(n - 1, m), lam) * (comb(m, k - 1) * moment(e, m - k + 1))
        return total

    return _check("eq41", _lam_params(n, k, lam), lhs, rhs)


def verify_limit_identity(n: int, k: int) -> IdentityReport:
    if not 1 <= k <= n:
        raise ValueError("limit identity needs 1 <= k <= n")
    return _check(
        "limit",
        _params(n, k),
        lambda: Fraction(n, k) * moment(uniform_sum(k), n - k),
        lambda: moment(uniform_sum(k - 1, shift=1), n - k),
    )


# --- derangements -------------------------------------------------------------

def _weighted_gamma_moment(n: int, k: int) -> Fraction:
    return moment(linear_combination(Kind.EXPGAMMA, range(1, k + 1), shift=-k), n)


def _derangement_convolution(n: int, k: int) -> Fraction:
    # binomial convolution of the sequences d_l(1), d_l(2), ..., d_l(k)
    acc = [Fraction(1)] + [Fraction(0)] * n
    for i in range(1, k + 1):
        seq = [Fraction(derangement(l)) if i == 1 else derangement_poly(l, i) for l in range(n + 1)]
        acc = [sum((comb(j, a) * acc[a] * seq[j - a] for a in range(j + 1)), Fraction(0)) for j in range(n + 1)]
    return acc[n]


def _thm9_rhs(n: int, k: int) -> Fraction:
    return sum(
        (stirling2(m + k, k) * factorial(m) * comb(n, m) * Fraction(-k) ** (n - m) for m in range(n + 1)),
        Fraction(0),
    )


def verify_thm8(n: int, k: int) -> IdentityReport:
    if k < 1:
        raise ValueError("thm8 needs k >= 1")
    return _check("thm8", _params(n, k), lambda: _weighted_gamma_moment(n, k), lambda: _derangement_convolution(n, k))


def verify_thm9(n: int, k: int) -> IdentityReport:
    if k < 1:
        raise ValueError("thm9 needs k >= 1")
    return _check("thm9", _params(n, k), lambda: _weighted_gamma_moment(n, k), lambda: _thm9_rhs(n, k))


def verify_remark(n: int, k: int) -> IdentityReport:
    if k < 1:
        raise ValueError("remark needs k >= 1")
    return _check("remark", _params(n, k), lambda: _derangement_convolution(n, k), lambda: _thm9_rhs(n, k))


def verify_eq52(n: int, k: int) -> IdentityReport:
    if k < 1:
        raise ValueError("eq52 needs k >= 1")
    return _check(
        "eq52",
        _params(n, k),
        lambda: moment(linear_combination(Kind.EXPGAMMA, [k], shift=-1), n),
        lambda: derangement_poly(n, k),
    )


def verify_partial_fraction(k: int, order: int) -> IdentityReport:
    """``1/((1-t)(1-2t)...(1-kt))`` against ``sum_m S2(m+k,k) t^m``, compared as polynomials in t."""

    def lhs():
        prod = Series.constant(1, order)
        for i in range(1, k + 1):
            prod = series_mul(prod, geometric_series(order, i))
        return Poly(prod.coeffs, "t")

    return _check(
        "pfrac",
        _params(k=k, order=order),
        lhs,
        lambda: Poly([stirling2(m + k, k) for m in range(order + 1)], "t"),
    )


def verify_recurrences(n_max: int) -> IdentityReport:
    """Degenerate S1/S2, classical S1/S2 and derangement recurrences on the cached tables.

    Reports the number of instances that hold (lhs) against the number checked (rhs).
    """
    lam = Poly((0, 1), LAMBDA)
    failures: list[str] = []
    checked = 0

    def expect(name, left, right):
        nonlocal checked
        checked += 1
        if left != right:
            failures.append(name)

    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            expect(
                f"s1deg({n + 1},{k})",
                stirling1_deg(n + 1, k),
                stirling1_deg(n, k - 1) - lam * n * stirling1_deg(n, k),
            )
            expect(
                f"s2deg({n + 1},{k})",
                stirling2_deg(n + 1, k),
                stirling2_deg(n, k) * k + stirling2_deg(n, k - 1) - lam * n * stirling2_deg(n, k),
            )
            expect(f"s1({n + 1},{k})", stirling1(n + 1, k), stirling1(n, k - 1) - n * stirling1(n, k))
            expect(f"s2({n + 1},{k})", stirling2(n + 1, k), k * stirling2(n, k) + stirling2(n, k - 1))
        expect(f"derange({n})", derangement(n), n * derangement(n - 1) + (-1) ** n)
    note = "" if not failures else "failed: " + ", ".join(failures[:10])
    held = Fraction(checked - len(failures))
    return IdentityReport("recurrences", {"n_max": n_max}, held, Fraction(checked), PASS if not failures else FAIL, 0.0, note)


# --- suite --------------------------------------------------------------------

def _grid(n_max: int, k_max: int, *, k_min: int = 0, n_min: int = 0, k_le_n: bool = False):
    for n in range(n_min, n_max + 1):
        for k in range(k_min, k_max + 1):
            if k_le_n and k > n:
                continue
            yield n, k


IDENTITY_IDS = (
    "thm1", "cor2", "lemma-bn", "thm3", "thm4", "thm5", "thm6",
    "eq41", "limit", "thm8", "thm9", "remark", "eq52", "pfrac", "recurrences",
)  # fmt: skip

LAMBDA_IDENTITIES = frozenset({"thm4", "thm6", "eq41"})


def _calls(identity_id: str, n_max: int, k_max: int, lam) -> Iterable[Callable[[], IdentityReport]]:
    if identity_id == "thm1":
        return (lambda n=n, k=k: verify_thm1(n, k) for n, k in _grid(n_max, k_max))
    if identity_id == "cor2":
        return (lambda n=n, k=k: verify_cor2(n, k) for n, k in _grid(n_max, k_max, k_min=1))
    if identity_id == "lemma-bn":
        return (lambda n=n: verify_lemma_bn(n) for n in range(n_max + 1))
    if identity_id == "thm3":
        return (lambda n=n: verify_thm3(n) for n in range(1, n_max + 1))
    if identity_id == "thm4":
        return (lambda n=n, k=k: verify_thm4(n, k, lam) for n, k in _grid(n_max, k_max, k_le_n=True))
    if identity_id == "thm5":
        return (lambda n=n, k=k: verify_thm5(n, k) for n, k in _grid(n_max, k_max, k_min=1))
    if identity_id == "thm6":
        return (lambda n=n, k=k: verify_thm6(n, k, lam) for n, k in _grid(n_max, k_max, k_le_n=True))
    if identity_id == "eq41":
        return (lambda n=n, k=k: verify_eq41(n, k, lam) for n, k in _grid(n_max, k_max, k_min=1, n_min=1, k_le_n=True))
    if identity_id == "limit":
        return (lambda n=n, k=k: verify_limit_identity(n, k) for n, k in _grid(n_max, k_max, k_min=1, k_le_n=True))
    if identity_id in ("thm8", "thm9", "remark", "eq52"):
        fn = {"thm8": verify_thm8, "thm9": verify_thm9, "remark": verify_remark, "eq52": verify_eq52}[identity_id]
        return (lambda n=n, k=k: fn(n, k) for n, k in _grid(n_max, k_max, k_min=1))
    if identity_id == "pfrac":
        return (lambda k=k: verify_partial_fraction(k, n_max) for k in range(1, k_max + 1))
    if identity_id == "recurrences":
        return (lambda: verify_recurrences(n_max),)
    raise ValueError(f"unknown identity {identity_id!r}; expected one of {', '.join(IDENTITY_IDS)}")


def run_suite(
    n_max: int,
    k_max: int,
    mode: str = "symbolic",
    *,
    identities: Iterable[str] | None = None,
    lambdas: Iterable | None = None,
    threads: int = 1,
) -> list[IdentityReport]:
    """Run every requested identity over its admissible ``(n, k)`` grid.

    ``mode="sampled"`` evaluates the lambda-dependent identities at each value in
    ``lambdas`` (default 0, 1, 1/2, -1/3) instead of comparing polynomials.
    Tables are warmed single-threaded first; checks then run on ``threads``
    workers (0 = one per CPU) and come back in grid order.
    """
    if mode not in ("symbolic", "sampled"):
        raise ValueError(f"unknown lambda mode {mode!r}")
    ids = list(IDENTITY_IDS if identities is None else identities)
    for ident in ids:
        if ident not in IDENTITY_IDS:
            raise ValueError(f"unknown identity {ident!r}; expected one of {', '.join(IDENTITY_IDS)}")
    lam_values = [None] if mode == "symbolic" else [Fraction(v) for v in (lambdas or SAMPLED_LAMBDAS)]

    warm_tables(n_max + k_max + 1)
    for r in range(-k_max, n_max + k_max + 2):
        bern_higher_table(r).ensure(n_max)

    calls = [
        call
        for ident in ids
        for lam in (lam_values if ident in LAMBDA_IDENTITIES else [None])
        for call in _calls(ident, n_max, k_max, lam)
    ]
    workers = threads if threads > 0 else (os.cpu_count() or 1)
    if workers == 1:
        return [call() for call in calls]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda call: call(), calls))


def overall_verdict(reports: Iterable[IdentityReport]) -> str:
    return FAIL if any(r.verdict != PASS for r in reports) else PASS
