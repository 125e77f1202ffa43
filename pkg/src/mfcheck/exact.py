"""Exact rationals, univariate polynomials over Q, and truncated power series.

Scalars are :class:`fractions.Fraction`.  A :class:`Series` carries its
coefficients over either Q or Q[var] (a :class:`Poly` ring) and an explicit
inclusive truncation order; binary operations truncate to the smaller order
of their operands and never invent coefficients past it.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Scalar = Union[int, Fraction]

__all__ = [
    "Fraction",
    "Poly",
    "Series",
    "RingMismatchError",
    "SingularSeriesError",
    "as_fraction",
    "poly_eval",
    "series_add",
    "series_sub",
    "series_mul",
    "series_scale",
    "series_inv",
    "series_exp",
    "series_log1p",
    "series_pow_int",
    "series_shift_down",
    "series_shift_up",
]


class RingMismatchError(TypeError):
    """Raised when series over different coefficient rings are combined."""


class SingularSeriesError(ZeroDivisionError):
    """Raised when inverting a series whose constant term is not a unit."""


def as_fraction(value: Scalar | str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class Poly:
    """Dense univariate polynomial with Fraction coefficients.

    ``coeffs[i]`` is the coefficient of ``var**i``.  Trailing zeros are always
    stripped, so the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable[Scalar] = (), var: str = "l"):
        cs = [as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "var", var)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def constant(cls, c: Scalar, var: str = "l") -> "Poly":
        return cls((c,), var)

    @classmethod
    def monomial(cls, c: Scalar, power: int, var: str = "l") -> "Poly":
        if power < 0:
            raise ValueError("negative power")
        return cls([0] * power + [c], var)

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.var != self.var:
                raise RingMismatchError(f"polynomials in {self.var!r} and {other.var!r}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Poly((other,), self.var)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = max(len(self.coeffs), len(o.coeffs))
        return Poly((self.coeff(i) + o.coeff(i) for i in range(n)), self.var)

    __radd__ = __add__

    def __neg__(self):
        return Poly((-c for c in self.coeffs), self.var)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.coeffs or not o.coeffs:
            return Poly((), self.var)
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] += a * b
        return Poly(out, self.var)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # scalar division only; polynomial division is out of scope
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                raise ZeroDivisionError("polynomial division by zero")
            return Poly((c / other for c in self.coeffs), self.var)
        if isinstance(other, Poly) and other.is_constant() and not other.is_zero():
            return self / other.coeffs[0]
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative exponent")
        result, base = Poly((1,), self.var), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def divide_by_var(self) -> "Poly":
        """Exact division by the variable; the constant term must vanish."""
        if self.coeff(0) != 0:
            raise ValueError("constant term is nonzero; not divisible by the variable")
        return Poly(self.coeffs[1:], self.var)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.var == other.var and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.coeffs == Poly((other,), self.var).coeffs
        return NotImplemented

    def __hash__(self):
        if len(self.coeffs) <= 1:
            return hash(self.coeff(0))
        return hash((self.var, self.coeffs))

    def __call__(self, v: Scalar) -> Fraction:
        return poly_eval(self, v)

    def __repr__(self):
        return f"Poly({[str(c) for c in self.coeffs]}, var={self.var!r})"

    def __str__(self):
        return self.to_text()

    def to_text(self, var: str | None = None) -> str:
        """Plain text such as ``1 - 3*l + 2*l^2`` (lowest power first)."""
        v = var or self.var
        if not self.coeffs:
            return "0"
        parts: list[str] = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                mono = v if i == 1 else f"{v}^{i}"
                body = mono if mag == 1 else f"{mag}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)


def poly_eval(p: Poly, v: Scalar) -> Fraction:
    """Horner evaluation of ``p`` at the rational ``v``."""
    v = as_fraction(v)
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * v + c
    return acc


# --- truncated power series -------------------------------------------------

QQ = "QQ"


def _ring_of(value) -> str:
    if isinstance(value, Poly):
        return f"QQ[{value.var}]"
    return QQ


def _zero(ring: str):
    if ring == QQ:
        return Fraction(0)
    return Poly((), ring[3:-1])


def _one(ring: str):
    if ring == QQ:
        return Fraction(1)
    return Poly((1,), ring[3:-1])


def _coerce_elem(value, ring: str):
    if ring == QQ:
        if isinstance(value, Poly):
            raise RingMismatchError("polynomial coefficient in a rational series")
        return as_fraction(value)
    var = ring[3:-1]
    if isinstance(value, Poly):
        if value.var != var:
            raise RingMismatchError(f"coefficient in {value.var!r} for ring {ring}")
        return value
    return Poly((as_fraction(value),), var)


class Series:
    """Power series in ``t`` known exactly through ``t**order``.

    ``ring`` is ``"QQ"`` or ``"QQ[<var>]"``; when omitted it is inferred from
    the coefficients (any :class:`Poly` makes it a polynomial ring).
    """

    __slots__ = ("coeffs", "order", "ring")

    def __init__(self, coeffs: Sequence = (), order: int | None = None, ring: str | None = None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("truncation order must be >= 0")
        if ring is None:
            ring = next((_ring_of(c) for c in coeffs if isinstance(c, Poly)), QQ)
        cs = [_coerce_elem(c, ring) for c in coeffs[: order + 1]]
        cs.extend(_zero(ring) for _ in range(order + 1 - len(cs)))
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "ring", ring)

    def __setattr__(self, name, value):
        raise AttributeError("Series is immutable")

    @classmethod
    def variable(cls, order: int, ring: str = QQ) -> "Series":
        """The series ``t``."""
        return cls([_zero(ring), _one(ring)], order, ring)

    @classmethod
    def constant(cls, c, order: int, ring: str | None = None) -> "Series":
        return cls([c], order, ring)

    @classmethod
    def from_function(cls, f, order: int, ring: str | None = None) -> "Series":
        return cls([f(i) for i in range(order + 1)], order, ring)

    def __getitem__(self, i: int):
        return self.coeffs[i]

    def __len__(self):
        return self.order + 1

    def truncate(self, order: int) -> "Series":
        if order > self.order:
            raise ValueError(f"cannot extend a series known to order {self.order} to {order}")
        return Series(self.coeffs[: order + 1], order, self.ring)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def egf_coefficients(self) -> list:
        """``n! * [t^n]`` for each n, i.e. the exponential-generating-function view."""
        out, fact = [], 1
        for n, c in enumerate(self.coeffs):
            if n:
                fact *= n
            out.append(c * fact)
        return out

    def __add__(self, other):
        return series_add(self, _lift(other, self))

    __radd__ = __add__

    def __sub__(self, other):
        return series_sub(self, _lift(other, self))

    def __rsub__(self, other):
        return series_sub(_lift(other, self), self)

    def __neg__(self):
        return series_scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, Series):
            return series_mul(self, other)
        return series_scale(self, other)

    __rmul__ = __mul__

    def __pow__(self, r: int):
        return series_pow_int(self, r)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.ring == other.ring and self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.ring, self.order, self.coeffs))

    def __repr__(self):
        return f"Series({[str(c) for c in self.coeffs]}, order={self.order}, ring={self.ring!r})"


def _lift(other, like: Series) -> Series:
    if isinstance(other, Series):
        return other
    return Series.constant(other, like.order, like.ring)


def _check_ring(a: Series, b: Series) -> None:
    if a.ring != b.ring:
        raise RingMismatchError(f"cannot combine series over {a.ring} and {b.ring}")


def series_add(a: Series, b: Series) -> Series:
    _check_ring(a, b)
    n = min(a.order, b.order)
    return Series([a.coeffs[i] + b.coeffs[i] for i in range(n + 1)], n, a.ring)


def series_sub(a: Series, b: Series) -> Series:
    _check_ring(a, b)
    n = min(a.order, b.order)
    return Series([a.coeffs[i] - b.coeffs[i] for i in range(n + 1)], n, a.ring)


def series_scale(a: Series, c) -> Series:
    """Multiply every coefficient by a ring element or rational scalar."""
    if isinstance(c, Poly) and a.ring == QQ:
        raise RingMismatchError("polynomial scalar applied to a rational series")
    return Series([x * c for x in a.coeffs], a.order, a.ring)


def series_mul(a: Series, b: Series) -> Series:
    _check_ring(a, b)
    n = min(a.order, b.order)
    out = [_zero(a.ring) for _ in range(n + 1)]
    for i in range(n + 1):
        ai = a.coeffs[i]
        if ai == 0:
            continue
        for j in range(n + 1 - i):
            bj = b.coeffs[j]
            if bj != 0:
                out[i + j] = out[i + j] + ai * bj
    return Series(out, n, a.ring)


def _unit_inverse(c, ring: str):
    if ring == QQ:
        if c == 0:
            raise SingularSeriesError("constant term is zero")
        return 1 / c
    if c.is_zero() or not c.is_constant():
        raise SingularSeriesError(f"constant term {c} is not a unit of {ring}")
    return Fraction(1) / c.coeffs[0]


def series_inv(a: Series) -> Series:
    """Multiplicative inverse; the constant term must be a unit of the ring."""
    inv0 = _unit_inverse(a.coeffs[0], a.ring)
    out = [_one(a.ring) * inv0]
    for n in range(1, a.order + 1):
        acc = _zero(a.ring)
        for k in range(1, n + 1):
            if a.coeffs[k] != 0:
                acc = acc + a.coeffs[k] * out[n - k]
        out.append(-acc * inv0)
    return Series(out, a.order, a.ring)


def series_exp(a: Series) -> Series:
    """``exp(a)`` for a series with zero constant term."""
    if a.coeffs[0] != 0:
        raise ValueError("series_exp needs a zero constant term")
    out = [_one(a.ring)]
    for n in range(1, a.order + 1):
        acc = _zero(a.ring)
        for k in range(1, n + 1):
            if a.coeffs[k] != 0:
                acc = acc + a.coeffs[k] * out[n - k] * k
        out.append(acc / n)
    return Series(out, a.order, a.ring)


def series_log1p(a: Series) -> Series:
    """``log(1 + a)`` for a series with zero constant term."""
    if a.coeffs[0] != 0:
        raise ValueError("series_log1p needs a zero constant term")
    if a.order == 0:
        return Series([_zero(a.ring)], 0, a.ring)
    # (log(1+a))' = a' / (1 + a), then integrate term by term
    m = a.order - 1
    deriv = Series([a.coeffs[i + 1] * (i + 1) for i in range(m + 1)], m, a.ring)
    onepa = Series([_one(a.ring)] + list(a.coeffs[1 : m + 1]), m, a.ring)
    q = series_mul(deriv, series_inv(onepa))
    return Series([_zero(a.ring)] + [q.coeffs[i] / (i + 1) for i in range(m + 1)], a.order, a.ring)


def series_pow_int(a: Series, r: int) -> Series:
    """``a**r`` for integer ``r >= 0`` by repeated squaring."""
    if r < 0:
        raise ValueError("series_pow_int needs r >= 0; invert first")
    result = Series.constant(_one(a.ring), a.order, a.ring)
    base = a
    while r:
        if r & 1:
            result = series_mul(result, base)
        r >>= 1
        if r:
            base = series_mul(base, base)
    return result


def series_shift_down(a: Series) -> Series:
    """Divide by ``t``; the constant term must vanish and the order drops by one."""
    if a.coeffs[0] != 0:
        raise ValueError("constant term is nonzero; series is not divisible by t")
    if a.order == 0:
        raise ValueError("no coefficients left after dividing an order-0 series by t")
    return Series(a.coeffs[1:], a.order - 1, a.ring)


def series_shift_up(a: Series) -> Series:
    """Multiply by ``t``; the order grows by one."""
    return Series([_zero(a.ring)] + list(a.coeffs), a.order + 1, a.ring)


def exp_series(order: int, scale=1, ring: str = QQ) -> Series:
    """``exp(scale * t)``; ``scale`` may be a Poly when ``ring`` is polynomial."""
    out, term = [], _one(ring)
    for n in range(order + 1):
        out.append(term)
        term = term * scale / (n + 1)
    return Series(out, order, ring)


def geometric_series(order: int, ratio=1, ring: str = QQ) -> Series:
    """``1 / (1 - ratio * t)``."""
    out, term = [], _one(ring)
    for _ in range(order + 1):
        out.append(term)
        term = term * ratio
    return Series(out, order, ring)
