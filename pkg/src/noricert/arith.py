"""Exact scalar and polynomial arithmetic for the certification pipeline.

Representation notes:

* Rationals are ``fractions.Fraction`` (always reduced, positive denominator,
  exact total order).  ``Rational`` is exported as an alias for annotations.
* Complex scalars are pairs of rationals.  Modulus comparisons are always made
  on squared moduli (``abs2``); no square root is ever taken in this module.
* Polynomials are dense: a tuple of rational coefficients, index = degree of
  the monomial, with no trailing zeros.  The zero polynomial is the empty
  tuple and reports degree -1.

Serialized forms: a rational is the string ``"num/den"``; a polynomial is a
list of coefficient strings (index = degree); a complex scalar is a mapping
``{"re": "num/den", "im": "num/den"}``.

Two evaluation paths exist on purpose.  ``Poly.__call__`` is the reference
path over ``Fraction``/``ComplexRational``.  ``eval_scaled`` is an exact
integer-scaled Horner used by bulk samplers: it returns an unreduced
numerator/denominator triple and performs no gcd, which matters when operands
reach tens of thousands of digits.  The two paths are cross-checked in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Fraction

RationalLike = Union[Fraction, int]


def parse_rational(text: str) -> Fraction:
    """Parse ``"num/den"`` (or a bare integer string) into a Fraction."""
    s = text.strip()
    if "/" in s:
        num_s, den_s = s.split("/", 1)
        try:
            num, den = int(num_s), int(den_s)
        except ValueError as exc:
            raise ValueError(f"invalid rational literal: {text!r}") from exc
        if den == 0:
            raise ValueError(f"zero denominator in rational literal: {text!r}")
        return Fraction(num, den)
    try:
        return Fraction(int(s))
    except ValueError as exc:
        raise ValueError(f"invalid rational literal: {text!r}") from exc


def format_rational(q: RationalLike) -> str:
    q = Fraction(q)
    return f"{_int_str(q.numerator)}/{_int_str(q.denominator)}"


def _int_str(n: int) -> str:
    """Decimal string of an integer at any size.

    Stays below the interpreter's int-to-str conversion guard by splitting
    very large values at a power of ten and recursing on the halves.
    """
    if n < 0:
        return "-" + _int_str(-n)
    if n.bit_length() <= 10000:  # ~3000 digits, safely below the guard
        return str(n)
    half = _digits10(n) // 2
    hi, lo = divmod(n, 10**half)
    return _int_str(hi) + _int_str(lo).zfill(half)


def _digits10(n: int) -> int:
    """Decimal digit count of a positive integer, without str() conversion.

    str() on very large integers is both slow and, past the interpreter's
    conversion guard, a hard error; bit_length plus a two-sided correction
    gives the exact count at any size.
    """
    d = max(1, (n.bit_length() * 30103) // 100000)
    while 10**d <= n:
        d += 1
    while d > 1 and 10 ** (d - 1) > n:
        d -= 1
    return d


def decimal_approx(q: RationalLike, sig: int = 6, mode: str = "nearest") -> str:
    """Scientific-notation decimal approximation of a rational.

    Unlike ``float()`` this never overflows or silently flushes to zero, which
    matters for the certificate margins (their exact values can have
    thousand-digit numerators).  ``mode`` controls the rounding direction of
    the mantissa: ``"floor"`` rounds toward zero (a sound lower bound on the
    magnitude), ``"ceil"`` away from zero, ``"nearest"`` to nearest.
    """
    if sig < 1:
        raise ValueError("sig must be >= 1")
    if mode not in ("floor", "ceil", "nearest"):
        raise ValueError(f"unknown rounding mode: {mode!r}")
    q = Fraction(q)
    if q == 0:
        return "0"
    sign = "-" if q < 0 else ""
    a = -q if q < 0 else q
    num, den = a.numerator, a.denominator
    # exponent e with 10^e <= a < 10^(e+1)
    e = _digits10(num) - _digits10(den)
    if 10 ** max(e, 0) * den > num * 10 ** max(-e, 0):
        e -= 1
    # mantissa digits: d = round(a * 10^(sig-1-e)) by the requested mode
    shift = sig - 1 - e
    num_s = num * 10 ** max(shift, 0)
    den_s = den * 10 ** max(-shift, 0)
    if mode == "floor":
        d = num_s // den_s
    elif mode == "ceil":
        d = -((-num_s) // den_s)
    else:
        d = (2 * num_s + den_s) // (2 * den_s)
    if d >= 10**sig:  # rounding bumped into the next decade
        d //= 10
        e += 1
    digits = str(d).rjust(sig, "0")
    mantissa = digits[0] if sig == 1 else f"{digits[0]}.{digits[1:]}"
    return f"{sign}{mantissa}e{e:+03d}"


@dataclass(frozen=True)
class ComplexRational:
    """A complex number with exact rational real and imaginary parts."""

    re: Fraction
    im: Fraction

    @classmethod
    def of(cls, re: RationalLike = 0, im: RationalLike = 0) -> "ComplexRational":
        return cls(Fraction(re), Fraction(im))

    @staticmethod
    def _coerce(value) -> "ComplexRational | None":
        if isinstance(value, ComplexRational):
            return value
        if isinstance(value, (int, Fraction)):
            return ComplexRational(Fraction(value), Fraction(0))
        return None

    def __add__(self, other):
        w = self._coerce(other)
        if w is None:
            return NotImplemented
        return ComplexRational(self.re + w.re, self.im + w.im)

    __radd__ = __add__

    def __sub__(self, other):
        w = self._coerce(other)
        if w is None:
            return NotImplemented
        return ComplexRational(self.re - w.re, self.im - w.im)

    def __rsub__(self, other):
        w = self._coerce(other)
        if w is None:
            return NotImplemented
        return ComplexRational(w.re - self.re, w.im - self.im)

    def __mul__(self, other):
        w = self._coerce(other)
        if w is None:
            return NotImplemented
        return ComplexRational(
            self.re * w.re - self.im * w.im,
            self.re * w.im + self.im * w.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        w = self._coerce(other)
        if w is None:
            return NotImplemented
        d = w.abs2()
        if d == 0:
            raise ZeroDivisionError("division by complex zero")
        return ComplexRational(
            (self.re * w.re + self.im * w.im) / d,
            (self.im * w.re - self.re * w.im) / d,
        )

    def __neg__(self):
        return ComplexRational(-self.re, -self.im)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = ComplexRational(Fraction(1), Fraction(0))
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conjugate(self) -> "ComplexRational":
        return ComplexRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, exact."""
        return self.re * self.re + self.im * self.im

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __complex__(self) -> complex:
        return float(self.re) + 1j * float(self.im)

    def __str__(self) -> str:
        return f"({self.re}) + ({self.im})i"

    def to_json(self) -> dict:
        return {"re": format_rational(self.re), "im": format_rational(self.im)}

    @classmethod
    def from_json(cls, obj: dict) -> "ComplexRational":
        return cls(parse_rational(obj["re"]), parse_rational(obj["im"]))


CZERO = ComplexRational.of(0)
CONE = ComplexRational.of(1)


def _normalize(coeffs: Iterable) -> tuple:
    out = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


class Poly:
    """Dense univariate polynomial over the rationals.

    Coefficients are stored low degree first with no trailing zeros; the zero
    polynomial has an empty coefficient tuple and degree -1.
    """

    def __init__(self, coeffs: Iterable = ()):  # noqa: D401
        self._coeffs = _normalize(coeffs)
        self._scaled_cache = None

    @classmethod
    def zero(cls) -> "Poly":
        return cls(())

    @classmethod
    def one(cls) -> "Poly":
        return cls((1,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def constant(cls, value: RationalLike) -> "Poly":
        return cls((Fraction(value),))

    @classmethod
    def monomial(cls, power: int, coeff: RationalLike = 1) -> "Poly":
        if power < 0:
            raise ValueError("monomial power must be nonnegative")
        return cls((0,) * power + (Fraction(coeff),))

    @property
    def coeffs(self) -> tuple:
        return self._coeffs

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def leading(self) -> Fraction:
        if not self._coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self._coeffs[-1]

    @property
    def trailing_order(self) -> int:
        """Smallest degree with a nonzero coefficient (vanishing order at 0)."""
        if not self._coeffs:
            raise ValueError("zero polynomial has no vanishing order")
        for i, c in enumerate(self._coeffs):
            if c != 0:
                return i
        raise AssertionError("unreachable: normalized nonzero poly")

    def coeff(self, i: int) -> Fraction:
        if 0 <= i < len(self._coeffs):
            return self._coeffs[i]
        return Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self._coeffs == other._coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._coeffs, other._coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __neg__(self):
        return Poly(tuple(-c for c in self._coeffs))

    @staticmethod
    def _coerce(value) -> "Poly | None":
        if isinstance(value, Poly):
            return value
        if isinstance(value, (int, Fraction)):
            return Poly((value,))
        return None

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Poly.zero()
        # Integer convolution over common denominators: avoids a gcd per
        # coefficient operation, which dominates at large operand sizes.
        a_ints, a_den = self.scaled()
        b_ints, b_den = other.scaled()
        out = [0] * (len(a_ints) + len(b_ints) - 1)
        for i, ai in enumerate(a_ints):
            if ai:
                for j, bj in enumerate(b_ints):
                    if bj:
                        out[i + j] += ai * bj
        den = a_den * b_den
        return Poly(tuple(Fraction(c, den) for c in out))

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise ValueError("negative polynomial power")
        result = Poly.one()
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def __divmod__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.degree < other.degree:
            return Poly.zero(), self
        rem = list(self._coeffs)
        db = other.degree
        lead = other.leading
        quot = [Fraction(0)] * (len(rem) - db)
        for i in range(len(rem) - db - 1, -1, -1):
            factor = rem[i + db] / lead
            if factor:
                quot[i] = factor
                for j, c in enumerate(other._coeffs):
                    rem[i + j] -= factor * c
        return Poly(quot), Poly(rem[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __call__(self, z):
        """Evaluate by Horner's rule at a rational or complex-rational point."""
        if isinstance(z, ComplexRational):
            acc = CZERO
            for c in reversed(self._coeffs):
                acc = acc * z + c
            return acc
        zq = Fraction(z)
        acc = Fraction(0)
        for c in reversed(self._coeffs):
            acc = acc * zq + c
        return acc

    def scaled(self) -> tuple:
        """Coefficients as ``(integers, common_denominator)``, cached."""
        if self._scaled_cache is None:
            if not self._coeffs:
                self._scaled_cache = ((), 1)
            else:
                den = math.lcm(*(c.denominator for c in self._coeffs))
                ints = tuple(c.numerator * (den // c.denominator) for c in self._coeffs)
                self._scaled_cache = (ints, den)
        return self._scaled_cache

    def map_variable_negated(self) -> "Poly":
        """The polynomial q with q(z) = p(-z) for all z."""
        return Poly(tuple(c if i % 2 == 0 else -c for i, c in enumerate(self._coeffs)))

    def __repr__(self) -> str:
        if self.is_zero:
            return "Poly(0)"
        parts = []
        for i, c in enumerate(self._coeffs):
            if c:
                parts.append(f"({c})*z^{i}" if i else f"({c})")
        return "Poly(" + " + ".join(parts) + ")"

    def to_json(self) -> list:
        return [format_rational(c) for c in self._coeffs]

    @classmethod
    def from_json(cls, items: Sequence[str]) -> "Poly":
        return cls(tuple(parse_rational(s) for s in items))


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor by the Euclidean algorithm.

    Raises ValueError when both arguments are zero.
    """
    if a.is_zero and b.is_zero:
        raise ValueError("gcd of two zero polynomials is undefined")
    while not b.is_zero:
        a, b = b, a % b
    return Poly(tuple(c / a.leading for c in a.coeffs))


def eval_scaled(poly: Poly, num_re: int, num_im: int, den: int) -> tuple:
    """Exact evaluation of ``poly`` at ``(num_re + i*num_im)/den``.

    Returns an unreduced triple ``(re_num, im_num, common_den)`` of integers
    with value ``(re_num + i*im_num)/common_den``.  ``den`` must be positive.
    No gcd is computed; callers compare results by cross-multiplication.
    """
    if den <= 0:
        raise ValueError("den must be positive")
    nums, cden = poly.scaled()
    deg = len(nums) - 1
    if deg < 0:
        return 0, 0, 1
    pows = [1] * (deg + 1)
    for i in range(1, deg + 1):
        pows[i] = pows[i - 1] * den
    acc_re, acc_im = nums[deg], 0
    for i in range(deg - 1, -1, -1):
        acc_re, acc_im = (
            acc_re * num_re - acc_im * num_im,
            acc_re * num_im + acc_im * num_re,
        )
        acc_re += nums[i] * pows[deg - i]
    return acc_re, acc_im, cden * pows[deg]


def scaled_to_complex(triple: tuple) -> ComplexRational:
    re_num, im_num, den = triple
    return ComplexRational(Fraction(re_num, den), Fraction(im_num, den))


def scaled_abs2(triple: tuple) -> tuple:
    """Squared modulus of an ``eval_scaled`` triple as ``(num, den)``, unreduced."""
    re_num, im_num, den = triple
    return re_num * re_num + im_num * im_num, den * den
