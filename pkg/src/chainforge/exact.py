"""Exact rational scalars and dense polynomials over them.

All probabilities and expected lengths in this package are kept as
`fractions.Fraction`; floats appear only at presentation boundaries.
This module adds the wire format for rationals ("3/4", "2") and a small
dense polynomial type so expected final lengths can be carried as exact
functions of the gate success probability.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

from .errors import ModelError

# Canonical exact scalar type. Kept as an alias so call sites read as
# intent rather than as a stdlib detail.
Rational = Fraction

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(text: str) -> Fraction:
    """Parse "num/den" or "k" into a Fraction.

    Decimal and scientific notation are rejected on purpose: a string
    like "0.1" silently means 3602879701896397/36028797018963968 once it
    has been through binary floating point, and exactness is the whole
    point of this package.
    """
    if not isinstance(text, str):
        raise ModelError(f"expected a rational string, got {type(text).__name__}")
    token = text.strip()
    if not _RATIONAL_RE.match(token):
        raise ModelError(
            f"not an exact rational: {text!r} (write it as an integer or num/den, e.g. 1/2)"
        )
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelError(f"not an exact rational: {text!r} ({exc})") from None


def format_rational(value: Fraction) -> str:
    """Render a Fraction in the wire format: "num/den", or "k" when integral."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_probability(text: str) -> Fraction:
    """Parse a rational string and require it to lie in [0, 1]."""
    value = parse_rational(text)
    if not 0 <= value <= 1:
        raise ModelError(f"probability must lie in [0, 1], got {text!r}")
    return value


def as_probability(value: Fraction | int | str) -> Fraction:
    """Coerce an exact value (never a float) into a probability Fraction."""
    if isinstance(value, str):
        return parse_probability(value)
    if isinstance(value, float):
        raise ModelError(
            f"probabilities must be exact rationals, not floats (got {value!r})"
        )
    frac = Fraction(value)
    if not 0 <= frac <= 1:
        raise ModelError(f"probability must lie in [0, 1], got {value!r}")
    return frac


class Poly:
    """Dense univariate polynomial with Fraction coefficients.

    Coefficients are stored constant term first, trailing zeros
    stripped, so equal polynomials compare equal. Instances are
    immutable and hashable.
    """

    __slots__ = ("coeffs",)

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable[Fraction | int] = ()):
        items = [Fraction(c) for c in coeffs]
        while items and items[-1] == 0:
            items.pop()
        object.__setattr__(self, "coeffs", tuple(items))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def zero(cls) -> Poly:
        return cls(())

    @classmethod
    def one(cls) -> Poly:
        return cls((1,))

    @classmethod
    def constant(cls, value: Fraction | int) -> Poly:
        return cls((value,))

    @classmethod
    def x(cls) -> Poly:
        """The identity polynomial p -> p."""
        return cls((0, 1))

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def eval_at(self, point: Fraction | int) -> Fraction:
        """Evaluate exactly at a rational point (Horner scheme)."""
        point = Fraction(point)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * point + c
        return acc

    def __add__(self, other: Poly) -> Poly:
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        merged = list(a)
        for i, c in enumerate(b):
            merged[i] += c
        return Poly(merged)

    def __neg__(self) -> Poly:
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other: Poly) -> Poly:
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: Poly | Fraction | int) -> Poly:
        if isinstance(other, (Fraction, int)):
            return Poly(c * other for c in self.coeffs)
        if not isinstance(other, Poly):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Poly(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(("Poly", self.coeffs))

    def to_strings(self) -> list[str]:
        """Wire format: list of rational strings, constant term first."""
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_strings(cls, items: Iterable[str]) -> Poly:
        return cls(parse_rational(s) for s in items)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for power, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mag = format_rational(abs(c))
            if power == 0:
                body = mag
            elif power == 1:
                body = f"{mag}*p" if abs(c) != 1 else "p"
            else:
                body = f"{mag}*p^{power}" if abs(c) != 1 else f"p^{power}"
            if not terms:
                terms.append(body if c > 0 else f"-{body}")
            else:
                terms.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(terms)

    def __repr__(self) -> str:
        return f"Poly({[str(c) for c in self.coeffs]})"
