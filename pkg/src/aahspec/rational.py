"""Exact continued-fraction arithmetic for the flux parameter.

Expansions are computed with Python integers throughout, so convergent
denominators of any size are exact. Quadratic irrationals such as the golden
mean are expanded symbolically from their surd form; float inputs are expanded
from an uncertainty interval and carry the depth up to which the terms are
certified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

import mpmath

__all__ = [
    "QuadraticSurd",
    "GOLDEN",
    "SQRT2",
    "ContinuedFraction",
    "Convergent",
    "cf_expand",
    "convergents",
    "diophantine_error_bound",
    "resolve_alpha",
    "alpha_value",
    "convergents_of",
]


@dataclass(frozen=True)
class QuadraticSurd:
    """The real number ``(P + sqrt(D)) / Q`` with integer ``P, D, Q``."""

    P: int
    D: int
    Q: int
    name: str = ""

    def __post_init__(self):
        if self.Q <= 0:
            raise ValueError("Q must be positive")
        r = math.isqrt(self.D)
        if self.D < 0 or r * r == self.D:
            raise ValueError("D must be a positive non-square integer")

    def mpf(self, dps=50):
        with mpmath.workdps(dps):
            return (self.P + mpmath.sqrt(self.D)) / self.Q

    def __float__(self):
        return float(self.mpf(30))


GOLDEN = QuadraticSurd(-1, 5, 2, "golden")
SQRT2 = QuadraticSurd(0, 2, 1, "sqrt2")

_NAMED = {
    "golden": GOLDEN,
    "golden_mean": GOLDEN,
    "sqrt2": SQRT2,
}

AlphaLike = Union[int, Fraction, float, str, QuadraticSurd]


@dataclass(frozen=True)
class ContinuedFraction:
    """Terms ``[a0; a1, a2, ...]`` of a (possibly truncated) expansion.

    Attributes
    ----------
    terms : tuple of int
        ``a0`` may be any integer, all later terms are ``>= 1``.
    source : str
        ``"exact-rational"``, ``"symbolic-quadratic"`` or ``"float"``.
    certified_depth : int or None
        For float sources, the number of leading terms that are identical for
        every real number inside the declared precision interval. ``None``
        for exact sources.
    terminated : bool
        True when the expansion of an exact rational ran to completion.
    """

    terms: tuple
    source: str = "exact-rational"
    certified_depth: int | None = None
    terminated: bool = False

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ValueError("a continued fraction needs at least one term")
        object.__setattr__(self, "terms", tuple(int(a) for a in self.terms))
        if any(a < 1 for a in self.terms[1:]):
            raise ValueError("terms beyond index 0 must be >= 1")

    def __len__(self):
        return len(self.terms)

    def value(self) -> Fraction:
        """Exact rational value of the (truncated) expansion."""
        c = convergents(self)[-1]
        return Fraction(c.p, c.q)


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int
    index: int = 0

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("convergent denominator must be positive")

    def __float__(self):
        return self.p / self.q

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


def _expand_rational(x: Fraction, depth: int) -> tuple[list[int], bool]:
    num, den = x.numerator, x.denominator
    terms = []
    while len(terms) < depth:
        a, r = divmod(num, den)
        terms.append(a)
        if r == 0:
            return terms, True
        num, den = den, r
    return terms, False


def _expand_surd(s: QuadraticSurd, depth: int) -> list[int]:
    # Standard recurrence for (P + sqrt(D)) / Q; needs Q | (D - P^2).
    P, D, Q = s.P, s.D, s.Q
    if (D - P * P) % Q:
        P, D, Q = P * Q, D * Q * Q, Q * Q
    r = math.isqrt(D)
    terms = []
    for _ in range(depth):
        # Q > 0 and sqrt(D) irrational, so floor((P + sqrt D)/Q) == (P + isqrt D) // Q
        a = (P + r) // Q
        terms.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return terms


def _common_prefix(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def resolve_alpha(alpha: AlphaLike):
    """Map names like ``"golden"`` to their exact objects; pass others through."""
    if isinstance(alpha, str):
        key = alpha.strip().lower()
        if key in _NAMED:
            return _NAMED[key]
        if "/" in key:
            return Fraction(key)
        try:
            return Fraction(int(key))
        except ValueError:
            return float(key)
    return alpha


def cf_expand(alpha: AlphaLike, depth: int, precision: float | None = None) -> ContinuedFraction:
    """Continued-fraction expansion of ``alpha`` to ``depth`` terms.

    Parameters
    ----------
    alpha : int, Fraction, QuadraticSurd, str or float
        Exact rationals expand by the Euclidean algorithm and stop when the
        expansion terminates. Named constants (``"golden"``, ``"sqrt2"``) and
        :class:`QuadraticSurd` values expand exactly. Floats are treated as
        the interval ``alpha +- precision``.
    depth : int
        Maximum number of terms.
    precision : float, optional
        Absolute uncertainty of a float input. Defaults to one unit in the
        last place of ``alpha``.

    Returns
    -------
    ContinuedFraction
        For floats the result is cut at the certified depth, which is
        recorded in ``certified_depth``.

    Examples
    --------
    >>> cf_expand("sqrt2", 4).terms
    (1, 2, 2, 2)
    >>> cf_expand(Fraction(7, 5), 10).terms
    (1, 2, 2)
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    alpha = resolve_alpha(alpha)
    if isinstance(alpha, QuadraticSurd):
        return ContinuedFraction(tuple(_expand_surd(alpha, depth)), "symbolic-quadratic")
    if isinstance(alpha, (int, Rational)) and not isinstance(alpha, bool):
        terms, done = _expand_rational(Fraction(alpha), depth)
        return ContinuedFraction(tuple(terms), "exact-rational", terminated=done)
    if isinstance(alpha, float):
        if not math.isfinite(alpha):
            raise ValueError("cannot expand a non-finite float")
        if precision is None:
            precision = math.ulp(alpha)
        lo, hi = Fraction(alpha) - Fraction(precision), Fraction(alpha) + Fraction(precision)
        t_lo, _ = _expand_rational(lo, depth + 1)
        t_hi, _ = _expand_rational(hi, depth + 1)
        n = _common_prefix(t_lo, t_hi)
        # The last shared term may still be incomplete in one endpoint's expansion.
        if n == len(t_lo) or n == len(t_hi):
            n -= 1
        n = max(min(n, depth), 1)
        terms = tuple(t_lo[:n])
        return ContinuedFraction(terms, "float", certified_depth=n)
    raise TypeError(f"unsupported alpha type {type(alpha).__name__}")


def convergents(cf: ContinuedFraction) -> list[Convergent]:
    """All convergents ``p_n/q_n`` of ``cf`` from the integer recurrence."""
    p_prev, q_prev = 1, 0
    p, q = cf.terms[0], 1
    out = [Convergent(p, q, 0)]
    for n, a in enumerate(cf.terms[1:], start=1):
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append(Convergent(p, q, n))
    return out


def convergents_of(alpha: AlphaLike, q_max: int | None = None, depth: int = 64) -> list[Convergent]:
    """Convergents of ``alpha`` with denominator at most ``q_max``."""
    cs = convergents(cf_expand(alpha, depth))
    if q_max is not None:
        cs = [c for c in cs if c.q <= q_max]
    return cs


def diophantine_error_bound(q: int) -> float:
    """``1 / (sqrt(5) q^2)``, the worst-case convergent error for Diophantine alpha."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return 1.0 / (math.sqrt(5.0) * q * q)


def alpha_value(alpha: AlphaLike, dps: int = 50):
    """High-precision value of ``alpha`` as an ``mpmath.mpf``."""
    alpha = resolve_alpha(alpha)
    with mpmath.workdps(dps):
        if isinstance(alpha, QuadraticSurd):
            return alpha.mpf(dps)
        if isinstance(alpha, (int, Rational)):
            a = Fraction(alpha)
            return mpmath.mpf(a.numerator) / a.denominator
        return mpmath.mpf(alpha)
