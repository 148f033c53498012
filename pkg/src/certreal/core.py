"""Exact rationals, enclosures, function descriptors, and verdicts.

Everything in this module is an immutable value; all operations are pure.
Certified computations use `fractions.Fraction` exclusively.  Floats are
rejected at the boundary: callers must convert explicitly (a float is a
binary approximation, and silently promoting it would launder its error
into a "certified" result).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

Rational = Fraction

RationalLike = Union[Fraction, int, str]


def to_rational(value: RationalLike) -> Fraction:
    """Coerce int / "p/q" / decimal string to an exact Fraction.

    Floats are refused: pass a string (e.g. "1e-3") or a Fraction instead.
    """
    if isinstance(value, float):
        raise TypeError(
            "refusing to coerce float %r on a certified path; "
            "pass a Fraction or a decimal string" % (value,)
        )
    return Fraction(value)


# --- exact field arithmetic (backed by fractions.Fraction) ----------------

def rat_add(a: RationalLike, b: RationalLike) -> Fraction:
    return to_rational(a) + to_rational(b)


def rat_mul(a: RationalLike, b: RationalLike) -> Fraction:
    return to_rational(a) * to_rational(b)


def rat_cmp(a: RationalLike, b: RationalLike) -> int:
    """Three-way comparison: -1, 0 or +1."""
    a, b = to_rational(a), to_rational(b)
    return (a > b) - (a < b)


def decimal_string(value: Fraction, digits: int) -> str:
    """Round-toward-zero decimal rendering with `digits` fractional digits."""
    sign = "-" if value < 0 else ""
    value = abs(value)
    scaled = (value.numerator * 10**digits) // value.denominator
    whole, frac = divmod(scaled, 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{str(frac).zfill(digits)}"


@dataclass(frozen=True)
class Enclosure:
    """An ordered pair [lo, hi] of rationals bracketing a real value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", to_rational(self.lo))
        object.__setattr__(self, "hi", to_rational(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"enclosure endpoints out of order: {self.lo} > {self.hi}")

    @classmethod
    def point(cls, value: RationalLike) -> "Enclosure":
        value = to_rational(value)
        return cls(value, value)

    @classmethod
    def from_midrad(cls, mid: RationalLike, rad: RationalLike) -> "Enclosure":
        mid, rad = to_rational(mid), to_rational(rad)
        if rad < 0:
            raise ValueError("radius must be nonnegative")
        return cls(mid - rad, mid + rad)

    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, other: Union["Enclosure", RationalLike]) -> bool:
        if isinstance(other, Enclosure):
            return self.lo <= other.lo and other.hi <= self.hi
        other = to_rational(other)
        return self.lo <= other <= self.hi

    def strictly_positive(self) -> bool:
        return self.lo > 0

    def strictly_negative(self) -> bool:
        return self.hi < 0

    def intersect(self, other: "Enclosure") -> "Enclosure":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError(f"disjoint enclosures: {self} and {other}")
        return Enclosure(lo, hi)

    def hull(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen(self, amount: RationalLike) -> "Enclosure":
        amount = to_rational(amount)
        if amount < 0:
            raise ValueError("widen amount must be nonnegative")
        return Enclosure(self.lo - amount, self.hi + amount)

    def __add__(self, other: Union["Enclosure", RationalLike]) -> "Enclosure":
        if not isinstance(other, Enclosure):
            other = Enclosure.point(other)
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other: Union["Enclosure", RationalLike]) -> "Enclosure":
        if not isinstance(other, Enclosure):
            other = Enclosure.point(other)
        return self + (-other)

    def __rsub__(self, other: RationalLike) -> "Enclosure":
        return Enclosure.point(other) - self

    def scale(self, k: RationalLike) -> "Enclosure":
        k = to_rational(k)
        if k >= 0:
            return Enclosure(self.lo * k, self.hi * k)
        return Enclosure(self.hi * k, self.lo * k)

    def times(self, other: "Enclosure") -> "Enclosure":
        """Product enclosure, sound for all sign combinations."""
        products = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ]
        return Enclosure(min(products), max(products))

    def reciprocal(self) -> "Enclosure":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError(f"enclosure {self} straddles zero")
        return Enclosure(1 / self.hi, 1 / self.lo)

    def decimal(self, digits: int = 12) -> str:
        return "[%s, %s]" % (
            decimal_string(self.lo, digits),
            decimal_string(self.hi, digits),
        )

    def __str__(self) -> str:
        return self.decimal()


def enclosure_combine(a: Enclosure, b: Union[Enclosure, RationalLike], op: str) -> Enclosure:
    """Combine enclosures; the result contains op(x, y) for all x in a, y in b.

    op is one of "add", "sub", "mul-by-nonneg-scalar" (b a nonnegative
    rational, or a degenerate enclosure of one).
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul-by-nonneg-scalar":
        k = b.lo if isinstance(b, Enclosure) else to_rational(b)
        if isinstance(b, Enclosure) and b.lo != b.hi:
            raise ValueError("scalar operand must be degenerate")
        if k < 0:
            raise ValueError("scalar must be nonnegative")
        return a.scale(k)
    raise ValueError(f"unknown op {op!r}")


class Status(Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    """Three-valued convergence result with a named certificate.

    Invariants: a decisive status carries a certificate; a value enclosure
    is only present on CONVERGES.
    """

    status: Status
    certificate: Optional[object] = None
    value: Optional[Enclosure] = None
    trace: tuple = ()

    def __post_init__(self) -> None:
        if self.status in (Status.CONVERGES, Status.DIVERGES) and self.certificate is None:
            raise ValueError(f"{self.status.value} verdict requires a certificate")
        if self.value is not None and self.status is not Status.CONVERGES:
            raise ValueError("value enclosure only allowed on a Converges verdict")


# --- function descriptors -------------------------------------------------

# A monotone piece (lo, hi, direction); None endpoints mean unbounded.
MonotonePiece = tuple[Optional[Fraction], Optional[Fraction], str]

_DIRECTIONS = ("increasing", "decreasing", "constant")


def _norm_pieces(pieces) -> Optional[tuple[MonotonePiece, ...]]:
    if pieces is None:
        return None
    out = []
    for lo, hi, direction in pieces:
        if direction not in _DIRECTIONS:
            raise ValueError(f"bad direction {direction!r}")
        out.append(
            (
                None if lo is None else to_rational(lo),
                None if hi is None else to_rational(hi),
                direction,
            )
        )
    return tuple(out)


@dataclass(frozen=True)
class FnDescriptor:
    """A real function: an evaluation oracle plus structural metadata.

    Metadata claims (monotonicity, Lipschitz constant, bound, ...) are the
    caller's contract; they are trusted, not verified.  Operations that
    rely on a claim state so in their preconditions.  `spot_check_metadata`
    offers a debug-mode sanity scan.

    Evaluation: `eval_rat` for exactly rational-valued functions,
    `eval_enc(x, digits)` for functions only available as enclosures of
    width <= 10**-digits.  At least one must be present unless the
    descriptor is darboux-only (e.g. the rational-indicator function,
    which is used solely through its per-interval inf/sup rule).
    """

    name: str = ""
    eval_rat: Optional[Callable[[Fraction], Fraction]] = None
    eval_enc: Optional[Callable[[Fraction, int], Enclosure]] = None
    monotone: Optional[str] = None
    monotone_pieces: Optional[tuple[MonotonePiece, ...]] = None
    lipschitz: Optional[Fraction] = None
    bound: Optional[Fraction] = None
    smoothness: Optional[float] = None
    range_rule: Optional[Callable[[Fraction, Fraction], tuple[Fraction, Fraction]]] = None
    step_pieces: Optional[tuple[tuple[Fraction, Fraction, Fraction], ...]] = None
    point_values: tuple[tuple[Fraction, Fraction], ...] = ()
    breakpoints: tuple[Fraction, ...] = ()
    poly_coeffs: Optional[tuple[Fraction, ...]] = None
    derivative: Optional["FnDescriptor"] = None
    antiderivative: Optional["FnDescriptor"] = None
    darboux_only: bool = False

    def __post_init__(self) -> None:
        if self.monotone is not None and self.monotone not in _DIRECTIONS:
            raise ValueError(f"bad monotone claim {self.monotone!r}")
        object.__setattr__(self, "monotone_pieces", _norm_pieces(self.monotone_pieces))
        if self.lipschitz is not None:
            object.__setattr__(self, "lipschitz", to_rational(self.lipschitz))
        if self.bound is not None:
            object.__setattr__(self, "bound", to_rational(self.bound))
        object.__setattr__(self, "breakpoints", tuple(to_rational(b) for b in self.breakpoints))
        if self.eval_rat is None and self.eval_enc is None and not self.darboux_only:
            raise ValueError("descriptor needs an evaluation oracle (or darboux_only)")

    def value_at(self, x: RationalLike) -> Fraction:
        """Exact value; requires a rational-valued oracle."""
        x = to_rational(x)
        if self.eval_rat is None:
            raise ValueError(f"{self.name or 'function'} has no exact rational oracle")
        return to_rational(self.eval_rat(x))

    def enclosure_at(self, x: RationalLike, digits: int = 30) -> Enclosure:
        """Enclosure of f(x) of width <= 10**-digits (exact oracles: width 0)."""
        x = to_rational(x)
        if self.eval_rat is not None:
            return Enclosure.point(self.eval_rat(x))
        if self.eval_enc is not None:
            return self.eval_enc(x, digits)
        raise ValueError(f"{self.name or 'function'} is darboux-only; no point oracle")

    def with_meta(self, **changes) -> "FnDescriptor":
        return replace(self, **changes)


def _poly_eval(coeffs: tuple[Fraction, ...], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _quadratic_rational_roots(c0: Fraction, c1: Fraction, c2: Fraction):
    """Rational roots of c2 x^2 + c1 x + c0, or None if irrational."""
    import math

    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        return ()
    num_root = math.isqrt(disc.numerator)
    den_root = math.isqrt(disc.denominator)
    if num_root * num_root != disc.numerator or den_root * den_root != disc.denominator:
        return None
    root = Fraction(num_root, den_root)
    lo = (-c1 - root) / (2 * c2)
    hi = (-c1 + root) / (2 * c2)
    return (lo,) if lo == hi else tuple(sorted((lo, hi)))


def _poly_monotone_pieces(coeffs: tuple[Fraction, ...]):
    """Exact monotone pieces from the derivative's rational roots (degree of
    the derivative at most 2, or no real roots); None when undecidable."""
    deriv = tuple(coeffs[i] * i for i in range(1, len(coeffs)))
    while deriv and deriv[-1] == 0:
        deriv = deriv[:-1]
    if not deriv:
        direction = "constant"
        return ((None, None, direction),)

    def sign_between(lo, hi) -> str:
        # Derivative has constant sign on (lo, hi); probe one interior point.
        if lo is None and hi is None:
            probe = Fraction(0)
        elif lo is None:
            probe = hi - 1
        elif hi is None:
            probe = lo + 1
        else:
            probe = (lo + hi) / 2
        value = _poly_eval(deriv, probe)
        if value > 0:
            return "increasing"
        if value < 0:
            return "decreasing"
        return "constant"

    if len(deriv) == 1:
        return ((None, None, "increasing" if deriv[0] > 0 else "decreasing"),)
    # Even powers only with one-signed coefficients: globally one-signed.
    if all(c == 0 for c in deriv[1::2]) and deriv[0] != 0:
        evens = deriv[0::2]
        if all(c >= 0 for c in evens):
            return ((None, None, "increasing"),)
        if all(c <= 0 for c in evens):
            return ((None, None, "decreasing"),)
    if len(deriv) == 2:
        roots: Optional[tuple] = (-deriv[0] / deriv[1],)
    elif len(deriv) == 3:
        roots = _quadratic_rational_roots(deriv[0], deriv[1], deriv[2])
    else:
        return None
    if roots is None:
        return None
    cuts = [None, *roots, None]
    return tuple(
        (cuts[i], cuts[i + 1], sign_between(cuts[i], cuts[i + 1]))
        for i in range(len(cuts) - 1)
    )


def poly_descriptor(
    coeffs: Sequence[RationalLike],
    name: str = "",
    bound: Optional[RationalLike] = None,
    _with_children: bool = True,
) -> FnDescriptor:
    """Descriptor for a rational-coefficient polynomial (ascending coeffs).

    Ships exact evaluation, monotone pieces when the derivative's roots are
    rational, the derivative and an antiderivative (constant 0), so both
    Darboux machinery and root finding get certified metadata for free.
    """
    cs = tuple(to_rational(c) for c in coeffs)
    while len(cs) > 1 and cs[-1] == 0:
        cs = cs[:-1]
    derivative = antiderivative = None
    if _with_children and len(cs) > 1:
        derivative = poly_descriptor(
            tuple(cs[i] * i for i in range(1, len(cs))),
            name=f"d/dx {name}" if name else "",
        )
    if _with_children:
        anti = (Fraction(0),) + tuple(c / (i + 1) for i, c in enumerate(cs))
        antiderivative = poly_descriptor(anti, _with_children=False)
    return FnDescriptor(
        name=name or "poly",
        eval_rat=lambda x, _cs=cs: _poly_eval(_cs, x),
        monotone_pieces=_poly_monotone_pieces(cs),
        poly_coeffs=cs,
        bound=bound,
        smoothness=float("inf"),
        derivative=derivative,
        antiderivative=antiderivative,
    )


def spot_check_metadata(
    f: FnDescriptor,
    lo: RationalLike,
    hi: RationalLike,
    samples: int = 64,
    seed: int = 0,
    digits: int = 20,
) -> list[str]:
    """Debug mode: probe monotone / Lipschitz / bound claims on a random grid.

    Returns a list of human-readable violation reports (empty = no violation
    found).  A clean run is evidence, not proof; the claims stay the
    caller's contract.
    """
    lo, hi = to_rational(lo), to_rational(hi)
    if hi <= lo:
        raise ValueError("need lo < hi")
    rng = random.Random(seed)
    span = hi - lo
    xs = sorted(lo + span * Fraction(rng.randrange(10**9), 10**9) for _ in range(samples))
    problems: list[str] = []
    vals = [f.enclosure_at(x, digits) for x in xs]
    for (x1, v1), (x2, v2) in zip(zip(xs, vals), zip(xs[1:], vals[1:])):
        if f.monotone == "increasing" and v1.lo > v2.hi:
            problems.append(f"monotone increasing violated between {x1} and {x2}")
        if f.monotone == "decreasing" and v1.hi < v2.lo:
            problems.append(f"monotone decreasing violated between {x1} and {x2}")
        if f.lipschitz is not None:
            gap = abs(v1.midpoint() - v2.midpoint()) - v1.width() - v2.width()
            if gap > f.lipschitz * (x2 - x1):
                problems.append(f"Lipschitz {f.lipschitz} violated between {x1} and {x2}")
    if f.bound is not None:
        for x, v in zip(xs, vals):
            if abs(v.midpoint()) - v.width() > f.bound:
                problems.append(f"bound {f.bound} violated at {x}")
    return problems


# --- exact root bracketing -------------------------------------------------

def integer_nth_root(x: int, n: int) -> int:
    """Largest r with r**n <= x (x >= 0, n >= 1).  Exact integer Newton."""
    if x < 0 or n < 1:
        raise ValueError("need x >= 0 and n >= 1")
    if x == 0:
        return 0
    if n == 1:
        return x
    r = 1 << (x.bit_length() // n + 1)
    while True:
        if r**n <= x < (r + 1) ** n:
            return r
        r = ((n - 1) * r + x // r ** (n - 1)) // n


def sqrt_enclosure(q: RationalLike, digits: int = 12) -> Enclosure:
    """Enclosure of sqrt(q) of width <= 10**-digits, via integer sqrt.

    This is decimal truncation: the lower endpoints reproduce the familiar
    1.4, 1.41, 1.414, ... approximations of sqrt(2).
    """
    import math

    q = to_rational(q)
    if q < 0:
        raise ValueError("sqrt of a negative rational")
    if q == 0:
        return Enclosure.point(0)
    scale = 10**digits
    s = math.isqrt(q.numerator * q.denominator * scale * scale)
    den = q.denominator * scale
    if Fraction(s, den) ** 2 == q:
        return Enclosure.point(Fraction(s, den))
    return Enclosure(Fraction(s, den), Fraction(s + 1, den))


def nth_root_enclosure(q: RationalLike, n: int, digits: int = 12) -> Enclosure:
    """Enclosure of q**(1/n) of width <= 10**-digits (q >= 0, n >= 1)."""
    q = to_rational(q)
    if q < 0:
        raise ValueError("even roots of negatives are undefined here")
    if q == 0:
        return Enclosure.point(0)
    scale = 10**digits
    s = integer_nth_root(q.numerator * q.denominator ** (n - 1) * scale**n, n)
    den = q.denominator * scale
    if Fraction(s, den) ** n == q:
        return Enclosure.point(Fraction(s, den))
    return Enclosure(Fraction(s, den), Fraction(s + 1, den))


def outward_round(x: RationalLike, significant: int = 40) -> tuple[Fraction, Fraction]:
    """Bracket x >= 0 between grid rationals with about `significant`
    significant digits (lo <= x <= hi).  Keeps exact-arithmetic costs
    bounded when only an enclosure of a huge-denominator value is needed."""
    import math

    x = to_rational(x)
    if x < 0:
        raise ValueError("outward_round expects a nonnegative value")
    if x == 0:
        return Fraction(0), Fraction(0)
    magnitude = math.floor(math.log10(x.numerator) - math.log10(x.denominator))
    shift = significant - magnitude
    scale = 10**shift if shift >= 0 else Fraction(1, 10**-shift)
    scaled = x * scale
    lo = Fraction(scaled.numerator // scaled.denominator)
    hi = lo if scaled == lo else lo + 1
    return lo / scale, hi / scale


def rational_power_enclosure(x: RationalLike, exponent: RationalLike, digits: int = 12) -> Enclosure:
    """Enclosure of x**exponent for x > 0 and rational exponent p/q."""
    x, exponent = to_rational(x), to_rational(exponent)
    if x <= 0:
        raise ValueError("base must be positive")
    powered = x**exponent.numerator
    if exponent.denominator == 1:
        return Enclosure.point(powered)
    return nth_root_enclosure(powered, exponent.denominator, digits)


# --- certified elementary constants / functions (dispatch) ----------------

_APPROX_UNARY = ("sqrt", "exp", "ln", "sin", "cos")


def approx_real(name: str, arg: Optional[RationalLike] = None, digits: int = 12) -> Enclosure:
    """Enclosure of width <= 10**-digits for a named elementary quantity.

    name is one of "sqrt", "exp", "ln", "sin", "cos" (unary, rational
    argument) or "pi" (no argument).  The heavy lifting lives in
    `certreal.powerseries`; this is only the dispatch point.
    """
    from certreal import powerseries as ps  # local import: core stays leaf-light

    if digits < 1:
        raise ValueError("digits must be >= 1")
    if name == "pi":
        if arg is not None:
            raise ValueError("pi takes no argument")
        return ps.pi_enclosure(digits)
    if name not in _APPROX_UNARY:
        raise ValueError(f"unknown quantity {name!r}")
    if arg is None:
        raise ValueError(f"{name} needs an argument")
    x = to_rational(arg)
    if name == "sqrt":
        return sqrt_enclosure(x, digits)
    if name == "exp":
        return ps.exp_enclosure(x, digits)
    if name == "ln":
        return ps.ln_enclosure(x, digits)
    if name == "sin":
        return ps.sin_enclosure(x, digits)
    return ps.cos_enclosure(x, digits)
