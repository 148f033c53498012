"""Partitions, Darboux/Riemann sums, certified integrals, improper integrals.

Per-interval infima/suprema are never estimated by sampling on certified
paths: they come from descriptor metadata (an exact range rule, step
pieces, monotone pieces) or, in Lipschitz mode, from conservative outer
bounds that are flagged as such.  The indicator-of-the-rationals descriptor
is the cautionary tale: sampling it anywhere yields nonsense, while its
registered range rule gives the honest pair L = 0, U = 1 forever.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from certreal.core import (
    Enclosure,
    FnDescriptor,
    RationalLike,
    Status,
    Verdict,
    rational_power_enclosure,
    to_rational,
)


@dataclass(frozen=True)
class Partition:
    """Strictly increasing points x_0 < ... < x_k partitioning [x_0, x_k]."""

    points: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        pts = tuple(to_rational(p) for p in self.points)
        if len(pts) < 2:
            raise ValueError("a partition needs at least two points")
        if any(a >= b for a, b in zip(pts, pts[1:])):
            raise ValueError("partition points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def a(self) -> Fraction:
        return self.points[0]

    @property
    def b(self) -> Fraction:
        return self.points[-1]

    def gap(self) -> Fraction:
        return max(q - p for p, q in zip(self.points, self.points[1:]))

    def intervals(self):
        return zip(self.points, self.points[1:])

    def refine(self, extra: Sequence[RationalLike]) -> "Partition":
        """Refinement by adding points (must lie inside [a, b])."""
        added = {to_rational(p) for p in extra}
        if any(p < self.a or p > self.b for p in added):
            raise ValueError("refinement points must lie inside the interval")
        return Partition(tuple(sorted(set(self.points) | added)))


def regular_partition(a: RationalLike, b: RationalLike, k: int) -> Partition:
    """Equal-gap partition of [a, b] into k subintervals."""
    a, b = to_rational(a), to_rational(b)
    if a >= b:
        raise ValueError("need a < b")
    if k < 1:
        raise ValueError("need k >= 1")
    step = (b - a) / k
    return Partition(tuple(a + i * step for i in range(k)) + (b,))


@dataclass(frozen=True)
class DarbouxPair:
    """Lower/upper Darboux sums with the per-interval (m_i, M_i) records.

    `outer` marks Lipschitz mode: the recorded bounds satisfy
    m_i <= inf f and sup f <= M_i but need not be attained, so
    lower <= true L <= integral <= true U <= upper still holds.
    """

    lower: Fraction
    upper: Fraction
    per_interval: tuple[tuple[Fraction, Fraction], ...]
    outer: bool = False

    def width(self) -> Fraction:
        return self.upper - self.lower


class MissingMetadataError(ValueError):
    """The descriptor lacks the structural claim a certified path needs."""


def _raw_bounds(f: FnDescriptor, x: Fraction, digits: int) -> tuple[Fraction, Fraction]:
    """(lower, upper) for f(x) without Enclosure overhead on exact oracles."""
    if f.eval_rat is not None:
        value = f.eval_rat(x)
        return value, value
    enc = f.enclosure_at(x, digits)
    return enc.lo, enc.hi


def _interval_bounds_monotone(
    f: FnDescriptor, lo: Fraction, hi: Fraction, digits: int
) -> tuple[Fraction, Fraction, bool]:
    """Exact inf/sup on [lo, hi] from (piecewise) monotone metadata."""
    pieces = f.monotone_pieces
    if pieces is None and f.monotone is not None:
        pieces = ((None, None, f.monotone),)
    if pieces is None:
        raise MissingMetadataError(
            f"{f.name or 'function'}: no range rule, step pieces, or monotone pieces"
        )
    cuts = {lo, hi}
    for plo, phi, _ in pieces:
        for p in (plo, phi):
            if p is not None and lo < p < hi:
                cuts.add(p)
    xs = sorted(cuts)
    los: list[Fraction] = []
    his: list[Fraction] = []
    exact = True

    def covering_direction(u: Fraction, v: Fraction) -> str:
        for plo, phi, direction in pieces:
            if (plo is None or plo <= u) and (phi is None or v <= phi):
                return direction
        raise MissingMetadataError(
            f"{f.name or 'function'}: monotone pieces do not cover [{u}, {v}]"
        )

    for u, v in zip(xs, xs[1:]):
        direction = covering_direction(u, v)
        u_lo, u_hi = _raw_bounds(f, u, digits)
        v_lo, v_hi = _raw_bounds(f, v, digits)
        if u_lo != u_hi or v_lo != v_hi:
            exact = False
        if direction == "increasing":
            los.append(u_lo)
            his.append(v_hi)
        elif direction == "decreasing":
            los.append(v_lo)
            his.append(u_hi)
        else:
            los.append(min(u_lo, v_lo))
            his.append(max(u_hi, v_hi))
    return min(los), max(his), exact


def _interval_bounds_step(f: FnDescriptor, lo: Fraction, hi: Fraction):
    values: list[Fraction] = []
    covered = Fraction(0)
    for left, right, const in f.step_pieces:
        overlap = min(right, hi) - max(left, lo)
        if overlap > 0:
            values.append(const)
            covered += overlap
    for x, v in f.point_values:
        if lo <= x <= hi:
            values.append(v)
    if covered != hi - lo:
        raise MissingMetadataError(
            f"{f.name or 'step function'}: step pieces do not cover [{lo}, {hi}]"
        )
    return min(values), max(values)


def darboux(f: FnDescriptor, partition: Partition, digits: int = 30) -> DarbouxPair:
    """Darboux lower/upper sums from structural metadata.

    Exact per-interval inf/sup for range-rule, step, and (piecewise)
    monotone descriptors; conservative outer bounds in Lipschitz mode,
    flagged by `outer=True`.  A descriptor with no usable metadata is
    refused: certified paths never fall back to sampling.
    """
    lower = upper = Fraction(0)
    records: list[tuple[Fraction, Fraction]] = []
    outer = False
    for lo, hi in partition.intervals():
        width = hi - lo
        if f.range_rule is not None:
            m, big_m = f.range_rule(lo, hi)
        elif f.step_pieces is not None:
            m, big_m = _interval_bounds_step(f, lo, hi)
        elif f.monotone_pieces is not None or f.monotone is not None:
            m, big_m, exact = _interval_bounds_monotone(f, lo, hi, digits)
            outer = outer or not exact
        elif f.lipschitz is not None:
            mid_lo, mid_hi = _raw_bounds(f, (lo + hi) / 2, digits)
            # Snap outward to a shared decimal grid: still valid outer
            # bounds, and the exact fold over many intervals stays linear
            # (unrelated denominators would make it quadratic).
            grid = 10**digits
            half_swing = f.lipschitz * width / 2
            low_scaled = (mid_lo - half_swing) * grid
            high_scaled = (mid_hi + half_swing) * grid
            m = Fraction(low_scaled.numerator // low_scaled.denominator, grid)
            big_m = Fraction(-((-high_scaled.numerator) // high_scaled.denominator), grid)
            outer = True
        else:
            raise MissingMetadataError(
                f"{f.name or 'function'}: need a range rule, step pieces, "
                "monotone metadata, or a Lipschitz constant for Darboux bounds"
            )
        records.append((m, big_m))
        lower += m * width
        upper += big_m * width
    return DarbouxPair(lower, upper, tuple(records), outer)


def riemann_sum(
    f: FnDescriptor,
    partition: Partition,
    pick: Union[str, Sequence[RationalLike]] = "left",
) -> Fraction:
    """Exact Riemann sum; pick is "left", "right", "midpoint", or explicit
    intermediate points (one per subinterval, each inside its interval)."""
    intervals = list(partition.intervals())
    if isinstance(pick, str):
        if pick == "left":
            points = [lo for lo, _ in intervals]
        elif pick == "right":
            points = [hi for _, hi in intervals]
        elif pick == "midpoint":
            points = [(lo + hi) / 2 for lo, hi in intervals]
        else:
            raise ValueError(f"unknown pick rule {pick!r}")
    else:
        points = [to_rational(p) for p in pick]
        if len(points) != len(intervals):
            raise ValueError("need exactly one intermediate point per subinterval")
        for (lo, hi), xi in zip(intervals, points):
            if not lo <= xi <= hi:
                raise ValueError(f"intermediate point {xi} outside [{lo}, {hi}]")
    return sum(
        (f.value_at(xi) * (hi - lo) for (lo, hi), xi in zip(intervals, points)),
        Fraction(0),
    )


# --- closed-form power sums (exact Darboux sums for polynomials) -----------

def _power_sum(m: int, k: int) -> Fraction:
    """Sum of i**m for i = 1..k, exactly, via the binomial recursion."""
    if k <= 0:
        return Fraction(0)
    if m == 0:
        return Fraction(k)
    from math import comb

    # (k+1)^(m+1) - 1 = sum_{j=0..m} C(m+1, j) S_j(k)
    total = Fraction((k + 1) ** (m + 1) - 1)
    for j in range(m):
        total -= comb(m + 1, j) * _power_sum(j, k)
    return total / (m + 1)


def _poly_sum_over_grid(
    coeffs: tuple[Fraction, ...], a: Fraction, step: Fraction, i_lo: int, i_hi: int
) -> Fraction:
    """Exact sum of p(a + i*step) for i in [i_lo, i_hi] via power sums."""
    from math import comb

    if i_hi < i_lo:
        return Fraction(0)
    # expand p(a + s*i) = sum_t q_t i^t
    q: dict[int, Fraction] = {}
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        for t in range(j + 1):
            q[t] = q.get(t, Fraction(0)) + c * comb(j, t) * a ** (j - t) * step**t
    total = Fraction(0)
    for t, coeff in q.items():
        if t == 0:
            s = Fraction(i_hi - i_lo + 1)
        else:
            s = _power_sum(t, i_hi) - _power_sum(t, i_lo - 1)
        total += coeff * s
    return total


def _poly_monotone_darboux_regular(
    coeffs: tuple[Fraction, ...],
    direction: str,
    a: Fraction,
    b: Fraction,
    k: int,
) -> tuple[Fraction, Fraction]:
    """(L, U) for a monotone polynomial on the regular k-partition of [a, b],
    computed in closed form (no per-point iteration)."""
    step = (b - a) / k
    left_sum = _poly_sum_over_grid(coeffs, a, step, 0, k - 1)
    right_sum = _poly_sum_over_grid(coeffs, a, step, 1, k)
    if direction == "increasing":
        return left_sum * step, right_sum * step
    if direction == "decreasing":
        return right_sum * step, left_sum * step
    value = _poly_sum_over_grid(coeffs, a, step, 0, 0)  # constant piece
    return value * step * k, value * step * k


@dataclass(frozen=True)
class IntegralResult:
    enclosure: Enclosure
    status: Status
    subintervals: int
    outer: bool = False
    method: str = "darboux"

    def width(self) -> Fraction:
        return self.enclosure.width()


def _split_at_breakpoints(f: FnDescriptor, a: Fraction, b: Fraction):
    cuts = sorted({a, b} | {p for p in f.breakpoints if a < p < b})
    return list(zip(cuts, cuts[1:]))


def _monotone_pieces_in(f: FnDescriptor, a: Fraction, b: Fraction):
    pieces = f.monotone_pieces
    if pieces is None and f.monotone is not None:
        pieces = ((None, None, f.monotone),)
    if pieces is None:
        return None
    cuts = {a, b}
    for plo, phi, _ in pieces:
        for p in (plo, phi):
            if p is not None and a < p < b:
                cuts.add(p)
    xs = sorted(cuts)
    out = []
    for u, v in zip(xs, xs[1:]):
        direction = None
        for plo, phi, d in pieces:
            if (plo is None or plo <= u) and (phi is None or v <= phi):
                direction = d
                break
        if direction is None:
            return None
        out.append((u, v, direction))
    return out


def _step_integral(f: FnDescriptor, a: Fraction, b: Fraction) -> Fraction:
    """Exact integral of a step descriptor (finitely many points never
    change an integral)."""
    total = Fraction(0)
    covered = Fraction(0)
    for left, right, const in f.step_pieces:
        lo, hi = max(left, a), min(right, b)
        if lo < hi:
            total += const * (hi - lo)
            covered += hi - lo
    if covered != b - a:
        raise MissingMetadataError(
            f"{f.name or 'step function'}: pieces do not cover [{a}, {b}]"
        )
    return total


def integrate_enclosure(
    f: FnDescriptor,
    a: RationalLike,
    b: RationalLike,
    target_width: RationalLike,
    max_doublings: int = 24,
    method: str = "auto",
    digits: Optional[int] = None,
) -> IntegralResult:
    """Two-sided integral enclosure on [a, b] with width <= target_width.

    method "darboux" doubles k on regular partitions (splitting first at
    registered breakpoints) until U - L meets the target; monotone
    polynomial pieces use closed-form power sums, so large k costs nothing.
    method "antiderivative" evaluates a registered antiderivative at the
    endpoints (fundamental theorem).  "auto" prefers the antiderivative
    when one is registered, else Darboux.  If the target is unreachable
    within the doubling cap the best pair is returned flagged Inconclusive.
    """
    a, b, target = to_rational(a), to_rational(b), to_rational(target_width)
    if a == b:
        return IntegralResult(Enclosure.point(0), Status.CONVERGES, 0, method="exact")
    if a > b:
        raise ValueError("need a <= b")
    if target <= 0:
        raise ValueError("target width must be positive")
    if method not in ("auto", "darboux", "antiderivative", "step"):
        raise ValueError(f"unknown method {method!r}")

    if f.step_pieces is not None and method in ("auto", "step"):
        return IntegralResult(
            Enclosure.point(_step_integral(f, a, b)), Status.CONVERGES, 0, method="step"
        )
    if method in ("auto", "antiderivative") and f.antiderivative is not None:
        prec = digits if digits is not None else _digits_for(target, 4)
        upper = f.antiderivative.enclosure_at(b, prec)
        lower = f.antiderivative.enclosure_at(a, prec)
        enclosure = upper - lower
        status = Status.CONVERGES if enclosure.width() <= target else Status.INCONCLUSIVE
        if status is Status.CONVERGES or method == "antiderivative":
            return IntegralResult(enclosure, status, 0, method="antiderivative")

    pieces = _split_at_breakpoints(f, a, b)
    total = Enclosure.point(0)
    outer = False
    used = 0
    status = Status.CONVERGES
    prec = digits if digits is not None else _digits_for(target / max(1, len(pieces)), 6)
    for lo, hi in pieces:
        piece_target = target * (hi - lo) / (b - a)
        piece = _integrate_piece(f, lo, hi, piece_target, max_doublings, prec)
        total = total + piece.enclosure
        outer = outer or piece.outer
        used += piece.subintervals
        if piece.status is Status.INCONCLUSIVE:
            status = Status.INCONCLUSIVE
    return IntegralResult(total, status, used, outer, method="darboux")


def _digits_for(target: Fraction, slack: int) -> int:
    import math

    if target <= 0:
        return 30
    return max(8, int(-math.floor(math.log10(float(target)))) + slack)


def _integrate_piece(
    f: FnDescriptor,
    a: Fraction,
    b: Fraction,
    target: Fraction,
    max_doublings: int,
    digits: int,
) -> IntegralResult:
    # Monotone polynomial pieces: closed-form Darboux sums at the exactly
    # predicted k ((b-a)(f(b)-f(a))/k shrinkage law).
    mono = _monotone_pieces_in(f, a, b) if f.poly_coeffs is not None else None
    if mono is not None:
        lower = upper = Fraction(0)
        used = 0
        for u, v, direction in mono:
            swing = abs(f.value_at(v) - f.value_at(u))
            piece_target = target * (v - u) / (b - a)
            if swing == 0 or direction == "constant":
                k = 1
            else:
                need = swing * (v - u) / piece_target
                k = max(1, int(need) + 1)
            lo_sum, hi_sum = _poly_monotone_darboux_regular(
                f.poly_coeffs, direction, u, v, k
            )
            lower += lo_sum
            upper += hi_sum
            used += k
        return IntegralResult(Enclosure(lower, upper), Status.CONVERGES, used)

    k = 1
    best: Optional[DarbouxPair] = None
    for _ in range(max_doublings + 1):
        pair = darboux(f, regular_partition(a, b, k), digits)
        if pair.width() <= target:
            return IntegralResult(
                Enclosure(pair.lower, pair.upper), Status.CONVERGES, k, pair.outer
            )
        if best is not None and pair.width() >= best.width():
            # refinement is not shrinking the pair (the rational-indicator
            # descriptor is the canonical case): report the stall honestly
            break
        best = pair
        k *= 2
    return IntegralResult(
        Enclosure(best.lower, best.upper), Status.INCONCLUSIVE, max(1, k // 2), best.outer
    )


# --- improper integrals -----------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    """Registered comparison partner for one improper end.

    kinds: "p_at_inf" (|f| <= C x^-p for x >= from_x, p > 1),
    "exp_at_inf" (|f(x)| <= (const/p) * p * e^(-p x), i.e. rate p and
    scale const, for x >= from_x),
    "p_at_zero" (|f(lo + t)| <= C t^-p for small t > 0 measured from the
    singular lower endpoint, 0 < p < 1),
    "minorant_p_at_inf" (f >= c x^-p >= 0 for x >= from_x, p <= 1:
    a certified divergence witness).
    """

    kind: str
    p: Optional[Fraction] = None
    const: Fraction = Fraction(1)
    from_x: Fraction = Fraction(1)

    def tail_bound(self, big_t: Fraction, digits: int) -> Fraction:
        if self.kind == "p_at_inf":
            exponent = 1 - self.p
            if exponent.denominator == 1:
                power = big_t ** int(exponent)
            else:
                power = rational_power_enclosure(big_t, exponent, digits).hi
            return self.const * power / (self.p - 1)
        if self.kind == "exp_at_inf":
            from certreal.powerseries import exp_enclosure

            return self.const / self.p * exp_enclosure(-self.p * big_t, digits).hi
        raise ValueError(f"{self.kind} has no upper tail bound")

    def head_bound(self, eps: Fraction, digits: int) -> Fraction:
        if self.kind != "p_at_zero":
            raise ValueError(f"{self.kind} has no head bound")
        if not 0 < self.p < 1:
            raise ValueError("p_at_zero needs 0 < p < 1")
        power = rational_power_enclosure(eps, 1 - self.p, digits).hi
        return self.const * power / (1 - self.p)


@dataclass(frozen=True)
class ImproperSpec:
    """An improper integral: integrand, interval, singular ends, partners.

    lo=None / hi=None mean -inf / +inf; singular_lo marks an unbounded
    integrand at the finite lower endpoint (the integral is then taken as a
    shrinking-epsilon limit).  The integrand must be bounded and integrable
    on every closed subinterval avoiding the singular ends (caller
    contract).  nonnegative=True sharpens tail enclosures to [0, bound].
    """

    integrand: FnDescriptor
    lo: Optional[Fraction]
    hi: Optional[Fraction]
    singular_lo: bool = False
    singular_hi: bool = False
    comparisons: tuple[Comparison, ...] = ()
    nonnegative: bool = False


@dataclass(frozen=True)
class ImproperCertificate:
    kind: str
    witnesses: dict
    asserted: tuple[str, ...] = ()


def reflect_descriptor(f: FnDescriptor) -> FnDescriptor:
    """The descriptor of x |-> f(-x), with metadata flipped to match."""
    flip = {"increasing": "decreasing", "decreasing": "increasing", "constant": "constant"}
    pieces = None
    if f.monotone_pieces is not None:
        pieces = tuple(
            (None if hi is None else -hi, None if lo is None else -lo, flip[d])
            for lo, hi, d in reversed(f.monotone_pieces)
        )
    anti = None
    if f.antiderivative is not None:
        inner = f.antiderivative
        anti = FnDescriptor(
            name=f"reflected({inner.name})",
            eval_rat=(lambda x, _g=inner: -_g.eval_rat(-x)) if inner.eval_rat else None,
            eval_enc=(lambda x, d, _g=inner: -_g.eval_enc(-x, d)) if inner.eval_enc else None,
        )
    return FnDescriptor(
        name=f"reflected({f.name})",
        eval_rat=(lambda x, _f=f: _f.eval_rat(-x)) if f.eval_rat else None,
        eval_enc=(lambda x, d, _f=f: _f.eval_enc(-x, d)) if f.eval_enc else None,
        monotone=flip.get(f.monotone),
        monotone_pieces=pieces,
        lipschitz=f.lipschitz,
        bound=f.bound,
        antiderivative=anti,
        breakpoints=tuple(-b for b in reversed(f.breakpoints)),
    )


def improper_integral(
    spec: ImproperSpec,
    target_width: RationalLike = Fraction(1, 10**6),
    max_steps: int = 60,
) -> Verdict:
    """Improper integral over a doubling/shrinking schedule.

    Convergence is certified only through a registered comparison partner
    with an explicit tail (or head) bound; the finite core is evaluated by
    `integrate_enclosure`.  Without a partner the verdict is Inconclusive
    and the trace carries the partial integrals.  A registered minorant
    certifies divergence.  Intervals unbounded below are reflected onto
    [-b, inf) first.
    """
    target = to_rational(target_width)
    digits = _digits_for(target, 4)
    if spec.lo is None or (spec.singular_hi and spec.hi is not None and not spec.singular_lo):
        if spec.lo is None and spec.hi is None:
            raise ValueError("split a two-sided improper integral at a finite point first")
        # reflect [lo, hi) or (-inf, hi] onto a lower-end problem
        mirrored = ImproperSpec(
            reflect_descriptor(spec.integrand),
            None if spec.hi is None else -spec.hi,
            None if spec.lo is None else -spec.lo,
            singular_lo=spec.singular_hi,
            singular_hi=spec.singular_lo,
            comparisons=spec.comparisons,
            nonnegative=spec.nonnegative,
        )
        return improper_integral(mirrored, target_width, max_steps)
    for comp in spec.comparisons:
        if comp.kind == "minorant_p_at_inf":
            if comp.p > 1:
                raise ValueError("divergence minorant needs p <= 1")
            cert = ImproperCertificate(
                "comparison_minorant",
                {
                    "minorant": f"{comp.const} * x^-{comp.p} for x >= {comp.from_x}",
                    "reason": "integral of the minorant over [from_x, T) is unbounded in T",
                },
                asserted=("the minorant inequality holds beyond the checked range",),
            )
            return Verdict(Status.DIVERGES, cert)

    tail_comp = next((c for c in spec.comparisons if c.kind in ("p_at_inf", "exp_at_inf")), None)
    head_comp = next((c for c in spec.comparisons if c.kind == "p_at_zero"), None)

    unbounded_hi = spec.hi is None
    singular_lo = spec.singular_lo
    if unbounded_hi and tail_comp is None:
        return _improper_trace_only(spec, max_steps, digits)
    if singular_lo and head_comp is None:
        return _improper_trace_only(spec, max_steps, digits)

    big_t = max(Fraction(2), tail_comp.from_x if tail_comp else Fraction(2))
    eps = Fraction(1, 2)
    trace: list = []
    for _ in range(max_steps):
        lo = (spec.lo + eps) if singular_lo else spec.lo
        hi = big_t if unbounded_hi else spec.hi
        core = integrate_enclosure(spec.integrand, lo, hi, target / 2, digits=digits)
        enclosure = core.enclosure
        if unbounded_hi:
            tail_b = tail_comp.tail_bound(big_t, digits)
            enclosure = enclosure + Enclosure(
                Fraction(0) if spec.nonnegative else -tail_b, tail_b
            )
        if singular_lo:
            head_b = head_comp.head_bound(eps, digits)
            enclosure = enclosure + Enclosure(
                Fraction(0) if spec.nonnegative else -head_b, head_b
            )
        trace.append(("window", (str(lo), str(hi)), enclosure))
        if core.status is Status.CONVERGES and enclosure.width() <= target:
            cert = ImproperCertificate(
                "comparison_majorant",
                {
                    "tail": None if not unbounded_hi else f"<= {tail_comp.const} * partner at T={big_t}",
                    "head": None if not singular_lo else f"<= head bound at eps={eps}",
                    "core_method": core.method,
                },
                asserted=("the comparison inequalities hold beyond the checked range",),
            )
            return Verdict(Status.CONVERGES, cert, enclosure, trace=tuple(trace))
        if unbounded_hi:
            big_t *= 2
        if singular_lo:
            eps /= 2
    return Verdict(Status.INCONCLUSIVE, None, None, trace=tuple(trace))


def _improper_trace_only(spec: ImproperSpec, max_steps: int, digits: int) -> Verdict:
    trace: list = []
    big_t = Fraction(2)
    eps = Fraction(1, 2)
    for _ in range(min(max_steps, 8)):
        lo = (spec.lo + eps) if spec.singular_lo else spec.lo
        hi = big_t if spec.hi is None else spec.hi
        try:
            core = integrate_enclosure(spec.integrand, lo, hi, Fraction(1, 1000), digits=digits)
            trace.append(("window", (str(lo), str(hi)), core.enclosure))
        except MissingMetadataError as exc:
            trace.append(("error", str(exc)))
            break
        big_t *= 2
        eps /= 2
    return Verdict(Status.INCONCLUSIVE, None, None, trace=tuple(trace))


def principal_value_trace(
    f: FnDescriptor,
    steps: int = 5,
    target_width: RationalLike = Fraction(1, 100),
) -> list[tuple[Fraction, Enclosure]]:
    """Symmetric-limit trace (a, integral over [-a, a]) for a in 2, 4, 8, ...

    This is only the Cauchy principal-value diagnostic: a settling trace is
    never certified as a convergent improper integral (odd integrands make
    the trace vanish while the two-sided integral diverges).
    """
    target = to_rational(target_width)
    trace: list[tuple[Fraction, Enclosure]] = []
    a = Fraction(2)
    for _ in range(steps):
        result = integrate_enclosure(f, -a, a, target)
        trace.append((a, result.enclosure))
        a *= 2
    return trace


# --- the gamma function ------------------------------------------------------

def _lower_incomplete_series(s: Fraction, x: Fraction, budget: Fraction, digits: int) -> Enclosure:
    """Enclosure of the integral of t^(s-1) e^-t over (0, x], x >= 2.

    Integrating the exponential series term by term gives
    x^s * sum_k (-x)^k / (k! (s+k)); after summing indices 0..K the
    exchange error is at most 2 x^(K+1) / ((K+1)! (s+K+1)) (valid once
    K+2 >= 2x), i.e. 2 |next power term| / (s+K+1).
    """
    total = Fraction(0)
    k = 0
    power = Fraction(1)  # (-x)^k / k!
    while True:
        total += power / (s + k)
        k += 1
        power = power * (-x) / k
        bound = 2 * abs(power) / (s + k)
        # x^s <= x for s <= 1, so dividing the budget by x covers the final
        # multiplication by the x^s enclosure.
        if k + 1 >= 2 * x and bound <= budget / (2 * x):
            series = Enclosure.from_midrad(total, bound)
            break
    x_pow_s = rational_power_enclosure(x, s, digits)
    return x_pow_s.times(series)


def gamma(s: RationalLike, digits: int = 6) -> Enclosure:
    """Enclosure of the gamma function at rational s > 0, width <= 10**-digits.

    The recursion gamma(s+1) = s * gamma(s) reduces to s in (0, 1]; there,
    gamma(s) is the lower incomplete part over (0, T] (series, exact
    rationals) plus a tail below 2 e^(-T/2), since t^(s-1) e^(-t/2) <= 1
    for t >= 1 when s <= 1.
    """
    from certreal.powerseries import exp_enclosure

    s = to_rational(s)
    if s <= 0:
        raise ValueError("gamma needs s > 0")
    factor = Fraction(1)
    while s > 1:
        s -= 1
        factor *= s
    target = Fraction(1, 10**digits)
    scaled_target = target / factor if factor > 1 else target
    inner_digits = _digits_for(scaled_target, 4)
    for _ in range(4):
        big_t = Fraction(2)
        while True:
            tail_hi = 2 * exp_enclosure(-big_t / 2, inner_digits).hi
            if tail_hi <= scaled_target / 4:
                break
            big_t *= 2
        core = _lower_incomplete_series(s, big_t, scaled_target / 2, inner_digits)
        enclosure = (core + Enclosure(Fraction(0), tail_hi)).scale(factor)
        if enclosure.width() <= target:
            return enclosure
        inner_digits += 6  # x^s rounding dominated; retry tighter
    raise ArithmeticError("gamma precision loop failed to close")


# --- oracle checks for the classical integral identities ---------------------

@dataclass(frozen=True)
class IdentityReport:
    left: Enclosure
    right: Enclosure
    agree: bool
    gap_bound: Fraction

    def __bool__(self) -> bool:
        return self.agree


def _identity_report(left: Enclosure, right: Enclosure) -> IdentityReport:
    overlap = left.lo <= right.hi and right.lo <= left.hi
    gap = max(abs(left.midpoint() - right.midpoint()), Fraction(0))
    return IdentityReport(left, right, overlap, gap + left.width() + right.width())


def substitution_check(
    outer: FnDescriptor,
    a: RationalLike,
    b: RationalLike,
    expected: Enclosure,
    target_width: RationalLike = Fraction(1, 10**6),
) -> IdentityReport:
    """Check integral of `outer` over [a, b] against a closed-form enclosure
    (the substituted right-hand side); agreement means the enclosures
    overlap, with the combined widths as the discrepancy bound."""
    result = integrate_enclosure(outer, a, b, target_width)
    return _identity_report(result.enclosure, expected)


def parts_check(
    u: FnDescriptor,
    v: FnDescriptor,
    a: RationalLike,
    b: RationalLike,
    target_width: RationalLike = Fraction(1, 10**4),
) -> IdentityReport:
    """Verify integral of u v' plus integral of u' v equals the boundary term
    u v | a..b, all as enclosures (integration by parts)."""
    a, b = to_rational(a), to_rational(b)
    if u.derivative is None or v.derivative is None:
        raise MissingMetadataError("parts check needs registered derivatives")
    du, dv = u.derivative, v.derivative

    def product_desc(f: FnDescriptor, g: FnDescriptor) -> FnDescriptor:
        if f.poly_coeffs is not None and g.poly_coeffs is not None:
            from certreal.core import poly_descriptor

            prod = [Fraction(0)] * (len(f.poly_coeffs) + len(g.poly_coeffs) - 1)
            for i, ci in enumerate(f.poly_coeffs):
                for j, cj in enumerate(g.poly_coeffs):
                    prod[i + j] += ci * cj
            return poly_descriptor(prod, name=f"({f.name})*({g.name})")
        lip = None
        if (
            f.lipschitz is not None
            and g.lipschitz is not None
            and f.bound is not None
            and g.bound is not None
        ):
            lip = f.lipschitz * g.bound + g.lipschitz * f.bound
        return FnDescriptor(
            name=f"({f.name})*({g.name})",
            eval_rat=(lambda x, _f=f, _g=g: _f.eval_rat(x) * _g.eval_rat(x))
            if f.eval_rat is not None and g.eval_rat is not None
            else None,
            lipschitz=lip,
        )

    left = integrate_enclosure(product_desc(u, dv), a, b, target_width).enclosure
    left = left + integrate_enclosure(product_desc(du, v), a, b, target_width).enclosure
    boundary = Enclosure.point(u.value_at(b) * v.value_at(b) - u.value_at(a) * v.value_at(a))
    return _identity_report(left, boundary)
