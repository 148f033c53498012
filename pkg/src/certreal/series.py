"""Partial sums, convergence tests with certificates, rearrangement, products.

The classifier runs an ordered policy of tests and stops at the first
decisive verdict; the full trace of fired and inconclusive tests is kept on
the verdict.  Each certificate records which witnesses were machine-checked
on the scanned prefix and which claims remain caller-asserted (a finite
scan can never certify a statement about the whole tail by itself).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

from certreal.core import (
    Enclosure,
    RationalLike,
    Status,
    Verdict,
    nth_root_enclosure,
    outward_round,
    rational_power_enclosure,
    to_rational,
)
from certreal.sequences import TermStream

TEST_NAMES = (
    "nth_term",
    "geometric",
    "p_series",
    "comparison",
    "limit_comparison",
    "integral",
    "alternating",
    "ratio",
    "root",
    "cauchy_criterion",
    "abs_convergence",
)

# Partner-free tests in the practical checking order: vanishing terms
# first, then the named structural families, then alternating, then the
# root/ratio pair.
DEFAULT_POLICY = ("nth_term", "geometric", "p_series", "alternating", "root", "ratio")


@dataclass(frozen=True)
class TestCertificate:
    """Which test fired, with named witness values.

    machine_checked covers exactly the prefix facts this library verified;
    `asserted` lists the tail claims that remain the caller's contract.
    """

    test: str
    witnesses: dict
    machine_checked: bool = True
    asserted: tuple[str, ...] = ()
    detail: str = ""

    def __post_init__(self) -> None:
        if self.test not in TEST_NAMES and not self.test.startswith("registered"):
            raise ValueError(f"unknown test {self.test!r}")


@dataclass
class SeriesHandle:
    """A series: its term stream plus an append-only prefix-sum cache."""

    terms: TermStream
    family: Optional[str] = None
    params: dict = field(default_factory=dict)
    _sums: dict = field(default_factory=dict, repr=False)

    @property
    def n0(self) -> int:
        return self.terms.n0

    def term(self, n: int):
        return self.terms.term(n)

    def partial_sum(self, n: int) -> Fraction:
        """Exact sum of terms from the start index through n."""
        if n < self.n0:
            raise IndexError(f"index {n} below start {self.n0}")
        top = max(self._sums) if self._sums else self.n0 - 1
        acc = self._sums.get(top, Fraction(0))
        for k in range(top + 1, n + 1):
            acc = acc + self.terms.term(k)
            self._sums[k] = acc
        return self._sums[n]


def _pseries_term(p: Fraction, n: int):
    if p.denominator == 1:
        return Fraction(1, n**p.numerator) if p >= 0 else Fraction(n ** (-p.numerator))
    return rational_power_enclosure(Fraction(n), -p, 30)


def make_series(family: str, **params) -> SeriesHandle:
    """Named series families with exact rational terms where possible.

    geometric(a, r): a * r**(n-1) from n=1; p_series(p): n**-p (enclosure
    terms when p is not an integer); harmonic; alt_harmonic; newton_gregory:
    (-1)**(n-1)/(2n-1); exp_terms(x): x**n/n! from n=0; factorial_power(x):
    n! * x**n from n=0; two_pow_over_three_pow_minus_one; alt_inv_square;
    inv_square; custom(gen, n0).
    """
    if family == "geometric":
        a, r = to_rational(params["a"]), to_rational(params["r"])
        stream = TermStream(lambda n: a * r ** (n - 1), 1, f"geometric(a={a},r={r})")
        return SeriesHandle(stream, "geometric", {"a": a, "r": r})
    if family == "p_series":
        p = to_rational(params["p"])
        stream = TermStream(lambda n: _pseries_term(p, n), 1, f"p_series(p={p})")
        return SeriesHandle(stream, "p_series", {"p": p})
    if family == "harmonic":
        stream = TermStream(lambda n: Fraction(1, n), 1, "harmonic")
        return SeriesHandle(stream, "p_series", {"p": Fraction(1)})
    if family == "alt_harmonic":
        stream = TermStream(lambda n: Fraction((-1) ** (n - 1), n), 1, "alt_harmonic")
        return SeriesHandle(stream, "alt_harmonic", {})
    if family == "newton_gregory":
        stream = TermStream(lambda n: Fraction((-1) ** (n - 1), 2 * n - 1), 1, "newton_gregory")
        return SeriesHandle(stream, "newton_gregory", {})
    if family == "exp_terms":
        x = to_rational(params["x"])
        from math import factorial

        stream = TermStream(lambda n: x**n / Fraction(factorial(n)), 0, f"exp_terms(x={x})")
        return SeriesHandle(stream, "exp_terms", {"x": x})
    if family == "factorial_power":
        x = to_rational(params["x"])
        from math import factorial

        stream = TermStream(lambda n: Fraction(factorial(n)) * x**n, 0, f"factorial_power(x={x})")
        return SeriesHandle(stream, "factorial_power", {"x": x})
    if family == "two_pow_over_three_pow_minus_one":
        stream = TermStream(lambda n: Fraction(2**n, 3**n - 1), 1, "2^n/(3^n-1)")
        return SeriesHandle(stream, "two_pow_over_three_pow_minus_one", {})
    if family == "inv_square":
        stream = TermStream(lambda n: Fraction(1, n * n), 1, "inv_square")
        return SeriesHandle(stream, "p_series", {"p": Fraction(2)})
    if family == "alt_inv_square":
        stream = TermStream(lambda n: Fraction((-1) ** (n - 1), n * n), 1, "alt_inv_square")
        return SeriesHandle(stream, "alt_inv_square", {})
    if family == "custom":
        stream = TermStream(params["gen"], params.get("n0", 1), params.get("name", "custom"))
        return SeriesHandle(stream, None, {})
    raise ValueError(f"unknown family {family!r}")


# --- individual tests ------------------------------------------------------

# Families whose terms certifiably tend to zero (registered facts).
_TERMS_VANISH = {
    "alt_harmonic",
    "newton_gregory",
    "exp_terms",
    "two_pow_over_three_pow_minus_one",
    "alt_inv_square",
}


def _test_nth_term(s: SeriesHandle, horizon: int):
    fam, par = s.family, s.params
    if fam == "geometric":
        if abs(par["r"]) >= 1:
            if par["a"] == 0:
                return None, "terms identically zero"
            cert = TestCertificate(
                "nth_term",
                {"r": par["r"], "term_magnitude_lower_bound": abs(par["a"])},
                detail="|a_n| = |a| |r|^(n-1) >= |a| > 0 for |r| >= 1",
            )
            return Verdict(Status.DIVERGES, cert), "fired"
        return None, "terms -> 0 (registered: |r| < 1)"
    if fam == "p_series":
        if par["p"] <= 0:
            cert = TestCertificate(
                "nth_term",
                {"p": par["p"]},
                detail="n**-p >= 1 for p <= 0",
            )
            return Verdict(Status.DIVERGES, cert), "fired"
        return None, "terms -> 0 (registered: p > 0)"
    if fam == "factorial_power":
        x = par["x"]
        if x == 0:
            return None, "terms identically zero past n=0"
        threshold = abs(1 / x)
        start = int(threshold) + 1  # (n+1)|x| >= 1 from here on
        anchor = abs(s.term(start))
        cert = TestCertificate(
            "nth_term",
            {"N": start, "term_magnitude_lower_bound": anchor},
            detail="|a_{n+1}/a_n| = (n+1)|x| >= 1 for n >= N, so |a_n| >= |a_N| > 0",
        )
        return Verdict(Status.DIVERGES, cert), "fired"
    if fam in _TERMS_VANISH:
        return None, "terms -> 0 (registered fact)"
    # Empirical scan: evidence of non-vanishing terms is reported as a
    # divergence verdict flagged not-machine-checked; apparent decay passes.
    lo = max(s.n0, horizon // 2)
    window = [s.term(n) for n in range(lo, horizon + 1)]
    if not all(isinstance(v, Fraction) for v in window):
        return None, "skipped (terms not exact)"
    magnitudes = [abs(v) for v in window]
    if min(magnitudes) > 0 and all(a <= b for a, b in zip(magnitudes, magnitudes[1:])):
        cert = TestCertificate(
            "nth_term",
            {"window": (lo, horizon), "term_magnitude_lower_bound": min(magnitudes)},
            machine_checked=False,
            asserted=("term magnitudes keep growing beyond the horizon",),
        )
        return Verdict(Status.DIVERGES, cert), "fired (empirical)"
    return None, "no evidence terms stay away from 0"


def _test_geometric(s: SeriesHandle, horizon: int):
    if s.family != "geometric":
        return None, "not a registered geometric series"
    a, r = s.params["a"], s.params["r"]
    if abs(r) < 1:
        total = a / (1 - r)
        cert = TestCertificate(
            "geometric",
            {
                "a": a,
                "r": r,
                "sum": total,
                "N": horizon,
                "tail_bound": abs(a * r**horizon / (1 - r)),
            },
            detail="geometric series converges iff |r| < 1; sum a/(1-r)",
        )
        return Verdict(Status.CONVERGES, cert, Enclosure.point(total)), "fired"
    cert = TestCertificate("geometric", {"a": a, "r": r}, detail="|r| >= 1")
    if a == 0:
        cert = TestCertificate("geometric", {"a": a, "r": r, "sum": Fraction(0)})
        return Verdict(Status.CONVERGES, cert, Enclosure.point(0)), "fired"
    return Verdict(Status.DIVERGES, cert), "fired"


def _test_p_series(s: SeriesHandle, horizon: int):
    if s.family != "p_series":
        return None, "not a registered p-series"
    p = s.params["p"]
    if p > 1:
        # Integral-test bracket: integral <= sum <= integral + first term.
        integral = 1 / (p - 1)
        value = Enclosure(integral, integral + 1)
        cert = TestCertificate(
            "p_series",
            {"p": p, "integral_lower": 1 / (p - 1)},
            detail="p-series converges iff p > 1; bracket from the integral test",
        )
        return Verdict(Status.CONVERGES, cert, value), "fired"
    cert = TestCertificate("p_series", {"p": p}, detail="p <= 1")
    return Verdict(Status.DIVERGES, cert), "fired"


def _alternating_structure(s: SeriesHandle, horizon: int):
    """Return the magnitude prefix if the prefix looks like (-1)**(n-1) b_n."""
    values = [s.term(n) for n in range(s.n0, horizon + 1)]
    if not all(isinstance(v, Fraction) for v in values):
        return None
    mags = []
    for i, v in enumerate(values):
        expected_sign = 1 if i % 2 == 0 else -1
        if v == 0 or (v > 0) != (expected_sign > 0):
            return None
        mags.append(abs(v))
    if not all(a >= b for a, b in zip(mags, mags[1:])):
        return None
    return mags


def _test_alternating(s: SeriesHandle, horizon: int):
    mags = _alternating_structure(s, horizon)
    if mags is None:
        return None, "prefix is not an alternating series with decreasing magnitudes"
    magnitude_stream = TermStream(lambda k: abs(s.term(s.n0 + k - 1)), 1)
    enclosure = alternating_sum_with_bound(magnitude_stream, horizon - s.n0 + 1)
    cert = TestCertificate(
        "alternating",
        {
            "horizon": horizon,
            "tail_bound": mags[-1],
            "enclosure": enclosure,
        },
        asserted=("magnitudes keep decreasing to 0 beyond the horizon",),
        detail="alternating series test; |s - s_n| <= b_{n+1}",
    )
    return Verdict(Status.CONVERGES, cert, enclosure), "fired"


def _certify_window(
    test: str,
    window: Enclosure,
    delta: Fraction,
    trend: str,
    extra: dict,
):
    # The trend guard refuses certification when the scanned values drift
    # toward 1: a window below 1 - delta proves nothing about the limsup if
    # the values are still climbing (the harmonic series is the cautionary
    # case for the root test).
    if window.hi <= 1 - delta and trend != "rising":
        cert = TestCertificate(
            test,
            {"window": window, "delta": delta, "trend": trend, **extra},
            asserted=(f"{test} values stay inside the scanned window beyond the horizon",),
            detail="window entirely below 1 - delta",
        )
        return Verdict(Status.CONVERGES, cert)
    if window.lo >= 1 + delta and trend != "falling":
        cert = TestCertificate(
            test,
            {"window": window, "delta": delta, "trend": trend, **extra},
            asserted=(f"{test} values stay inside the scanned window beyond the horizon",),
            detail="window entirely above 1 + delta",
        )
        return Verdict(Status.DIVERGES, cert)
    return None


def _split_trend(values_lo: list[Fraction], values_hi: list[Fraction]) -> str:
    half = len(values_hi) // 2
    if half == 0:
        return "flat"
    if max(values_hi[half:]) > max(values_hi[:half]):
        return "rising"
    if min(values_lo[half:]) < min(values_lo[:half]):
        return "falling"
    return "flat"


def _test_ratio(s: SeriesHandle, horizon: int, delta: Fraction):
    try:
        scan = ratio_root_scan(s, horizon, want_root=False)
    except (ZeroDivisionError, ValueError) as exc:
        return None, f"ratio scan failed: {exc}"
    window = scan["ratio_window"]
    values = scan["ratio_values"]
    trend = _split_trend(values, values)
    verdict = _certify_window(
        "ratio", window, delta, trend, {"scan_range": scan["scan_range"]}
    )
    if verdict is not None:
        return verdict, "fired"
    return None, f"ratio window {window} not decisive (trend {trend})"


def _test_root(s: SeriesHandle, horizon: int, delta: Fraction):
    try:
        scan = ratio_root_scan(s, horizon, want_ratio=False)
    except ValueError as exc:
        return None, f"root scan failed: {exc}"
    window = scan["root_window"]
    brackets = scan["root_values"]
    trend = _split_trend([b.lo for b in brackets], [b.hi for b in brackets])
    verdict = _certify_window(
        "root", window, delta, trend, {"scan_range": scan["scan_range"]}
    )
    if verdict is not None:
        return verdict, "fired"
    return None, f"root window {window} not decisive (trend {trend})"


def _test_comparison(s: SeriesHandle, horizon: int, partner, partner_verdict):
    if partner is None or partner_verdict is None:
        return None, "no comparison partner supplied"
    ours = [s.term(n) for n in range(s.n0, horizon + 1)]
    theirs = [partner.term(n) for n in range(partner.n0, partner.n0 + len(ours))]
    if not all(isinstance(v, Fraction) for v in ours + theirs):
        return None, "comparison needs exact terms"
    if any(v < 0 for v in ours) or any(v < 0 for v in theirs):
        return None, "comparison test needs nonnegative terms"
    below = all(a <= b for a, b in zip(ours, theirs))
    above = all(a >= b for a, b in zip(ours, theirs))
    if below and partner_verdict.status is Status.CONVERGES:
        cert = TestCertificate(
            "comparison",
            {"partner": partner.terms.name, "direction": "below"},
            asserted=("0 <= a_n <= b_n persists beyond the horizon",),
        )
        return Verdict(Status.CONVERGES, cert), "fired"
    if above and partner_verdict.status is Status.DIVERGES:
        cert = TestCertificate(
            "comparison",
            {"partner": partner.terms.name, "direction": "above"},
            asserted=("a_n >= b_n >= 0 persists beyond the horizon",),
        )
        return Verdict(Status.DIVERGES, cert), "fired"
    return None, "prefix comparison direction does not match partner verdict"


def _test_limit_comparison(s: SeriesHandle, horizon: int, partner, partner_verdict):
    if partner is None or partner_verdict is None:
        return None, "no comparison partner supplied"
    lo_idx = max(s.n0, horizon // 2)
    ratios = []
    for n in range(lo_idx, horizon + 1):
        ours, theirs = s.term(n), partner.term(n)
        if not isinstance(ours, Fraction) or not isinstance(theirs, Fraction) or theirs == 0:
            return None, "limit comparison needs exact nonzero partner terms"
        ratios.append(abs(ours) / theirs)
    window = Enclosure(min(ratios), max(ratios))
    if partner_verdict.status is Status.CONVERGES:
        cert = TestCertificate(
            "limit_comparison",
            {"partner": partner.terms.name, "ratio_window": window},
            machine_checked=False,
            asserted=("|a_n|/b_n stays bounded beyond the horizon",),
        )
        return Verdict(Status.CONVERGES, cert), "fired (empirical)"
    if partner_verdict.status is Status.DIVERGES and window.lo > 0:
        cert = TestCertificate(
            "limit_comparison",
            {"partner": partner.terms.name, "ratio_window": window},
            machine_checked=False,
            asserted=("a_n/b_n stays bounded away from 0 beyond the horizon",),
        )
        return Verdict(Status.DIVERGES, cert), "fired (empirical)"
    return None, "partner verdict not decisive"


def _test_integral(s: SeriesHandle, horizon: int, integral_spec):
    if integral_spec is None:
        return None, "no integral-test partner supplied"
    f = integral_spec.integrand
    # machine-check f(n) = a_n on a prefix sample; decreasing-positivity is
    # the partner contract
    for n in range(s.n0, min(horizon, s.n0 + 16) + 1):
        term = s.term(n)
        if not isinstance(term, Fraction):
            return None, "integral test needs exact terms"
        if not f.enclosure_at(Fraction(n), 20).contains(term):
            return None, f"f({n}) does not match the series term"
    from certreal import integration

    verdict = integration.improper_integral(integral_spec)
    if verdict.status is Status.INCONCLUSIVE:
        return None, "partner integral inconclusive"
    cert = TestCertificate(
        "integral",
        {"partner": f.name, "integral_status": verdict.status.value},
        machine_checked=True,
        asserted=("the integrand stays positive and decreasing to 0",),
        detail="series and improper integral of the matching integrand "
        "converge or diverge together",
    )
    return Verdict(verdict.status, cert), "fired"


def _test_cauchy_criterion(s: SeriesHandle, horizon: int, eps: Fraction):
    lo = max(s.n0, horizon // 2)
    sums = [s.partial_sum(n) for n in range(lo, horizon + 1)]
    oscillation = max(sums) - min(sums)
    if oscillation < eps:
        cert = TestCertificate(
            "cauchy_criterion",
            {"oscillation": oscillation, "eps": eps, "window": (lo, horizon)},
            machine_checked=False,
            asserted=("partial sums keep oscillating less than eps",),
        )
        return Verdict(Status.CONVERGES, cert), "fired (empirical)"
    return None, f"partial-sum oscillation {oscillation} >= eps"


# Registered absolute-value families: lets the absolute-convergence test
# stay on the certified structural path.
_ABS_FAMILY = {
    "alt_inv_square": ("p_series", {"p": Fraction(2)}),
    "alt_harmonic": ("p_series", {"p": Fraction(1)}),
}


def _test_abs_convergence(s: SeriesHandle, horizon: int, delta: Fraction):
    abs_family, abs_params = _ABS_FAMILY.get(s.family, (None, {}))
    inner = SeriesHandle(
        TermStream(lambda n: abs(s.term(n)), s.n0, f"|{s.terms.name}|"),
        abs_family,
        dict(abs_params),
    )
    sub_policy = tuple(t for t in DEFAULT_POLICY if t not in ("alternating",))
    inner_verdict = classify(inner, sub_policy, horizon, delta)
    if inner_verdict.status is Status.CONVERGES:
        cert = TestCertificate(
            "abs_convergence",
            {"inner_test": inner_verdict.certificate.test},
            machine_checked=inner_verdict.certificate.machine_checked,
            asserted=inner_verdict.certificate.asserted,
            detail="absolute convergence implies convergence",
        )
        return Verdict(Status.CONVERGES, cert), "fired"
    return None, "absolute-value series not shown convergent"


def classify(
    s: SeriesHandle,
    policy: tuple = DEFAULT_POLICY,
    horizon: int = 128,
    delta: RationalLike = Fraction(1, 100),
    partner: Optional[SeriesHandle] = None,
    partner_verdict: Optional[Verdict] = None,
    eps: RationalLike = Fraction(1, 1000),
    integral_spec=None,
) -> Verdict:
    """Run the ordered test policy; first decisive verdict wins.

    The trace of every attempted test (fired or not, with the reason) is
    retained on the returned verdict.
    """
    if not policy:
        raise ValueError("empty test policy")
    delta, eps = to_rational(delta), to_rational(eps)
    trace: list = []
    for test in policy:
        if test == "nth_term":
            verdict, note = _test_nth_term(s, horizon)
        elif test == "geometric":
            verdict, note = _test_geometric(s, horizon)
        elif test == "p_series":
            verdict, note = _test_p_series(s, horizon)
        elif test == "alternating":
            verdict, note = _test_alternating(s, horizon)
        elif test == "ratio":
            verdict, note = _test_ratio(s, horizon, delta)
        elif test == "root":
            verdict, note = _test_root(s, horizon, delta)
        elif test == "comparison":
            verdict, note = _test_comparison(s, horizon, partner, partner_verdict)
        elif test == "limit_comparison":
            verdict, note = _test_limit_comparison(s, horizon, partner, partner_verdict)
        elif test == "integral":
            verdict, note = _test_integral(s, horizon, integral_spec)
        elif test == "cauchy_criterion":
            verdict, note = _test_cauchy_criterion(s, horizon, eps)
        elif test == "abs_convergence":
            verdict, note = _test_abs_convergence(s, horizon, delta)
        else:
            raise ValueError(f"unknown test {test!r} in policy")
        trace.append((test, note))
        if verdict is not None:
            return Verdict(verdict.status, verdict.certificate, verdict.value, tuple(trace))
    return Verdict(Status.INCONCLUSIVE, None, None, tuple(trace))


def alternating_sum_with_bound(b: TermStream, n: int) -> Enclosure:
    """Enclosure of sum (-1)**(k-1) b_k from the alternating-series estimate.

    The prefix b_1 >= b_2 >= ... >= 0 is machine-checked (a violation is
    rejected with its index); the limit-to-zero tail claim is the caller's.
    The bracket |s - s_n| <= b_{n+1} is intersected with the even/odd
    partial-sum oscillation bracket.
    """
    if n < 1:
        raise ValueError("need at least one term")
    previous = None
    total = Fraction(0)
    even_sum = odd_sum = None
    for k in range(1, n + 1):
        bk = b.term(b.n0 + k - 1)
        if not isinstance(bk, Fraction):
            raise ValueError("alternating bound needs exact rational magnitudes")
        if bk < 0:
            raise ValueError(f"magnitude term b_{k} = {bk} is negative")
        if previous is not None and bk > previous:
            raise ValueError(f"magnitudes increase at index {k}: {previous} -> {bk}")
        previous = bk
        total += bk if k % 2 == 1 else -bk
        if k % 2 == 0:
            even_sum = total
        else:
            odd_sum = total
    tail = b.term(b.n0 + n)
    if not isinstance(tail, Fraction) or tail < 0 or tail > previous:
        raise ValueError("tail magnitude violates the decreasing contract")
    bracket = Enclosure(total - tail, total + tail)
    if even_sum is not None and odd_sum is not None:
        bracket = bracket.intersect(Enclosure(even_sum, odd_sum))
    return bracket


def ratio_root_scan(
    s: SeriesHandle,
    horizon: int,
    digits: int = 12,
    want_ratio: bool = True,
    want_root: bool = True,
) -> dict:
    """Exact min/max of |a_{n+1}/a_n| and enclosure window of |a_n|**(1/n)
    over the back half of the horizon [horizon/2, horizon].

    These are windows, not limits; certification is the caller's business
    (see `classify`).  A zero term in ratio mode is reported with its index.
    """
    lo = max(s.n0, horizon // 2)
    if horizon <= lo:
        raise ValueError("horizon too small for a scan window")
    out: dict = {"scan_range": (lo, horizon)}
    if want_ratio:
        ratios = []
        for n in range(lo, horizon):
            a_n, a_next = s.term(n), s.term(n + 1)
            if not isinstance(a_n, Fraction) or not isinstance(a_next, Fraction):
                raise ValueError("ratio scan needs exact rational terms")
            if a_n == 0:
                raise ZeroDivisionError(f"zero term at index {n} in ratio scan")
            ratios.append(abs(a_next / a_n))
        out["ratio_window"] = Enclosure(min(ratios), max(ratios))
        out["ratio_values"] = ratios
    if want_root:
        brackets = []
        for n in range(max(lo, 1), horizon + 1):
            a_n = s.term(n)
            if not isinstance(a_n, Fraction):
                raise ValueError("root scan needs exact rational terms")
            # huge-denominator terms are outward-rounded first: the root
            # bracket stays sound and the integer root stays affordable
            lo_r, hi_r = outward_round(abs(a_n), 40)
            bracket = Enclosure(
                nth_root_enclosure(lo_r, n, digits).lo,
                nth_root_enclosure(hi_r, n, digits).hi,
            )
            brackets.append(bracket)
        window = brackets[0]
        for b in brackets[1:]:
            window = window.hull(b)
        out["root_window"] = window
        out["root_values"] = brackets
    return out


# --- rearrangement ----------------------------------------------------------

@dataclass(frozen=True)
class FlipRecord:
    step: int
    index: int
    term: Fraction
    partial_sum: Fraction
    distance_to_target: Fraction


@dataclass(frozen=True)
class RearrangeResult:
    indices: tuple[int, ...]
    partial_sums: tuple[Fraction, ...]
    flips: tuple[FlipRecord, ...]
    target: Optional[Fraction] = None


class SignClassExhausted(ValueError):
    """One sign class ran out while scanning; contradicts the hypothesis."""


def _sign_class_iter(s: SeriesHandle, want_nonnegative: bool, scan_cap: int):
    n = s.n0
    while n <= scan_cap:
        v = s.term(n)
        if not isinstance(v, Fraction):
            raise ValueError("rearrangement needs exact rational terms")
        if (v >= 0) == want_nonnegative:
            yield n, v
        n += 1
    raise SignClassExhausted(
        f"{'nonnegative' if want_nonnegative else 'negative'} terms exhausted by index {scan_cap}"
    )


def rearrange_riemann(
    s: SeriesHandle,
    target: RationalLike,
    steps: int,
    scan_cap: Optional[int] = None,
) -> RearrangeResult:
    """Greedy rearrangement of a conditionally convergent series toward target.

    Alternately consumes nonnegative terms (in order) until the partial sum
    exceeds the target, then negative terms until it drops below.  After
    each direction flip the distance to the target is at most the magnitude
    of the term consumed at the flip; that record is emitted per flip.

    Conditional convergence is the caller's assertion (both sign classes
    diverging is checked only in the weak sense that neither may run out
    within the scan cap).
    """
    target = to_rational(target)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    cap = scan_cap if scan_cap is not None else s.n0 + 100 * steps
    positives = _sign_class_iter(s, True, cap)
    negatives = _sign_class_iter(s, False, cap)
    indices: list[int] = []
    sums: list[Fraction] = []
    flips: list[FlipRecord] = []
    total = Fraction(0)
    taking_positive = True
    for step in range(1, steps + 1):
        source = positives if taking_positive else negatives
        idx, term = next(source)
        total += term
        indices.append(idx)
        sums.append(total)
        crossed = total > target if taking_positive else total < target
        if crossed:
            flips.append(FlipRecord(step, idx, term, total, abs(total - target)))
            taking_positive = not taking_positive
    return RearrangeResult(tuple(indices), tuple(sums), tuple(flips), target)


def rearrange_pattern(s: SeriesHandle, p: int, q: int, steps: int,
                      scan_cap: Optional[int] = None) -> RearrangeResult:
    """Fixed-pattern rearrangement: p nonnegative terms, then q negative, cyclically."""
    if p < 1 or q < 1:
        raise ValueError("pattern counts must be >= 1")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    cap = scan_cap if scan_cap is not None else s.n0 + 100 * steps
    positives = _sign_class_iter(s, True, cap)
    negatives = _sign_class_iter(s, False, cap)
    indices: list[int] = []
    sums: list[Fraction] = []
    total = Fraction(0)
    position = 0
    while len(indices) < steps:
        take_pos = position % (p + q) < p
        idx, term = next(positives if take_pos else negatives)
        total += term
        indices.append(idx)
        sums.append(total)
        position += 1
    return RearrangeResult(tuple(indices), tuple(sums), tuple())


# --- infinite products -------------------------------------------------------

@dataclass
class ProductHandle:
    """Infinite product of factors u_n with finitely many zeros.

    Partial products past max(zero_indices) are nonzero.  Registered
    structure (factors of the form 1 +/- a_n) and closed forms enable
    certified verdicts and limit enclosures.
    """

    factors: Optional[TermStream]
    zero_indices: tuple[int, ...] = ()
    family: Optional[str] = None
    params: dict = field(default_factory=dict)
    # Registered: ('one_plus' | 'one_minus', deltas handle) meaning u_n = 1 +/- a_n.
    delta_form: Optional[tuple[str, SeriesHandle]] = None
    closed_partial: Optional[Callable[[int], Union[Fraction, Enclosure]]] = None
    limit_enclosure: Optional[Callable[[int], Enclosure]] = None

    @property
    def start(self) -> int:
        base = self.factors.n0 if self.factors is not None else 1
        return max([base] + [z + 1 for z in self.zero_indices])

    def partial_product(self, n: int) -> Fraction:
        """Exact partial product over [start, n], skipping nothing."""
        if self.factors is None:
            raise ValueError("factors are not exactly rational; use closed_partial")
        total = Fraction(1)
        for k in range(self.start, n + 1):
            v = self.factors.term(k)
            if not isinstance(v, Fraction):
                raise ValueError("exact partial products need rational factors")
            total *= v
        return total


def make_product(family: str, **params) -> ProductHandle:
    """Registered product families.

    one_minus_inv_sq (from n=2): prod (1 - 1/n^2); one_plus_inv:
    prod (1 + 1/n); one_minus_inv (from n=2); one_plus(deltas=SeriesHandle);
    one_minus(deltas); one_plus_inv_exp: prod (1 + 1/n) e^(-1/n).
    """
    if family == "one_minus_inv_sq":
        start = params.get("start", 2)
        stream = TermStream(lambda n: 1 - Fraction(1, n * n), start, "1 - 1/n^2")
        deltas = SeriesHandle(
            TermStream(lambda n: Fraction(1, n * n), start, "1/n^2"), "p_series", {"p": Fraction(2)}
        )
        return ProductHandle(
            stream,
            family="one_minus_inv_sq",
            params={"start": start},
            delta_form=("one_minus", deltas),
            closed_partial=lambda n: Fraction(n + 1, 2 * n),
            limit_enclosure=lambda digits: Enclosure.point(Fraction(1, 2)),
        )
    if family == "one_plus_inv":
        stream = TermStream(lambda n: 1 + Fraction(1, n), 1, "1 + 1/n")
        deltas = SeriesHandle(
            TermStream(lambda n: Fraction(1, n), 1, "1/n"), "p_series", {"p": Fraction(1)}
        )
        return ProductHandle(
            stream,
            family="one_plus_inv",
            delta_form=("one_plus", deltas),
            closed_partial=lambda n: Fraction(n + 1),
        )
    if family == "one_minus_inv":
        stream = TermStream(lambda n: 1 - Fraction(1, n), 2, "1 - 1/n")
        deltas = SeriesHandle(
            TermStream(lambda n: Fraction(1, n), 2, "1/n"), "p_series", {"p": Fraction(1)}
        )
        return ProductHandle(
            stream,
            family="one_minus_inv",
            delta_form=("one_minus", deltas),
            closed_partial=lambda n: Fraction(1, n),
        )
    if family == "one_plus":
        deltas = params["deltas"]
        stream = TermStream(lambda n: 1 + deltas.term(n), deltas.n0, "1 + a_n")
        return ProductHandle(stream, family="one_plus", delta_form=("one_plus", deltas))
    if family == "one_minus":
        deltas = params["deltas"]
        stream = TermStream(lambda n: 1 - deltas.term(n), deltas.n0, "1 - a_n")
        return ProductHandle(stream, family="one_minus", delta_form=("one_minus", deltas))
    if family == "one_plus_inv_exp":
        # Factors (1 + 1/n) e^{-1/n} are irrational; the exact closed-form
        # partial product (n+1) e^{-H_n} is exposed as an enclosure.
        def closed(n: int) -> Enclosure:
            from certreal import powerseries as ps

            harmonic = ps.harmonic_number_enclosure(n, 25)
            e_neg = ps.exp_enclosure_over(-harmonic, 25)
            return e_neg.scale(n + 1)

        return ProductHandle(
            None,
            family="one_plus_inv_exp",
            closed_partial=closed,
        )
    raise ValueError(f"unknown product family {family!r}")


def product_converges(p: ProductHandle, horizon: int, policy: tuple = DEFAULT_POLICY) -> Verdict:
    """Verdict for an infinite product.

    Factors registered as 1 +/- a_n with 0 < a_n < 1 (prefix-checked)
    delegate to the series classifier on sum a_n: the product converges iff
    the series does.  Raw partial products over the horizon are reported in
    the certificate; a registered closed form supplies the limit enclosure.
    """
    if p.delta_form is not None:
        kind, deltas = p.delta_form
        checked = min(horizon, deltas.n0 + 512)
        # Convergence is unaffected by finitely many terms: the (0, 1)
        # hypothesis only needs to hold from some tail index onward.
        tail_start = None
        for n in range(deltas.n0, checked + 1):
            a = deltas.term(n)
            inside = isinstance(a, Fraction) and 0 < a < 1
            if tail_start is None:
                if inside:
                    tail_start = n
            elif not inside:
                raise ValueError(
                    f"delta a_{n} = {a} outside (0, 1) after tail start {tail_start}"
                )
        if tail_start is None:
            raise ValueError("no checked delta lies in (0, 1); reduction inapplicable")
        series_verdict = classify(deltas, policy, horizon)
        witnesses = {
            "delta_series": deltas.terms.name,
            "form": kind,
            "tail_start": tail_start,
            "series_status": series_verdict.status.value,
        }
        if p.closed_partial is not None:
            witnesses["partial_product_at_horizon"] = p.closed_partial(horizon)
        if series_verdict.status is Status.CONVERGES:
            cert = TestCertificate(
                "registered:product_delta_reduction",
                witnesses,
                machine_checked=series_verdict.certificate.machine_checked,
                asserted=("0 < a_n < 1 beyond the checked prefix",)
                + series_verdict.certificate.asserted,
                detail="product of (1 +/- a_n) converges iff sum a_n converges",
            )
            value = p.limit_enclosure(12) if p.limit_enclosure is not None else None
            return Verdict(Status.CONVERGES, cert, value, trace=series_verdict.trace)
        if series_verdict.status is Status.DIVERGES:
            cert = TestCertificate(
                "registered:product_delta_reduction",
                witnesses,
                machine_checked=series_verdict.certificate.machine_checked,
                asserted=("0 < a_n < 1 beyond the checked prefix",)
                + series_verdict.certificate.asserted,
                detail="product of (1 +/- a_n) diverges iff sum a_n diverges",
            )
            return Verdict(Status.DIVERGES, cert, trace=series_verdict.trace)
        return Verdict(Status.INCONCLUSIVE, None, None, trace=series_verdict.trace)
    if p.family == "one_plus_inv_exp":
        # Registered fact: log-factors ln(1+1/n) - 1/n are O(1/n^2); the
        # closed-form partial product (n+1) e^{-H_n} tends to e^{-gamma}.
        cert = TestCertificate(
            "registered:product_log_comparison",
            {
                "partial_product_at_horizon": p.closed_partial(horizon),
                "comparison": "|ln u_n| <= 1/n^2 (registered)",
            },
            detail="sum ln u_n converges absolutely by comparison with 1/n^2",
        )
        from certreal import powerseries as ps

        def limit(digits: int) -> Enclosure:
            gamma_window = ps.euler_gamma_window(200000, digits + 2)
            return ps.exp_enclosure_over(-gamma_window, digits + 2)

        return Verdict(Status.CONVERGES, cert, limit(8))
    trace = (("product", "no registered structure; raw partial products only"),)
    return Verdict(Status.INCONCLUSIVE, None, None, trace)


def product_log_series_verdict(p: ProductHandle, horizon: int) -> Verdict:
    """Independent route: bracket ln u_n by rationals and classify the sum.

    For u_n = 1 + a_n with 0 < a_n <= 1: a_n/2 <= ln u_n <= a_n.
    For u_n = 1 - a_n with 0 < a_n <= 1/2: a_n <= -ln u_n <= 2 a_n.
    Either way sum ln u_n converges iff sum a_n does, by two-sided
    comparison; the bracket hypotheses are machine-checked on the prefix.
    """
    if p.delta_form is None:
        raise ValueError("log-series route needs a registered 1 +/- a_n form")
    kind, deltas = p.delta_form
    limit_bound = Fraction(1) if kind == "one_plus" else Fraction(1, 2)
    checked = min(horizon, deltas.n0 + 512)
    # Finitely many leading terms may fall outside the bracket range; the
    # comparison argument applies to the tail, which decides convergence.
    tail_start = None
    for n in range(deltas.n0, checked + 1):
        a = deltas.term(n)
        inside = isinstance(a, Fraction) and 0 < a <= limit_bound
        if tail_start is None:
            if inside:
                tail_start = n
        elif not inside:
            raise ValueError(
                f"a_{n} = {a} outside (0, {limit_bound}] after tail start {tail_start}"
            )
    if tail_start is None:
        raise ValueError("no checked delta lies in the bracket range")
    series_verdict = classify(deltas, DEFAULT_POLICY, horizon)
    if series_verdict.status is Status.INCONCLUSIVE:
        return series_verdict
    cert = TestCertificate(
        "registered:product_log_bracket",
        {
            "form": kind,
            "bracket": "a_n/2 <= ln(1+a_n) <= a_n"
            if kind == "one_plus"
            else "a_n <= -ln(1-a_n) <= 2 a_n",
            "series_status": series_verdict.status.value,
        },
        machine_checked=series_verdict.certificate.machine_checked,
        asserted=series_verdict.certificate.asserted,
    )
    return Verdict(series_verdict.status, cert, trace=series_verdict.trace)
