from fractions import Fraction as F

import pytest
from certreal.core import Enclosure, FnDescriptor, Status
from certreal.powerseries import exp_enclosure, ln_enclosure, pi_enclosure
from certreal.sequences import TermStream
from certreal.series import (
    DEFAULT_POLICY,
    SignClassExhausted,
    alternating_sum_with_bound,
    classify,
    make_product,
    make_series,
    product_converges,
    product_log_series_verdict,
    ratio_root_scan,
    rearrange_pattern,
    rearrange_riemann,
)


def test_partial_sum_examples():
    half_powers = make_series("geometric", a=F(1, 2), r=F(1, 2))
    assert half_powers.partial_sum(5) == F(31, 32)
    assert half_powers.partial_sum(1) == F(1, 2)
    alt = make_series("alt_harmonic")
    assert alt.partial_sum(4) == 1 - F(1, 2) + F(1, 3) - F(1, 4) == F(7, 12)


def test_geometric_closed_form_identity():
    a, r = F(2, 3), F(2, 3)
    handle = make_series("geometric", a=a, r=r)
    total = a / (1 - r)
    for n in (1, 2, 5, 17, 40):
        assert total == handle.partial_sum(n) + a * r**n / (1 - r)


def test_classification_table():
    assert classify(make_series("geometric", a=F(2, 3), r=F(2, 3))).status is Status.CONVERGES
    verdict = classify(make_series("geometric", a=F(2, 3), r=F(2, 3)))
    assert verdict.value == Enclosure.point(2)
    for r in (1, -1, 2):
        assert classify(make_series("geometric", a=1, r=F(r))).status is Status.DIVERGES
    outcomes = {F(1, 2): Status.DIVERGES, F(1): Status.DIVERGES,
                F(2): Status.CONVERGES, F(3): Status.CONVERGES}
    for p, status in outcomes.items():
        assert classify(make_series("p_series", p=p)).status is status
    assert classify(make_series("factorial_power", x=1)).status is Status.DIVERGES
    assert classify(make_series("factorial_power", x=F(1, 10))).status is Status.DIVERGES
    assert classify(make_series("two_pow_over_three_pow_minus_one")).status is Status.CONVERGES


def test_classify_trace_retained():
    verdict = classify(make_series("p_series", p=2))
    attempted = [test for test, _ in verdict.trace]
    assert attempted[:3] == ["nth_term", "geometric", "p_series"]
    with pytest.raises(ValueError):
        classify(make_series("harmonic"), policy=())


def test_harmonic_diverges_certified():
    verdict = classify(make_series("harmonic"))
    assert verdict.status is Status.DIVERGES
    assert verdict.certificate.test == "p_series"


def test_alternating_bound_ln2():
    magnitudes = TermStream(lambda k: F(1, k), 1)
    enc = alternating_sum_with_bound(magnitudes, 10**4)
    assert enc.width() <= F(2, 10**4 + 1)
    assert enc.contains(ln_enclosure(2, 20))


def test_alternating_bound_pi_quarter():
    magnitudes = TermStream(lambda k: F(1, 2 * k - 1), 1)
    enc = alternating_sum_with_bound(magnitudes, 10**4)
    assert enc.contains(pi_enclosure(20).scale(F(1, 4)))


def test_alternating_bound_zero_stream():
    zeros = TermStream(lambda k: F(0), 1)
    assert alternating_sum_with_bound(zeros, 100) == Enclosure.point(0)


def test_alternating_bound_rejects_violations():
    wobble = TermStream(lambda k: F(1, k) if k != 5 else F(2), 1)
    with pytest.raises(ValueError, match="index 5"):
        alternating_sum_with_bound(wobble, 10)


def test_ratio_root_scan_examples():
    scan = ratio_root_scan(make_series("exp_terms", x=1), 100)
    assert scan["ratio_window"].hi <= F(1, 100 // 2 + 1)
    geo = ratio_root_scan(make_series("geometric", a=1, r=F(3, 5)), 64)
    assert geo["ratio_window"] == Enclosure(F(3, 5), F(3, 5))

    handle = make_series("two_pow_over_three_pow_minus_one")
    scan = ratio_root_scan(handle, 100)
    window = scan["ratio_window"]
    assert abs(window.lo - F(2, 3)) < F(1, 10**6)
    assert abs(window.hi - F(2, 3)) < F(1, 10**6)
    # brute-force oracle over the same index range
    lo_idx, hi_idx = scan["scan_range"]
    ratios = [abs(handle.term(n + 1) / handle.term(n)) for n in range(lo_idx, hi_idx)]
    assert window == Enclosure(min(ratios), max(ratios))


def test_ratio_scan_zero_term_reported():
    gappy = make_series("custom", gen=lambda n: F(0) if n == 60 else F(1, n), n0=1)
    with pytest.raises(ZeroDivisionError, match="60"):
        ratio_root_scan(gappy, 100)


def _greedy_oracle(handle, target, steps):
    # Independent re-implementation: alternate sign classes greedily.
    order = []
    total = F(0)
    pos_idx, neg_idx = [], []
    n = handle.n0
    want_positive = True
    while len(order) < steps:
        value = handle.term(n)
        (pos_idx if value >= 0 else neg_idx).append((n, value))
        n += 1
        while len(order) < steps:
            queue = pos_idx if want_positive else neg_idx
            if not queue:
                break
            idx, term = queue.pop(0)
            total += term
            order.append(idx)
            if (want_positive and total > target) or (not want_positive and total < target):
                want_positive = not want_positive
    return order


def test_rearrange_riemann_matches_brute_force():
    alt = make_series("alt_harmonic")
    for target in (F(1, 4), F(7, 12)):
        result = rearrange_riemann(alt, target, 200)
        assert list(result.indices) == _greedy_oracle(make_series("alt_harmonic"), target, 200)


def test_rearrange_riemann_flip_overshoot_property():
    alt = make_series("alt_harmonic")
    result = rearrange_riemann(alt, F(1, 4), 2000)
    assert result.flips
    for flip in result.flips:
        assert flip.distance_to_target <= abs(flip.term)


def test_rearrange_exhaustion_reported():
    positives = make_series("custom", gen=lambda n: F(1, n), n0=1)
    with pytest.raises(SignClassExhausted):
        rearrange_riemann(positives, F(1, 2), 10, scan_cap=50)


def test_rearrange_pattern_three_halves_ln2():
    alt = make_series("alt_harmonic")
    steps = 3 * 2000
    result = rearrange_pattern(alt, 2, 1, steps)
    target = ln_enclosure(2, 20).scale(F(3, 2))
    assert abs(result.partial_sums[-1] - target.midpoint()) < F(1, 1000)


def test_absolutely_convergent_rearrangement_same_sum():
    # sum (-1)^(n-1)/n^2 converges absolutely; a fixed-pattern rearrangement
    # must land in the same alternating-series enclosure.
    alt_sq = make_series("alt_inv_square")
    enc = alternating_sum_with_bound(TermStream(lambda k: F(1, k * k), 1), 2000)
    rearranged = rearrange_pattern(alt_sq, 2, 1, 6000)
    tail_slack = F(1, 2000)  # bound on the rearranged tail past the window
    assert enc.widen(tail_slack).contains(rearranged.partial_sums[-1])
    verdict = classify(alt_sq, DEFAULT_POLICY + ("abs_convergence",))
    assert verdict.status is Status.CONVERGES


def test_integral_test_bridge_exact():
    # f(n+1) <= s_n - integral_1^n f <= a_1 for f(x) = 1/x^2, exactly.
    handle = make_series("inv_square")
    for n in (10, 100):
        s_n = handle.partial_sum(n)
        integral = 1 - F(1, n)  # exact antiderivative -1/x
        assert F(1, (n + 1) ** 2) <= s_n - integral <= 1


def test_product_partial_identities():
    prod = make_product("one_minus_inv_sq")
    for n in (2, 5, 10, 50):
        assert prod.partial_product(n) == F(n + 1, 2 * n)
    grows = make_product("one_plus_inv")
    for n in (1, 7, 30):
        assert grows.partial_product(n) == n + 1


def test_product_verdicts():
    verdict = product_converges(make_product("one_minus_inv_sq"), 100)
    assert verdict.status is Status.CONVERGES
    assert verdict.value == Enclosure.point(F(1, 2))
    assert product_converges(make_product("one_plus_inv"), 100).status is Status.DIVERGES
    assert product_converges(make_product("one_minus_inv"), 100).status is Status.DIVERGES


def test_product_euler_mascheroni_limit():
    prod = make_product("one_plus_inv_exp")
    verdict = product_converges(prod, 1000)
    assert verdict.status is Status.CONVERGES
    # closed-form partial product at 10^5 approaches e^-gamma
    partial = prod.closed_partial(10**5)
    gamma_ref = F("0.577215664901532")
    e_neg_gamma = exp_enclosure(-gamma_ref, 12)
    assert abs(partial.midpoint() - e_neg_gamma.midpoint()) < F(1, 10**4)
    assert verdict.value.intersect(e_neg_gamma)


def _registered_product_cases():
    def p_case(p):
        deltas = make_series("custom", gen=lambda n, _p=p: F(1, n**_p), n0=2,
                             name=f"1/n^{p}")
        deltas.family, deltas.params = "p_series", {"p": F(p)}
        return f"1/n^{p}", deltas

    def geo_case(r):
        deltas = make_series(
            "custom", gen=lambda n, _r=F(r): _r**n, n0=1, name=f"{r}^n"
        )
        deltas.family, deltas.params = "geometric", {"a": F(r), "r": F(r)}
        return f"{r}^n", deltas

    bases = [p_case(p) for p in (1, 2, 3, 4, 5)]
    bases += [geo_case(r) for r in (F(1, 2), F(1, 3), F(1, 4), F(2, 3), F(3, 4))]
    return [(sign, name, deltas) for sign in ("one_plus", "one_minus")
            for name, deltas in bases]


def test_product_vs_log_series_agreement_20_cases():
    cases = _registered_product_cases()
    assert len(cases) == 20
    for sign, name, deltas in cases:
        product = make_product(sign, deltas=deltas)
        direct = product_converges(product, 256)
        via_log = product_log_series_verdict(product, 256)
        assert direct.status == via_log.status, (sign, name)
        assert direct.status is not Status.INCONCLUSIVE, (sign, name)


def test_partial_sums_past_certificate_stay_inside_widened_enclosure():
    # Convergent verdicts with a sum enclosure: later partial sums live in
    # the enclosure widened by the certified tail bound.
    for family, kwargs in (("alt_harmonic", {}), ("geometric", {"a": F(2, 3), "r": F(2, 3)})):
        handle = make_series(family, **kwargs)
        verdict = classify(handle, horizon=200)
        enc = verdict.value
        tail = verdict.certificate.witnesses["tail_bound"]
        cutoff = verdict.certificate.witnesses.get("N", 200)
        for n in (cutoff, cutoff + 100, cutoff + 300):
            assert enc.widen(tail).contains(handle.partial_sum(n))


def test_integral_test_in_policy():
    from certreal.core import FnDescriptor
    from certreal.integration import Comparison, ImproperSpec

    inv_square_fn = FnDescriptor(
        name="x^-2",
        eval_rat=lambda x: 1 / (x * x),
        monotone="decreasing",
        antiderivative=FnDescriptor(name="-1/x", eval_rat=lambda x: -1 / x),
    )
    spec = ImproperSpec(
        inv_square_fn, F(1), None,
        comparisons=(Comparison("p_at_inf", p=F(2), const=F(1), from_x=F(1)),),
        nonnegative=True,
    )
    handle = make_series("custom", gen=lambda n: F(1, n * n), n0=1)
    verdict = classify(handle, policy=("integral",), integral_spec=spec)
    assert verdict.status is Status.CONVERGES
    assert verdict.certificate.test == "integral"
