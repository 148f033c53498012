from fractions import Fraction as F

import pytest

from certreal.core import Status, poly_descriptor, sqrt_enclosure
from certreal.sequences import (
    TaggedAngle,
    detect_limit,
    limsup_liminf_window,
    make_named,
    partial_sum_stream,
    second_symmetric_quotient,
)


def test_named_family_examples():
    assert make_named("recursive_sqrt2").term(2) == F(4, 3)
    assert make_named("harmonic").term(1) == 1
    # exact rational exponentiation oracle: (1 + 1/3)^3
    assert make_named("euler_pow").term(3) == F(4, 3) ** 3 == F(64, 27)
    assert make_named("alt_harmonic").term(2) == F(-1, 2)
    with pytest.raises(ValueError):
        make_named("sin_rational", q=0)


def test_recursive_sqrt2_monotone_bounded():
    stream = make_named("recursive_sqrt2")
    terms = stream.terms(50)
    assert all(a < b < 2 for a, b in zip(terms, terms[1:]))
    # |a_n^2 - 2| shrinks geometrically (exact check)
    gaps = [2 - a * a for a in terms]
    assert all(nxt < prev / 2 for prev, nxt in zip(gaps, gaps[1:]))


def test_detect_limit_sqrt2():
    stream = make_named("recursive_sqrt2")
    verdict = detect_limit(stream, "monotone_certified", 40, bound=2, monotone="increasing")
    assert verdict.status is Status.CONVERGES
    assert verdict.value.width() < F(1, 10**9)
    # both enclosures certify sqrt(2), so they must intersect
    verdict.value.intersect(sqrt_enclosure(2, 15))


def test_detect_limit_nested_in_horizon():
    stream = make_named("recursive_sqrt2")
    previous = None
    for horizon in (5, 10, 20, 40):
        enc = detect_limit(stream, "monotone_certified", horizon, bound=2,
                           monotone="increasing").value
        if previous is not None:
            assert previous.contains(enc)
        previous = enc


def test_cauchy_window_period_two():
    stream = make_named("custom", gen=lambda n: F((-1) ** n), n0=1)
    verdict = detect_limit(stream, "cauchy_window", 50, eps=F(1, 2))
    assert verdict.status is Status.INCONCLUSIVE
    assert verdict.trace[0][1]["oscillation"] == 2


def test_cauchy_window_harmonic_partial_sums():
    # s_2n - s_n >= 1/2 keeps the window oscillation at or above eps = 1/2
    sums = partial_sum_stream(make_named("harmonic"))
    verdict = detect_limit(sums, "cauchy_window", 64, eps=F(1, 2))
    assert verdict.status is Status.INCONCLUSIVE
    assert verdict.trace[0][1]["oscillation"] >= F(1, 2)


def test_cauchy_window_settles():
    stream = make_named("geometric", r=F(1, 2))
    verdict = detect_limit(stream, "cauchy_window", 64, eps=F(1, 1000))
    assert verdict.status is Status.CONVERGES
    assert not verdict.certificate.machine_checked  # empirical by design


def test_window_stats_alternating_signs():
    stream = make_named("custom", gen=lambda n: F((-1) ** n), n0=1)
    stats = limsup_liminf_window(stream, 3, 2)
    assert stats.inf_tail_window == -1 and stats.sup_tail_window == 1


def test_window_stats_constant():
    stats = limsup_liminf_window(make_named("constant", c=F(5, 7)), 1, 10)
    assert stats.inf_tail_window == stats.sup_tail_window == F(5, 7)


def test_window_stats_sin_rational_symbolic():
    stream = make_named("sin_rational", q=5)
    stats = limsup_liminf_window(stream, 1, 5)
    assert stats.inf_tail_window == TaggedAngle(F(4, 5))  # sin(8 pi/5)
    assert stats.sup_tail_window == TaggedAngle(F(1, 5))  # sin(2 pi/5)


def test_tagged_angle_exact_ordering_chain():
    fifth = [TaggedAngle(F(k, 5)) for k in range(5)]
    # sin(8pi/5) < sin(6pi/5) < 0 < sin(4pi/5) < sin(2pi/5)
    assert fifth[4] < fifth[3] < TaggedAngle(F(0)) < fifth[2] < fifth[1]
    assert TaggedAngle(F(0)) == 0
    assert TaggedAngle(F(1, 12)) == F(1, 2)
    # reflection equality: sin(2pi/5) == sin(pi - 2pi/5)
    assert TaggedAngle(F(1, 5)) == TaggedAngle(F(3, 10))


def test_monotone_window_left_endpoint():
    stream = make_named("recursive_sqrt2")
    for n in (1, 4, 9):
        stats = limsup_liminf_window(stream, n, 7)
        assert stats.inf_tail_window == stream.term(n)
        assert stats.argmin == n


def test_second_symmetric_quotient():
    square = poly_descriptor([0, 0, 1])
    assert second_symmetric_quotient(square, F(7, 3), F(1, 10)) == 2
    cube = poly_descriptor([0, 0, 0, 1])
    # (1+h)^3 + (1-h)^3 - 2 = 6 h^2 identically, so the quotient is 6 exactly
    for h in (F(1, 10), F(1, 7), F(3, 5)):
        assert second_symmetric_quotient(cube, 1, h) == 6
    quartic = poly_descriptor([0, 0, 0, 0, 1])
    assert second_symmetric_quotient(quartic, 0, F(1, 2)) == F(1, 2)
    with pytest.raises(ValueError):
        second_symmetric_quotient(square, 0, 0)
