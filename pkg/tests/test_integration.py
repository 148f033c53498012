import random
from fractions import Fraction as F

import pytest

from certreal.approx import gallery
from certreal.core import (
    Enclosure,
    FnDescriptor,
    Status,
    poly_descriptor,
    rational_power_enclosure,
    sqrt_enclosure,
)
from certreal.integration import (
    Comparison,
    ImproperSpec,
    MissingMetadataError,
    Partition,
    darboux,
    gamma,
    improper_integral,
    integrate_enclosure,
    parts_check,
    regular_partition,
    riemann_sum,
    substitution_check,
)

PARABOLA = poly_descriptor([0, 6, -1], name="6x-x^2")
GOLDEN_PARTITION = Partition((0, 2, 3, 5, 6))

STEP5 = FnDescriptor(
    name="step5",
    step_pieces=(
        (F(0), F(1), F(1)),
        (F(1), F(5, 4), F(4)),
        (F(5, 4), F(5, 3), F(3)),
        (F(5, 3), F(5, 2), F(2)),
        (F(5, 2), F(5), F(1)),
    ),
    point_values=(
        (F(0), F(1)), (F(1), F(1)), (F(5, 4), F(4)),
        (F(5, 3), F(3)), (F(5, 2), F(2)), (F(5), F(1)),
    ),
    darboux_only=True,
)


def test_regular_partition_examples():
    p = regular_partition(0, 10, 5)
    assert p.points == (0, 2, 4, 6, 8, 10)
    assert p.gap() == 2
    assert regular_partition(0, 1, 1).points == (0, 1)
    assert regular_partition(1, 4, 3).points == (1, 2, 3, 4)
    with pytest.raises(ValueError):
        regular_partition(4, 1, 3)


def test_darboux_golden_table():
    pair = darboux(PARABOLA, GOLDEN_PARTITION)
    assert pair.lower == 18
    assert pair.upper == 48
    assert pair.per_interval == ((0, 8), (8, 9), (5, 9), (0, 5))
    assert not pair.outer


def test_darboux_constant():
    const = poly_descriptor([F(7, 2)], name="const")
    pair = darboux(const, Partition((0, 1, F(3, 2), 4)))
    assert pair.lower == pair.upper == F(7, 2) * 4


def test_darboux_rational_indicator():
    dirichlet = gallery("rational_indicator")
    for k in (1, 5, 40):
        pair = darboux(dirichlet, regular_partition(0, 1, k))
        assert pair.lower == 0 and pair.upper == 1


def test_darboux_refuses_bare_oracle():
    bare = FnDescriptor(name="bare", eval_rat=lambda x: x)
    with pytest.raises(MissingMetadataError):
        darboux(bare, regular_partition(0, 1, 4))


def test_riemann_sum_examples():
    assert riemann_sum(PARABOLA, GOLDEN_PARTITION, [1, 3, 4, 5]) == 40
    const = poly_descriptor([F(7, 2)])
    assert riemann_sum(const, GOLDEN_PARTITION, "midpoint") == F(7, 2) * 6
    for n in (2, 5, 9, 31):
        value = riemann_sum(PARABOLA, regular_partition(0, 6, n), "right")
        assert value == F(36 * (n * n - 1), n * n)
    with pytest.raises(ValueError):
        riemann_sum(PARABOLA, GOLDEN_PARTITION, [1, 3, 4, 7])


def test_riemann_between_darboux():
    pair = darboux(PARABOLA, GOLDEN_PARTITION)
    for pick in ("left", "right", "midpoint"):
        value = riemann_sum(PARABOLA, GOLDEN_PARTITION, pick)
        assert pair.lower <= value <= pair.upper


def test_refinement_monotonicity_random():
    rng = random.Random(1234)
    for f in (PARABOLA, STEP5, poly_descriptor([1, 2, 0, 1], name="cubic")):
        hi = 5 if f is STEP5 else 6
        base = regular_partition(0, hi, 3)
        for _ in range(25):
            extras = sorted({F(rng.randrange(1, 10 * hi), 10) for _ in range(4)})
            extras = [e for e in extras if 0 < e < hi]
            refined = base.refine(extras)
            coarse, fine = darboux(f, base), darboux(f, refined)
            assert coarse.lower <= fine.lower <= fine.upper <= coarse.upper


def test_monotone_shrinkage_law():
    cube = poly_descriptor([0, 0, 0, 1], name="x^3")
    a, b = F(1, 2), F(7, 2)
    swing = cube.value_at(b) - cube.value_at(a)
    for k in range(1, 65):
        pair = darboux(cube, regular_partition(a, b, k))
        assert pair.width() == (b - a) * swing / k


def test_integral_golden_values():
    square = poly_descriptor([0, 0, 1], name="x^2")
    result = integrate_enclosure(square, 1, 4, F(1, 10**6), method="darboux")
    assert result.status is Status.CONVERGES
    assert result.width() <= F(1, 10**6)
    assert result.enclosure.contains(21)

    result = integrate_enclosure(PARABOLA, 0, 6, F(1, 10**6), method="darboux")
    assert result.enclosure.contains(36)
    assert result.width() <= F(1, 10**6)

    result = integrate_enclosure(STEP5, 0, 5, F(1, 1000))
    assert result.enclosure == Enclosure.point(F(89, 12))


def test_integral_additivity():
    square = poly_descriptor([0, 0, 1])
    whole = integrate_enclosure(square, 0, 4, F(1, 1000), method="darboux").enclosure
    left = integrate_enclosure(square, 0, 1, F(1, 2000), method="darboux").enclosure
    right = integrate_enclosure(square, 1, 4, F(1, 2000), method="darboux").enclosure
    combined = left + right
    assert combined.lo <= whole.hi and whole.lo <= combined.hi
    assert (left + right).contains(F(64, 3))


def test_lipschitz_mode_outer_flag():
    wiggle = FnDescriptor(name="lip", eval_rat=lambda x: abs(x - F(1, 3)), lipschitz=F(1))
    pair = darboux(wiggle, regular_partition(0, 1, 8))
    assert pair.outer
    # valid outer bracket around the true integral 5/18... check containment
    true_value = F(1, 2) * (F(1, 3) ** 2 + F(2, 3) ** 2)
    assert pair.lower <= true_value <= pair.upper
    result = integrate_enclosure(wiggle, 0, 1, F(1, 100))
    assert result.outer and result.enclosure.contains(true_value)


def test_improper_p_integral_at_infinity():
    f = FnDescriptor(
        name="x^-2",
        eval_rat=lambda x: 1 / (x * x),
        monotone="decreasing",
        antiderivative=FnDescriptor(name="-1/x", eval_rat=lambda x: -1 / x),
    )
    spec = ImproperSpec(
        f, F(1), None,
        comparisons=(Comparison("p_at_inf", p=F(2), const=F(1), from_x=F(1)),),
        nonnegative=True,
    )
    verdict = improper_integral(spec)
    assert verdict.status is Status.CONVERGES
    assert verdict.value.contains(1)
    assert verdict.value.width() <= F(1, 10**6)
    assert len(verdict.trace) > 1  # the expanding-horizon trace is kept


def test_improper_inverse_sqrt_at_zero():
    f = FnDescriptor(
        name="x^-1/2",
        eval_enc=lambda x, d: rational_power_enclosure(x, F(-1, 2), d),
        monotone="decreasing",
        antiderivative=FnDescriptor(
            name="2sqrt", eval_enc=lambda x, d: sqrt_enclosure(x, d).scale(2)
        ),
    )
    spec = ImproperSpec(
        f, F(0), F(1), singular_lo=True,
        comparisons=(Comparison("p_at_zero", p=F(1, 2), const=F(1)),),
        nonnegative=True,
    )
    verdict = improper_integral(spec)
    assert verdict.status is Status.CONVERGES
    assert verdict.value.contains(2)
    # dual route: plain Darboux on [1/4, 1] must bracket 2 sqrt(1) - 2 sqrt(1/4) = 1
    core = integrate_enclosure(f, F(1, 4), 1, F(1, 100), method="darboux")
    assert core.enclosure.contains(1)


def test_improper_singular_upper_endpoint_reflected():
    # integrand blows up at the upper endpoint: handled by reflection
    f = FnDescriptor(
        name="(1-x)^-1/2",
        eval_enc=lambda x, d: rational_power_enclosure(1 - x, F(-1, 2), d),
        monotone="increasing",
        antiderivative=FnDescriptor(
            name="-2sqrt(1-x)", eval_enc=lambda x, d: sqrt_enclosure(1 - x, d).scale(-2)
        ),
    )
    spec = ImproperSpec(
        f, F(0), F(1), singular_hi=True,
        comparisons=(Comparison("p_at_zero", p=F(1, 2), const=F(1)),),
        nonnegative=True,
    )
    verdict = improper_integral(spec, F(1, 10**4))
    assert verdict.status is Status.CONVERGES
    assert verdict.value.contains(2)


def test_improper_unbounded_below_reflected():
    from certreal.powerseries import exp_enclosure

    growth = FnDescriptor(
        name="e^x",
        eval_enc=lambda x, d: exp_enclosure(x, d),
        monotone="increasing",
        antiderivative=FnDescriptor(name="e^x", eval_enc=lambda x, d: exp_enclosure(x, d)),
    )
    spec = ImproperSpec(
        growth, None, F(0),
        comparisons=(Comparison("exp_at_inf", p=F(1), const=F(1), from_x=F(0)),),
        nonnegative=True,
    )
    verdict = improper_integral(spec, F(1, 10**4))
    assert verdict.status is Status.CONVERGES
    assert verdict.value.contains(1)


def test_improper_divergence_by_minorant():
    f = FnDescriptor(name="x/(x^2+1)", eval_rat=lambda x: x / (x * x + 1))
    spec = ImproperSpec(
        f, F(0), None,
        comparisons=(Comparison("minorant_p_at_inf", p=F(1), const=F(1, 2), from_x=F(1)),),
    )
    verdict = improper_integral(spec)
    assert verdict.status is Status.DIVERGES
    assert "unbounded" in verdict.certificate.witnesses["reason"]


def test_improper_without_partner_inconclusive():
    f = FnDescriptor(name="x^-2", eval_rat=lambda x: 1 / (x * x), monotone="decreasing",
                     antiderivative=FnDescriptor(name="-1/x", eval_rat=lambda x: -1 / x))
    spec = ImproperSpec(f, F(1), None)
    verdict = improper_integral(spec)
    assert verdict.status is Status.INCONCLUSIVE
    assert verdict.trace


def test_gamma_values():
    one = gamma(1, 6)
    assert one.contains(1) and one.width() <= F(1, 10**4)
    five = gamma(5, 6)
    assert five.contains(24) and five.width() <= F(1, 10**4)
    half = gamma(F(1, 2), 6)
    # sqrt(pi) reference from the library's own pi enclosure, then a square
    # root bracket of its midpoint (width far below the gamma width)
    from certreal.powerseries import pi_enclosure

    root_pi = sqrt_enclosure(pi_enclosure(20).midpoint(), 15)
    assert half.lo <= root_pi.lo and root_pi.hi <= half.hi
    assert half.width() <= F(1, 10**4)


def test_gamma_recursion_containment():
    for s in (F(1, 2), F(3, 2)):
        left = gamma(s + 1, 8)
        right = gamma(s, 8).scale(s)
        slack = left.width() + right.width()
        assert right.widen(slack).contains(left)


def test_gamma_rejects_nonpositive():
    with pytest.raises(ValueError):
        gamma(0)


def test_substitution_check_closed_form():
    # integral of x sqrt(16+x^2) over [-2, 3] against (125 - 20 sqrt(20))/3
    def eval_enc(x, d):
        return sqrt_enclosure(16 + x * x, d).times(Enclosure.point(x))

    def anti_enc(x, d):
        return rational_power_enclosure(16 + x * x, F(3, 2), d).scale(F(1, 3))

    f = FnDescriptor(
        name="x*sqrt(16+x^2)",
        eval_enc=eval_enc,
        monotone="increasing",
        antiderivative=FnDescriptor(name="(16+x^2)^(3/2)/3", eval_enc=anti_enc),
    )
    closed = (125 - sqrt_enclosure(20, 12).scale(20)).scale(F(1, 3))
    report = substitution_check(f, -2, 3, closed, target_width=F(1, 10**6))
    assert report.agree
    assert abs(report.left.midpoint() - closed.midpoint()) <= F(1, 10**6)
    # independent Darboux route at its feasible width must also agree
    lipschitz = f.with_meta(monotone=None, lipschitz=F(7), antiderivative=None)
    coarse = integrate_enclosure(lipschitz, -2, 3, F(1, 10), method="darboux")
    assert coarse.enclosure.lo <= closed.hi and closed.lo <= coarse.enclosure.hi


def test_substitution_check_odd_function():
    cube = poly_descriptor([0, 0, 0, 1], name="x^3")
    report = substitution_check(cube, -2, 2, Enclosure.point(0), target_width=F(1, 1000))
    assert report.agree and report.left.contains(0)


def test_substitution_check_even_function():
    square = poly_descriptor([0, 0, 1], name="x^2")
    half = integrate_enclosure(square, 0, 1, F(1, 10**7)).enclosure
    report = substitution_check(square, -1, 1, half.scale(2), target_width=F(1, 10**6))
    assert report.agree


def test_parts_check_polynomials():
    u = poly_descriptor([0, 1], name="x")
    v = poly_descriptor([0, 0, 1], name="x^2")
    report = parts_check(u, v, 0, 2)
    assert report.agree
    assert report.right.contains(u.value_at(2) * v.value_at(2))
