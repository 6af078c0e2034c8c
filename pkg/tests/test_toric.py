from fractions import Fraction

import pytest

from toricgw.ratfunc import RatFunc
from toricgw.toric import (BasisError, GenericityError, ToricBundleData,
                           fiber_p1, fiber_p1xp1, fiber_p2, p1_bundle_over_p1,
                           point_base, target_point)


def test_fixed_points_small_fibers():
    assert fiber_p1().fixed_points() == ((1,), (2,))
    assert fiber_p2().fixed_points() == ((1,), (2,), (3,))
    assert fiber_p1xp1().fixed_points() == ((1, 3), (1, 4), (2, 3), (2, 4))
    assert target_point().fixed_points() == ((),)


def test_moment_value_on_wall_is_rejected():
    data = ToricBundleData(((1, 1),), (0,), ("l1", "l2"),
                           point_base(("l1", "l2"), 2), ((0,), (1,)))
    with pytest.raises(GenericityError):
        data.fixed_points()


def test_restrictions_p1():
    d = fiber_p1()
    r1 = d.restrictions((1,))
    vars = d.base.algebra.vars
    l1 = RatFunc.variable(vars, "l1")
    l2 = RatFunc.variable(vars, "l2")
    assert r1.p == (l1,)
    assert r1.u == (RatFunc.zero(vars), l1 - l2)
    r2 = d.restrictions((2,))
    assert r2.p == (l2,)
    assert r2.u == (l2 - l1, RatFunc.zero(vars))


def test_restrictions_p2():
    d = fiber_p2()
    vars = d.base.algebra.vars
    l = [RatFunc.variable(vars, n) for n in ("l1", "l2", "l3")]
    r = d.restrictions((1,))
    assert r.u[1] == l[0] - l[1]
    assert r.u[2] == l[0] - l[2]


def test_bundle_restriction_picks_up_twisting_class():
    # second summand has degree -1, so its twisting class is +h and the
    # divisor restriction at the first fixed point is (l1 - l2) - h
    d = p1_bundle_over_p1((0, -1))
    r = d.restrictions((1,))
    alg = d.base.algebra
    vars = alg.vars
    expected = (alg.unit.scale(RatFunc.variable(vars, "l1")
                               - RatFunc.variable(vars, "l2"))
                - alg.basis("h"))
    assert r.U[1] == expected
    assert r.U[0].is_zero()


def test_orbit_edges():
    assert set(fiber_p1().one_dim_orbits()) == {((1,), (2,)), ((2,), (1,))}
    assert len(fiber_p2().one_dim_orbits()) == 6
    edges = fiber_p1xp1().one_dim_orbits()
    for a in fiber_p1xp1().fixed_points():
        assert sum(1 for (x, _) in edges if x == a) == 2
    assert target_point().one_dim_orbits() == ()


def test_tangent_weight_antisymmetry():
    for d in (fiber_p1(), fiber_p2(), fiber_p1xp1()):
        for a, b in d.one_dim_orbits():
            assert d.chi_class(a, b) == -d.chi_class(b, a)


def test_chi_orientation_flip():
    d = fiber_p1()
    flipped = ToricBundleData(d.m, d.omega, d.lambda_names, d.base,
                              d.monomials, orientation=-1)
    a, b = (1,), (2,)
    assert flipped.chi_class(a, b) == -d.chi_class(a, b)


def test_euler_normal_classes():
    d1 = fiber_p1()
    vars = d1.base.algebra.vars
    l1 = RatFunc.variable(vars, "l1")
    l2 = RatFunc.variable(vars, "l2")
    assert d1.euler_normal((1,)).coeffs == ((l1 - l2),)

    d2 = fiber_p2()
    vars = d2.base.algebra.vars
    l = [RatFunc.variable(vars, n) for n in ("l1", "l2", "l3")]
    assert d2.euler_normal((1,)).coeffs == ((l[0] - l[1]) * (l[0] - l[2]),)


def test_atiyah_bott_sums_p1():
    d = fiber_p1()
    vars = d.base.algebra.vars
    total0 = RatFunc.zero(vars)
    total1 = RatFunc.zero(vars)
    for a in d.fixed_points():
        e = d.euler_normal(a).coeffs[0]
        total0 = total0 + e.inv()
        total1 = total1 + d.restrictions(a).p[0] * e.inv()
    assert total0.is_zero()
    assert total1 == RatFunc.one(vars)


def test_atiyah_bott_sums_p2():
    d = fiber_p2()
    vars = d.base.algebra.vars
    for power, expected in ((0, RatFunc.zero(vars)),
                            (1, RatFunc.zero(vars)),
                            (2, RatFunc.one(vars))):
        total = RatFunc.zero(vars)
        for a in d.fixed_points():
            e = d.euler_normal(a).coeffs[0]
            total = total + d.restrictions(a).p[0] ** power * e.inv()
        assert total == expected, power


def test_fixed_point_count_matches_basis_size():
    for d in (target_point(), fiber_p1(), fiber_p2(), fiber_p1xp1(),
              p1_bundle_over_p1()):
        assert len(d.fixed_points()) == len(d.monomials)
        # and the chosen monomials really evaluate to a basis
        d.global_algebra()


def test_dependent_monomials_raise():
    names = ("l1", "l2", "l3", "l4")
    data = ToricBundleData(((1, 1, 0, 0), (0, 0, 1, 1)), (1, 1), names,
                           point_base(names, 4),
                           ((0, 0), (1, 0), (0, 1), (2, 0)))
    with pytest.raises(BasisError):
        data.global_algebra()


def test_curve_integrals_on_base():
    d = p1_bundle_over_p1((0, -1))
    assert d.base.integrate_curve(0, d.base.lambdas[0]) == 0
    assert d.base.integrate_curve(0, d.base.lambdas[1]) == 1
    assert d.base.integrate_curve(0, d.base.c1) == 2
