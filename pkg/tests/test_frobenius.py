from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricgw.fock import central_constant
from toricgw.frobenius import (FrobeniusError, GradingOps, loop_data,
                               nonequivariant_limit, point_cohomology,
                               projective_space_cohomology, specialize,
                               tensor_cohomology)
from toricgw.linalg import Mat
from toricgw.ratfunc import RatFunc
from toricgw.toric import (fiber_p1, fiber_p1xp1, fiber_p2,
                           make_toric_fiber_algebra, p1_bundle_over_p1,
                           target_point)


def test_point_algebra():
    alg = point_cohomology()
    assert alg.rank == 1
    assert alg.unit.pair(alg.unit) == RatFunc.one(())
    g = GradingOps(alg)
    assert g.mu_apply(alg.unit).is_zero()


def test_projective_line_mu_and_rho():
    alg = projective_space_cohomology(1)
    g = GradingOps(alg)
    one = alg.basis("1")
    p = alg.basis("p")
    assert g.mu_apply(one) == one.scale(Fraction(-1, 2))
    assert g.mu_apply(p) == p.scale(Fraction(1, 2))
    assert g.rho_apply(one) == p.scale(2)
    assert g.rho_apply(p).is_zero()


def test_loop_algebra_condition():
    # a matrix identity for degree-homogeneous pairings, so it is checked
    # on the non-equivariant algebras
    d4 = fiber_p1xp1()
    df = p1_bundle_over_p1()
    algebras = [point_cohomology(), projective_space_cohomology(1),
                projective_space_cohomology(2),
                nonequivariant_limit(d4.global_algebra(), d4.lambda_names),
                nonequivariant_limit(df.global_algebra(), df.lambda_names)]
    for alg in algebras:
        assert GradingOps(alg).loop_condition_holds()


def test_dual_basis():
    alg = projective_space_cohomology(1)
    duals = alg.dual_basis()
    assert duals[0] == alg.basis("p")
    assert duals[1] == alg.basis("1")
    # defining property in a localized algebra with nontrivial weights
    loc = fiber_p2().localized().algebra
    duals = loc.dual_basis()
    for i, d in enumerate(duals):
        for j in range(loc.rank):
            want = RatFunc.one(loc.vars) if i == j else RatFunc.zero(loc.vars)
            assert d.pair(loc.basis_at(j)) == want


def test_localized_pairing_p1():
    # the unit pairs to the sum of inverse Euler weights, which cancels
    d = fiber_p1()
    loc = d.localized()
    vars = loc.base.vars
    l1 = RatFunc.variable(vars, "l1")
    l2 = RatFunc.variable(vars, "l2")
    oracle = (l1 - l2).inv() + (l2 - l1).inv()
    unit = loc.algebra.unit
    assert unit.pair(unit) == oracle
    assert oracle.is_zero()
    # blocks are orthogonal
    e1 = loc.idempotent((1,))
    e2 = loc.idempotent((2,))
    assert e1.pair(e2).is_zero()
    assert (e1 * e2).is_zero()
    assert e1 * e1 == e1


def test_global_equivariant_p1():
    d = fiber_p1()
    alg = d.global_algebra()
    vars = alg.vars
    l1 = RatFunc.variable(vars, "l1")
    l2 = RatFunc.variable(vars, "l2")
    p = alg.basis_at(1)
    # the generator satisfies (p - l1)(p - l2) = 0
    rel = (p - alg.unit.scale(l1)) * (p - alg.unit.scale(l2))
    assert rel.is_zero()
    expected = Mat([[RatFunc.zero(vars), RatFunc.one(vars)],
                    [RatFunc.one(vars), l1 + l2]])
    assert alg.pairing == expected


def test_nonequivariant_limit_p1():
    d = fiber_p1()
    alg = nonequivariant_limit(d.global_algebra(), d.lambda_names)
    p = alg.basis_at(1)
    assert (p * p).is_zero()
    assert alg.unit.pair(p) == RatFunc.one(alg.vars)
    g = GradingOps(alg)
    assert g.rho_apply(alg.unit) == p.scale(2)
    assert g.rho_apply(p).is_zero()


def test_p1xp1_matches_tensor_square():
    d = fiber_p1xp1()
    alg = nonequivariant_limit(d.global_algebra(), d.lambda_names)
    square = tensor_cohomology(projective_space_cohomology(1),
                               projective_space_cohomology(1))
    # toric order 1, p1, p2, p1p2 vs tensor order 1x1, 1xp, px1, pxp
    perm = (0, 2, 1, 3)
    n = alg.rank
    for i in range(n):
        for j in range(n):
            assert alg.pairing[i, j] == square.pairing[perm[i], perm[j]]
            got = alg.table[i][j]
            want = square.table[perm[i]][perm[j]]
            for l in range(n):
                assert got[l] == want[perm[l]]
    for l in range(n):
        assert alg.c1.coeffs[l] == square.c1.coeffs[perm[l]]


def test_evaluation_is_ring_map():
    d = p1_bundle_over_p1()
    alg = d.global_algebra()
    loc = d.localized().algebra
    ev = d.evaluation()
    n = alg.rank

    def push(cls):
        col = ev * Mat.column(cls.coeffs)
        return loc.from_coeffs([col[r, 0] for r in range(n)])

    for i in range(n):
        for j in range(n):
            a = alg.basis_at(i)
            b = alg.basis_at(j)
            assert push(a) * push(b) == push(a * b)


def test_str_mu_mu_star_two_ways():
    for alg in (projective_space_cohomology(1), projective_space_cohomology(2),
                fiber_p1xp1().global_algebra()):
        g = GradingOps(alg)
        by_trace = g.str_mu_mu_star()
        by_eigen = sum((-Fraction(d - alg.dim, 2) ** 2 for d in alg.degrees),
                       Fraction(0))
        assert by_trace == by_eigen


def test_central_constants_via_bridge():
    d1 = fiber_p1()
    a1 = nonequivariant_limit(d1.global_algebra(), d1.lambda_names)
    loop = loop_data(a1)
    assert central_constant(a1.chi, loop.mu, loop.pairing) == 0

    d2 = fiber_p2()
    a2 = nonequivariant_limit(d2.global_algebra(), d2.lambda_names)
    loop = loop_data(a2)
    assert central_constant(a2.chi, loop.mu, loop.pairing) \
        == Fraction(3, 16) - Fraction(1, 2)


def test_specialize_detects_poles():
    loc = fiber_p1().localized().algebra
    with pytest.raises(FrobeniusError):
        specialize(loc, {"l1": Fraction(0), "l2": Fraction(0)},
                   drop=("l1", "l2"))


def test_point_target_rank_one():
    alg = make_toric_fiber_algebra(target_point())
    assert alg.rank == 1
    assert alg.chi == 1
    assert alg.dim == 0


_F1_LOCALIZED = p1_bundle_over_p1().localized().algebra


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4),
       st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_frobenius_property_on_random_classes(xs, ys):
    alg = _F1_LOCALIZED
    a = alg.from_coeffs([Fraction(v) for v in xs])
    b = alg.from_coeffs([Fraction(v) for v in ys])
    for l in range(alg.rank):
        c = alg.basis_at(l)
        assert (a * b).pair(c) == a.pair(b * c)
    assert a * b == b * a
