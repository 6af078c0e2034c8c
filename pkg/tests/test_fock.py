"""Quantization machinery and the point target's Virasoro-solved potential."""

import random
from fractions import Fraction

import pytest

from toricgw.fock import (LoopData, ModeOp, PointVirasoro, apply_virasoro,
                          central_constant, omega, quantize,
                          solve_point_potential, virasoro_l)
from toricgw.linalg import Mat
from toricgw.ratfunc import RatFunc

from oracles import dvv_correlator, genus0_closed


def p1_loop() -> LoopData:
    """Non-equivariant projective line: basis (unit, hyperplane)."""
    vars = ("h",)
    zero = RatFunc.zero(vars)
    one = RatFunc.one(vars)
    pairing = Mat([[zero, one], [one, zero]])
    mu = Mat([[one.scale(Fraction(-1, 2)), zero], [zero, one.scale(Fraction(1, 2))]])
    rho = Mat([[zero, zero], [one.scale(2), zero]])
    return LoopData(vars, pairing, mu, rho, chi=Fraction(2))


def test_l0_point_is_z_ddz_plus_half():
    loop = LoopData.point()
    l0 = virasoro_l(0, loop, -4, 4)
    for m in range(-4, 5):
        ent = l0.entry(m, m)
        assert ent[0, 0].const_value() == Fraction(2 * m + 1, 2)
    assert all(n == m for (n, m) in l0.entries)


def test_classical_commutators_on_p1():
    loop = p1_loop()
    W = 14
    ops = {k: virasoro_l(k, loop, -W, W) for k in range(-1, 5)}
    for m in range(-1, 3):
        for n in range(-1, 3):
            if m + n < -1:
                continue
            ab = ops[m].compose(ops[n])
            ba = ops[n].compose(ops[m])
            lhs = ab - ba
            rhs = ops[m + n].scale(n - m)
            lo, hi = -W + 8, W - 8
            assert lhs.equal_on(rhs, lo, hi), (m, n)


def test_omega_antisymmetry_of_lk():
    loop = p1_loop()
    lk = {k: virasoro_l(k, loop, -8, 8) for k in range(-1, 3)}
    one = RatFunc.one(loop.vars)
    # basis loop-space elements z^a phi_i within a safe window
    basis = []
    for a in range(-5, 5):
        for i in range(2):
            vec = {a: [one if j == i else RatFunc.zero(loop.vars) for j in range(2)]}
            basis.append(vec)
    for k, op in lk.items():
        for f in basis:
            for g in basis:
                lhs = omega(op.apply(f), g, loop.pairing)
                rhs = omega(f, op.apply(g), loop.pairing)
                assert (lhs + rhs).is_zero(), k


def test_quantize_matches_hamiltonian_on_random_elements():
    loop = p1_loop()
    rng = random.Random(7)
    q_cap = p_cap = 6
    for k in (-1, 0, 1, 2):
        op = virasoro_l(k, loop, -2 - p_cap - k, q_cap + k + 1)
        qop = quantize(op, loop, q_cap, p_cap)
        # random element supported away from the caps so no coupling is clipped
        margin = k + 2
        for _ in range(4):
            f = {}
            for m in range(-1 - (p_cap - margin), q_cap - margin + 1):
                comps = [RatFunc.const(loop.vars, rng.randint(-2, 2)) for _ in range(2)]
                if any(not c.is_zero() for c in comps):
                    f[m] = comps
            direct = omega(f, op.apply(f), loop.pairing).scale(Fraction(1, 2))
            # coordinates of f
            q = {}
            p = {}
            for m, comps in f.items():
                if m >= 0:
                    for i, c in enumerate(comps):
                        q[(m, i)] = c
                else:
                    j = -1 - m
                    sgn = -1 if j % 2 == 0 else 1
                    col = Mat.column(comps)
                    pc = loop.pairing * col
                    for l in range(2):
                        p[(j, l)] = pc[l, 0].scale(sgn)
            total = RatFunc.zero(loop.vars)
            for (u, v), a in qop.A.items():
                qu, qv = q.get(u), q.get(v)
                if qu is None or qv is None:
                    continue
                w = a if u != v else a.scale(Fraction(1, 2))
                total = total + w * qu * qv
            for (u, v), b in qop.B.items():
                qu, pv = q.get(u), p.get(v)
                if qu is None or pv is None:
                    continue
                total = total + b * qu * pv
            for (u, v), c in qop.C.items():
                pu, pv = p.get(u), p.get(v)
                if pu is None or pv is None:
                    continue
                w = c if u != v else c.scale(Fraction(1, 2))
                total = total + w * pu * pv
            assert (total - direct).is_zero(), k


def _point_quantized(k: int, cap: int):
    loop = LoopData.point()
    op = virasoro_l(k, loop, -2 - cap - abs(k), cap + abs(k) + 1)
    return quantize(op, loop, cap, cap)


def test_cocycle_and_central_constant_point():
    cap = 8
    l1 = _point_quantized(1, cap)
    lm1 = _point_quantized(-1, cap)
    l0 = _point_quantized(0, cap)
    comm = l1.commutator(lm1)
    margin = 4
    diff = (comm - l0.scale(2)).restrict(cap - margin, cap - margin)
    assert diff.is_scalar()
    # Shifting the grading operator by c0 absorbs the scalar:
    # (l0 + c0) then satisfies the same bracket with no correction.
    c0 = central_constant(Fraction(1), Mat.zero(1, 1, ("h",)), Mat.identity(1, ("h",)))
    assert c0 == Fraction(1, 16)
    assert diff.const.const_value() == 2 * c0


def test_central_charges_for_small_targets():
    # independent supertrace evaluation for the line and the plane
    loop = p1_loop()
    assert central_constant(Fraction(2), loop.mu, loop.pairing) == Fraction(0)
    vars = ("h",)
    zero = RatFunc.zero(vars)
    one = RatFunc.one(vars)
    pairing = Mat([[zero, zero, one], [zero, one, zero], [one, zero, zero]])
    mu = Mat.diag([one.scale(-1), zero, one], vars)
    assert central_constant(Fraction(3), mu, pairing) == Fraction(3, 16) - Fraction(1, 2)


def test_higher_cocycles_vanish_point():
    cap = 10
    l0 = _point_quantized(0, cap)
    for k in (1, 2):
        lk = _point_quantized(k, cap)
        comm = l0.commutator(lk)
        margin = k + 3
        diff = (comm - lk.scale(-k)).restrict(cap - margin, cap - margin)
        assert diff.is_scalar(), k
        assert diff.const.is_zero(), k


def test_string_operator_quadratic_tail():
    qop = _point_quantized(-1, 6)
    assert set(qop.A) == {(((0, 0)), ((0, 0)))}
    val = qop.A[((0, 0), (0, 0))].const_value()
    assert val * val == 1


def test_point_potential_seed_values():
    pv = PointVirasoro(d_max=8)
    assert pv.correlator(0, (0, 0, 0)) == 1
    assert pv.correlator(1, (1,)) == Fraction(1, 24)
    assert pv.correlator(0, (1, 0, 0, 0)) == 1
    assert pv.correlator(2, (4,)) == Fraction(1, 1152)
    assert pv.correlator(0, (0, 0)) == 0
    assert pv.correlator(1, (0,)) == 0


def test_point_potential_matches_oracles_sample():
    pv = PointVirasoro(d_max=10)
    for g in (0, 1, 2):
        for n in range(1, 6):
            if 2 * g - 2 + n <= 0:
                continue
            total = 3 * g - 3 + n
            if total < 0:
                continue
            from toricgw.fock import _partitions_into
            for ds in _partitions_into(total, n):
                assert pv.correlator(g, ds) == dvv_correlator(g, ds), (g, ds)
                if g == 0:
                    assert pv.correlator(g, ds) == genus0_closed(ds)


def test_string_and_dilaton_identities_direct():
    pv = PointVirasoro(d_max=10)
    samples = [(0, (2, 1, 0, 0)), (1, (2, 1, 0)), (2, (3, 2, 1)), (1, (3, 0, 0))]
    for g, ds in samples:
        with_zero = pv.correlator(g, ds + (0,))
        string_sum = sum((pv.correlator(g, ds[:j] + (ds[j] - 1,) + ds[j + 1:])
                          for j in range(len(ds)) if ds[j] >= 1), Fraction(0))
        assert with_zero == string_sum, (g, ds)
        with_one = pv.correlator(g, ds + (1,))
        n = len(ds)
        assert with_one == (2 * g - 2 + n) * pv.correlator(g, ds), (g, ds)


def test_grading_eigenfunction_on_point_potential():
    pv = PointVirasoro(d_max=8)
    loop = LoopData.point()
    cap = 8
    op = virasoro_l(0, loop, -2 - cap, cap + 1)
    qop = quantize(op, loop, cap, cap)
    A = {(u[0], v[0]): c.const_value() for (u, v), c in qop.A.items()}
    B = {(u[0], v[0]): c.const_value() for (u, v), c in qop.B.items()}
    C = {(u[0], v[0]): c.const_value() for (u, v), c in qop.C.items()}
    tensors = (A, B, C, Fraction(0))  # uncorrected grading operator
    keys = [(1, ()), (0, (0, 0, 0)), (0, (1, 0, 0, 0)), (1, (1,)), (1, (1, 1)),
            (2, ()), (2, (2,)), (1, (2, 0))]
    for g, M in keys:
        res = pv.residual(tensors, g, M)
        expected = -pv.c0 if (g, M) == (1, ()) else Fraction(0)
        assert res == expected, (g, M)


def test_apply_virasoro_residuals_vanish():
    pv = PointVirasoro(d_max=9)
    keys = [(0, (0, 0)), (0, (1, 0, 0)), (1, ()), (1, (1,)), (2, (1,)), (0, (2, 1, 0))]
    for k in (-1, 0, 1, 2):
        table = apply_virasoro(pv, k, keys)
        assert all(v == 0 for v in table.values()), k


def test_solve_point_potential_table():
    pot = solve_point_potential(1, 4, d_max=6)
    assert pot.get(0, [(0, 0), (0, 0), (0, 0)]) == 1
    assert pot.get(1, [(1, 0)]) == Fraction(1, 24)
