import numpy as np
import pytest
from scipy.special import ellipk, gamma

from monotoda.algebra import CPoly
from monotoda.curves import DegenerateCurveError, HyperellipticCurve, SpectralCurve, n2_curve
from monotoda.riemann import (AbelMap, ESData, ESInfeasibleError, IndefiniteTauError,
                              abel_map, base_point_data, block_C, branch_points,
                              cofactor_identity, cover_M, covering_curve_n2, cyclic_basis, cyclic_block_matrices,
                              es_residual, es_solve, gamma_infinity_periods,
                              half_period_defect, homology_basis, inf_minus, inf_plus,
                              involution, oriented_cyclic_periods, periods, random_cyclic_blocks,
                              random_point, reducibility_check, riemann_constants,
                              theta_rotation_defect, toda_periods)
from monotoda.riemann.paths import SegmentSheet
from monotoda.riemann.periods import lattice_defect, reduce_to_cell
from monotoda.theta import theta

QUARTIC_HALF = 2 * np.sqrt(np.pi) * gamma(1.25) / gamma(0.75)     # int_-1^1 dx/sqrt(1-x^4)


def random_curve(rng, g):
    while True:
        f = CPoly(rng.normal(size=2 * g + 3) + 1j * rng.normal(size=2 * g + 3))
        try:
            return HyperellipticCurve(f)
        except DegenerateCurveError:
            continue


def random_toda(rng, n):
    return HyperellipticCurve.toda(n, rng.normal(size=n - 1), 0.5 + rng.random())


# -------------------------------------------------------------- branch points


def test_branch_points_quartics():
    b = branch_points(HyperellipticCurve(CPoly([1, 0, 0, 0, -1])))
    assert np.allclose(b.roots, [-1, -1j, 1j, 1], atol=1e-14)
    tp = 6 / np.sqrt(5)
    b = branch_points(HyperellipticCurve(CPoly([1, 0, tp, 0, 1])))
    assert np.allclose(np.sort(np.abs(b.roots)), [5 ** -0.25] * 2 + [5 ** 0.25] * 2, atol=1e-13)
    assert b.max_residual < 1e-14


def test_degenerate_rejected():
    with pytest.raises(DegenerateCurveError):
        HyperellipticCurve(CPoly([1, 0, -2, 0, 1]))


# -------------------------------------------------------------- homology


@pytest.mark.parametrize("g", [1, 2, 3])
def test_cut_basis_symplectic(rng, g):
    for _ in range(5):
        hb = homology_basis(branch_points(random_curve(rng, g)))
        assert hb.is_symplectic()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cyclic_basis_symplectic(rng, n):
    for _ in range(3):
        h = random_toda(rng, n)
        cb = cyclic_basis(h, homology_basis(branch_points(h)))
        assert cb.is_symplectic()
        assert cb.change_of_basis is not None
        assert round(abs(np.linalg.det(cb.change_of_basis))) == 1


# -------------------------------------------------------------- periods


def test_quartic_period_oracle():
    h = HyperellipticCurve(CPoly([1, 0, 0, 0, -1]))
    pd = periods(h)
    # loop periods are twice the branch-to-branch integral
    assert abs(abs(pd.B[0, 0]) - 2 * QUARTIC_HALF) < 1e-10
    assert abs(abs(pd.A[0, 0]) - np.sqrt(2) * QUARTIC_HALF) < 1e-10
    assert abs(pd.tau[0, 0] - (-1 + 1j)) < 1e-13
    half, _ = SegmentSheet(h.lead, np.array([-1, -1j, 1j, 1]), 0, 3).integral([0], 1e-13)
    assert abs(abs(half[0]) - QUARTIC_HALF) < 1e-10


def test_lemniscate_oracle_by_elliptic_k():
    # int_0^1 dx/sqrt(1-x^4) = K(1/sqrt 2)/sqrt 2
    assert abs(QUARTIC_HALF - 2 * ellipk(0.5) / np.sqrt(2)) < 1e-13


def test_t_prime_curve_tau_imaginary():
    pd = periods(HyperellipticCurve(CPoly([1, 0, 6 / np.sqrt(5), 0, 1])))
    assert abs(pd.tau[0, 0].real) < 1e-12 and pd.tau[0, 0].imag > 0
    # roots +-i 5^(-1/4), +-i 5^(1/4): tau = 2 K(k)/K(k') i with k^2 = 1/5
    assert abs(pd.tau[0, 0] - 2j * ellipk(0.2) / ellipk(0.8)) < 1e-12


def test_tau_riemann_conditions(rng):
    for k in range(20):
        h = random_curve(rng, 1 + k % 3)
        pd = periods(h)
        assert pd.symmetry_defect() < 1e-10
        assert pd.min_im_eig() > 0


def test_toda_periods_both_bases(rng):
    for n in (2, 3, 4):
        h = random_toda(rng, n)
        for cyc in (False, True):
            pd = toda_periods(h, cyclic=cyc)
            assert pd.symmetry_defect() < 1e-10 and pd.min_im_eig() > 0


def test_quadrature_convergence():
    for h in (HyperellipticCurve.toda(3, [0.5, 0.3], 1.0),
              HyperellipticCurve(CPoly([1, 0, 6 / np.sqrt(5), 0, 1]))):
        p1, p2 = periods(h, tol=1e-8), periods(h, tol=5e-9)
        assert np.abs(p1.A - p2.A).max() <= max(p1.errest, 1e-13)
        assert np.abs(p1.B - p2.B).max() <= max(p1.errest, 1e-13)


def test_reduce_to_cell(rng):
    tau = np.array([[1j + 0.3, 0.2], [0.2, 1.5j]])
    z = rng.normal(size=2) * 5 + 1j * rng.normal(size=2) * 5
    r, _ = reduce_to_cell(z, tau)
    assert lattice_defect(r - z, tau) < 1e-12


# -------------------------------------------------------------- ES constraint


def test_es_residual_structure():
    h = HyperellipticCurve.toda(2, [0.0], 1.0)
    pd = oriented_cyclic_periods(h)
    zero = es_residual(pd, ESData.from_list([0, 0]), 2)
    assert np.allclose(zero, [2.0])
    r10 = es_residual(pd, ESData.from_list([1, 0]), 2) - zero
    r01 = es_residual(pd, ESData.from_list([0, 1]), 2) - zero
    r23 = es_residual(pd, ESData.from_list([2, 3]), 2) - zero
    assert np.allclose(r23, 2 * r10 + 3 * r01, atol=1e-13)


def test_es_residual_scaling():
    # rescaling the curve by k scales the periods of -dx/(n y) by 1/k
    h = HyperellipticCurve.toda(2, [0.7], 1.0)
    k = 1.3
    h2 = HyperellipticCurve.toda(2, [0.7 * k ** 2], k ** 2)
    p1, p2 = oriented_cyclic_periods(h), oriented_cyclic_periods(h2)
    assert np.allclose(p2.A * k, p1.A, atol=1e-12)
    assert np.allclose(p2.B * k, p1.B, atol=1e-12)


def test_es_data_layout():
    e = ESData.from_list([1, 2, 3, 4])
    assert e.r0 == 1 and e.s0 == 3 and e.genus == 2
    assert np.array_equal(e.row(3), [1, 6, 9, 12])
    with pytest.raises(ValueError):
        ESData.from_list([1, 2, 3])


def test_es_solve_n2(solved_n2):
    rep, _ = solved_n2
    assert rep.converged and rep.norm < 1e-9
    # from the t = 0 start only the scale moves; |beta| = K(1/sqrt2)^2/4
    assert abs(rep.curve.beta_abs - ellipk(0.5) ** 2 / 4) < 1e-9
    assert abs(rep.curve.a[0]) < 1e-14


def test_es_solve_refined_quadrature(solved_n2):
    rep, _ = solved_n2
    fine = es_solve(2, ESData.from_list([1, 0]), HyperellipticCurve.toda(2, [0.0], 1.0),
                    quad_tol=1e-15)
    assert abs(fine.curve.beta_abs - rep.curve.beta_abs) < 1e-6
    assert fine.norm < 1e-9


def test_es_solve_stable_under_perturbation(solved_n2):
    rep, _ = solved_n2
    start = HyperellipticCurve.toda(2, [0.0], 1.01)
    other = es_solve(2, ESData.from_list([1, 0]), start)
    assert abs(other.curve.beta_abs - rep.curve.beta_abs) < 1e-9


def test_es_infeasible():
    h = HyperellipticCurve.toda(2, [0.0], 1.0)
    with pytest.raises(ESInfeasibleError):
        es_solve(2, ESData.from_list([0, 0]), h, max_iter=10)
    with pytest.raises(ValueError):
        es_solve(3, ESData.from_list([1, 0]), h)


def test_u_vector(solved_n2):
    rep, ud = solved_n2
    assert np.abs(ud.a_periods_after).max() < 1e-12
    assert abs(ud.residue) < 1e-10
    assert abs(ud.U[0] - 0.25) < 1e-10
    red = reducibility_check(SpectralCurve.cyclic(2, rep.curve.a, rep.curve.beta_abs))
    assert half_period_defect(ud.U, 2, np.array([[red.tau_hat]])) < 1e-7


def test_u_vector_bilinear(rng):
    for n in (2, 3):
        h = random_toda(rng, n)
        pd = oriented_cyclic_periods(h)
        ud = gamma_infinity_periods(h, pd)
        assert np.abs(ud.a_periods_after).max() < 1e-11
        assert abs(ud.residue) < 1e-9


# -------------------------------------------------------------- Abel map


def quartic():
    h = HyperellipticCurve(CPoly([1, 0, 0, 0, -1]))
    return h, periods(h)


def test_abel_map_basic(rng):
    h, pd = quartic()
    am = AbelMap(h, pd)
    P, Q = random_point(h, rng), random_point(h, rng)
    assert np.abs(abel_map(h, pd, P, P).z).max() == 0
    assert am(P, Q).equals(-am(Q, P), 1e-10)
    assert am(involution(P)).equals(-am(P), 1e-10)
    assert am(inf_minus(h)).equals(-am(inf_plus(h)), 1e-10)


def test_abel_path_independence(rng):
    h = HyperellipticCurve.toda(3, [0.5, 0.3], 1.0)
    pd = toda_periods(h)
    a0, a1 = AbelMap(h, pd, base_index=0), AbelMap(h, pd, base_index=3)
    for _ in range(3):
        P, Q = random_point(h, rng), random_point(h, rng)
        assert a0(P, Q).defect(a1(P, Q)) < 1e-10


def test_abel_map_additivity(rng):
    h = HyperellipticCurve.toda(2, [0.8], 1.2)
    pd = toda_periods(h)
    am = AbelMap(h, pd)
    P, Q, R = (random_point(h, rng) for _ in range(3))
    assert (am(P, Q) + am(Q, R)).equals(am(P, R), 1e-10)


# -------------------------------------------------------------- Riemann constants


def test_riemann_constants_genus_one():
    h, pd = quartic()
    rc = riemann_constants(h, pd)
    assert rc.K.defect((1 + pd.tau[0]) / 2) < 1e-10
    assert abs(theta(rc.K.z, pd.tau)) < 1e-12


def test_riemann_constants_base_change(rng):
    h = HyperellipticCurve.toda(3, [0.5, 0.3], 1.0)
    pd = toda_periods(h)
    rc = riemann_constants(h, pd)
    P = random_point(h, rng)
    rcP = riemann_constants(h, pd, base=P)
    d = AbelMap(h, pd)(P, inf_plus(h)).z
    assert rcP.K.defect(rc.K.z + (pd.genus - 1) * d) < 1e-10


def test_riemann_constants_vanishing(rng):
    h = HyperellipticCurve.toda(3, [0.5, 0.3], 1.0)
    pd = toda_periods(h)
    rc = riemann_constants(h, pd)
    am = AbelMap(h, pd)
    zb = am.from_branch(inf_plus(h))
    for _ in range(3):
        D = am.from_branch(random_point(h, rng)) - zb
        assert abs(theta(D + rc.K.z, pd.tau)) < 1e-10


def test_base_point_shift(solved_n2):
    rep, _ = solved_n2
    base, e, K = base_point_data(rep.curve, rep.periods)
    assert np.allclose(e, [0.25])
    assert np.allclose(base.z, K.z - e)
    h3 = HyperellipticCurve.toda(3, [0.5, 0.3], 1.0)
    _, e3, _ = base_point_data(h3, oriented_cyclic_periods(h3))
    assert np.allclose(e3, [1 / 3, 0])


# -------------------------------------------------------------- covering consistency


@pytest.mark.parametrize("t", [0.0, 1.0, -3.0, 3.0])
def test_reducibility_n2(t):
    rep = reducibility_check(n2_curve(t, 1.3, 0.2))
    assert rep.defect < 1e-8
    assert abs(rep.lam - 1) < 1e-10
    assert abs(rep.tau_hat - 2 * rep.tau) < 1e-10
    assert np.array_equal(rep.M, [[1, 0], [0, 2]])


def test_block_matrices_reduce():
    th, t = cyclic_block_matrices(3j, 0, 2j, 0.5j)
    assert np.allclose(t, [[1j, 0], [0, 3j]])
    C = block_C(3)
    assert C.shape == (4, 4) and abs(np.linalg.det(C) - 1) < 1e-14
    assert cover_M(3).shape == (8, 4)


def test_theta_rotation_invariance(rng):
    for _ in range(3):
        assert theta_rotation_defect(*random_cyclic_blocks(rng), rng, samples=5) < 1e-10


@pytest.mark.parametrize("n", [3, 4, 5])
def test_cofactor_identity(rng, n):
    rep = cofactor_identity(n, rng)
    assert rep.cofactor_defect < 1e-10
    assert rep.lambda_defect < 1e-10
    assert rep.block_zero_defect < 1e-10


def test_base_point_pullback_matches_cover_constant(solved_n2):
    rep, _ = solved_n2
    c = SpectralCurve.cyclic(2, rep.curve.a, rep.curve.beta_abs)
    base, _, _ = base_point_data(rep.curve, rep.periods)
    cover = covering_curve_n2(c)
    pc = periods(cover, scale=0.5)
    Kc = riemann_constants(cover, pc)
    # genus one: the constant is the odd half-period in any symplectic basis
    assert Kc.K.defect((1 + pc.tau[0]) / 2) < 1e-10
    tau_hat = np.array([[reducibility_check(c).tau_hat]])
    assert lattice_defect(2 * base.z - (1 + tau_hat[0]) / 2, tau_hat) < 1e-7
