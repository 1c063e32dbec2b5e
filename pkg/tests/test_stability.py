import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from robe3bp.errors import SingularityError
from robe3bp.model import make_params
from robe3bp.stability import (
    MARGINAL,
    NUMERIC,
    PAPER_REPLICA,
    RE_TOL,
    STABLE,
    UNSTABLE,
    Linearization,
    StabilityReport,
    assess,
    characteristic_coefficients,
    classify,
    linearize,
    mode_ratio,
    planar_verdict,
    quartic_residual,
    solve_quartic_even,
    system_matrix,
    vertical_mode,
)


def sorted_roots(roots):
    return sorted(roots, key=lambda z: (round(z.real, 9) + 0.0, round(z.imag, 9) + 0.0))


def same_multiset(a, b, tol):
    """Greedy one-to-one matching of two root lists within ``tol``."""
    rest = list(b)
    for z in a:
        j = min(range(len(rest)), key=lambda i: abs(rest[i] - z))
        if abs(rest[j] - z) > tol:
            return False
        rest.pop(j)
    return True


# coalescing eigenvalues are only resolved to ~sqrt(eps) by a dense eigensolver
EIGEN_RE_TOL = 1e-7


def eigen_verdict(lin):
    """Verdict read off the eigenvalues of the first-order system."""
    ev = np.linalg.eigvals(system_matrix(lin))
    if ev.real.max() > EIGEN_RE_TOL:
        return UNSTABLE
    lam_sq = np.sort_complex(ev * ev)
    # stable needs two distinct negative real lambda**2 values (each a conjugate pair)
    lo, hi = lam_sq[0], lam_sq[-1]
    if (
        abs(lo.imag) < 1e-9 and abs(hi.imag) < 1e-9
        and hi.real < -1e-12 and hi.real - lo.real > 1e-6 * (1 + abs(lo.real))
    ):
        return STABLE
    return MARGINAL


def _lin(a, b, n_sq=1.0, ozz=-0.01):
    return Linearization(b + 2 * a, b - a, ozz, a, b, n_sq, NUMERIC, 0.0)


class TestLinearize:
    def test_numeric_hand_values(self):
        lin = linearize(make_params(0.01, 0, 0), -0.01, NUMERIC)
        assert (lin.oxx, lin.oyy, lin.ozz) == pytest.approx((1.02, 0.99, -0.01), abs=1e-15)
        assert lin.a_coef == pytest.approx(0.01, abs=1e-17) and lin.b_coef == 1.0

    def test_replica_hand_values(self):
        lin = linearize(make_params(0.01, 0, 0), -0.01, PAPER_REPLICA)
        assert (lin.oxx, lin.oyy, lin.ozz) == pytest.approx((0.98, 1.01, -0.01), abs=1e-15)
        assert lin.a_coef == pytest.approx(-0.01, abs=1e-17) and lin.b_coef == 1.0

    @pytest.mark.parametrize("flavor", [NUMERIC, PAPER_REPLICA])
    def test_no_secondary(self, flavor):
        lin = linearize(make_params(0, 0.02, 0.1), 0.3, flavor)
        assert lin.a_coef == 0
        assert lin.oxx == pytest.approx(lin.b_coef, abs=1e-15)
        assert lin.oyy == pytest.approx(lin.b_coef, abs=1e-15)
        assert lin.ozz == pytest.approx(-0.2, abs=1e-15)

    def test_singular(self):
        with pytest.raises(SingularityError):
            linearize(make_params(0.25, 0, 0), 0.75)

    @given(
        mu=st.floats(0, 0.95), a1=st.floats(0, 0.05), k=st.floats(-0.2, 0.2),
        flavor=st.sampled_from([NUMERIC, PAPER_REPLICA]),
    )
    def test_aggregate_identities(self, mu, a1, k, flavor):
        lin = linearize(make_params(mu, a1, k), -mu, flavor)
        scale = 1 + abs(lin.a_coef) + abs(lin.b_coef)
        assert abs(lin.oxx - lin.b_coef - 2 * lin.a_coef) <= 1e-12 * scale
        assert abs(lin.b_coef - lin.oyy - lin.a_coef) <= 1e-12 * scale


class TestCoefficients:
    def test_unperturbed(self):
        assert characteristic_coefficients(_lin(0, 1)) == (2.0, 1.0)

    def test_numeric_example(self):
        p, q = characteristic_coefficients(_lin(0.01, 1))
        assert p == pytest.approx(1.99, abs=1e-15) and q == pytest.approx(1.0098, abs=1e-15)

    def test_replica_example(self):
        p, q = characteristic_coefficients(_lin(-0.01, 1))
        assert p == pytest.approx(2.01, abs=1e-15) and q == pytest.approx(0.9898, abs=1e-15)

    @given(a=st.floats(-2, 2), n_sq=st.floats(1, 1.2), k=st.floats(-0.3, 0.3))
    def test_discriminant_expansion(self, a, n_sq, k):
        p, q = characteristic_coefficients(_lin(a, n_sq - 2 * k, n_sq))
        expanded = 9 * a * a - 8 * n_sq * a + 32 * n_sq * k
        assert p * p - 4 * q == pytest.approx(expanded, abs=1e-12 * (1 + p * p + abs(q)))


class TestQuartic:
    def test_double_imaginary(self):
        roots = solve_quartic_even(2, 1)
        assert sorted_roots(roots) == sorted_roots([1j, 1j, -1j, -1j])

    def test_real_roots(self):
        roots = solve_quartic_even(-5, 4)
        np.testing.assert_allclose(sorted(r.real for r in roots), [-2, -1, 1, 2], atol=1e-15)
        assert all(r.imag == 0 for r in roots)

    def test_fourth_roots(self):
        roots = solve_quartic_even(0, -1)
        for r in roots:
            assert quartic_residual(r, 0, -1) <= 1e-15
        np.testing.assert_allclose(sorted(abs(r) for r in roots), 1.0, atol=1e-15)

    @given(p=st.floats(-1e3, 1e3), q=st.floats(-1e3, 1e3))
    def test_residual_and_symmetry(self, p, q):
        roots = solve_quartic_even(p, q)
        for r in roots:
            assert quartic_residual(r, p, q) <= 1e-10
        scale = 1e-12 * (1 + max(abs(r) for r in roots))
        assert same_multiset(roots, [-r for r in roots], scale)

    def test_matches_numpy_roots(self, rng):
        for p, q in rng.uniform(-10, 10, size=(200, 2)):
            ours = solve_quartic_even(p, q)
            ref = np.roots([1, 0, p, 0, q])
            assert same_multiset(ours, ref, 1e-6)


class TestVertical:
    def test_stable(self):
        lam_sq, verdict = vertical_mode(_lin(0, 1, ozz=-0.01))
        assert verdict == STABLE and cmath.sqrt(lam_sq) == pytest.approx(0.1j)

    def test_marginal(self):
        assert vertical_mode(_lin(0, 1, ozz=0.0))[1] == MARGINAL

    def test_unstable(self):
        lam_sq, verdict = vertical_mode(_lin(0, 1, ozz=0.04))
        assert verdict == UNSTABLE and math.sqrt(lam_sq) == pytest.approx(0.2)


class TestClassify:
    def test_unstable_example(self):
        rep = classify(make_params(0.01, 0, 0), -0.01, NUMERIC)
        assert rep.discriminant == pytest.approx(-0.0791, abs=1e-12)
        assert rep.verdict_planar == UNSTABLE and rep.max_re_lambda > 0
        assert rep.verdict_vertical == STABLE

    def test_stable_without_secondary(self):
        rep = classify(make_params(0, 0, 0.1), 0.2, NUMERIC)
        assert (rep.p, rep.q) == pytest.approx((2.4, 0.64))
        assert rep.discriminant == pytest.approx(3.2)
        lam_sq = sorted(z.real for z in rep.lambda_sq)
        assert lam_sq == pytest.approx([-1.2 - math.sqrt(0.8), -1.2 + math.sqrt(0.8)], abs=1e-15)
        for z in rep.lambda_sq:
            assert abs(z * z + 2.4 * z + 0.64) <= 1e-15
        assert rep.verdict_planar == STABLE

    def test_degenerate_limit_marginal(self):
        rep = classify(make_params(0, 0, 0), 0.0)
        assert rep.verdict_planar == MARGINAL
        assert all(abs(r.real) <= RE_TOL for r in rep.planar_roots)
        assert sorted_roots(rep.planar_roots) == sorted_roots([1j, 1j, -1j, -1j])

    def test_flavors_reported_side_by_side(self):
        p = make_params(0.01, 0, 0)
        a = classify(p, -0.01, NUMERIC)
        b = classify(p, -0.01, PAPER_REPLICA)
        assert a.linearization.flavor == NUMERIC and b.linearization.flavor == PAPER_REPLICA
        assert a.p != b.p

    @given(
        mu=st.floats(0, 0.95), a1=st.floats(0, 0.05), k=st.floats(-0.2, 0.2),
        flavor=st.sampled_from([NUMERIC, PAPER_REPLICA]),
    )
    def test_report_invariants(self, mu, a1, k, flavor):
        params = make_params(mu, a1, k)
        x = -mu if flavor == NUMERIC else (1 - 1.5 * a1 + 4 * k) * mu
        assume(abs(x + mu - 1) > 1e-3)
        rep = classify(params, x, flavor)
        # near coalescence the eigen path cannot separate the roots
        near_double = abs(rep.discriminant) < 1e-9 or abs(rep.q) < 1e-9
        for r in rep.planar_roots:
            assert quartic_residual(r, rep.p, rep.q) <= 1e-10
        assert same_multiset(rep.planar_roots, [-r for r in rep.planar_roots], 1e-12)
        assert rep.vertical_root_sq == rep.linearization.ozz
        if not near_double:
            assert rep.verdict_planar == eigen_verdict(rep.linearization)

    def test_eigen_oracle(self, rng):
        for _ in range(500):
            mu, a1, k = rng.uniform(0, 0.95), rng.uniform(0, 0.05), rng.uniform(-0.2, 0.2)
            flavor = NUMERIC if rng.random() < 0.5 else PAPER_REPLICA
            try:
                _, rep = assess(make_params(mu, a1, k), flavor)
            except SingularityError:
                continue
            assert rep.verdict_planar == eigen_verdict(rep.linearization)

    def test_mode_ratio_solves_null_vector(self):
        rep = classify(make_params(0.05, 0.01, 0.02), -0.05)
        lin = rep.linearization
        two_n = 2 * math.sqrt(lin.n_sq)
        for lam, ratio in zip(rep.planar_roots, rep.mode_ratios):
            # (lam^2 - Oxx) A' - 2n lam B' = 0 with B' = ratio * A'
            assert abs(lam * lam - lin.oxx - two_n * lam * ratio) <= 1e-10
            assert abs(two_n * lam + (lam * lam - lin.oyy) * ratio) <= 1e-10

    def test_mode_ratio_pure_eta_mode(self):
        lin = Linearization(1.0, -1.0, -0.1, 0.0, 0.0, 1.0, NUMERIC, 0.0)
        assert mode_ratio(lin, 0.0) is None

    def test_verdict_rules(self):
        assert planar_verdict(2, 1, solve_quartic_even(2, 1)) == MARGINAL
        assert planar_verdict(2.4, 0.64, solve_quartic_even(2.4, 0.64)) == STABLE
        assert planar_verdict(-5, 4, solve_quartic_even(-5, 4)) == UNSTABLE

    @pytest.mark.parametrize("flavor", [NUMERIC, PAPER_REPLICA])
    def test_round_trip(self, flavor):
        _, rep = assess(make_params(0.03, 0.01, 0.02), flavor)
        assert StabilityReport.from_dict(rep.to_dict()) == rep
