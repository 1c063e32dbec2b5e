import math
import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import solve_ivp

from robe3bp import kernels
from robe3bp.dynamics import (
    PerturbationState,
    integrate,
    perturbation_probe,
    variational_integrate,
    variational_matrix,
)
from robe3bp.equilibria import robe_equilibrium
from robe3bp.errors import DomainError, SingularityError, StepUnderflowError
from robe3bp.model import PhaseState, equations_of_motion, jacobi_constant, make_params
from robe3bp.stability import assess, linearize

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
REFLECT = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])


def _orbit():
    return make_params(0.05, 0.01, 0.05), [0.15, 0.0, 0.05, 0.0, 0.3, 0.0]


class TestIntegrate:
    def test_fixed_point(self):
        p = make_params(0.01, 0, 0.1)
        eq = robe_equilibrium(p)
        traj = integrate((eq.x, 0, 0, 0, 0, 0), p, 50.0, 1e-12)
        assert np.abs(traj.states - traj.states[0]).max() <= 1e-10

    def test_free_vertical_coordinate(self):
        traj = integrate(PhaseState(0, 0, 1), make_params(0, 0, 0), 20.0, 1e-12)
        np.testing.assert_array_equal(traj.states[:, 2], 1.0)

    def test_times_increase_and_avoid_m2(self):
        p, s0 = _orbit()
        traj = integrate(s0, p, 10.0, 1e-10)
        assert np.all(np.diff(traj.times) > 0)
        r2 = np.linalg.norm(traj.states[:, :3] - [1 - p.mu, 0, 0], axis=1)
        assert r2.min() > 0

    def test_matches_scipy(self):
        p, s0 = _orbit()
        traj = integrate(s0, p, 10.0, 1e-12)
        ref = solve_ivp(lambda t, y: equations_of_motion(y, p), (0, 10), s0,
                        method="DOP853", rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(traj.final_state, ref.y[:, -1], atol=1e-9)

    def test_dense_output_grid(self):
        p, s0 = _orbit()
        dense = integrate(s0, p, 1.0, 1e-12, stride=0.1)
        np.testing.assert_allclose(dense.times, np.linspace(0, 1, 11), atol=1e-15)
        for t, s in zip(dense.times[1:-1], dense.states[1:-1]):
            step = integrate(s0, p, float(t), 1e-12)
            np.testing.assert_allclose(s, step.final_state, atol=1e-10)

    def test_jacobi_conserved(self):
        p, s0 = _orbit()
        traj = integrate(s0, p, 100.0, 1e-12)
        assert not traj.terminated
        assert traj.jacobi_drift() <= 1e-9
        assert traj.jacobi_initial == jacobi_constant(s0, p)

    def test_jacobi_drift_scales_with_tol(self):
        p, s0 = _orbit()
        drifts = [integrate(s0, p, 20.0, tol).jacobi_drift() for tol in (1e-8, 1e-10, 1e-12)]
        for coarse, fine in zip(drifts, drifts[1:]):
            assert 10 <= coarse / fine <= 1e4

    def test_error_order(self):
        p, s0 = _orbit()
        ref = integrate(s0, p, 20.0, 1e-14).final_state
        runs = [integrate(s0, p, 20.0, tol) for tol in (1e-8, 1e-9, 1e-10, 1e-11, 1e-12)]
        errs = [np.abs(r.final_state - ref).max() for r in runs]
        steps = [r.n_accept for r in runs]
        for e_coarse, e_fine in zip(errs, errs[1:]):
            assert e_fine <= e_coarse
        # error reduction per halving of the mean step size
        order = math.log(errs[0] / errs[-1]) / math.log(steps[-1] / steps[0])
        assert 2.0**order >= 16

    def test_time_reversal(self):
        # reversibility: (x, -y, z, -vx, vy, -vz) with t -> -t is a symmetry
        p, s0 = _orbit()
        forward = integrate(s0, p, 10.0, 1e-12).final_state
        back = integrate(REFLECT * forward, p, 10.0, 1e-12).final_state
        np.testing.assert_allclose(REFLECT * back, s0, atol=1e-7)

    def test_singularity_terminates(self):
        p = make_params(0.1, 0, 0)
        traj = integrate((0.9 - 0.05, 0, 0, 0, 0, 0), p, 5.0, 1e-10)
        assert traj.terminated
        r2 = np.linalg.norm(traj.final_state[:3] - [0.9, 0, 0])
        assert r2 < 0.05

    def test_validation(self):
        p, s0 = _orbit()
        with pytest.raises(DomainError):
            integrate(s0, p, -1.0)
        with pytest.raises(DomainError):
            integrate(s0, p, 1.0, tol=1e-3)
        with pytest.raises(DomainError):
            integrate(s0[:5], p, 1.0)
        with pytest.raises(SingularityError):
            integrate((1 - p.mu, 0, 0, 0, 0, 0), p, 1.0)

    def test_step_underflow_code_maps_to_error(self, monkeypatch):
        from robe3bp import dynamics

        def fake(*args):
            return np.zeros(1), np.zeros((1, 6)), kernels.STATUS_UNDERFLOW, 0, 0

        monkeypatch.setattr(dynamics.kernels, "get_backend",
                            lambda name=None: type("K", (), {"integrate_robe": staticmethod(fake)}))
        p, s0 = _orbit()
        with pytest.raises(StepUnderflowError):
            integrate(s0, p, 1.0)


class TestBackends:
    @pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
    @pytest.mark.parametrize("stride", [None, 0.37])
    def test_bit_identical(self, stride):
        p, s0 = _orbit()
        a = integrate(s0, p, 30.0, 1e-11, stride=stride, backend="python")
        b = integrate(s0, p, 30.0, 1e-11, stride=stride, backend="cython")
        np.testing.assert_array_equal(a.times, b.times)
        np.testing.assert_array_equal(a.states, b.states)
        assert (a.n_accept, a.n_reject) == (b.n_accept, b.n_reject)

    @pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
    def test_bit_identical_close_approach(self):
        # many steps near m2: exercises rarely-hit rounding paths
        p = make_params(0.3, 0.0, 0.02)
        s0 = [0.55, 0.0, 0.0, 0.0, 0.45, 0.0]
        a = integrate(s0, p, 10.0, 1e-12, backend="python")
        b = integrate(s0, p, 10.0, 1e-12, backend="cython")
        assert a.n_accept > 20_000
        np.testing.assert_array_equal(a.states, b.states)

    @pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
    def test_linear_bit_identical(self):
        lin = linearize(make_params(0.05, 0, 0), -0.05)
        pert = (1e-6, 0, 1e-6, 0, 0, 0)
        a = variational_integrate(pert, lin, t_final=20, backend="python")
        b = variational_integrate(pert, lin, t_final=20, backend="cython")
        np.testing.assert_array_equal(a[1], b[1])

    @pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
    def test_singular_status_identical(self):
        p = make_params(0.1, 0, 0)
        a = integrate((0.85, 0, 0, 0, 0, 0), p, 5.0, 1e-10, backend="python")
        b = integrate((0.85, 0, 0, 0, 0, 0), p, 5.0, 1e-10, backend="cython")
        assert a.terminated and b.terminated
        np.testing.assert_array_equal(a.states, b.states)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.get_backend("fortran")


def _modal(lin, lam_target):
    m = variational_matrix(lin)
    ev, vecs = np.linalg.eig(m)
    i = int(np.argmin(np.abs(ev - lam_target)))
    return m, ev[i], vecs[:, i]


class TestVariational:
    def test_zero_perturbation(self):
        lin = linearize(make_params(0.05, 0, 0), -0.05)
        _, ys = variational_integrate(PerturbationState(0, 0, 0), lin, t_final=10)
        assert not ys.any()

    def test_matches_matrix_exponential(self):
        lin = linearize(make_params(0.05, 0.01, 0.02), robe_equilibrium(make_params(0.05, 0.01, 0.02)))
        y0 = np.array([1e-6, -2e-6, 5e-7, 0, 1e-6, 0])
        ts, ys = variational_integrate(y0, lin, t_final=15, stride=1.0, tol=1e-13)
        m = variational_matrix(lin)
        for t, y in zip(ts, ys):
            ref = scipy.linalg.expm(m * t) @ y0
            assert np.abs(y - ref).max() <= 1e-7 * np.abs(ref).max() + 1e-18

    def test_oscillating_mode_stays_on_modal_solution(self):
        # mu = 0 with k > 0: planar roots are purely imaginary
        params = make_params(0.0, 0.0, 0.1)
        eq, rep = assess(params)
        lam = max(rep.planar_roots, key=lambda z: z.imag)
        lin = rep.linearization
        m, ev, v = _modal(lin, lam)
        assert abs(ev.real) < 1e-12
        y0 = 1e-3 * (v / np.abs(v).max()).real
        ts, ys = variational_integrate(y0, lin, t_final=100, stride=0.5, tol=1e-13)
        amp = np.abs(y0).max()
        c = 1e-3 * v / np.abs(v).max()
        for t, y in zip(ts, ys):
            exact = (c * np.exp(ev * t)).real
            assert np.abs(y - exact).max() <= 1e-6 * amp

    def test_growing_mode_rate(self):
        # large buoyancy point with a real positive planar root
        params = make_params(0.6, 0.0, 0.3)
        eq, rep = assess(params)
        sigma = rep.max_re_lambda
        lam = max(rep.planar_roots, key=lambda z: z.real)
        assert sigma > 0 and abs(lam.imag) < 1e-14
        m, ev, v = _modal(rep.linearization, lam)
        y0 = 1e-8 * v.real / np.linalg.norm(v.real)
        t_end = 10.0 / sigma
        ts, ys = variational_integrate(y0, rep.linearization, t_final=t_end, tol=1e-12)
        growth = np.linalg.norm(ys[-1]) / np.linalg.norm(y0)
        assert abs(growth / math.exp(sigma * t_end) - 1) <= 0.05

    def test_linear_tracks_nonlinear(self):
        params = make_params(0.05, 0.0, 0.01)
        eq, rep = assess(params)
        eps = 1e-7
        t_end = 1.0 / rep.max_re_lambda
        base = np.array([eq.x, 0, 0, 0, 0, 0])
        d0 = np.array([eps, 0, eps, 0, 0, 0])
        traj = integrate(base + d0, params, t_end, tol=1e-13, stride=t_end / 20)
        ts, ys = variational_integrate(d0, rep.linearization, t_final=t_end, tol=1e-13,
                                       stride=t_end / 20)
        np.testing.assert_allclose(ts, traj.times)
        disp = traj.states - base
        err = np.linalg.norm(disp - ys, axis=1) / np.linalg.norm(ys, axis=1)
        assert err.max() <= 1e-3


class TestProbe:
    def test_zero_epsilon(self):
        params = make_params(0.05, 0, 0)
        rep = perturbation_probe(params, robe_equilibrium(params), 0.0, 10.0)
        assert rep.max_ratio == 0.0 and rep.first_exceed_time is None
        assert len(rep.directions) == 6

    def test_bad_epsilon(self):
        params = make_params(0.05, 0, 0)
        with pytest.raises(DomainError):
            perturbation_probe(params, -0.05, 1e-2, 10.0)

    def test_unstable_point_departs_in_time(self):
        params = make_params(0.05, 0.01, 0.01)
        eq, rep = assess(params)
        sigma = rep.max_re_lambda
        probe = perturbation_probe(params, eq, 1e-6, 3.0 / sigma, directions=("+x", "-y"))
        assert probe.first_exceed_time is not None
        assert probe.first_exceed_time <= 3.0 / sigma

    def test_vertical_bounded(self):
        params = make_params(0.02, 0.0, 0.01)
        eq, rep = assess(params)
        assert rep.verdict_vertical == "stable"
        probe = perturbation_probe(params, eq, 1e-6, 100.0, directions=("+z", "-z"))
        for label in ("+z", "-z"):
            assert probe.direction(label).max_component_ratio[2] <= 2.0

    def test_direction_lookup(self):
        params = make_params(0.05, 0, 0)
        rep = perturbation_probe(params, -0.05, 0.0, 1.0)
        with pytest.raises(KeyError):
            rep.direction("+w")


def test_environment_forces_pure_python():
    env = dict(os.environ, ROBE3BP_PURE_PYTHON="1")
    proc = subprocess.run(
        [sys.executable, "-c", "from robe3bp import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert proc.stdout.strip() == "python"
