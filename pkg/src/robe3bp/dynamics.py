"""Trajectory integration and perturbation probes.

Integration uses an embedded Dormand-Prince 5(4) pair with PI step control
(see :mod:`robe3bp.kernels` for the compiled/pure-Python backends).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .equilibria import EquilibriumPoint
from .errors import ConvergenceError, DomainError, SingularityError, StepUnderflowError
from .model import ModelParams, PhaseState, distances, jacobi_constant
from .stability import Linearization

__all__ = [
    "Trajectory",
    "PerturbationState",
    "DirectionResult",
    "ProbeReport",
    "integrate",
    "variational_matrix",
    "variational_integrate",
    "perturbation_probe",
    "PROBE_DIRECTIONS",
]

SINGULARITY_GUARD = 1e-6
MIN_STEP = 1e-15
MAX_STEPS = 50_000_000
TOL_RANGE = (1e-14, 1e-6)

PROBE_DIRECTIONS = (
    ("+x", (1.0, 0.0, 0.0)),
    ("-x", (-1.0, 0.0, 0.0)),
    ("+y", (0.0, 1.0, 0.0)),
    ("-y", (0.0, -1.0, 0.0)),
    ("+z", (0.0, 0.0, 1.0)),
    ("-z", (0.0, 0.0, -1.0)),
)


@dataclass
class Trajectory:
    """Sampled solution of the equations of motion.

    ``terminated`` is set when the path came within the singularity guard of
    the point mass; the samples then stop at the last accepted step.
    """

    times: np.ndarray
    states: np.ndarray
    params: ModelParams
    tol: float
    jacobi_initial: float
    terminated: bool = False
    n_accept: int = 0
    n_reject: int = 0

    @property
    def samples(self) -> list[tuple[float, PhaseState]]:
        return [(float(t), PhaseState.from_array(s)) for t, s in zip(self.times, self.states)]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def jacobi(self) -> np.ndarray:
        return np.array([jacobi_constant(s, self.params) for s in self.states])

    def jacobi_drift(self) -> float:
        return float(np.max(np.abs(self.jacobi() - self.jacobi_initial)))


def _check_tol(tol: float) -> None:
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise DomainError(f"tol must lie in [{TOL_RANGE[0]}, {TOL_RANGE[1]}], got {tol!r}")


def _raise_for_status(status: int, what: str) -> None:
    if status == kernels.STATUS_UNDERFLOW:
        raise StepUnderflowError(f"{what}: step size fell below {MIN_STEP}")
    if status == kernels.STATUS_MAX_STEPS:
        raise ConvergenceError(f"{what}: exceeded {MAX_STEPS} steps")


def integrate(
    state0: PhaseState | Sequence[float],
    params: ModelParams,
    t_final: float,
    tol: float = 1e-12,
    stride: Optional[float] = None,
    backend: Optional[str] = None,
) -> Trajectory:
    """Integrate the nonlinear equations of motion from ``t = 0`` to ``t_final``.

    Parameters
    ----------
    stride : float, optional
        Sample spacing for dense output; ``None`` records every accepted step.
    backend : {"cython", "python"}, optional
        Override the kernel backend chosen at import.
    """
    y0 = state0.as_array() if isinstance(state0, PhaseState) else np.asarray(state0, dtype=float)
    if y0.shape != (6,):
        raise DomainError(f"state must have 6 components, got shape {y0.shape}")
    if not t_final > 0.0:
        raise DomainError(f"t_final must be positive, got {t_final!r}")
    _check_tol(tol)
    _, r2 = distances(y0[:3], params)
    if r2 == 0.0:
        raise SingularityError("initial state coincides with m2")
    kern = kernels.get_backend(backend)
    ts, ys, status, n_acc, n_rej = kern.integrate_robe(
        y0, params.mu, params.n_sq, params.k, float(t_final), float(tol),
        0.0 if stride is None else float(stride), MIN_STEP, MAX_STEPS, SINGULARITY_GUARD,
    )
    _raise_for_status(status, "integrate")
    return Trajectory(
        times=ts,
        states=ys,
        params=params,
        tol=tol,
        jacobi_initial=jacobi_constant(y0, params),
        terminated=status == kernels.STATUS_SINGULAR,
        n_accept=n_acc,
        n_reject=n_rej,
    )


@dataclass(frozen=True)
class PerturbationState:
    """Displacement ``(xi, eta, zeta)`` from an equilibrium and its rates."""

    xi: float
    eta: float
    zeta: float
    dxi: float = 0.0
    deta: float = 0.0
    dzeta: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.xi, self.eta, self.zeta, self.dxi, self.deta, self.dzeta])


def variational_matrix(lin: Linearization, n_sq: Optional[float] = None) -> np.ndarray:
    """6x6 first-order form of the linearized equations about ``lin``."""
    n_sq = lin.n_sq if n_sq is None else n_sq
    two_n = 2.0 * math.sqrt(n_sq)
    m = np.zeros((6, 6))
    m[0, 3] = m[1, 4] = m[2, 5] = 1.0
    m[3, 0] = lin.oxx
    m[3, 4] = two_n
    m[4, 1] = lin.oyy
    m[4, 3] = -two_n
    m[5, 2] = lin.ozz
    return m


def variational_integrate(
    pert0: PerturbationState | Sequence[float],
    lin: Linearization,
    n_sq: Optional[float] = None,
    t_final: float = 10.0,
    tol: float = 1e-12,
    stride: Optional[float] = None,
    backend: Optional[str] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the linear variational system; returns ``(times, states)``."""
    y0 = pert0.as_array() if isinstance(pert0, PerturbationState) else np.asarray(pert0, float)
    if not t_final > 0.0:
        raise DomainError(f"t_final must be positive, got {t_final!r}")
    _check_tol(tol)
    kern = kernels.get_backend(backend)
    ts, ys, status, _, _ = kern.integrate_linear(
        y0, variational_matrix(lin, n_sq), float(t_final), float(tol),
        0.0 if stride is None else float(stride), MIN_STEP, MAX_STEPS,
    )
    _raise_for_status(status, "variational_integrate")
    return ts, ys


@dataclass
class DirectionResult:
    direction: str
    max_ratio: float
    first_exceed_time: Optional[float]
    max_component_ratio: tuple[float, float, float]
    terminated: bool = False


@dataclass
class ProbeReport:
    """Growth of small displacements from an equilibrium.

    Ratios are displacement norms divided by ``epsilon``; exceedance means
    the displacement passed ``10 * epsilon``.
    """

    x_eq: float
    epsilon: float
    t_final: float
    directions: list[DirectionResult] = field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        return max((d.max_ratio for d in self.directions), default=0.0)

    @property
    def first_exceed_time(self) -> Optional[float]:
        times = [d.first_exceed_time for d in self.directions if d.first_exceed_time is not None]
        return min(times) if times else None

    def direction(self, label: str) -> DirectionResult:
        for d in self.directions:
            if d.direction == label:
                return d
        raise KeyError(label)


def perturbation_probe(
    params: ModelParams,
    eq: EquilibriumPoint | float,
    epsilon: float,
    t_final: float,
    tol: float = 1e-12,
    directions: Sequence[str] | None = None,
    backend: Optional[str] = None,
) -> ProbeReport:
    """Displace the body by ``epsilon`` along each ``+-`` axis and integrate.

    ``epsilon = 0`` is accepted and reports zero growth without integrating.
    """
    x_eq = float(eq.x) if isinstance(eq, EquilibriumPoint) else float(eq)
    epsilon = float(epsilon)
    if epsilon != 0.0 and not 1e-8 <= epsilon <= 1e-3:
        raise DomainError(f"epsilon must be 0 or lie in [1e-8, 1e-3], got {epsilon!r}")
    wanted = [d for d in PROBE_DIRECTIONS if directions is None or d[0] in directions]
    report = ProbeReport(x_eq=x_eq, epsilon=epsilon, t_final=float(t_final))
    base = np.array([x_eq, 0.0, 0.0])
    for label, unit in wanted:
        if epsilon == 0.0:
            report.directions.append(DirectionResult(label, 0.0, None, (0.0, 0.0, 0.0)))
            continue
        y0 = np.zeros(6)
        y0[:3] = base + epsilon * np.asarray(unit)
        traj = integrate(y0, params, t_final, tol, backend=backend)
        disp = traj.states[:, :3] - base
        ratio = np.linalg.norm(disp, axis=1) / epsilon
        over = np.nonzero(ratio > 10.0)[0]
        report.directions.append(DirectionResult(
            direction=label,
            max_ratio=float(ratio.max()),
            first_exceed_time=float(traj.times[over[0]]) if over.size else None,
            max_component_ratio=tuple(float(v) for v in np.abs(disp).max(axis=0) / epsilon),
            terminated=traj.terminated,
        ))
    return report
