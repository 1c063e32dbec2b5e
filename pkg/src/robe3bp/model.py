"""Model parameters, effective potential and its derivatives.

Coordinates are synodic (rotating with the primaries), normalized so that the
primary separation is one.  The fluid-filled shell ``m1`` sits at
``(-mu, 0, 0)`` and the point mass ``m2`` at ``(1 - mu, 0, 0)``.  The
infinitesimal body moves inside the shell, so it feels the shell only through
buoyancy (``-k r1**2``) and the point mass through ordinary gravity.

The effective potential is::

    Omega = n2/2 (x**2 + y**2) - k r1**2 + mu / r2

with ``n2 = 1 + 3/2 a1`` the squared mean motion raised by the oblateness of
the bigger primary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, SingularityError

__all__ = [
    "ModelParams",
    "PhaseState",
    "make_params",
    "k_from_densities",
    "distances",
    "omega",
    "omega_gradient",
    "omega_hessian",
    "finite_difference_derivatives",
    "equations_of_motion",
    "jacobi_constant",
]

GRADIENT_STEP = 1e-5
HESSIAN_STEP = 1e-4


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration of the problem.

    Attributes
    ----------
    mu : float
        Mass ratio ``m2 / (m1 + m2)`` in ``[0, 1)``.
    a1 : float
        Oblateness coefficient of the bigger primary, ``a1 >= 0``.
    k : float
        Buoyancy parameter ``4/3 pi rho1 (1 - rho1/rho3)``; any sign.
    """

    mu: float
    a1: float
    k: float

    def __post_init__(self):
        for name in ("mu", "a1", "k"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if not 0.0 <= self.mu < 1.0:
            raise DomainError(f"mu must satisfy 0 <= mu < 1, got {self.mu!r}")
        if self.a1 < 0.0:
            raise DomainError(f"a1 must satisfy a1 >= 0, got {self.a1!r}")

    @property
    def n_sq(self) -> float:
        """Squared mean motion, ``1 + 1.5 a1``."""
        return 1.0 + 1.5 * self.a1

    @property
    def n(self) -> float:
        return math.sqrt(self.n_sq)

    @classmethod
    def from_densities(cls, mu: float, a1: float, rho1: float, rho3: float) -> "ModelParams":
        return make_params(mu, a1, k_from_densities(rho1, rho3))


@dataclass(frozen=True)
class PhaseState:
    """Position and velocity in the rotating frame."""

    x: float
    y: float
    z: float
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.vx, self.vy, self.vz], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "PhaseState":
        x, y, z, vx, vy, vz = (float(v) for v in values)
        return cls(x, y, z, vx, vy, vz)


def make_params(mu: float, a1: float, k: float) -> ModelParams:
    """Validate and build a :class:`ModelParams`."""
    try:
        mu, a1, k = float(mu), float(a1), float(k)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"parameters must be real numbers: {exc}") from None
    return ModelParams(mu, a1, k)


def k_from_densities(rho1: float, rho3: float) -> float:
    """Buoyancy parameter from the fluid density ``rho1`` and body density ``rho3``."""
    rho1, rho3 = float(rho1), float(rho3)
    if not (math.isfinite(rho1) and math.isfinite(rho3)):
        raise DomainError("densities must be finite")
    if rho1 <= 0.0 or rho3 <= 0.0:
        raise DomainError(f"densities must be positive, got rho1={rho1!r}, rho3={rho3!r}")
    return 4.0 / 3.0 * math.pi * rho1 * (1.0 - rho1 / rho3)


def distances(pos: Sequence[float], params: ModelParams) -> tuple[float, float]:
    """Return ``(r1, r2)``: distances to the shell centre and to the point mass."""
    x, y, z = pos
    r1 = math.sqrt((x + params.mu) ** 2 + y * y + z * z)
    r2 = math.sqrt((x + params.mu - 1.0) ** 2 + y * y + z * z)
    return r1, r2


def _r2(x: float, y: float, z: float, mu: float) -> float:
    r2 = math.sqrt((x + mu - 1.0) ** 2 + y * y + z * z)
    if r2 == 0.0:
        raise SingularityError(f"position ({x!r}, {y!r}, {z!r}) coincides with m2")
    return r2


def omega(pos: Sequence[float], params: ModelParams) -> float:
    """Effective potential at ``pos``."""
    x, y, z = (float(c) for c in pos)
    mu, k = params.mu, params.k
    r2 = _r2(x, y, z, mu)
    r1_sq = (x + mu) ** 2 + y * y + z * z
    return 0.5 * params.n_sq * (x * x + y * y) - k * r1_sq + mu / r2


def omega_gradient(pos: Sequence[float], params: ModelParams) -> np.ndarray:
    """Analytic gradient ``(Omega_x, Omega_y, Omega_z)``."""
    x, y, z = (float(c) for c in pos)
    mu, k, n_sq = params.mu, params.k, params.n_sq
    r2 = _r2(x, y, z, mu)
    g = mu / r2**3
    return np.array([
        n_sq * x - 2.0 * k * (x + mu) - g * (x + mu - 1.0),
        n_sq * y - 2.0 * k * y - g * y,
        -2.0 * k * z - g * z,
    ])


def omega_hessian(pos: Sequence[float], params: ModelParams) -> np.ndarray:
    """Analytic Hessian of the potential; exactly symmetric.

    Uses the unsigned ``r2**3``, i.e. the true second derivative of ``mu/r2``.
    """
    x, y, z = (float(c) for c in pos)
    mu, k, n_sq = params.mu, params.k, params.n_sq
    r2 = _r2(x, y, z, mu)
    d = (x + mu - 1.0, y, z)
    g3 = mu / r2**3
    g5 = 3.0 * mu / r2**5
    hess = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            value = g5 * d[i] * d[j]
            if i == j:
                value -= g3 + 2.0 * k
            hess[i, j] = hess[j, i] = value
    hess[0, 0] += n_sq
    hess[1, 1] += n_sq
    return hess


def finite_difference_derivatives(
    pos: Sequence[float],
    params: ModelParams,
    h: float = GRADIENT_STEP,
    h_hessian: float = HESSIAN_STEP,
) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradient (step ``h``) and Hessian (step ``h_hessian``).

    Built from :func:`omega` alone, so it serves as an independent oracle for
    the analytic derivatives.
    """
    h_grad, h_hess = float(h), float(h_hessian)
    if h_grad <= 0.0 or h_hess <= 0.0:
        raise DomainError("finite-difference steps must be positive")
    p = np.array([float(c) for c in pos])
    _, r2 = distances(p, params)
    if r2 <= max(h_grad, h_hess) * math.sqrt(2.0):
        raise SingularityError(f"stencil around {tuple(p)} reaches m2 (r2={r2!r})")

    def f(q):
        return omega(q, params)

    eye = np.eye(3)
    grad = np.array([
        (f(p + h_grad * eye[i]) - f(p - h_grad * eye[i])) / (2.0 * h_grad) for i in range(3)
    ])

    hess = np.empty((3, 3))
    f0 = f(p)
    for i in range(3):
        ei = h_hess * eye[i]
        hess[i, i] = (f(p + ei) - 2.0 * f0 + f(p - ei)) / h_hess**2
        for j in range(i + 1, 3):
            ej = h_hess * eye[j]
            value = (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (
                4.0 * h_hess**2
            )
            hess[i, j] = hess[j, i] = value
    return grad, hess


def equations_of_motion(state: PhaseState | Sequence[float], params: ModelParams) -> np.ndarray:
    """Time derivative of the phase state ``(x, y, z, vx, vy, vz)``."""
    s = state.as_array() if isinstance(state, PhaseState) else np.asarray(state, dtype=float)
    gx, gy, gz = omega_gradient(s[:3], params)
    two_n = 2.0 * params.n
    return np.array([s[3], s[4], s[5], gx + two_n * s[4], gy - two_n * s[3], gz])


def jacobi_constant(state: PhaseState | Sequence[float], params: ModelParams) -> float:
    """``C = 2 Omega - v**2``; conserved by the equations of motion."""
    s = state.as_array() if isinstance(state, PhaseState) else np.asarray(state, dtype=float)
    return 2.0 * omega(s[:3], params) - float(s[3] ** 2 + s[4] ** 2 + s[5] ** 2)
