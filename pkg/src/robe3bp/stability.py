"""Linear stability of collinear equilibria.

The planar variational system about an axis equilibrium is::

    xi''  - 2n eta' = Oxx xi
    eta'' + 2n xi'  = Oyy eta

and the vertical one ``zeta'' = Ozz zeta``.  With ``Oxx = B + 2A`` and
``Oyy = B - A`` the planar exponents solve the biquadratic::

    lam**4 + p lam**2 + q = 0,   p = -(2B + A - 4 n2),   q = (B - A)(B + 2A)

Two linearization flavors exist.  ``numeric`` takes the true Hessian of the
potential (``A = mu / r2**3 >= 0``).  ``paper_replica`` keeps the signed cube
``A = mu / (x + mu - 1)**3`` so that the closed-form pipeline can be
reproduced and its consequences measured.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .equilibria import EquilibriumPoint, paper_equilibrium, robe_equilibrium
from .errors import DomainError, SingularityError
from .model import ModelParams, omega_hessian

__all__ = [
    "Linearization",
    "StabilityReport",
    "linearize",
    "characteristic_coefficients",
    "solve_quartic_even",
    "quartic_residual",
    "vertical_mode",
    "planar_verdict",
    "mode_ratio",
    "system_matrix",
    "classify",
    "equilibrium_for_flavor",
    "assess",
]

NUMERIC = "numeric"
PAPER_REPLICA = "paper_replica"
FLAVORS = (NUMERIC, PAPER_REPLICA)

STABLE = "stable"
UNSTABLE = "unstable"
MARGINAL = "marginal"

RE_TOL = 1e-12
LAMBDA_SQ_TOL = 1e-14
VERTICAL_TOL = 1e-14
# below this (relative to p**2) the two lambda**2 roots are treated as coincident
DISC_TOL = 1e-14


@dataclass(frozen=True)
class Linearization:
    oxx: float
    oyy: float
    ozz: float
    a_coef: float
    b_coef: float
    n_sq: float
    flavor: str
    x_eq: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, data: dict) -> "Linearization":
        return cls(**data)


def _complex_pair(z: complex) -> list[float]:
    return [z.real, z.imag]


@dataclass(frozen=True)
class StabilityReport:
    """Characteristic-equation analysis of one equilibrium.

    ``mode_ratios[i]`` is the amplitude ratio ``B'/A'`` (``eta`` over ``xi``)
    of the planar mode belonging to ``planar_roots[i]``; ``None`` when the
    mode has no ``xi`` component.
    """

    linearization: Linearization
    p: float
    q: float
    discriminant: float
    lambda_sq: tuple[complex, complex]
    planar_roots: tuple[complex, complex, complex, complex]
    vertical_root_sq: float
    vertical_roots: tuple[complex, complex]
    verdict_planar: str
    verdict_vertical: str
    max_re_lambda: float
    mode_ratios: tuple[Optional[complex], ...]

    @property
    def quartic(self) -> tuple[float, float, float, float, float]:
        return (1.0, 0.0, self.p, 0.0, self.q)

    def to_dict(self) -> dict:
        return {
            "flavor": self.linearization.flavor,
            "linearization": self.linearization.to_dict(),
            "quartic": list(self.quartic),
            "p": self.p,
            "q": self.q,
            "discriminant": self.discriminant,
            "lambda_sq": [_complex_pair(z) for z in self.lambda_sq],
            "planar_roots": [_complex_pair(z) for z in self.planar_roots],
            "vertical_root_sq": self.vertical_root_sq,
            "vertical_roots": [_complex_pair(z) for z in self.vertical_roots],
            "verdict_planar": self.verdict_planar,
            "verdict_vertical": self.verdict_vertical,
            "max_re_lambda": self.max_re_lambda,
            "mode_ratios": [None if r is None else _complex_pair(r) for r in self.mode_ratios],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StabilityReport":
        def cplx(pair):
            return complex(pair[0], pair[1])

        return cls(
            linearization=Linearization.from_dict(data["linearization"]),
            p=data["p"],
            q=data["q"],
            discriminant=data["discriminant"],
            lambda_sq=tuple(cplx(z) for z in data["lambda_sq"]),
            planar_roots=tuple(cplx(z) for z in data["planar_roots"]),
            vertical_root_sq=data["vertical_root_sq"],
            vertical_roots=tuple(cplx(z) for z in data["vertical_roots"]),
            verdict_planar=data["verdict_planar"],
            verdict_vertical=data["verdict_vertical"],
            max_re_lambda=data["max_re_lambda"],
            mode_ratios=tuple(None if r is None else cplx(r) for r in data["mode_ratios"]),
        )


EquilibriumLike = Union[EquilibriumPoint, float]


def _x_of(eq: EquilibriumLike) -> float:
    return float(eq.x) if isinstance(eq, EquilibriumPoint) else float(eq)


def linearize(params: ModelParams, eq: EquilibriumLike, flavor: str = NUMERIC) -> Linearization:
    """Second derivatives of the potential at an axis point.

    ``numeric`` reads the analytic Hessian.  ``paper_replica`` uses the signed
    cube ``(x + mu - 1)**3`` in ``Oxx``/``Oyy`` and the unsigned distance in
    ``Ozz``, with ``Oyy = B - A``.
    """
    x = _x_of(eq)
    mu, k, n_sq = params.mu, params.k, params.n_sq
    d = x + mu - 1.0
    if d == 0.0:
        raise SingularityError(f"equilibrium x = {x!r} coincides with m2")
    b = n_sq - 2.0 * k
    if flavor == NUMERIC:
        hess = omega_hessian((x, 0.0, 0.0), params)
        a = mu / abs(d) ** 3
        return Linearization(
            oxx=float(hess[0, 0]), oyy=float(hess[1, 1]), ozz=float(hess[2, 2]),
            a_coef=a, b_coef=b, n_sq=n_sq, flavor=NUMERIC, x_eq=x,
        )
    if flavor == PAPER_REPLICA:
        a = mu / d**3
        return Linearization(
            oxx=b + 2.0 * a, oyy=b - a, ozz=-2.0 * k - mu / abs(d) ** 3,
            a_coef=a, b_coef=b, n_sq=n_sq, flavor=PAPER_REPLICA, x_eq=x,
        )
    raise DomainError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")


def characteristic_coefficients(lin: Linearization) -> tuple[float, float]:
    """``(p, q)`` of ``lam**4 + p lam**2 + q``."""
    a, b = lin.a_coef, lin.b_coef
    return -(2.0 * b + a - 4.0 * lin.n_sq), (b - a) * (b + 2.0 * a)


def _lambda_sq(p: float, q: float) -> tuple[complex, complex]:
    """``(L+, L-) = (-p +- sqrt(p**2 - 4q)) / 2`` without cancellation."""
    root = cmath.sqrt(complex(p * p - 4.0 * q))
    if p >= 0.0:
        minus = (-p - root) / 2.0
        plus = q / minus if minus != 0 else (-p + root) / 2.0
    else:
        plus = (-p + root) / 2.0
        minus = q / plus if plus != 0 else (-p - root) / 2.0
    return plus, minus


def solve_quartic_even(p: float, q: float) -> tuple[complex, complex, complex, complex]:
    """Roots ``(+sqrt(L+), -sqrt(L+), +sqrt(L-), -sqrt(L-))``, ``L = lam**2``."""
    lp, lm = _lambda_sq(float(p), float(q))
    sp, sm = cmath.sqrt(lp), cmath.sqrt(lm)
    return (sp, -sp, sm, -sm)


def quartic_residual(lam: complex, p: float, q: float) -> float:
    """``|lam**4 + p lam**2 + q| / (1 + |lam|**4)``."""
    l2 = lam * lam
    return abs(l2 * l2 + p * l2 + q) / (1.0 + abs(lam) ** 4)


def vertical_mode(lin: Linearization) -> tuple[float, str]:
    """``lam**2 = Ozz`` for ``zeta'' = Ozz zeta`` and its verdict."""
    ozz = lin.ozz
    if abs(ozz) <= VERTICAL_TOL:
        return ozz, MARGINAL
    return ozz, STABLE if ozz < 0.0 else UNSTABLE


def planar_verdict(p: float, q: float, roots: Sequence[complex]) -> str:
    """Stable only for distinct, strictly negative real ``lam**2`` values."""
    if max(r.real for r in roots) > RE_TOL:
        return UNSTABLE
    disc = p * p - 4.0 * q
    if disc > DISC_TOL * (1.0 + p * p):
        lp, lm = _lambda_sq(p, q)
        if lp.imag == 0.0 and lm.imag == 0.0 and max(lp.real, lm.real) <= -LAMBDA_SQ_TOL:
            return STABLE
    return MARGINAL


def mode_ratio(lin: Linearization, lam: complex) -> Optional[complex]:
    """Amplitude ratio ``B'/A'`` from the planar null vector at ``lam``."""
    two_n_lam = 2.0 * math.sqrt(lin.n_sq) * lam
    l2 = lam * lam
    rows = ((l2 - lin.oxx, -two_n_lam), (two_n_lam, l2 - lin.oyy))
    c0, c1 = max(rows, key=lambda r: abs(r[0]) + abs(r[1]))
    if c1 == 0:
        return None
    return -c0 / c1


def system_matrix(lin: Linearization) -> np.ndarray:
    """First-order planar system for ``(xi, eta, xi', eta')``."""
    two_n = 2.0 * math.sqrt(lin.n_sq)
    return np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [lin.oxx, 0.0, 0.0, two_n],
        [0.0, lin.oyy, -two_n, 0.0],
    ])


def classify(params: ModelParams, eq: EquilibriumLike, flavor: str = NUMERIC) -> StabilityReport:
    lin = linearize(params, eq, flavor)
    p, q = characteristic_coefficients(lin)
    roots = solve_quartic_even(p, q)
    lam_sq = _lambda_sq(p, q)
    ozz, v_verdict = vertical_mode(lin)
    vroot = cmath.sqrt(complex(ozz))
    return StabilityReport(
        linearization=lin,
        p=p,
        q=q,
        discriminant=p * p - 4.0 * q,
        lambda_sq=lam_sq,
        planar_roots=roots,
        vertical_root_sq=ozz,
        vertical_roots=(vroot, -vroot),
        verdict_planar=planar_verdict(p, q, roots),
        verdict_vertical=v_verdict,
        max_re_lambda=max(r.real for r in roots),
        mode_ratios=tuple(mode_ratio(lin, r) for r in roots),
    )


def equilibrium_for_flavor(params: ModelParams, flavor: str = NUMERIC) -> EquilibriumPoint:
    """Numeric root nearest the shell centre, or the closed form for the replica."""
    if flavor == NUMERIC:
        return robe_equilibrium(params)
    if flavor == PAPER_REPLICA:
        return paper_equilibrium(params)
    raise DomainError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")


def assess(params: ModelParams, flavor: str = NUMERIC) -> tuple[EquilibriumPoint, StabilityReport]:
    """Locate the flavor's equilibrium and classify it."""
    eq = equilibrium_for_flavor(params, flavor)
    return eq, classify(params, eq, flavor)
