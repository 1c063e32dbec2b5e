"""Collinear equilibrium points on the x-axis.

Two independent routes are kept side by side: a bracketed numeric root of
``Omega_x(x, 0, 0) = 0`` and the first-order closed form
``x = (1 - 3/2 a1 + 4k) mu``.  They are compared, never substituted for one
another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError, NoSignChangeError, SingularityError
from .model import ModelParams

__all__ = [
    "EquilibriumPoint",
    "axis_gradient",
    "axis_gradient_array",
    "find_equilibrium_numeric",
    "scan_axis_equilibria",
    "paper_equilibrium",
    "robe_equilibrium",
    "compare_equilibria",
    "DEFAULT_SCAN",
]

NUMERIC = "numeric"
PAPER_FORMULA = "paper_formula"

MAX_ITER = 200
RESIDUAL_TOL = 1e-12
DEFAULT_SCAN = (-0.999, 0.999, 10_000)


@dataclass(frozen=True)
class EquilibriumPoint:
    """A point ``(x, 0, 0)`` where the potential gradient vanishes (or is claimed to)."""

    x: float
    residual: float
    method: str
    bracket: Optional[tuple[float, float]] = None

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "residual": self.residual,
            "method": self.method,
            "bracket": None if self.bracket is None else list(self.bracket),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EquilibriumPoint":
        bracket = data.get("bracket")
        return cls(
            x=float(data["x"]),
            residual=float(data["residual"]),
            method=data["method"],
            bracket=None if bracket is None else (float(bracket[0]), float(bracket[1])),
        )


def axis_gradient(x: float, params: ModelParams) -> float:
    """``Omega_x`` on the x-axis."""
    x = float(x)
    mu = params.mu
    d = x + mu - 1.0
    if d == 0.0:
        raise SingularityError(f"x = {x!r} coincides with m2 at 1 - mu")
    return params.n_sq * x - 2.0 * params.k * (x + mu) - mu * d / abs(d) ** 3


def axis_gradient_array(xs: np.ndarray, params: ModelParams) -> np.ndarray:
    """Vectorized :func:`axis_gradient`; the singular point yields ``nan``."""
    xs = np.asarray(xs, dtype=float)
    mu = params.mu
    d = xs + mu - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = params.n_sq * xs - 2.0 * params.k * (xs + mu) - mu * d / np.abs(d) ** 3
    return np.where(d == 0.0, np.nan, out)


def _term_scale(x: float, params: ModelParams) -> float:
    d = x + params.mu - 1.0
    return params.n_sq * abs(x) + 2.0 * abs(params.k) * abs(x + params.mu) + params.mu / d**2


def _certify(x: float, params: ModelParams, bracket) -> EquilibriumPoint:
    residual = axis_gradient(x, params)
    # relative to the size of the cancelling terms, so large |k| is not penalized
    if abs(residual) > RESIDUAL_TOL * (1.0 + _term_scale(x, params)):
        raise ConvergenceError(
            f"root x={x!r} in {bracket} has residual {residual!r} above tolerance"
        )
    return EquilibriumPoint(x=x, residual=residual, method=NUMERIC, bracket=bracket)


def find_equilibrium_numeric(
    params: ModelParams, bracket: tuple[float, float]
) -> EquilibriumPoint:
    """Brent root of the axis gradient inside ``bracket``.

    Raises
    ------
    NoSignChangeError
        If the gradient has the same sign at both ends.
    ConvergenceError
        If 200 iterations do not meet the residual certificate.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if not a < b:
        raise DomainError(f"bracket must satisfy a < b, got {bracket!r}")
    singular = 1.0 - params.mu
    if a == singular or b == singular:
        raise SingularityError(f"bracket endpoint coincides with m2 at x = {singular!r}")
    if a < singular < b:
        raise DomainError(f"bracket {bracket!r} contains the singular point x = {singular!r}")
    fa, fb = axis_gradient(a, params), axis_gradient(b, params)
    if fa == 0.0:
        return _certify(a, params, (a, b))
    if fb == 0.0:
        return _certify(b, params, (a, b))
    if (fa > 0.0) == (fb > 0.0):
        raise NoSignChangeError(
            f"axis gradient does not change sign on [{a!r}, {b!r}] (f(a)={fa!r}, f(b)={fb!r})"
        )
    # scipy's rtol floor is 4 * eps
    x, info = brentq(
        axis_gradient, a, b, args=(params,), xtol=1e-15, rtol=4 * np.finfo(float).eps,
        maxiter=MAX_ITER, full_output=True, disp=False,
    )
    if not info.converged:
        raise ConvergenceError(f"Brent iteration did not converge on [{a!r}, {b!r}]: {info.flag}")
    return _certify(float(x), params, (a, b))


def _grid_brackets(params: ModelParams, x_min: float, x_max: float, samples: int):
    singular = 1.0 - params.mu
    xs = np.linspace(x_min, x_max, samples)
    xs = xs[xs != singular]
    fs = axis_gradient_array(xs, params)
    exact = [float(x) for x in xs[fs == 0.0]]
    lo, hi = xs[:-1], xs[1:]
    flo, fhi = fs[:-1], fs[1:]
    crossing = (flo != 0.0) & (fhi != 0.0) & ((flo > 0.0) != (fhi > 0.0))
    crossing &= ~((lo < singular) & (singular < hi))
    idx = np.nonzero(crossing)[0]
    brackets = [(float(lo[i]), float(hi[i])) for i in idx]
    return exact, brackets


def scan_axis_equilibria(
    params: ModelParams,
    x_min: float = DEFAULT_SCAN[0],
    x_max: float = DEFAULT_SCAN[1],
    samples: int = DEFAULT_SCAN[2],
) -> list[EquilibriumPoint]:
    """Every sign change of the axis gradient on a uniform grid, refined by Brent.

    The grid cell straddling the singular point ``x = 1 - mu`` is skipped, so
    the infinite jump of the gradient there is not mistaken for a root.
    """
    if not x_min < x_max:
        raise DomainError(f"scan range must satisfy x_min < x_max, got [{x_min!r}, {x_max!r}]")
    if samples < 100:
        raise DomainError(f"samples must be >= 100, got {samples!r}")
    exact, brackets = _grid_brackets(params, float(x_min), float(x_max), int(samples))
    points = [_certify(x, params, None) for x in exact]
    points += [find_equilibrium_numeric(params, br) for br in brackets]
    return sorted(points, key=lambda p: p.x)


def paper_equilibrium(params: ModelParams) -> EquilibriumPoint:
    """First-order closed-form location ``x = (1 - 1.5 a1 + 4k) mu``.

    The residual is reported for comparison and is not constrained; it is
    ``nan`` if the formula lands exactly on the point mass.
    """
    x = (1.0 - 1.5 * params.a1 + 4.0 * params.k) * params.mu
    try:
        residual = axis_gradient(x, params)
    except SingularityError:
        residual = math.nan
    return EquilibriumPoint(x=x, residual=residual, method=PAPER_FORMULA)


def robe_equilibrium(
    params: ModelParams,
    x_min: float = DEFAULT_SCAN[0],
    x_max: float = DEFAULT_SCAN[1],
    samples: int = DEFAULT_SCAN[2],
) -> EquilibriumPoint:
    """The numeric equilibrium closest to the shell centre ``x = -mu``.

    At ``a1 = 0`` this is exactly ``-mu``; oblateness shifts it slightly.

    Raises
    ------
    NoSignChangeError
        If the scan finds no equilibrium at all.
    """
    points = scan_axis_equilibria(params, x_min, x_max, samples)
    if not points:
        raise NoSignChangeError(
            f"no collinear equilibrium in [{x_min!r}, {x_max!r}] for {params!r}"
        )
    return min(points, key=lambda p: (abs(p.x + params.mu), p.x))


def compare_equilibria(params: ModelParams, **scan_kwargs) -> dict:
    """Distance between the closed-form location and the nearest numeric root."""
    paper = paper_equilibrium(params)
    roots = scan_axis_equilibria(params, **scan_kwargs)
    nearest = min(roots, key=lambda p: abs(p.x - paper.x)) if roots else None
    return {
        "paper": paper,
        "numeric": roots,
        "nearest_numeric": nearest,
        "divergence": None if nearest is None else abs(paper.x - nearest.x),
    }
