"""Critical mass ratio at which the planar characteristic roots coalesce.

With ``B = n2 - 2k`` the discriminant ``p**2 - 4q`` of the biquadratic expands
exactly to ``9 A**2 - 8 n2 A + 32 n2 k``.  Its two roots in ``A`` are
available in exact form and in the first-order closed forms
``A+ = 8/9 + 4/3 a1 - 4k`` and ``A- = 4k``.  The closed-form branch chain for
``mu_c`` is evaluated verbatim, and an independent numeric route bisects the
sign of the discriminant along ``mu`` using true equilibria and the numeric
linearization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, NoRealRootError
from .equilibria import robe_equilibrium
from .model import make_params
from .stability import NUMERIC, characteristic_coefficients, linearize

__all__ = [
    "CriticalMassReport",
    "discriminant_roots_paper",
    "discriminant_roots_exact",
    "paper_branches",
    "critical_mass_paper",
    "numeric_discriminant",
    "discriminant_crossings",
    "critical_mass_numeric",
    "critical_mass_report",
    "ROBE_LIMIT",
]

ROBE_LIMIT = 8.0 / 9.0
BISECTION_TOL = 1e-10
SCAN_SAMPLES = 256


def discriminant_roots_paper(a1: float, k: float) -> tuple[float, float]:
    """First-order roots ``(A+, A-) = (8/9 + 4/3 a1 - 4k, 4k)``."""
    return 8.0 / 9.0 + 4.0 / 3.0 * a1 - 4.0 * k, 4.0 * k


def discriminant_roots_exact(n_sq: float, k: float) -> tuple[float, float]:
    """Exact roots ``(A+, A-)`` of ``9 A**2 - 8 n2 A + 32 n2 k = 0``, ``A- <= A+``.

    Raises
    ------
    NoRealRootError
        When ``64 n2**2 < 1152 n2 k``.
    """
    if not n_sq > 0.0:
        raise DomainError(f"n_sq must be positive, got {n_sq!r}")
    disc = 64.0 * n_sq * n_sq - 4.0 * 9.0 * 32.0 * n_sq * k
    if disc < 0.0:
        raise NoRealRootError(
            f"9A^2 - 8n^2 A + 32n^2 k = 0 has no real root for n_sq={n_sq!r}, k={k!r}"
        )
    root = math.sqrt(disc)
    a_plus = (8.0 * n_sq + root) / 18.0
    # product of the roots is 32 n2 k / 9; avoids cancellation for small k
    a_minus = (32.0 * n_sq * k / 9.0) / a_plus if a_plus != 0.0 else 0.0
    return a_plus, a_minus


def paper_branches(a1: float, k: float) -> dict[str, float]:
    """The four closed-form branches for the critical mass."""
    denom = 12.0 - 9.0 * a1 + 24.0 * k
    if denom == 0.0:
        raise DomainError(f"12 - 9 a1 + 24 k vanishes for a1={a1!r}, k={k!r}")
    a_plus_form = 8.0 / 9.0 + 4.0 / 3.0 * a1 - 4.0 * k
    return {
        "mu_c_pp": -a_plus_form,
        "mu_c_pm": -4.0 * k,
        "mu_c_eq18": -2.0 / denom + a_plus_form,
        "mu_c_mm": -2.0 / denom + 4.0 * k,
    }


@dataclass
class CriticalMassReport:
    """All critical-mass routes for one ``(a1, k)``.

    ``mu_admissible`` is signed (negative); its magnitude is the critical
    mass ratio.  ``a_plus_exact``/``a_minus_exact`` are ``None`` when the
    exact quadratic has no real root, and ``mu_numeric`` is ``None`` unless a
    numeric crossing was requested and found.
    """

    a1: float
    k: float
    n_sq: float
    a_plus_paper: float
    a_minus_paper: float
    a_plus_exact: Optional[float]
    a_minus_exact: Optional[float]
    mu_c_pp: float
    mu_c_pm: float
    mu_c_eq18: float
    mu_c_mm: float
    mu_admissible: float
    mu_numeric: Optional[float] = None
    mu_numeric_crossings: list[float] = field(default_factory=list)
    method: str = "paper"
    numeric_range: Optional[tuple[float, float]] = None

    @property
    def mu_branches(self) -> dict[str, float]:
        return {
            "mu_c_pp": self.mu_c_pp,
            "mu_c_pm": self.mu_c_pm,
            "mu_c_eq18": self.mu_c_eq18,
            "mu_c_mm": self.mu_c_mm,
        }

    def to_dict(self) -> dict:
        data = dict(self.__dict__)
        data["mu_numeric_crossings"] = list(self.mu_numeric_crossings)
        data["numeric_range"] = None if self.numeric_range is None else list(self.numeric_range)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "CriticalMassReport":
        data = dict(data)
        if data.get("numeric_range") is not None:
            data["numeric_range"] = tuple(data["numeric_range"])
        return cls(**data)


def critical_mass_paper(a1: float, k: float) -> CriticalMassReport:
    """Closed-form branches plus both flavors of the discriminant roots."""
    a1, k = float(a1), float(k)
    n_sq = make_params(0.0, a1, k).n_sq
    a_plus_p, a_minus_p = discriminant_roots_paper(a1, k)
    try:
        a_plus_e, a_minus_e = discriminant_roots_exact(n_sq, k)
    except NoRealRootError:
        a_plus_e = a_minus_e = None
    branches = paper_branches(a1, k)
    return CriticalMassReport(
        a1=a1,
        k=k,
        n_sq=n_sq,
        a_plus_paper=a_plus_p,
        a_minus_paper=a_minus_p,
        a_plus_exact=a_plus_e,
        a_minus_exact=a_minus_e,
        mu_admissible=-(8.0 / 9.0 + 4.0 / 3.0 * a1 - 4.0 * k),
        **branches,
    )


def numeric_discriminant(mu: float, a1: float, k: float) -> float:
    """``p**2 - 4q`` at the numeric equilibrium for mass ratio ``mu``."""
    params = make_params(mu, a1, k)
    eq = robe_equilibrium(params)
    p, q = characteristic_coefficients(linearize(params, eq, NUMERIC))
    return p * p - 4.0 * q


def _bisect(a1, k, lo, d_lo, hi):
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        d_mid = numeric_discriminant(mid, a1, k)
        if d_mid == 0.0:
            return mid
        if (d_mid > 0.0) == (d_lo > 0.0):
            lo, d_lo = mid, d_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def discriminant_crossings(
    a1: float, k: float, mu_lo: float, mu_hi: float, samples: int = SCAN_SAMPLES
) -> list[float]:
    """Every sign change of the numeric discriminant on a ``mu`` grid, bisected."""
    if not 0.0 < mu_lo < mu_hi < 1.0:
        raise DomainError(f"need 0 < mu_lo < mu_hi < 1, got [{mu_lo!r}, {mu_hi!r}]")
    mus = np.linspace(mu_lo, mu_hi, samples)
    ds = [numeric_discriminant(float(m), a1, k) for m in mus]
    crossings = []
    for i in range(samples - 1):
        if ds[i] == 0.0:
            crossings.append(float(mus[i]))
        elif ds[i + 1] != 0.0 and (ds[i] > 0.0) != (ds[i + 1] > 0.0):
            crossings.append(_bisect(a1, k, float(mus[i]), ds[i], float(mus[i + 1])))
    if ds[-1] == 0.0:
        crossings.append(float(mus[-1]))
    return crossings


def critical_mass_numeric(
    a1: float, k: float, mu_lo: float, mu_hi: float, samples: int = SCAN_SAMPLES
) -> Optional[float]:
    """Lowest ``mu`` in ``[mu_lo, mu_hi]`` where the discriminant changes sign.

    Returns ``None`` when the discriminant keeps one sign on the scan grid.
    """
    crossings = discriminant_crossings(a1, k, mu_lo, mu_hi, samples)
    return crossings[0] if crossings else None


def critical_mass_report(
    a1: float,
    k: float,
    method: str = "paper",
    mu_lo: float = 1e-4,
    mu_hi: float = 0.999,
) -> CriticalMassReport:
    """Report for ``method`` in ``{"paper", "exact", "numeric", "all"}``.

    ``paper`` and ``exact`` share the closed-form fields; ``numeric`` and
    ``all`` additionally bisect the discriminant on ``[mu_lo, mu_hi]``.
    """
    if method not in ("paper", "exact", "numeric", "all"):
        raise DomainError(f"unknown method {method!r}")
    report = critical_mass_paper(a1, k)
    report.method = method
    if method in ("numeric", "all"):
        crossings = discriminant_crossings(a1, k, mu_lo, mu_hi)
        report.mu_numeric_crossings = crossings
        report.mu_numeric = crossings[0] if crossings else None
        report.numeric_range = (float(mu_lo), float(mu_hi))
    return report

