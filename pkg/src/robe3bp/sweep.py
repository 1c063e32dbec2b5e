"""Parameter sweeps over (mu, a1, k) producing stability maps."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, NoSignChangeError, NumericalError
from .model import make_params
from .stability import FLAVORS, NUMERIC, assess

__all__ = [
    "SweepSpec",
    "SweepRecord",
    "parse_range",
    "run_sweep",
    "records_to_csv",
    "records_to_json",
    "verdict_boundaries",
    "CSV_HEADER",
    "MAX_CELLS",
]

MAX_CELLS = 10**8
CSV_HEADER = (
    "mu", "a1", "k", "x_eq", "D", "verdict_planar", "verdict_vertical", "max_re_lambda", "status",
)

STATUS_OK = "ok"
STATUS_NO_EQUILIBRIUM = "no_equilibrium"
STATUS_SOLVER_FAILURE = "solver_failure"


def parse_range(text: str) -> tuple[float, float, int]:
    """Parse ``start:stop:count`` (or a single value, meaning one cell)."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return (v, v, 1)
        if len(parts) == 3:
            return (float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError:
        pass
    raise DomainError(f"range must be 'start:stop:count' or a single number, got {text!r}")


def _axis(rng: tuple[float, float, int]) -> np.ndarray:
    start, stop, count = rng
    if count == 1:
        return np.array([float(start)])
    return np.linspace(start, stop, count)


@dataclass(frozen=True)
class SweepSpec:
    mu_range: tuple[float, float, int]
    a1_range: tuple[float, float, int] = (0.0, 0.0, 1)
    k_range: tuple[float, float, int] = (0.0, 0.0, 1)
    flavor: str = NUMERIC
    output_format: str = "csv"

    def __post_init__(self):
        for name in ("mu_range", "a1_range", "k_range"):
            start, stop, count = getattr(self, name)
            if not (math.isfinite(start) and math.isfinite(stop)):
                raise DomainError(f"{name} bounds must be finite")
            if start > stop:
                raise DomainError(f"{name} needs start <= stop, got {start!r} > {stop!r}")
            if int(count) != count or count < 1:
                raise DomainError(f"{name} count must be an integer >= 1, got {count!r}")
        if self.cells > MAX_CELLS:
            raise DomainError(f"sweep has {self.cells} cells, limit is {MAX_CELLS}")
        if self.flavor not in FLAVORS:
            raise DomainError(f"unknown flavor {self.flavor!r}; expected one of {FLAVORS}")
        if self.output_format not in ("csv", "json"):
            raise DomainError(f"unknown output format {self.output_format!r}")

    @property
    def cells(self) -> int:
        return int(self.mu_range[2]) * int(self.a1_range[2]) * int(self.k_range[2])

    def grid(self) -> Iterable[tuple[float, float, float]]:
        """Cells ordered by (a1 index, k index, mu index)."""
        mus, a1s, ks = _axis(self.mu_range), _axis(self.a1_range), _axis(self.k_range)
        for a1 in a1s:
            for k in ks:
                for mu in mus:
                    yield float(mu), float(a1), float(k)


@dataclass(frozen=True)
class SweepRecord:
    mu: float
    a1: float
    k: float
    x_eq: Optional[float]
    D: Optional[float]
    verdict_planar: Optional[str]
    verdict_vertical: Optional[str]
    max_re_lambda: Optional[float]
    status: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def evaluate_cell(mu: float, a1: float, k: float, flavor: str = NUMERIC) -> SweepRecord:
    """One sweep cell; solver failures become status markers, never verdicts."""
    try:
        params = make_params(mu, a1, k)
        eq, report = assess(params, flavor)
    except NoSignChangeError:
        return SweepRecord(mu, a1, k, None, None, None, None, None, STATUS_NO_EQUILIBRIUM)
    except (NumericalError, DomainError):
        return SweepRecord(mu, a1, k, None, None, None, None, None, STATUS_SOLVER_FAILURE)
    return SweepRecord(
        mu=mu, a1=a1, k=k,
        x_eq=eq.x,
        D=report.discriminant,
        verdict_planar=report.verdict_planar,
        verdict_vertical=report.verdict_vertical,
        max_re_lambda=report.max_re_lambda,
        status=STATUS_OK,
    )


def _evaluate_chunk(args):
    cells, flavor = args
    return [evaluate_cell(mu, a1, k, flavor) for mu, a1, k in cells]


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """Evaluate every cell of ``spec``; the result order is the grid order."""
    cells = list(spec.grid())
    if workers <= 1 or len(cells) < 2:
        return _evaluate_chunk((cells, spec.flavor))
    size = max(1, math.ceil(len(cells) / (4 * workers)))
    chunks = [(cells[i:i + size], spec.flavor) for i in range(0, len(cells), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_evaluate_chunk, chunks))
    return [rec for part in parts for rec in part]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow([_fmt(getattr(rec, name)) for name in CSV_HEADER])
    return buf.getvalue()


def records_to_json(records: Iterable[SweepRecord], spec: Optional[SweepSpec] = None) -> str:
    payload = {"records": [rec.to_dict() for rec in records]}
    if spec is not None:
        payload["spec"] = {
            "mu_range": list(spec.mu_range),
            "a1_range": list(spec.a1_range),
            "k_range": list(spec.k_range),
            "flavor": spec.flavor,
        }
    return json.dumps(payload, indent=2, allow_nan=False)


def verdict_boundaries(records: Iterable[SweepRecord]) -> list[tuple[float, float, str, str]]:
    """Adjacent ``ok`` cells (along ``mu``) whose planar verdicts differ.

    Returns ``(mu_left, mu_right, verdict_left, verdict_right)`` tuples.
    Cells with a failure status break adjacency.
    """
    out = []
    prev = None
    for rec in records:
        if prev is not None and (prev.a1, prev.k) == (rec.a1, rec.k):
            if (
                prev.status == STATUS_OK
                and rec.status == STATUS_OK
                and prev.verdict_planar != rec.verdict_planar
            ):
                out.append((prev.mu, rec.mu, prev.verdict_planar, rec.verdict_planar))
        prev = rec
    return out
