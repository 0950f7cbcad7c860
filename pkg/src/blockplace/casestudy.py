"""Energy of a periodic wake-compute-sleep application.

Each period of length ``T`` runs an active region (energy ``e0``, duration
``t_a``) and sleeps for the rest at power ``p_s``.  An optimization scales
the active region's energy by ``k_e`` and its duration by ``k_t``.  All
quantities are SI: joules, seconds, watts.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .errors import CaseStudyError


@dataclass(frozen=True)
class CaseStudyParams:
    e0: float
    t_a: float
    p_s: float
    k_e: float
    k_t: float

    def __post_init__(self):
        if self.e0 < 0:
            raise CaseStudyError("e0 must be >= 0")
        if not self.t_a > 0:
            raise CaseStudyError("t_a must be > 0")
        if self.p_s < 0:
            raise CaseStudyError("p_s must be >= 0")
        if not (self.k_e > 0 and self.k_t > 0):
            raise CaseStudyError("k_e and k_t must be > 0")

    @classmethod
    def from_json(cls, text: str) -> CaseStudyParams:
        try:
            doc = json.loads(text)
            return cls(*(float(doc[k]) for k in ("e0", "t_a", "p_s", "k_e", "k_t")))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CaseStudyError(f"malformed case-study parameters: {exc}") from exc


def min_period(params: CaseStudyParams, optimized: bool) -> float:
    return params.k_t * params.t_a if optimized else params.t_a


def min_feasible_period(params: CaseStudyParams) -> float:
    """Shortest period in which both the original and optimized regions fit."""
    return max(params.t_a, params.k_t * params.t_a)


def _check_period(params, T, optimized):
    lo = min_period(params, optimized)
    if T < lo:
        raise CaseStudyError(f"period {T} s is shorter than the active region; minimum is {lo} s")


def period_energy(params: CaseStudyParams, T: float, optimized: bool = False) -> float:
    _check_period(params, T, optimized)
    if optimized:
        return params.k_e * params.e0 + params.p_s * (T - params.k_t * params.t_a)
    return params.e0 + params.p_s * (T - params.t_a)


def energy_saved(params: CaseStudyParams, T: float | None = None) -> float:
    """Energy saved per period; does not depend on ``T``."""
    if T is not None:
        _check_period(params, T, False)
        _check_period(params, T, True)
    return params.e0 * (1 - params.k_e) + params.p_s * params.t_a * (params.k_t - 1)


def battery_extension(params: CaseStudyParams, T: float) -> float:
    """Fractional battery-life gain ``E / E' - 1`` at a fixed battery capacity."""
    return period_energy(params, T, False) / period_energy(params, T, True) - 1


@dataclass(frozen=True)
class PeriodRow:
    period: float
    ratio: float | None
    saved: float | None
    extension: float | None
    error: str | None = None


def sweep_period(params: CaseStudyParams, periods) -> list[PeriodRow]:
    rows = []
    for T in periods:
        try:
            e = period_energy(params, T, False)
            e_opt = period_energy(params, T, True)
        except CaseStudyError as exc:
            rows.append(PeriodRow(T, None, None, None, str(exc)))
            continue
        ratio = e_opt / e if e else 1.0
        ext = e / e_opt - 1 if e_opt else 0.0
        rows.append(PeriodRow(T, ratio, energy_saved(params), ext))
    return rows


def period_multiples(params: CaseStudyParams, n: int = 10) -> list[float]:
    """Periods ``t_a, 2*t_a, ..., n*t_a``."""
    return [m * params.t_a for m in range(1, n + 1)]


def sweep_to_csv(rows: list[PeriodRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["T", "ratio", "saved_joules", "extension"])
    for r in rows:
        if r.error:
            w.writerow([repr(r.period), "infeasible", "infeasible", "infeasible"])
        else:
            w.writerow([repr(r.period), repr(r.ratio), repr(r.saved), repr(r.extension)])
    return buf.getvalue()
