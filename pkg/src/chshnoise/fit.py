"""Recover the colored/white noise split from measured maximal Bell values.

The entangled fraction ``p`` of each point is taken as known; ``r`` is found
by bisection, using that ``beta_max(p, r)`` is increasing in ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from scipy import optimize as _sopt

from .chsh import TSIRELSON
from .optimize import CurveResult, curve, fixed_white_fraction, maximize_beta
from .qstate import NoiseParams

# beta_exp within this distance of an endpoint of the attainable range is
# snapped to it instead of rejected
RANGE_SLACK = 1e-12


@dataclass(frozen=True)
class ExperimentPoint:
    p: float
    beta_exp: float
    sigma: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and 0.0 <= self.p <= 1.0):
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        if not math.isfinite(self.beta_exp):
            raise ValueError(f"beta_exp must be finite, got {self.beta_exp!r}")
        if self.sigma is not None and not (self.sigma >= 0.0):
            raise ValueError(f"sigma must be non-negative, got {self.sigma!r}")

    @property
    def is_physical(self) -> bool:
        allowance = self.sigma or 0.0
        return 0.0 <= self.beta_exp <= TSIRELSON + allowance


@dataclass(frozen=True)
class FitResult:
    p: float
    r: float | None
    white_of_noise: float | None
    colored_of_noise: float | None
    beta_model: float | None
    beta_exp: float | None = None
    sigma: float | None = None
    status: str = "ok"
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "beta_exp": self.beta_exp,
            "sigma": self.sigma,
            "r": self.r,
            "white_of_noise": self.white_of_noise,
            "colored_of_noise": self.colored_of_noise,
            "beta_model": self.beta_model,
            "status": self.status,
            "reason": self.reason,
        }


class OutOfRangeError(ValueError):
    """``beta_exp`` cannot be reached by any noise split at the given ``p``."""

    def __init__(self, point: ExperimentPoint, interval: tuple[float, float]):
        self.point = point
        self.interval = interval
        super().__init__(
            f"beta_exp={point.beta_exp!r} at p={point.p!r} is outside the attainable "
            f"interval [{interval[0]!r}, {interval[1]!r}]"
        )


class NoNoiseError(ValueError):
    pass


def noise_split(params: NoiseParams) -> tuple[float, float]:
    """Return ``(white_of_noise, colored_of_noise)`` as fractions of ``1 - p``."""
    if params.p >= 1.0:
        raise NoNoiseError("p = 1 leaves no noise to split")
    colored = min(params.r / (1.0 - params.p), 1.0)
    return 1.0 - colored, colored


def attainable_interval(p: float) -> tuple[float, float]:
    """Range of beta_max at fixed ``p``, from all-white to all-colored noise."""
    return (
        maximize_beta(NoiseParams(p, 0.0)).beta_max,
        maximize_beta(NoiseParams(p, 1.0 - p)).beta_max,
    )


def fit_r(point: ExperimentPoint, tol: float = 1e-8) -> FitResult:
    p = point.p
    if p >= 1.0:
        raise NoNoiseError(
            f"p = 1 leaves no noise to split (beta_exp={point.beta_exp!r}, "
            f"noise-free value {TSIRELSON!r})"
        )
    lo, hi = attainable_interval(p)
    b = point.beta_exp
    if b < lo - RANGE_SLACK or b > hi + RANGE_SLACK:
        raise OutOfRangeError(point, (lo, hi))

    r_max = 1.0 - p
    if b <= lo:
        r = 0.0
    elif b >= hi:
        r = r_max
    else:
        r = _sopt.bisect(
            lambda rr: maximize_beta(NoiseParams(p, rr)).beta_max - b, 0.0, r_max, xtol=tol
        )
    params = NoiseParams(p, min(float(r), r_max))
    white, colored = noise_split(params)
    return FitResult(
        p=p,
        r=params.r,
        white_of_noise=white,
        colored_of_noise=colored,
        beta_model=maximize_beta(params).beta_max,
        beta_exp=b,
        sigma=point.sigma,
    )


def fit_batch(points: Iterable[ExperimentPoint], tol: float = 1e-8) -> list[FitResult]:
    """Fit each point independently; failures become skipped records."""
    results = []
    for point in points:
        try:
            results.append(fit_r(point, tol))
        except OutOfRangeError as exc:
            results.append(_skipped(point, "out_of_range", str(exc)))
        except NoNoiseError as exc:
            results.append(_skipped(point, "no_noise", str(exc)))
    return results


def _skipped(point: ExperimentPoint, status: str, reason: str) -> FitResult:
    return FitResult(
        p=point.p, r=None, white_of_noise=None, colored_of_noise=None, beta_model=None,
        beta_exp=point.beta_exp, sigma=point.sigma, status=status, reason=reason,
    )


def fixed_white_curve(w: float, p_axis: Sequence[float], tol: float = 1e-12) -> CurveResult:
    """Model curve with white noise a fixed fraction ``w`` of the total noise."""
    return curve(fixed_white_fraction(w), p_axis, tol)


@dataclass(frozen=True)
class TableRow:
    nr: int
    p: float
    one_minus_p: float
    white_pct: float
    colored_pct: float
    r: float


# Noise-proportion table published alongside the measured maximal Bell values
# (printed values, two-decimal / integer-percent rounding). Reference data only.
REFERENCE_TABLE_SOURCE = "published noise-proportion table, 10 experimental points"
REFERENCE_TABLE: tuple[TableRow, ...] = (
    TableRow(1, 0.02, 0.98, 2, 98, 0.96),
    TableRow(2, 0.06, 0.97, 3, 97, 0.92),
    TableRow(3, 0.17, 0.83, 4, 96, 0.80),
    TableRow(4, 0.24, 0.76, 2, 98, 0.75),
    TableRow(5, 0.32, 0.68, 2, 98, 0.67),
    TableRow(6, 0.42, 0.58, 5, 95, 0.55),
    TableRow(7, 0.52, 0.48, 5, 95, 0.46),
    TableRow(8, 0.64, 0.36, 7, 93, 0.40),
    TableRow(9, 0.75, 0.25, 15, 85, 0.21),
    TableRow(10, 0.85, 0.15, 15, 85, 0.13),
)

ONE_MINUS_P_TOL = 0.005
R_TOL = 0.01


@dataclass(frozen=True)
class TableCheck:
    row: TableRow
    one_minus_p: float
    r: float
    flags: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "nr": self.row.nr,
            "p": self.row.p,
            "one_minus_p": self.one_minus_p,
            "white_pct": self.row.white_pct,
            "colored_pct": self.row.colored_pct,
            "r": self.r,
            "printed_one_minus_p": self.row.one_minus_p,
            "printed_r": self.row.r,
            "flags": list(self.flags),
        }


def check_table_row(row: TableRow) -> TableCheck:
    """Recompute ``1 - p`` and ``r = (1 - p) * colored`` and flag disagreements."""
    one_minus_p = 1.0 - row.p
    r = one_minus_p * row.colored_pct / 100.0
    flags = []
    if abs(one_minus_p - row.one_minus_p) > ONE_MINUS_P_TOL:
        flags.append("one_minus_p_mismatch")
    if abs(r - row.r) > R_TOL:
        flags.append("r_mismatch")
    if row.p + row.r > 1.0 + 1e-12:
        flags.append("printed_r_outside_simplex")
    if abs(row.white_pct + row.colored_pct - 100.0) > 1e-9:
        flags.append("percentages_do_not_sum_to_100")
    return TableCheck(row, one_minus_p, r, tuple(flags))


def check_table(rows: Sequence[TableRow] = REFERENCE_TABLE) -> list[TableCheck]:
    return [check_table_row(row) for row in rows]
