"""Maximization of the restricted-family Bell value, bounds and parameter scans."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as _sopt

from .chsh import TSIRELSON
from .qstate import NoiseParams, correlation_matrix

COARSE_POINTS = 1024
TIE_TOL = 1e-9
CLASSICAL_BOUND = 2.0

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class Optimum:
    beta_max: float
    theta_star: float
    phi_star: float
    evaluations: int
    degenerate: bool

    def as_dict(self) -> dict:
        return {
            "beta_max": self.beta_max,
            "theta_star": self.theta_star,
            "phi_star": self.phi_star,
            "evaluations": self.evaluations,
            "degenerate": self.degenerate,
        }


def _xy(p: float, r: float, theta):
    """Cosine and sine coefficients of the Bell value as a function of phi."""
    ct, st = np.cos(theta), np.sin(theta)
    k = 2.0 * p + r
    x = k * (st * st + ct) + r * ct
    y = -k * (ct - 1.0) * st
    return x, y


def phi_eliminate(params: NoiseParams, theta: float) -> tuple[float, float]:
    """Maximize over phi analytically at fixed theta.

    The Bell value is ``X cos(phi) + Y sin(phi)``, so the best phi is
    ``atan2(Y, X)`` and the best value is ``hypot(X, Y)``.
    """
    x, y = _xy(params.p, params.r, float(theta))
    x, y = float(x), float(y)
    if x == 0.0 and y == 0.0:
        return 0.0, 0.0
    phi = math.atan2(y, x) + 0.0  # no signed zero
    if phi == -math.pi:
        phi = math.pi
    return phi, math.hypot(x, y)


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float, int]:
    """Golden-section search for a maximum of a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x), evaluations)`` where ``x`` is the better of the two
    final interior points.
    """
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return float(x), f(x), 1
    n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    fc, fd = f(c), f(d)
    evals = 2
    for _ in range(n - 1):
        h *= _INV_PHI
        if fc > fd:
            b, d, fd = d, c, fc
            c = a + _INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * h
            fd = f(d)
        evals += 1
    if fc >= fd:
        return float(c), fc, evals
    return float(d), fd, evals


def maximize_beta(params: NoiseParams, tol: float = 1e-12) -> Optimum:
    """Maximum of the Bell value over the two-angle family for a given state.

    phi is eliminated in closed form; theta is searched on [0, pi] with a
    coarse uniform grid followed by golden-section refinement inside the
    best grid bracket. Ties within ``TIE_TOL`` go to the smallest theta.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    p, r = params.p, params.r

    def value(theta: float) -> float:
        x, y = _xy(p, r, theta)
        return math.hypot(float(x), float(y))

    grid = np.linspace(0.0, math.pi, COARSE_POINTS)
    gx, gy = _xy(p, r, grid)
    vals = np.hypot(gx, gy)
    evals = COARSE_POINTS

    left = np.concatenate(([True], vals[1:] >= vals[:-1]))
    right = np.concatenate((vals[:-1] >= vals[1:], [True]))
    peaks = np.flatnonzero(left & right)
    best = vals[peaks].max()
    i = int(peaks[vals[peaks] >= best - TIE_TOL][0])

    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, COARSE_POINTS - 1)]
    theta_g, value_g, n = golden_section_max(value, float(lo), float(hi), tol)
    evals += n

    candidates = sorted(
        [(float(lo), float(vals[max(i - 1, 0)])), (theta_g, value_g),
         (float(hi), float(vals[min(i + 1, COARSE_POINTS - 1)]))]
    )
    top = max(v for _, v in candidates)
    theta_star, beta_max = next((t, v) for t, v in candidates if v >= top - TIE_TOL)

    phi_star, _ = phi_eliminate(params, theta_star)
    return Optimum(
        beta_max=beta_max,
        theta_star=theta_star,
        phi_star=phi_star,
        evaluations=evals,
        degenerate=theta_star == 0.0,
    )


def beta_max(p: float, r: float = 0.0) -> float:
    """Shorthand for ``maximize_beta(NoiseParams(p, r)).beta_max``."""
    return maximize_beta(NoiseParams(p, r)).beta_max


def horodecki_max(rho: np.ndarray) -> float:
    """Unrestricted two-setting CHSH maximum, ``2 sqrt(t1^2 + t2^2)``."""
    s = np.linalg.svd(correlation_matrix(rho), compute_uv=False)
    s = np.sort(s)[::-1]
    return float(2.0 * math.hypot(s[0], s[1]))


def _planar_correlators(rho: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    # E[i, j] = Re tr(rho (A_i (x) B_j)) with A = cos a sz + sin a sx
    def obs(angles):
        c, s = np.cos(angles), np.sin(angles)
        out = np.empty((len(angles), 2, 2), dtype=complex)
        out[:, 0, 0], out[:, 1, 1] = c, -c
        out[:, 0, 1] = out[:, 1, 0] = s
        return out

    r4 = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    return np.einsum("abcd,ica,jdb->ij", r4, obs(alpha), obs(beta)).real


def brute_force_planar_max(rho: np.ndarray, grid_n: int = 256) -> float:
    """Exhaustive CHSH search over four independent x-z plane angles.

    Test oracle. All ``grid_n**4`` angle combinations on a uniform grid are
    covered exactly (the maximum over Bob's pair factorizes for fixed Alice
    settings), then the best node is polished with Nelder-Mead.
    """
    if grid_n < 64:
        raise ValueError(f"grid_n must be at least 64, got {grid_n}")
    angles = np.linspace(0.0, 2.0 * math.pi, grid_n, endpoint=False)
    e = _planar_correlators(rho, angles, angles)

    best, arg = -math.inf, (0, 0, 0, 0)
    for i in range(grid_n):
        # u[k, j]: coefficient of B0 = -E(a0, b0) - E(a1, b0); w[k, l]: of B1
        u = -e[i][None, :] - e
        w = -e[i][None, :] + e
        umax, umin = u.max(axis=1), u.min(axis=1)
        wmax, wmin = w.max(axis=1), w.min(axis=1)
        pos, neg = umax + wmax, -(umin + wmin)
        k_pos, k_neg = int(pos.argmax()), int(neg.argmax())
        if pos[k_pos] > best:
            best = float(pos[k_pos])
            arg = (i, k_pos, int(u[k_pos].argmax()), int(w[k_pos].argmax()))
        if neg[k_neg] > best:
            best = float(neg[k_neg])
            arg = (i, k_neg, int(u[k_neg].argmin()), int(w[k_neg].argmin()))
    if best <= 0.0:
        return max(best, 0.0)

    def neg_abs_beta(x):
        a0, a1, b0, b1 = x
        ee = _planar_correlators(rho, np.array([a0, a1]), np.array([b0, b1]))
        return -abs(-ee[0, 0] - ee[0, 1] - ee[1, 0] + ee[1, 1])

    x0 = angles[list(arg)]
    res = _sopt.minimize(
        neg_abs_beta, x0, method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000},
    )
    return max(best, float(-res.fun))


@dataclass(frozen=True)
class Constraint:
    """A one-dimensional path ``r = r(p)`` through the noise simplex.

    kinds: ``no_white`` (r = 1-p), ``no_colored`` (r = 0), ``equal_split``
    (r = (1-p)/2), ``fixed_white_fraction`` (white is a fraction ``w`` of the
    total noise, r = (1-p)(1-w)) and ``fixed_white_weight`` (absolute white
    weight ``w``, r = 1-w-p).
    """

    kind: str
    w: float | None = None

    _KINDS = ("no_white", "no_colored", "equal_split", "fixed_white_fraction", "fixed_white_weight")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown constraint {self.kind!r}; expected one of {self._KINDS}")
        if self.kind.startswith("fixed_"):
            if self.w is None or not (0.0 <= self.w <= 1.0):
                raise ValueError(f"{self.kind} needs w in [0, 1], got {self.w!r}")

    def r_of(self, p: float) -> float:
        if self.kind == "no_white":
            return 1.0 - p
        if self.kind == "no_colored":
            return 0.0
        if self.kind == "equal_split":
            return (1.0 - p) / 2.0
        if self.kind == "fixed_white_fraction":
            return (1.0 - p) * (1.0 - self.w)
        return 1.0 - self.w - p

    def params(self, p: float) -> NoiseParams:
        return NoiseParams(p, self.r_of(p))

    @property
    def label(self) -> str:
        return self.kind if self.w is None else f"{self.kind}({self.w:g})"


NO_WHITE = Constraint("no_white")
NO_COLORED = Constraint("no_colored")
EQUAL_SPLIT = Constraint("equal_split")


def fixed_white_fraction(w: float) -> Constraint:
    return Constraint("fixed_white_fraction", float(w))


def fixed_white_weight(w: float) -> Constraint:
    return Constraint("fixed_white_weight", float(w))


@dataclass(frozen=True)
class ScanResult:
    """Optimum at every (p, r) node; ``grid[j][i]`` is the node (p_i, r_j),
    ``None`` outside the simplex."""

    p_values: tuple[float, ...]
    r_values: tuple[float, ...]
    grid: tuple[tuple[Optimum | None, ...], ...]

    def present(self):
        """Yield ``(p, r, Optimum)`` in p-major, then r, order."""
        for i, p in enumerate(self.p_values):
            for j, r in enumerate(self.r_values):
                opt = self.grid[j][i]
                if opt is not None:
                    yield p, r, opt


@dataclass(frozen=True)
class CurveResult:
    constraint: Constraint
    samples: tuple[tuple[float, Optimum], ...]

    @property
    def p_values(self) -> np.ndarray:
        return np.array([p for p, _ in self.samples])

    @property
    def beta_values(self) -> np.ndarray:
        return np.array([o.beta_max for _, o in self.samples])


def _check_axis(axis: Sequence[float], name: str) -> tuple[float, ...]:
    values = tuple(float(v) for v in axis)
    if any(not (0.0 <= v <= 1.0) for v in values):
        raise ValueError(f"{name} values must lie in [0, 1]")
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be sorted ascending")
    return values


def scan(p_axis: Sequence[float], r_axis: Sequence[float], tol: float = 1e-12) -> ScanResult:
    ps = _check_axis(p_axis, "p_axis")
    rs = _check_axis(r_axis, "r_axis")
    grid = tuple(
        tuple(
            maximize_beta(NoiseParams(p, r), tol) if p + r <= 1.0 + 1e-12 else None
            for p in ps
        )
        for r in rs
    )
    return ScanResult(ps, rs, grid)


def curve(constraint: Constraint, p_axis: Sequence[float], tol: float = 1e-12) -> CurveResult:
    ps = _check_axis(p_axis, "p_axis")
    samples = tuple((p, maximize_beta(constraint.params(p), tol)) for p in ps)
    return CurveResult(constraint, samples)


class NoSignChangeError(ValueError):
    def __init__(self, constraint: Constraint, bracket, values):
        self.constraint = constraint
        self.bracket = tuple(bracket)
        self.values = tuple(values)
        super().__init__(
            f"beta_max - 2 does not change sign on [{bracket[0]}, {bracket[1]}] "
            f"under {constraint.label}: beta_max = {values[0]!r} and {values[1]!r}"
        )


def threshold_p(
    constraint: Constraint, bracket: tuple[float, float], tol: float = 1e-9
) -> float:
    """Entangled fraction at which beta_max crosses the classical bound 2."""
    lo, hi = float(bracket[0]), float(bracket[1])

    def excess(p: float) -> float:
        return maximize_beta(constraint.params(p)).beta_max - CLASSICAL_BOUND

    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise NoSignChangeError(constraint, (lo, hi), (f_lo + 2.0, f_hi + 2.0))
    return float(_sopt.bisect(excess, lo, hi, xtol=tol))


__all__ = [
    "TSIRELSON",
    "Optimum",
    "ScanResult",
    "CurveResult",
    "Constraint",
    "NO_WHITE",
    "NO_COLORED",
    "EQUAL_SPLIT",
    "NoSignChangeError",
    "beta_max",
    "brute_force_planar_max",
    "curve",
    "fixed_white_fraction",
    "fixed_white_weight",
    "golden_section_max",
    "horodecki_max",
    "maximize_beta",
    "phi_eliminate",
    "scan",
    "threshold_p",
]
