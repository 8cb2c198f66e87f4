"""Two-qubit polarization states mixed with white and colored noise.

Matrices are plain ``numpy`` complex arrays in the basis order
|00>, |01>, |10>, |11>, with the first tensor factor belonging to party A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

SQRT1_2 = 1.0 / math.sqrt(2.0)

# validation slack; constructor outputs are analytic
VALID_TOL = 1e-10
# slack on p + r <= 1 for parameters produced by floating-point arithmetic
SIMPLEX_SLACK = 1e-12


class BellKind(str, Enum):
    PSI_MINUS = "psi-minus"
    PHI_PLUS = "phi-plus"


class Basis(str, Enum):
    """Which Bell state carries the entangled fraction of a mixed state."""

    PSI_MINUS = "psi-minus"
    PHI_PLUS = "phi-plus"


@dataclass(frozen=True)
class NoiseParams:
    """Location ``(p, r)`` in the noise simplex.

    ``p`` is the weight of the pure Bell state, ``r`` the colored-noise
    weight; the white-noise weight ``1 - p - r`` is derived.
    """

    p: float
    r: float = 0.0

    def __post_init__(self) -> None:
        p, r = float(self.p), float(self.r)
        if not (math.isfinite(p) and math.isfinite(r)):
            raise ValueError(f"noise parameters must be finite, got p={p!r}, r={r!r}")
        if p < 0.0 or p > 1.0:
            raise ValueError(f"p must lie in [0, 1], got {p!r}")
        if r < 0.0:
            raise ValueError(f"r must be non-negative, got {r!r}")
        if p + r > 1.0 + SIMPLEX_SLACK:
            raise ValueError(f"p + r exceeds 1 (p={p!r}, r={r!r})")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)

    @property
    def white(self) -> float:
        return max(0.0, 1.0 - self.p - self.r)


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    eigenvalues: tuple[float, ...]
    tol: float = VALID_TOL

    @property
    def is_hermitian(self) -> bool:
        return self.hermiticity_defect <= self.tol

    @property
    def has_unit_trace(self) -> bool:
        return self.trace_defect <= self.tol

    @property
    def is_psd(self) -> bool:
        return self.min_eigenvalue >= -self.tol

    @property
    def ok(self) -> bool:
        return self.is_hermitian and self.has_unit_trace and self.is_psd


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
IDENTITY4 = np.eye(4, dtype=complex)


def pauli(axis: str) -> np.ndarray:
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected 'x', 'y' or 'z'") from None


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def expectation(rho: np.ndarray, obs: np.ndarray) -> float:
    """Return ``Re tr(rho @ obs)`` for a Hermitian observable."""
    obs = np.asarray(obs, dtype=complex)
    if np.max(np.abs(obs - obs.conj().T)) > 1e-12:
        raise ValueError("observable is not Hermitian")
    # tr(AB) = sum_ij A_ij B_ji
    return float(np.real(np.sum(np.asarray(rho) * obs.T)))


def bell_state(kind: BellKind | str) -> np.ndarray:
    kind = BellKind(kind)
    if kind is BellKind.PSI_MINUS:
        return np.array([0.0, SQRT1_2, -SQRT1_2, 0.0], dtype=complex)
    return np.array([SQRT1_2, 0.0, 0.0, SQRT1_2], dtype=complex)


def density_from_pure(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise ValueError(f"expected 4 amplitudes, got {psi.shape[0]}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > 1e-12:
        raise ValueError(f"state vector is not normalized (squared norm {norm2!r})")
    return np.outer(psi, psi.conj())


def bell_projector(kind: BellKind | str) -> np.ndarray:
    """Exact ``|psi><psi|`` for a Bell state (entries are +-1/2, no rounding)."""
    kind = BellKind(kind)
    rho = np.zeros((4, 4), dtype=complex)
    if kind is BellKind.PSI_MINUS:
        rho[1, 1] = rho[2, 2] = 0.5
        rho[1, 2] = rho[2, 1] = -0.5
    else:
        rho[0, 0] = rho[3, 3] = rho[0, 3] = rho[3, 0] = 0.5
    return rho


def _check_weight(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    return p


def _projector(*indices: int) -> np.ndarray:
    d = np.zeros(4)
    d[list(indices)] = 1.0
    return np.diag(d).astype(complex)


def werner(p: float) -> np.ndarray:
    """Singlet mixed with white noise: ``p|Psi-><Psi-| + (1-p)/4 I``."""
    p = _check_weight(p)
    return p * bell_projector(BellKind.PSI_MINUS) + (1.0 - p) / 4.0 * IDENTITY4


def colored(p: float) -> np.ndarray:
    """Singlet mixed with colored noise on the |01>, |10> populations."""
    p = _check_weight(p)
    return (
        p * bell_projector(BellKind.PSI_MINUS)
        + (1.0 - p) / 2.0 * _projector(1, 2)
    )


def colored_white(params: NoiseParams, basis: Basis | str = Basis.PSI_MINUS) -> np.ndarray:
    """Bell state plus colored and white noise.

    With ``basis="phi-plus"`` the colored term is ``(|00><00| + |11><11|)/2``
    around |Phi+>; with the default ``"psi-minus"`` it is the locally
    equivalent ``(|01><01| + |10><10|)/2`` around |Psi->. The latter is the
    form whose Bell value carries the sign of the closed-form expression.
    """
    if not isinstance(params, NoiseParams):
        raise TypeError("colored_white expects a NoiseParams instance")
    basis = Basis(basis)
    if basis is Basis.PSI_MINUS:
        pure = bell_projector(BellKind.PSI_MINUS)
        noise = _projector(1, 2)
    else:
        pure = bell_projector(BellKind.PHI_PLUS)
        noise = _projector(0, 3)
    white = 1.0 - params.p - params.r
    return params.p * pure + params.r / 2.0 * noise + white / 4.0 * IDENTITY4


def jacobi_eigenvalues(
    matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100
) -> np.ndarray:
    """Eigenvalues of a small Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the real symmetric Jacobi rotation. Iteration stops once every
    off-diagonal magnitude is below ``tol``. Returns sorted eigenvalues.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a)))
        if off.max(initial=0.0) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = abs(a[p, q])
                if g < tol * 1e-3:
                    continue
                phase = a[p, q] / g
                app, aqq = a[p, p].real, a[q, q].real
                tau = (aqq - app) / (2.0 * g)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(tau * tau + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # unitary G = diag(1, conj(phase)) @ [[c, s], [-s, c]] on rows/cols p, q
                gpp, gpq = c, s
                gqp, gqq = -s * phase.conjugate(), c * phase.conjugate()
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = col_p * gpp + col_q * gqp
                a[:, q] = col_p * gpq + col_q * gqq
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = np.conj(gpp) * row_p + np.conj(gqp) * row_q
                a[q, :] = np.conj(gpq) * row_p + np.conj(gqq) * row_q
                a[p, q] = a[q, p] = 0.0
    else:
        raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a).real)


def validate(rho: np.ndarray, tol: float = VALID_TOL) -> ValidationReport:
    """Check Hermiticity, unit trace and positivity of a density matrix.

    The eigenvalues are those of the Hermitian part, so a non-Hermitian input
    still gets a meaningful spectrum alongside its Hermiticity defect.
    """
    rho = np.asarray(rho, dtype=complex)
    herm_defect = float(np.max(np.abs(rho - rho.conj().T)))
    trace_defect = float(abs(np.trace(rho) - 1.0))
    eig = jacobi_eigenvalues(0.5 * (rho + rho.conj().T))
    return ValidationReport(
        hermiticity_defect=herm_defect,
        trace_defect=trace_defect,
        min_eigenvalue=float(eig[0]),
        eigenvalues=tuple(float(e) for e in eig),
        tol=tol,
    )


def correlation_matrix(rho: np.ndarray) -> np.ndarray:
    """3x3 matrix ``t[i, j] = <sigma_i (x) sigma_j>`` for i, j in x, y, z."""
    axes = ("x", "y", "z")
    t = np.empty((3, 3))
    for i, a in enumerate(axes):
        for j, b in enumerate(axes):
            t[i, j] = expectation(rho, kron(_PAULI[a], _PAULI[b]))
    return t
