"""Two-qubit concurrence (general and X-state) and Bell-state fidelity."""

import logging
import math
from enum import Enum

import numpy as np

from qrecover.errors import DimensionError
from qrecover.qmat import SY, hermitian_eigenvalues, psd_sqrt, tensor

log = logging.getLogger(__name__)

YY = tensor(SY, SY)
X_SUPPORT_TOL = 1e-12
_S = 1 / math.sqrt(2)


class BsmOutcome(Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def is_phi(self):
        return self in (BsmOutcome.PHI_PLUS, BsmOutcome.PHI_MINUS)

    @property
    def sign(self):
        return 1 if self in (BsmOutcome.PHI_PLUS, BsmOutcome.PSI_PLUS) else -1

    def vector(self):
        v = np.zeros(4, dtype=complex)
        if self.is_phi:
            v[0], v[3] = _S, self.sign * _S
        else:
            v[1], v[2] = _S, self.sign * _S
        return v


def _two_qubit(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"expected a 4x4 two-qubit density matrix, got {rho.shape}")
    return rho


def wootters_lambdas(rho):
    """Descending square roots of the eigenvalues of ``rho (Y⊗Y) rho* (Y⊗Y)``.

    Computed as the singular values of ``sqrt(rho) (Y⊗Y) sqrt(rho)* (Y⊗Y)``,
    read off as the non-negative eigenvalues of its Hermitian dilation. This
    avoids taking square roots of near-zero eigenvalues, which would turn
    1e-16 round-off into 1e-8 errors.
    """
    rho = _two_qubit(rho)
    s = psd_sqrt(rho)
    a = s @ YY @ s.conj() @ YY
    h = np.zeros((8, 8), dtype=complex)
    h[:4, 4:] = a
    h[4:, :4] = a.conj().T
    return hermitian_eigenvalues(h)[:4]


def concurrence(rho):
    lam = wootters_lambdas(rho)
    raw = lam[0] - lam[1] - lam[2] - lam[3]
    if raw < 0:
        log.debug("concurrence clamped, pre-clamp value %.3e", raw)
    return max(0.0, float(raw))


def is_x_state(rho, atol=X_SUPPORT_TOL):
    rho = _two_qubit(rho)
    mask = np.ones((4, 4), dtype=bool)
    mask[np.arange(4), np.arange(4)] = False
    mask[np.arange(4), 3 - np.arange(4)] = False
    return bool(np.all(np.abs(rho[mask]) < atol))


def concurrence_xstate(rho):
    """Closed-form concurrence for matrices supported on the diagonal and anti-diagonal."""
    rho = _two_qubit(rho)
    if not is_x_state(rho):
        raise ValueError("matrix has entries outside the X pattern")
    d = rho.diagonal().real
    a = abs(rho[0, 3]) - math.sqrt(max(d[1] * d[2], 0.0))
    b = abs(rho[1, 2]) - math.sqrt(max(d[0] * d[3], 0.0))
    raw = 2 * max(a, b)
    if raw < 0:
        log.debug("X-state concurrence clamped, pre-clamp value %.3e", raw)
    return max(0.0, float(raw))


def bell_fidelity(rho, target=BsmOutcome.PHI_PLUS):
    rho = _two_qubit(rho)
    v = target.vector()
    return float(np.real(v.conj() @ rho @ v))
