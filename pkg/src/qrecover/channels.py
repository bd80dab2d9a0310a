"""Amplitude damping and its weak-measurement reversal as Kraus channels.

Branch index 0 is always the no-jump operator (damping ``D1``, reversal
success ``R1``); index 1 is the jump (``D2``) or failed reversal (``R2``).
"""

from dataclasses import dataclass

import numpy as np

from qrecover.errors import ZeroProbabilityError
from qrecover.qmat import I2, dag, num_qubits

ZERO_PROB_CUTOFF = 1e-15
SUCCESS = 0
JUMP = 1


@dataclass(frozen=True)
class KrausChannel:
    ops: tuple
    label: str = ""

    def completeness_error(self):
        total = sum(dag(k) @ k for k in self.ops)
        return float(np.max(np.abs(total - I2)))


def _check_strength(x, name):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def damping_ops(D):
    """Stacked ``(D1, D2)`` for scalar or array ``D``; shape ``(..., 2, 2, 2)``."""
    D = np.asarray(D, dtype=float)
    k = np.zeros(D.shape + (2, 2, 2), dtype=complex)
    k[..., 0, 0, 0] = 1.0
    k[..., 0, 1, 1] = np.sqrt(1.0 - D)
    k[..., 1, 0, 1] = np.sqrt(D)
    return k


def reversal_ops(R):
    """Stacked ``(R1, R2)`` for scalar or array ``R``; shape ``(..., 2, 2, 2)``."""
    R = np.asarray(R, dtype=float)
    k = np.zeros(R.shape + (2, 2, 2), dtype=complex)
    k[..., 0, 0, 0] = np.sqrt(1.0 - R)
    k[..., 0, 1, 1] = 1.0
    k[..., 1, 1, 0] = np.sqrt(R)
    return k


def amplitude_damping(D):
    _check_strength(D, "damping strength D")
    k = damping_ops(D)
    return KrausChannel((k[0], k[1]), label=f"damping(D={D:g})")


def reversal(R):
    _check_strength(R, "reversing strength R")
    k = reversal_ops(R)
    return KrausChannel((k[0], k[1]), label=f"reversal(R={R:g})")


def superoperator(ops):
    """``sum_m K_m ⊗ conj(K_m)`` as a 4x4 map on the (row bit, column bit) pair.

    ``ops`` has shape ``(..., m, 2, 2)``; leading axes are batch axes.
    """
    ops = np.asarray(ops, dtype=complex)
    s = np.einsum("...mik,...mjl->...ijkl", ops, ops.conj())
    return s.reshape(ops.shape[:-3] + (4, 4))


def apply_superoperator(rho, s, target):
    """Apply a single-qubit superoperator (see ``superoperator``) to qubit ``target``.

    Only the target's row and column bits are contracted, so the cost stays
    linear in the size of ``rho`` instead of building a lifted 2^n operator.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho)
    if not 0 <= target < n:
        raise ValueError(f"qubit index {target} out of range for {n} qubits")
    left, right = 2**target, 2 ** (n - target - 1)
    batch = np.broadcast_shapes(rho.shape[:-2], s.shape[:-2])
    b = list(range(len(batch)))
    nb = len(b)
    r = np.broadcast_to(rho, batch + rho.shape[-2:]).reshape(batch + (left, 2, right) * 2)
    # (row: a i c, col: a' j c') -> (a c a' c', i j)
    r = r.transpose(b + [nb, nb + 2, nb + 3, nb + 5, nb + 1, nb + 4]).reshape(batch + (-1, 4))
    r = r @ np.swapaxes(s, -1, -2)
    r = r.reshape(batch + (left, right, left, right, 2, 2))
    r = r.transpose(b + [nb, nb + 4, nb + 1, nb + 2, nb + 5, nb + 3])
    return r.reshape(batch + rho.shape[-2:])


def apply_op(rho, op, target):
    """Unnormalized ``K rho K^dagger`` with ``op`` acting on qubit ``target``.

    ``op`` may carry batch axes matching those of ``rho``.
    """
    op = np.asarray(op, dtype=complex)
    return apply_superoperator(rho, superoperator(op[..., None, :, :]), target)


def apply_channel(rho, ch, target):
    return apply_superoperator(rho, superoperator(np.stack(ch.ops, axis=-3)), target)


def apply_heralded(rho, ch, branch, target):
    """Keep only Kraus branch ``branch``; returns ``(normalized state, probability)``."""
    if not 0 <= branch < len(ch.ops):
        raise ValueError(f"branch {branch} out of range for {len(ch.ops)} operators")
    out = apply_op(np.asarray(rho, dtype=complex), ch.ops[branch], target)
    p = float(np.trace(out).real)
    if p < ZERO_PROB_CUTOFF:
        raise ZeroProbabilityError(p)
    return out / p, p
