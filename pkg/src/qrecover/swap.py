"""Entanglement swapping through one repeater node, with and without reversal.

Two pairs ``(A,B)`` and ``(C,D)`` start in ``a|00> + b|11>``. A Bell-state
measurement (BSM) on ``B,C`` leaves ``(A,D)`` entangled. In the two-way model
the intermediate qubits ``B, C`` are damped; in the one-way (relay
teleportation) model the transmitted qubits ``B, D`` are. Reversal is applied
to the same qubits as the damping, before the BSM.

``swap_numeric`` runs the full four-qubit density-matrix pipeline and is the
oracle for the closed-form constructors below it.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from qrecover.channels import (
    ZERO_PROB_CUTOFF, apply_op, apply_superoperator, damping_ops, reversal_ops, superoperator,
)
from qrecover.errors import ZeroProbabilityError
from qrecover.measures import BsmOutcome
from qrecover.qmat import I2, partial_trace, projector, tensor

__all__ = [
    "BELL",
    "BsmOutcome",
    "PairAmplitudes",
    "RepeaterModel",
    "SwapResult",
    "closed_form",
    "oneway_phi_closed",
    "oneway_psi_closed",
    "swap_numeric",
    "twoway_phi_closed",
    "twoway_psi_closed",
]


class RepeaterModel(Enum):
    TWO_WAY = "two-way"
    ONE_WAY = "one-way"
    SINGLE = "single"  # one damped pair, no swapping

    @property
    def noisy_qubits(self):
        if self is RepeaterModel.TWO_WAY:
            return (1, 2)
        if self is RepeaterModel.ONE_WAY:
            return (1, 3)
        raise ValueError("the single-pair model has no swapping stage")


@dataclass(frozen=True)
class PairAmplitudes:
    """``a|00> + b|11>``."""

    a: complex
    b: complex

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"pair amplitudes are not normalized (|a|^2+|b|^2 = {norm})")

    def vector(self):
        return np.array([self.a, 0, 0, self.b], dtype=complex)

    @classmethod
    def random(cls, rng):
        """Uniformly random point on the ``(a, b)`` sphere."""
        z = rng.normal(size=4)
        z /= np.linalg.norm(z)
        return cls(complex(z[0], z[1]), complex(z[2], z[3]))


BELL = PairAmplitudes(1 / math.sqrt(2), 1 / math.sqrt(2))


@dataclass(frozen=True)
class SwapResult:
    outcome: BsmOutcome
    state: np.ndarray  # normalized 4x4 state of (A, D)
    branch_prob: float  # probability of this BSM outcome, given both reversals succeeded
    reversal_prob: float  # product of the two heralding probabilities


def _check_strengths(**kw):
    for name, x in kw.items():
        if not np.all((0.0 <= np.asarray(x)) & (np.asarray(x) <= 1.0)):
            raise ValueError(f"{name} must lie in [0, 1], got {x}")


def _bsm_projector(outcome):
    return tensor(I2, tensor(projector(outcome.vector()), I2))


def numeric_branches(pair1, pair2, model, D1, D2, R1, R2):
    """Brute-force pipeline on the 16x16 state of ``A,B,C,D``.

    Strengths may be arrays (they broadcast together). Returns
    ``(projected, reversal_probs)`` where ``projected[outcome]`` is the
    unnormalized ``(A,D)`` state after the BSM projection, and
    ``reversal_probs`` is the pair of heralding probabilities.
    """
    D1, D2, R1, R2 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (D1, D2, R1, R2)))
    q1, q2 = model.noisy_qubits
    psi = np.kron(pair1.vector(), pair2.vector())
    rho = np.broadcast_to(projector(psi), D1.shape + (16, 16))
    for q, D in ((q1, D1), (q2, D2)):
        rho = apply_superoperator(rho, superoperator(damping_ops(D)), q)
    rho = apply_op(rho, reversal_ops(R1)[..., 0, :, :], q1)
    p1 = np.trace(rho, axis1=-2, axis2=-1).real
    rho = apply_op(rho, reversal_ops(R2)[..., 0, :, :], q2)
    p12 = np.trace(rho, axis1=-2, axis2=-1).real
    with np.errstate(divide="ignore", invalid="ignore"):
        p2 = np.where(p1 > 0, p12 / p1, 0.0)
    projected = {}
    for outcome in BsmOutcome:
        proj = _bsm_projector(outcome)
        projected[outcome] = partial_trace(proj @ rho @ proj, keep=(0, 3))
    return projected, (p1, p2)


def _to_result(outcome, unnorm, reversal_prob):
    weight = float(np.trace(unnorm).real)
    if weight < ZERO_PROB_CUTOFF or reversal_prob < ZERO_PROB_CUTOFF:
        raise ZeroProbabilityError(min(weight, reversal_prob))
    return SwapResult(outcome, unnorm / weight, weight / reversal_prob, reversal_prob)


def swap_numeric(pair1, pair2, model, D1, D2, R1=0.0, R2=0.0, outcome=BsmOutcome.PHI_PLUS):
    _check_strengths(D1=D1, D2=D2, R1=R1, R2=R2)
    projected, (p1, p2) = numeric_branches(pair1, pair2, model, D1, D2, R1, R2)
    return _to_result(outcome, projected[outcome], float(p1 * p2))


def reversal_success_prob(pair, D, R):
    """Heralding probability of the reversal on a damped ``a|00> + b|11>`` pair."""
    a2, b2 = abs(pair.a) ** 2, abs(pair.b) ** 2
    Rb = 1 - R
    return Rb * a2 + D * Rb * b2 + (1 - D) * b2


def tilde_state(pair1, pair2, model, D, R, outcome):
    """Unnormalized ``(A,D)`` matrix in closed form (twice the single-outcome projection).

    Broadcasts over array ``D`` and ``R``; shape ``(..., 4, 4)``.
    """
    if model is RepeaterModel.SINGLE:
        raise ValueError("the single-pair model has no swapping stage")
    D, R = np.broadcast_arrays(np.asarray(D, dtype=float), np.asarray(R, dtype=float))
    al, be, ga, de = pair1.a, pair1.b, pair2.a, pair2.b
    ag = abs(al * ga) ** 2
    ad = abs(al * de) ** 2
    bg = abs(be * ga) ** 2
    bd = abs(be * de) ** 2
    Db, Rb = 1 - D, 1 - R
    s = outcome.sign
    m = np.zeros(D.shape + (4, 4), dtype=complex)
    two_way = model is RepeaterModel.TWO_WAY
    if outcome.is_phi:
        m[..., 0, 0] = Rb**2 * ag
        m[..., 3, 0] = s * Db * Rb * np.conj(al) * be * np.conj(ga) * de
        m[..., 0, 3] = np.conj(m[..., 3, 0])
        if two_way:
            m[..., 1, 1] = D * Rb**2 * ad
            m[..., 2, 2] = D * Rb**2 * bg
            m[..., 3, 3] = (D**2 * Rb**2 + Db**2) * bd
        else:
            m[..., 2, 2] = D * Rb**2 * bg + D * Db * Rb * bd
            m[..., 3, 3] = Db**2 * bd
    else:
        m[..., 1, 2] = s * Db * Rb * al * np.conj(be) * np.conj(ga) * de
        m[..., 2, 1] = np.conj(m[..., 1, 2])
        if two_way:
            m[..., 1, 1] = Db * Rb * ad
            m[..., 2, 2] = Db * Rb * bg
            m[..., 3, 3] = 2 * D * Db * Rb * bd
        else:
            m[..., 0, 0] = D * Rb**2 * ad
            m[..., 1, 1] = Db * Rb * ad
            m[..., 2, 2] = Db * Rb * bg + D**2 * Rb**2 * bd
            m[..., 3, 3] = D * Db * Rb * bd
    return m


def closed_form(pair1, pair2, model, D, R, outcome):
    _check_strengths(D=D, R=R)
    m = tilde_state(pair1, pair2, model, D, R, outcome)
    rev = reversal_success_prob(pair1, D, R) * reversal_success_prob(pair2, D, R)
    tr = float(np.trace(m).real)
    if tr < ZERO_PROB_CUTOFF or rev < ZERO_PROB_CUTOFF:
        raise ZeroProbabilityError(min(tr, rev))
    return SwapResult(outcome, m / tr, tr / (2 * rev), float(rev))


def twoway_phi_closed(pair1, pair2, D, R=0.0, outcome=BsmOutcome.PHI_PLUS):
    if not outcome.is_phi:
        raise ValueError(f"{outcome} is not a Phi outcome")
    return closed_form(pair1, pair2, RepeaterModel.TWO_WAY, D, R, outcome)


def twoway_psi_closed(pair1, pair2, D, R=0.0, outcome=BsmOutcome.PSI_PLUS):
    if outcome.is_phi:
        raise ValueError(f"{outcome} is not a Psi outcome")
    return closed_form(pair1, pair2, RepeaterModel.TWO_WAY, D, R, outcome)


def oneway_phi_closed(pair1, pair2, D, R=0.0, outcome=BsmOutcome.PHI_PLUS):
    if not outcome.is_phi:
        raise ValueError(f"{outcome} is not a Phi outcome")
    return closed_form(pair1, pair2, RepeaterModel.ONE_WAY, D, R, outcome)


def oneway_psi_closed(pair1, pair2, D, R=0.0, outcome=BsmOutcome.PSI_PLUS):
    if outcome.is_phi:
        raise ValueError(f"{outcome} is not a Psi outcome")
    return closed_form(pair1, pair2, RepeaterModel.ONE_WAY, D, R, outcome)
