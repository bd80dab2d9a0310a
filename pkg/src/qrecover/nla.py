"""Quantum-scissors noiseless linear amplification as a reversing operation.

Three optical modes, each truncated at two photons:

* mode 0 carries the input ``c0|0> + c1|1>``;
* mode 2 starts with one ancilla photon and is split by a beam splitter of
  transmissivity ``eta`` into modes 1 and 2;
* modes 0 and 1 meet on a 50:50 beam splitter and are measured.

Heralding on no photon in the mode-0 detector and one in the mode-1
detector leaves mode 2 in ``N (c0|0> + g c1|1>)`` with
``g = sqrt(eta / (1 - eta))``. On the vacuum/single-photon qubit this is the
success branch of the reversal with ``R = 1 - 1/g**2 = 2 - 1/eta``.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.linalg import expm

from qrecover.channels import ZERO_PROB_CUTOFF
from qrecover.errors import ZeroProbabilityError

CUTOFF = 2
MODES = 3
LEVELS = CUTOFF + 1
DIM = LEVELS**MODES
HERALD = (0, 1)  # photons seen by the detectors on modes 0 and 1; (1, 0) adds a Z flip


@dataclass(frozen=True)
class ScissorsConfig:
    eta: float

    def __post_init__(self):
        if not 0.5 <= self.eta < 1.0:
            raise ValueError(f"transmissivity must lie in [0.5, 1), got {self.eta}")

    @property
    def gain(self):
        return math.sqrt(self.eta / (1 - self.eta))

    @property
    def reversing_strength(self):
        return 2 - 1 / self.eta


def reversing_strength_from_eta(eta):
    return ScissorsConfig(eta).reversing_strength


def eta_from_reversing_strength(R):
    if not 0.0 <= R < 1.0:
        raise ValueError(f"reversing strength must lie in [0, 1), got {R}")
    return 1 / (2 - R)


def loss_as_damping(loss_rate):
    """Photon loss on a vacuum/single-photon qubit is amplitude damping with ``D = loss``."""
    if not 0.0 <= loss_rate <= 1.0:
        raise ValueError(f"loss rate must lie in [0, 1], got {loss_rate}")
    return float(loss_rate)


def fock_state(occupations):
    psi = np.zeros((LEVELS,) * MODES, dtype=complex)
    psi[tuple(occupations)] = 1.0
    return psi


def _annihilation(mode):
    a = np.diag(np.sqrt(np.arange(1, LEVELS)), k=1).astype(complex)
    ops = [np.eye(LEVELS, dtype=complex)] * MODES
    ops[mode] = a
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def number_operator():
    return sum(_annihilation(m).conj().T @ _annihilation(m) for m in range(MODES))


@lru_cache(maxsize=64)
def beam_splitter(transmissivity, j, k):
    """Real beam-splitter unitary ``exp(theta (a_j^† a_k - a_j a_k^†))``, ``cos^2 theta = T``.

    Exact on the sector with at most ``CUTOFF`` photons in total.
    """
    theta = math.acos(math.sqrt(transmissivity))
    aj, ak = _annihilation(j), _annihilation(k)
    gen = aj.conj().T @ ak - aj @ ak.conj().T
    return expm(theta * gen)


def _apply(u, psi):
    return (u @ psi.reshape(DIM)).reshape(psi.shape)


def scissors_output(c0, c1, eta, herald=HERALD):
    """Full three-mode run; returns the unnormalized mode-2 amplitudes after heralding."""
    cfg = ScissorsConfig(eta)
    psi = c0 * fock_state((0, 0, 1)) + c1 * fock_state((1, 0, 1))
    psi = _apply(beam_splitter(cfg.eta, 2, 1), psi)
    psi = _apply(beam_splitter(0.5, 0, 1), psi)
    return psi[herald[0], herald[1], :]


@lru_cache(maxsize=64)
def scissors_operator(eta):
    """Heralded operator on the ``{|0>, |1>}`` qubit, read off the simulation column by column."""
    cols = [scissors_output(1.0, 0.0, eta), scissors_output(0.0, 1.0, eta)]
    op = np.array(cols).T
    if np.max(np.abs(op[2:, :])) > 1e-12:
        raise ArithmeticError("scissors output left the single-photon subspace")
    return op[:2, :]


def scissors_truncate(c0, c1, eta):
    """Heralded quantum-scissors map on a single-rail qubit.

    Returns ``(out0, out1, herald_prob)`` with the output normalized and the
    beam-splitter global phase removed.
    """
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1) > 1e-12:
        raise ValueError("input amplitudes are not normalized")
    out = scissors_output(c0, c1, eta)
    p = float(np.sum(np.abs(out) ** 2))
    if p < ZERO_PROB_CUTOFF:
        raise ZeroProbabilityError(p)
    ref = scissors_operator(eta)[1, 1]
    out = out / math.sqrt(p) * (abs(ref) / ref)
    return complex(out[0]), complex(out[1]), p


def induced_kraus(eta):
    """The heralded scissors operator rescaled so that its ``|1><1|`` entry is 1."""
    op = scissors_operator(eta)
    return op / op[1, 1]


def photon_number_sectors():
    """Basis occupation tuples grouped by total photon number."""
    sectors = {}
    for occ in product(range(LEVELS), repeat=MODES):
        sectors.setdefault(sum(occ), []).append(occ)
    return sectors
