"""Optimal reversing strengths, success probabilities and Bell-pair costs.

All closed forms here assume Bell-pair inputs and equal strengths on the two
noisy qubits. ``maximize_concurrence_numeric`` is an independent
derivative-free check on the closed-form optima.

Cost accounting: a pair survives reversal with probability ``P``; two
survivors are swapped; the retained BSM outcomes come in a ``±`` pair, each
with probability ``B``. The Bell-pair cost per kept pair is then
``Q = (2/P) / (2B) = 1/(P*B)``. Keeping every outcome corresponds to
``B = 1/2``, i.e. ``Q = 2/P``.
"""

import math
from collections import namedtuple
from dataclasses import dataclass
from enum import Enum

from qrecover.swap import RepeaterModel

INF = math.inf
GOLDEN = (math.sqrt(5) - 1) / 2


class OutcomePolicy(Enum):
    PHI_ONLY = "phi"
    PSI_ONLY = "psi"
    KEEP_ALL = "all"


Optimum = namedtuple("Optimum", "R_opt C_max P_opt B_opt Q_opt")


@dataclass(frozen=True)
class RecoveryReport:
    model: RepeaterModel
    outcome_policy: OutcomePolicy
    D: float
    R_used: float
    concurrence: float
    reversal_success_prob: float
    branch_prob: float
    bell_pair_cost: float
    concurrence_unrecovered: float = math.nan


def _div(num, den):
    return num / den if den != 0 else 0.0


def cost(P, B):
    """``1/(P*B)``, or ``inf`` when either probability vanishes."""
    return INF if P * B <= 0 else 1.0 / (P * B)


# --- Bell-input curves -------------------------------------------------------

def reversal_prob(D, R):
    return 1 - R * (1 + D) / 2


def single_concurrence(D, R=0.0):
    return _div(2 * math.sqrt((1 - D) * (1 - R)), 2 - R * (1 + D))


def single_fidelity(D, R=0.0):
    num = 0.5 * (2 - R - D) + math.sqrt((1 - D) * (1 - R))
    return _div(num, 2 - R * (1 + D))


def twoway_phi_concurrence(D, R=0.0):
    Rb, Db = 1 - R, 1 - D
    return max(0.0, _div(2 * Rb * (Db - D * Rb), Rb**2 * (1 + D) ** 2 + Db**2))


def twoway_psi_concurrence(D, R=0.0):
    return 1 / (1 + D)


def oneway_phi_concurrence(D, R=0.0):
    Rb, Db = 1 - R, 1 - D
    return _div(2 * Db * Rb, Rb**2 * (1 + D) + D * Db * Rb + Db**2)


def oneway_psi_concurrence(D, R=0.0):
    Rb, Db = 1 - R, 1 - D
    return 2 * max(0.0, _div(Db - D * math.sqrt(Db * Rb), D * (1 + D) * Rb + Db * (2 + D)))


def twoway_phi_prob(D, R=0.0):
    """Probability of one Phi outcome (Phi+ or Phi-), given both reversals succeeded."""
    Rb = 1 - R
    return _div(Rb**2 * (1 + D) ** 2 + (1 - D) ** 2, 8 * reversal_prob(D, R) ** 2)


def twoway_psi_prob(D, R=0.0):
    return _div((1 - D) * (1 - R) * (1 + D), 4 * reversal_prob(D, R) ** 2)


def oneway_phi_prob(D, R=0.0):
    Rb, Db = 1 - R, 1 - D
    return _div(Rb**2 * (1 + D) + D * Db * Rb + Db**2, 8 * reversal_prob(D, R) ** 2)


def oneway_psi_prob(D, R=0.0):
    Rb, Db = 1 - R, 1 - D
    return _div(Rb * (D * (1 + D) * Rb + Db * (2 + D)), 8 * reversal_prob(D, R) ** 2)


CURVES = {
    (RepeaterModel.TWO_WAY, OutcomePolicy.PHI_ONLY): (twoway_phi_concurrence, twoway_phi_prob),
    (RepeaterModel.TWO_WAY, OutcomePolicy.PSI_ONLY): (twoway_psi_concurrence, twoway_psi_prob),
    (RepeaterModel.ONE_WAY, OutcomePolicy.PHI_ONLY): (oneway_phi_concurrence, oneway_phi_prob),
    (RepeaterModel.ONE_WAY, OutcomePolicy.PSI_ONLY): (oneway_psi_concurrence, oneway_psi_prob),
}


# --- closed-form optima ------------------------------------------------------

def _check_D(D):
    if not 0.0 <= D <= 1.0:
        raise ValueError(f"damping strength must lie in [0, 1], got {D}")


def optimal_r_single(D):
    """``(R_opt, C_max, P_opt)`` for one damped Bell pair."""
    _check_D(D)
    return 2 * D / (1 + D), 1 / math.sqrt(1 + D), 1 - D


def fidelity_optimal_r(D):
    _check_D(D)
    return D * (3 + D) / (1 + D) ** 2


def optimal_r_twoway_phi(D):
    _check_D(D)
    s = math.sqrt(1 + 2 * D + 2 * D * D)
    Rb = (1 - D) / (1 + D) ** 2 * (s - D)
    C = (s - D) / (1 + D) ** 2
    P = (1 - D) / (2 * (1 + D)) * (1 + s)
    B = ((1 + D) ** 2 * Rb**2 + (1 - D) ** 2) / (8 * P * P) if P > 0 else math.nan
    return Optimum(1 - Rb, C, P, B, cost(P, B) if P > 0 else INF)


def optimal_r_oneway_phi(D):
    _check_D(D)
    Rb = (1 - D) / math.sqrt(1 + D)
    C = 2 / (D + 2 * math.sqrt(1 + D))
    P = (1 - D) / 2 * (1 + math.sqrt(1 + D))
    B = ((1 + D) * Rb**2 + D * (1 - D) * Rb + (1 - D) ** 2) / (8 * P * P) if P > 0 else math.nan
    return Optimum(1 - Rb, C, P, B, cost(P, B) if P > 0 else INF)


_OPTIMA = {
    RepeaterModel.TWO_WAY: optimal_r_twoway_phi,
    RepeaterModel.ONE_WAY: optimal_r_oneway_phi,
}


def oneway_psi_report(D, R):
    _check_D(D)
    P = reversal_prob(D, R)
    B = oneway_psi_prob(D, R)
    return RecoveryReport(
        RepeaterModel.ONE_WAY, OutcomePolicy.PSI_ONLY, D, R,
        oneway_psi_concurrence(D, R), P, B, cost(P, B),
        concurrence_unrecovered=oneway_psi_concurrence(D, 0.0),
    )


def _average(model, D, R):
    phi_c, phi_b = CURVES[(model, OutcomePolicy.PHI_ONLY)]
    psi_c, psi_b = CURVES[(model, OutcomePolicy.PSI_ONLY)]
    return 2 * phi_b(D, R) * phi_c(D, R) + 2 * psi_b(D, R) * psi_c(D, R)


def average_yield(model, D, R=None):
    """Keep every BSM outcome. ``R=None`` uses the Phi-optimal strength."""
    _check_D(D)
    if model is RepeaterModel.SINGLE:
        raise ValueError("averaging over BSM outcomes needs a repeater model")
    if R is None and model is RepeaterModel.TWO_WAY:
        opt = optimal_r_twoway_phi(D)
        R, P = opt.R_opt, opt.P_opt
        C = 2 * opt.B_opt * opt.C_max + (1 - 2 * opt.B_opt) / (1 + D) if P > 0 else math.nan
    else:
        if R is None:
            R = _OPTIMA[model](D).R_opt
        P = reversal_prob(D, R)
        C = _average(model, D, R) if P > 0 else math.nan
    return RecoveryReport(
        model, OutcomePolicy.KEEP_ALL, D, R, C, P, 0.5, cost(P, 0.5),
        concurrence_unrecovered=_average(model, D, 0.0),
    )


def unrecovered_concurrence(model, policy, D):
    if model is RepeaterModel.SINGLE:
        return math.sqrt(1 - D)
    if policy is OutcomePolicy.KEEP_ALL:
        return _average(model, D, 0.0)
    return CURVES[(model, policy)][0](D, 0.0)


def strategy_report(model, policy, D, R=None):
    """Figure of merit for one strategy at one damping strength.

    ``R=None`` picks the strategy's natural choice: the concurrence-optimal
    strength for Phi outcomes and single pairs, no reversal for two-way Psi
    (reversal cannot help there), and ``R=1`` for one-way Psi (the
    concurrence supremum, at infinite cost).
    """
    _check_D(D)
    if R is not None and not 0.0 <= R <= 1.0:
        raise ValueError(f"reversing strength must lie in [0, 1], got {R}")
    if model is RepeaterModel.SINGLE:
        if R is None:
            R, C, P = optimal_r_single(D)
        else:
            C, P = single_concurrence(D, R), reversal_prob(D, R)
        return RecoveryReport(
            model, policy, D, R, C, P, 1.0, cost(P, 1.0),
            concurrence_unrecovered=math.sqrt(1 - D),
        )
    if policy is OutcomePolicy.KEEP_ALL:
        return average_yield(model, D, R)
    if model is RepeaterModel.ONE_WAY and policy is OutcomePolicy.PSI_ONLY:
        return oneway_psi_report(D, 1.0 if R is None else R)
    conc, prob = CURVES[(model, policy)]
    if R is None and policy is OutcomePolicy.PHI_ONLY:
        opt = _OPTIMA[model](D)
        return RecoveryReport(
            model, policy, D, opt.R_opt, opt.C_max, opt.P_opt, opt.B_opt, opt.Q_opt,
            concurrence_unrecovered=conc(D, 0.0),
        )
    if R is None:
        R = 0.0
    P = reversal_prob(D, R)
    B = prob(D, R)
    return RecoveryReport(
        model, policy, D, R, conc(D, R), P, B, cost(P, B),
        concurrence_unrecovered=conc(D, 0.0),
    )


# --- numeric maximizer ---------------------------------------------------------

def _evaluate(curve, x):
    y = curve(x)
    if not math.isfinite(y):
        raise ArithmeticError(f"curve returned non-finite value {y} at R={x}")
    return y


def golden_section_max(f, lo, hi, tol=1e-9, max_iter=200):
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    candidates = [(f1, x1), (f2, x2), (f(lo), lo), (f(hi), hi)]
    fx, x = max(candidates)
    return x, fx


def maximize_concurrence_numeric(curve, lo=0.0, hi=1.0, tol=1e-9, scan_points=101):
    """Maximize ``curve(R)`` over ``[lo, hi]``.

    A coarse scan brackets the peak first, so flat ``max[0, .]`` plateaus
    (which fool a bare golden-section search) cannot steer it away from the
    positive region.
    """
    xs = [lo + (hi - lo) * i / (scan_points - 1) for i in range(scan_points)]
    ys = [_evaluate(curve, x) for x in xs]
    k = max(range(scan_points), key=ys.__getitem__)
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, scan_points - 1)]
    x, y = golden_section_max(lambda r: _evaluate(curve, r), a, b, tol=tol)
    if ys[k] > y:
        return xs[k], ys[k]
    return x, y
