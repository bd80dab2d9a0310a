"""Monte-Carlo trajectories through one repeater node.

Every trial draws, in order, the damping branch of each noisy qubit, the
reversal outcome on each, and the BSM outcome, each with the Born
probability given the branches drawn so far. Failed reversals are kept in
the tallies so cost estimates see the full denominator.

Randomness is counter based (Philox keyed by ``(seed, stream)``): trial ``i``
always consumes the same block of the stream, so sharded and serial runs give
bit-identical counts.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from qrecover.channels import apply_op, damping_ops, reversal_ops
from qrecover.measures import BsmOutcome
from qrecover.qmat import I2, projector, tensor
from qrecover.swap import BELL, RepeaterModel, closed_form, reversal_success_prob

OUTCOMES = tuple(BsmOutcome)
DRAWS_PER_TRIAL = 8  # two Philox blocks; five are used
LEVELS = (2, 2, 2, 2, 4)


@dataclass(frozen=True)
class McConfig:
    model: RepeaterModel
    D: float
    R: float
    trials: int
    seed: int = 0
    stream: int = 0
    pair1: object = BELL
    pair2: object = BELL

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not (0 <= self.D <= 1 and 0 <= self.R <= 1):
            raise ValueError("strengths must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class McStats:
    """Integer tallies plus the frequency estimators derived from them.

    ``counts[j1, j2, o]``: reversal branch on each noisy qubit (0 = success)
    and BSM outcome index ``o`` (order of ``BsmOutcome``).
    ``jumps[k1, k2]``: damping branch on each noisy qubit (1 = jump).
    """

    trials: int
    counts: np.ndarray
    jumps: np.ndarray = field(repr=False)

    def __eq__(self, other):
        return (
            self.trials == other.trials
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.jumps, other.jumps)
        )

    @property
    def reversal_successes(self):
        """Successes on the first and second noisy qubit."""
        return int(self.counts[0].sum()), int(self.counts[:, 0].sum())

    @property
    def both_succeeded(self):
        return int(self.counts[0, 0].sum())

    @property
    def p_reversal(self):
        """Pooled per-pair reversal success frequency."""
        return sum(self.reversal_successes) / (2 * self.trials)

    def outcome_freq(self, outcome):
        """Frequency of ``outcome`` among trials where both reversals succeeded."""
        n = self.both_succeeded
        return self.counts[0, 0, OUTCOMES.index(outcome)] / n if n else math.nan

    @property
    def phi_freq(self):
        """Empirical ``2B``: either Phi outcome, given both reversals succeeded."""
        return self.outcome_freq(BsmOutcome.PHI_PLUS) + self.outcome_freq(BsmOutcome.PHI_MINUS)

    @property
    def cost(self):
        """Bell pairs per kept Phi pair when heralded survivors are pooled and paired."""
        p, b2 = self.p_reversal, self.phi_freq
        return math.inf if p * b2 == 0 else 2 / (p * b2)

    @property
    def cost_joint(self):
        """Bell pairs per kept Phi pair when both reversals must succeed in the same trial."""
        kept = int(self.counts[0, 0, :2].sum())
        return math.inf if kept == 0 else 2 * self.trials / kept

    def cell_freq(self):
        return self.counts / self.trials

    def cell_stderr(self):
        f = self.cell_freq()
        return np.sqrt(f * (1 - f) / self.trials)


def branch_tree(cfg):
    """Joint probabilities of every branch prefix, one array per level.

    ``tree[L]`` has shape ``LEVELS[:L]``; ``tree[0]`` is the scalar 1.
    """
    q1, q2 = cfg.model.noisy_qubits
    psi = np.kron(cfg.pair1.vector(), cfg.pair2.vector())
    rho0 = projector(psi)
    dk = damping_ops(cfg.D)
    rk = reversal_ops(cfg.R)
    proj = [tensor(I2, tensor(projector(o.vector()), I2)) for o in OUTCOMES]
    tree = [np.ones(()), np.zeros(2), np.zeros((2, 2)), np.zeros((2,) * 3), np.zeros((2,) * 4),
            np.zeros((2, 2, 2, 2, 4))]
    for k1 in range(2):
        r1 = apply_op(rho0, dk[k1], q1)
        tree[1][k1] = np.trace(r1).real
        for k2 in range(2):
            r2 = apply_op(r1, dk[k2], q2)
            tree[2][k1, k2] = np.trace(r2).real
            for j1 in range(2):
                r3 = apply_op(r2, rk[j1], q1)
                tree[3][k1, k2, j1] = np.trace(r3).real
                for j2 in range(2):
                    r4 = apply_op(r3, rk[j2], q2)
                    tree[4][k1, k2, j1, j2] = np.trace(r4).real
                    for o, p in enumerate(proj):
                        tree[5][k1, k2, j1, j2, o] = np.trace(p @ r4 @ p).real
    return tree


def _conditionals(tree):
    """Cumulative conditional probabilities per level, indexed by the parent prefix."""
    cums = []
    for L in range(len(LEVELS)):
        parent = tree[L][..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.where(parent > 0, tree[L + 1] / parent, 1.0 / LEVELS[L])
        cums.append(np.cumsum(cond, axis=-1))
    return cums


def _shard(cfg, cums, start, stop):
    bitgen = np.random.Philox(key=[cfg.seed, cfg.stream])
    bitgen.advance(start * DRAWS_PER_TRIAL // 4)
    u = np.random.Generator(bitgen).random((stop - start, DRAWS_PER_TRIAL))
    n = stop - start
    prefix = np.zeros(n, dtype=np.int64)  # flat index of the branch prefix
    idx = []
    for L, width in enumerate(LEVELS):
        cum = cums[L].reshape(-1, width)[prefix]
        child = (u[:, L, None] >= cum[:, :-1]).sum(axis=1)
        idx.append(child)
        prefix = prefix * width + child
    counts = np.bincount(idx[2] * 8 + idx[3] * 4 + idx[4], minlength=16).reshape(2, 2, 4)
    jumps = np.bincount(idx[0] * 2 + idx[1], minlength=4).reshape(2, 2)
    return counts, jumps


def run_trajectories(cfg, shards=1, workers=1, shard_size=None):
    """Sample ``cfg.trials`` trajectories. Results do not depend on ``shards`` or ``workers``."""
    cums = _conditionals(branch_tree(cfg))
    if shard_size is None:
        shard_size = -(-cfg.trials // max(shards, 1))
    bounds = [(s, min(s + shard_size, cfg.trials)) for s in range(0, cfg.trials, shard_size)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _shard(cfg, cums, *b), bounds))
    else:
        parts = [_shard(cfg, cums, *b) for b in bounds]
    counts = sum(p[0] for p in parts)
    jumps = sum(p[1] for p in parts)
    return McStats(cfg.trials, counts.astype(np.int64), jumps.astype(np.int64))


# --- validation against closed forms -----------------------------------------

@dataclass(frozen=True)
class CellCheck:
    label: str
    expected: float
    observed: float
    n: int

    @property
    def sigma(self):
        return math.sqrt(self.expected * (1 - self.expected) / self.n)

    @property
    def z(self):
        if self.sigma == 0:
            return 0.0 if self.observed == self.expected else math.inf
        return abs(self.observed - self.expected) / self.sigma


def expected_cells(cfg):
    """Closed-form probabilities for the cells checked by ``check_cells``."""
    p1 = reversal_success_prob(cfg.pair1, cfg.D, cfg.R)
    p2 = reversal_success_prob(cfg.pair2, cfg.D, cfg.R)
    cells = {"reversal_ok[0]": p1, "reversal_ok[1]": p2, "reversal_failed": 1 - p1 * p2}
    for o in OUTCOMES:
        res = closed_form(cfg.pair1, cfg.pair2, cfg.model, cfg.D, cfg.R, o)
        cells[f"ok&{o.value}"] = p1 * p2 * res.branch_prob
    return cells


def check_cells(cfg, stats, corrupt=0.0):
    """Compare every tallied cell with its closed-form probability.

    ``corrupt`` shifts the expected Phi+ cell; it exists so the failure path
    can be exercised.
    """
    exp = expected_cells(cfg)
    exp["ok&phi+"] = min(max(exp["ok&phi+"] + corrupt, 0.0), 1.0)
    n = stats.trials
    obs = {
        "reversal_ok[0]": stats.reversal_successes[0] / n,
        "reversal_ok[1]": stats.reversal_successes[1] / n,
        "reversal_failed": 1 - stats.both_succeeded / n,
    }
    for i, o in enumerate(OUTCOMES):
        obs[f"ok&{o.value}"] = stats.counts[0, 0, i] / n
    return [CellCheck(k, exp[k], obs[k], n) for k in exp]
