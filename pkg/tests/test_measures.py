import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrecover.errors import DimensionError
from qrecover.measures import (
    BsmOutcome, bell_fidelity, concurrence, concurrence_xstate, is_x_state, wootters_lambdas,
)
from qrecover.optimize import fidelity_optimal_r, optimal_r_single, single_fidelity
from qrecover.qmat import ket, projector, tensor
from qrecover.swap import BELL, RepeaterModel, swap_numeric

from conftest import random_density, random_unitary, wootters_reference


def damped_bell(D, R=0.0):
    """Bell pair after damping and heralded reversal on the second qubit, written out."""
    Rb, Db = 1 - R, 1 - D
    m = np.zeros((4, 4))
    m[0, 0], m[2, 2], m[3, 3] = Rb, D * Rb, Db
    m[0, 3] = m[3, 0] = math.sqrt(Db * Rb)
    return m / np.trace(m)


@pytest.mark.parametrize("outcome", list(BsmOutcome))
def test_bell_states_are_maximally_entangled(outcome):
    assert concurrence(projector(outcome.vector())) == pytest.approx(1, abs=1e-12)


def test_maximally_mixed_state():
    assert concurrence(np.eye(4) / 4) == pytest.approx(0, abs=1e-12)
    assert bell_fidelity(np.eye(4) / 4) == pytest.approx(0.25, abs=1e-12)


def test_product_state():
    assert concurrence(projector(ket("01"))) == pytest.approx(0, abs=1e-12)


def test_damped_bell_concurrence():
    assert concurrence(damped_bell(0.75)) == pytest.approx(0.5, abs=1e-12)


def test_reversed_bell_concurrence():
    assert concurrence(damped_bell(0.5, 2 / 3)) == pytest.approx(1 / math.sqrt(1.5), abs=1e-12)


def test_pure_partially_entangled_state():
    a, b = 0.6, 0.8
    assert concurrence(projector(a * ket("00") + b * ket("11"))) == pytest.approx(2 * a * b, abs=1e-12)


def test_wrong_dimension_rejected():
    for f in (concurrence, concurrence_xstate, bell_fidelity, wootters_lambdas):
        with pytest.raises(DimensionError):
            f(np.eye(8) / 8)


def test_xstate_formula_rejects_general_states(rng):
    rho = random_density(rng)
    assert not is_x_state(rho)
    with pytest.raises(ValueError):
        concurrence_xstate(rho)


def test_concurrence_matches_textbook_route(rng):
    for rank in (1, 2, 3, 4):
        for _ in range(15):
            rho = random_density(rng, rank=rank)
            assert abs(concurrence(rho) - wootters_reference(rho)) < 1e-7


def test_lambdas_descending_and_non_negative(rng):
    for _ in range(20):
        lam = wootters_lambdas(random_density(rng))
        assert np.all(np.diff(lam) <= 1e-12) and lam[-1] >= -1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_concurrence_in_unit_interval(seed):
    rho = random_density(np.random.default_rng(seed), rank=int(seed % 4) + 1)
    assert -1e-12 <= concurrence(rho) <= 1 + 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_local_unitary_invariance(seed):
    r = np.random.default_rng(seed)
    rho = random_density(r)
    u = tensor(random_unitary(r), random_unitary(r))
    assert abs(concurrence(u @ rho @ u.conj().T) - concurrence(rho)) < 1e-9


@pytest.mark.parametrize("model", [RepeaterModel.TWO_WAY, RepeaterModel.ONE_WAY])
@pytest.mark.parametrize("outcome", list(BsmOutcome))
def test_xstate_formula_agrees_on_swap_outputs(model, outcome):
    for D in np.linspace(0, 0.95, 8):
        for R in np.linspace(0, 0.95, 5):
            state = swap_numeric(BELL, BELL, model, D, D, R, R, outcome).state
            assert is_x_state(state)
            assert abs(concurrence_xstate(state) - concurrence(state)) < 1e-10


@pytest.mark.parametrize("D,R", [(0.0, 0.0), (0.3, 0.1), (0.6, 0.7), (0.9, 0.5)])
def test_fidelity_formula(D, R):
    assert bell_fidelity(damped_bell(D, R)) == pytest.approx(single_fidelity(D, R), abs=1e-12)


@pytest.mark.parametrize("D", np.linspace(0.05, 0.95, 10))
def test_fidelity_optimum_exceeds_concurrence_optimum(D):
    assert fidelity_optimal_r(D) > optimal_r_single(D)[0]


@pytest.mark.parametrize("D", [0.2, 0.5, 0.8])
def test_fidelity_optimum_is_a_maximum(D):
    rf = fidelity_optimal_r(D)
    f = lambda r: bell_fidelity(damped_bell(D, r))
    assert f(rf) >= f(rf - 1e-4) and f(rf) >= f(rf + 1e-4)
