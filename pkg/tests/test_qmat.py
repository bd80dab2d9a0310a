import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrecover.errors import ContractError, DimensionError
from qrecover.qmat import (
    I2, P0, P1, SX, check_density, hermitian_eig, hermitian_eigenvalues, ket, partial_trace,
    projector, tensor,
)

from conftest import random_density

PHI_PLUS = (ket("00") + ket("11")) / np.sqrt(2)


def test_tensor_identity():
    assert np.array_equal(tensor(I2, I2), np.eye(4))


def test_tensor_basis_projectors():
    assert np.array_equal(tensor(P0, P1), np.diag([0, 1, 0, 0]))


def test_tensor_builds_pure_pair_outer_product():
    a, b = 3 / 5, 4 / 5
    amps = [a, b]
    rho = sum(
        amps[i] * amps[j] * tensor(np.outer(ket(str(i)), ket(str(j))), np.outer(ket(str(i)), ket(str(j))))
        for i in range(2) for j in range(2)
    )
    expected = np.zeros((4, 4))
    expected[0, 0], expected[0, 3], expected[3, 0], expected[3, 3] = 9 / 25, 12 / 25, 12 / 25, 16 / 25
    assert np.allclose(rho, expected, atol=1e-12, rtol=0)


def test_tensor_rejects_overflow():
    with pytest.raises(DimensionError):
        tensor(np.eye(16), I2)


def test_tensor_is_associative(rng):
    for _ in range(20):
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
        assert np.max(np.abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c)))) < 1e-12


def test_tensor_broadcasts_over_batch(rng):
    stack = rng.normal(size=(5, 2, 2))
    out = tensor(I2, stack)
    for k in range(5):
        assert np.allclose(out[k], np.kron(I2, stack[k]))


def test_partial_trace_of_bell_state():
    assert np.allclose(partial_trace(projector(PHI_PLUS), keep={0}), I2 / 2, atol=1e-12)


def test_partial_trace_of_product(rng):
    rho = random_density(rng, 1)
    sigma = 0.7 * random_density(rng, 2)
    out = partial_trace(tensor(rho, sigma), keep={0})
    assert np.max(np.abs(out - rho * np.trace(sigma))) < 1e-12


def test_partial_trace_keeps_outer_qubits(rng):
    a, b, c, d = (random_density(rng, 1) for _ in range(4))
    full = tensor(tensor(a, b), tensor(c, d))
    assert np.allclose(partial_trace(full, keep=(0, 3)), np.kron(a, d), atol=1e-12)


def test_partial_trace_rejects_empty_keep():
    with pytest.raises(ValueError):
        partial_trace(np.eye(4) / 4, keep=set())


def test_eigenvalues_of_diagonal():
    assert np.allclose(hermitian_eigenvalues(np.diag([0.7, 0.3, 0.0, 0.0])), [0.7, 0.3, 0, 0])


def test_eigenvalues_of_identity():
    assert np.allclose(hermitian_eigenvalues(np.eye(4)), [1, 1, 1, 1])


def test_eigenvalues_of_xx():
    assert np.allclose(hermitian_eigenvalues(tensor(SX, SX)), [1, 1, -1, -1], atol=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(ContractError):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([2, 4, 8, 16]))
def test_jacobi_matches_lapack(seed, dim):
    r = np.random.default_rng(seed)
    a = r.normal(size=(dim, dim)) + 1j * r.normal(size=(dim, dim))
    h = a + a.conj().T
    vals, vecs = hermitian_eig(h)
    assert np.all(np.diff(vals) <= 0)
    assert np.allclose(vals, np.linalg.eigvalsh(h)[::-1], atol=1e-10)
    assert abs(vals.sum() - np.trace(h).real) < 1e-9
    assert np.allclose(vecs.conj().T @ vecs, np.eye(dim), atol=1e-10)
    assert np.allclose(h @ vecs, vecs * vals, atol=1e-10)


def test_density_eigenvalues_in_unit_interval(rng):
    for k in (1, 2, 4):
        vals = hermitian_eigenvalues(random_density(rng, 2, rank=k))
        assert vals[-1] >= -1e-10 and vals[0] <= 1 + 1e-10


def test_check_density_flags():
    check_density(np.eye(4) / 4)
    check_density(np.eye(4) / 8, heralded=True)
    with pytest.raises(ContractError):
        check_density(np.eye(4) / 8)
    with pytest.raises(ContractError):
        check_density(np.diag([1.2, -0.2, 0, 0]))
