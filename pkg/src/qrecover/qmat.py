"""Small dense complex linear algebra for 1, 2 and 4 qubit operators.

Matrices are plain ``numpy`` complex arrays. Most routines accept leading
batch axes (``(..., d, d)``) so parameter grids can be pushed through the
same code path as single points. Qubit ordering is big-endian: qubit 0 is
the leftmost tensor factor, so ``|q0 q1 ...>`` indexes rows as
``q0 * 2**(n-1) + ...``.
"""

import math

import numpy as np

from qrecover.errors import ContractError, DimensionError

MAX_DIM = 16
HERMITIAN_ATOL = 1e-12
EIG_OFFDIAG_TOL = 1e-13
EIG_MAX_SWEEPS = 100

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)
SIGMA_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SIGMA_RAISE = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|


def dag(m):
    return np.conj(np.swapaxes(m, -1, -2))


def ket(bits):
    """Computational basis vector for a bit string such as ``"01"``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(vec):
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def num_qubits(m):
    d = m.shape[-1]
    n = int(round(math.log2(d))) if d > 0 else -1
    if d < 2 or 2**n != d or m.shape[-2] != d:
        raise DimensionError(f"expected a square 2^n matrix, got shape {m.shape[-2:]}")
    return n


def tensor(a, b):
    """Kronecker product ``a ⊗ b`` over the last two axes.

    Leading axes broadcast, so a stack of 2x2 Kraus operators can be lifted in
    one call.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    da, db = a.shape[-1], b.shape[-1]
    if da * db > MAX_DIM or a.shape[-2] * b.shape[-2] > MAX_DIM:
        raise DimensionError(f"tensor product dimension {da * db} exceeds {MAX_DIM}")
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    return out.reshape(out.shape[:-4] + (a.shape[-2] * b.shape[-2], da * db))


def lift(op, target, n):
    """Embed a single-qubit operator acting on ``target`` into ``n`` qubits."""
    if not 0 <= target < n:
        raise ValueError(f"qubit index {target} out of range for {n} qubits")
    op = np.asarray(op, dtype=complex)
    left = np.eye(2**target, dtype=complex)
    right = np.eye(2 ** (n - target - 1), dtype=complex)
    return tensor(tensor(left, op), right)


def partial_trace(rho, keep):
    """Reduce ``rho`` to the qubits listed in ``keep`` (kept in ascending order)."""
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho)
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"qubit indices {keep} out of range for {n} qubits")
    batch = rho.shape[:-2]
    nb = len(batch)
    t = rho.reshape(batch + (2,) * (2 * n))
    # trace out from the highest index so remaining axis numbers stay valid
    remaining = n
    for q in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=nb + q, axis2=nb + remaining + q)
        remaining -= 1
    d = 2 ** len(keep)
    return t.reshape(batch + (d, d))


def is_hermitian(m, atol=HERMITIAN_ATOL):
    m = np.asarray(m)
    return m.shape[-1] == m.shape[-2] and bool(np.all(np.abs(m - dag(m)) <= atol))


def _rotate(a, v, p, q):
    """One complex Jacobi rotation zeroing a[p, q] (in place)."""
    b = a[p, q]
    absb = abs(b)
    phase = b / absb
    app = a[p, p].real
    aqq = a[q, q].real
    tau = (aqq - app) / (2.0 * absb)
    if abs(tau) > 1e150:
        t = 0.5 / tau
    else:
        t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    u = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ u
    a[idx, :] = u.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, idx] = v[:, idx] @ u


def hermitian_eig(m, tol=EIG_OFFDIAG_TOL, max_sweeps=EIG_MAX_SWEEPS):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` with values sorted in descending order and
    eigenvectors as the matching columns. Iterates until the off-diagonal
    Frobenius norm drops below ``tol`` (relative to the matrix norm once it
    exceeds 1).
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m, atol=1e-10):
        raise ContractError("hermitian_eig called on a non-Hermitian matrix")
    n = m.shape[0]
    a = 0.5 * (m + m.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0:
                    _rotate(a, v, p, q)
    else:
        raise ArithmeticError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    vals = np.diag(a).real
    order = np.argsort(-vals, kind="stable")
    return vals[order], v[:, order]


def hermitian_eigenvalues(m):
    return hermitian_eig(m)[0]


def psd_sqrt(m):
    """Square root of a positive semidefinite matrix; negative round-off eigenvalues clamp to 0."""
    vals, vecs = hermitian_eig(m)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def check_density(rho, heralded=False, atol=1e-10):
    """Raise ``ContractError`` unless ``rho`` is a valid density matrix.

    With ``heralded=True`` the trace may be any value in ``(0, 1]`` (a branch
    weight) instead of exactly one.
    """
    rho = np.asarray(rho, dtype=complex)
    num_qubits(rho)
    if not is_hermitian(rho, atol=HERMITIAN_ATOL):
        raise ContractError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if heralded:
        if not 0 < tr <= 1 + atol:
            raise ContractError(f"heralded trace {tr} outside (0, 1]")
    elif abs(tr - 1) > atol:
        raise ContractError(f"trace {tr} differs from 1")
    low = hermitian_eigenvalues(rho)[-1]
    if low < -atol:
        raise ContractError(f"negative eigenvalue {low}")
    return rho
