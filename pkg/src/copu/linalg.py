"""Small dense complex linear algebra for qubit and two-qubit matrices.

Matrices are plain ``numpy`` complex128 arrays. Public functions validate
shape and finiteness; the batched work is delegated to :mod:`copu.kernels`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, NotAStateError, NotHermitianError

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

for _m in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, HADAMARD):
    _m.flags.writeable = False

TRACE_TOL = 1e-10


@dataclass(frozen=True)
class Tolerance:
    eps_herm: float = 1e-12
    eps_psd: float = 1e-10
    eps_tp: float = 1e-10

    def __post_init__(self):
        for name in ("eps_herm", "eps_psd", "eps_tp"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")


DEFAULT_TOL = Tolerance()


def as_matrix(m, dims=(2, 3, 4)) -> np.ndarray:
    """Validate and return ``m`` as a square complex128 array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if dims is not None and arr.shape[0] not in dims:
        raise DimensionError(f"matrix dimension {arr.shape[0]} not in {tuple(dims)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def _as_two_qubit(rho) -> np.ndarray:
    arr = as_matrix(rho)
    if arr.shape != (4, 4):
        raise DimensionError(f"expected a 4x4 two-qubit matrix, got {arr.shape}")
    return arr


def mat_mul(a, b) -> np.ndarray:
    a, b = as_matrix(a, None), as_matrix(b, None)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch {a.shape} vs {b.shape}")
    return a @ b


def dagger(a) -> np.ndarray:
    return as_matrix(a, None).conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``a`` acts on subsystem A (the left factor)."""
    return np.kron(as_matrix(a, None), as_matrix(b, None))


def partial_trace(rho, keep="A") -> np.ndarray:
    """Reduce a two-qubit matrix to the subsystem named by ``keep``."""
    t = _as_two_qubit(rho).reshape(2, 2, 2, 2)  # (a, b, a', b')
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("jijk->ik", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_transpose(rho, on="B") -> np.ndarray:
    t = _as_two_qubit(rho).reshape(2, 2, 2, 2)
    if on == "B":
        return t.transpose(0, 3, 2, 1).reshape(4, 4)
    if on == "A":
        return t.transpose(2, 1, 0, 3).reshape(4, 4)
    raise ValueError(f"on must be 'A' or 'B', got {on!r}")


def is_hermitian(m, tol: Tolerance = DEFAULT_TOL) -> bool:
    arr = as_matrix(m, None)
    return bool(np.max(np.abs(arr - arr.conj().T)) <= tol.eps_herm)


def _require_hermitian(arr, tol):
    dev = np.max(np.abs(arr - arr.conj().T))
    if dev > tol.eps_herm:
        raise NotHermitianError(f"matrix deviates from Hermitian by {dev:.3e}")


def eigh(m, tol: Tolerance = DEFAULT_TOL):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with ``w`` descending and ``v[:, k]`` the unit
    eigenvector belonging to ``w[k]``.
    """
    arr = as_matrix(m, None)
    _require_hermitian(arr, tol)
    herm = 0.5 * (arr + arr.conj().T)
    w, v = kernels.eigh_batch(herm[None], True)
    order = np.argsort(w[0])[::-1]
    return w[0][order], v[0][:, order]


def hermitian_eigenvalues(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, in descending order."""
    arr = as_matrix(m, None)
    _require_hermitian(arr, tol)
    herm = 0.5 * (arr + arr.conj().T)
    w, _ = kernels.eigh_batch(herm[None], False)
    return np.sort(w[0])[::-1]


def clamp_spectrum(w, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Clamp roundoff negatives to zero; anything below ``-eps_psd`` is an error."""
    w = np.asarray(w, dtype=float)
    if w.min() < -tol.eps_psd:
        raise NotAStateError(f"eigenvalue {w.min():.3e} below -eps_psd")
    return np.clip(w, 0.0, 1.0)


def shannon_bits(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0.0]
    return float(-(p * np.log2(p)).sum())


def validate_state(rho, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Return the clamped spectrum of ``rho`` or raise if it is not a state."""
    arr = as_matrix(rho, None)
    try:
        w = hermitian_eigenvalues(arr, tol)
    except NotHermitianError as exc:
        raise NotAStateError(str(exc)) from exc
    tr = np.trace(arr).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotAStateError(f"trace {tr!r} is not 1")
    return clamp_spectrum(w, tol)


def von_neumann_entropy(rho, tol: Tolerance = DEFAULT_TOL) -> float:
    """Entropy in bits."""
    return shannon_bits(validate_state(rho, tol))
