"""Qubit channel representations and conversions between them.

The Choi state is built on the singlet ``|psi-> = (|01> - |10>)/sqrt2``
rather than ``|phi+>``; every closed form in :mod:`copu.metrics` assumes
this choice. Choi matrices are normalized to unit trace.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError, NotDiagonalError, TracePreservationError
from .linalg import DEFAULT_TOL, PAULI_I, PAULIS, Tolerance, as_matrix, kron, partial_trace

DIAGONAL_TOL = 1e-10
REAL_TOL = 1e-10


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map ``rho -> sum_k K_k rho K_k^dag`` on a qubit.

    Trace preservation is checked on construction; pass ``check=False`` to
    hold an arbitrary operator set (the incoherence predicates accept one).
    """

    ops: tuple
    tol: Tolerance = field(default=DEFAULT_TOL, compare=False, repr=False)
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        ops = tuple(_frozen(as_matrix(k, (2,))) for k in self.ops)
        if not ops:
            raise ValueError("a Kraus channel needs at least one operator")
        object.__setattr__(self, "ops", ops)
        if self.check:
            dev = self.tp_deviation()
            if dev > self.tol.eps_tp:
                raise TracePreservationError(f"sum K^dag K deviates from I by {dev:.3e}")

    @classmethod
    def from_array(cls, arr, **kw):
        return cls(tuple(np.asarray(arr)), **kw)

    def as_array(self) -> np.ndarray:
        return np.stack(self.ops)

    def tp_deviation(self) -> float:
        s = sum(k.conj().T @ k for k in self.ops)
        return float(np.max(np.abs(s - PAULI_I)))

    def unital_deviation(self) -> float:
        s = sum(k @ k.conj().T for k in self.ops)
        return float(np.max(np.abs(s - PAULI_I)))

    def apply(self, rho) -> np.ndarray:
        rho = as_matrix(rho, (2,))
        return sum(k @ rho @ k.conj().T for k in self.ops)

    def __len__(self):
        return len(self.ops)


@dataclass(frozen=True, eq=False)
class GeneralAffine:
    """Bloch-space action ``r -> M r + tau`` with an arbitrary real 3x3 ``M``."""

    M: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.M, dtype=float)
        t = np.asarray(self.tau, dtype=float)
        if m.shape != (3, 3) or t.shape != (3,):
            raise DimensionError("GeneralAffine needs M of shape (3, 3) and tau of shape (3,)")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(t))):
            raise ValueError("non-finite affine data")
        object.__setattr__(self, "M", _frozen(m))
        object.__setattr__(self, "tau", _frozen(t))

    def is_diagonal(self, tol=DIAGONAL_TOL) -> bool:
        off = self.M - np.diag(np.diag(self.M))
        return bool(np.max(np.abs(off)) <= tol)


@dataclass(frozen=True, eq=False)
class AffineChannel:
    """Canonical qubit channel: signed singular values ``lam`` and shift ``tau``."""

    lam: np.ndarray
    tau: np.ndarray = (0.0, 0.0, 0.0)

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        tau = np.asarray(self.tau, dtype=float)
        if lam.shape != (3,) or tau.shape != (3,):
            raise DimensionError("lam and tau must be 3-vectors")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(tau))):
            raise ValueError("non-finite affine data")
        object.__setattr__(self, "lam", _frozen(lam))
        object.__setattr__(self, "tau", _frozen(tau))

    @property
    def is_unital(self) -> bool:
        return not np.any(self.tau)

    def unital_part(self) -> "AffineChannel":
        return AffineChannel(self.lam, (0.0, 0.0, 0.0))

    def __eq__(self, other):
        if not isinstance(other, AffineChannel):
            return NotImplemented
        return np.array_equal(self.lam, other.lam) and np.array_equal(self.tau, other.tau)

    def __hash__(self):
        return hash((tuple(self.lam), tuple(self.tau)))


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    rho: np.ndarray
    source: str = ""

    def __post_init__(self):
        rho = as_matrix(self.rho, (4,))
        object.__setattr__(self, "rho", _frozen(rho))


def singlet() -> np.ndarray:
    """``(I x I - sum_i sigma_i x sigma_i) / 4``, i.e. ``|psi-><psi-|``."""
    out = kron(PAULI_I, PAULI_I)
    for s in PAULIS:
        out = out - kron(s, s)
    return out / 4


def kraus_to_choi(ch: KrausChannel) -> ChoiMatrix:
    dev = ch.tp_deviation()
    if dev > ch.tol.eps_tp:
        raise TracePreservationError(f"sum K^dag K deviates from I by {dev:.3e}")
    rho = kernels.choi_kraus_batch(ch.as_array()[None])[0]
    return ChoiMatrix(rho, "kraus")


def affine_choi_batch(lam, tau) -> np.ndarray:
    """Vectorized ``((I + tau.sigma) x I - sum_i lam_i sigma_i x sigma_i) / 4``.

    Entries are written out explicitly; ``lam`` and ``tau`` have shape (N, 3).
    """
    lam = np.asarray(lam, dtype=float)
    tau = np.asarray(tau, dtype=float)
    lx, ly, lz = lam[:, 0], lam[:, 1], lam[:, 2]
    tx, ty, tz = tau[:, 0], tau[:, 1], tau[:, 2]
    out = np.zeros((lam.shape[0], 4, 4), dtype=complex)
    out[:, 0, 0] = 1 + tz - lz
    out[:, 1, 1] = 1 + tz + lz
    out[:, 2, 2] = 1 - tz + lz
    out[:, 3, 3] = 1 - tz - lz
    out[:, 0, 3] = out[:, 3, 0] = ly - lx
    out[:, 1, 2] = out[:, 2, 1] = -lx - ly
    shift = tx - 1j * ty
    out[:, 0, 2] = out[:, 1, 3] = shift
    out[:, 2, 0] = out[:, 3, 1] = shift.conj()
    return out / 4


def affine_to_choi(ch: AffineChannel) -> ChoiMatrix:
    """Choi state of an affine channel. CP is not required (used to probe non-CP points)."""
    return ChoiMatrix(affine_choi_batch(ch.lam[None], ch.tau[None])[0], "affine")


def kraus_to_affine(ch: KrausChannel) -> GeneralAffine:
    """``M_ij = Tr(sigma_i Phi(sigma_j)) / 2`` and ``tau_i = Tr(sigma_i Phi(I)) / 2``."""
    dev = ch.tp_deviation()
    if dev > ch.tol.eps_tp:
        raise TracePreservationError(f"sum K^dag K deviates from I by {dev:.3e}")
    image_id = ch.apply(PAULI_I)
    images = [ch.apply(s) for s in PAULIS]
    m = np.array([[np.trace(si @ images[j]) / 2 for j in range(3)] for si in PAULIS])
    tau = np.array([np.trace(si @ image_id) / 2 for si in PAULIS])
    resid = max(np.max(np.abs(m.imag)), np.max(np.abs(tau.imag)))
    if resid > REAL_TOL:
        raise ValueError(f"affine data has imaginary residue {resid:.3e}")
    return GeneralAffine(m.real, tau.real)


def diagonal_affine(ga: GeneralAffine) -> AffineChannel:
    if not ga.is_diagonal():
        off = ga.M - np.diag(np.diag(ga.M))
        raise NotDiagonalError(
            f"M has off-diagonal entries up to {np.max(np.abs(off)):.3e}; "
            "use Choi-based metrics instead of closed forms"
        )
    return AffineChannel(np.diag(ga.M).copy(), ga.tau.copy())


def affine_to_general(ch: AffineChannel) -> GeneralAffine:
    return GeneralAffine(np.diag(ch.lam), ch.tau)


def apply_channel(ch: AffineChannel, bloch) -> np.ndarray:
    r = np.asarray(bloch, dtype=float)
    if r.shape != (3,):
        raise DimensionError("Bloch vector must have 3 components")
    if np.linalg.norm(r) > 1 + 1e-12:
        raise ValueError(f"Bloch vector norm {np.linalg.norm(r):.6g} exceeds 1")
    return ch.lam * r + ch.tau


def subsystem_a(choi: ChoiMatrix) -> np.ndarray:
    """Reduced state of the channel output leg; ``(I + tau.sigma)/2`` for affine sources."""
    return partial_trace(choi.rho, keep="A")
