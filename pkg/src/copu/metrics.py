"""Coherence and purity of states and of qubit channels (through their Choi state).

All coherence is measured in the computational basis; entropies are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .channels import AffineChannel, ChoiMatrix, subsystem_a
from .errors import DimensionError, NotAStateError, NotHermitianError
from .linalg import (
    DEFAULT_TOL,
    PAULI_Y,
    Tolerance,
    as_matrix,
    eigh,
    is_hermitian,
    shannon_bits,
    validate_state,
)

_SYY = np.kron(PAULI_Y, PAULI_Y)


@dataclass(frozen=True)
class CoherenceReport:
    c_l1: float
    c_rel: float
    purity: float
    c_subsystem: Optional[float] = None


def l1_coherence(rho, tol: Tolerance = DEFAULT_TOL) -> float:
    """Sum of the magnitudes of all off-diagonal entries."""
    arr = as_matrix(rho, None)
    if not is_hermitian(arr, tol):
        raise NotHermitianError("l1 coherence needs a Hermitian matrix")
    return float(kernels.l1_batch(arr[None])[0])


def rel_entropy_coherence(rho, tol: Tolerance = DEFAULT_TOL) -> float:
    """``S(diag rho) - S(rho)`` in bits."""
    arr = as_matrix(rho, None)
    spectrum = validate_state(arr, tol)
    dephased = np.clip(np.diag(arr).real, 0.0, 1.0)
    return max(0.0, shannon_bits(dephased) - shannon_bits(spectrum))


def purity(rho, tol: Tolerance = DEFAULT_TOL) -> float:
    arr = as_matrix(rho, None)
    if not is_hermitian(arr, tol):
        raise NotHermitianError("purity needs a Hermitian matrix")
    return float(kernels.purity_batch(arr[None])[0])


def channel_l1_closed(ch: AffineChannel) -> float:
    """``(|lx + ly| + |lx - ly|)/2 + sqrt(tx^2 + ty^2)``; blind to ``lz`` and ``tz``."""
    lam, tau = ch.lam, ch.tau
    return float(0.5 * (abs(lam[0] + lam[1]) + abs(lam[0] - lam[1])) + np.hypot(tau[0], tau[1]))


def channel_purity_closed(ch: AffineChannel) -> float:
    lam, tau = ch.lam, ch.tau
    return float(0.25 * (1.0 + lam @ lam + tau @ tau))


def subsystem_coherence(ch: AffineChannel) -> float:
    """l1 coherence of the reduced output ``(I + tau.sigma)/2``."""
    return float(np.hypot(ch.tau[0], ch.tau[1]))


def decomposition_residual(ch: AffineChannel) -> float:
    """How far the channel coherence is from (unital part) + (subsystem part)."""
    total = channel_l1_closed(ch)
    return abs(total - channel_l1_closed(ch.unital_part()) - subsystem_coherence(ch))


def concurrence(rho, tol: Tolerance = DEFAULT_TOL) -> float:
    """Wootters concurrence of a two-qubit state.

    The eigenvalues of ``rho R`` with ``R = (Y x Y) rho* (Y x Y)`` are taken
    from the similar Hermitian matrix ``sqrt(rho) R sqrt(rho)``.
    """
    arr = as_matrix(rho, (4,))
    if arr.shape != (4, 4):
        raise DimensionError("concurrence is defined for 4x4 states")
    validate_state(arr, tol)
    w, v = eigh(arr, tol)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    flipped = _SYY @ arr.conj() @ _SYY
    m = root @ flipped @ root
    m = 0.5 * (m + m.conj().T)
    e, _ = eigh(m, Tolerance(eps_herm=1e-9))
    e = np.sort(np.clip(e, 0.0, None))[::-1]
    r = np.sqrt(e)
    return float(max(0.0, r[0] - r[1] - r[2] - r[3]))


def coherence_report(rho, tol: Tolerance = DEFAULT_TOL) -> CoherenceReport:
    return CoherenceReport(
        c_l1=l1_coherence(rho, tol),
        c_rel=rel_entropy_coherence(rho, tol),
        purity=purity(rho, tol),
    )


def channel_report(choi: ChoiMatrix, tol: Tolerance = DEFAULT_TOL) -> CoherenceReport:
    """Coherence report of a Choi state, including the induced subsystem coherence."""
    try:
        c_rel = rel_entropy_coherence(choi.rho, tol)
    except NotAStateError:
        c_rel = float("nan")
    return CoherenceReport(
        c_l1=l1_coherence(choi.rho, tol),
        c_rel=c_rel,
        purity=purity(choi.rho, tol),
        c_subsystem=l1_coherence(subsystem_a(choi), tol),
    )


def batch_metrics(chois, with_rel=True):
    """``(c_l1, purity, c_rel)`` arrays for a stack of Choi states.

    Negative eigenvalues are clamped; callers pass CP-validated states.
    """
    c = kernels.l1_batch(chois)
    p = kernels.purity_batch(chois)
    if not with_rel:
        return c, p, np.full(c.shape, np.nan)
    w, _ = kernels.eigh_batch(chois, False)
    w = np.clip(w, 0.0, 1.0)
    d = np.clip(np.einsum("nii->ni", chois).real, 0.0, 1.0)
    rel = _entropy_rows(d) - _entropy_rows(w)
    return c, p, np.maximum(rel, 0.0)


def _entropy_rows(p):
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, -p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)
    return terms.sum(axis=1)
