"""Complete positivity in affine coordinates and boolean channel classifiers."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channels import AffineChannel, ChoiMatrix, GeneralAffine, KrausChannel
from .errors import ConstraintError, UndefinedClassification
from .linalg import DEFAULT_TOL, Tolerance, hermitian_eigenvalues, partial_transpose

log = logging.getLogger(__name__)

ZERO_TOL = 1e-12
TAU_FLOOR = 1e-15


@dataclass(frozen=True)
class UnitalCPWitness:
    q: tuple  # (q00, q01, q10, q11)

    @property
    def min_q(self) -> float:
        return min(self.q)


@dataclass(frozen=True)
class NonunitalCPWitness:
    q: tuple
    u: float
    qprod: float
    tau_norm_sq: float
    n_hat: Optional[tuple]
    bound: float  # u - sqrt(max(u^2 - qprod, 0))


def q_values(lam) -> tuple:
    """``q_ij = 1 + (-1)^i lx + (-1)^(i+j) ly + (-1)^j lz`` ordered q00, q01, q10, q11."""
    lx, ly, lz = (float(x) for x in lam)
    return tuple(
        1.0 + (-1) ** i * lx + (-1) ** (i + j) * ly + (-1) ** j * lz for i in (0, 1) for j in (0, 1)
    )


def unital_cp(lam, tol: Tolerance = DEFAULT_TOL):
    """Return ``(is_cp, witness)`` for the unital channel with signed singular values ``lam``."""
    q = q_values(lam)
    return min(q) >= -tol.eps_psd, UnitalCPWitness(q)


def nonunital_cp(lam, tau, tol: Tolerance = DEFAULT_TOL):
    lam = np.asarray(lam, dtype=float)
    tau = np.asarray(tau, dtype=float)
    q = q_values(lam)
    qprod = math.prod(q)
    t2 = float(tau @ tau)
    tnorm = math.sqrt(t2)
    if tnorm < TAU_FLOOR:
        n_hat = None
        u = 1.0 - float(lam @ lam)
        bound = float("inf")
    else:
        n = tau / tnorm
        n_hat = tuple(n)
        u = 1.0 - float(lam @ lam) + 2.0 * float((lam ** 2) @ (n ** 2))
        rad = u * u - qprod
        if rad < 0.0:
            log.debug("clamping negative radicand %.3e to 0", rad)
            rad = 0.0
        bound = u - math.sqrt(rad)
    # equivalent to t2 <= bound, but free of the square root's roundoff amplification
    inside = t2 <= u + tol.eps_psd and t2 * t2 - 2.0 * u * t2 + qprod >= -tol.eps_psd
    ok = min(q) >= -tol.eps_psd and (n_hat is None or inside)
    return ok, NonunitalCPWitness(q, u, qprod, t2, n_hat, bound)


def is_cp(ch: AffineChannel, tol: Tolerance = DEFAULT_TOL) -> bool:
    return nonunital_cp(ch.lam, ch.tau, tol)[0]


def is_unital(ch: KrausChannel, tol: Tolerance = DEFAULT_TOL) -> bool:
    return ch.unital_deviation() <= tol.eps_tp


def is_coherence_breaking(ch) -> bool:
    """Every output is diagonal: the x and y rows of the Bloch map vanish.

    Accepts an :class:`AffineChannel` or, for diagnostics, a :class:`GeneralAffine`.
    """
    if isinstance(ch, GeneralAffine):
        rows = np.concatenate([ch.M[:2].ravel(), ch.tau[:2]])
        return bool(np.max(np.abs(rows)) <= ZERO_TOL)
    vals = (ch.lam[0], ch.lam[1], ch.tau[0], ch.tau[1])
    return all(abs(v) <= ZERO_TOL for v in vals)


def is_entanglement_breaking(choi: ChoiMatrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    """PPT test, which is exact for two qubits."""
    pt = partial_transpose(choi.rho)
    return bool(hermitian_eigenvalues(pt, Tolerance(eps_herm=max(tol.eps_herm, 1e-10)))[-1] >= -tol.eps_psd)


def _columns_single_entry(ops) -> bool:
    for k in ops:
        nonzero = np.abs(k) > ZERO_TOL
        if np.any(nonzero.sum(axis=0) > 1):
            return False
    return True


def is_incoherent_kraus(ch: KrausChannel) -> bool:
    """Each column of each Kraus operator has at most one nonzero entry."""
    return _columns_single_entry(ch.ops)


def is_strictly_incoherent_kraus(ch: KrausChannel) -> bool:
    return _columns_single_entry(ch.ops) and _columns_single_entry([k.conj().T for k in ch.ops])


def is_degradable_family(theta: float, phi: float) -> bool:
    """Sign test ``cos 2theta / cos 2phi >= 0`` for the two-Kraus diagonal/antidiagonal family."""
    for name, x in (("theta", theta), ("phi", phi)):
        if not (0.0 <= x <= math.pi):
            raise ConstraintError(f"{name}={x!r} outside [0, pi]")
    c_phi = math.cos(2 * phi)
    if abs(c_phi) < 1e-15:
        raise UndefinedClassification("cos 2phi = 0: degradability undefined on this boundary")
    return math.cos(2 * theta) / c_phi >= 0.0
