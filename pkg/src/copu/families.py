"""Named qubit channel families with parameter constraints and closed-form predictions.

Every family is described by a :class:`FamilyDef` holding vectorized
builders over a parameter table of shape ``(n, len(keys))``. Complex
parameters are stored as two real columns ``<name>_re`` and ``<name>_im``.

Where a published closed form disagrees with the Choi computation, the
:class:`Prediction` carries a corrected (trusted) value and keeps the
published one in ``stated`` so the discrepancy can be reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Optional

import numpy as np

from . import kernels
from .channels import AffineChannel, KrausChannel
from .errors import ConstraintError, NotCompletelyPositiveError, UnknownFamilyError

CONSTRAINT_TOL = 1e-10
TWO_PI = 2.0 * math.pi


class Family(str, Enum):
    FIO1 = "fio1"
    FIO2 = "fio2"
    FIO3 = "fio3"
    FIO4 = "fio4"
    IO = "io"
    SIO = "sio"
    PIO = "pio"
    CPO = "cpo"
    CNC_FULL = "cnc_full"
    CNC_INC = "cnc_inc"
    CMC = "cmc"
    TWO_PARAM = "two_param"
    AMPLITUDE_DAMPING = "amplitude_damping"
    BIT_FLIP = "bit_flip"
    BIT_PHASE_FLIP = "bit_phase_flip"
    PHASE_FLIP = "phase_flip"
    DECOHERENCE = "decoherence"
    DEPOLARIZING = "depolarizing"
    HOMOGENIZATION = "homogenization"
    UNITAL = "unital"
    NONUNITAL = "nonunital"


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Prediction:
    """Closed-form coherence and purity; ``None`` means no trusted closed form."""

    c_l1: Optional[float]
    purity: Optional[float]
    label: str
    stated: Optional[tuple] = None  # published (C, P) where it differs from the values above

    @property
    def trusted(self) -> bool:
        return self.c_l1 is not None and self.purity is not None


@dataclass(frozen=True)
class FamilyDef:
    name: str
    keys: tuple
    kind: str  # "kraus" or "affine"
    build: Callable  # (n, k) params -> kraus (n, r, 2, 2) | (lam, tau)
    predict: Callable  # (n, k) params -> dict of c, p, stated_c, stated_p arrays
    violation: Callable  # (n, k) params -> (n,) nonnegative constraint violation
    draw: Optional[Callable] = None  # (rng, n) -> (n, k) params
    label: str = ""
    rejection: bool = False  # draws must be filtered by complete positivity
    finish: Optional[Callable] = None  # (params, fixed keys) -> params, run after fixed overrides

    def column(self, key: str) -> int:
        return self.keys.index(key)


# ---------------------------------------------------------------- helpers


def _cx(P, j):
    return P[:, j] + 1j * P[:, j + 1]


def _cx_keys(*names):
    return tuple(k for n in names for k in (f"{n}_re", f"{n}_im"))


def _split_cx(z):
    return np.stack([z.real, z.imag], axis=-1)


def _pred(c, p, sc=None, sp=None):
    nan = np.full(np.shape(c), np.nan)
    return {
        "c": np.asarray(c, dtype=float),
        "p": nan if p is None else np.asarray(p, dtype=float),
        "stated_c": nan if sc is None else np.asarray(sc, dtype=float),
        "stated_p": nan if sp is None else np.asarray(sp, dtype=float),
    }


def _uniform(ranges):
    """Independent uniform columns over ``[(lo, hi), ...]``."""
    lo = np.array([r[0] for r in ranges], dtype=float)
    hi = np.array([r[1] for r in ranges], dtype=float)

    def draw(rng, n):
        return lo + (hi - lo) * rng.random((n, len(ranges)))

    return draw


def _below(x, lo):
    return np.maximum(lo - x, 0.0)


def _outside(x, lo, hi):
    return np.maximum(lo - x, 0.0) + np.maximum(x - hi, 0.0)


def _finite_violation(P):
    return np.where(np.all(np.isfinite(P), axis=1), 0.0, np.inf)


def _random_unit_c2(rng, n):
    z = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _random_unitary(rng, n):
    z = (rng.normal(size=(n, 2, 2)) + 1j * rng.normal(size=(n, 2, 2))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def _sparse_nonneg(rng, n, k):
    """Nonnegative unit vectors with a random nonempty support.

    Sparse supports put mass on the faces of the simplex, where the region
    boundaries of the incoherent classes live.
    """
    mask = rng.random((n, k)) < 0.5
    empty = ~mask.any(axis=1)
    mask[empty, rng.integers(0, k, size=int(empty.sum()))] = True
    v = np.abs(rng.normal(size=(n, k))) * mask
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _sparse_complex(rng, n, k):
    mag = _sparse_nonneg(rng, n, k)
    return mag * np.exp(1j * rng.uniform(0.0, TWO_PI, size=(n, k)))


def _toward_aligned(rng, a, b):
    """Blend ``b`` with a random weight toward ``|b_i| = a_i``.

    Coherence ``sum a_i |b_i|`` is largest when the magnitudes are aligned,
    so the blend pushes draws toward the upper edge of the region.
    """
    w = rng.random((a.shape[0], 1))
    phase = np.exp(1j * np.angle(b))
    return (1 - w) * b + w * a * phase


# ---------------------------------------------------------------- FIO / GIO

_AB_KEYS = _cx_keys("a1", "b1", "a2", "b2")
_CD_KEYS = _cx_keys("c1", "d1", "c2", "d2")


def _fio_row_build(row):
    def build(P):
        a1, b1, a2, b2 = (_cx(P, j) for j in (0, 2, 4, 6))
        K = np.zeros((P.shape[0], 2, 2, 2), dtype=complex)
        K[:, 0, row, 0], K[:, 0, row, 1] = a1, b1
        K[:, 1, row, 0], K[:, 1, row, 1] = a2, b2
        return K

    return build


def _fio_row_violation(P):
    a1, b1, a2, b2 = (_cx(P, j) for j in (0, 2, 4, 6))
    v = np.abs(np.abs(a1) ** 2 + np.abs(b1) ** 2 - 1)
    v = np.maximum(v, np.abs(np.abs(a2) ** 2 + np.abs(b2) ** 2 - 1))
    v = np.maximum(v, np.abs(a1 * b1.conj() + a2 * b2.conj()))
    return v + _finite_violation(P)


def _fio_row_predict(P):
    n = P.shape[0]
    return _pred(np.zeros(n), np.full(n, 0.5))


def _fio_row_draw(rng, n):
    u = _random_unitary(rng, n)
    return _split_cx(np.stack([u[:, 0, 0], u[:, 0, 1], u[:, 1, 0], u[:, 1, 1]], axis=1)).reshape(n, 8)


def _fio_cd_build(diagonal):
    def build(P):
        c1, d1, c2, d2 = (_cx(P, j) for j in (0, 2, 4, 6))
        K = np.zeros((P.shape[0], 2, 2, 2), dtype=complex)
        if diagonal:
            K[:, 0, 0, 0], K[:, 0, 1, 1] = c1, d1
            K[:, 1, 0, 0], K[:, 1, 1, 1] = c2, d2
        else:
            K[:, 0, 1, 0], K[:, 0, 0, 1] = c1, d1
            K[:, 1, 1, 0], K[:, 1, 0, 1] = c2, d2
        return K

    return build


def _fio_cd_violation(P):
    c1, d1, c2, d2 = (_cx(P, j) for j in (0, 2, 4, 6))
    v = np.abs(np.abs(c1) ** 2 + np.abs(c2) ** 2 - 1)
    return np.maximum(v, np.abs(np.abs(d1) ** 2 + np.abs(d2) ** 2 - 1)) + _finite_violation(P)


def _fio_cd_predict(P):
    c1, d1, c2, d2 = (_cx(P, j) for j in (0, 2, 4, 6))
    c = np.abs(d1 * c1.conj() + d2 * c2.conj())
    return _pred(c, 0.5 * (1 + c * c))


def _fio_cd_draw(rng, n):
    c = _random_unit_c2(rng, n)
    d = _random_unit_c2(rng, n)
    return _split_cx(np.stack([c[:, 0], d[:, 0], c[:, 1], d[:, 1]], axis=1)).reshape(n, 8)


# ---------------------------------------------------------------- IO / SIO

_IO_KEYS = ("a1", "a2", "a3", "a4", "a5") + _cx_keys("b1", "b2", "b3", "b4")


def _io_parts(P):
    a = P[:, :5]
    b = np.stack([_cx(P, 5 + 2 * i) for i in range(4)], axis=1)
    return a, b


def _io_build(P):
    a, b = _io_parts(P)
    K = np.zeros((P.shape[0], 5, 2, 2), dtype=complex)
    K[:, 0, 0, 0], K[:, 0, 0, 1] = a[:, 0], b[:, 0]
    K[:, 1, 1, 0], K[:, 1, 1, 1] = a[:, 1], b[:, 1]
    K[:, 2, 0, 0], K[:, 2, 1, 1] = a[:, 2], b[:, 2]
    K[:, 3, 1, 0], K[:, 3, 0, 1] = a[:, 3], b[:, 3]
    K[:, 4, 0, 0] = a[:, 4]
    return K


def _io_violation(P):
    a, b = _io_parts(P)
    v = np.abs((a * a).sum(axis=1) - 1)
    v = np.maximum(v, np.abs((np.abs(b) ** 2).sum(axis=1) - 1))
    v = np.maximum(v, np.abs(a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]))
    return v + _finite_violation(P)


def _io_predict(P):
    a, b = _io_parts(P)
    a4, b4 = a[:, :4], np.abs(b)
    mu = a[:, 1] ** 2 + a[:, 3] ** 2
    kappa = b4[:, 0] ** 2 + b4[:, 3] ** 2
    p = 0.5 * (1 - mu * (1 - mu) - kappa * (1 - kappa) + (a4 ** 2 * b4 ** 2).sum(axis=1))
    return _pred(np.abs(a4 * b4).sum(axis=1), p, sc=(a4 * b4).sum(axis=1), sp=p)


def _io_draw(rng, n):
    a = _sparse_nonneg(rng, n, 5)
    b = _toward_aligned(rng, a[:, :4], _sparse_complex(rng, n, 4))
    # a1 b1 + a2 b2 = 0: solve for b2 where a2 > 0, otherwise zero b1
    solvable = a[:, 1] > 0
    b[solvable, 1] = -a[solvable, 0] * b[solvable, 0] / a[solvable, 1]
    b[~solvable & (a[:, 0] > 0), 0] = 0.0
    norm = np.linalg.norm(b, axis=1)
    dead = norm == 0
    b[dead, 2] = 1.0
    norm[dead] = 1.0
    b /= norm[:, None]
    return np.concatenate([a, _split_cx(b).reshape(n, 8)], axis=1)


_SIO_KEYS = ("a1", "a2", "a3", "a4") + _cx_keys("b1", "b2")


def _sio_parts(P):
    return P[:, :4], np.stack([_cx(P, 4), _cx(P, 6)], axis=1)


def _sio_build(P):
    a, b = _sio_parts(P)
    K = np.zeros((P.shape[0], 4, 2, 2), dtype=complex)
    K[:, 0, 0, 0], K[:, 0, 1, 1] = a[:, 0], b[:, 0]
    K[:, 1, 1, 0], K[:, 1, 0, 1] = a[:, 1], b[:, 1]
    K[:, 2, 0, 0] = a[:, 2]
    K[:, 3, 1, 0] = a[:, 3]
    return K


def _sio_violation(P):
    a, b = _sio_parts(P)
    v = np.abs((a * a).sum(axis=1) - 1)
    return np.maximum(v, np.abs((np.abs(b) ** 2).sum(axis=1) - 1)) + _finite_violation(P)


def _sio_predict(P):
    a, b = _sio_parts(P)
    mb = np.abs(b)
    nu = a[:, 0] ** 2 + a[:, 2] ** 2
    base = 1 - nu * (1 - nu) + (a[:, :2] ** 2 * mb ** 2).sum(axis=1)
    cross = mb[:, 0] ** 2 * mb[:, 1] ** 2
    c = (np.abs(a[:, :2]) * mb).sum(axis=1)
    return _pred(c, 0.5 * (base - cross), sc=(a[:, :2] * mb).sum(axis=1), sp=0.5 * (base + cross))


def _sio_draw(rng, n):
    a = _sparse_nonneg(rng, n, 4)
    b = _toward_aligned(rng, a[:, :2], _sparse_complex(rng, n, 2))
    dead = np.linalg.norm(b, axis=1) == 0
    b[dead, 0] = 1.0
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return np.concatenate([a, _split_cx(b).reshape(n, 4)], axis=1)


# ---------------------------------------------------------------- PIO / CPO

_PIO_KEYS = ("variant", "theta1", "theta2", "phi1", "phi2")


def _pio_build(P):
    n = P.shape[0]
    v = np.rint(P[:, 0]).astype(int)
    e1, e2, f1, f2 = (np.exp(1j * P[:, j]) for j in (1, 2, 3, 4))
    K = np.zeros((n, 2, 2, 2), dtype=complex)
    rows = {k: v == k for k in range(1, 7)}
    # (operator, row, col, value) for each variant
    layout = {
        1: ((0, 0, 0, e1), (1, 1, 1, e2)),
        2: ((0, 1, 0, f2), (1, 0, 1, f1)),
        3: ((0, 0, 0, e1), (1, 0, 1, f1)),
        4: ((0, 1, 0, f2), (1, 1, 1, e2)),
        5: ((0, 0, 0, e1), (0, 1, 1, e2)),
        6: ((0, 0, 1, f1), (0, 1, 0, f2)),
    }
    for variant, entries in layout.items():
        sel = rows[variant]
        for op, r, c, val in entries:
            K[sel, op, r, c] = val[sel]
    return K


def _pio_violation_for(allowed):
    def violation(P):
        v = P[:, 0]
        ok = (v == np.rint(v)) & np.isin(np.rint(v), allowed)
        return np.where(ok, 0.0, np.inf) + _finite_violation(P)

    return violation


def _pio_predict(P):
    preserving = np.rint(P[:, 0]) >= 5
    return _pred(np.where(preserving, 1.0, 0.0), np.where(preserving, 1.0, 0.5))


def _pio_draw_for(variants):
    variants = np.asarray(variants, dtype=float)

    def draw(rng, n):
        out = np.empty((n, 5))
        out[:, 0] = variants[rng.integers(0, len(variants), size=n)]
        out[:, 1:] = rng.uniform(0.0, TWO_PI, size=(n, 4))
        return out

    return draw


# ---------------------------------------------------------------- CNC / CMC / two-parameter


def _cnc_full_build(P):
    th, ph, xi, et = P.T
    ct, st, cp, sp = np.cos(th), np.sin(th), np.cos(ph), np.sin(ph)
    K = np.zeros((P.shape[0], 2, 2, 2), dtype=complex)
    K[:, 0, 0, 0] = np.exp(1j * et) * ct * cp
    K[:, 0, 1, 0] = -st * sp
    K[:, 0, 1, 1] = np.exp(1j * xi) * cp
    K[:, 1, 0, 0] = st * cp
    K[:, 1, 0, 1] = np.exp(1j * xi) * sp
    K[:, 1, 1, 0] = np.exp(-1j * et) * ct * sp
    return K


def _cnc_full_predict(P):
    th, ph = P[:, 0], P[:, 1]
    tail = np.abs(np.sin(th) * np.sin(2 * ph))
    p = (5 + np.cos(2 * th) + 2 * np.cos(th) ** 2 * np.cos(4 * ph)) / 8
    return _pred(np.abs(np.cos(th)) + tail, p, sc=np.cos(th) + tail, sp=p)


def cnc_incoherence_flag(theta: float, phi: float, tol: float = 1e-12) -> bool:
    """``sin(phi) cos(phi) sin(theta) cos(theta) = 0``: the full-rank CNC is then incoherent."""
    return abs(math.sin(phi) * math.cos(phi) * math.sin(theta) * math.cos(theta)) <= tol


def _diag_antidiag_build(P, chi=None):
    th, ph = P[:, 0], P[:, 1]
    twist = np.ones(P.shape[0]) if chi is None else np.exp(1j * chi)
    K = np.zeros((P.shape[0], 2, 2, 2), dtype=complex)
    K[:, 0, 0, 0] = np.cos(th)
    K[:, 0, 1, 1] = twist * np.cos(ph)
    K[:, 1, 0, 1] = np.sin(ph)
    K[:, 1, 1, 0] = twist * np.sin(th)
    return K


def _cnc_inc_predict(P):
    th, ph = P[:, 0], P[:, 1]
    cc, ss = np.cos(th) * np.cos(ph), np.sin(th) * np.sin(ph)
    p = (10 + np.cos(4 * th) + 4 * np.cos(2 * th) * np.cos(2 * ph) + np.cos(4 * ph)) / 16
    return _pred(np.abs(cc) + np.abs(ss), p, sc=cc + np.abs(ss), sp=p)


def _two_param_predict(P):
    th, ph = P[:, 0], P[:, 1]
    cc, ss = np.cos(th) * np.cos(ph), np.sin(th) * np.sin(ph)
    p = 0.5 + (np.cos(2 * ph) + np.cos(2 * th)) ** 2 / 8
    return _pred(np.abs(cc) + np.abs(ss), p, sc=cc + np.abs(ss), sp=p)


def _cmc_build(P):
    n = P.shape[0]
    K = np.empty((n, 2, 2, 2), dtype=complex)
    for op, (t, p) in enumerate(((P[:, 0], P[:, 2]), (P[:, 1], P[:, 3]))):
        K[:, op, 0, 0] = np.cos(t)
        K[:, op, 0, 1] = np.exp(-1j * p) * np.sin(t)
        K[:, op, 1, 0] = np.exp(1j * p) * np.sin(t)
        K[:, op, 1, 1] = -np.cos(t)
    return K / math.sqrt(2)


def _cmc_predict(P):
    t1, t2, p1, p2 = P.T
    vs = np.cos(2 * t1) + np.cos(2 * t2)
    g = sum(np.abs(np.exp(s * 2j * p1) * np.sin(t1) ** 2 + np.exp(s * 2j * p2) * np.sin(t2) ** 2) for s in (1, -1))
    f = sum(2 * np.abs(np.exp(s * 1j * p1) * np.sin(2 * t1) + np.exp(s * 1j * p2) * np.sin(2 * t2)) for s in (1, -1))
    c = (2 + vs + g + f) / 4
    # the published purity, read literally (the phase factor is cos 0 = 1)
    l21 = 4 * np.sin(t1) ** 2 * np.sin(t2) ** 2
    l12 = 4 * np.sin(2 * t1) * np.sin(2 * t2)
    sp = (11 + 3 * np.cos(2 * t1) * np.cos(2 * t2) + vs + l21 + l12) / 16
    return _pred(c, None, sc=c, sp=sp)


def _angles_violation(lo, hi):
    def violation(P):
        return _outside(P, lo, hi).max(axis=1) + _finite_violation(P)

    return violation


# ---------------------------------------------------------------- AD and Pauli-like


def _ad_build(P):
    eta = np.clip(P[:, 0], 0.0, 1.0)
    K = np.zeros((P.shape[0], 2, 2, 2), dtype=complex)
    K[:, 0, 0, 0] = 1.0
    K[:, 0, 1, 1] = np.sqrt(eta)
    K[:, 1, 0, 1] = np.sqrt(1 - eta)
    return K


def _ad_predict(P):
    eta = P[:, 0]
    return _pred(np.sqrt(np.clip(eta, 0.0, None)), 0.5 * (1 + eta * eta))


def _pauli_build(kind):
    def build(P):
        th = P[:, 0]
        c, s = np.cos(th), np.sin(th)
        K = np.zeros((P.shape[0], 2, 2, 2), dtype=complex)
        K[:, 0, 0, 0] = K[:, 0, 1, 1] = c
        if kind == "bit_flip":
            K[:, 1, 0, 1] = K[:, 1, 1, 0] = s
        elif kind == "bit_phase_flip":
            K[:, 1, 0, 1], K[:, 1, 1, 0] = -s, s
        else:
            K[:, 1, 0, 0], K[:, 1, 1, 1] = s, -s
        return K

    return build


def _pauli_predict(kind):
    def predict(P):
        c2 = np.cos(2 * P[:, 0])
        p = 0.5 * (1 + c2 * c2)
        if kind == "phase_flip":
            return _pred(np.abs(c2), p)
        return _pred(np.ones_like(c2), p, sc=c2, sp=0.25 * (1 + 2 * c2 * c2))

    return predict


# ---------------------------------------------------------------- affine families


def _decoherence_build(P):
    e = np.exp(-P[:, 0])
    lam = np.stack([e, e, np.ones_like(e)], axis=1)
    return lam, np.zeros_like(lam)


def _depolarizing_build(P):
    e = np.exp(-P[:, 0])
    lam = np.stack([e, e, e], axis=1)
    return lam, np.zeros_like(lam)


def _decay_predict(weight):
    def predict(P):
        c = np.exp(-P[:, 0])
        return _pred(c, (1 + weight * c * c) / (1 + weight))

    return predict


_HOMOG_DEFAULTS = {"T1": 1.0, "T2": 2.0, "omega": 1.0}


def _homog_build(P):
    t, t1, t2, w = P.T
    e1, e2 = np.exp(-t / t1), np.exp(-t / t2)
    lam = np.stack([e2, e2, e1], axis=1)
    tau = np.zeros_like(lam)
    tau[:, 2] = w * (1 - e1)
    return lam, tau


def _homog_predict(P):
    t, t1, t2, w = P.T
    e1, e2 = np.exp(-t / t1), np.exp(-t / t2)
    return _pred(e2, 0.25 * (1 + e1 * e1 + 2 * e2 * e2 + w * w * (1 - e1) ** 2))


def _homog_violation(P):
    t, t1, t2, w = P.T
    v = _below(t, 0.0) + _outside(w, 0.0, 1.0)
    return v + np.where((t1 > 0) & (t2 > 0), 0.0, np.inf) + _finite_violation(P)


def _homog_draw(rng, n):
    """Column ``t`` holds a fraction in [0, 1]; :func:`_homog_finish` scales it."""
    out = np.empty((n, 4))
    out[:, 0] = rng.random(n)
    out[:, 1] = _HOMOG_DEFAULTS["T1"]
    out[:, 2] = _HOMOG_DEFAULTS["T2"]
    out[:, 3] = _HOMOG_DEFAULTS["omega"]
    return out


def _homog_finish(P, fixed):
    if "t" not in fixed:
        P[:, 0] *= 5.0 * np.maximum(P[:, 1], P[:, 2])
    return P


def _lam_tau_build(P):
    lam = P[:, :3]
    tau = P[:, 3:6] if P.shape[1] >= 6 else np.zeros_like(lam)
    return lam, tau


def _bloch_predict(P):
    lam, tau = _lam_tau_build(P)
    c = 0.5 * (np.abs(lam[:, 0] + lam[:, 1]) + np.abs(lam[:, 0] - lam[:, 1])) + np.hypot(tau[:, 0], tau[:, 1])
    return _pred(c, 0.25 * (1 + (lam ** 2).sum(axis=1) + (tau ** 2).sum(axis=1)))


# ---------------------------------------------------------------- registry


def _register(*defs):
    return {d.name: d for d in defs}


_ANGLE = (0.0, math.pi)

FAMILIES = _register(
    FamilyDef("fio1", _AB_KEYS, "kraus", _fio_row_build(0), _fio_row_predict, _fio_row_violation,
              _fio_row_draw, "FIO, first-row Kraus pair"),
    FamilyDef("fio2", _AB_KEYS, "kraus", _fio_row_build(1), _fio_row_predict, _fio_row_violation,
              _fio_row_draw, "FIO, second-row Kraus pair"),
    FamilyDef("fio3", _CD_KEYS, "kraus", _fio_cd_build(False), _fio_cd_predict, _fio_cd_violation,
              _fio_cd_draw, "FIO, antidiagonal Kraus pair"),
    FamilyDef("fio4", _CD_KEYS, "kraus", _fio_cd_build(True), _fio_cd_predict, _fio_cd_violation,
              _fio_cd_draw, "GIO, diagonal Kraus pair"),
    FamilyDef("io", _IO_KEYS, "kraus", _io_build, _io_predict, _io_violation, _io_draw,
              "IO, five-operator canonical form"),
    FamilyDef("sio", _SIO_KEYS, "kraus", _sio_build, _sio_predict, _sio_violation, _sio_draw,
              "SIO, four-operator canonical form"),
    FamilyDef("pio", _PIO_KEYS, "kraus", _pio_build, _pio_predict, _pio_violation_for([1, 2, 3, 4, 5, 6]),
              _pio_draw_for([1, 2, 3, 4, 5, 6]), "PIO"),
    FamilyDef("cpo", _PIO_KEYS, "kraus", _pio_build, _pio_predict, _pio_violation_for([5, 6]),
              _pio_draw_for([5, 6]), "CPO, phase-decorated permutation unitary"),
    FamilyDef("cnc_full", ("theta", "phi", "xi", "eta"), "kraus", _cnc_full_build, _cnc_full_predict,
              lambda P: _finite_violation(P), _uniform([(0.0, TWO_PI)] * 4), "full-rank CNC"),
    FamilyDef("cnc_inc", ("theta", "phi", "chi"), "kraus",
              lambda P: _diag_antidiag_build(P, P[:, 2]), _cnc_inc_predict,
              lambda P: _finite_violation(P), _uniform([(0.0, TWO_PI)] * 3), "incoherent CNC"),
    FamilyDef("cmc", ("theta1", "theta2", "phi1", "phi2"), "kraus", _cmc_build, _cmc_predict,
              lambda P: _finite_violation(P),
              _uniform([(0.0, math.pi / 4)] * 2 + [(0.0, TWO_PI)] * 2), "maximally coherent channel"),
    FamilyDef("two_param", ("theta", "phi"), "kraus", _diag_antidiag_build, _two_param_predict,
              _angles_violation(*_ANGLE), _uniform([_ANGLE] * 2), "diagonal/antidiagonal Kraus pair"),
    FamilyDef("amplitude_damping", ("eta",), "kraus", _ad_build, _ad_predict,
              lambda P: _outside(P[:, 0], 0.0, 1.0) + _finite_violation(P), _uniform([(0.0, 1.0)]),
              "amplitude damping"),
    FamilyDef("bit_flip", ("theta",), "kraus", _pauli_build("bit_flip"), _pauli_predict("bit_flip"),
              lambda P: _finite_violation(P), _uniform([_ANGLE]), "bit flip"),
    FamilyDef("bit_phase_flip", ("theta",), "kraus", _pauli_build("bit_phase_flip"),
              _pauli_predict("bit_phase_flip"), lambda P: _finite_violation(P), _uniform([_ANGLE]),
              "bit-phase flip"),
    FamilyDef("phase_flip", ("theta",), "kraus", _pauli_build("phase_flip"), _pauli_predict("phase_flip"),
              lambda P: _finite_violation(P), _uniform([_ANGLE]), "phase flip"),
    FamilyDef("decoherence", ("t_over_T",), "affine", _decoherence_build, _decay_predict(1.0),
              lambda P: _below(P[:, 0], 0.0) + _finite_violation(P), _uniform([(0.0, 5.0)]),
              "pure decoherence"),
    FamilyDef("depolarizing", ("t_over_T",), "affine", _depolarizing_build, _decay_predict(3.0),
              lambda P: _below(P[:, 0], 0.0) + _finite_violation(P), _uniform([(0.0, 5.0)]),
              "depolarizing"),
    FamilyDef("homogenization", ("t", "T1", "T2", "omega"), "affine", _homog_build, _homog_predict,
              _homog_violation, _homog_draw, "homogenization", finish=_homog_finish),
    FamilyDef("unital", ("lx", "ly", "lz"), "affine", _lam_tau_build, _bloch_predict,
              lambda P: _finite_violation(P), _uniform([(-1.0, 1.0)] * 3), "random unital", rejection=True),
    FamilyDef("nonunital", ("lx", "ly", "lz", "tx", "ty", "tz"), "affine", _lam_tau_build, _bloch_predict,
              lambda P: _finite_violation(P), _uniform([(-1.0, 1.0)] * 6), "random non-unital",
              rejection=True),
)

# alias -> (family, fixed parameters)
ALIASES = {
    "gio": ("fio4", {}),
    "ad": ("amplitude_damping", {}),
    "unital_random": ("unital", {}),
    "nonunital_random": ("nonunital", {}),
    **{f"pio{v}": ("pio", {"variant": float(v)}) for v in range(1, 7)},
}


def resolve(spec: FamilySpec):
    """Return ``(FamilyDef, params)`` with aliases and ``variant`` selectors expanded."""
    name = str(spec.name.value if isinstance(spec.name, Enum) else spec.name).lower()
    params = dict(spec.params)
    if name == "fio":
        if "variant" not in params:
            raise ConstraintError("fio needs a 'variant' parameter in 1..4")
        variant = params.pop("variant")
        if variant not in (1, 2, 3, 4):
            raise ConstraintError(f"fio variant {variant!r} not in 1..4")
        name = f"fio{int(variant)}"
    if name in ALIASES:
        name, fixed = ALIASES[name]
        for k, v in fixed.items():
            if k in params and params[k] != v:
                raise ConstraintError(f"{spec.name} fixes {k}={v}, got {params[k]!r}")
            params[k] = v
    if name not in FAMILIES:
        raise UnknownFamilyError(f"unknown family {spec.name!r}")
    return FAMILIES[name], params


def known_names():
    return sorted(set(FAMILIES) | set(ALIASES) | {"fio"})


def param_row(fam: FamilyDef, params: Mapping[str, float]) -> np.ndarray:
    """Arrange a complete parameter mapping into a row in ``fam.keys`` order."""
    merged = dict(params)
    if fam.name == "homogenization":
        merged = {**_HOMOG_DEFAULTS, **merged}
    missing = [k for k in fam.keys if k not in merged]
    extra = [k for k in merged if k not in fam.keys]
    if missing or extra:
        raise ConstraintError(f"{fam.name}: missing {missing or 'none'}, unexpected {extra or 'none'}")
    try:
        return np.array([float(merged[k]) for k in fam.keys])
    except (TypeError, ValueError) as exc:
        raise ConstraintError(f"{fam.name}: parameters must be real numbers") from exc


def check_params(fam: FamilyDef, P: np.ndarray) -> None:
    bad = fam.violation(P)
    if np.any(~(bad <= CONSTRAINT_TOL)):
        i = int(np.argmax(np.where(np.isfinite(bad), bad, np.inf)))
        raise ConstraintError(f"{fam.name}: constraint violated by {bad[i]:.3e} at {dict(zip(fam.keys, P[i]))}")


def build_batch(fam: FamilyDef, P: np.ndarray, check: bool = True):
    """Kraus stack ``(n, r, 2, 2)`` or ``(lam, tau)`` for a parameter table."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if check:
        check_params(fam, P)
    out = fam.build(P)
    if fam.kind == "affine" and check:
        ok = kernels.nonunital_cp_batch(*out)
        if not ok.all():
            i = int(np.argmin(ok))
            raise NotCompletelyPositiveError(f"{fam.name}: not completely positive at {dict(zip(fam.keys, P[i]))}")
    return out


def predict_row(fam: FamilyDef, row: np.ndarray) -> Prediction:
    d = fam.predict(np.atleast_2d(row))
    c, p, sc, sp = (float(d[k][0]) for k in ("c", "p", "stated_c", "stated_p"))
    stated = None
    if not (math.isnan(sc) and math.isnan(sp)):
        same = math.isclose(sc, c, abs_tol=0.0) and (math.isnan(p) or math.isclose(sp, p, abs_tol=0.0))
        if not same or math.isnan(p):
            stated = (sc, sp)
    return Prediction(c, None if math.isnan(p) else p, fam.label, stated)


def construct(spec: FamilySpec):
    """Build the channel named by ``spec`` and its prediction."""
    fam, params = resolve(spec)
    row = param_row(fam, params)
    out = build_batch(fam, row[None])
    if fam.kind == "kraus":
        channel = KrausChannel(tuple(out[0]))
    else:
        channel = AffineChannel(out[0][0], out[1][0])
    return channel, predict_row(fam, row)


# ---------------------------------------------------------------- public constructors


def _cx_params(names, values):
    out = {}
    for name, z in zip(names, values):
        z = complex(z)
        out[f"{name}_re"], out[f"{name}_im"] = z.real, z.imag
    return out


def fio(variant: int, params: Mapping):
    """FIO channel. Variants 1-2 take complex ``a1, b1, a2, b2``; variants 3-4 take ``c1, d1, c2, d2``."""
    if variant not in (1, 2, 3, 4):
        raise ConstraintError(f"fio variant {variant!r} not in 1..4")
    names = ("a1", "b1", "a2", "b2") if variant <= 2 else ("c1", "d1", "c2", "d2")
    if set(params) - set(names):
        raise ConstraintError(f"fio{variant} takes {names}")
    return construct(FamilySpec(f"fio{variant}", _cx_params(names, [params.get(n, 0) for n in names])))


def io_canonical(a, b):
    a = [float(x) for x in a]
    b = list(b)
    if len(a) != 5 or len(b) != 4:
        raise ConstraintError("io_canonical takes 5 real a and 4 complex b")
    params = dict(zip(("a1", "a2", "a3", "a4", "a5"), a))
    params.update(_cx_params(("b1", "b2", "b3", "b4"), b))
    return construct(FamilySpec("io", params))


def sio_canonical(a, b):
    a = [float(x) for x in a]
    b = list(b)
    if len(a) != 4 or len(b) != 2:
        raise ConstraintError("sio_canonical takes 4 real a and 2 complex b")
    params = dict(zip(("a1", "a2", "a3", "a4"), a))
    params.update(_cx_params(("b1", "b2"), b))
    return construct(FamilySpec("sio", params))


def pio(variant: int, theta1=0.0, theta2=0.0, phi1=0.0, phi2=0.0):
    return construct(FamilySpec("pio", dict(variant=variant, theta1=theta1, theta2=theta2, phi1=phi1, phi2=phi2)))


def cnc_full_rank(theta, phi, xi=0.0, eta=0.0):
    return construct(FamilySpec("cnc_full", dict(theta=theta, phi=phi, xi=xi, eta=eta)))


def cnc_incoherent(theta, phi, chi=0.0):
    return construct(FamilySpec("cnc_inc", dict(theta=theta, phi=phi, chi=chi)))


def cmc(theta1, theta2, phi1=0.0, phi2=0.0):
    return construct(FamilySpec("cmc", dict(theta1=theta1, theta2=theta2, phi1=phi1, phi2=phi2)))


def two_param_family(theta, phi):
    return construct(FamilySpec("two_param", dict(theta=theta, phi=phi)))


def amplitude_damping(eta):
    return construct(FamilySpec("amplitude_damping", dict(eta=eta)))


def pauli_like(kind: str, theta):
    if kind not in ("bit_flip", "bit_phase_flip", "phase_flip"):
        raise ConstraintError(f"unknown Pauli-like kind {kind!r}")
    return construct(FamilySpec(kind, dict(theta=theta)))


def decoherence(t_over_T):
    return construct(FamilySpec("decoherence", dict(t_over_T=t_over_T)))


def depolarizing(t_over_T):
    return construct(FamilySpec("depolarizing", dict(t_over_T=t_over_T)))


def homogenization(t, T1=1.0, T2=2.0, omega=1.0):
    return construct(FamilySpec("homogenization", dict(t=t, T1=T1, T2=T2, omega=omega)))
