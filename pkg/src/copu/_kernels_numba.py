"""Numba implementations of the batched hot loops.

Every function here has a twin with the same signature in ``_kernels_numpy``.
The two are kept numerically interchangeable (agreement to ~1e-12) and are
compared in ``tests/test_kernels.py`` and ``benchmarks/bench_kernels.py``.
"""
import math

import numpy as np
from numba import njit

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
# off-diagonal entries below this fraction of the local diagonal are left alone
_NEGLIGIBLE = 1e-18


@njit(cache=True, nogil=True)
def _jacobi(a, v, want_vectors, rel_tol, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        dia = 0.0
        for i in range(n):
            dia += a[i, i].real * a[i, i].real
            for j in range(n):
                if i != j:
                    off += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
        if off == 0.0 or off <= rel_tol * rel_tol * dia:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= _NEGLIGIBLE * (abs(a[p, p].real) + abs(a[q, q].real)) or r < 1e-300:
                    continue
                ph = complex(apq.real / r, apq.imag / r)
                phc = np.conj(ph)
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = 1.0 / (abs(theta) + math.hypot(theta, 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- G^H A G with G = [[c, s ph], [-s conj(ph), c]] on (p, q)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * phc * akq
                    a[k, q] = s * ph * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * ph * aqk
                    a[q, k] = s * phc * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if want_vectors:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * phc * vkq
                        v[k, q] = s * ph * vkp + c * vkq
    return max_sweeps


@njit(cache=True, nogil=True)
def eigh_batch(mats, want_vectors=True, rel_tol=1e-14, max_sweeps=64):
    """Cyclic Jacobi on a stack of Hermitian matrices.

    Returns ``(w, vecs)``; ``w[b]`` is unsorted and ``vecs[b][:, k]`` is the
    eigenvector for ``w[b, k]``. ``vecs`` is all zeros when not requested.
    """
    nb = mats.shape[0]
    n = mats.shape[1]
    w = np.empty((nb, n))
    vecs = np.zeros((nb, n, n), dtype=np.complex128)
    for b in range(nb):
        a = mats[b].astype(np.complex128).copy()
        v = np.eye(n, dtype=np.complex128)
        _jacobi(a, v, want_vectors, rel_tol, max_sweeps)
        for i in range(n):
            w[b, i] = a[i, i].real
        if want_vectors:
            vecs[b] = v
    return w, vecs


@njit(cache=True, nogil=True)
def choi_kraus_batch(kraus):
    """``sum_k (K_k x I) |psi-><psi-| (K_k x I)^dag`` for a stack of Kraus sets.

    ``kraus`` has shape (N, r, 2, 2). With the singlet (|01> - |10>)/sqrt2 the
    image vector is ``v[2a] = -K[a,1]/sqrt2`` and ``v[2a+1] = K[a,0]/sqrt2``.
    """
    nb = kraus.shape[0]
    nr = kraus.shape[1]
    out = np.zeros((nb, 4, 4), dtype=np.complex128)
    v = np.empty(4, dtype=np.complex128)
    for b in range(nb):
        for k in range(nr):
            for a in range(2):
                v[2 * a] = -kraus[b, k, a, 1] * _INV_SQRT2
                v[2 * a + 1] = kraus[b, k, a, 0] * _INV_SQRT2
            for i in range(4):
                for j in range(4):
                    out[b, i, j] += v[i] * np.conj(v[j])
    return out


@njit(cache=True, nogil=True)
def l1_batch(mats):
    nb = mats.shape[0]
    n = mats.shape[1]
    out = np.zeros(nb)
    for b in range(nb):
        acc = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    acc += abs(mats[b, i, j])
        out[b] = acc
    return out


@njit(cache=True, nogil=True)
def purity_batch(mats):
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    nb = mats.shape[0]
    n = mats.shape[1]
    out = np.zeros(nb)
    for b in range(nb):
        acc = 0.0
        for i in range(n):
            for j in range(n):
                z = mats[b, i, j]
                acc += z.real * z.real + z.imag * z.imag
        out[b] = acc
    return out


@njit(cache=True, nogil=True)
def nonunital_cp_batch(lam, tau, eps=1e-10, tau_floor=1e-15):
    """Affine-coordinate complete-positivity test for a stack of (lambda, tau)."""
    nb = lam.shape[0]
    ok = np.empty(nb, dtype=np.bool_)
    for b in range(nb):
        lx = lam[b, 0]
        ly = lam[b, 1]
        lz = lam[b, 2]
        q00 = 1.0 + lx + ly + lz
        q01 = 1.0 + lx - ly - lz
        q10 = 1.0 - lx - ly + lz
        q11 = 1.0 - lx + ly - lz
        qmin = min(min(q00, q01), min(q10, q11))
        if qmin < -eps:
            ok[b] = False
            continue
        t2 = tau[b, 0] ** 2 + tau[b, 1] ** 2 + tau[b, 2] ** 2
        if math.sqrt(t2) < tau_floor:
            ok[b] = True
            continue
        l2 = lx * lx + ly * ly + lz * lz
        ln2 = (lx * lx * tau[b, 0] ** 2 + ly * ly * tau[b, 1] ** 2 + lz * lz * tau[b, 2] ** 2) / t2
        u = 1.0 - l2 + 2.0 * ln2
        qprod = q00 * q01 * q10 * q11
        # t2 <= u - sqrt(u^2 - qprod), rewritten without the square root
        ok[b] = t2 <= u + eps and t2 * t2 - 2.0 * u * t2 + qprod >= -eps
    return ok
