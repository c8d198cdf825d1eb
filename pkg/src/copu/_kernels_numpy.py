"""Pure-numpy twins of ``_kernels_numba``, vectorized over the batch axis."""
import numpy as np

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_NEGLIGIBLE = 1e-18


def eigh_batch(mats, want_vectors=True, rel_tol=1e-14, max_sweeps=64):
    a = np.array(mats, dtype=np.complex128, copy=True)
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy()
    diag = np.arange(n)
    offmask = ~np.eye(n, dtype=bool)
    active = np.ones(nb, dtype=bool)
    for _ in range(max_sweeps):
        d = a[:, diag, diag].real
        off = (np.abs(a[:, offmask]) ** 2).sum(axis=1)
        active &= ~((off == 0.0) | (off <= rel_tol * rel_tol * (d * d).sum(axis=1)))
        if not active.any():
            break
        idx = np.flatnonzero(active)
        sub = a[idx]
        vsub = v[idx]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = sub[:, p, q]
                r = np.abs(apq)
                scale = np.abs(sub[:, p, p].real) + np.abs(sub[:, q, q].real)
                nz = (r > _NEGLIGIBLE * scale) & (r >= 1e-300)
                rs = np.where(nz, r, 1.0)
                ph = np.where(nz, apq.real / rs + 1j * (apq.imag / rs), 1.0)
                phc = ph.conj()
                theta = (sub[:, q, q].real - sub[:, p, p].real) / (2.0 * rs)
                t = 1.0 / (np.abs(theta) + np.hypot(theta, 1.0))
                t = np.where(theta < 0.0, -t, t)
                t = np.where(nz, t, 0.0)
                c = (1.0 / np.sqrt(t * t + 1.0))[:, None]
                s = (t[:, None] * c)
                ph = ph[:, None]
                phc = phc[:, None]
                colp = sub[:, :, p].copy()
                colq = sub[:, :, q].copy()
                sub[:, :, p] = c * colp - s * phc * colq
                sub[:, :, q] = s * ph * colp + c * colq
                rowp = sub[:, p, :].copy()
                rowq = sub[:, q, :].copy()
                sub[:, p, :] = c * rowp - s * ph * rowq
                sub[:, q, :] = s * phc * rowp + c * rowq
                sub[:, p, q] = np.where(nz, 0.0, sub[:, p, q])
                sub[:, q, p] = np.where(nz, 0.0, sub[:, q, p])
                sub[:, p, p] = sub[:, p, p].real
                sub[:, q, q] = sub[:, q, q].real
                if want_vectors:
                    vp = vsub[:, :, p].copy()
                    vq = vsub[:, :, q].copy()
                    vsub[:, :, p] = c * vp - s * phc * vq
                    vsub[:, :, q] = s * ph * vp + c * vq
        a[idx] = sub
        v[idx] = vsub
    w = a[:, diag, diag].real.copy()
    if not want_vectors:
        v = np.zeros_like(v)
    return w, v


def choi_kraus_batch(kraus):
    kraus = np.asarray(kraus, dtype=np.complex128)
    vec = np.empty(kraus.shape[:2] + (4,), dtype=np.complex128)
    vec[..., 0::2] = -kraus[..., :, 1] * _INV_SQRT2
    vec[..., 1::2] = kraus[..., :, 0] * _INV_SQRT2
    return np.einsum("nki,nkj->nij", vec, vec.conj())


def l1_batch(mats):
    mats = np.asarray(mats)
    offmask = ~np.eye(mats.shape[-1], dtype=bool)
    return np.abs(mats[:, offmask]).sum(axis=1)


def purity_batch(mats):
    return (np.abs(np.asarray(mats)) ** 2).sum(axis=(1, 2))


def nonunital_cp_batch(lam, tau, eps=1e-10, tau_floor=1e-15):
    lam = np.asarray(lam, dtype=float)
    tau = np.asarray(tau, dtype=float)
    lx, ly, lz = lam[:, 0], lam[:, 1], lam[:, 2]
    q = np.stack([1 + lx + ly + lz, 1 + lx - ly - lz, 1 - lx - ly + lz, 1 - lx + ly - lz], axis=1)
    t2 = (tau ** 2).sum(axis=1)
    safe = np.where(t2 > 0.0, t2, 1.0)
    u = 1.0 - (lam ** 2).sum(axis=1) + 2.0 * (lam ** 2 * tau ** 2).sum(axis=1) / safe
    # t2 <= u - sqrt(u^2 - prod q), rewritten without the square root
    inside = (t2 <= u + eps) & (t2 * t2 - 2.0 * u * t2 + q.prod(axis=1) >= -eps)
    shift_ok = (np.sqrt(t2) < tau_floor) | inside
    return (q.min(axis=1) >= -eps) & shift_ok
