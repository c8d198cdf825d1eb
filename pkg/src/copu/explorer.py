"""Monte Carlo sampling of channel families, CoPu envelopes and duality fits.

Sampling is split into fixed-size blocks. Block ``i`` draws from
``default_rng([seed, i])`` and rejection samplers fill a fixed per-block
quota, so the output depends only on ``(family, n, seed)`` and never on the
number of worker threads.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from . import kernels
from .channels import affine_choi_batch
from .errors import ConstraintError, DegenerateDesignError
from .families import FamilyDef, FamilySpec, build_batch, resolve
from .metrics import batch_metrics

log = logging.getLogger(__name__)

BLOCK = 4096
CANDIDATES_PER_ROUND = 4096
CROSS_CHECK_TOL = 1e-9
TP_TOL = 1e-10
DEFAULT_BINS = 64
MIN_COUNT = 10
CONTAINMENT_TOL = 0.03


@dataclass(frozen=True)
class CoPuSample:
    purity: float
    c_l1: float
    c_rel: float
    family: str
    params: Mapping[str, float]


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Columnar store of samples; iterate to get :class:`CoPuSample` rows."""

    family: str
    keys: tuple
    params: np.ndarray  # (n, len(keys))
    purity: np.ndarray
    c_l1: np.ndarray
    c_rel: np.ndarray

    def __len__(self):
        return self.purity.shape[0]

    def __iter__(self) -> Iterator[CoPuSample]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i) -> CoPuSample:
        return CoPuSample(
            float(self.purity[i]),
            float(self.c_l1[i]),
            float(self.c_rel[i]),
            self.family,
            dict(zip(self.keys, map(float, self.params[i]))),
        )


def _block_sizes(n):
    full, rest = divmod(n, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def _draw_block(fam: FamilyDef, fixed: Mapping[str, float], rng, size):
    P = fam.draw(rng, size)
    for key, value in fixed.items():
        P[:, fam.column(key)] = value
    if fam.finish is not None:
        P = fam.finish(P, set(fixed))
    return P


def _accepted_block(fam, fixed, rng, size):
    """Draw candidates in fixed-size rounds until ``size`` CP channels are found."""
    chunks, have = [], 0
    while have < size:
        P = _draw_block(fam, fixed, rng, CANDIDATES_PER_ROUND)
        ok = kernels.nonunital_cp_batch(*fam.build(P))
        chunks.append(P[ok])
        have += int(ok.sum())
    return np.concatenate(chunks)[:size]


def _metrics_block(fam: FamilyDef, P, with_rel):
    if fam.kind == "kraus":
        K = build_batch(fam, P)
        tp = np.abs(np.einsum("nkji,nkjl->nil", K.conj(), K) - np.eye(2)).max(axis=(1, 2))
        if np.any(tp > TP_TOL):
            raise ConstraintError(f"{fam.name}: Kraus operators not trace preserving ({tp.max():.3e})")
        c, p, rel = batch_metrics(kernels.choi_kraus_batch(K), with_rel)
        return p, c, rel
    lam, tau = build_batch(fam, P)
    c, p, rel = batch_metrics(affine_choi_batch(lam, tau), with_rel)
    pred = fam.predict(P)
    worst = max(np.max(np.abs(pred["c"] - c)), np.max(np.abs(pred["p"] - p)))
    if worst > CROSS_CHECK_TOL:
        raise RuntimeError(f"{fam.name}: closed form disagrees with the Choi oracle by {worst:.3e}")
    return pred["p"], pred["c"], rel


def _run_block(fam, fixed, seed, index, size, with_rel):
    rng = np.random.default_rng([seed, index])
    if fam.rejection:
        P = _accepted_block(fam, fixed, rng, size)
    else:
        P = _draw_block(fam, fixed, rng, size)
    p, c, rel = _metrics_block(fam, P, with_rel)
    return P, p, c, rel


def sample_family(spec: FamilySpec, n: int, seed: int = 0, jobs: int = 1, with_rel: bool = True) -> SampleSet:
    """Draw ``n`` channels of a family; parameters in ``spec.params`` are held fixed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    fam, fixed = resolve(spec)
    unknown = set(fixed) - set(fam.keys)
    if unknown:
        raise ConstraintError(f"{fam.name} has no parameters {sorted(unknown)}")
    fixed = {k: float(v) for k, v in fixed.items()}
    sizes = _block_sizes(n)
    tasks = [(fam, fixed, seed, i, s, with_rel) for i, s in enumerate(sizes)]
    if jobs == 1 or len(tasks) == 1:
        parts = [_run_block(*t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda t: _run_block(*t), tasks))
    P, p, c, rel = (np.concatenate(col) for col in zip(*parts))
    return SampleSet(fam.name, fam.keys, P, p, c, rel)


def sample_unital(n: int, seed: int = 0, jobs: int = 1, with_rel: bool = True) -> SampleSet:
    return sample_family(FamilySpec("unital"), n, seed, jobs, with_rel)


def sample_nonunital(n: int, seed: int = 0, jobs: int = 1, with_rel: bool = True) -> SampleSet:
    return sample_family(FamilySpec("nonunital"), n, seed, jobs, with_rel)


# ---------------------------------------------------------------- envelopes


@dataclass(frozen=True, eq=False)
class RegionCurve:
    """Per-bin coherence range; ``bins`` rows are (purity_lo, purity_hi, c_min, c_max, count)."""

    family: str
    bins: np.ndarray
    low_coverage: np.ndarray

    def covered(self) -> np.ndarray:
        return self.bins[~self.low_coverage]

    def locate(self, purity) -> np.ndarray:
        """Bin index per purity value; -1 outside the binned range."""
        purity = np.asarray(purity, dtype=float)
        lo, hi = self.bins[0, 0], self.bins[-1, 1]
        k = len(self.bins)
        idx = np.floor((purity - lo) / (hi - lo) * k).astype(int) if hi > lo else np.zeros(purity.shape, int)
        idx = np.where(purity == hi, k - 1, idx)
        return np.where((purity < lo) | (purity > hi), -1, np.clip(idx, 0, k - 1))


def region_envelope(samples, bin_count=DEFAULT_BINS, purity_range=None, min_count=MIN_COUNT,
                    family=None) -> RegionCurve:
    """Uniform purity bins over the observed (or given) range with per-bin min/max coherence."""
    purity, c, name = _columns(samples)
    if purity.size == 0:
        raise ValueError("region_envelope needs at least one sample")
    if purity.size < 100:
        log.warning("only %d samples; envelope will be coarse", purity.size)
    if bin_count < 1:
        raise ValueError("bin_count must be positive")
    lo, hi = purity_range if purity_range is not None else (purity.min(), purity.max())
    if hi <= lo:
        hi = lo + 1e-12
    edges = np.linspace(lo, hi, bin_count + 1)
    curve = RegionCurve(family or name, np.column_stack([edges[:-1], edges[1:], np.zeros((bin_count, 3))]),
                        np.zeros(bin_count, bool))
    idx = curve.locate(purity)
    keep = idx >= 0
    idx, cv = idx[keep], c[keep]
    count = np.bincount(idx, minlength=bin_count)
    cmin = np.full(bin_count, np.inf)
    cmax = np.full(bin_count, -np.inf)
    np.minimum.at(cmin, idx, cv)
    np.maximum.at(cmax, idx, cv)
    empty = count == 0
    cmin[empty] = np.nan
    cmax[empty] = np.nan
    bins = np.column_stack([edges[:-1], edges[1:], cmin, cmax, count.astype(float)])
    return RegionCurve(curve.family, bins, count < min_count)


def _columns(samples):
    if isinstance(samples, SampleSet):
        return samples.purity, samples.c_l1, samples.family
    rows = list(samples)
    if not rows:
        return np.empty(0), np.empty(0), ""
    return (np.array([s.purity for s in rows]), np.array([s.c_l1 for s in rows]), rows[0].family)


@dataclass(frozen=True)
class Containment:
    checked: int
    skipped: int
    violations: int
    worst: float  # largest distance outside the outer envelope

    @property
    def ok(self) -> bool:
        return self.violations == 0


def containment(outer: RegionCurve, samples, tol=CONTAINMENT_TOL) -> Containment:
    """Check every sample against the outer envelope, skipping its low-coverage bins.

    Samples whose purity lies outside the outer range by more than ``tol``
    count as violations.
    """
    purity, c, _ = _columns(samples)
    lo, hi = outer.bins[0, 0], outer.bins[-1, 1]
    idx = outer.locate(np.clip(purity, lo, hi))
    outside = (purity < lo - tol) | (purity > hi + tol)
    skip = ~outside & outer.low_coverage[idx]
    use = ~outside & ~skip
    b = outer.bins[idx[use]]
    dist = np.maximum(b[:, 2] - c[use], c[use] - b[:, 3])
    over = dist > tol
    worst = float(max(dist.max(initial=0.0), np.inf if outside.any() else 0.0))
    return Containment(int(use.sum()), int(skip.sum()), int(over.sum() + outside.sum()), worst)


# ---------------------------------------------------------------- boundaries


def unital_cmax(purity):
    """Largest unital coherence at a given purity: ``min(1, sqrt(4P - 1))``."""
    p = np.asarray(purity, dtype=float)
    return np.minimum(1.0, np.sqrt(np.clip(4 * p - 1, 0.0, None)))


def unital_cmin(purity):
    p = np.asarray(purity, dtype=float)
    return np.sqrt(np.clip(2 * p - 1, 0.0, None))


def unital_grid_oracle(edges, step=1e-3):
    """Per-bin (c_min, c_max) of unital channels by dense grid search.

    For each ``(lx, ly)`` on the grid, CP allows ``lz`` in
    ``[-1 + |lx + ly|, 1 - |lx - ly|]``; coherence ``max(|lx|, |ly|)`` is
    constant along that segment while purity sweeps an interval.
    The segment set is symmetric under ``(lx, ly) -> (-lx, -ly)``, so half
    the grid suffices.
    """
    g = np.arange(-1.0, 1.0 + step / 2, step)
    lx, ly = np.meshgrid(g, g[g >= -step / 2], indexing="ij")
    lx, ly = lx.ravel(), ly.ravel()
    zlo = -1.0 + np.abs(lx + ly)
    zhi = 1.0 - np.abs(lx - ly)
    ok = zlo <= zhi + 1e-12
    lx, ly, zlo, zhi = lx[ok], ly[ok], zlo[ok], zhi[ok]
    z2min = np.where((zlo <= 0) & (zhi >= 0), 0.0, np.minimum(zlo * zlo, zhi * zhi))
    z2max = np.maximum(zlo * zlo, zhi * zhi)
    base = 0.25 * (1 + lx * lx + ly * ly)
    pmin, pmax = base + 0.25 * z2min, base + 0.25 * z2max
    c = np.maximum(np.abs(lx), np.abs(ly))
    order = np.argsort(pmin)
    pmin, pmax, c = pmin[order], pmax[order], c[order]
    edges = np.asarray(edges, dtype=float)
    out = np.full((len(edges) - 1, 2), np.nan)
    for k in range(len(edges) - 1):
        stop = np.searchsorted(pmin, edges[k + 1], side="right")
        hit = pmax[:stop] >= edges[k]
        if hit.any():
            cs = c[:stop][hit]
            out[k] = cs.min(), cs.max()
    return out


ANALYTIC_CURVES = {
    "decoherence": lambda p: np.sqrt(np.clip(2 * p - 1, 0.0, None)),
    "phase_flip": lambda p: np.sqrt(np.clip(2 * p - 1, 0.0, None)),
    "fio3": lambda p: np.sqrt(np.clip(2 * p - 1, 0.0, None)),
    "fio4": lambda p: np.sqrt(np.clip(2 * p - 1, 0.0, None)),
    "depolarizing": lambda p: np.sqrt(np.clip((4 * p - 1) / 3, 0.0, None)),
    "amplitude_damping": lambda p: np.clip(2 * p - 1, 0.0, None) ** 0.25,
}

CURVE_RANGES = {"depolarizing": (0.25, 1.0)}


def boundary(spec: FamilySpec, bins: int = DEFAULT_BINS, n: int = 100_000, seed: int = 0, jobs: int = 1):
    """Rows ``(purity, c_min, c_max)`` describing a family's CoPu boundary.

    One-parameter families with a closed relation give a curve; unital
    channels use the grid-search oracle; other families use a sampled
    envelope (bin midpoints, covered bins only).
    """
    fam, fixed = resolve(spec)
    if fam.name in ANALYTIC_CURVES and not fixed:
        lo, hi = CURVE_RANGES.get(fam.name, (0.5, 1.0))
        p = np.linspace(lo, hi, bins)
        c = ANALYTIC_CURVES[fam.name](p)
        return np.column_stack([p, c, c])
    if fam.name == "homogenization" and _is_ad_like(fixed):
        p = np.linspace(0.5, 1.0, bins)
        c = ANALYTIC_CURVES["amplitude_damping"](p)
        return np.column_stack([p, c, c])
    if fam.name == "unital" and not fixed:
        edges = np.linspace(0.25, 1.0, bins + 1)
        env = unital_grid_oracle(edges)
        return np.column_stack([0.5 * (edges[:-1] + edges[1:]), env])
    curve = region_envelope(sample_family(spec, n, seed, jobs, with_rel=False), bins)
    b = curve.covered()
    return np.column_stack([0.5 * (b[:, 0] + b[:, 1]), b[:, 2], b[:, 3]])


def _is_ad_like(fixed):
    t1 = fixed.get("T1", 1.0)
    t2 = fixed.get("T2", 2.0)
    return "t" not in fixed and fixed.get("omega", 1.0) == 1.0 and math.isclose(t2, 2 * t1)


# ---------------------------------------------------------------- duality


@dataclass(frozen=True)
class DualityFit:
    varpi: float
    varphi: float
    residual_max: float
    light_cone_ok: bool

    @property
    def cone_slope(self) -> float:
        """``sqrt(varpi / varphi)``, the bound on ``C / sqrt(P)``."""
        return math.sqrt(self.varpi / self.varphi) if self.varphi > 0 else math.inf


def duality_fit(samples, cond_limit=1e10) -> DualityFit:
    """Least-squares fit of ``varpi * P - varphi * C^2 = 1``."""
    purity, c, _ = _columns(samples)
    if purity.size < 2:
        raise DegenerateDesignError("need at least two samples")
    A = np.column_stack([purity, -c * c])
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= s[0] / cond_limit:
        raise DegenerateDesignError("samples are collinear in (P, C^2); the relation is not identifiable")
    (varpi, varphi), *_ = np.linalg.lstsq(A, np.ones_like(purity), rcond=None)
    residual = float(np.max(np.abs(A @ np.array([varpi, varphi]) - 1.0)))
    fit = DualityFit(float(varpi), float(varphi), residual, True)
    ok = bool(np.all(c / np.sqrt(purity) <= fit.cone_slope + 1e-9))
    return DualityFit(fit.varpi, fit.varphi, residual, ok)

