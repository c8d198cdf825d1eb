"""Acceptance criteria, one test each.

References are computed here with plain numpy (``eigvalsh``, direct matrix
sums, Pauli-sum Choi states) wherever that is practical, so these tests do
not share code paths with the kernels they check. Each test records a
PASS/FAIL line that is repeated in the terminal summary.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from copu.channels import AffineChannel, affine_choi_batch, affine_to_choi
from copu.classify import is_degradable_family, nonunital_cp
from copu.explorer import containment, duality_fit, region_envelope, sample_family, unital_grid_oracle
from copu.families import FAMILIES, FamilySpec, build_batch, cmc, cnc_full_rank, construct, resolve
from copu.metrics import channel_l1_closed, channel_purity_closed, l1_coherence, purity

from conftest import affine_choi_ref, choi_ref, l1_ref, purity_ref, record

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
EDGE = 1 / math.sqrt(2)


def _psd(rho, eps=1e-10):
    return np.linalg.eigvalsh(rho)[..., 0] >= -eps


def _kraus_batch_choi(K):
    return np.stack([choi_ref(k) for k in K])


def _draw(name, n, seed, fixed=None):
    fam, fx = resolve(FamilySpec(name, fixed or {}))
    P = fam.draw(np.random.default_rng(seed), n)
    for k, v in fx.items():
        P[:, fam.column(k)] = v
    return fam, P


def _cp_cube(n, seed, tau_on=True):
    rng = np.random.default_rng(seed)
    lam_all, tau_all = [], []
    while sum(len(x) for x in lam_all) < n:
        lam = rng.uniform(-1, 1, (8192, 3))
        tau = rng.uniform(-1, 1, (8192, 3)) if tau_on else np.zeros((8192, 3))
        ok = _psd(affine_choi_batch(lam, tau))
        lam_all.append(lam[ok])
        tau_all.append(tau[ok])
    return np.concatenate(lam_all)[:n], np.concatenate(tau_all)[:n]


def test_01_closed_forms_match_choi():
    start = time.perf_counter()
    lam_u, tau_u = _cp_cube(5000, 101, tau_on=False)
    lam_n, tau_n = _cp_cube(5000, 102)
    lam, tau = np.concatenate([lam_u, lam_n]), np.concatenate([tau_u, tau_n])
    dc = dp = 0.0
    for l, t in zip(lam, tau):
        ch = AffineChannel(l, t)
        rho = affine_choi_ref(l, t)
        dc = max(dc, abs(channel_l1_closed(ch) - l1_ref(rho)))
        dp = max(dp, abs(channel_purity_closed(ch) - purity_ref(rho)))
    elapsed = time.perf_counter() - start
    ok = record(1, "closed-form C and P vs Choi", dc <= 1e-9 and dp <= 1e-9 and elapsed < 10,
                f"max dC {dc:.1e}, max dP {dp:.1e}, {len(lam)} channels, {elapsed:.1f}s")
    assert ok


def test_02_cp_condition_equivalence():
    rng = np.random.default_rng(202)
    lam = rng.uniform(-1, 1, (100_000, 3))
    tau = rng.uniform(-1, 1, (100_000, 3))
    psd = _psd(affine_choi_batch(lam, tau))
    verdict = np.array([nonunital_cp(l, t)[0] for l, t in zip(lam, tau)])
    bad = int((verdict != psd).sum())
    ok = record(2, "nonunital CP test vs PSD(Choi)", bad == 0,
                f"{bad} disagreements in {len(lam)} draws, {int(psd.sum())} CP")
    assert ok


def test_03_coherence_breaking_channels():
    rng = np.random.default_rng(303)
    lz = rng.uniform(-1, 1, 40_000)
    tz = rng.uniform(-1, 1, 40_000)
    lam = np.column_stack([np.zeros_like(lz), np.zeros_like(lz), lz])
    tau = np.column_stack([np.zeros_like(tz), np.zeros_like(tz), tz])
    rho = affine_choi_batch(lam, tau)
    keep = _psd(rho)
    rho = rho[keep][:10_000]
    c_max = float(l1_ref(rho).max())
    pt = rho.reshape(-1, 2, 2, 2, 2).transpose(0, 1, 4, 3, 2).reshape(-1, 4, 4)
    ppt = bool(_psd(pt).all())
    cex = affine_choi_ref((0, 0, 0), (1, 0, 0))
    cex_pt = cex.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    cex_ok = bool(_psd(cex_pt)) and abs(l1_ref(cex) - 1) <= 1e-12
    ok = record(3, "coherence-breaking => C = 0 and PPT", len(rho) == 10_000 and c_max <= 1e-12 and ppt and cex_ok,
                f"max C {c_max:.1e} over {len(rho)}, all PPT {ppt}, lambda=0 tau=x: PPT with C=1 {cex_ok}")
    assert ok


def test_04_maxima():
    exact = affine_to_choi(AffineChannel((1, 1, 1))).rho
    exact_ok = l1_coherence(exact) == 1.0 and purity(exact) == 1.0
    ident = choi_ref([np.eye(2)])
    results = {
        "identity C (Kraus)": (l1_ref(ident), 1.0),
        "identity P (Kraus)": (purity_ref(ident), 1.0),
        "CNC C": (l1_ref(choi_ref(cnc_full_rank(math.pi / 4, math.pi / 4)[0].ops)), math.sqrt(2)),
        "CMC C": (l1_ref(choi_ref(cmc(math.pi / 4, math.pi / 4, 0.7, 0.7)[0].ops)), 3.0),
    }
    cpo = construct(FamilySpec("cpo", dict(variant=5, theta1=0.3, theta2=1.9, phi1=0.0, phi2=0.0)))[0]
    rho = choi_ref(cpo.ops)
    results["CPO C"] = (l1_ref(rho), 1.0)
    results["CPO P"] = (purity_ref(rho), 1.0)
    worst = max(abs(float(v) - t) for v, t in results.values())
    ok = record(4, "coherence maxima", exact_ok and worst <= 1e-12,
                f"identity exact {exact_ok}, max deviation {worst:.1e}")
    assert ok


def test_05_table1_subsystem_coherence():
    worst_c = worst_t = 0.0
    for i, name in enumerate(("io", "sio", "pio", "fio1", "fio2", "fio3", "fio4", "gio")):
        fam, P = _draw(name, 1000, 500 + i)
        K = build_batch(fam, P)
        rho = _kraus_batch_choi(K)
        red = np.einsum("nijkj->nik", rho.reshape(-1, 2, 2, 2, 2))
        worst_c = max(worst_c, float(l1_ref(red).max()))
        image = np.einsum("nkij,nklj->nil", K, K.conj())  # Phi(I)
        tau_xy = np.stack([np.einsum("ij,nji->n", s, image).real / 2 for s in PAULI[:2]], axis=1)
        worst_t = max(worst_t, float(np.abs(tau_xy).max()))
    ok = record(5, "IO/SIO/PIO/FIO/GIO: zero subsystem coherence", worst_c <= 1e-12 and worst_t <= 1e-10,
                f"max subsystem C {worst_c:.1e}, max |tau_x|,|tau_y| {worst_t:.1e}")
    assert ok


def test_06_duality_fits():
    details, ok = [], True
    for name, varpi, varphi in (("decoherence", 2, 1), ("depolarizing", 4, 3), ("gio", 2, 1)):
        s = sample_family(FamilySpec(name), 1000, seed=6, with_rel=False)
        fit = duality_fit(s)
        A = np.column_stack([s.purity, -s.c_l1 ** 2])
        coef, *_ = np.linalg.lstsq(A, np.ones(len(s)), rcond=None)
        resid = float(np.abs(A @ coef - 1).max())
        cone = bool(np.all(s.c_l1 / np.sqrt(s.purity) <= math.sqrt(coef[0] / coef[1]) + 1e-9))
        good = (abs(fit.varpi - varpi) <= 1e-8 and abs(fit.varphi - varphi) <= 1e-8 and abs(coef[0] - varpi) <= 1e-8
                and abs(coef[1] - varphi) <= 1e-8 and resid <= 1e-9 and fit.residual_max <= 1e-9 and cone
                and fit.light_cone_ok)
        ok &= good
        details.append(f"{name} ({coef[0]:.9g}, {coef[1]:.9g}) resid {resid:.1e}")
    ok = record(6, "duality fits and light cone", ok, "; ".join(details))
    assert ok


def test_07_ad_and_homogenization_relation():
    eta = np.linspace(0, 1, 100)
    K = build_batch(FAMILIES["amplitude_damping"], eta[:, None])
    rho = _kraus_batch_choi(K)
    d_ad = float(np.abs(l1_ref(rho) - np.clip(2 * purity_ref(rho) - 1, 0, None) ** 0.25).max())
    t = np.linspace(0, 10, 100)
    P = np.column_stack([t, np.ones(100), 2 * np.ones(100), np.ones(100)])
    lam, tau = build_batch(FAMILIES["homogenization"], P)
    rho = np.stack([affine_choi_ref(l, s) for l, s in zip(lam, tau)])
    p = purity_ref(rho)
    d_h = float(np.abs(l1_ref(rho) - np.clip(2 * p - 1, 0, None) ** 0.25).max())
    ok = record(7, "AD: C = (2P-1)^(1/4); homogenization T2=2T1 on the same curve",
                d_ad <= 1e-9 and d_h <= 1e-9, f"AD {d_ad:.1e}, homogenization {d_h:.1e}")
    assert ok


def _concurrence_ref(rho):
    yy = np.kron(PAULI[1], PAULI[1])
    r = rho @ yy @ rho.conj() @ yy
    ev = np.sort(np.sqrt(np.clip(np.linalg.eigvals(r).real, 0, None)))[::-1]
    return max(0.0, ev[0] - ev[1] - ev[2] - ev[3])


def test_08_concurrence_equals_coherence():
    from copu.metrics import concurrence

    t = np.linspace(0, 5, 100)
    lam, tau = build_batch(FAMILIES["decoherence"], t[:, None])
    dev = dev_ref = 0.0
    for l, s in zip(lam, tau):
        rho = affine_choi_ref(l, s)
        dev = max(dev, abs(concurrence(rho) - l1_ref(rho)))
        dev_ref = max(dev_ref, abs(_concurrence_ref(rho) - l1_ref(rho)))
    ok = record(8, "decoherence: concurrence = C_l1", dev <= 1e-9 and dev_ref <= 1e-6,
                f"library {dev:.1e}, eigvals reference {dev_ref:.1e}")
    assert ok


def test_09_containments():
    n = 100_000
    s = {name: sample_family(FamilySpec(name), n, seed=0, with_rel=False)
         for name in ("io", "sio", "pio", "cnc_full", "cnc_inc", "unital")}
    parts, ok = [], True
    for outer, inner in (("io", "sio"), ("sio", "pio"), ("cnc_full", "cnc_inc")):
        res = containment(region_envelope(s[outer], 64), s[inner])
        ok &= res.ok
        parts.append(f"{inner} in {outer}: {res.violations} out, worst {res.worst:.3g}")
    env = region_envelope(s["unital"], 64)
    edges = np.append(env.bins[:, 0], env.bins[-1, 1])
    oracle = unital_grid_oracle(edges)
    m = ~env.low_coverage
    dev = float(np.abs(env.bins[m, 3] - oracle[m, 1]).max())
    formula = np.minimum(1.0, np.sqrt(np.clip(4 * env.bins[:, 1] - 1, 0, None)))
    dev_formula = float(np.abs(oracle[:, 1] - formula).max())
    c_max = float(s["unital"].c_l1.max())
    ok &= dev <= 0.03 and dev_formula <= 0.03 and c_max <= 1 + 1e-12
    parts.append(f"unital envelope vs grid oracle {dev:.4f}, oracle vs min(1, sqrt(4P-1)) {dev_formula:.4f}, "
                 f"unital max C {c_max:.15g}")
    ok = record(9, "region containments and unital envelope", ok, "; ".join(parts))
    assert ok


def test_10_degradability_threshold():
    rng = np.random.default_rng(1010)
    P = rng.uniform(0, math.pi, (10_000, 2))
    c = l1_ref(_kraus_batch_choi(build_batch(FAMILIES["two_param"], P)))
    deg = np.array([is_degradable_family(t, f) for t, f in P])
    low = deg & (c < EDGE - 1e-9)
    high = ~deg & (c > EDGE + 1e-9)
    worst = float(c[high].max()) if high.any() else float("nan")
    ok = record(10, "degradable C >= 1/sqrt2, anti-degradable C <= 1/sqrt2", not low.any() and not high.any(),
                f"degradable below: {int(low.sum())}/{int(deg.sum())}; anti-degradable above: "
                f"{int(high.sum())}/{int((~deg).sum())}, max C {worst:.4f}")
    assert ok


def test_11_discrepancy_findings():
    out = subprocess.run([sys.executable, "-m", "copu.cli", "verify", "findings"], capture_output=True, text=True)
    lines = [l for l in out.stdout.splitlines() if "FINDING" in l]
    bit = [l for l in lines if "FINDING bit_flip" in l]
    cmc_lines = [l for l in lines if "FINDING cmc" in l]
    values = all("published" in l and "oracle" in l for l in bit + cmc_lines)
    ok = record(11, "verify reports bit-flip and CMC findings", out.returncode == 0 and bit and cmc_lines and values,
                f"exit {out.returncode}, {len(lines)} findings ({len(bit)} bit-flip, {len(cmc_lines)} CMC)")
    assert ok


def test_12_determinism_across_jobs(tmp_path):
    outputs = []
    for jobs in (1, 8):
        path = tmp_path / f"jobs{jobs}.csv"
        subprocess.run([sys.executable, "-m", "copu.cli", "sample", "nonunital", "--n", "20000", "--seed", "12",
                        "--jobs", str(jobs), "--out", str(path)], check=True)
        outputs.append(path.read_bytes())
    ok = record(12, "sample CSV identical for 1 and 8 jobs", outputs[0] == outputs[1],
                f"{len(outputs[0])} bytes each")
    assert ok


@pytest.mark.slow
def test_nonunital_maximum_approaches_sqrt2():
    s = sample_family(FamilySpec("nonunital"), 1_000_000, seed=0, with_rel=False)
    assert s.c_l1.max() <= math.sqrt(2) + 1e-12
    assert s.c_l1.max() >= math.sqrt(2) - 0.05
