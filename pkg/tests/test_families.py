import math

import numpy as np
import pytest

from copu.channels import AffineChannel, affine_choi_batch, kraus_to_choi
from copu.errors import ConstraintError, NotCompletelyPositiveError, UnknownFamilyError
from copu.families import (
    FAMILIES,
    Family,
    FamilySpec,
    amplitude_damping,
    build_batch,
    cmc,
    cnc_full_rank,
    cnc_incoherent,
    construct,
    decoherence,
    depolarizing,
    fio,
    homogenization,
    io_canonical,
    known_names,
    pauli_like,
    pio,
    resolve,
    sio_canonical,
    two_param_family,
)
from copu.metrics import channel_report

from conftest import choi_ref, l1_ref, purity_ref


def _oracle(channel):
    if isinstance(channel, AffineChannel):
        rho = affine_choi_batch(channel.lam[None], channel.tau[None])[0]
    else:
        rho = choi_ref(channel.ops)
    return float(l1_ref(rho)), float(purity_ref(rho))


def _check(result, c=None, p=None, tol=1e-12):
    channel, pred = result
    oc, op = _oracle(channel)
    if c is not None:
        assert oc == pytest.approx(c, abs=tol)
    if p is not None:
        assert op == pytest.approx(p, abs=tol)
    return oc, op, pred


def test_every_enum_member_is_registered():
    for member in Family:
        assert member.value in FAMILIES
    assert {"gio", "ad", "fio", "pio3", "unital_random"} <= set(known_names())


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_trusted_predictions_match_oracle(name):
    fam = FAMILIES[name]
    rng = np.random.default_rng(sum(map(ord, name)))
    P = fam.draw(rng, 1000)
    if fam.finish is not None:
        P = fam.finish(P, {})
    if fam.rejection:
        lam, tau = fam.build(P)
        keep = np.linalg.eigvalsh(affine_choi_batch(lam, tau))[:, 0] >= -1e-10
        P = P[keep]
    out = build_batch(fam, P)
    if fam.kind == "kraus":
        assert np.max(np.abs(np.einsum("nkji,nkjl->nil", out.conj(), out) - np.eye(2))) <= 1e-10
        rho = np.stack([choi_ref(k) for k in out])
    else:
        rho = affine_choi_batch(*out)
    pred = fam.predict(P)
    assert np.max(np.abs(pred["c"] - l1_ref(rho))) <= 1e-9
    if not np.all(np.isnan(pred["p"])):
        assert np.max(np.abs(pred["p"] - purity_ref(rho))) <= 1e-9
    assert np.linalg.eigvalsh(rho)[:, 0].min() >= -1e-10


def test_fio_examples():
    _check(fio(4, dict(c1=1, d1=0, c2=0, d2=1)), c=0.0)
    _check(fio(4, dict(c1=1, d1=1, c2=0, d2=0)), c=1.0, p=1.0)
    _check(fio(1, dict(a1=1, b1=0, a2=0, b2=1)), c=0.0, p=0.5)
    with pytest.raises(ConstraintError):
        fio(5, {})


def test_io_examples():
    _check(io_canonical((0, 0, 1, 0, 0), (0, 0, 1, 0)), c=1.0, p=1.0)
    _check(io_canonical((0, 0, 0, 0, 1), (0, 0, 1, 0)), c=0.0)


def test_sio_examples():
    _check(sio_canonical((1, 0, 0, 0), (1, 0)), c=1.0, p=1.0)
    _check(sio_canonical((0, 0, 1, 0), (1, 0)), c=0.0)
    _check(sio_canonical((0, 0, 0, 1), (1, 0)), c=0.0)


def test_pio_examples():
    _check(pio(1), c=0.0, p=0.5)
    _check(pio(5, theta1=0.0, theta2=math.pi / 3), c=1.0, p=1.0)
    _check(pio(6), c=1.0, p=1.0)
    _check(construct(FamilySpec("cpo", dict(variant=5, theta1=0.4, theta2=1.1, phi1=0.0, phi2=0.0))), c=1.0, p=1.0)


def test_cnc_examples():
    _check(cnc_full_rank(math.pi / 4, math.pi / 4), c=math.sqrt(2))
    _check(cnc_full_rank(0.0, 1.234), c=1.0)
    _check(cnc_full_rank(math.pi / 2, 0.0), c=0.0)
    _check(cnc_incoherent(0.0, 0.0), c=1.0, p=1.0)
    _check(cnc_incoherent(0.0, math.pi / 2), c=0.0)
    _check(cnc_incoherent(math.pi / 4, math.pi / 4), c=1.0)


def test_cmc_examples():
    _check(cmc(math.pi / 4, math.pi / 4, 0.3, 0.3), c=3.0)
    channel, _ = cmc(0.0, 0.0)
    z = np.diag([1, -1])
    assert np.allclose(kraus_to_choi(channel).rho, choi_ref([z]), atol=1e-15)
    c, _, pred = _check(cmc(math.pi / 4, -math.pi / 4))
    assert 1 - 1e-12 <= c <= 3 + 1e-12
    assert pred.purity is None and pred.stated is not None


def test_two_param_examples():
    _check(two_param_family(0.0, 0.0), c=1.0, p=1.0)
    _check(two_param_family(math.pi / 4, math.pi / 4), c=1.0, p=0.5)
    eta = 0.3
    phi = 0.5 * math.acos(2 * eta - 1)
    rho_tp = kraus_to_choi(two_param_family(0.0, phi)[0]).rho
    _, op = _oracle(amplitude_damping(eta)[0])
    assert float(purity_ref(rho_tp)) == pytest.approx(op, abs=1e-12)


def test_amplitude_damping_examples():
    _check(amplitude_damping(0.0), c=0.0, p=0.5)
    _check(amplitude_damping(1.0), c=1.0, p=1.0)
    _check(amplitude_damping(0.49), c=0.7, p=(1 + 0.2401) / 2)
    with pytest.raises(ConstraintError):
        amplitude_damping(1.5)


def test_pauli_like():
    _check(pauli_like("bit_flip", 0.0), c=1.0, p=1.0)
    _check(pauli_like("phase_flip", math.pi / 4), c=0.0, p=0.5)
    _, _, pred = _check(pauli_like("bit_flip", 0.7))
    assert pred.stated is not None and pred.stated[0] == pytest.approx(math.cos(1.4))
    with pytest.raises(ConstraintError):
        pauli_like("amplitude", 0.1)


def test_decay_families():
    _check(decoherence(0.0), c=1.0, p=1.0)
    _check(decoherence(math.log(2)), c=0.5, p=5 / 8)
    _check(decoherence(50.0), c=0.0, p=0.5)
    _check(depolarizing(0.0), c=1.0, p=1.0)
    _check(depolarizing(50.0), c=0.0, p=0.25)
    t = math.log(2)
    _check(depolarizing(t), c=0.5, p=7 / 16)


def test_homogenization():
    channel, _ = homogenization(0.0)
    assert np.allclose(channel.lam, 1) and np.allclose(channel.tau, 0)
    _check(homogenization(1.0, T1=1.0, T2=2.0, omega=1.0), c=math.exp(-0.5), p=(1 + math.exp(-2)) / 2)
    _check(homogenization(200.0), c=0.0, p=0.5)
    with pytest.raises(NotCompletelyPositiveError):
        homogenization(1.0, T1=1.0, T2=5.0)


def test_report_and_prediction_agree():
    channel, pred = amplitude_damping(0.25)
    rep = channel_report(kraus_to_choi(channel))
    assert rep.c_l1 == pytest.approx(pred.c_l1, abs=1e-12)
    assert rep.purity == pytest.approx(pred.purity, abs=1e-12)


def test_resolution_errors():
    with pytest.raises(UnknownFamilyError):
        resolve(FamilySpec("nope"))
    with pytest.raises(ConstraintError):
        resolve(FamilySpec("pio3", {"variant": 4}))
    with pytest.raises(ConstraintError):
        construct(FamilySpec("amplitude_damping", {"eta": 0.5, "zeta": 1.0}))
    fam, params = resolve(FamilySpec("fio", {"variant": 3}))
    assert fam.name == "fio3" and params == {}
