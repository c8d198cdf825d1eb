import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copu.channels import AffineChannel, KrausChannel, affine_to_choi, kraus_to_choi, singlet
from copu.errors import NotHermitianError
from copu.metrics import (
    batch_metrics,
    channel_l1_closed,
    channel_purity_closed,
    channel_report,
    concurrence,
    decomposition_residual,
    l1_coherence,
    purity,
    rel_entropy_coherence,
    subsystem_coherence,
)

from conftest import l1_ref, purity_ref, random_state

unit = st.floats(-1, 1, allow_nan=False)


def test_singlet_values():
    rep = channel_report(kraus_to_choi(KrausChannel((np.eye(2),))))
    assert rep.c_l1 == pytest.approx(1.0, abs=1e-15)
    assert rep.purity == pytest.approx(1.0, abs=1e-15)
    assert rep.c_rel == pytest.approx(1.0, abs=1e-12)
    assert concurrence(singlet()) == pytest.approx(1.0, abs=1e-12)


def test_plus_state_coherence():
    plus = np.full((2, 2), 0.5)
    assert l1_coherence(plus) == pytest.approx(1.0)
    assert rel_entropy_coherence(plus) == pytest.approx(1.0)
    assert purity(plus) == pytest.approx(1.0)
    assert l1_coherence(np.eye(2) / 2) == 0.0


def test_metrics_against_reference(rng):
    for _ in range(50):
        rho = random_state(rng, 4)
        assert l1_coherence(rho) == pytest.approx(l1_ref(rho), abs=1e-14)
        assert purity(rho) == pytest.approx(purity_ref(rho), abs=1e-14)
        assert rel_entropy_coherence(rho) >= 0.0


def test_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        l1_coherence([[0, 1], [0, 0]])


@settings(max_examples=200, deadline=None)
@given(st.tuples(unit, unit, unit), st.tuples(unit, unit, unit))
def test_closed_forms_match_choi(lam, tau):
    ch = AffineChannel(lam, tau)
    rho = affine_to_choi(ch).rho
    assert channel_l1_closed(ch) == pytest.approx(l1_ref(rho), abs=1e-12)
    assert channel_purity_closed(ch) == pytest.approx(purity_ref(rho), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.tuples(unit, unit, unit), st.tuples(unit, unit, unit))
def test_subsystem_decomposition(lam, tau):
    ch = AffineChannel(lam, tau)
    assert decomposition_residual(ch) <= 1e-12
    rep = channel_report(affine_to_choi(ch))
    assert rep.c_subsystem == pytest.approx(subsystem_coherence(ch), abs=1e-12)


def test_concurrence_of_product_state(rng):
    rho = np.kron(random_state(rng), random_state(rng))
    assert concurrence(rho) == pytest.approx(0.0, abs=1e-9)


def test_batch_metrics(rng):
    rho = np.stack([random_state(rng, 4) for _ in range(30)])
    c, p, rel = batch_metrics(rho)
    assert np.allclose(c, l1_ref(rho), atol=1e-14)
    assert np.allclose(p, purity_ref(rho), atol=1e-14)
    assert np.allclose(rel, [rel_entropy_coherence(r) for r in rho], atol=1e-10)
    assert np.all(np.isnan(batch_metrics(rho, with_rel=False)[2]))


def test_amplitude_damping_closed_form():
    eta = 0.25
    ch = AffineChannel((math.sqrt(1 - eta),) * 2 + (1 - eta,), (0, 0, eta))
    assert channel_l1_closed(ch) == pytest.approx(math.sqrt(1 - eta))
    assert channel_purity_closed(ch) == pytest.approx(0.25 * (1 + 2 * (1 - eta) + (1 - eta) ** 2 + eta**2))
