"""Shared brute-force references. They use only numpy, never copu kernels."""
import numpy as np
import pytest


def l1_ref(rho):
    rho = np.asarray(rho)
    off = ~np.eye(rho.shape[-1], dtype=bool)
    return np.abs(rho[..., off]).sum(axis=-1)


def purity_ref(rho):
    return np.einsum("...ij,...ji->...", rho, rho).real


def choi_ref(kraus):
    """Choi state on the singlet built from first principles, one channel at a time."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    proj = np.outer(psi, psi.conj())
    out = np.zeros((4, 4), dtype=complex)
    for k in kraus:
        big = np.kron(k, np.eye(2))
        out += big @ proj @ big.conj().T
    return out


def affine_choi_ref(lam, tau):
    """Choi state assembled from Pauli products."""
    I = np.eye(2)
    S = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    out = np.kron(I + sum(t * s for t, s in zip(tau, S)), I)
    for l, s in zip(lam, S):
        out = out - l * np.kron(s, s)
    return out / 4


def random_state(rng, d=2):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------- acceptance summary

ACCEPTANCE = {}


def record(number, title, ok, detail=""):
    """Store and print an acceptance verdict; the terminal summary repeats it."""
    ACCEPTANCE[number] = (title, bool(ok), detail)
    print(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
