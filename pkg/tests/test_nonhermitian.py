import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from fockssh import (
    EpUnresolvable,
    FockCutoff,
    ModelParams,
    PTPhase,
    analytic_nh_spectrum,
    classify_pt_phase,
    eigenstate_entropy,
    subspace_block,
    verify_pt_symmetry,
)
from fockssh.nonhermitian import block_eigenvalues, spectrum_table
from fockssh.validation import completeness_residual, nh_residuals

PARAMS = ModelParams(1.0, 0.2)


def test_lowest_block_eigenvalues_pts():
    e = block_eigenvalues(PARAMS.with_gamma(0.15), np.array([0]))
    assert e[0] == pytest.approx(np.sqrt(0.0175), abs=1e-15)
    assert e[0].imag == 0.0
    assert np.sqrt(0.0175) == pytest.approx(0.13229, abs=1e-5)


def test_broken_phase_imaginary_pairs():
    g = 0.5
    e = block_eigenvalues(PARAMS.with_gamma(g), np.arange(100))
    imag = np.nonzero(e.real == 0)[0]
    assert imag.tolist() == [0, 1, 2, 3, 4, 5]
    assert np.all(np.abs(e.imag) < g)
    assert np.abs(e.imag).max() == pytest.approx(np.sqrt(0.21), abs=1e-15)
    assert np.all(e.imag >= 0)  # principal branch


@pytest.mark.parametrize(
    "gamma, phase, ep",
    [(0.15, PTPhase.PTS, []), (0.5, PTPhase.PTB, []), (0.4, PTPhase.PTB, [3]), (0.2, PTPhase.CRITICAL, [0]), (0.0, PTPhase.PTS, [])],
)
def test_phase_classification(gamma, phase, ep):
    assert classify_pt_phase(PARAMS.with_gamma(gamma)) == (phase, ep)


def test_ep_tolerance_is_relative():
    g = 0.2 * np.sqrt(4.0) * (1 + 1e-11)
    assert classify_pt_phase(PARAMS.with_gamma(g))[1] == [3]
    assert classify_pt_phase(PARAMS.with_gamma(0.4 * (1 + 1e-6)))[1] == []


def test_undetected_ep_is_guarded():
    # with detection disabled the exact EP must not be divided through
    with pytest.raises(EpUnresolvable, match="n=3"):
        analytic_nh_spectrum(PARAMS.with_gamma(0.4), 10, FockCutoff(128), ep_tol=-1.0)


def test_ep_block_is_excluded_from_modes():
    eig = analytic_nh_spectrum(PARAMS.with_gamma(0.4), 10, FockCutoff(256))
    assert eig.ep_indices == [3]
    assert 3 not in eig.n.tolist()
    assert eig.n.size == 18
    with pytest.raises(KeyError):
        eig.mode_index(3, 1)


@pytest.mark.parametrize("gamma", [0.0, 0.15, 0.25, 0.5, 0.4, 0.2])
def test_residuals_and_gram(gamma):
    res, gram = nh_residuals(gamma)
    assert res < 1e-8
    assert gram < 1e-9


@pytest.mark.parametrize("gamma", [0.15, 0.5, 0.4])
def test_completeness(gamma):
    assert completeness_residual(gamma) < 1e-8


def test_completeness_fails_without_ep_projector():
    eig = analytic_nh_spectrum(PARAMS.with_gamma(0.4), None, FockCutoff(256))
    phi1, _ = eig.block_vectors(3)
    rebuilt = eig.bound_vector() * (eig.bound_vector().conj() @ phi1) + eig.right_vectors() @ (eig.left_vectors().conj().T @ phi1)
    assert np.linalg.norm(rebuilt - phi1) == pytest.approx(1.0, abs=1e-9)


def test_branch_cut_normalization():
    # in the broken phase <L|R> is negative real before scaling on the + branch;
    # scaling by 1/s and 1/conj(s) still yields +1
    eig = analytic_nh_spectrum(PARAMS.with_gamma(0.5), 8, FockCutoff(256))
    overlap = np.sum(eig.left_coords.conj() * eig.right_coords, axis=0)
    np.testing.assert_allclose(overlap, 1.0, atol=1e-14)


def test_spectral_symmetry_about_both_axes():
    for g in (0.15, 0.5):
        e = analytic_nh_spectrum(PARAMS.with_gamma(g), 30, FockCutoff(256)).eigenvalues
        key = lambda z: np.round(np.sort_complex(z), 12)
        np.testing.assert_allclose(key(-e), key(e), atol=1e-12)
        np.testing.assert_allclose(key(e.conj()), key(e), atol=1e-12)


def test_pt_symmetry_residuals():
    assert verify_pt_symmetry(PARAMS.with_gamma(0.3), 30) < 1e-15
    assert verify_pt_symmetry(PARAMS.with_gamma(0.3), 30, "dissipative") == pytest.approx(0.6)
    assert verify_pt_symmetry(PARAMS, 30) == 0.0


@pytest.mark.parametrize("gamma, n", [(0.15, 0), (0.5, 2), (0.5, 9), (0.4, 3)])
def test_block_propagator_matches_expm(gamma, n):
    blk = subspace_block(PARAMS.with_gamma(gamma), n)
    for t in (0.3, 7.0, 40.0):
        np.testing.assert_allclose(blk.propagator(t), expm(-1j * blk.h * t), rtol=1e-10, atol=1e-10)


def test_ep_block_is_nilpotent():
    blk = subspace_block(PARAMS.with_gamma(0.4), 3)
    assert blk.at_ep
    np.testing.assert_allclose(blk.h @ blk.h, 0, atol=1e-15)
    np.testing.assert_allclose(blk.propagator(2.0) @ [1, 0], [1 - 0.8, -0.8j], atol=1e-15)


def test_entropy_plateau_and_decay():
    for n in range(6):
        g_ep = 0.2 * np.sqrt(n + 1)
        for g in np.linspace(0, 0.999 * g_ep, 7):
            assert eigenstate_entropy(PARAMS.with_gamma(g), n, 1) == pytest.approx(1.0, abs=1e-12)
        beyond = [eigenstate_entropy(PARAMS.with_gamma(g), n, 1) for g in np.linspace(1.001 * g_ep, 3.0, 20)]
        assert np.all(np.diff(beyond) < 0)
    assert eigenstate_entropy(PARAMS.with_gamma(50.0), 0, 1) < 1e-3


def test_entropy_branches_agree_and_ep_raises():
    p = PARAMS.with_gamma(0.5)
    assert eigenstate_entropy(p, 1, 1) == pytest.approx(eigenstate_entropy(p, 1, -1), abs=1e-14)
    with pytest.raises(EpUnresolvable):
        eigenstate_entropy(PARAMS.with_gamma(0.4), 3, 1)


def test_entropy_from_full_vector():
    # trace out the boson from the assembled Fock-space eigenvector
    p = PARAMS.with_gamma(0.6)
    eig = analytic_nh_spectrum(p, 6, FockCutoff(256))
    r = eig.right_vectors()[:, eig.mode_index(1, 1)]
    r = r / np.linalg.norm(r)
    up, down = r[0::2], r[1::2]
    rho = np.array([[np.vdot(up, up), np.vdot(down, up)], [np.vdot(up, down), np.vdot(down, down)]])
    w = np.linalg.eigvalsh(rho)
    s = -np.sum(w * np.log2(w))
    assert eigenstate_entropy(p, 1, 1) == pytest.approx(s, abs=1e-12)


def test_spectrum_table_rows():
    rows = spectrum_table(PARAMS.with_gamma(0.4), 5)
    assert [r[1] for r in rows if r[0] == 3] == ["ep"]
    assert len(rows) == 9


@settings(max_examples=40, deadline=None)
@given(j2=st.floats(0.05, 2.0), g=st.floats(0.0, 3.0), n=st.integers(0, 40))
def test_block_biorthonormality_property(j2, g, n):
    p = ModelParams(1.0, j2, g)
    _, ep = classify_pt_phase(p)
    if n in ep or abs(j2 * np.sqrt(n + 1) - g) < 1e-6:
        return
    blk = subspace_block(p, n)
    # closed-form right and left vectors of this block
    e = block_eigenvalues(p, np.array([n]))[0]
    b = j2 * np.sqrt(n + 1)
    R = np.array([[b, b], [1j * g + e, 1j * g - e]])
    L = np.array([[b, b], [np.conj(1j * g + e), np.conj(1j * g - e)]])
    np.testing.assert_allclose(blk.h @ R, R * np.array([e, -e]), atol=1e-12 * (1 + abs(b) + g) ** 2)
    gram = L.conj().T @ R
    assert abs(gram[0, 1]) < 1e-10 * (b**2 + g**2) and abs(gram[1, 0]) < 1e-10 * (b**2 + g**2)
