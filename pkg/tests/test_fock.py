import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm
from scipy.stats import poisson

from fockssh import (
    ConfigError,
    CutoffTooSmall,
    FockCutoff,
    ModelParams,
    basis_state,
    build_displacement,
    build_hamiltonian,
    build_ladder_ops,
    coherent_state,
    default_cutoff,
    displaced_fock_state,
    displacement_boson,
    spin_operator,
)
from fockssh.fock import active_band, index


def mp_displacement_element(alpha, m, n):
    """<m|D(alpha)|n> for real alpha from the associated Laguerre closed form, in 40 digits."""
    mpmath.mp.dps = 40
    if m < n:
        return (-1) ** (n - m) * mp_displacement_element(alpha, n, m)
    k = m - n
    x = mpmath.mpf(alpha) ** 2
    val = (
        mpmath.sqrt(mpmath.factorial(n) / mpmath.factorial(m))
        * mpmath.mpf(alpha) ** k
        * mpmath.exp(-x / 2)
        * mpmath.laguerre(n, k, x)
    )
    return float(val)


# ---------------------------------------------------------------------------
# basis and operators


def test_index_layout_is_interleaved():
    assert [index(0, "up"), index(0, "down"), index(1, "up"), index(3, "down")] == [0, 1, 2, 7]
    c = FockCutoff(3)
    assert c.dim == 8
    v = basis_state(2, "down", c)
    assert v.amplitudes[5] == 1 and np.count_nonzero(v.amplitudes) == 1
    assert v.down[2] == 1 and not v.up.any()


def test_ladder_elements():
    c = FockCutoff(6)
    a, ad = build_ladder_ops(c)
    for n in range(1, 7):
        for spin in ("up", "down"):
            assert a.entries[index(n - 1, spin), index(n, spin)] == pytest.approx(np.sqrt(n))
            assert ad.entries[index(n, spin), index(n - 1, spin)] == pytest.approx(np.sqrt(n))
    np.testing.assert_allclose(ad.entries, a.entries.conj().T)


def test_truncated_commutator():
    c = FockCutoff(9)
    a, ad = build_ladder_ops(c)
    comm = a.entries @ ad.entries - ad.entries @ a.entries
    expected = np.ones(c.dim)
    expected[-2:] = -c.n_max
    np.testing.assert_allclose(comm, np.diag(expected), atol=1e-12)


def test_spin_operators_act_within_cell():
    c = FockCutoff(2)
    sp = spin_operator("+", c).entries
    assert sp[index(1, "up"), index(1, "down")] == 1
    assert np.count_nonzero(sp) == 3
    sz = spin_operator("z", c).entries
    np.testing.assert_array_equal(np.diag(sz).real, [1, -1, 1, -1, 1, -1])
    with pytest.raises(ConfigError):
        spin_operator("w", c)


def test_model_params_validation():
    p = ModelParams(1.0, 0.2)
    assert p.alpha == pytest.approx(-5.0)
    assert p.with_gamma(0.3).gamma == 0.3
    with pytest.raises(ConfigError):
        ModelParams(1.0, 0.0)
    with pytest.raises(ConfigError):
        ModelParams(1.0, 0.2, -0.1)
    with pytest.raises(ConfigError):
        ModelParams(float("nan"), 0.2)


def test_cutoff_limits():
    with pytest.raises(ConfigError):
        FockCutoff(-1)
    with pytest.raises(ConfigError):
        FockCutoff(5000)  # dimension 10002 > dense limit
    with pytest.raises(ConfigError):
        FockCutoff(10, n_active=11)


def test_default_cutoff_covers_displaced_expansion():
    # |50,down> at alpha=-5 overlaps displaced states up to n ~ 200
    c = default_cutoff(-5.0, 50)
    assert c.n_max == 629
    assert default_cutoff(-5.0, 10).n_max == 448
    assert default_cutoff(0.0).n_max == 128


# ---------------------------------------------------------------------------
# displacement operator


def test_identity_at_zero_displacement():
    np.testing.assert_allclose(displacement_boson(0.0, 30), np.eye(31), atol=1e-15)


@pytest.mark.parametrize("n_max", [80, 128, 256])
def test_vacuum_column_is_poisson(n_max):
    d = displacement_boson(-5.0, n_max)
    np.testing.assert_allclose(d[:, 0] ** 2, poisson.pmf(np.arange(n_max + 1), 25.0), atol=1e-10)


@pytest.mark.parametrize("alpha", [-5.0, -0.5, 1.3, 4.0])
def test_laguerre_elements_match_mpmath(alpha):
    d = displacement_boson(alpha, 60)
    for m, n in [(0, 0), (3, 0), (0, 7), (10, 4), (4, 10), (25, 25), (30, 12), (40, 39)]:
        assert d[m, n] == pytest.approx(mp_displacement_element(alpha, m, n), abs=1e-13)


@pytest.mark.parametrize("alpha", [-6.0, -5.0, -2.0, 0.7, 3.0, 6.0])
def test_laguerre_matches_matrix_exponential_on_band(alpha):
    n_max = 160
    lag = displacement_boson(alpha, n_max, "laguerre")
    band = active_band(lag, 1e-10)
    assert band >= 15
    ref = displacement_boson(alpha, n_max, "expm")
    np.testing.assert_allclose(lag[:, : band + 1], ref[:, : band + 1], atol=1e-8)


def test_displacement_inverse_on_band():
    n_max = 200
    d_plus = displacement_boson(-3.0, n_max)
    d_minus = displacement_boson(3.0, n_max)
    band = min(active_band(d_plus, 1e-10), active_band(d_minus, 1e-10))
    prod = d_minus @ d_plus
    np.testing.assert_allclose(prod[: band + 1, : band + 1], np.eye(band + 1), atol=1e-9)
    # D(-alpha) = D(alpha)^T for real alpha
    np.testing.assert_allclose(d_minus, d_plus.T, atol=1e-14)


def test_displaced_fock_states_orthonormal():
    c = FockCutoff(200)
    vecs = np.array([displaced_fock_state(-5.0, n, "down", c).amplitudes for n in range(11)])
    np.testing.assert_allclose(vecs.conj() @ vecs.T, np.eye(11), atol=1e-12)


def test_large_displacement_stays_finite():
    d = displacement_boson(-20.0, 1200)
    assert np.isfinite(d).all()
    assert d[:, 0] ** 2 @ np.arange(1201) == pytest.approx(400.0, rel=1e-10)


def test_active_band_shrinks_with_small_box():
    op = build_displacement(-5.0, FockCutoff(128))
    assert op.cutoff.n_active == 15
    assert build_displacement(-5.0, FockCutoff(256)).cutoff.n_active == 88


def test_cutoff_too_small_guard():
    with pytest.raises(CutoffTooSmall, match="column n=0"):
        build_displacement(-5.0, FockCutoff(30))
    with pytest.raises(CutoffTooSmall):
        build_displacement(-5.0, FockCutoff(128, n_active=40))
    with pytest.raises(CutoffTooSmall):
        displaced_fock_state(-5.0, 20, "up", FockCutoff(128))


def test_coherent_state_mean():
    c = FockCutoff(200)
    psi = coherent_state(-5.0, "down", c)
    assert psi.is_normalized(1e-12)
    assert not psi.up.any()
    assert (np.abs(psi.down) ** 2) @ np.arange(201) == pytest.approx(25.0, rel=1e-12)


# ---------------------------------------------------------------------------
# Hamiltonians


def test_hamiltonian_elements():
    p = ModelParams(1.0, 0.2, 0.3)
    c = FockCutoff(5)
    h = build_hamiltonian(p, c).entries
    assert h[index(2, "up"), index(2, "down")] == 1.0
    assert h[index(2, "up"), index(3, "down")] == pytest.approx(0.2 * np.sqrt(3))
    assert h[index(3, "up"), index(2, "down")] == 0
    # intracell bonds (2n, 2n+1) sit on the first superdiagonal, intercell
    # bonds (n,up)-(n+1,down) = (2n, 2n+3) on the third
    intra = np.zeros(c.dim - 1)
    intra[0::2] = 1.0
    inter = np.zeros(c.dim - 3)
    inter[0::2] = 0.2 * np.sqrt(np.arange(1, c.n_max + 1))
    np.testing.assert_allclose(np.diag(h, 1), intra, atol=1e-15)
    np.testing.assert_allclose(np.diag(h, 3), inter, atol=1e-15)
    assert not np.diag(h, 2).any()
    assert np.count_nonzero(np.triu(h, 1)) == 2 * c.n_max + 1


def test_hamiltonian_matches_operator_algebra():
    p = ModelParams(0.7, 0.3, 0.25)
    c = FockCutoff(12)
    a, ad = build_ladder_ops(c)
    sx, sz = spin_operator("x", c).entries, spin_operator("z", c).entries
    sp, sm = spin_operator("+", c).entries, spin_operator("-", c).entries
    h_ref = p.J1 * sx + p.J2 * (ad.entries @ sm + a.entries @ sp)
    np.testing.assert_allclose(build_hamiltonian(p, c).entries, h_ref, atol=1e-15)
    np.testing.assert_allclose(build_hamiltonian(p, c, "balanced_nh").entries, h_ref - 1j * p.gamma * sz, atol=1e-15)


def test_dissipative_is_balanced_shifted():
    p = ModelParams(1.0, 0.2, 0.15)
    c = FockCutoff(20)
    diff = build_hamiltonian(p, c, "dissipative").entries - build_hamiltonian(p, c, "balanced_nh").entries
    np.testing.assert_allclose(diff, -1j * p.gamma * np.eye(c.dim), atol=1e-15)


def test_hermitian_flag_and_chiral_structure():
    c = FockCutoff(30)
    h = build_hamiltonian(ModelParams(1.0, 0.2), c)
    assert h.hermitian
    sz = spin_operator("z", c).entries
    np.testing.assert_allclose(sz @ h.entries @ sz, -h.entries, atol=1e-15)
    with pytest.raises(ValueError):
        h.entries[0, 0] = 1.0  # read-only
    with pytest.raises(ConfigError):
        build_hamiltonian(ModelParams(1.0, 0.2), c, "lossy")


def test_displacement_maps_to_bare_jc():
    # D^dag H D = J2 (a^dag s- + a s+) on the band, i.e. the drive is removed
    p = ModelParams(1.0, 0.2)
    c = FockCutoff(256)
    dop = build_displacement(p.alpha, c)
    band = dop.cutoff.n_active
    d = dop.entries
    h_jc = build_hamiltonian(ModelParams(0.0, 0.2), c).entries
    mapped = d.conj().T @ build_hamiltonian(p, c).entries @ d
    k = 2 * (band - 2)
    np.testing.assert_allclose(mapped[:k, :k], h_jc[:k, :k], atol=1e-9)


# ---------------------------------------------------------------------------
# properties


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(-4.0, 4.0), n=st.integers(0, 10), m=st.integers(0, 10))
def test_displacement_symmetry_property(alpha, n, m):
    d = displacement_boson(alpha, 120)
    assert d[m, n] == pytest.approx((-1) ** (m - n) * d[n, m], abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(-4.0, 4.0), cols=st.integers(0, 15))
def test_displacement_columns_unit_norm_property(alpha, cols):
    d = displacement_boson(alpha, 150)
    assert np.linalg.norm(d[:, cols]) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(
    j1=st.floats(-2.0, 2.0),
    j2=st.floats(0.05, 1.0),
    g=st.floats(0.0, 1.0),
    n_max=st.integers(1, 20),
)
def test_hamiltonian_structure_property(j1, j2, g, n_max):
    c = FockCutoff(n_max)
    h = build_hamiltonian(ModelParams(j1, j2, g), c, "balanced_nh").entries
    np.testing.assert_allclose(h - np.diag(np.diag(h)), (h - np.diag(np.diag(h))).T, atol=0)
    np.testing.assert_allclose(np.diag(h), -1j * g * np.tile([1, -1], n_max + 1), atol=0)
    assert not np.triu(h, 4).any() and not np.tril(h, -4).any()


def test_expm_path_is_independent_of_laguerre():
    # a direct expm of alpha (a^dag - a) in a generous box reproduces the cached path
    a = np.diag(np.sqrt(np.arange(1, 301, dtype=float)), 1)
    ref = expm(-2.5 * (a.T - a))[:40, :40]
    np.testing.assert_allclose(displacement_boson(-2.5, 300)[:40, :40], ref, atol=1e-12)
