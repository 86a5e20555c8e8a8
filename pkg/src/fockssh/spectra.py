"""Hermitian eigensystem of the driven JC chain and the isotropic SSH reference."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CutoffTooSmall
from .fock import (
    FockCutoff,
    ModelParams,
    OperatorMatrix,
    SpinBosonState,
    build_displacement,
    build_hamiltonian,
    displacement_boson,
)


class DegenerateChain(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class HermitianPair:
    n: int
    plus_state: SpinBosonState
    minus_state: SpinBosonState
    energy: float  # the + branch; the - branch is -energy


@dataclass(frozen=True, eq=False)
class HermitianEigenSystem:
    zero_mode: SpinBosonState
    pairs: list[HermitianPair]
    params: ModelParams

    @property
    def n_levels(self) -> int:
        return len(self.pairs)

    def eigenvalues(self) -> np.ndarray:
        """Zero followed by ``+E_0, -E_0, +E_1, -E_1, ...``."""
        e = np.array([p.energy for p in self.pairs])
        return np.concatenate([[0.0], np.column_stack([e, -e]).ravel()])


@dataclass(frozen=True, eq=False)
class IsotropicChainSpectrum:
    cells: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    zero_indices: np.ndarray
    edge_states: list[tuple[str, np.ndarray]]


def _resolved_displacement(params: ModelParams, cutoff: FockCutoff):
    d_op = build_displacement(params.alpha, cutoff)
    return displacement_boson(params.alpha, cutoff.n_max), d_op.cutoff


def analytic_hermitian_spectrum(params: ModelParams, n_levels: int, cutoff: FockCutoff) -> HermitianEigenSystem:
    """Exact eigenpairs ``D(alpha)(|n,up> +- |n+1,down>)/sqrt2`` with energies ``+-J2 sqrt(n+1)``.

    The zero mode ``|alpha, down>`` is returned separately.  ``n_levels``
    pairs are built; the last one needs ``|n_levels, down>`` inside the
    active band.
    """
    d, resolved = _resolved_displacement(params, cutoff)
    if n_levels > resolved.n_active:
        raise CutoffTooSmall(
            f"n_levels={n_levels} needs displaced states up to n={n_levels}, "
            f"active band is n<={resolved.n_active} (n_max={cutoff.n_max})"
        )
    dim = resolved.dim
    zero = np.zeros(dim, dtype=complex)
    zero[1::2] = d[:, 0]
    pairs = []
    for n in range(n_levels):
        phi1 = np.zeros(dim, dtype=complex)
        phi2 = np.zeros(dim, dtype=complex)
        phi1[0::2] = d[:, n]
        phi2[1::2] = d[:, n + 1]
        plus = (phi1 + phi2) / np.sqrt(2.0)
        minus = (phi1 - phi2) / np.sqrt(2.0)
        pairs.append(
            HermitianPair(
                n,
                SpinBosonState(plus, resolved),
                SpinBosonState(minus, resolved),
                params.J2 * np.sqrt(n + 1.0),
            )
        )
    return HermitianEigenSystem(SpinBosonState(zero, resolved), pairs, params)


def zero_mode_profile(params: ModelParams, cutoff: FockCutoff) -> np.ndarray:
    """Boson-number distribution ``|<n|alpha>|^2`` of the zero mode, ``n = 0..n_max``."""
    d = displacement_boson(params.alpha, cutoff.n_max)
    return d[:, 0] ** 2


def verify_chiral_symmetry(H: OperatorMatrix) -> float:
    """Largest entry of ``sz H sz + H``.

    Exactly zero for the Hermitian chain; ``2 gamma`` once ``-i gamma sz`` is
    added, because that term commutes with ``sz`` instead of anticommuting.
    """
    m = H.entries
    sz = np.tile([1.0, -1.0], m.shape[0] // 2)
    return float(np.max(np.abs(sz[:, None] * m * sz[None, :] + m), initial=0.0))


def dense_trusted_spectrum(H: OperatorMatrix, edge_cells: int = 2, leak_tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Dense eigenpairs of a Hermitian ``H`` that do not touch the top of the box.

    Eigenvectors with more than ``leak_tol`` probability on the last
    ``edge_cells`` cells are discarded.  Besides the distorted high-energy
    states this removes the spurious zero mode the box creates at its right
    end: the last bond of the truncated chain is the weak intracell one, so
    the box edge is a topological boundary with its own edge state on the
    spin-up sublattice.

    Returns ``(eigenvalues, eigenvectors)`` sorted by ``|E|``.
    """
    w, v = np.linalg.eigh(H.entries)
    leak = (np.abs(v[-2 * edge_cells :, :]) ** 2).sum(axis=0)
    keep = leak <= leak_tol
    w, v = w[keep], v[:, keep]
    order = np.argsort(np.abs(w), kind="stable")
    return w[order], v[:, order]


def analytic_levels(J2: float, n_pairs: int) -> np.ndarray:
    """``0, +-J2 sqrt(n+1)`` for ``n < n_pairs``, ordered by ``|E|`` with + before -."""
    e = J2 * np.sqrt(np.arange(1, n_pairs + 1, dtype=float))
    return np.concatenate([[0.0], np.column_stack([e, -e]).ravel()])


def compare_to_dense(params: ModelParams, cutoff: FockCutoff, n_pairs: int | None = None) -> float:
    """Max deviation between the lowest ``2 n_pairs + 1`` trusted dense levels and the analytic ladder.

    ``n_pairs`` defaults to half of the active band.
    """
    _, resolved = _resolved_displacement(params, cutoff)
    if n_pairs is None:
        n_pairs = resolved.n_active // 2
    H = build_hamiltonian(params, resolved)
    w, _ = dense_trusted_spectrum(H)
    count = 2 * n_pairs + 1
    if w.size < count:
        raise CutoffTooSmall(f"only {w.size} trusted dense levels, need {count}")
    # compare as sorted sets: +-E are degenerate in |E| so ordering within a pair is arbitrary
    dense = np.sort(w[:count])
    exact = np.sort(analytic_levels(params.J2, n_pairs))
    return float(np.max(np.abs(dense - exact)))


# ---------------------------------------------------------------------------
# isotropic finite SSH chain


def isotropic_ssh_hamiltonian(J1: float, J2: float, cells: int) -> np.ndarray:
    """Open chain ``A0 -J1- B0 -J2- A1 -J1- B1 ...`` with ``2 cells`` sites."""
    size = 2 * cells
    h = np.zeros((size, size))
    i = np.arange(cells)
    h[2 * i, 2 * i + 1] = h[2 * i + 1, 2 * i] = J1
    h[2 * i[:-1] + 1, 2 * i[:-1] + 2] = h[2 * i[:-1] + 2, 2 * i[:-1] + 1] = J2
    return h


def isotropic_ssh_spectrum(J1: float, J2: float, cells: int, edge_fraction: float = 0.9) -> IsotropicChainSpectrum:
    """Diagonalize the open isotropic SSH chain and classify its edge states.

    An eigenvalue is near zero when its modulus is below 1/100 of the bulk
    edge (the third smallest ``|E|``).  The near-zero pair is rotated into
    sublattice-polarized combinations, which separates the left and right
    edge states even when they are numerically degenerate; each is labelled
    by which half of the chain holds more than ``edge_fraction`` of it.
    """
    if cells < 2:
        raise ValueError(f"isotropic chain needs at least 2 cells, got {cells}")
    h = isotropic_ssh_hamiltonian(J1, J2, cells)
    w, v = np.linalg.eigh(h)
    absw = np.sort(np.abs(w))
    bulk_edge = absw[2] if absw.size > 2 else 0.0
    if bulk_edge <= 0.0:
        warnings.warn(f"{cells}-cell chain has no resolvable gap; edge states not classified", DegenerateChain)
        return IsotropicChainSpectrum(cells, w, v, np.array([], dtype=int), [])

    zero_idx = np.nonzero(np.abs(w) < bulk_edge / 100.0)[0]
    edges = []
    if zero_idx.size:
        sub = v[:, zero_idx]
        sublattice = np.tile([1.0, -1.0], cells)
        _, rot = np.linalg.eigh(sub.T @ (sublattice[:, None] * sub))
        half = cells  # first half of the 2*cells sites
        for vec in (sub @ rot).T:
            p = vec**2 / np.sum(vec**2)
            left = p[:half].sum()
            if left > edge_fraction:
                edges.append(("left", vec))
            elif 1 - left > edge_fraction:
                edges.append(("right", vec))
            else:
                edges.append(("bulk", vec))
    return IsotropicChainSpectrum(cells, w, v, zero_idx, edges)
