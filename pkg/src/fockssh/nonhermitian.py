"""Non-Hermitian eigensystem with balanced gain and loss.

In the displaced basis ``phi0 = D|0,down>``, ``phi1(n) = D|n,up>``,
``phi2(n) = D|n+1,down>`` the Hamiltonian ``H - i gamma sz`` is a scalar
``i gamma`` on ``phi0`` plus the 2x2 blocks::

    h_n = [[-i gamma, b_n], [b_n, i gamma]],   b_n = J2 sqrt(n+1)

so everything here is block algebra.  Eigenvectors are stored as their two
block coordinates; full Fock-space vectors are assembled on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, NamedTuple

import numpy as np

from .errors import CutoffTooSmall, EpUnresolvable
from .fock import FockCutoff, ModelParams, SpinBosonState, build_displacement, displacement_boson

EP_TOL = 1e-9


class PTPhase(str, Enum):
    PTS = "PTS"
    PTB = "PTB"
    CRITICAL = "critical"


def classify_pt_phase(params: ModelParams, ep_tol: float = EP_TOL) -> tuple[PTPhase, list[int]]:
    """Phase of the block family and the exceptional-point index, if any.

    ``n_c`` is an EP when ``|J2| sqrt(n_c+1)`` equals ``gamma`` to within
    ``ep_tol * |J2|``; at most one block can satisfy this.
    """
    j2, g = abs(params.J2), params.gamma
    if abs(g - j2) <= ep_tol * j2:
        phase = PTPhase.CRITICAL
    elif g < j2:
        phase = PTPhase.PTS
    else:
        phase = PTPhase.PTB
    ep = []
    if g > 0:
        n_c = int(round((g / j2) ** 2)) - 1
        if n_c >= 0 and abs(j2 * np.sqrt(n_c + 1.0) - g) <= ep_tol * j2:
            ep.append(n_c)
    return phase, ep


def block_eigenvalues(params: ModelParams, n: np.ndarray) -> np.ndarray:
    """``E_{n,+}`` on the principal branch: real or on the positive imaginary axis."""
    arg = params.J2**2 * (np.asarray(n, dtype=float) + 1.0) - params.gamma**2
    return np.sqrt(arg.astype(complex))


@dataclass(frozen=True, eq=False)
class SubspaceBlock:
    n: int
    h: np.ndarray
    at_ep: bool
    jordan: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def propagator(self, t: float) -> np.ndarray:
        """``exp(-i h t)``; linear in ``t`` at the EP where ``h`` is nilpotent."""
        if self.jordan is not None:
            P, J, P_inv = self.jordan
            return P @ (np.eye(2) - 1j * t * J) @ P_inv
        w, v = np.linalg.eig(self.h)
        return v @ np.diag(np.exp(-1j * w * t)) @ np.linalg.inv(v)


def subspace_block(params: ModelParams, n: int, ep_tol: float = EP_TOL) -> SubspaceBlock:
    b = params.J2 * np.sqrt(n + 1.0)
    g = params.gamma
    h = np.array([[-1j * g, b], [b, 1j * g]])
    _, ep = classify_pt_phase(params, ep_tol)
    if n not in ep:
        return SubspaceBlock(n, h, False)
    # b = s*gamma at the EP; the coalesced eigenvector is [1, i s]
    s = np.sign(params.J2)
    P = np.array([[1, 0], [1j * s, 1]])
    P_inv = np.array([[1, 0], [-1j * s, 1]])
    J = s * g * np.array([[0, 1], [0, 0]], dtype=complex)
    return SubspaceBlock(n, h, True, (P, J, P_inv))


class EigenMode(NamedTuple):
    n: int
    branch: int  # +1 or -1
    eigenvalue: complex
    right: SpinBosonState
    left: SpinBosonState


@dataclass(frozen=True, eq=False)
class BiorthoEigenSystem:
    """Biorthonormal eigensystem of ``H_NH`` on ``n_levels`` blocks.

    Mode arrays are flat with blocks in order and the ``+`` branch first.
    ``right_coords[:, k]`` / ``left_coords[:, k]`` hold the coefficients of
    mode ``k`` on ``(phi1(n), phi2(n))``.  The EP block, if any, is left out of
    the mode arrays and listed in ``ep_indices``.
    """

    params: ModelParams
    cutoff: FockCutoff  # with n_active resolved
    n: np.ndarray
    branch: np.ndarray
    eigenvalues: np.ndarray
    right_coords: np.ndarray
    left_coords: np.ndarray
    ep_indices: list[int]
    pt_phase: PTPhase
    n_levels: int
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def bound_eigenvalue(self) -> complex:
        return 1j * self.params.gamma

    @property
    def displacement(self) -> np.ndarray:
        return displacement_boson(self.params.alpha, self.cutoff.n_max)

    @property
    def trusted(self) -> np.ndarray:
        """Modes whose displaced states fit inside the active band."""
        return self.n + 1 <= self.cutoff.n_active

    def bound_vector(self) -> np.ndarray:
        v = np.zeros(self.cutoff.dim, dtype=complex)
        v[1::2] = self.displacement[:, 0]
        return v

    def block_vectors(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Fock-space ``phi1(n)``, ``phi2(n)``."""
        d = self.displacement
        phi1 = np.zeros(self.cutoff.dim, dtype=complex)
        phi2 = np.zeros(self.cutoff.dim, dtype=complex)
        phi1[0::2] = d[:, n]
        phi2[1::2] = d[:, n + 1]
        return phi1, phi2

    def _assemble(self, coords: np.ndarray) -> np.ndarray:
        d = self.displacement
        n = self.n
        out = np.zeros((self.cutoff.dim, n.size), dtype=complex)
        out[0::2, :] = d[:, n] * coords[0]
        out[1::2, :] += d[:, n + 1] * coords[1]
        return out

    def right_vectors(self) -> np.ndarray:
        if "R" not in self._cache:
            self._cache["R"] = self._assemble(self.right_coords)
        return self._cache["R"]

    def left_vectors(self) -> np.ndarray:
        if "L" not in self._cache:
            self._cache["L"] = self._assemble(self.left_coords)
        return self._cache["L"]

    @property
    def bound(self) -> tuple[complex, SpinBosonState, SpinBosonState]:
        v = SpinBosonState(self.bound_vector(), self.cutoff)
        return self.bound_eigenvalue, v, v

    @property
    def modes(self) -> list[EigenMode]:
        R, L = self.right_vectors(), self.left_vectors()
        return [
            EigenMode(
                int(self.n[k]),
                int(self.branch[k]),
                complex(self.eigenvalues[k]),
                SpinBosonState(R[:, k], self.cutoff),
                SpinBosonState(L[:, k], self.cutoff),
            )
            for k in range(self.n.size)
        ]

    def mode_index(self, n: int, branch: int) -> int:
        hit = np.nonzero((self.n == n) & (self.branch == branch))[0]
        if not hit.size:
            raise KeyError(f"mode (n={n}, branch={branch:+d}) not in eigensystem")
        return int(hit[0])


def analytic_nh_spectrum(
    params: ModelParams,
    n_levels: int | None,
    cutoff: FockCutoff,
    ep_tol: float = EP_TOL,
) -> BiorthoEigenSystem:
    """Closed-form biorthonormal eigensystem on blocks ``n < n_levels``.

    Right vectors ``[b_n, i gamma + E]`` and left vectors
    ``[b_n, conj(i gamma + E)]`` are scaled so that ``<L|R> = 1``: with
    ``z = <L|R>`` and ``s`` its principal square root, right is divided by
    ``s`` and left by ``conj(s)``.

    ``n_levels=None`` takes every block that fits in the box (``n_max``);
    blocks past the active band are kept for completeness but are not exact
    eigenvectors of the truncated matrix (see ``trusted``).
    """
    d_op = build_displacement(params.alpha, cutoff)
    resolved = d_op.cutoff
    if n_levels is None:
        n_levels = cutoff.n_max
    if not 0 <= n_levels <= cutoff.n_max:
        raise CutoffTooSmall(f"n_levels={n_levels} needs D columns up to {n_levels} > n_max={cutoff.n_max}")

    phase, ep = classify_pt_phase(params, ep_tol)
    blocks = np.array([n for n in range(n_levels) if n not in ep], dtype=int)
    e_plus = block_eigenvalues(params, blocks)
    n = np.repeat(blocks, 2)
    branch = np.tile([1, -1], blocks.size)
    E = np.column_stack([e_plus, -e_plus]).ravel()

    b = params.J2 * np.sqrt(n + 1.0)
    g = params.gamma
    r = np.vstack([b.astype(complex), 1j * g + E])
    l = np.vstack([b.astype(complex), np.conj(1j * g + E)])
    z = b**2 + (1j * g + E) ** 2  # <L|R> before scaling
    scale = b**2 + g**2
    bad = np.abs(z) <= 1e3 * np.finfo(float).eps * scale
    if bad.any():
        k = int(np.nonzero(bad)[0][0])
        raise EpUnresolvable(
            f"<L|R> = {z[k]:.3e} vanishes for block n={n[k]} (gamma={g}, J2={params.J2}) "
            f"but it was not flagged as an EP with ep_tol={ep_tol:g}; loosen ep_tol"
        )
    s = np.sqrt(z)
    return BiorthoEigenSystem(
        params=params,
        cutoff=resolved,
        n=n,
        branch=branch,
        eigenvalues=E,
        right_coords=r / s,
        left_coords=l / np.conj(s),
        ep_indices=[c for c in ep if c < n_levels],
        pt_phase=phase,
        n_levels=n_levels,
    )


def verify_pt_symmetry(
    params: ModelParams, n_levels: int, variant: Literal["balanced", "dissipative"] = "balanced"
) -> float:
    """Largest entry of ``X conj(h_n) X - h_n`` over ``n < n_levels``.

    Zero for the balanced blocks.  The dissipative blocks ``h_n - i gamma``
    are not PT symmetric and give ``2 gamma``.
    """
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    worst = 0.0
    for n in range(n_levels):
        h = subspace_block(params, n).h
        if variant == "dissipative":
            h = h - 1j * params.gamma * np.eye(2)
        worst = max(worst, float(np.max(np.abs(X @ h.conj() @ X - h))))
    return worst


def eigenstate_entropy(params: ModelParams, n: int, branch: int, cutoff: FockCutoff | None = None) -> float:
    """Spin-boson entanglement ``S/ln2`` of the normalized right eigenstate ``psi_{n,branch}``.

    ``phi1(n)`` and ``phi2(n)`` carry opposite spins and orthogonal boson
    states, so the reduced spin matrix is diagonal with weights
    ``|b_n|^2`` and ``|i gamma + E|^2``.  ``cutoff`` is accepted for interface
    symmetry with the vector-based routines and only checked.
    """
    if cutoff is not None:
        build_displacement(params.alpha, cutoff)
    _, ep = classify_pt_phase(params)
    if n in ep:
        raise EpUnresolvable(f"block n={n} is at the exceptional point; eigenstates coalesce")
    e = branch * block_eigenvalues(params, n)
    w1 = params.J2**2 * (n + 1.0)
    w2 = abs(1j * params.gamma + e) ** 2
    p = np.array([w1, w2]) / (w1 + w2)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum() / np.log(2.0))


def spectrum_table(params: ModelParams, n_levels: int, ep_tol: float = EP_TOL) -> list[tuple[int, str, complex]]:
    """``(n, branch, E)`` rows for the block family; EP blocks appear once with branch ``ep``."""
    _, ep = classify_pt_phase(params, ep_tol)
    rows: list[tuple[int, str, complex]] = []
    for n in range(n_levels):
        if n in ep:
            rows.append((n, "ep", 0j))
            continue
        e = complex(block_eigenvalues(params, n))
        rows.append((n, "+", e))
        rows.append((n, "-", -e))
    return rows
