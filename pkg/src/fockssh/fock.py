"""Truncated spin-boson Hilbert space.

Basis layout is interleaved with the spin index running fastest::

    index(n, up) = 2 n
    index(n, down) = 2 n + 1

so consecutive indices are consecutive sites of the synthetic SSH chain
(cell ``n`` is the pair ``(n, up), (n, down)``).  All matrices are dense
complex ``numpy`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import ConfigError, CutoffTooSmall

UP, DOWN = "up", "down"
Spin = Literal["up", "down"]
HamiltonianKind = Literal["hermitian", "balanced_nh", "dissipative"]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |up><down|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

# Largest basis we are willing to allocate densely (complex128, ~0.5 GB).
MAX_DIM = 8192


def index(n: int, spin: Spin) -> int:
    return 2 * n + (0 if spin == UP else 1)


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the driven Jaynes-Cummings chain.

    ``alpha`` is derived on every access so it can never drift from the
    couplings.
    """

    J1: float
    J2: float
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("J1", "J2", "gamma"):
            value = getattr(self, name)
            if isinstance(value, complex) or not np.isfinite(value):
                raise ConfigError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.J2 == 0.0:
            raise ConfigError("J2 must be nonzero (alpha = -J1/J2)")
        if self.gamma < 0.0:
            raise ConfigError(f"gamma must be non-negative, got {self.gamma}")

    @property
    def alpha(self) -> float:
        return -self.J1 / self.J2

    def with_gamma(self, gamma: float) -> "ModelParams":
        return replace(self, gamma=gamma)


@dataclass(frozen=True)
class FockCutoff:
    """Fock truncation ``n <= n_max``.

    ``n_active`` is the highest Fock index whose displaced states fit inside
    the box.  Leave it as ``None`` to have :func:`build_displacement` derive it
    from the column-norm test; an explicit value is checked and rejected with
    :class:`CutoffTooSmall` when it is too optimistic.
    """

    n_max: int
    tail_tol: float = 1e-10
    n_active: int | None = None

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ConfigError(f"n_max must be a non-negative integer, got {self.n_max!r}")
        if not 0.0 < self.tail_tol < 1.0:
            raise ConfigError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")
        if self.dim > MAX_DIM:
            raise ConfigError(f"basis dimension {self.dim} exceeds the dense limit {MAX_DIM}")
        if self.n_active is not None and not 0 <= self.n_active <= self.n_max:
            raise ConfigError(f"n_active={self.n_active} outside [0, n_max={self.n_max}]")

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)


def default_cutoff(alpha: float, n_init: int = 0, tail_tol: float = 1e-10) -> FockCutoff:
    """Cutoff large enough to hold every displaced Fock state reachable from ``|n_init>``.

    A state at Fock index ``n`` overlaps displaced states ``D(alpha)|m>`` with
    ``sqrt(m)`` up to about ``sqrt(n) + |alpha|``, and each of those extends to
    ``sqrt(m) + |alpha|`` in the bare Fock basis.  Eight extra units in
    ``sqrt(n)`` cover the tails down to ~1e-12.
    """
    reach = math.sqrt(n_init) + 2.0 * abs(alpha) + 8.0
    n_max = max(128, 4 * math.ceil(abs(alpha) ** 2 + n_init), math.ceil(reach**2))
    return FockCutoff(n_max=n_max, tail_tol=tail_tol)


@dataclass(frozen=True, eq=False)
class SpinBosonState:
    amplitudes: np.ndarray
    cutoff: FockCutoff
    log_scale: float = 0.0  # true state is exp(log_scale) * amplitudes

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.cutoff.dim,):
            raise ConfigError(f"state has shape {amps.shape}, expected ({self.cutoff.dim},)")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def up(self) -> np.ndarray:
        return self.amplitudes[0::2]

    @property
    def down(self) -> np.ndarray:
        return self.amplitudes[1::2]

    def norm(self) -> float:
        """Norm including the tracked prefactor (may overflow to inf)."""
        return float(np.linalg.norm(self.amplitudes) * np.exp(self.log_scale))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(np.vdot(self.amplitudes, self.amplitudes).real * np.exp(2 * self.log_scale) - 1) < tol

    def max_occupied(self, tol: float = 1e-14) -> int:
        weight = np.abs(self.up) ** 2 + np.abs(self.down) ** 2
        occupied = np.nonzero(weight > tol * weight.sum())[0]
        return int(occupied[-1]) if occupied.size else 0


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    cutoff: FockCutoff
    tag: str = "other"
    hermitian: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (self.cutoff.dim, self.cutoff.dim):
            raise ConfigError(f"operator has shape {m.shape}, expected {self.cutoff.dim} square")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.hermitian and np.max(np.abs(m - m.conj().T), initial=0.0) >= 1e-12:
            raise ConfigError(f"{self.tag} operator flagged hermitian but is not")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.entries @ other.entries, self.cutoff, "other")
        if isinstance(other, SpinBosonState):
            return SpinBosonState(self.entries @ other.amplitudes, other.cutoff, other.log_scale)
        return self.entries @ other


def basis_state(n: int, spin: Spin, cutoff: FockCutoff) -> SpinBosonState:
    if not 0 <= n <= cutoff.n_max:
        raise CutoffTooSmall(f"Fock index {n} outside the box n_max={cutoff.n_max}")
    v = np.zeros(cutoff.dim, dtype=complex)
    v[index(n, spin)] = 1.0
    return SpinBosonState(v, cutoff)


def _boson_annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1)


def build_ladder_ops(cutoff: FockCutoff) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Return ``(a, a_dagger)`` on the full spin-boson space.

    The truncation leaves ``[a, a_dagger]`` equal to the identity except for
    the top entry, which is ``-n_max``.
    """
    if cutoff.n_max < 1:
        raise ConfigError("ladder operators need n_max >= 1")
    a = np.kron(_boson_annihilation(cutoff.n_max), np.eye(2))
    return (
        OperatorMatrix(a, cutoff, "ladder"),
        OperatorMatrix(a.conj().T, cutoff, "ladder"),
    )


def spin_operator(name: str, cutoff: FockCutoff) -> OperatorMatrix:
    mats = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z, "+": SIGMA_PLUS, "-": SIGMA_MINUS}
    try:
        s = mats[name]
    except KeyError:
        raise ConfigError(f"unknown spin operator {name!r}; expected one of {sorted(mats)}") from None
    return OperatorMatrix(np.kron(np.eye(cutoff.n_max + 1), s), cutoff, "spin", hermitian=name in "xyz")


# ---------------------------------------------------------------------------
# displacement operator


def _check_alpha(alpha) -> float:
    if isinstance(alpha, complex) or np.iscomplexobj(alpha):
        raise ConfigError("only real displacements are supported")
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise ConfigError(f"alpha must be finite, got {alpha}")
    return alpha


@lru_cache(maxsize=32)
def _displacement_laguerre(alpha: float, n_max: int) -> np.ndarray:
    """Boson block of D(alpha) from closed-form matrix elements.

    For ``m = n + k >= n``::

        <m|D|n> = sqrt(n!/m!) alpha^k exp(-alpha^2/2) L_n^(k)(alpha^2)

    The Laguerre three-term recurrence is run upwards in ``n`` for all
    offsets ``k`` at once on ``g_n = sqrt(n! k!/(n+k)!) L_n^(k)(x)``, which
    stays O(1)-ish; a running log-scale absorbs the remaining growth and the
    ``alpha^k / sqrt(k!)`` prefactor is applied in log space.
    """
    size = n_max + 1
    out = np.zeros((size, size))
    if alpha == 0.0:
        np.fill_diagonal(out, 1.0)
        out.setflags(write=False)
        return out

    x = alpha * alpha
    k = np.arange(size, dtype=float)
    log_pref = k * math.log(abs(alpha)) - 0.5 * gammaln(k + 1.0) - 0.5 * x
    sign = np.where((alpha < 0) & (k % 2 == 1), -1.0, 1.0)

    g_prev = np.zeros(size)
    g = np.ones(size)
    log_scale = np.zeros(size)
    big, tiny = 1e150, 1e-150
    for n in range(size):
        kk = np.arange(size - n)
        with np.errstate(divide="ignore", under="ignore", over="ignore"):
            mag = np.abs(g[kk])
            logs = np.log(np.where(mag > 0, mag, 1.0)) + log_pref[kk] + log_scale[kk]
            vals = np.where(mag > 0, np.sign(g[kk]) * np.exp(logs), 0.0)
        out[n + kk, n] = sign[kk] * vals
        if n == size - 1:
            break
        g_next = ((2 * n + 1 + k - x) * g - np.sqrt(n * (n + k)) * g_prev) / np.sqrt((n + 1) * (n + k + 1))
        g_prev, g = g, g_next
        hi = np.abs(g) > big
        lo = (np.abs(g) < tiny) & (np.abs(g_prev) < tiny) & (g != 0)
        for mask, factor in ((hi, big), (lo, tiny)):
            if mask.any():
                g[mask] /= factor
                g_prev[mask] /= factor
                log_scale[mask] += math.log(factor)

    # upper triangle: <n|D|m> = (-1)^(m-n) <m|D|n> for real alpha
    rows, cols = np.triu_indices(size, 1)
    out[rows, cols] = np.where((cols - rows) % 2 == 1, -1.0, 1.0) * out[cols, rows]
    out.setflags(write=False)
    return out


@lru_cache(maxsize=8)
def _displacement_expm(alpha: float, n_max: int) -> np.ndarray:
    a = _boson_annihilation(n_max)
    out = expm(alpha * (a.T - a))
    out.setflags(write=False)
    return out


def displacement_boson(alpha: float, n_max: int, method: str = "laguerre") -> np.ndarray:
    """Boson-only ``(n_max+1)``-square block of D(alpha) (real for real alpha)."""
    alpha = _check_alpha(alpha)
    if method == "laguerre":
        return _displacement_laguerre(alpha, int(n_max))
    if method == "expm":
        return _displacement_expm(alpha, int(n_max))
    raise ConfigError(f"unknown displacement method {method!r}")


def active_band(d_boson: np.ndarray, tail_tol: float) -> int:
    """Highest ``n`` such that every column ``0..n`` of D passes the tail test.

    A column passes when its norm is 1 within ``tail_tol`` *and* its amplitude
    on the top two rows of the box is below ``tail_tol``.  The norm alone is
    not enough: a norm deficit of 1e-11 still leaves ~1e-5 amplitude at the
    boundary.  Returns -1 if column 0 already fails.
    """
    dev = np.abs(np.linalg.norm(d_boson, axis=0) - 1.0)
    edge = np.abs(d_boson[-2:, :]).max(axis=0)
    bad = np.nonzero((dev > tail_tol) | (edge > tail_tol))[0]
    return int(bad[0]) - 1 if bad.size else d_boson.shape[1] - 1


def build_displacement(alpha: float, cutoff: FockCutoff, method: str = "laguerre") -> OperatorMatrix:
    """D(alpha) on the spin-boson space, with the active band resolved.

    The returned operator's ``cutoff.n_active`` is the verified band.  Raises
    :class:`CutoffTooSmall` if the cutoff declares a band the box cannot hold,
    or if not even the vacuum column fits.
    """
    alpha = _check_alpha(alpha)
    d = displacement_boson(alpha, cutoff.n_max, method)
    band = active_band(d, cutoff.tail_tol)
    if band < 0 or (cutoff.n_active is not None and band < cutoff.n_active):
        col = band + 1
        dev = abs(np.linalg.norm(d[:, col]) - 1.0)
        raise CutoffTooSmall(
            f"D({alpha:g}) column n={col} has norm deviation {dev:.3e} > tail_tol={cutoff.tail_tol:g} "
            f"(n_max={cutoff.n_max}); raise n_max"
        )
    resolved = replace(cutoff, n_active=band if cutoff.n_active is None else cutoff.n_active)
    return OperatorMatrix(np.kron(d, np.eye(2)), resolved, "displacement", meta={"alpha": alpha, "method": method})


def displaced_fock_state(alpha: float, n: int, spin: Spin, cutoff: FockCutoff) -> SpinBosonState:
    """``D(alpha)|n> (x) |spin>``; ``n`` must lie inside the active band."""
    alpha = _check_alpha(alpha)
    d = displacement_boson(alpha, cutoff.n_max)
    band = active_band(d, cutoff.tail_tol)
    if cutoff.n_active is not None:
        band = min(band, cutoff.n_active)
    if not 0 <= n <= band:
        raise CutoffTooSmall(
            f"displaced Fock state n={n} outside the active band n<={band} for alpha={alpha:g}, n_max={cutoff.n_max}"
        )
    v = np.zeros(cutoff.dim, dtype=complex)
    v[(0 if spin == UP else 1) :: 2] = d[:, n]
    return SpinBosonState(v, cutoff)


def coherent_state(alpha: float, spin: Spin, cutoff: FockCutoff) -> SpinBosonState:
    return displaced_fock_state(alpha, 0, spin, cutoff)


# ---------------------------------------------------------------------------
# Hamiltonians


def build_hamiltonian(params: ModelParams, cutoff: FockCutoff, kind: HamiltonianKind = "hermitian") -> OperatorMatrix:
    """Chain Hamiltonian ``J1 sx + J2 (a^dag s- + a s+)`` plus optional gain/loss.

    ``balanced_nh`` adds ``-i gamma sz``; ``dissipative`` adds
    ``-2 i gamma |up><up|``, i.e. the balanced form shifted by ``-i gamma``.
    """
    size = cutoff.dim
    h = np.zeros((size, size), dtype=complex)
    cells = np.arange(cutoff.n_max + 1)
    up, dn = 2 * cells, 2 * cells + 1
    h[up, dn] = h[dn, up] = params.J1
    # (n, up) <-> (n+1, down) with amplitude J2 sqrt(n+1)
    hop = params.J2 * np.sqrt(cells[:-1] + 1.0)
    h[dn[1:], up[:-1]] = h[up[:-1], dn[1:]] = hop

    if kind == "hermitian":
        return OperatorMatrix(h, cutoff, "hamiltonian", hermitian=True, meta={"kind": kind})
    g = params.gamma
    if kind == "balanced_nh":
        h[up, up] -= 1j * g
        h[dn, dn] += 1j * g
    elif kind == "dissipative":
        h[up, up] -= 2j * g
    else:
        raise ConfigError(f"unknown Hamiltonian kind {kind!r}")
    return OperatorMatrix(h, cutoff, "hamiltonian", hermitian=(g == 0.0), meta={"kind": kind})
