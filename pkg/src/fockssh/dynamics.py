"""Time evolution under the gain/loss Hamiltonian.

Two independent propagators are provided: the closed-form biorthogonal
expansion (:func:`evolve_analytic`) and a dense brute-force propagator
(:func:`evolve_oracle`) that knows nothing about the eigenstructure.

Raw states grow like ``exp(gamma t)``.  Every trajectory therefore stores
unit-scale amplitudes plus a per-sample ``log_scale`` and the true state is
``exp(log_scale) * amplitudes``; renormalized quantities never touch the
prefactor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.special import logsumexp

from .errors import (
    CutoffTooSmall,
    DegenerateState,
    EpProjectionUnsupported,
    IntegratorStall,
    NotReached,
    ReconstructionFailure,
    ZeroOverlap,
)
from .fock import FockCutoff, ModelParams, OperatorMatrix, SpinBosonState, build_hamiltonian
from .nonhermitian import BiorthoEigenSystem, analytic_nh_spectrum, subspace_block

Scheme = Literal["fock", "biorthogonal", "none"]


@dataclass(frozen=True, eq=False)
class ExpansionCoefficients:
    """``psi0 = c0 phi0 + sum_k c[k] R_k (+ c1 phi1(n_c) + c2 phi2(n_c))``."""

    c0: complex
    c: np.ndarray  # aligned with the eigensystem's mode arrays
    ep_part: tuple[complex, complex] | None = None
    ep_index: int | None = None
    residual: float = 0.0


@dataclass(frozen=True, eq=False)
class ObservableRecord:
    boson_dist: np.ndarray
    mean_n: float
    entropy: float
    p_bound: float = float("nan")
    p_modes: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    times: np.ndarray
    states: np.ndarray | None = None  # (len(times), dim)
    log_scale: np.ndarray | None = None
    records: list[ObservableRecord] | None = None
    normalization_scheme: Scheme = "none"
    cutoff: FockCutoff | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or (t.size > 1 and np.any(np.diff(t) <= 0)):
            raise ValueError("times must be a strictly increasing 1-d sequence")
        object.__setattr__(self, "times", t)
        for payload in (self.states, self.records):
            if payload is not None and len(payload) != t.size:
                raise ValueError("payload length does not match the time grid")

    def __len__(self):
        return self.times.size

    def state(self, k: int) -> SpinBosonState:
        return SpinBosonState(self.states[k], self.cutoff, float(self.log_scale[k]))

    def log_norms(self) -> np.ndarray:
        """``log ||Psi(t)||`` of the raw trajectory."""
        return np.log(np.linalg.norm(self.states, axis=1)) + self.log_scale

    def renormalized(self) -> np.ndarray:
        """Fock-renormalized states, one row per sample."""
        norms = np.linalg.norm(self.states, axis=1)
        if np.any(norms == 0):
            raise DegenerateState("trajectory contains a zero state")
        return self.states / norms[:, None]


def _as_times(times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.size and (t[0] < 0 or np.any(np.diff(t) <= 0)):
        raise ValueError("times must be non-negative and strictly increasing")
    return t


# ---------------------------------------------------------------------------
# expansion


def _displaced_coords(vec: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # D is real with D^T = D(-alpha), so D^dagger psi per spin component is d.T @ psi
    return d.T @ vec[0::2], d.T @ vec[1::2]


def _from_displaced(up_hat: np.ndarray, down_hat: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Fock vectors from displaced coordinates; accepts a leading batch axis."""
    up = up_hat @ d.T
    down = down_hat @ d.T
    out = np.empty(up.shape[:-1] + (2 * up.shape[-1],), dtype=complex)
    out[..., 0::2] = up
    out[..., 1::2] = down
    return out


def _scatter(eigsys: BiorthoEigenSystem, amps: np.ndarray, ep_amps=None) -> tuple[np.ndarray, np.ndarray]:
    """Displaced coordinates of ``sum_k amps[..., k] R_k`` (+ EP block) for batched ``amps``."""
    size = eigsys.cutoff.n_max + 1
    batch = amps.shape[:-1]
    up = np.zeros(batch + (size,), dtype=complex)
    down = np.zeros(batch + (size,), dtype=complex)
    n = eigsys.n
    r1, r2 = eigsys.right_coords
    # within the mode arrays each n appears exactly twice (+ then -)
    up[..., n[0::2]] = amps[..., 0::2] * r1[0::2] + amps[..., 1::2] * r1[1::2]
    down[..., n[0::2] + 1] = amps[..., 0::2] * r2[0::2] + amps[..., 1::2] * r2[1::2]
    if ep_amps is not None:
        n_c = eigsys.ep_indices[0]
        up[..., n_c] += ep_amps[0]
        down[..., n_c + 1] += ep_amps[1]
    return up, down


def expand_initial_state(
    psi0: SpinBosonState, eigsys: BiorthoEigenSystem, tol: float = 1e-8, require_trusted: bool = True
) -> ExpansionCoefficients:
    """Biorthogonal coefficients ``c0 = <phi0|psi0>``, ``c_k = <L_k|psi0>`` and the EP pair.

    Raises :class:`ReconstructionFailure` if the expansion does not rebuild
    ``psi0`` to within ``tol``, which means the eigensystem has too few
    blocks or the box is too small for ``psi0``.  With ``require_trusted``,
    any coefficient above ``tol`` on a block outside the active band raises
    :class:`CutoffTooSmall`: such a block leaves the box during evolution.
    """
    d = eigsys.displacement
    vec = psi0.amplitudes * np.exp(psi0.log_scale)
    up_hat, down_hat = _displaced_coords(vec, d)
    l1, l2 = eigsys.left_coords
    n = eigsys.n
    c = np.conj(l1) * up_hat[n] + np.conj(l2) * down_hat[n + 1]
    c0 = complex(down_hat[0])
    ep_part = ep_index = None
    if eigsys.ep_indices:
        ep_index = eigsys.ep_indices[0]
        ep_part = (complex(up_hat[ep_index]), complex(down_hat[ep_index + 1]))

    rec_up, rec_down = _scatter(eigsys, c, ep_part)
    rec_down[0] += c0
    rebuilt = _from_displaced(rec_up, rec_down, d)
    residual = float(np.linalg.norm(rebuilt - vec))
    if residual > tol:
        raise ReconstructionFailure(
            f"expansion rebuilds psi0 only to {residual:.2e} > {tol:g}; "
            f"increase n_levels ({eigsys.n_levels}) or n_max ({eigsys.cutoff.n_max})"
        )
    if require_trusted:
        loose = ~eigsys.trusted & (np.abs(c) > tol)
        if loose.any():
            worst = int(eigsys.n[loose].max())
            raise CutoffTooSmall(
                f"psi0 populates block n={worst}, beyond the active band n<={eigsys.cutoff.n_active}; "
                f"raise n_max ({eigsys.cutoff.n_max}) or use default_cutoff()"
            )
    return ExpansionCoefficients(c0, c, ep_part, ep_index, residual)


# ---------------------------------------------------------------------------
# propagation


def _ep_amplitudes(eigsys: BiorthoEigenSystem, coeffs: ExpansionCoefficients, t: np.ndarray) -> np.ndarray:
    """``exp(-i h_nc t) (c1, c2)`` for each time, shape (2, len(t))."""
    P, J, P_inv = subspace_block(eigsys.params, coeffs.ep_index).jordan
    c12 = np.array(coeffs.ep_part)
    base = P @ P_inv @ c12
    slope = P @ (-1j * J) @ P_inv @ c12
    return base[:, None] + slope[:, None] * t[None, :]


def _mode_log_weights(eigsys, coeffs, t):
    """Complex log of each mode's time-dependent coefficient, shape (len(t), n_modes)."""
    with np.errstate(divide="ignore"):
        log_c = np.log(coeffs.c.astype(complex))
    return log_c[None, :] - 1j * eigsys.eigenvalues[None, :] * t[:, None]


def evolve_analytic(
    coeffs: ExpansionCoefficients, eigsys: BiorthoEigenSystem, times, chunk: int = 256
) -> TimeSeries:
    """``Psi(t) = c0 e^{gamma t} phi0 + sum_k c_k e^{-i E_k t} R_k`` plus the linear EP block.

    States are not renormalized.  Each sample is rescaled by its largest mode
    weight, which goes into ``log_scale``.
    """
    t_all = _as_times(times)
    d = eigsys.displacement
    g = eigsys.params.gamma
    states, scales = [], []
    with np.errstate(divide="ignore"):
        log_c0 = np.log(complex(coeffs.c0)) if coeffs.c0 != 0 else -np.inf
    for start in range(0, t_all.size, chunk):
        t = t_all[start : start + chunk]
        lw = _mode_log_weights(eigsys, coeffs, t)
        lw0 = log_c0 + g * t
        cand = [lw.real.max(axis=1, initial=-np.inf), np.real(lw0) * np.ones_like(t)]
        ep_amps = None
        if coeffs.ep_part is not None:
            ep_amps = _ep_amplitudes(eigsys, coeffs, t)
            with np.errstate(divide="ignore"):
                cand.append(np.log(np.abs(ep_amps).max(axis=0)))
        log_scale = np.max(cand, axis=0)
        log_scale = np.where(np.isfinite(log_scale), log_scale, 0.0)
        with np.errstate(under="ignore"):
            amps = np.exp(lw - log_scale[:, None])
            a0 = np.exp(lw0 - log_scale) if np.isfinite(np.real(log_c0)) else np.zeros_like(t)
        if ep_amps is not None:
            ep_amps = ep_amps * np.exp(-log_scale)[None, :]
        up, down = _scatter(eigsys, amps, ep_amps)
        down[:, 0] += a0
        states.append(_from_displaced(up, down, d))
        scales.append(log_scale)
    return TimeSeries(
        t_all,
        states=np.concatenate(states) if states else np.zeros((0, eigsys.cutoff.dim), complex),
        log_scale=np.concatenate(scales) if scales else np.zeros(0),
        cutoff=eigsys.cutoff,
    )


def evolve_oracle(
    psi0: SpinBosonState,
    H: OperatorMatrix,
    times,
    method: Literal["expm", "dop853"] = "expm",
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> TimeSeries:
    """Integrate ``i dPsi/dt = H Psi`` directly from ``t = 0``.

    ``expm`` applies a scaling-and-squaring matrix exponential per step (one
    exponential per distinct step length).  ``dop853`` uses an adaptive
    8th-order Runge-Kutta with the given tolerances.  The state is rescaled
    to unit norm after every step and the log-norm is carried separately, so
    exponential growth cannot overflow.
    """
    t_all = _as_times(times)
    m = H.entries
    psi = psi0.amplitudes.astype(complex).copy()
    log_scale = psi0.log_scale
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise DegenerateState("initial state is zero")
    psi /= nrm
    log_scale += np.log(nrm)

    steppers: dict[float, np.ndarray] = {}

    def step(vec, dt):
        if dt == 0.0:
            return vec
        if method == "expm":
            key = round(dt, 12)
            if key not in steppers:
                steppers[key] = expm(-1j * dt * m)
            return steppers[key] @ vec
        sol = solve_ivp(
            lambda _, y: -1j * (m @ y), (0.0, dt), vec, method="DOP853", rtol=rtol, atol=atol
        )
        if sol.status != 0:
            raise IntegratorStall(f"DOP853 failed over a step of {dt:g}: {sol.message}")
        return sol.y[:, -1]

    if method not in ("expm", "dop853"):
        raise ValueError(f"unknown oracle method {method!r}")
    states = np.empty((t_all.size, psi.size), dtype=complex)
    scales = np.empty(t_all.size)
    t_prev = 0.0
    for k, t in enumerate(t_all):
        psi = step(psi, t - t_prev)
        nrm = np.linalg.norm(psi)
        if not np.isfinite(nrm) or nrm == 0:
            raise IntegratorStall(f"state norm became {nrm} at t={t:g}")
        psi /= nrm
        log_scale += np.log(nrm)
        states[k] = psi
        scales[k] = log_scale
        t_prev = t
    return TimeSeries(t_all, states=states, log_scale=scales, cutoff=psi0.cutoff)


# ---------------------------------------------------------------------------
# renormalization and observables


def renormalize_fock(state: SpinBosonState) -> SpinBosonState:
    nrm = np.linalg.norm(state.amplitudes)
    if nrm == 0 or not np.isfinite(nrm):
        raise DegenerateState(f"cannot renormalize a state of norm {nrm}")
    return SpinBosonState(state.amplitudes / nrm, state.cutoff)


def fock_observables(state) -> tuple[np.ndarray, float, float]:
    """Boson-number distribution, mean boson number and spin-boson entropy (natural log).

    The entropy is computed from the 2x2 reduced spin matrix, which for a
    pure state has the same spectrum as the reduced boson matrix.
    """
    vec = state.amplitudes if isinstance(state, SpinBosonState) else np.asarray(state)
    up, down = vec[0::2], vec[1::2]
    dist = np.abs(up) ** 2 + np.abs(down) ** 2
    total = dist.sum()
    dist = dist / total
    mean_n = float(np.arange(dist.size) @ dist)
    rho = np.array([[np.vdot(up, up), np.vdot(down, up)], [np.vdot(up, down), np.vdot(down, down)]]) / total
    return dist, mean_n, entropy_of(rho)


def entropy_of(rho: np.ndarray) -> float:
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-300]
    # an eigenvalue rounded just above 1 must not make a pure state negative
    return max(float(-(p * np.log(p)).sum()), 0.0)


def state_distance(a: np.ndarray, b: np.ndarray, align_phase: bool = False) -> float:
    """L2 distance; with ``align_phase`` the global phase of ``a`` is chosen to minimize it."""
    if align_phase:
        ov = np.vdot(a, b)
        if ov != 0:
            a = a * ov / abs(ov)
    return float(np.linalg.norm(a - b))


def _log_mode_numerators(coeffs, eigsys, t):
    """``log(|c_k|^2 e^{2 Im(E_k) t})`` per time and mode."""
    with np.errstate(divide="ignore"):
        lc = 2 * np.log(np.abs(coeffs.c))
    return lc[None, :] + 2 * eigsys.eigenvalues.imag[None, :] * t[:, None]


def _log_bound_numerator(coeffs, eigsys, t):
    with np.errstate(divide="ignore"):
        return 2 * np.log(abs(coeffs.c0)) + 2 * eigsys.params.gamma * t


def eigenmode_projections(
    coeffs: ExpansionCoefficients, eigsys: BiorthoEigenSystem, t
) -> tuple[np.ndarray, np.ndarray]:
    """Biorthogonal projection probabilities ``P_0(t)`` and ``P_k(t)``.

    Uses the associated-state norm ``|c0|^2 e^{2 gamma t} + sum |c_k|^2
    e^{2 Im(E_k) t}``, evaluated in log space.  Returns arrays of shape
    ``(len(t),)`` and ``(len(t), n_modes)``.
    """
    if coeffs.ep_part is not None:
        raise EpProjectionUnsupported(
            f"block n={coeffs.ep_index} is at an exceptional point; eigenmode projections need a diagonalizable H"
        )
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lm = _log_mode_numerators(coeffs, eigsys, t)
    lb = _log_bound_numerator(coeffs, eigsys, t)
    lz = logsumexp(np.column_stack([lb, lm]), axis=1)
    return np.exp(lb - lz), np.exp(lm - lz[:, None])


def _log_rest_over_bound(coeffs, eigsys, t):
    """``log(Z_rest / bound numerator)``; the EP block enters with its Fock weight."""
    terms = [_log_mode_numerators(coeffs, eigsys, t)]
    if coeffs.ep_part is not None:
        amps = _ep_amplitudes(eigsys, coeffs, t)
        with np.errstate(divide="ignore"):
            terms.append(np.log((np.abs(amps) ** 2).sum(axis=0))[:, None])
    rest = logsumexp(np.concatenate(terms, axis=1), axis=1)
    return rest - _log_bound_numerator(coeffs, eigsys, t)


def bound_probability(coeffs: ExpansionCoefficients, eigsys: BiorthoEigenSystem, t) -> np.ndarray:
    """``P_0(t)``, also defined at an exceptional point.

    At the EP the coalesced block contributes the weight of its amplitudes
    on the orthonormal pair ``phi1(n_c), phi2(n_c)``, matching the
    completeness relation used there.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return 1.0 / (1.0 + np.exp(_log_rest_over_bound(coeffs, eigsys, t)))


def stabilization_time(
    psi0: SpinBosonState,
    params: ModelParams,
    threshold: float = 0.999999,
    t_max: float = 2.0e4,
    coarse_dt: float = 0.5,
    resolution: float = 1e-3,
    eigsys: BiorthoEigenSystem | None = None,
) -> float:
    """First time ``tau`` with ``P_0(tau) > threshold``.

    Coarse scan on a ``coarse_dt`` grid, then bisection down to
    ``resolution``.  Raises :class:`ZeroOverlap` when ``psi0`` has no bound
    component and :class:`NotReached` when the threshold is not crossed by
    ``t_max``.
    """
    if eigsys is None:
        eigsys = analytic_nh_spectrum(params, None, psi0.cutoff)
    coeffs = expand_initial_state(psi0, eigsys)
    if coeffs.c0 == 0 or abs(coeffs.c0) < 1e-150:
        raise ZeroOverlap("initial state has no overlap with the bound state")
    limit = np.log((1.0 - threshold) / threshold)

    def reached(t):
        return _log_rest_over_bound(coeffs, eigsys, np.atleast_1d(t)) < limit

    if reached(0.0)[0]:
        return 0.0
    grid = np.arange(0.0, t_max + coarse_dt, coarse_dt)
    hi = None
    for start in range(1, grid.size, 4096):
        block = grid[start : start + 4096]
        hit = np.nonzero(reached(block))[0]
        if hit.size:
            hi = float(block[hit[0]])
            break
    if hi is None:
        raise NotReached(f"P_0 stays below {threshold} up to t_max={t_max:g} (gamma={params.gamma:g})")
    lo = hi - coarse_dt
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if reached(mid)[0]:
            hi = mid
        else:
            lo = mid
    return hi


def dissipative_equivalence_check(
    psi0: SpinBosonState, params: ModelParams, times, return_norms: bool = False
):
    """Compare oracle trajectories under the balanced and the purely lossy Hamiltonian.

    Returns the largest Fock-renormalized L2 distance over ``times``.  With
    ``return_norms`` also returns the largest deviation of the raw norm ratio
    ``||Psi_eff|| / ||Psi_NH||`` from ``exp(-gamma t)``, in relative terms.
    """
    cutoff = psi0.cutoff
    bal = evolve_oracle(psi0, build_hamiltonian(params, cutoff, "balanced_nh"), times)
    dis = evolve_oracle(psi0, build_hamiltonian(params, cutoff, "dissipative"), times)
    dev = float(np.max(np.linalg.norm(bal.renormalized() - dis.renormalized(), axis=1)))
    if not return_norms:
        return dev
    log_ratio = dis.log_norms() - bal.log_norms()
    ratio_err = float(np.max(np.abs(np.expm1(log_ratio + params.gamma * bal.times))))
    return dev, ratio_err


def observe(
    series: TimeSeries,
    eigsys: BiorthoEigenSystem | None = None,
    coeffs: ExpansionCoefficients | None = None,
    top_k: int = 5,
) -> TimeSeries:
    """Turn a raw trajectory into Fock-renormalized observable records.

    When the expansion is supplied, bound and top-``top_k`` mode projections
    (ranked by ``|c_k|^2``) are attached; at an EP only ``P_0`` is.
    """
    records = []
    p0 = pm = None
    keys = []
    if eigsys is not None and coeffs is not None:
        if coeffs.ep_part is None:
            p0, pm = eigenmode_projections(coeffs, eigsys, series.times)
            top = np.argsort(-np.abs(coeffs.c) ** 2, kind="stable")[:top_k]
            keys = [(int(eigsys.n[k]), "+" if eigsys.branch[k] > 0 else "-", int(k)) for k in top]
        else:
            p0 = bound_probability(coeffs, eigsys, series.times)
    for i, vec in enumerate(series.renormalized()):
        dist, mean_n, ent = fock_observables(vec)
        modes = {(n, b): float(pm[i, k]) for n, b, k in keys} if pm is not None else {}
        records.append(ObservableRecord(dist, mean_n, ent, float(p0[i]) if p0 is not None else float("nan"), modes))
    return TimeSeries(series.times, records=records, normalization_scheme="fock", cutoff=series.cutoff)
