"""Scenario runner and figure data bundles.

A scenario turns a :class:`~fockssh.config.ScenarioConfig` into a
:class:`Table`, which is written as CSV or JSON with the resolved
configuration echoed in the header.  Output is deterministic: floats are
written with ``repr`` and nothing time-dependent is emitted unless
``timestamp`` is set.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .dynamics import (
    evolve_analytic,
    evolve_oracle,
    expand_initial_state,
    observe,
    stabilization_time,
)
from .errors import FockSSHError, NotReached, ZeroOverlap
from .fock import (
    FockCutoff,
    ModelParams,
    basis_state,
    build_hamiltonian,
    default_cutoff,
    displaced_fock_state,
)
from .nonhermitian import analytic_nh_spectrum, classify_pt_phase, eigenstate_entropy, spectrum_table
from .spectra import analytic_levels, isotropic_ssh_spectrum, zero_mode_profile

LN2 = math.log(2.0)


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple]
    config: ScenarioConfig
    notes: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# resolution helpers


def _params(cfg: ScenarioConfig, gamma: float | None = None) -> ModelParams:
    return ModelParams(cfg.J1, cfg.J2, cfg.gamma if gamma is None else gamma)


def _initial_reach(cfg: ScenarioConfig) -> int:
    """Rough largest Fock index the initial state occupies."""
    if cfg.init == "fock":
        return cfg.init_n
    beta = abs(cfg.init_alpha if cfg.init_alpha is not None else cfg.J1 / cfg.J2)
    root = beta + math.sqrt(cfg.init_n)
    return math.ceil(root**2 + 6.0 * root)


def _cutoff(cfg: ScenarioConfig, n_init: int = 0) -> FockCutoff:
    if cfg.n_max is not None:
        return FockCutoff(cfg.n_max, cfg.tail_tol)
    return default_cutoff(-cfg.J1 / cfg.J2, n_init, cfg.tail_tol)


def _initial_state(cfg: ScenarioConfig, cutoff: FockCutoff):
    if cfg.init == "fock":
        return basis_state(cfg.init_n, cfg.init_spin, cutoff)
    beta = cfg.init_alpha if cfg.init_alpha is not None else -cfg.J1 / cfg.J2
    n = 0 if cfg.init == "coherent" else cfg.init_n
    return displaced_fock_state(beta, n, cfg.init_spin, cutoff)


def _branch_label(b: int) -> str:
    return "+" if b > 0 else "-"


# ---------------------------------------------------------------------------
# scenarios


def _spectrum_hermitian(cfg: ScenarioConfig) -> Table:
    n_levels = 51 if cfg.n_levels is None else cfg.n_levels
    cfg = dataclasses.replace(cfg, n_levels=n_levels, record="spectrum")
    levels = analytic_levels(cfg.J2, n_levels)[1:]
    block = [(0, "zero", 0.0, 0.0)]
    for n in range(n_levels):
        block += [(n, "+", float(levels[2 * n]), 0.0), (n, "-", float(levels[2 * n + 1]), 0.0)]
    notes = ["closed-form levels 0, +-J2 sqrt(n+1); the zero mode is one record with branch 'zero'"]
    if not cfg.ratios:
        return Table(["n", "branch", "re_e", "im_e"], block, cfg, notes)
    # the levels do not depend on J1; the sweep repeats them per ratio for plotting
    rows = [(r,) + row for r in cfg.ratios for row in block]
    return Table(["j1_over_j2", "n", "branch", "re_e", "im_e"], rows, cfg, notes)


def _spectrum_isotropic(cfg: ScenarioConfig) -> Table:
    record = "spectrum" if cfg.record == "auto" else cfg.record
    cfg = dataclasses.replace(cfg, record=record)
    if record == "profiles":
        spec = isotropic_ssh_spectrum(cfg.J1, cfg.J2, cfg.cells)
        edges = sorted(spec.edge_states, key=lambda e: e[0])
        sides = [side for side, _ in edges]
        columns = ["site"] + [f"p_{side}" for side in sides]
        probs = [vec**2 / np.sum(vec**2) for _, vec in edges]
        rows = [(i,) + tuple(float(p[i]) for p in probs) for i in range(2 * cfg.cells)]
        return Table(columns, rows, cfg, [f"{len(sides)} near-zero modes; site 2k is A of cell k, 2k+1 is B"])
    if record != "spectrum":
        raise FockSSHError(f"record={record!r} not available for spectrum_isotropic")
    ratios = cfg.ratios or [cfg.J1 / cfg.J2]
    rows = []
    for r in ratios:
        spec = isotropic_ssh_spectrum(r * cfg.J2, cfg.J2, cfg.cells)
        zero = set(spec.zero_indices.tolist())
        for k, e in enumerate(spec.eigenvalues):
            row = (k, "edge" if k in zero else "bulk", float(e), 0.0)
            rows.append((r,) + row if cfg.ratios else row)
    columns = ["n", "branch", "re_e", "im_e"]
    notes = [f"open {cfg.cells}-cell chain; n is the eigenvalue index, branch marks near-zero edge modes"]
    return Table((["j1_over_j2"] if cfg.ratios else []) + columns, rows, cfg, notes)


def _spectrum_nh(cfg: ScenarioConfig) -> Table:
    n_levels = 51 if cfg.n_levels is None else cfg.n_levels
    cfg = dataclasses.replace(cfg, n_levels=n_levels, record="spectrum")
    gammas = cfg.gammas or [cfg.gamma]
    rows, notes = [], []
    for g in gammas:
        params = _params(cfg, g)
        phase, ep = classify_pt_phase(params, cfg.ep_tol)
        block = [(0, "bound", 0.0, g)] + [
            (n, b, float(e.real), float(e.imag)) for n, b, e in spectrum_table(params, n_levels, cfg.ep_tol)
        ]
        rows += [(g,) + row for row in block] if cfg.gammas else block
        notes.append(f"gamma={g!r}: phase {phase.value}" + (f", exceptional point on block {ep[0]}" if ep else ""))
    notes.append("branch 'bound' is the zero mode |alpha,down> with eigenvalue i gamma; 'ep' marks a coalesced block")
    return Table((["gamma"] if cfg.gammas else []) + ["n", "branch", "re_e", "im_e"], rows, cfg, notes)


def _zero_mode(cfg: ScenarioConfig) -> Table:
    cutoff = _cutoff(cfg)
    cfg = dataclasses.replace(cfg, n_max=cutoff.n_max, record="distribution")
    p = zero_mode_profile(_params(cfg), cutoff)
    rows = [(n, float(v)) for n, v in enumerate(p)]
    return Table(["n", "p"], rows, cfg, [f"Poisson distribution with mean alpha^2 = {(cfg.J1 / cfg.J2) ** 2!r}"])


def _evolve(cfg: ScenarioConfig) -> Table:
    record = "observables" if cfg.record == "auto" else cfg.record
    if record not in ("observables", "distribution"):
        raise FockSSHError(f"record={record!r} not available for evolve")
    params = _params(cfg)
    cutoff = _cutoff(cfg, _initial_reach(cfg))
    cfg = dataclasses.replace(cfg, n_max=cutoff.n_max, record=record)
    psi0 = _initial_state(cfg, cutoff)
    eig = analytic_nh_spectrum(params, cfg.n_levels, cutoff, cfg.ep_tol)
    coeffs = expand_initial_state(psi0, eig)
    times = np.linspace(cfg.t_start, cfg.t_end, cfg.samples)
    if cfg.propagator == "analytic":
        series = evolve_analytic(coeffs, eig, times)
    else:
        series = evolve_oracle(psi0, build_hamiltonian(params, cutoff, "balanced_nh"), times)
    obs = observe(series, eig, coeffs, cfg.top_k)
    notes = [f"n_active = {eig.cutoff.n_active}", "Fock-renormalized observables; entropy in nats"]

    if record == "distribution":
        dist = np.array([r.boson_dist for r in obs.records])
        occupied = np.nonzero(dist.max(axis=0) > 1e-12)[0]
        top = int(occupied[-1]) if occupied.size else 0
        rows = [(float(t), n, float(dist[i, n])) for i, t in enumerate(times) for n in range(top + 1)]
        notes.append(f"long format; n truncated at {top}, beyond which every p < 1e-12")
        return Table(["t", "n", "p"], rows, cfg, notes)

    keys = list(obs.records[0].p_modes) if obs.records else []
    if coeffs.ep_part is not None:
        notes.append(f"block {coeffs.ep_index} is at an exceptional point; no mode projections, p_bound uses its Fock weight")
    else:
        notes.append(f"p_mode columns: the top {len(keys)} modes by |c_k|^2 of the biorthogonal expansion")
    columns = ["t", "mean_n", "entropy", "p_bound"] + [f"p_mode_{n}{b}" for n, b in keys] + ["entropy_ln2"]
    rows = [
        (float(t), r.mean_n, r.entropy, r.p_bound) + tuple(r.p_modes[k] for k in keys) + (r.entropy / LN2,)
        for t, r in zip(times, obs.records)
    ]
    return Table(columns, rows, cfg, notes)


def _stabilization_sweep(cfg: ScenarioConfig) -> Table:
    rows = []
    for g in cfg.gammas:
        params = _params(cfg, g)
        for n in cfg.n_inits:
            cutoff = _cutoff(cfg, n)
            psi0 = basis_state(n, cfg.init_spin, cutoff)
            try:
                tau = stabilization_time(psi0, params, cfg.threshold, cfg.t_max)
                rows.append((g, n, tau, 1))
            except (NotReached, ZeroOverlap):
                rows.append((g, n, float("nan"), 0))
    notes = [f"tau: first time P_0 > {cfg.threshold!r} for |n_init,{cfg.init_spin}>, resolution 1e-3"]
    if cfg.n_max is None:
        notes.append("n_max = none: each initial state uses its default cutoff")
    return Table(["gamma", "n_init", "tau", "reached"], rows, cfg, notes)


def _eigenstate_entropy(cfg: ScenarioConfig) -> Table:
    n_levels = 6 if cfg.n_levels is None else cfg.n_levels
    cfg = dataclasses.replace(cfg, n_levels=n_levels)
    rows, skipped = [], []
    for g in cfg.gammas or [cfg.gamma]:
        params = _params(cfg, g)
        _, ep = classify_pt_phase(params, cfg.ep_tol)
        for n in range(n_levels):
            if n in ep:
                skipped.append(f"(gamma={g!r}, n={n})")
                continue
            for b in (1, -1):
                s_bits = eigenstate_entropy(params, n, b)
                rows.append((g, n, _branch_label(b), s_bits * LN2, s_bits))
    notes = ["entropy of the normalized right eigenstate, in nats and in bits (entropy_ln2)"]
    if skipped:
        notes.append("exceptional points skipped: " + ", ".join(skipped))
    return Table(["gamma", "n", "branch", "entropy", "entropy_ln2"], rows, cfg, notes)


SCENARIO_RUNNERS = {
    "spectrum_hermitian": _spectrum_hermitian,
    "spectrum_isotropic": _spectrum_isotropic,
    "spectrum_nh": _spectrum_nh,
    "zero_mode": _zero_mode,
    "evolve": _evolve,
    "stabilization_sweep": _stabilization_sweep,
    "eigenstate_entropy": _eigenstate_entropy,
}


def build_table(cfg: ScenarioConfig) -> Table:
    try:
        runner = SCENARIO_RUNNERS[cfg.scenario]
    except KeyError:
        raise FockSSHError(f"scenario {cfg.scenario!r} does not produce a table") from None
    try:
        return runner(cfg)
    except FockSSHError as exc:
        raise type(exc)(f"scenario {cfg.scenario}: {exc}") from exc


# ---------------------------------------------------------------------------
# output


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value) + 0.0)  # folds -0.0 into 0.0
    return str(value)


def render(table: Table, fmt: str = "csv", extra_notes=(), timestamp: bool = False) -> str:
    notes = list(extra_notes) + table.notes
    if timestamp:
        notes.append("generated = " + datetime.now(timezone.utc).isoformat(timespec="seconds"))
    if fmt == "json":
        def js(v):
            if isinstance(v, (float, np.floating)) and not np.isfinite(v):
                return None
            return v.item() if isinstance(v, np.generic) else v

        doc = {
            "config": dict(table.config.as_items()),
            "notes": notes,
            "columns": table.columns,
            "rows": [[js(v) for v in row] for row in table.rows],
        }
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    for key, value in table.config.as_items():
        buf.write(f"#: {key} = {value}\n")
    for note in notes:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_table(table: Table, path: str | Path, fmt: str = "csv", extra_notes=(), timestamp: bool = False) -> Path | None:
    text = render(table, fmt, extra_notes, timestamp)
    if str(path) == "-":
        sys.stdout.write(text)
        return None
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def run_scenario(cfg: ScenarioConfig) -> tuple[int, list[Path]]:
    """Run one scenario and write its output; returns ``(exit_status, files)``.

    Errors propagate as :class:`~fockssh.errors.FockSSHError` subclasses whose
    ``exit_code`` is the status the command line reports.
    """
    if cfg.scenario == "figures":
        return 0, emit_figure_bundle(cfg.figure, "." if cfg.output == "-" else cfg.output, cfg.timestamp)
    if cfg.scenario == "validate":
        from .validation import run_all

        results = run_all()
        ok = all(r.passed for _, _, rs in results for r in rs)
        table = Table(
            ["criterion", "check", "value", "tolerance", "passed"],
            [(num, r.key, r.value, r.tolerance, int(r.passed)) for num, _, rs in results for r in rs],
            cfg,
        )
        if cfg.output != "-":
            write_table(table, cfg.output, cfg.format, timestamp=cfg.timestamp)
        for num, title, rs in results:
            print(f"{num:2d}. {title}")
            for r in rs:
                print("    " + r.line())
        print("ALL PASS" if ok else "SOME CHECKS FAILED")
        return (0 if ok else 3), ([] if cfg.output == "-" else [Path(cfg.output)])
    table = build_table(cfg)
    written = write_table(table, cfg.output, cfg.format, timestamp=cfg.timestamp)
    return 0, [written] if written else []


# ---------------------------------------------------------------------------
# figure bundles

FIG_J1, FIG_J2 = 1.0, 0.2


def _base(**kw) -> ScenarioConfig:
    return dataclasses.replace(ScenarioConfig(J1=FIG_J1, J2=FIG_J2, format="csv"), **kw).validate()


def _ratio(r: float) -> dict:
    return {"J1": r * FIG_J2, "J2": FIG_J2}


def _grid(start: float, stop: float, step: float) -> list[float]:
    count = int(round((stop - start) / step)) + 1
    return [round(start + k * step, 10) for k in range(count)]


def _tau(gamma: float, n_init: int) -> float:
    params = ModelParams(FIG_J1, FIG_J2, gamma)
    cutoff = default_cutoff(params.alpha, n_init)
    return stabilization_time(basis_state(n_init, "down", cutoff), params)


def _figure_panels(figure: str) -> list[tuple[str, ScenarioConfig, list[str]]]:
    ratios = _grid(0.0, 5.0, 0.05)
    if figure == "fig2":
        return [
            ("a", _base(scenario="spectrum_isotropic", ratios=ratios, cells=50), ["isotropic chain, 50 cells"]),
            ("b", _base(scenario="spectrum_hermitian", ratios=ratios, n_levels=51), ["analytic levels, n <= 50"]),
            ("c", _base(scenario="spectrum_isotropic", record="profiles", cells=50, **_ratio(0.25)), ["edge states at J1/J2 = 0.25"]),
            ("d", _base(scenario="zero_mode", **_ratio(0.5)), ["zero mode at J1/J2 = 0.5"]),
            ("e", _base(scenario="zero_mode", **_ratio(4.0)), ["zero mode at J1/J2 = 4"]),
        ]
    if figure == "fig3":
        panels = []
        for (spec_p, dist_p, proj_p), g in ((("a", "b", "c"), 0.15), (("d", "e", "f"), 0.5)):
            t_end = round(1.5 * _tau(g, 50), 6)
            note = [f"time range t_end = 1.5 tau = {t_end!r} (tau for |50,down>)"]
            evolve = dict(scenario="evolve", gamma=g, init_n=50, init_spin="down", t_end=t_end, samples=301)
            panels += [
                (spec_p, _base(scenario="spectrum_nh", gamma=g, n_levels=51), []),
                (dist_p, _base(record="distribution", **evolve), note),
                (proj_p, _base(record="observables", **evolve), note),
            ]
        panels.append(("g", _base(scenario="stabilization_sweep", gammas=_grid(0.02, 0.6, 0.02),
                                  n_inits=[10, 20, 30, 40, 50], init_spin="down"), []))
        return sorted(panels, key=lambda p: p[0])
    if figure == "fig4":
        sweep = _base(scenario="spectrum_nh", gammas=_grid(0.0, 0.6, 0.005), n_levels=11)
        panels = [("a", sweep, ["panel a plots re_e"]), ("b", sweep, ["panel b plots im_e"])]
        for (p_n, p_s), g in ((("c", "d"), 0.15), (("e", "f"), 0.25)):
            cfg = _base(scenario="evolve", gamma=g, init_n=10, init_spin="up", t_end=80.0, samples=1601)
            panels += [(p_n, cfg, ["panel plots mean_n"]), (p_s, cfg, ["panel plots entropy"])]
        return panels
    if figure == "figA1":
        return [("a", _base(scenario="eigenstate_entropy", gammas=_grid(0.005, 0.6, 0.005), n_levels=6), [])]
    raise FockSSHError(f"unknown figure {figure!r}")


def emit_figure_bundle(figure: str, out_dir, timestamp: bool = False) -> list[Path]:
    """Write ``{figure}_{panel}.csv`` for every panel; each file echoes a config that rebuilds it."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    cache: dict[int, Table] = {}
    for panel, cfg, notes in _figure_panels(figure):
        try:
            key = id(cfg)
            table = cache.get(key) or build_table(cfg)
            cache[key] = table
        except FockSSHError as exc:
            raise type(exc)(f"{figure} panel {panel}: {exc}") from exc
        path = out_dir / f"{figure}_{panel}.csv"
        written.append(write_table(table, path, "csv", [f"{figure} panel {panel}"] + notes, timestamp))
    return written
