"""``fockssh`` command line.

Each subcommand maps onto one scenario.  Settings come from an optional
``--config`` document, overridden by flags named after the config fields
(``--n-max 300``, ``--gammas 0.1,0.2``).

Exit status: 0 success, 1 configuration error, 2 numerical guard tripped,
3 internal invariant violation (including a failed ``validate``).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .config import ScenarioConfig, _coerce, load_config
from .errors import ConfigError, FockSSHError
from .scenarios import run_scenario

SUBCOMMANDS = {
    "spectrum": None,  # resolved from --kind
    "zero-mode": "zero_mode",
    "evolve": "evolve",
    "sweep-tau": "stabilization_sweep",
    "entropy": "eigenstate_entropy",
    "figures": "figures",
    "validate": "validate",
}

SPECTRUM_KINDS = {"hermitian": "spectrum_hermitian", "isotropic": "spectrum_isotropic", "nh": "spectrum_nh"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="key = value document (or a previous output file)")
    for f in fields(ScenarioConfig):
        if f.name == "scenario":
            continue
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, metavar="VALUE", default=None, help=str(f.type))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fockssh", description="Gain/loss Fock-state-lattice SSH chain: spectra, dynamics, figure data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "spectrum": "eigenvalue table (--kind hermitian | isotropic | nh)",
        "zero-mode": "boson-number profile of the zero mode",
        "evolve": "time series of observables or the boson distribution",
        "sweep-tau": "stabilization time over gamma and initial states",
        "entropy": "eigenstate entanglement entropy over gamma",
        "figures": "write one CSV per panel for --figure into --output (a directory)",
        "validate": "run the invariant suite and print a pass/fail table",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        if name == "spectrum":
            p.add_argument("--kind", choices=sorted(SPECTRUM_KINDS), default=None)
        _add_config_flags(p)
    return parser


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    types = {f.name: str(f.type) for f in fields(ScenarioConfig)}
    overrides = {}
    for name, type_name in types.items():
        raw = getattr(args, name, None)
        if raw is not None:
            overrides[name] = _coerce(name, raw, type_name, "--" + name.replace("_", "-"))
    if args.command == "spectrum":
        if args.kind is not None:
            overrides["scenario"] = SPECTRUM_KINDS[args.kind]
        elif args.config is None:
            overrides["scenario"] = "spectrum_nh"
    else:
        overrides["scenario"] = SUBCOMMANDS[args.command]
    cfg = load_config(args.config, overrides)
    if args.command == "spectrum" and not cfg.scenario.startswith("spectrum_"):
        raise ConfigError(f"spectrum: config selects scenario {cfg.scenario!r}; pass --kind")
    return cfg


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        status, files = run_scenario(config_from_args(args))
    except FockSSHError as exc:
        print(f"fockssh: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # pragma: no cover - unexpected failure path
        print(f"fockssh: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for path in files:
        print(f"wrote {path}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
