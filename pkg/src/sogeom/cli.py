"""
Command-line interface.

Subcommands: ``phase``, ``scan``, ``winding`` and ``verify``.  Any option may
also come from a JSON file passed with ``--config``; flags given on the command
line take precedence.  Exit codes: 0 success, 2 invalid configuration,
3 verification failure, 4 numerical diagnostic.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

from . import holonomy_oracle as ho
from .exceptions import LoopTooCloseError, NumericalDiagnosticError, RefinementRequired
from .loops import loop_from_spec
from .nodal import SCAN_DEFAULTS, ParamLoop, grid_scan, winding_number
from .phases import Subsystem, marginal_phase, sum_rule_residual, total_phase, visibility
from .spin_orbit import QuantumNumbers, check_coupling
from .verify import SUITES, run_suites

log = logging.getLogger("sogeom")

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "phase": {"l": None, "mu": None, "branch": None, "g": None, "omega": None, "loop": None,
              "oracle": False, "output": "-"},
    "scan": {
        "sub": SCAN_DEFAULTS["sub"], "l": SCAN_DEFAULTS["l"], "mu": SCAN_DEFAULTS["mu"],
        "branch": SCAN_DEFAULTS["branch"],
        "omega_min": SCAN_DEFAULTS["omega_range"][0], "omega_max": SCAN_DEFAULTS["omega_range"][1],
        "g_min": SCAN_DEFAULTS["g_range"][0], "g_max": SCAN_DEFAULTS["g_range"][1],
        "nx": SCAN_DEFAULTS["nx"], "ny": SCAN_DEFAULTS["ny"], "jobs": None, "output": "-",
    },
    "winding": {"sub": "S", "l": 2, "mu": -0.5, "branch": "-", "rect": None, "points": None,
                "clockwise": False, "margin": 1e-3, "samples_per_edge": 64, "trace": True, "output": "-"},
    "verify": {"suite": ["all"], "samples": 8192, "ramp": 200.0, "seed": 0, "output": "-"},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Validated options for one command."""

    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None

    def quantum_numbers(self) -> QuantumNumbers:
        if self.options.get("l") is None or self.options.get("mu") is None:
            raise ConfigError("--l and --mu are required")
        return QuantumNumbers.of(self.options["l"], self.options["mu"], self.options.get("branch"))

    @classmethod
    def build(cls, command: str, file_cfg: dict, flags: dict) -> "RunConfig":
        unknown = set(file_cfg) - set(DEFAULTS[command]) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        opts = {**DEFAULTS[command], **file_cfg, **flags}
        cfg = cls(command, opts)
        cfg.validate()
        return cfg

    def validate(self):
        o = self.options
        if self.command == "phase":
            self.quantum_numbers()
            if o["g"] is None:
                raise ConfigError("--g is required")
            check_coupling(o["g"])
            if (o["omega"] is None) == (o["loop"] is None):
                raise ConfigError("give exactly one of --omega or a loop specification")
        elif self.command == "scan":
            self.quantum_numbers()
            Subsystem.parse(o["sub"])
            if int(o["nx"]) < 1 or int(o["ny"]) < 1:
                raise ConfigError("grid resolutions must be positive")
        elif self.command == "winding":
            self.quantum_numbers()
            if (o["rect"] is None) == (o["points"] is None):
                raise ConfigError("give exactly one of --rect or --points")
        elif self.command == "verify":
            bad = set(o["suite"]) - set(SUITES) - {"all"}
            if bad:
                raise ConfigError(f"unknown suites {sorted(bad)}")


def _round(obj):
    """Round floats to 12 significant digits for stable output."""
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        v = float(format(obj, ".12g"))
        return 0.0 if v == 0 else v
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if hasattr(obj, "item"):
        return _round(obj.item())
    return obj


def _emit(text: str, path: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def _json(payload) -> str:
    return json.dumps(_round(payload), indent=2) + "\n"


def cmd_phase(cfg: RunConfig) -> int:
    qn = cfg.quantum_numbers()
    g = check_coupling(cfg.g)
    loop = None
    if cfg.loop is not None:
        loop = loop_from_spec(cfg.loop)
        omega = loop.solid_angle
    else:
        omega = float(cfg.omega)
    ml = marginal_phase(Subsystem.L, qn, g, omega)
    ms = marginal_phase(Subsystem.S, qn, g, omega)
    report = {
        "l": qn.l, "mu": qn.mu, "branch": qn.branch.value, "g": g, "omega": omega,
        "total": total_phase(qn, omega).to_dict(),
        "marginal_L": ml.to_dict(),
        "marginal_S": ms.to_dict(),
        "visibility": visibility(qn, g, omega),
        "sum_rule_residual": sum_rule_residual(qn, g, omega),
        "defined": {"L": ml.defined, "S": ms.defined},
    }
    if cfg.oracle:
        if loop is None:
            raise ConfigError("--oracle needs a loop specification")
        report["oracle"] = {
            "total": ho.oracle_total_phase(qn, g, loop).to_dict(),
            "marginal_L": ho.oracle_marginal_phase(Subsystem.L, qn, g, loop).to_dict(),
            "marginal_S": ho.oracle_marginal_phase(Subsystem.S, qn, g, loop).to_dict(),
        }
    _emit(_json(report), cfg.output)
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    qn = cfg.quantum_numbers()
    jobs = cfg.jobs if cfg.jobs is not None else (os.cpu_count() or 1)
    grid = grid_scan(cfg.sub, qn, (cfg.omega_min, cfg.omega_max), (cfg.g_min, cfg.g_max),
                     int(cfg.nx), int(cfg.ny), jobs=int(jobs))
    _emit(grid.to_csv(), cfg.output)
    return EXIT_OK


def cmd_winding(cfg: RunConfig) -> int:
    qn = cfg.quantum_numbers()
    if cfg.rect is not None:
        o0, o1, g0, g1 = map(float, cfg.rect)
        loop = ParamLoop.rectangle((o0, o1), (g0, g1), clockwise=bool(cfg.clockwise))
    else:
        loop = ParamLoop(cfg.points)
        if cfg.clockwise:
            loop = loop.reversed()
    res = winding_number(cfg.sub, qn, loop, margin=float(cfg.margin), n_per_edge=int(cfg.samples_per_edge))
    payload = {"sub": Subsystem.parse(cfg.sub).value, "l": qn.l, "mu": qn.mu, "branch": qn.branch.value,
               "orientation": loop.orientation, **res.to_dict(with_trace=bool(cfg.trace))}
    _emit(_json(payload), cfg.output)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    checks = run_suites(cfg.suite, samples=int(cfg.samples), ramp=float(cfg.ramp), seed=int(cfg.seed))
    ok = all(c.passed for c in checks)
    _emit(_json({"passed": ok, "checks": [c.to_dict() for c in checks]}), cfg.output)
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"phase": cmd_phase, "scan": cmd_scan, "winding": cmd_winding, "verify": cmd_verify}


def _qn_args(p):
    p.add_argument("--l", type=int, help="orbital quantum number")
    p.add_argument("--mu", type=float, help="J_z eigenvalue (half-odd-integer)")
    p.add_argument("--branch", choices=["+", "-"], help="upper or lower eigenvector of an interior block")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sogeom", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with default options")
    common.add_argument("-o", "--output", help="output path, '-' for stdout")

    p = sub.add_parser("phase", parents=[common], argument_default=argparse.SUPPRESS,
                       help="total and marginal phases for one loop")
    _qn_args(p)
    p.add_argument("--g", type=float, help="Zeeman / spin-orbit strength ratio")
    p.add_argument("--omega", type=float, help="solid angle enclosed by the loop")
    p.add_argument("--loop", type=json.loads, help="loop specification as inline JSON")
    p.add_argument("--oracle", action="store_true", help="also run the Bargmann oracle on the loop")

    p = sub.add_parser("scan", parents=[common], argument_default=argparse.SUPPRESS,
                       help="marginal phase over the (Omega, g) plane as CSV")
    _qn_args(p)
    p.add_argument("--sub", choices=["L", "S"])
    p.add_argument("--omega-min", type=float, dest="omega_min")
    p.add_argument("--omega-max", type=float, dest="omega_max")
    p.add_argument("--nx", type=int)
    p.add_argument("--g-min", type=float, dest="g_min")
    p.add_argument("--g-max", type=float, dest="g_max")
    p.add_argument("--ny", type=int)
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")

    p = sub.add_parser("winding", parents=[common], argument_default=argparse.SUPPRESS,
                       help="detect nodal points by phase winding")
    _qn_args(p)
    p.add_argument("--sub", choices=["L", "S"])
    p.add_argument("--rect", type=float, nargs=4, metavar=("OMEGA0", "OMEGA1", "G0", "G1"))
    p.add_argument("--points", type=json.loads, help="closed polyline [[omega, g], ...] as JSON")
    p.add_argument("--clockwise", action="store_true")
    p.add_argument("--margin", type=float)
    p.add_argument("--samples-per-edge", type=int, dest="samples_per_edge")
    p.add_argument("--no-trace", action="store_false", dest="trace")

    p = sub.add_parser("verify", parents=[common], argument_default=argparse.SUPPRESS,
                       help="run the invariant suites")
    p.add_argument("--suite", action="append", choices=["all", *SUITES])
    p.add_argument("--samples", type=int)
    p.add_argument("--ramp", type=float, help="largest ramp time in units of 1/gap")
    p.add_argument("--seed", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    logging.basicConfig(level=logging.INFO if ns.pop("verbose") else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_cfg = {}
        path = ns.pop("config", None)
        if path:
            try:
                with open(path, encoding="utf-8") as fh:
                    file_cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg = RunConfig.build(command, file_cfg, ns)
        return COMMANDS[command](cfg)
    except (LoopTooCloseError, NumericalDiagnosticError, RefinementRequired) as exc:
        print(f"sogeom: numerical diagnostic: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError) as exc:
        print(f"sogeom: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
