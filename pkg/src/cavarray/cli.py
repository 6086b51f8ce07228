"""Command line front end.

    cavarray spectrum  --config spectrum_g0.json --out spectrum_g0.csv
    cavarray sweep2d   --config kg_J0.json --axis k:0.01:3.13:200 --axis g:-5:5:201
    cavarray dynamics  --config transfer_Omega2_g2.json --out transfer.csv
    cavarray stability --config stability_g1_k1p57.json --k 1.5707963267948966 --branch 0

Exit codes: 0 success, 2 bad config, 3 output not writable, 4 numerical
blow-up during integration, 5 requested branch does not exist.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

from . import __version__
from .dynamics import (DynOptions, initial_all_in_site, integrate, rescale_params,
                       vacuum_state)
from .errors import BandEdge, NonFinite, PoleAtResonance
from .model import ModelParams
from .output import (report_to_csv, report_to_json, trajectory_to_csv,
                     trajectory_to_json)
from .scattering import ScatterOptions, transmission_roots
from .stability import DEFAULT_TOL, root_stability
from .sweep import Axis, sweep1d, sweep2d

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_BLOWUP, EXIT_BRANCH = 0, 2, 3, 4, 5

MODE_FLAGS = {"fixed-intensity": "fixed_intensity", "self-consistent": "self_consistent"}
CONVENTION_FLAGS = {"conjugate": "conjugate_consistent", "verbatim": "verbatim_eq4"}
TOP_KEYS = {"params", "scatter", "dynamics", "axes", "k", "branch", "M", "rescale",
            "initial", "stability", "stability_tolerance", "output_path", "format"}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    scatter: ScatterOptions = field(default_factory=ScatterOptions)
    dyn: DynOptions = field(default_factory=DynOptions)
    axes: list[Axis] = field(default_factory=list)
    k: float | None = None
    branch: int = 0
    M: float = 1.0
    rescale: bool = False
    initial: dict = field(default_factory=lambda: {"kind": "site", "site": -1,
                                                   "atom": "excited"})
    stability: bool = False
    stability_tolerance: float = DEFAULT_TOL
    output_path: str = "-"
    format: str | None = None

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "scatter": self.scatter.to_dict(),
                "dynamics": self.dyn.to_dict(), "axes": [a.to_dict() for a in self.axes],
                "k": self.k, "branch": self.branch, "M": self.M, "rescale": self.rescale,
                "initial": dict(self.initial), "stability": self.stability,
                "stability_tolerance": self.stability_tolerance,
                "output_path": self.output_path, "format": self.format}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        """Validate every block up front; errors name the offending key."""
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        cfg = cls()
        cfg.params = _block("params", ModelParams.from_dict, d.get("params", {}))
        cfg.scatter = _block("scatter", ScatterOptions.from_dict, d.get("scatter", {}))
        cfg.dyn = _block("dynamics", DynOptions.from_dict, d.get("dynamics", {}))
        axes = d.get("axes", [])
        if not isinstance(axes, list):
            raise ConfigError("axes: must be a list")
        cfg.axes = [_block(f"axes[{i}]", lambda a: Axis(**a), a) for i, a in enumerate(axes)]
        for key, typ in (("k", float), ("M", float), ("stability_tolerance", float)):
            if d.get(key) is not None:
                setattr(cfg, key, _number(key, d[key], typ))
        if "branch" in d:
            cfg.branch = _number("branch", d["branch"], int)
        for key in ("rescale", "stability"):
            if key in d:
                if not isinstance(d[key], bool):
                    raise ConfigError(f"{key}: must be true or false, got {d[key]!r}")
                setattr(cfg, key, d[key])
        if "initial" in d:
            cfg.initial = _initial(d["initial"])
        if "output_path" in d:
            if not isinstance(d["output_path"], str):
                raise ConfigError("output_path: must be a string")
            cfg.output_path = d["output_path"]
        if "format" in d:
            if d["format"] not in ("csv", "json"):
                raise ConfigError(f"format: must be 'csv' or 'json', got {d['format']!r}")
            cfg.format = d["format"]
        if cfg.M < 1:
            raise ConfigError(f"M: photon count must be >= 1, got {cfg.M}")
        return cfg


def _block(name, ctor, value):
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: must be a JSON object")
    try:
        return ctor(value)
    except KeyError as exc:
        raise ConfigError(f"{name}: {exc.args[0]}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _number(key, v, typ):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: must be a number, got {v!r}")
    if typ is int and int(v) != v:
        raise ConfigError(f"{key}: must be an integer, got {v!r}")
    return typ(v)


def _initial(v) -> dict:
    if not isinstance(v, dict):
        raise ConfigError("initial: must be a JSON object")
    kind = v.get("kind", "site")
    atom = v.get("atom", "excited" if kind == "site" else "ground")
    if kind not in ("site", "vacuum"):
        raise ConfigError(f"initial.kind: must be 'site' or 'vacuum', got {kind!r}")
    if atom not in ("excited", "ground"):
        raise ConfigError(f"initial.atom: must be 'excited' or 'ground', got {atom!r}")
    out = {"kind": kind, "atom": atom}
    if kind == "site":
        out["site"] = _number("initial.site", v.get("site", -1), int)
    return out


def _set_dotted(d: dict, dotted: str, raw: str) -> None:
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = dotted.split(".")
    cur = d
    for key in keys[:-1]:
        cur = cur.setdefault(key, {})
        if not isinstance(cur, dict):
            raise ConfigError(f"--set {dotted}: {key} is not an object")
    cur[keys[-1]] = value


def _parse_axis(text: str) -> dict:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"--axis {text!r}: expected NAME:START:STOP:STEPS")
    name, start, stop, steps = parts
    try:
        return {"name": name, "start": float(start), "stop": float(stop), "steps": int(steps)}
    except ValueError as exc:
        raise ConfigError(f"--axis {text!r}: {exc}") from exc


def resolve_config(args) -> RunConfig:
    """Merge the config file with command-line flags (flags win) and validate."""
    raw: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected KEY=VALUE")
        key, value = item.split("=", 1)
        _set_dotted(raw, key.strip(), value)
    scatter = raw.setdefault("scatter", {})
    if not isinstance(scatter, dict):
        raise ConfigError("scatter: must be a JSON object")
    if args.mode:
        scatter["dispersion_mode"] = MODE_FLAGS[args.mode]
    if args.i0 is not None:
        scatter["I0"] = args.i0
    if args.sign:
        scatter["sign_convention"] = args.sign
    if args.convention:
        dyn = raw.setdefault("dynamics", {})
        if not isinstance(dyn, dict):
            raise ConfigError("dynamics: must be a JSON object")
        dyn["convention"] = CONVENTION_FLAGS[args.convention]
    if args.out:
        raw["output_path"] = args.out
    if args.format:
        raw["format"] = args.format
    if getattr(args, "axis", None):
        raw["axes"] = [_parse_axis(a) for a in args.axis]
    if getattr(args, "k", None) is not None:
        raw["k"] = args.k
    if getattr(args, "branch", None) is not None:
        raw["branch"] = args.branch
    return RunConfig.from_dict(raw)


def _meta(cfg: RunConfig, command: str) -> dict:
    return {"artifact": "cavarray", "version": __version__, "command": command,
            "config": cfg.to_dict()}


def _write(cfg: RunConfig, text: str) -> int:
    if cfg.output_path in ("-", ""):
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {cfg.output_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _grid_text(cfg, grid, command) -> str:
    cfg.format = cfg.format or "csv"
    meta = _meta(cfg, command)
    if cfg.format == "json":
        return grid.to_json(meta)
    return grid.to_csv(meta)


def cmd_spectrum(cfg: RunConfig) -> int:
    axes = cfg.axes or [Axis.midpoints("k", 0.0, math.pi, 500)]
    if len(axes) != 1:
        raise ConfigError(f"axes: spectrum takes exactly one axis, got {len(axes)}")
    cfg.axes = axes
    if axes[0].name != "k" and cfg.k is None:
        raise ConfigError("k: required when the spectrum axis is not k")
    grid = sweep1d(cfg.params, axes[0], cfg.scatter, k=cfg.k, stability=cfg.stability,
                   tolerance=cfg.stability_tolerance)
    return _write(cfg, _grid_text(cfg, grid, "spectrum"))


def cmd_sweep2d(cfg: RunConfig) -> int:
    if len(cfg.axes) != 2:
        raise ConfigError(f"axes: sweep2d takes exactly two axes, got {len(cfg.axes)}")
    a, b = cfg.axes
    if a.name == b.name:
        raise ConfigError(f"axes: names must differ, got {a.name!r} twice")
    if "k" not in (a.name, b.name) and cfg.k is None:
        raise ConfigError("k: required when neither axis is k")
    grid = sweep2d(cfg.params, a, b, cfg.scatter, k=cfg.k, stability=cfg.stability,
                   tolerance=cfg.stability_tolerance)
    return _write(cfg, _grid_text(cfg, grid, "sweep2d"))


def cmd_dynamics(cfg: RunConfig) -> int:
    params = rescale_params(cfg.params, cfg.M) if cfg.rescale else cfg.params
    ini = cfg.initial
    try:
        if ini["kind"] == "vacuum":
            state = vacuum_state(params.N, ini["atom"])
        else:
            state = initial_all_in_site(ini["site"], cfg.M, ini["atom"], params.N)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"initial: {exc}") from exc
    cfg.format = cfg.format or "csv"
    writer = trajectory_to_json if cfg.format == "json" else trajectory_to_csv
    try:
        traj = integrate(state, params, cfg.dyn, M=cfg.M)
    except NonFinite as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.partial is not None:
            _write(cfg, writer(exc.partial, _meta(cfg, "dynamics")))
        return EXIT_BLOWUP
    return _write(cfg, writer(traj, _meta(cfg, "dynamics")))


def cmd_stability(cfg: RunConfig) -> int:
    if cfg.k is None:
        raise ConfigError("k: stability needs a quasi-momentum (--k or config key k)")
    try:
        roots = transmission_roots(cfg.params, cfg.k, cfg.scatter)
    except (BandEdge, PoleAtResonance) as exc:
        print(f"error: no branches at k = {cfg.k}: {exc}", file=sys.stderr)
        return EXIT_BRANCH
    if not 0 <= cfg.branch < len(roots):
        print(f"error: branch {cfg.branch} does not exist ({len(roots)} branch(es) "
              f"at k = {cfg.k})", file=sys.stderr)
        return EXIT_BRANCH
    root = roots[cfg.branch]
    cfg.format = cfg.format or "json"
    report = root_stability(cfg.params, cfg.k, root, cfg.scatter, cfg.stability_tolerance)
    meta = _meta(cfg, "stability")
    meta["root"] = {"s": [root.s.real, root.s.imag], "s2": root.s2}
    if cfg.format == "csv":
        return _write(cfg, report_to_csv(report, meta))
    return _write(cfg, report_to_json(report, meta))


COMMANDS = {"spectrum": cmd_spectrum, "sweep2d": cmd_sweep2d,
            "dynamics": cmd_dynamics, "stability": cmd_stability}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH", help="JSON run configuration")
    shared.add_argument("--out", metavar="PATH", help="output file ('-' for stdout)")
    shared.add_argument("--format", choices=("csv", "json"))
    shared.add_argument("--mode", choices=tuple(MODE_FLAGS), help="dispersion intensity rule")
    shared.add_argument("--i0", type=float, help="fixed intensity entering the dispersion")
    shared.add_argument("--sign", choices=("eq8", "eq9"), help="sign of the atomic term")
    shared.add_argument("--convention", choices=tuple(CONVENTION_FLAGS),
                        help="sigma_+ equation form for dynamics")
    shared.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry, e.g. params.g=1 (repeatable)")

    p = argparse.ArgumentParser(prog="cavarray", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "sweep2d"):
        sp = sub.add_parser(name, parents=[shared])
        sp.add_argument("--axis", action="append", metavar="NAME:START:STOP:STEPS")
        sp.add_argument("--k", type=float, help="fixed k when it is not an axis")
    sub.add_parser("dynamics", parents=[shared])
    sp = sub.add_parser("stability", parents=[shared])
    sp.add_argument("--k", type=float)
    sp.add_argument("--branch", type=int)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
