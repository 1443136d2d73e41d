"""Command-line front end: ``scaled-tunnel <command> [options]``.

Configuration comes from built-in defaults, then an optional flat JSON file
(``--config``), then kebab-case flags, then ``--param key=value`` overrides.
Numeric values may be written as small expressions in ``pi`` and ``omega``,
e.g. ``--gamma 0.3*omega`` or ``--phi -pi/2``.

Exit status: 0 on success, 1 on usage errors, 2 on numerical failures.
"""
from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .closed_form import center_driven
from .grid_oracle import (Grid, GridError, ansatz_density_error, init_gaussian,
                          propagate)
from .integrators import IntegrationError, evolve_packet
from .model import (Approach, BarrierField, PacketInit, ParameterError,
                    SystemParams)
from .output import (extremum_summary, write_csv, write_json, write_observables_csv,
                     write_snapshot_csv, write_sweep_csv, write_trajectories_csv)
from .trajectories import propagate_ensemble, sample_ensemble
from .transmission import (SWEEP_PARAMS, PlateauWarning, find_resonance,
                           plateau_onset, sweep, transmission_curve)

COMMANDS = ("simulate", "trajectories", "widths", "sweep", "resonance", "oracle-check")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    m: float = 1.0
    hbar: float = 1.0
    q: float = -1.0
    gamma: float = 0.0
    epsilon: float = 1.0
    omega: float = 0.2
    e0: float = 0.1
    omega0: float = 0.2
    phi: float = 0.0
    x0: float = -10.0
    p0: float = 1.0
    sigma0: float = 1.0
    sigma0_dot: float = 0.0
    approach: str = "kostin"
    t_max: float = 150.0
    dt_out: float = 0.1
    seed: int = 1234
    out: str = "."
    n_traj: int = 21
    sampling: str = "uniform"
    epsilons: str = "1,0.5,0.1,0"
    grid: str = ""
    x_d: float = 0.0
    workers: int = 1
    oracle_t_end: float = 0.0
    oracle_dt: float = 0.005
    snapshots: bool = False
    gnuplot: bool = False

    def system(self) -> SystemParams:
        return SystemParams(self.m, self.hbar, self.q, self.gamma, self.epsilon)

    def field(self) -> BarrierField:
        return BarrierField(self.omega, self.e0, self.omega0, self.phi)

    def packet(self) -> PacketInit:
        return PacketInit(self.x0, self.p0, self.sigma0, self.sigma0_dot)

    def as_dict(self) -> dict:
        # the output directory is left out so results do not depend on where they land
        return {f.name.replace("_", "-"): v for f, v in zip(fields(self), asdict(self).values())
                if f.name != "out"}


_FIELDS = {f.name.replace("_", "-"): f for f in fields(RunConfig)}
_NUMERIC = {k for k, f in _FIELDS.items() if f.type in ("float", float)}
_INTEGER = {k for k, f in _FIELDS.items() if f.type in ("int", int)}
_BOOLEAN = {k for k, f in _FIELDS.items() if f.type in ("bool", bool)}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def evaluate(expr, names: dict) -> float:
    """Evaluate a numeric literal or an arithmetic expression over ``names``."""
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        return float(expr)
    try:
        tree = ast.parse(str(expr).strip(), mode="eval")
    except SyntaxError:
        raise UsageError(f"cannot parse value {expr!r}") from None

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in names:
            return float(names[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](walk(node.operand))
        raise UsageError(f"unsupported expression {expr!r}")

    return walk(tree)


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {value!r}")


def build_config(raw: dict) -> RunConfig:
    """Resolve raw (string or number) settings into a validated config."""
    unknown = sorted(set(raw) - set(_FIELDS))
    if unknown:
        raise UsageError(f"unknown configuration keys: {', '.join(unknown)}")
    defaults = RunConfig()
    values = {}
    names = {"pi": math.pi}
    # omega first so that other entries may refer to it
    order = ["omega"] + [k for k in _FIELDS if k != "omega"]
    for key in order:
        attr = _FIELDS[key].name
        if key not in raw:
            values[attr] = getattr(defaults, attr)
            if key == "omega":
                names["omega"] = defaults.omega
            continue
        value = raw[key]
        if key in _NUMERIC:
            values[attr] = evaluate(value, names)
        elif key in _INTEGER:
            number = evaluate(value, names)
            if number != int(number):
                raise UsageError(f"{key} must be an integer, got {value!r}")
            values[attr] = int(number)
        elif key in _BOOLEAN:
            values[attr] = _parse_bool(value)
        else:
            values[attr] = str(value)
        if key == "omega":
            names["omega"] = values[attr]
    cfg = RunConfig(**values)
    Approach.parse(cfg.approach)
    cfg.approach = Approach.parse(cfg.approach).value
    if cfg.sampling not in ("uniform", "born"):
        raise UsageError("sampling must be 'uniform' or 'born'")
    if not 0 <= cfg.seed < 2 ** 64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    if not cfg.t_max > 0 or not cfg.dt_out > 0:
        raise UsageError("t-max and dt-out must be positive")
    if cfg.n_traj < 2:
        raise UsageError("n-traj must be at least 2")
    cfg.system(), cfg.field(), cfg.packet()
    return cfg


_HELP = {
    "simulate": "center, width and transmission time series (series.csv, summary.json)",
    "trajectories": "scaled trajectory fan (trajectories.csv)",
    "widths": "CK and Kostin widths for several epsilons (widths.csv)",
    "sweep": "stationary transmission over one parameter (sweep.csv, sweep.json)",
    "resonance": "refined transmission maximum over omega0 or phi (resonance.json)",
    "oracle-check": "grid wave-equation solver against the Gaussian ansatz (oracle.txt)",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scaled-tunnel",
                     description="Dissipative tunnelling of a Gaussian packet through a driven "
                                 "inverted parabolic barrier.",
                     epilog="Numeric values may use pi and omega, e.g. --gamma 0.3*omega.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, help=_HELP[name], description=_HELP[name])
        p.add_argument("--config", help="flat JSON configuration file")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="override a configuration key; for sweep/resonance a bare "
                            "name selects the swept parameter")
        for key, f in _FIELDS.items():
            if key in ("seed", "out"):
                continue
            if key in _BOOLEAN:
                p.add_argument(f"--{key}", dest=f"cfg_{f.name}", action="store_const",
                               const="true", default=None)
            else:
                p.add_argument(f"--{key}", dest=f"cfg_{f.name}", default=None, metavar="X")
        p.add_argument("--out", dest="cfg_out", default=None, metavar="DIR",
                       help="output directory")
        p.add_argument("--seed", dest="cfg_seed", default=None, metavar="N",
                       help="64-bit random seed")
    return parser


def _attach_negative_values(argv):
    """Join ``--phi -pi/2`` into ``--phi=-pi/2`` so argparse keeps the value."""
    takes_value = {f"--{k}" for k in _FIELDS if k not in _BOOLEAN} | {"--config", "--param"}
    known = takes_value | {f"--{k}" for k in _BOOLEAN} | {"-h", "--help", "--version"}
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if (tok in takes_value and i + 1 < len(argv) and argv[i + 1].startswith("-")
                and argv[i + 1] not in known):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def parse_args(argv):
    args = make_parser().parse_args(_attach_negative_values(list(argv)))
    raw = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a flat JSON object")
        raw.update(loaded)
    for key, f in _FIELDS.items():
        value = getattr(args, f"cfg_{f.name}", None)
        if value is not None:
            raw[key] = value
    swept = []
    for item in args.param:
        if "=" in item:
            key, value = item.split("=", 1)
            raw[key.strip()] = value.strip()
        else:
            swept.append(item.strip())
    if swept and args.command not in ("sweep", "resonance"):
        raise UsageError(f"--param {swept[0]} needs the form KEY=VALUE")
    if len(swept) > 1:
        raise UsageError("only one swept parameter may be given")
    cfg = build_config(raw)
    return args.command, cfg, (swept[0] if swept else None)


def _metadata(command: str, cfg: RunConfig, extra: dict | None = None) -> dict:
    meta = {"program": "scaled-tunnel", "version": __version__, "command": command,
            "seed": cfg.seed, "config": cfg.as_dict()}
    if extra:
        meta.update(extra)
    return meta


def _gnuplot(path: Path, data: Path, columns: list[str], xlabel: str, ylabel: str):
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             f"set xlabel '{xlabel}'", f"set ylabel '{ylabel}'"]
    plots = [f"'{data.name}' using 1:{i + 2} with lines" for i in range(len(columns))]
    lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n")


def _time_grid(cfg: RunConfig):
    n = int(round(cfg.t_max / cfg.dt_out))
    if abs(n * cfg.dt_out - cfg.t_max) > 1e-9 * cfg.t_max:
        raise UsageError("t-max must be a multiple of dt-out")
    return n


def cmd_simulate(cfg: RunConfig, out: Path, meta: dict) -> None:
    _time_grid(cfg)
    init, params, bf = cfg.packet(), cfg.system(), cfg.field()
    series = evolve_packet(cfg.approach, init, params, bf, cfg.t_max, cfg.dt_out)
    curve = transmission_curve(series, init, cfg.x_d)
    write_csv(out / "series.csv", ["t", "x_center", "v_center", "sigma", "sigma_dot", "T"],
              [series.times, series.x_t, series.v_t, series.sigma, series.sigma_dot, curve.T],
              meta)
    onset = plateau_onset(curve.times, curve.T)
    i150 = int(round(150.0 / cfg.dt_out))
    write_json(out / "summary.json", {
        "approach": cfg.approach, "t_max": cfg.t_max, "x_d": cfg.x_d,
        "T_final": float(curve.T[-1]),
        "T_150": float(curve.T[i150]) if i150 < len(curve.T) else None,
        "t_plateau": onset, "plateau_found": onset is not None,
        "x_center_final": float(series.x_t[-1]), "sigma_final": float(series.sigma[-1]),
        "metadata": meta})
    if cfg.gnuplot:
        _gnuplot(out / "series.gp", out / "series.csv", ["T"], "t", "T(t)")


def cmd_trajectories(cfg: RunConfig, out: Path, meta: dict) -> None:
    _time_grid(cfg)
    init, params, bf = cfg.packet(), cfg.system(), cfg.field()
    series = evolve_packet(cfg.approach, init, params, bf, cfg.t_max, cfg.dt_out)
    ens = sample_ensemble(init, cfg.n_traj, cfg.sampling, seed=cfg.seed)
    ens = propagate_ensemble(ens, series.times, series.x_t, series.sigma, init)
    meta = dict(meta, sampling=ens.mode,
                initial_positions=[float(v) for v in ens.initial_positions])
    path = write_trajectories_csv(out / "trajectories.csv", series.times, ens.paths,
                                  series.x_t, series.sigma, meta)
    if cfg.gnuplot:
        _gnuplot(out / "trajectories.gp", path, [f"x_traj_{i}" for i in range(cfg.n_traj)]
                 + ["x_center"], "t", "x")


def cmd_widths(cfg: RunConfig, out: Path, meta: dict) -> None:
    _time_grid(cfg)
    init, bf = cfg.packet(), cfg.field()
    try:
        eps = [evaluate(e, {"pi": math.pi}) for e in cfg.epsilons.split(",") if e.strip()]
    except UsageError:
        raise UsageError(f"bad epsilons list {cfg.epsilons!r}") from None
    header, cols = ["t"], []
    times = None
    for approach in (Approach.CK, Approach.KOSTIN):
        for e in eps:
            params = SystemParams(cfg.m, cfg.hbar, cfg.q, cfg.gamma, e)
            series = evolve_packet(approach, init, params, bf, cfg.t_max, cfg.dt_out)
            times = series.times
            header.append(f"sigma_{approach.value}_eps_{e:g}")
            cols.append(series.sigma)
    path = write_csv(out / "widths.csv", header, [times, *cols], meta)
    if cfg.gnuplot:
        _gnuplot(out / "widths.gp", path, header[1:], "t", "sigma")


def _sweep_grid(cfg: RunConfig, param: str):
    if cfg.grid:
        try:
            start, stop, num = cfg.grid.split(":")
            names = {"pi": math.pi, "omega": cfg.omega}
            values = np.linspace(evaluate(start, names), evaluate(stop, names), int(num))
        except (ValueError, UsageError):
            raise UsageError(f"grid must read START:STOP:NUM, got {cfg.grid!r}") from None
        return values
    w = cfg.omega
    defaults = {"epsilon": np.linspace(0.0, 1.0, 11), "gamma": np.linspace(0.0, 0.5 * w, 11),
                "E0": np.linspace(0.0, 0.12, 13), "omega0": np.linspace(0.05 * w, 3.0 * w, 60),
                "phi": np.linspace(0.0, 2.0 * math.pi, 49)}
    return defaults[param]


def cmd_sweep(cfg: RunConfig, out: Path, meta: dict, param: str | None,
              resonance: bool = False) -> None:
    allowed = ("omega0", "phi") if resonance else SWEEP_PARAMS
    if param is None or param not in allowed:
        raise UsageError(f"choose the swept parameter with --param {{{'|'.join(allowed)}}}")
    _time_grid(cfg)
    init, params, bf = cfg.packet(), cfg.system(), cfg.field()
    grid = _sweep_grid(cfg, param)
    meta = dict(meta, swept=param)
    if resonance:
        res = find_resonance(param, grid, init, params, bf, cfg.approach, cfg.t_max,
                             workers=cfg.workers)
        summary = extremum_summary(param, res.argmax, res.T_max, res.refined)
        write_json(out / "resonance.json", dict(summary, metadata=meta))
        write_sweep_csv(out / "resonance_sweep.csv", res.sweep, meta)
        return
    result = sweep(param, grid, init, params, bf, cfg.approach, cfg.t_max,
                   workers=cfg.workers)
    path = write_sweep_csv(out / "sweep.csv", result, meta)
    summary = extremum_summary(param, result.argmax, result.T_max, False)
    summary["at_boundary"] = result.at_boundary
    summary["T_short"] = result.metadata["T_short"]
    summary["argmax_short"] = result.metadata["argmax_short"]
    summary["t_short"] = result.metadata["t_short"]
    write_json(out / "sweep.json", dict(summary, metadata=meta))
    if cfg.gnuplot:
        _gnuplot(out / "sweep.gp", path, ["T_stationary"], param, "T")


def _short(tol: float) -> str:
    mantissa, exponent = f"{tol:e}".split("e")
    return f"{float(mantissa):g}e{int(exponent)}"


def cmd_oracle(cfg: RunConfig, out: Path, meta: dict) -> bool:
    init, params, bf = cfg.packet(), cfg.system(), cfg.field()
    approach = Approach.parse(cfg.approach)
    t_end = cfg.oracle_t_end or (10.0 if approach is Approach.CK else 30.0)
    run = propagate(init_gaussian(Grid(), init, params), params, bf, cfg.oracle_dt, t_end,
                    approach, observe_every=1.0)
    obs = run.observables
    series = evolve_packet(approach, init, params, bf, t_end, 0.1)
    x_ref, _, s_ref, _ = series.arrays_at(obs["t"])
    width_err = float(np.max(np.abs(obs["sigma"] / s_ref - 1.0)))
    center_err = float(np.max(np.abs(obs["x_mean"] - x_ref) / s_ref))
    norm_drift = float(np.max(np.abs(obs["norm"] - 1.0)))
    final = run.final
    st = series.at(final.t)
    l2 = ansatz_density_error(final, st.x_t, st.sigma)
    checks = [("norm_drift", norm_drift, 1e-8)]
    if approach is Approach.CK:
        checks.insert(0, ("L2_density_error", l2, 1e-6))
    else:
        checks.insert(0, ("width_rel_error", width_err, 1e-3))
    lines = [f"{name} < {_short(tol)}: {'PASS' if value < tol else 'FAIL'} ({value:.3e})"
             for name, value, tol in checks]
    ok = all(value < tol for _, value, tol in checks)
    (out / "oracle.txt").write_text("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    write_json(out / "oracle.json", {
        "approach": approach.value, "t_end": t_end, "L2_density_error": l2,
        "width_rel_error": width_err, "center_error_over_sigma": center_err,
        "norm_drift": norm_drift, "passed": ok,
        "global_phase_drift": run.metadata["global_phase_drift"],
        "regrids": [list(e) for e in run.metadata["regrids"]], "metadata": meta})
    write_observables_csv(out / "observables.csv", obs, meta)
    if cfg.snapshots:
        write_snapshot_csv(out / "snapshot_final.csv", final, meta)
    return ok


def run(argv=None) -> int:
    try:
        command, cfg, swept = parse_args(sys.argv[1:] if argv is None else argv)
    except (UsageError, ParameterError) as exc:
        print(f"scaled-tunnel: usage error: {exc}", file=sys.stderr)
        return 1
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = _metadata(command, cfg)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PlateauWarning)
            if command == "simulate":
                cmd_simulate(cfg, out, meta)
            elif command == "trajectories":
                cmd_trajectories(cfg, out, meta)
            elif command == "widths":
                cmd_widths(cfg, out, meta)
            elif command == "sweep":
                cmd_sweep(cfg, out, meta, swept)
            elif command == "resonance":
                cmd_sweep(cfg, out, meta, swept, resonance=True)
            elif command == "oracle-check":
                if not cmd_oracle(cfg, out, meta):
                    return 2
    except (UsageError, ParameterError) as exc:
        print(f"scaled-tunnel: usage error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, GridError, FloatingPointError) as exc:
        print(f"scaled-tunnel: numerical failure in {type(exc).__module__}: {exc}",
              file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
