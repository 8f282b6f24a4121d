"""Command-line front end.

Every subcommand resolves its settings from built-in defaults, then the
``--config`` file (sections ``[global]`` and ``[<command>]``), then explicit
flags.  Outputs go to ``--out-dir`` together with ``<command>_manifest.json``
recording the resolved configuration and SHA-256 digests of every file.

Exit codes: 0 success, 2 configuration or parameter error, 3 numerical
degeneracy (e.g. Lyapunov exponents at r = 0), 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import attractor as attr
from . import bifurcation as bif
from . import finite_n, fixed_points, lyapunov
from .core import InvalidParamsError, InvalidStateError, MapParams, random_bloch_state
from .io import (ConfigError, parse_value, read_config, read_manifest, sha256_file, write_csv,
                 write_json, write_manifest)

log = logging.getLogger("dampedtop")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3

GLOBAL_KEYS = {"seed": "int", "threads": "int", "out_dir": "str"}
GLOBAL_DEFAULTS = {"seed": 0, "threads": 1, "out_dir": "."}

MAP_KEYS = {"alpha": "float", "beta": "float"}
MAP_DEFAULTS = {"alpha": math.pi / 2, "beta": 6.0}
RANGE_KEYS = {"r_min": "float", "r_max": "float", "r_step": "float", "r_list": "floats"}

SCHEMA = {
    "global": GLOBAL_KEYS,
    "sweep": {**MAP_KEYS, **RANGE_KEYS, "preset": "str", "transient": "int", "samples": "int",
              "warm_start": "bool", "plot": "bool", "max_period": "int", "tol": "float"},
    "fixed-points": {**MAP_KEYS, "r": "float", "z_min": "float", "z_max": "float",
                     "grid_n": "int", "plot": "bool"},
    "lyapunov": {**MAP_KEYS, **RANGE_KEYS, "steps": "int", "transient": "int",
                 "reortho": "int", "plot": "bool"},
    "attractor": {**MAP_KEYS, "r": "float", "n": "int", "centers": "int",
                  "transient": "int", "plot": "bool"},
    "converge": {**MAP_KEYS, "r": "float", "n_list": "ints", "steps": "int", "plot": "bool"},
    "feigenbaum": {**MAP_KEYS, "brackets": "brackets", "transient": "int", "width": "float"},
    "windows": {**MAP_KEYS, **RANGE_KEYS, "transient": "int", "samples": "int",
                "min_width": "float", "warm_start": "bool", "plot": "bool",
                "max_period": "int", "tol": "float"},
}

DEFAULTS = {
    "sweep": {**MAP_DEFAULTS, "preset": None, "r_min": None, "r_max": None, "r_step": None,
              "r_list": None, "transient": bif.DEFAULT_TRANSIENT, "samples": bif.DEFAULT_SAMPLES,
              "warm_start": True, "plot": True, "max_period": bif.DEFAULT_MAX_PERIOD,
              "tol": bif.DEFAULT_TOL},
    "fixed-points": {**MAP_DEFAULTS, "r": None, "z_min": fixed_points.DEFAULT_WINDOW[0],
                     "z_max": fixed_points.DEFAULT_WINDOW[1],
                     "grid_n": fixed_points.DEFAULT_GRID_N, "plot": False},
    "lyapunov": {**MAP_DEFAULTS, "r_min": 0.01, "r_max": 0.99, "r_step": 0.01, "r_list": None,
                 "steps": lyapunov.DEFAULT_STEPS, "transient": lyapunov.DEFAULT_TRANSIENT,
                 "reortho": 1, "plot": True},
    "attractor": {**MAP_DEFAULTS, "r": 0.75, "n": 10_000, "centers": 1000, "transient": 1000,
                  "plot": True},
    "converge": {**MAP_DEFAULTS, "r": 0.4, "n_list": [2, 10, 100, 1000, 10_000, 100_000],
                 "steps": 1, "plot": True},
    "feigenbaum": {**MAP_DEFAULTS, "brackets": [list(b) for b in bif.CHAOTIC_CASCADE_BRACKETS],
                   "transient": bif.BISECTION_TRANSIENT, "width": 1e-5},
    "windows": {**MAP_DEFAULTS, "r_min": 0.60, "r_max": 0.72, "r_step": 5e-4, "r_list": None,
                "transient": bif.DEFAULT_TRANSIENT, "samples": bif.DEFAULT_SAMPLES,
                "min_width": 1e-3, "warm_start": True, "plot": True,
                "max_period": bif.DEFAULT_MAX_PERIOD, "tol": bif.DEFAULT_TOL},
}

PRESETS = {
    "cascade": (0.3, 0.6, 2e-4),
    "selfsim": (0.537, 0.546, 1e-5),
    "overview": (0.0, 1.0, 2e-4),
    "windows": (0.60, 0.72, 5e-4),
}


def r_grid(cfg: dict) -> np.ndarray:
    if cfg.get("r_list"):
        grid = np.array(sorted(cfg["r_list"]), dtype=float)
    else:
        if cfg.get("preset"):
            if cfg["preset"] not in PRESETS:
                raise ConfigError(f"unknown preset {cfg['preset']!r}; choose from {sorted(PRESETS)}")
            lo, hi, dr = PRESETS[cfg["preset"]]
            lo = cfg["r_min"] if cfg.get("r_min") is not None else lo
            hi = cfg["r_max"] if cfg.get("r_max") is not None else hi
            dr = cfg["r_step"] if cfg.get("r_step") is not None else dr
        else:
            lo, hi, dr = cfg.get("r_min"), cfg.get("r_max"), cfg.get("r_step")
        if lo is None or hi is None or dr is None:
            raise ConfigError("need r_list, a preset, or r_min/r_max/r_step")
        if not dr > 0:
            raise ConfigError("r_step must be positive")
        if hi < lo:
            raise ConfigError("r_max must not be below r_min")
        n = int(math.floor((hi - lo) / dr + 1e-9)) + 1
        grid = np.round(lo + dr * np.arange(n), 12)
    if len(grid) == 0:
        raise ConfigError("empty r grid")
    return grid


def _params(cfg, r=0.0) -> MapParams:
    return MapParams(r=float(r), alpha=cfg["alpha"], beta=cfg["beta"])


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------- commands


def run_sweep(cfg, out: Path):
    grid = r_grid(cfg)
    p = _params(cfg)
    diag = bif.sweep(grid, p, cfg["transient"], cfg["samples"], cfg["seed"],
                     cfg["warm_start"], cfg["threads"])
    periods = diag.periods(cfg["max_period"], cfg["tol"])
    files = [write_csv(out / "sweep.csv", ["r", "x", "y", "z"], diag.rows())]
    summary = {
        "r": grid,
        "period": [pr.period for pr in periods],
        "windows": [vars(w) | {"periods": list(w.periods)}
                    for w in bif.find_windows(diag, periods=periods)] if len(grid) > 2 else [],
    }
    files.append(write_json(out / "sweep.json", summary))
    if cfg["plot"]:
        from .plotting import bifurcation_figure
        files.append(bifurcation_figure(diag, out / "sweep.svg", title=cfg.get("preset")))
    return files, None


def run_fixed_points(cfg, out: Path):
    if cfg["r"] is None:
        raise ConfigError("fixed-points needs --r")
    p = _params(cfg, cfg["r"])
    fps = fixed_points.find_fixed_points(p, (cfg["z_min"], cfg["z_max"]), cfg["grid_n"])
    payload = [fp.to_dict() for fp in fps]
    files = [write_json(out / "fixed_points.json", payload)]
    if cfg["plot"]:
        from .plotting import residual_figure
        files.append(residual_figure(sorted({0.6, 0.9, 0.972, 0.99, 1.0, p.r}), p.alpha, p.beta,
                                     out / "fixed_points.svg"))
    return files, payload


def run_lyapunov(cfg, out: Path):
    grid = r_grid(cfg)
    if np.any(grid == 0.0):
        raise lyapunov.CollapseError("r = 0 is in the grid: the spectrum is -inf (collapse)")
    v0 = random_bloch_state(cfg["seed"])

    def job(r):
        return lyapunov.lyapunov_spectrum(v0, _params(cfg, r), cfg["steps"], cfg["reortho"],
                                          cfg["transient"])

    spectra = _map(job, grid, cfg["threads"])
    rows = [(s.r_value, s.lambda1, s.lambda2, s.lambda3, s.ks_entropy) for s in spectra]
    files = [write_csv(out / "lyapunov.csv", ["r", "lambda1", "lambda2", "lambda3", "h_ks"], rows)]
    if cfg["plot"]:
        from .plotting import lyapunov_figure
        diag = bif.sweep(grid, _params(cfg), 2000, 100, cfg["seed"], True)
        files.append(lyapunov_figure(grid, spectra, out / "lyapunov.svg", diag))
    return files, None


def run_attractor(cfg, out: Path):
    p = _params(cfg, cfg["r"])
    cloud = attr.generate_attractor(p, cfg["n"], cfg["seed"], cfg["transient"])
    files = [write_csv(out / "attractor.csv", ["x", "y", "z"], cloud.points.tolist())]
    result = {"r": p.r, "n_points": len(cloud), "seed": cfg["seed"], "diameter": cloud.diameter}
    fit = None
    if cloud.diameter < 1e-6:
        log.warning("degenerate cloud at r=%g (diameter %.3g): orbit is stationary, "
                    "no correlation dimension", p.r, cloud.diameter)
        result.update(degenerate=True, slope=None)
    else:
        try:
            fit = attr.correlation_dimension(cloud, cfg["centers"], seed=cfg["seed"])
        except attr.EmptyBallRangeError as exc:
            log.warning("no correlation fit: %s", exc)
            result.update(degenerate=True, slope=None)
        else:
            a, b = fit.fit_range
            result.update(degenerate=False, slope=fit.slope, intercept=fit.intercept,
                          fit_eps=[fit.eps_values[a], fit.eps_values[b - 1]], fit_rms=fit.fit_rms)
            files.append(write_csv(out / "correlation.csv", ["eps", "C"],
                                   zip(fit.eps_values, fit.counts)))
    files.append(write_json(out / "dimension.json", result))
    if cfg["plot"]:
        from .plotting import attractor_figure, correlation_figure
        files.append(attractor_figure(cloud, out / "attractor.svg"))
        if fit is not None:
            files.append(correlation_figure(fit, out / "correlation.svg"))
    return files, result


def run_converge(cfg, out: Path):
    p = _params(cfg, cfg["r"])
    n_list = sorted(cfg["n_list"])
    if not n_list or n_list[0] < 2:
        raise ConfigError("n_list must contain values >= 2")
    rows = finite_n.convergence_error(random_bloch_state(cfg["seed"]), p, n_list, cfg["steps"])
    files = [write_csv(out / "converge.csv", ["N", "error"], rows)]
    if cfg["plot"]:
        from .plotting import convergence_figure
        files.append(convergence_figure(rows, out / "converge.svg"))
    return files, None


def run_feigenbaum(cfg, out: Path):
    p = _params(cfg)
    cascade = bif.locate_cascade(p, [tuple(b) for b in cfg["brackets"]], seed=cfg["seed"],
                                 n_transient=cfg["transient"], width=cfg["width"])
    files = [write_csv(out / "feigenbaum.csv", ["k", "r_k"],
                       [(k, r) for k, r in enumerate(cascade.r_values, start=1)])]
    result = {"r_k": cascade.r_values}
    if len(cascade.r_values) >= 3:
        ratios, bound = bif.feigenbaum_ratios(cascade)
        result.update(ratios=ratios, next_r=cascade.next_estimate, r_inf_bound=bound)
    files.append(write_json(out / "feigenbaum.json", result))
    return files, result


def run_windows(cfg, out: Path):
    grid = r_grid(cfg)
    diag = bif.sweep(grid, _params(cfg), cfg["transient"], cfg["samples"], cfg["seed"],
                     cfg["warm_start"], cfg["threads"])
    periods = diag.periods(cfg["max_period"], cfg["tol"])
    wins = bif.find_windows(diag, cfg["min_width"], periods=periods)
    files = [write_csv(out / "windows.csv", ["r_low", "r_high", "dominant_period"],
                       [(w.r_low, w.r_high, w.dominant_period) for w in wins])]
    result = {"windows": [{"r_low": w.r_low, "r_high": w.r_high,
                           "dominant_period": w.dominant_period,
                           "periods": sorted(set(w.periods))} for w in wins],
              "r": grid, "period": [pr.period for pr in periods]}
    files.append(write_json(out / "windows.json", result))
    if cfg["plot"]:
        from .plotting import bifurcation_figure
        files.append(bifurcation_figure(diag, out / "windows.svg", windows=wins))
    return files, result["windows"]


COMMANDS = {
    "sweep": run_sweep,
    "fixed-points": run_fixed_points,
    "lyapunov": run_lyapunov,
    "attractor": run_attractor,
    "converge": run_converge,
    "feigenbaum": run_feigenbaum,
    "windows": run_windows,
}

HELP = {
    "sweep": "bifurcation diagram over a range of r",
    "fixed-points": "fixed points and their stability at one r",
    "lyapunov": "Lyapunov spectrum and KS entropy over a range of r",
    "attractor": "attractor point cloud and correlation dimension",
    "converge": "finite-N convergence to the infinite-N map",
    "feigenbaum": "period-doubling points and Feigenbaum ratios",
    "windows": "periodic windows inside the chaotic band",
}


# ---------------------------------------------------------------- argparse


def _flag(key):
    return "--" + key.replace("_", "-")


def _bool_flag(parser, key):
    parser.add_argument(_flag(key), dest=key, action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    g.add_argument("--out-dir", dest="out_dir", default=argparse.SUPPRESS)
    g.add_argument("--config", default=argparse.SUPPRESS, help="sectioned key = value file")
    g.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="dampedtop", description=__doc__.split("\n")[0],
                                     parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, keys in SCHEMA.items():
        if name == "global":
            continue
        sp = sub.add_parser(name, parents=[common], help=HELP[name])
        for key, kind in keys.items():
            if kind == "bool":
                _bool_flag(sp, key)
            elif kind in ("floats", "ints", "brackets"):
                sp.add_argument(_flag(key), dest=key, default=None, nargs="+", metavar="V")
            else:
                sp.add_argument(_flag(key), dest=key, default=None, metavar=kind.upper())
    rp = sub.add_parser("replay", parents=[common],
                        help="re-run a manifest and verify its output digests")
    rp.add_argument("manifest")
    return parser


def resolve(command: str, ns: argparse.Namespace) -> dict:
    cfg = dict(GLOBAL_DEFAULTS)
    cfg.update(DEFAULTS[command])
    if getattr(ns, "config", None):
        sections = read_config(ns.config, SCHEMA)
        cfg.update(sections.get("global", {}))
        cfg.update(sections.get(command, {}))
    for key in GLOBAL_KEYS:
        if hasattr(ns, key):
            cfg[key] = getattr(ns, key)
    for key, kind in SCHEMA[command].items():
        val = getattr(ns, key, None)
        if isinstance(val, list):
            val = " ".join(val)
        if val is not None:
            cfg[key] = parse_value(kind, val)
    if cfg["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    return cfg


def execute(command: str, cfg: dict, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    files, payload = COMMANDS[command](cfg, out)
    manifest_cfg = {k: v for k, v in cfg.items() if k != "out_dir"}
    write_manifest(out / f"{command.replace('-', '_')}_manifest.json", command, manifest_cfg,
                   files, cfg["seed"])
    return files, payload


def replay(manifest_path, out_dir) -> int:
    man = read_manifest(manifest_path)
    command = man["command"]
    if command not in COMMANDS:
        raise ConfigError(f"unknown command in manifest: {command!r}")
    cfg = dict(GLOBAL_DEFAULTS)
    cfg.update(DEFAULTS[command])
    cfg.update(man["config"])
    out = Path(out_dir)
    files, _ = execute(command, cfg, out)
    bad = [name for name, digest in man["outputs"].items()
           if not (out / name).exists() or sha256_file(out / name) != digest]
    for name in bad:
        print(f"digest mismatch: {name}", file=sys.stderr)
    if not bad:
        print(f"all {len(man['outputs'])} outputs reproduced")
    return EXIT_OK if not bad else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if ns.command == "replay":
            return replay(ns.manifest, getattr(ns, "out_dir", "."))
        cfg = resolve(ns.command, ns)
        files, payload = execute(ns.command, cfg, Path(cfg["out_dir"]))
        if payload is not None:
            from .io import dumps
            sys.stdout.write(dumps(payload))
        return EXIT_OK
    except (ConfigError, InvalidParamsError, InvalidStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except lyapunov.CollapseError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
