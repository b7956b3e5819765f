"""Command-line entry point.

Subcommands mirror the measurement protocols: ``grow``, ``static``,
``grow-mut``, ``fixation``, ``timeseries``, ``degree-profile`` and
``compare-learning``.  Parameters resolve flag > config file > default;
the config file is flat ``key=value`` text using the flag names.  Every
run writes its CSV output(s) plus a ``<out>.manifest.json`` recording
the fully resolved configuration, seed, package version and wall time,
which is sufficient to reproduce the run byte for byte (wall-time and
timestamp fields aside).

Exit codes: 0 success, 1 runtime failure or interrupt (partial rows are
flushed), 2 invalid configuration.  The ``COOPNET_OUTDIR`` environment
variable redirects relative output paths.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .experiments import (
    ExperimentConfig,
    FixationTable,
    SweepTable,
    TimeSeries,
    fixation_point,
    run_degree_profile,
    run_learning_comparison,
    run_time_series,
    sweep_point,
)
from .graph import EdgePlacementError

ENV_OUTDIR = "COOPNET_OUTDIR"

COMMANDS = (
    "grow",
    "static",
    "grow-mut",
    "fixation",
    "timeseries",
    "degree-profile",
    "compare-learning",
)


class ConfigError(Exception):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


# -- parameter table ----------------------------------------------------


def _parse_alpha(text: str) -> float:
    if text.strip().lower() in ("inf", "infinite", "infinity"):
        return math.inf
    return float(text)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in str(text).split(",") if tok.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in str(text).split(",") if tok.strip())


@dataclass(frozen=True)
class Param:
    name: str
    parse: Callable[[str], Any]
    default: Any
    help: str
    flag: str | None = None  # derived from name unless set


def _flag(p: Param) -> str:
    return p.flag if p.flag else "--" + p.name.replace("_", "-")


_COMMON = [
    Param("model", str, "ma", "growth mechanism: bam, ma or rnm"),
    Param("L", int, 4, "links per inserted node (initial clique size)"),
    Param("rule", str, "democratic", "update rule: democratic or learning"),
    Param("beta", float, 1.0, "social-influence intensity"),
    Param("alpha", _parse_alpha, math.inf, "selection intensity ('inf' for the hard gate)"),
    Param("a", float, 2.0, "learning-activity exponent"),
    Param("seed", int, 0, "master seed; fully determines every output byte"),
    Param("threads", int, 1, "worker processes for realizations"),
    Param("out", str, None, "output CSV path"),
]

_BY_COMMAND: dict[str, list[Param]] = {
    "grow": _COMMON
    + [
        Param("n", float, 0.001, "growth fraction per generation"),
        Param("N_i", int, 500, "initial cooperator count", flag="--N_i"),
        Param("N_max", int, 4000, "final system size", flag="--N_max"),
        Param("r_grid", _parse_floats, (1.05, 1.5, 2.0, 3.0), "comma-separated benefit-cost ratios"),
        Param("realizations", int, 10, "independent realizations per grid point"),
        Param("window_frac", float, 0.9, "measure cooperation above this fraction of N_max"),
    ],
    "static": _COMMON
    + [
        Param("P_m", float, 0.01, "mutation probability", flag="--P_m"),
        Param("N", int, 2000, "fixed system size", flag="--N"),
        Param("transient", int, 2000, "generations discarded before measuring"),
        Param("measure", int, 500, "generations averaged"),
        Param("r_grid", _parse_floats, (1.05, 1.5, 2.0, 3.0), "comma-separated benefit-cost ratios"),
        Param("realizations", int, 10, "independent realizations per grid point"),
    ],
    "grow-mut": _COMMON
    + [
        Param("n", float, 0.001, "growth fraction per generation"),
        Param("P_m", float, 0.01, "mutation probability", flag="--P_m"),
        Param("N_i", int, 500, "initial cooperator count", flag="--N_i"),
        Param("N_max", int, 4000, "final system size", flag="--N_max"),
        Param("r_grid", _parse_floats, (1.05, 1.5, 2.0, 3.0), "comma-separated benefit-cost ratios"),
        Param("realizations", int, 10, "independent realizations per grid point"),
        Param("window_frac", float, 0.9, "measure cooperation above this fraction of N_max"),
        Param("transient", int, 2000, "static-fallback transient when n=0"),
        Param("measure", int, 500, "static-fallback measurement window when n=0"),
    ],
    "fixation": _COMMON
    + [
        Param("n", float, 0.01, "growth fraction per generation"),
        Param("P_m", float, 0.01, "mutation probability", flag="--P_m"),
        Param("r", float, 3.0, "benefit-cost ratio (must exceed the transition)"),
        Param("N_i_grid", _parse_ints, (8, 50, 200, 800), "comma-separated seed sizes", flag="--N_i-grid"),
        Param("M", int, 50, "trials per seed size", flag="--M"),
        Param("N_max", int, 3000, "target size a run must reach", flag="--N_max"),
    ],
    "timeseries": _COMMON
    + [
        Param("n", float, 0.0, "growth fraction per generation"),
        Param("P_m", float, 0.01, "mutation probability", flag="--P_m"),
        Param("r", float, 2.0, "benefit-cost ratio"),
        Param("N_i", int, 2000, "initial cooperator count", flag="--N_i"),
        Param("N_max", int, 4000, "size cap when growing", flag="--N_max"),
        Param("generations", int, 1000, "trace length"),
    ],
    "degree-profile": _COMMON
    + [
        Param("P_m", float, 0.01, "mutation probability", flag="--P_m"),
        Param("r", float, 2.0, "benefit-cost ratio"),
        Param("N", int, 2000, "fixed system size", flag="--N"),
        Param("transient", int, 2000, "generations discarded before measuring"),
        Param("measure", int, 500, "generations averaged"),
        Param("realizations", int, 10, "independent networks"),
    ],
    "compare-learning": _COMMON
    + [
        Param("P_m", float, 0.01, "mutation probability", flag="--P_m"),
        Param("r", float, 4.0, "benefit-cost ratio"),
        Param("N", int, 2000, "fixed system size", flag="--N"),
        Param("transient", int, 2000, "generations discarded before measuring"),
        Param("measure", int, 500, "generations averaged"),
        Param("realizations", int, 10, "independent networks per rule"),
    ],
}

_DEFAULT_OUT = {
    "grow": "grow_sweep.csv",
    "static": "static_sweep.csv",
    "grow-mut": "grow_mut_sweep.csv",
    "fixation": "fixation.csv",
    "timeseries": "timeseries.csv",
    "degree-profile": "degree_profile.csv",
    "compare-learning": "learning_comparison.csv",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopnet",
        description="Evolutionary prisoner's dilemma on growing networks.",
    )
    parser.add_argument("--version", action="version", version=f"coopnet {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    for command, params in _BY_COMMAND.items():
        sub = subs.add_parser(command)
        sub.add_argument("--config", default=None, help="flat key=value config file")
        sub.add_argument(
            "--dry-run",
            action="store_true",
            help="print the resolved configuration and work estimate, then exit",
        )
        for p in params:
            sub.add_argument(
                _flag(p), dest=p.name, type=str, default=None, help=p.help
            )
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Merge flags over config-file values over defaults, then validate."""
    params = {p.name: p for p in _BY_COMMAND[args.command]}
    file_values: dict[str, str] = {}
    if args.config:
        file_values = _read_config_file(args.config)
        for key in file_values:
            if key not in params:
                raise ConfigError(key, "unknown configuration key")
    resolved: dict[str, Any] = {}
    for name, p in params.items():
        raw = getattr(args, name)
        if raw is None and name in file_values:
            raw = file_values[name]
        if raw is None:
            resolved[name] = p.default
        else:
            try:
                resolved[name] = p.parse(raw)
            except (TypeError, ValueError):
                raise ConfigError(name, f"cannot parse value {raw!r}")
    if resolved.get("out") is None:
        resolved["out"] = _DEFAULT_OUT[args.command]
    _validate(args.command, resolved)
    return resolved


def _validate(command: str, res: dict[str, Any]) -> None:
    def need(key: str, ok: bool, message: str) -> None:
        if key in res and not ok:
            raise ConfigError(key, message)

    need("model", res.get("model") in ("bam", "ma", "rnm"), "must be bam, ma or rnm")
    need("rule", res.get("rule") in ("democratic", "learning"), "must be democratic or learning")
    need("L", res.get("L", 2) >= 2, "must be >= 2")
    need("beta", math.isfinite(res.get("beta", 0.0)) and res.get("beta", 0.0) >= 0, "must be finite and >= 0")
    need("alpha", res.get("alpha", 1.0) > 0, "must be > 0 (or 'inf')")
    need("a", math.isfinite(res.get("a", 1.0)) and res.get("a", 1.0) > 0, "must be finite and > 0")
    need("seed", res.get("seed", 0) >= 0, "must be >= 0")
    need("threads", res.get("threads", 1) >= 1, "must be >= 1")
    need("P_m", 0.0 <= res.get("P_m", 0.0) <= 1.0, "must be in [0, 1]")
    if command == "fixation":
        need("n", res.get("n", 1.0) > 0, "must be > 0 for fixation runs")
    else:
        need("n", res.get("n", 0.0) >= 0, "must be >= 0")
    need("r", res.get("r", 2.0) > 1.0, "must exceed 1 (benefit above cost)")
    if "r_grid" in res:
        grid = res["r_grid"]
        need("r_grid", len(grid) >= 1, "must contain at least one ratio")
        need("r_grid", all(r > 1.0 for r in grid), "every ratio must exceed 1")
        need("r_grid", all(b > a for a, b in zip(grid, grid[1:])), "must be strictly increasing")
    L = res.get("L", 2)
    need("N", res.get("N", L) >= L, "must be at least L")
    need("N_i", res.get("N_i", L) >= L, "must be at least L")
    if "N_i" in res and "N_max" in res:
        need("N_max", res["N_max"] >= res["N_i"], "must be at least N_i")
    elif "N_max" in res:
        need("N_max", res["N_max"] >= L, "must be at least L")
    if "N_i_grid" in res:
        need("N_i_grid", len(res["N_i_grid"]) >= 1, "must contain at least one size")
        need("N_i_grid", all(s >= L for s in res["N_i_grid"]), "every size must be at least L")
    need("M", res.get("M", 1) >= 1, "must be >= 1")
    need("realizations", res.get("realizations", 1) >= 1, "must be >= 1")
    need("transient", res.get("transient", 0) >= 0, "must be >= 0")
    need("measure", res.get("measure", 1) >= 1, "must be >= 1")
    need("generations", res.get("generations", 1) >= 1, "must be >= 1")
    need("window_frac", 0.0 < res.get("window_frac", 0.5) < 1.0, "must be in (0, 1)")


def _experiment_config(command: str, res: dict[str, Any]) -> ExperimentConfig:
    base = dict(
        model=res["model"],
        links_per_node=res["L"],
        rule=res["rule"],
        beta=res["beta"],
        alpha=res["alpha"],
        abundance_exponent=res["a"],
        seed=res["seed"],
        threads=res["threads"],
    )
    if command == "grow":
        return ExperimentConfig(
            **base,
            r_grid=res["r_grid"],
            growth_fraction=res["n"],
            mutation_prob=0.0,
            initial_size=res["N_i"],
            max_size=res["N_max"],
            realizations=res["realizations"],
            window_fraction=res["window_frac"],
        )
    if command == "static":
        return ExperimentConfig(
            **base,
            r_grid=res["r_grid"],
            growth_fraction=0.0,
            mutation_prob=res["P_m"],
            initial_size=res["N"],
            max_size=res["N"],
            transient=res["transient"],
            measure=res["measure"],
            realizations=res["realizations"],
        )
    if command == "grow-mut":
        return ExperimentConfig(
            **base,
            r_grid=res["r_grid"],
            growth_fraction=res["n"],
            mutation_prob=res["P_m"],
            initial_size=res["N_i"],
            max_size=res["N_max"],
            realizations=res["realizations"],
            window_fraction=res["window_frac"],
            transient=res["transient"],
            measure=res["measure"],
        )
    if command == "fixation":
        return ExperimentConfig(
            **base,
            r_grid=(res["r"],),
            growth_fraction=res["n"],
            mutation_prob=res["P_m"],
            max_size=res["N_max"],
            trials=res["M"],
            seed_sizes=res["N_i_grid"],
        )
    if command == "timeseries":
        return ExperimentConfig(
            **base,
            r_grid=(res["r"],),
            growth_fraction=res["n"],
            mutation_prob=res["P_m"],
            initial_size=res["N_i"],
            max_size=res["N_max"],
            generations=res["generations"],
        )
    # degree-profile and compare-learning
    return ExperimentConfig(
        **base,
        r_grid=(res["r"],),
        growth_fraction=0.0,
        mutation_prob=res["P_m"],
        initial_size=res["N"],
        max_size=res["N"],
        transient=res["transient"],
        measure=res["measure"],
        realizations=res["realizations"],
    )


def _work_units(command: str, res: dict[str, Any]) -> int:
    if command in ("grow", "static", "grow-mut"):
        return len(res["r_grid"]) * res["realizations"]
    if command == "fixation":
        return len(res["N_i_grid"]) * res["M"]
    if command == "timeseries":
        return 1
    if command == "degree-profile":
        return res["realizations"]
    return 2 * res["realizations"]


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, tuple):
        return list(value)
    return value


def _write_manifest(
    out: Path,
    command: str,
    res: dict[str, Any],
    outputs: list[Path],
    wall_s: float,
    interrupted: bool,
) -> Path:
    path = Path(str(out) + ".manifest.json")
    payload = {
        "command": command,
        "config": {k: _jsonable(v) for k, v in sorted(res.items())},
        "seed": res["seed"],
        "version": __version__,
        "outputs": [str(o) for o in outputs],
        "wall_time_s": wall_s,
        "created_unix": time.time(),
        "interrupted": interrupted,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _resolve_out(res: dict[str, Any]) -> Path:
    out = Path(res["out"])
    outdir = os.environ.get(ENV_OUTDIR)
    if outdir and not out.is_absolute():
        out = Path(outdir) / out
    if out.parent != Path("."):
        out.parent.mkdir(parents=True, exist_ok=True)
    return out


def _dispatch(command: str, res: dict[str, Any]) -> int:
    cfg = _experiment_config(command, res)
    out = _resolve_out(res)
    t0 = time.monotonic()
    interrupted = False
    outputs = [out]

    if command in ("grow", "static", "grow-mut"):
        table = SweepTable()
        try:
            for gi, r in enumerate(cfg.r_grid):
                table.rows.append(sweep_point(cfg, r, gi))
        except KeyboardInterrupt:
            interrupted = True
        with open(out, "w", encoding="utf-8") as fh:
            table.write_csv(fh)
        summary = f"{len(table.rows)} grid rows"
    elif command == "fixation":
        table = FixationTable()
        try:
            for gi, seed_size in enumerate(cfg.seed_sizes):
                table.rows.append(fixation_point(cfg, seed_size, gi))
        except KeyboardInterrupt:
            interrupted = True
        with open(out, "w", encoding="utf-8") as fh:
            table.write_csv(fh)
        summary = f"{len(table.rows)} seed sizes"
    elif command == "timeseries":
        series = TimeSeries()
        try:
            series = run_time_series(cfg)
        except KeyboardInterrupt:
            interrupted = True
        with open(out, "w", encoding="utf-8") as fh:
            series.write_csv(fh)
        summary = f"{len(series.points)} generations"
    elif command == "degree-profile":
        profile = None
        try:
            profile = run_degree_profile(cfg)
        except KeyboardInterrupt:
            interrupted = True
        with open(out, "w", encoding="utf-8") as fh:
            if profile is None:
                fh.write("k_bin_lo,k_bin_hi,frac_defect,sample_count\n")
            else:
                profile.write_csv(fh)
        summary = (
            f"{len(profile.bins)} degree bins, top-decile defector fraction "
            f"{profile.top_decile_defector_fraction:.4g}"
            if profile is not None
            else "interrupted before aggregation"
        )
    else:  # compare-learning
        comparison = None
        try:
            comparison = run_learning_comparison(cfg)
        except KeyboardInterrupt:
            interrupted = True
        outputs = []
        for tag in ("democratic", "learning"):
            path = out.with_name(f"{out.stem}.{tag}{out.suffix or '.csv'}")
            outputs.append(path)
            with open(path, "w", encoding="utf-8") as fh:
                if comparison is None:
                    fh.write("k_bin_lo,k_bin_hi,frac_defect,sample_count\n")
                else:
                    getattr(comparison, tag).write_csv(fh)
        if comparison is not None:
            summary = (
                "top-decile defector fraction: democratic "
                f"{comparison.democratic.top_decile_defector_fraction:.4g}, "
                f"learning {comparison.learning.top_decile_defector_fraction:.4g}"
            )
        else:
            summary = "interrupted before aggregation"

    wall = time.monotonic() - t0
    manifest = _write_manifest(out, command, res, outputs, wall, interrupted)
    status = "interrupted, partial results flushed" if interrupted else "done"
    print(
        f"{command}: {status} ({summary}); wrote "
        f"{', '.join(str(o) for o in outputs)} and {manifest} in {wall:.1f}s"
    )
    return 1 if interrupted else 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        res = resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    if args.dry_run:
        for key in sorted(res):
            print(f"{key} = {_jsonable(res[key])}")
        print(f"work units: {_work_units(args.command, res)}")
        return 0
    try:
        return _dispatch(args.command, res)
    except (EdgePlacementError, ValueError, OSError) as exc:
        print(
            f"runtime failure: {exc} (command={args.command}, seed={res['seed']})",
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
