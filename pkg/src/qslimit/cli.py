"""Command-line interface: ``qslimit {point,sweep,figure}``.

Exit codes: 0 success, 1 usage or validation error, 2 some grid points
failed (output is still written), 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Mapping

from . import __version__
from .exceptions import ConfigError
from .sweeps import (
    FIGURES,
    MODELS,
    AxisSpec,
    RunConfig,
    columns,
    render_csv,
    reproduce_figure,
    run_sweep,
    write_csv,
    write_metadata,
)

EXIT_OK, EXIT_USAGE, EXIT_POINTS, EXIT_IO = 0, 1, 2, 3

COORD_KEYS = ("lambda", "gamma0", "s", "eta", "alpha", "beta", "theta", "time")
RUN_KEYS = ("model", *COORD_KEYS, "bound", "method", "tol", "horizon")
OTHER_KEYS = ("out", "jobs", "resolution")
KNOWN_KEYS = RUN_KEYS + OTHER_KEYS


def read_config_file(path) -> dict[str, str]:
    """Read flat ``key=value`` lines; ``#`` starts a comment."""
    options: dict[str, str] = {}
    problems = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                problems.append(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            elif key not in KNOWN_KEYS:
                problems.append(f"{path}:{lineno}: unknown key {key!r}")
            else:
                options[key] = value
    if problems:
        raise ConfigError("\n".join(problems))
    return options


def _parse_bounds(text: str, model: str) -> tuple[str, ...]:
    if text == "all":
        return ("ml", "ni", "xu") if model == "jc" else ("ml", "ni")
    return tuple(part.strip() for part in text.split(",") if part.strip())


def parse_config(
    options: Mapping[str, str], config: Mapping[str, str] | None = None
) -> tuple[RunConfig, list[AxisSpec]]:
    """Merge flag values over config-file values into a validated run.

    ``options`` and ``config`` map long flag names to their raw strings.
    Coordinates written as ``min:max:count`` become sweep axes, plain numbers
    fixed coordinates. Every violated constraint is reported at once.
    """
    merged = {**(config or {}), **options}
    problems = []
    for key in merged:
        if key not in KNOWN_KEYS:
            problems.append(f"unknown option {key!r}")
    model = merged.get("model")
    if model is None:
        problems.append("missing required option 'model'")
        raise ConfigError("\n".join(problems))
    if model not in MODELS:
        problems.append(f"unknown model {model!r}; expected one of {sorted(MODELS)}")
        raise ConfigError("\n".join(problems))

    coords: dict[str, float] = {}
    axes: list[AxisSpec] = []
    for key in COORD_KEYS:
        if key not in merged:
            continue
        if key not in MODELS[model]:
            problems.append(f"parameter {key!r} does not apply to model {model!r}")
            continue
        try:
            axis = AxisSpec.parse(key, merged[key])
        except ConfigError as exc:
            problems.append(str(exc))
            continue
        if ":" in merged[key]:
            axes.append(axis)
        else:
            coords[key] = axis.min

    kwargs: dict = {}
    if "bound" in merged:
        kwargs["bounds"] = _parse_bounds(merged["bound"], model)
    if "method" in merged:
        kwargs["method"] = merged["method"]
    if "tol" in merged:
        try:
            kwargs["tol"] = float(merged["tol"])
        except ValueError:
            problems.append(f"--tol: expected a number, got {merged['tol']!r}")
    if "horizon" in merged and merged["horizon"] != "auto":
        try:
            kwargs["horizon"] = float(merged["horizon"])
        except ValueError:
            problems.append(f"--horizon: expected 'auto' or a number, got {merged['horizon']!r}")

    cfg = None
    # validate both ends of each axis; the grid lies in between
    for corner in ("min", "max"):
        trial = dict(coords)
        trial.update({ax.name: getattr(ax, corner) for ax in axes})
        try:
            built = RunConfig.create(model, coords=trial, **kwargs)
        except ConfigError as exc:
            problems.extend(exc.args[0].split("\n"))
            continue
        cfg = cfg or built
    if problems or cfg is None:
        raise ConfigError("\n".join(dict.fromkeys(problems)))
    return RunConfig.create(model, coords={**cfg.coords, **coords}, **kwargs), axes


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common_flags() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", choices=sorted(MODELS))
    common.add_argument("--lambda", dest="lambda", metavar="VALUE", help="reservoir spectral width")
    common.add_argument("--gamma0", metavar="VALUE", help="J-C coupling strength")
    common.add_argument("--s", metavar="VALUE", help="Ohmicity of the dephasing bath")
    common.add_argument("--eta", metavar="VALUE", help="dephasing coupling constant")
    common.add_argument("--alpha", metavar="VALUE", help="J-C excited-state amplitude")
    common.add_argument("--beta", metavar="VALUE", help="dephasing excited-state amplitude")
    common.add_argument("--theta", metavar="VALUE", help="relative phase of the initial state")
    common.add_argument("--time", metavar="VALUE", help="actual evolution time")
    common.add_argument("--bound", metavar="{ml|ni|xu|all}", help="comma list or 'all'")
    common.add_argument("--method", choices=("closed", "generic", "both"))
    common.add_argument("--tol", metavar="VALUE", help="quadrature tolerance")
    common.add_argument("--horizon", metavar="{auto|VALUE}", help="non-Markovianity horizon")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--config", metavar="FILE", help="key=value configuration file")
    common.add_argument("--jobs", type=int, metavar="N", help="worker processes (0 = all cores)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="qslimit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qslimit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("point", parents=[common], help="evaluate a single parameter point")
    sub.add_parser("sweep", parents=[common], help="evaluate a grid; ranges are min:max:count")
    fig = sub.add_parser("figure", parents=[common], help="write the data behind a figure")
    fig.add_argument("name", choices=FIGURES)
    fig.add_argument("--resolution", type=int, metavar="N", help="points per axis (default 201)")
    return parser


def _int_option(merged, key, default) -> int:
    try:
        return int(merged.get(key, default))
    except ValueError:
        raise ConfigError(f"--{key}: expected an integer, got {merged[key]!r}") from None


def _jobs(merged) -> int:
    jobs = _int_option(merged, "jobs", 1)
    if jobs == 0:
        return os.cpu_count() or 1
    return max(1, jobs)


def _emit(rows, header, out, meta) -> None:
    if out is None:
        sys.stdout.write(render_csv(rows, header))
        return
    out = Path(out)
    write_csv(rows, header, out)
    write_metadata(out.with_suffix(".json"), **meta)


def _run_table(command, merged, start) -> int:
    cfg, axes = parse_config({k: v for k, v in merged.items() if k in RUN_KEYS})
    if command == "point":
        ranged = [ax.name for ax in axes if ax.count > 1]
        if ranged:
            raise ConfigError(f"'point' takes fixed values only; ranges given for {ranged}")
        cfg = cfg.with_coords(**{ax.name: ax.min for ax in axes})
        axes = [AxisSpec("time", cfg.coords["time"], cfg.coords["time"], 1)]
    elif not axes:
        raise ConfigError("'sweep' needs at least one min:max:count range")
    rows = run_sweep(cfg, axes, jobs=_jobs(merged))
    failed = sum(1 for r in rows if r.get("error"))
    meta = dict(
        command=command,
        config=cfg.to_dict(ax.name for ax in axes if ax.count > 1),
        axes=[asdict(ax) for ax in axes],
        rows=len(rows),
        failed_points=failed,
        wall_time_s=round(time.perf_counter() - start, 3),
    )
    _emit(rows, columns(cfg), merged.get("out"), meta)
    return EXIT_POINTS if failed else EXIT_OK


def _run_figure(name, merged) -> int:
    fixed = [k for k in (*COORD_KEYS, "model", "bound", "horizon") if k in merged]
    if fixed:
        raise ConfigError(f"figure {name} has fixed settings; remove {fixed}")
    kwargs = {"method": merged.get("method", "closed")}
    if "tol" in merged:
        try:
            tol = float(merged["tol"])
        except ValueError:
            raise ConfigError(f"--tol: expected a number, got {merged['tol']!r}") from None
        if not (tol > 0 and math.isfinite(tol)):
            raise ConfigError(f"tol must be positive, got {tol!r}")
        kwargs["tol"] = tol
    resolution = _int_option(merged, "resolution", 201)
    if resolution < 2:
        raise ConfigError(f"resolution must be >= 2, got {resolution}")
    paths = reproduce_figure(
        name,
        merged.get("out", "figures"),
        resolution=resolution,
        jobs=_jobs(merged),
        **kwargs,
    )
    for path in paths:
        print(path)
    meta = json.loads(paths[1].read_text(encoding="utf-8"))
    return EXIT_POINTS if meta.get("failed_points") else EXIT_OK


def main(argv=None) -> int:
    start = time.perf_counter()
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        flags = {
            k: str(v) for k, v in vars(ns).items() if v is not None and k in KNOWN_KEYS
        }
        file_opts = read_config_file(ns.config) if ns.config else {}
        merged = {**file_opts, **flags}
        if ns.command == "figure":
            return _run_figure(ns.name, merged)
        return _run_table(ns.command, merged, start)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
