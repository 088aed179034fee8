"""Point evaluation, grid sweeps and figure-data reproduction.

A :class:`RunConfig` fixes the model, the requested bounds and every model
coordinate; :func:`run_sweep` overrides up to three coordinates with
:class:`AxisSpec` grids and evaluates the Cartesian product. Rows are plain
dicts whose key order is the CSV column order.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .core import PureQubit, QslResult, ml_qsl_generic, ni_qsl_generic
from .dephasing import (
    DephasingParams,
    capacity_nonmarkovianity,
    dephasing_regime,
    dephasing_trajectory,
    ml_qsl_dephasing,
    ni_qsl_dephasing,
    rate_sign,
)
from .exceptions import ConfigError, QslError
from .jc import (
    JcParams,
    blp_nonmarkovianity,
    jc_trajectory,
    ml_qsl_jc,
    ni_qsl_jc,
    xu_qsl_jc,
)
from .numerics import DEFAULT_TOL

__all__ = [
    "MODELS",
    "BOUNDS",
    "METHODS",
    "FIGURES",
    "AxisSpec",
    "RunConfig",
    "columns",
    "evaluate_point",
    "run_sweep",
    "format_value",
    "write_csv",
    "write_metadata",
    "reproduce_figure",
    "render_csv",
]

MODELS = {
    "jc": ("lambda", "gamma0", "alpha", "theta", "time"),
    "dephasing": ("s", "eta", "beta", "theta", "time"),
}
DEFAULT_COORDS = {
    "jc": {"lambda": 15.0, "alpha": 2.0**-0.5, "theta": 0.0},
    "dephasing": {"beta": 2.0**-0.5, "theta": 0.0},
}
BOUNDS = ("ml", "ni", "xu")
METHODS = ("closed", "generic", "both")
MAX_POINTS = 10**7
SIG_DIGITS = 12


class PointError(QslError):
    """A model failure annotated with the grid coordinate that caused it."""


@dataclass(frozen=True)
class AxisSpec:
    name: str
    min: float
    max: float
    count: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError(f"axis {self.name}: count must be >= 1, got {self.count}")
        if self.min > self.max:
            raise ConfigError(f"axis {self.name}: min {self.min} exceeds max {self.max}")
        if self.count == 1 and self.min != self.max:
            raise ConfigError(f"axis {self.name}: count 1 requires min == max")

    def points(self) -> list[float]:
        if self.count == 1:
            return [float(self.min)]
        return np.linspace(self.min, self.max, self.count).tolist()

    @classmethod
    def parse(cls, name: str, text: str) -> "AxisSpec":
        """Parse ``"min:max:count"`` or a single value."""
        parts = text.split(":")
        try:
            if len(parts) == 1:
                v = float(parts[0])
                return cls(name, v, v, 1)
            if len(parts) == 3:
                return cls(name, float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError:
            pass
        raise ConfigError(f"--{name}: expected a number or min:max:count, got {text!r}")


def _config_problems(cfg: "RunConfig") -> list[str]:
    problems = []
    if cfg.model not in MODELS:
        return [f"unknown model {cfg.model!r}; expected one of {sorted(MODELS)}"]
    allowed = MODELS[cfg.model]
    for key in cfg.coords:
        if key not in allowed:
            problems.append(f"parameter {key!r} does not apply to model {cfg.model!r}")
    for key in allowed:
        if key not in cfg.coords:
            problems.append(f"missing required parameter {key!r} for model {cfg.model!r}")
    c = cfg.coords
    for key in ("lambda", "gamma0", "s", "eta", "time"):
        v = c.get(key)
        if v is not None and not (v > 0.0 and math.isfinite(v)):
            problems.append(f"{key} must be positive and finite, got {v!r}")
    for key in ("alpha", "beta"):
        v = c.get(key)
        if v is not None and not -1.0 <= v <= 1.0:
            problems.append(f"{key} must lie in [-1, 1], got {v!r}")
    for b in cfg.bounds:
        if b not in BOUNDS:
            problems.append(f"unknown bound {b!r}")
    if "xu" in cfg.bounds and cfg.model != "jc":
        problems.append("bound 'xu' is only defined for model 'jc'")
    if cfg.method not in METHODS:
        problems.append(f"unknown method {cfg.method!r}")
    if not cfg.tol > 0.0:
        problems.append(f"tol must be positive, got {cfg.tol!r}")
    if cfg.horizon != "auto" and not (
        isinstance(cfg.horizon, (int, float)) and cfg.horizon > 0.0
    ):
        problems.append(f"horizon must be 'auto' or positive, got {cfg.horizon!r}")
    return problems


@dataclass(frozen=True)
class RunConfig:
    """Immutable description of one evaluation.

    ``coords`` must hold every coordinate of the model (see :data:`MODELS`);
    defaults for ``lambda``, the amplitude and ``theta`` are filled in by
    :meth:`create`.
    """

    model: str
    coords: dict = field(default_factory=dict)
    bounds: tuple = ("ml", "ni")
    method: str = "closed"
    tol: float = DEFAULT_TOL
    horizon: Any = "auto"

    def __post_init__(self):
        problems = _config_problems(self)
        if problems:
            raise ConfigError("\n".join(problems))

    @classmethod
    def create(cls, model: str, **kwargs) -> "RunConfig":
        coords = dict(DEFAULT_COORDS.get(model, {}))
        coords.update(kwargs.pop("coords", {}))
        return cls(model, coords, **kwargs)

    def with_coords(self, **values: float) -> "RunConfig":
        return replace(self, coords={**self.coords, **values})

    def to_dict(self, swept: Iterable[str] = ()) -> dict:
        """Plain-data view for metadata; ``swept`` coordinates are omitted."""
        d = asdict(self)
        d["bounds"] = list(self.bounds)
        for name in swept:
            d["coords"].pop(name, None)
        return d


def _bound_columns(cfg: RunConfig) -> list[str]:
    cols = []
    for b in BOUNDS:
        if b not in cfg.bounds:
            continue
        if b == "xu":
            cols.append("xu")
            continue
        if cfg.method in ("closed", "both"):
            cols.append(f"{b}_closed")
        if cfg.method in ("generic", "both"):
            cols.append(f"{b}_generic")
        if cfg.method == "both":
            cols.append(f"{b}_absdiff")
        cols.append(f"{b}_accelerated")
    return cols


def columns(cfg: RunConfig) -> list[str]:
    """CSV header for ``cfg``, in declaration order."""
    extra = (
        ["blp_nonmarkovianity", "regime"]
        if cfg.model == "jc"
        else ["capacity_nonmarkovianity", "rate_sign", "regime"]
    )
    return [*MODELS[cfg.model], *_bound_columns(cfg), *extra, "error"]


def _model_objects(cfg):
    c = cfg.coords
    if cfg.model == "jc":
        return JcParams(c["lambda"], c["gamma0"]), PureQubit(c["alpha"], c["theta"])
    return DephasingParams(c["s"], c["eta"]), PureQubit(c["beta"], c["theta"])


def _closed(cfg, kind, params, psi0) -> QslResult:
    t, tol = cfg.coords["time"], cfg.tol
    if cfg.model == "jc":
        fn = ml_qsl_jc if kind == "ml" else ni_qsl_jc
        return fn(t, psi0, params, tol)
    if kind == "ml":
        return ml_qsl_dephasing(t, psi0, params, tol)
    return ni_qsl_dephasing(t, params, tol)


def _generic(cfg, kind, params, psi0) -> QslResult:
    traj = (jc_trajectory if cfg.model == "jc" else dephasing_trajectory)(psi0, params)
    fn = ml_qsl_generic if kind == "ml" else ni_qsl_generic
    return fn(psi0, traj, cfg.coords["time"], cfg.tol)


def _describe(coords):
    return ", ".join(f"{k}={v!r}" for k, v in coords.items())


def evaluate_point(cfg: RunConfig) -> dict:
    """Compute every quantity requested by ``cfg``.

    Raises:
        PointError: wrapping any model failure, with the coordinate attached.
    """
    row: dict = {k: cfg.coords[k] for k in MODELS[cfg.model]}
    try:
        params, psi0 = _model_objects(cfg)
        t = cfg.coords["time"]
        for b in BOUNDS:
            if b not in cfg.bounds:
                continue
            if b == "xu":
                row["xu"] = xu_qsl_jc(t, params).bound
                continue
            closed = generic = None
            if cfg.method in ("closed", "both"):
                closed = _closed(cfg, b, params, psi0)
                row[f"{b}_closed"] = closed.bound
            if cfg.method in ("generic", "both"):
                generic = _generic(cfg, b, params, psi0)
                row[f"{b}_generic"] = generic.bound
            if closed is not None and generic is not None:
                row[f"{b}_absdiff"] = abs(closed.bound - generic.bound)
            row[f"{b}_accelerated"] = (closed or generic).accelerated
        if cfg.model == "jc":
            row["blp_nonmarkovianity"] = blp_nonmarkovianity(params, cfg.horizon)
            row["regime"] = params.regime
        else:
            horizon = t if cfg.horizon == "auto" else cfg.horizon
            row["capacity_nonmarkovianity"] = capacity_nonmarkovianity(params, horizon)
            row["rate_sign"] = rate_sign(params.s, t)
            row["regime"] = dephasing_regime(t, params)
    except (QslError, ValueError, ArithmeticError) as exc:
        raise PointError(f"{exc} (at {_describe(cfg.coords)})") from exc
    row["error"] = ""
    return row


def _safe_evaluate(cfg: RunConfig) -> dict:
    try:
        return evaluate_point(cfg)
    except PointError as exc:
        row = {k: cfg.coords[k] for k in MODELS[cfg.model]}
        row["error"] = str(exc)
        return row


def _validate_axes(cfg: RunConfig, axes: Sequence[AxisSpec]) -> None:
    problems = []
    if not 1 <= len(axes) <= 3:
        problems.append(f"a sweep needs 1 to 3 axes, got {len(axes)}")
    names = [ax.name for ax in axes]
    for name in names:
        if name not in MODELS[cfg.model]:
            problems.append(f"axis {name!r} does not apply to model {cfg.model!r}")
    if len(set(names)) != len(names):
        problems.append(f"duplicate axes in {names}")
    if math.prod(ax.count for ax in axes) > MAX_POINTS:
        problems.append(f"sweep exceeds {MAX_POINTS} points")
    if problems:
        raise ConfigError("\n".join(problems))


def run_sweep(
    cfg: RunConfig, axes: Sequence[AxisSpec], jobs: int = 1
) -> list[dict]:
    """Evaluate ``cfg`` over the Cartesian grid of ``axes``.

    Rows come back in row-major order of ``axes`` (last axis fastest)
    whatever ``jobs`` is. Failed points keep their coordinates and carry the
    message in the ``error`` column.
    """
    _validate_axes(cfg, axes)
    names = [ax.name for ax in axes]
    configs = []
    problems = []
    for combo in itertools.product(*(ax.points() for ax in axes)):
        try:
            configs.append(cfg.with_coords(**dict(zip(names, combo))))
        except ConfigError as exc:
            problems.append(str(exc))
    if problems:
        raise ConfigError("\n".join(sorted(set(problems))))
    if jobs == 1 or len(configs) < 2:
        return [_safe_evaluate(c) for c in configs]
    chunk = max(1, len(configs) // (8 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_safe_evaluate, configs, chunksize=chunk))


def format_value(value: Any) -> str:
    """Shortest repr that round-trips after rounding to 12 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return repr(value)
        return repr(float(f"{value:.{SIG_DIGITS}g}"))
    return str(value)


def write_csv(rows: Iterable[dict], header: Sequence[str], target) -> None:
    """Write rows as CSV to a path or a text stream."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            write_csv(rows, header, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(row.get(col)) for col in header])


def write_metadata(path, **content) -> None:
    meta = {"artifact": "qslimit", "version": __version__, **content}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# --- figure reproduction -------------------------------------------------

GAMMA0_RANGE = (0.1, 20.0)
LOWER_LAYER_BETA = math.sqrt((1.0 - math.sqrt(0.75)) / 2.0)  # 2b sqrt(1-b^2) = 0.5


@dataclass(frozen=True)
class FigureSpec:
    cfg: RunConfig
    axes: tuple
    normalize: str | None = None
    constant_columns: tuple = ()
    description: str = ""


def _figure_specs(res: int, method: str, tol: float) -> dict:
    g0 = AxisSpec("gamma0", *GAMMA0_RANGE, res)
    jc = dict(method=method, tol=tol)
    fig1 = lambda bound: FigureSpec(  # noqa: E731
        RunConfig.create("jc", coords={"time": 1.0, "gamma0": 1.0}, bounds=(bound,), **jc),
        (g0, AxisSpec("alpha", 0.0, 1.0, res)),
        description=f"{bound.upper()} bound over gamma0 x alpha, lambda=15, t=1",
    )
    return {
        "fig1a": fig1("ml"),
        "fig1b": fig1("ni"),
        "fig2": FigureSpec(
            RunConfig.create("jc", coords={"time": 1.0, "gamma0": 1.0}, bounds=("ml", "ni"), **jc),
            (g0,),
            constant_columns=(("actual_time", 1.0),),
            description="ML and NI vs gamma0 at alpha=1/sqrt(2), lambda=15, t=1",
        ),
        "fig3": FigureSpec(
            RunConfig.create("dephasing", coords={"s": 1.0, "eta": 0.6, "time": 1.0}, bounds=(), tol=tol),
            (AxisSpec("s", 0.05, 6.0, res), AxisSpec("time", 0.05, 10.0, res)),
            description="sign of the dephasing rate over s x t",
        ),
        "fig4": FigureSpec(
            RunConfig.create("dephasing", coords={"s": 2.0, "eta": 0.6, "time": 3.0}, bounds=("ml",), method=method, tol=tol),
            (
                AxisSpec("s", 2.0, 5.0, res),
                AxisSpec("eta", 0.01, 1.0, res),
                AxisSpec("beta", LOWER_LAYER_BETA, 2.0**-0.5, 2),
            ),
            description="ML over s x eta at t=3; beta rows: lower layer, upper layer",
        ),
        "fig5": FigureSpec(
            RunConfig.create("jc", coords={"time": 1.0, "gamma0": 1.0, "alpha": 1.0}, bounds=(), tol=tol),
            (g0,),
            normalize="blp_nonmarkovianity",
            description="BLP non-Markovianity vs gamma0, lambda=15, auto horizon",
        ),
        "fig6a": FigureSpec(
            RunConfig.create("dephasing", coords={"s": 1.0, "eta": 0.6, "time": 1.0}, bounds=(), tol=tol),
            (AxisSpec("s", 0.05, 5.0, res), AxisSpec("time", 0.05, 5.0, res)),
            normalize="capacity_nonmarkovianity",
            description="capacity non-Markovianity over s x t, eta=0.6, horizon=t",
        ),
        "fig6b": FigureSpec(
            RunConfig.create("dephasing", coords={"s": 1.0, "eta": 0.6, "time": 3.0}, bounds=(), tol=tol),
            (AxisSpec("s", 0.05, 5.0, res), AxisSpec("eta", 0.01, 1.0, res)),
            normalize="capacity_nonmarkovianity",
            description="capacity non-Markovianity over s x eta, t=3",
        ),
    }


FIGURES = ("fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5", "fig6a", "fig6b")


def reproduce_figure(
    name: str,
    out_dir,
    resolution: int = 201,
    method: str = "closed",
    tol: float = DEFAULT_TOL,
    jobs: int = 1,
) -> list[Path]:
    """Write ``<name>.csv`` and ``<name>.json`` with the figure's data.

    Normalised panels carry both the raw column and ``<raw>_normalized``
    (divided by the grid maximum).
    """
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; expected one of {list(FIGURES)}")
    spec = _figure_specs(resolution, method, tol)[name]
    start = time.perf_counter()
    rows = run_sweep(spec.cfg, spec.axes, jobs=jobs)
    header = columns(spec.cfg)
    header.remove("error")
    extras: dict = {}
    for col, value in spec.constant_columns:
        header.append(col)
        for row in rows:
            row[col] = value
    if spec.normalize:
        raw = [row.get(spec.normalize) for row in rows]
        peak = max((v for v in raw if v is not None), default=0.0)
        norm_col = f"{spec.normalize}_normalized"
        header.append(norm_col)
        for row, v in zip(rows, raw):
            row[norm_col] = None if v is None else (v / peak if peak > 0.0 else 0.0)
        extras["normalization_max"] = peak
    header.append("error")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    json_path = out_dir / f"{name}.json"
    write_csv(rows, header, csv_path)
    write_metadata(
        json_path,
        figure=name,
        description=spec.description,
        config=spec.cfg.to_dict(ax.name for ax in spec.axes),
        axes=[asdict(ax) for ax in spec.axes],
        rows=len(rows),
        failed_points=sum(1 for r in rows if r.get("error")),
        wall_time_s=round(time.perf_counter() - start, 3),
        **extras,
    )
    return [csv_path, json_path]


def render_csv(rows: Iterable[dict], header: Sequence[str]) -> str:
    buf = io.StringIO()
    write_csv(rows, header, buf)
    return buf.getvalue()
