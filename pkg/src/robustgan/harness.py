"""Experiment harness: TOML configs, deterministic sweeps, CSV/JSONL record
persistence with cell-level resume, summary statistics, and SVG plots.

A sweep enumerates cells = (attack x eps x n x d x magnitude) in config
order, runs `trials` independent datasets per cell, and applies every
configured estimator to each dataset.  Cell seeds derive from a stable
SHA-256 hash of the cell coordinates (see `cell_seed`), so record sets are
reproducible across machines and across resumed runs.  Records are flushed
after every completed cell by canonically rewriting the output files; a
resumed run skips cells whose records are already complete.
"""

from __future__ import annotations

import concurrent.futures
import math
import os
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .contamination import AttackSpec, CleanFamily, corrupt, sample_clean
from .core import Dataset, derive_seed
from .distance import parse_distance_kind
from .estimator import MinimaxConfig, baseline, evaluate_loss, robust_mean, robust_regression, robust_second_moment

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentRecord",
    "load_config",
    "cell_seed",
    "run_sweep",
    "read_records",
    "summarize",
    "write_summary_csv",
    "format_summary_table",
    "emit_plots",
]

_TASKS = ("mean", "second_moment", "regression")
_MEAN_BASELINES = ("empirical_mean", "coordinate_median", "trimmed_mean")
_SECOND_BASELINES = ("empirical_second_moment",)
_REG_BASELINES = ("ols", "trimmed_ols")

RECORD_COLUMNS = (
    "task",
    "family",
    "attack",
    "eps",
    "n",
    "d",
    "r",
    "trial",
    "seed",
    "estimator",
    "error",
    "final_distance",
    "wall_time_ms",
)


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class AttackGrid:
    kind: str
    magnitudes: tuple  # R grid; (0.0,) when the attack has no magnitude
    spread: float = 1.0
    direction: tuple | None = None


@dataclass(frozen=True)
class CleanSpec:
    """Unresolved clean-family description; theta may depend on the grid d,
    so the concrete CleanFamily is built per cell by `resolve_family`."""

    kind: str
    mu: object = 0.0
    sigma: float = 1.0
    dof: float = 3.0
    scale: float = 1.0
    theta: tuple | None = None  # explicit coefficient vector
    theta_norm: float = 1.0  # used when theta is None: theta_norm/sqrt(d) * ones
    noise_kind: str = "gaussian"
    noise_s: float = 1.0
    noise_dof: float = 3.0
    x_kind: str = "gaussian_iso"
    x_mu: object = 0.0
    x_sigma: float = 1.0
    x_dof: float = 3.0
    x_scale: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    task: str
    trials: int
    base_seed: int
    output_dir: str
    clean: CleanSpec
    eps_grid: tuple
    n_grid: tuple
    d_grid: tuple
    attacks: tuple  # of AttackGrid
    estimators: tuple  # of name strings, validated
    minimax: dict = field(default_factory=dict)  # MinimaxConfig overrides

    def cells(self):
        """Deterministic cell enumeration: config order throughout."""
        out = []
        for attack in self.attacks:
            for eps in self.eps_grid:
                for n in self.n_grid:
                    for d in self.d_grid:
                        for r in attack.magnitudes:
                            out.append((attack, eps, n, d, r))
        return out


@dataclass(frozen=True)
class ExperimentRecord:
    task: str
    family: str
    attack: str
    eps: float
    n: int
    d: int
    r: float
    trial: int
    seed: int
    estimator: str
    error: float
    final_distance: float
    wall_time_ms: float

    def key(self):
        """Identity of a record modulo measured values (for resume)."""
        return (self.task, self.family, self.attack, repr(self.eps), self.n, self.d, repr(self.r), self.trial, self.estimator)

    def to_row(self) -> str:
        vals = [
            self.task,
            self.family,
            self.attack,
            repr(float(self.eps)),
            str(self.n),
            str(self.d),
            repr(float(self.r)),
            str(self.trial),
            str(self.seed),
            self.estimator,
            repr(float(self.error)),
            repr(float(self.final_distance)),
            repr(float(self.wall_time_ms)),
        ]
        return ",".join(vals)

    @staticmethod
    def from_row(row: str) -> "ExperimentRecord":
        p = row.rstrip("\n").split(",")
        if len(p) != len(RECORD_COLUMNS):
            raise ValueError("malformed record row")
        return ExperimentRecord(
            task=p[0], family=p[1], attack=p[2], eps=float(p[3]), n=int(p[4]), d=int(p[5]), r=float(p[6]),
            trial=int(p[7]), seed=int(p[8]), estimator=p[9], error=float(p[10]), final_distance=float(p[11]),
            wall_time_ms=float(p[12]),
        )


# ---------------------------------------------------------------------------
# Config parsing (fail-fast: unknown keys are errors)
# ---------------------------------------------------------------------------


def _check_keys(section: dict, allowed, where: str):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in [{where}]")


_MARGINALS = ("gaussian_iso", "student_t", "sub_exp_laplace")


def _parse_clean(section: dict, task: str) -> CleanSpec:
    kind = section.get("family")
    if kind is None:
        raise ConfigError("[clean] needs a family")
    if kind == "linear_model":
        _check_keys(section, {"family", "theta", "theta_norm", "noise", "noise_s", "noise_dof", "x"}, "clean")
        xsec = section.get("x", {})
        _check_keys(xsec, {"family", "mu", "sigma", "dof", "scale"}, "clean.x")
        x_kind = xsec.get("family", "gaussian_iso")
        if x_kind not in _MARGINALS:
            raise ConfigError(f"unknown covariate family {x_kind!r}")
        theta = section.get("theta")
        if theta is not None and not isinstance(theta, list):
            raise ConfigError("clean.theta must be a list of floats")
        noise_kind = section.get("noise", "gaussian")
        if noise_kind not in ("gaussian", "student_t"):
            raise ConfigError(f"unknown noise kind {noise_kind!r}")
        return CleanSpec(
            kind="linear_model",
            theta=None if theta is None else tuple(float(v) for v in theta),
            theta_norm=float(section.get("theta_norm", 1.0)),
            noise_kind=noise_kind,
            noise_s=float(section.get("noise_s", 1.0)),
            noise_dof=float(section.get("noise_dof", 3.0)),
            x_kind=x_kind,
            x_mu=_mu_value(xsec.get("mu", 0.0)),
            x_sigma=float(xsec.get("sigma", 1.0)),
            x_dof=float(xsec.get("dof", 3.0)),
            x_scale=float(xsec.get("scale", 1.0)),
        )
    if kind not in _MARGINALS:
        raise ConfigError(f"unknown clean family {kind!r}")
    _check_keys(section, {"family", "mu", "sigma", "dof", "scale"}, "clean")
    return CleanSpec(
        kind=kind,
        mu=_mu_value(section.get("mu", 0.0)),
        sigma=float(section.get("sigma", 1.0)),
        dof=float(section.get("dof", 3.0)),
        scale=float(section.get("scale", 1.0)),
    )


def _mu_value(raw):
    if isinstance(raw, list):
        return tuple(float(v) for v in raw)
    return float(raw)


def resolve_family(spec: CleanSpec, d: int) -> CleanFamily:
    """Materialize the concrete per-d clean family; an omitted theta becomes
    the constant vector theta_norm / sqrt(d) * ones."""
    try:
        if spec.kind != "linear_model":
            return CleanFamily(
                kind=spec.kind,
                mu=np.asarray(spec.mu, dtype=float) if isinstance(spec.mu, tuple) else float(spec.mu),
                sigma=spec.sigma,
                dof=spec.dof,
                scale=spec.scale,
            )
        if spec.theta is None:
            theta = np.full(d, spec.theta_norm / math.sqrt(d))
        else:
            theta = np.asarray(spec.theta, dtype=float)
            if theta.shape != (d,):
                raise ConfigError("clean.theta length does not match grid d")
        x_family = CleanFamily(
            kind=spec.x_kind,
            mu=np.asarray(spec.x_mu, dtype=float) if isinstance(spec.x_mu, tuple) else float(spec.x_mu),
            sigma=spec.x_sigma,
            dof=spec.x_dof,
            scale=spec.x_scale,
        )
        return CleanFamily(
            kind="linear_model",
            theta=theta,
            x_family=x_family,
            noise_kind=spec.noise_kind,
            noise_s=spec.noise_s,
            noise_dof=spec.noise_dof,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad clean family: {exc}") from exc


def _validate_estimator(name: str, task: str):
    base = name.split(":", 1)[0]
    if base == "robust":
        kind = name.split(":", 1)[1] if ":" in name else "one_layer"
        try:
            parse_distance_kind(kind)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return
    allowed = {"mean": _MEAN_BASELINES, "second_moment": _SECOND_BASELINES, "regression": _REG_BASELINES}[task]
    if base not in allowed:
        raise ConfigError(f"estimator {name!r} is not valid for task {task!r}")
    if ":" in name:
        try:
            frac = float(name.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad fraction in estimator {name!r}") from exc
        if not 0.0 <= frac <= 0.45:
            raise ConfigError(f"fraction out of range in estimator {name!r}")


_MINIMAX_KEYS = (
    "outer_steps",
    "disc_steps_per_outer",
    "gen_step_size",
    "disc_step_size",
    "restarts_outer",
    "pool_size",
    "width",
    "assumed_eps",
    "saturation_slack",
    "v_bound",
)


def parse_config(doc: dict, name_hint: str = "experiment") -> ExperimentConfig:
    _check_keys(doc, {"experiment", "clean", "grid", "attack", "estimators", "minimax"}, "top level")
    exp = doc.get("experiment")
    if not isinstance(exp, dict):
        raise ConfigError("missing [experiment] section")
    _check_keys(exp, {"name", "task", "trials", "base_seed", "output_dir"}, "experiment")
    task = exp.get("task")
    if task not in _TASKS:
        raise ConfigError(f"experiment.task must be one of {_TASKS}")
    trials = int(exp.get("trials", 0))
    if trials < 1:
        raise ConfigError("experiment.trials must be >= 1")
    if "base_seed" not in exp:
        raise ConfigError("experiment.base_seed is required")
    if "output_dir" not in exp:
        raise ConfigError("experiment.output_dir is required")

    clean = _parse_clean(doc.get("clean", {}), task)
    if task == "regression" and clean.kind != "linear_model":
        raise ConfigError("regression task needs a linear_model clean family")
    if task != "regression" and clean.kind == "linear_model":
        raise ConfigError("linear_model clean family is only for the regression task")

    grid = doc.get("grid")
    if not isinstance(grid, dict):
        raise ConfigError("missing [grid] section")
    _check_keys(grid, {"eps", "n", "d"}, "grid")
    try:
        eps_grid = tuple(float(e) for e in grid["eps"])
        n_grid = tuple(int(v) for v in grid["n"])
        d_grid = tuple(int(v) for v in grid["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad [grid] section: {exc}") from exc
    if not eps_grid or not n_grid or not d_grid:
        raise ConfigError("grid lists must be nonempty")
    for e in eps_grid:
        if not 0.0 <= e <= 0.45:
            raise ConfigError("grid eps values must lie in [0, 0.45]")

    attacks_raw = doc.get("attack")
    if not attacks_raw:
        raise ConfigError("at least one [[attack]] is required")
    attacks = []
    for i, sec in enumerate(attacks_raw):
        _check_keys(sec, {"kind", "r", "spread", "direction"}, f"attack[{i}]")
        kind = sec.get("kind")
        if kind not in ("point_mass", "cluster", "sign_flip_responses", "mixture_tail"):
            raise ConfigError(f"unknown attack kind {kind!r}")
        if kind == "sign_flip_responses" and task != "regression":
            raise ConfigError("sign_flip_responses attacks need the regression task")
        rs = sec.get("r", [0.0])
        if not isinstance(rs, list):
            rs = [rs]
        mags = tuple(float(v) for v in rs)
        direction = tuple(float(v) for v in sec["direction"]) if "direction" in sec else None
        attacks.append(AttackGrid(kind=kind, magnitudes=mags, spread=float(sec.get("spread", 1.0)), direction=direction))

    est = doc.get("estimators")
    if not isinstance(est, dict) or not est.get("names"):
        raise ConfigError("missing [estimators] names list")
    _check_keys(est, {"names"}, "estimators")
    names = tuple(str(s) for s in est["names"])
    if len(set(names)) != len(names):
        raise ConfigError("estimator names must be unique")
    for nm in names:
        _validate_estimator(nm, task)

    mm = doc.get("minimax", {})
    _check_keys(mm, _MINIMAX_KEYS, "minimax")

    return ExperimentConfig(
        name=str(exp.get("name", name_hint)),
        task=task,
        trials=trials,
        base_seed=int(exp["base_seed"]),
        output_dir=str(exp["output_dir"]),
        clean=clean,
        eps_grid=eps_grid,
        n_grid=n_grid,
        d_grid=d_grid,
        attacks=tuple(attacks),
        estimators=names,
        minimax=dict(mm),
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    name_hint = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_config(doc, name_hint)


# ---------------------------------------------------------------------------
# Sweep execution
# ---------------------------------------------------------------------------


def cell_seed(base_seed: int, task: str, family_kind: str, attack_kind: str, eps: float, n: int, d: int, r: float, trial: int) -> int:
    """The documented, test-pinned seed recipe: a stable 64-bit SHA-256 hash
    of the cell coordinates in this exact order."""
    return derive_seed(base_seed, "cell", task, family_kind, attack_kind, float(eps), int(n), int(d), float(r), int(trial))


def _minimax_for_cell(config: ExperimentConfig, kind: str, eps: float, seed: int) -> MinimaxConfig:
    kwargs = dict(config.minimax)
    kwargs.setdefault("assumed_eps", float(eps))
    if "pool_size" in kwargs and kwargs["pool_size"] is not None:
        kwargs["pool_size"] = int(kwargs["pool_size"])
    return MinimaxConfig(kind=parse_distance_kind(kind), seed=seed, **kwargs)


def _run_one_estimator(name: str, task: str, data: Dataset, truth: CleanFamily, config: ExperimentConfig, eps: float, seed: int):
    import time

    t0 = time.perf_counter()
    base = name.split(":", 1)[0]
    if base == "robust":
        kind = name.split(":", 1)[1] if ":" in name else "one_layer"
        cfg = _minimax_for_cell(config, kind, eps, derive_seed(seed, "estimator", name))
        runner = {"mean": robust_mean, "second_moment": robust_second_moment, "regression": robust_regression}[task]
        result = runner(data, cfg)
        estimate, final_distance = result.estimate, result.final_distance_value
    else:
        frac = float(name.split(":", 1)[1]) if ":" in name else 0.1
        estimate = baseline(base, data, frac)
        final_distance = float("nan")
    err = evaluate_loss(task, estimate, truth)
    return err, final_distance, (time.perf_counter() - t0) * 1000.0


def run_cell(config: ExperimentConfig, cell) -> list:
    """All records of one cell (every trial x estimator), deterministic."""
    attack_grid, eps, n, d, r = cell
    family = resolve_family(config.clean, d)
    records = []
    for trial in range(config.trials):
        seed = cell_seed(config.base_seed, config.task, family.kind, attack_grid.kind, eps, n, d, r, trial)
        clean = sample_clean(family, n, d, derive_seed(seed, "clean"))
        direction = None if attack_grid.direction is None else np.asarray(attack_grid.direction, dtype=float)
        attack = AttackSpec(kind=attack_grid.kind, eps=eps, magnitude=r, direction=direction, spread=attack_grid.spread)
        data = corrupt(clean, attack, derive_seed(seed, "attack"))
        for est_name in config.estimators:
            err, fdist, ms = _run_one_estimator(est_name, config.task, data, family, config, eps, seed)
            records.append(
                ExperimentRecord(
                    task=config.task,
                    family=family.kind,
                    attack=attack_grid.kind,
                    eps=float(eps),
                    n=int(n),
                    d=int(d),
                    r=float(r),
                    trial=trial,
                    seed=seed,
                    estimator=est_name,
                    error=float(err),
                    final_distance=float(fdist),
                    wall_time_ms=float(ms),
                )
            )
    return records


def _records_path(out_dir: str) -> str:
    return os.path.join(out_dir, "records.csv")


def _write_records(out_dir: str, records: list) -> None:
    os.makedirs(out_dir, exist_ok=True)
    path = _records_path(out_dir)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(RECORD_COLUMNS) + "\n")
        for rec in records:
            fh.write(rec.to_row() + "\n")
    os.replace(tmp, path)
    jpath = os.path.join(out_dir, "records.jsonl")
    tmp = jpath + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            pairs = ", ".join(f'"{c}": {_json_value(getattr(rec, c))}' for c in RECORD_COLUMNS)
            fh.write("{" + pairs + "}\n")
    os.replace(tmp, jpath)


def _json_value(v):
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else "null"  # JSON has no NaN
    return str(v)


def read_records(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != ",".join(RECORD_COLUMNS):
            raise ConfigError(f"unrecognized records header in {path}")
        return [ExperimentRecord.from_row(line) for line in fh if line.strip()]


def run_sweep(config: ExperimentConfig, jobs: int = 1, resume: bool = False, quiet: bool = False, out_dir: str | None = None) -> list:
    """Execute every cell x trial x estimator; returns the full record list
    and leaves records.csv / records.jsonl in the output directory."""
    out_dir = out_dir or config.output_dir
    cells = config.cells()
    expected_per_cell = config.trials * len(config.estimators)
    if not quiet:
        total = len(cells) * expected_per_cell
        print(f"{config.name}: {len(cells)} cells x {config.trials} trials x {len(config.estimators)} estimators = {total} records")

    done: dict = {}
    if resume and os.path.exists(_records_path(out_dir)):
        by_cell: dict = {}
        for rec in read_records(_records_path(out_dir)):
            cell_key = (rec.attack, repr(rec.eps), rec.n, rec.d, repr(rec.r))
            by_cell.setdefault(cell_key, {})[rec.key()] = rec
        for i, cell in enumerate(cells):
            attack_grid, eps, n, d, r = cell
            cell_key = (attack_grid.kind, repr(float(eps)), int(n), int(d), repr(float(r)))
            found = by_cell.get(cell_key, {})
            if len(found) == expected_per_cell:
                done[i] = sorted(found.values(), key=lambda rec: (rec.trial, config.estimators.index(rec.estimator)))

    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output dir {out_dir}: {exc}") from exc

    pending = [i for i in range(len(cells)) if i not in done]
    results: dict = dict(done)

    def flush():
        finished = [results[i] for i in range(len(cells)) if i in results]
        _write_records(out_dir, [rec for block in finished for rec in block])

    if jobs <= 1 or len(pending) <= 1:
        for i in pending:
            results[i] = run_cell(config, cells[i])
            if not quiet:
                print(f"cell {i + 1}/{len(cells)} done")
            flush()
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(run_cell, config, cells[i]): i for i in pending}
            for fut in concurrent.futures.as_completed(futures):
                i = futures[fut]
                results[i] = fut.result()
                if not quiet:
                    print(f"cell {i + 1}/{len(cells)} done")
                flush()

    records = [rec for i in range(len(cells)) for rec in results[i]]
    _write_records(out_dir, records)
    return records


# ---------------------------------------------------------------------------
# Summaries and plots
# ---------------------------------------------------------------------------

SUMMARY_COLUMNS = ("task", "family", "attack", "eps", "n", "d", "r", "estimator", "trials", "median", "mean", "p10", "p90")


def summarize(records: list) -> list:
    """Per (cell, estimator) aggregation of errors across trials."""
    if not records:
        raise ValueError("no records to summarize")
    groups: dict = {}
    order = []
    for rec in records:
        key = (rec.task, rec.family, rec.attack, rec.eps, rec.n, rec.d, rec.r, rec.estimator)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec.error)
    rows = []
    for key in order:
        errs = np.asarray(groups[key])
        rows.append(
            dict(
                zip(
                    SUMMARY_COLUMNS,
                    key[:7]
                    + (key[7], errs.size, float(np.median(errs)), float(errs.mean()),
                       float(np.percentile(errs, 10)), float(np.percentile(errs, 90))),
                )
            )
        )
    return rows


def write_summary_csv(rows: list, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in rows:
            vals = [row[c] for c in SUMMARY_COLUMNS]
            fh.write(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in vals) + "\n")


def read_summary_csv(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if tuple(header) != SUMMARY_COLUMNS:
            raise ConfigError(f"unrecognized summary header in {path}")
        rows = []
        for line in fh:
            if not line.strip():
                continue
            p = line.rstrip("\n").split(",")
            row = dict(zip(SUMMARY_COLUMNS, p))
            for k in ("eps", "r", "median", "mean", "p10", "p90"):
                row[k] = float(row[k])
            for k in ("n", "d", "trials"):
                row[k] = int(row[k])
            rows.append(row)
        return rows


def format_summary_table(rows: list) -> str:
    cols = SUMMARY_COLUMNS
    display = [[_short(row[c]) for c in cols] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in display)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(widths[i]) for i, c in enumerate(cols))]
    lines.append("  ".join("-" * w for w in widths))
    for r in display:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(cols))))
    return "\n".join(lines)


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


_PLOT_AXES = {"error_vs_eps": "eps", "error_vs_r": "r", "error_vs_n": "n"}


def emit_plots(summary_rows: list, kind: str, out_dir: str, name: str = "experiment") -> list:
    """One self-contained SVG per plot kind: median error per estimator along
    the chosen axis, log-log when possible, with reference slope guides."""
    if kind not in _PLOT_AXES:
        raise ConfigError(f"unknown plot kind {kind!r}; choose from {sorted(_PLOT_AXES)}")
    axis = _PLOT_AXES[kind]
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series: dict = {}
    for row in summary_rows:
        x, y = float(row[axis]), float(row["median"])
        if math.isfinite(x) and math.isfinite(y):
            series.setdefault(row["estimator"], []).append((x, y))
    series = {k: sorted(v) for k, v in series.items()}
    if not series:
        raise ConfigError(f"summary has no finite points along axis {axis!r}; cannot draw {kind}")
    distinct = {x for pts in series.values() for x, _ in pts}

    xs_all = [x for pts in series.values() for x, _ in pts]
    ys_all = [y for pts in series.values() for _, y in pts]
    loglog = min(xs_all) > 0 and min(ys_all) > 0

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for est, pts in sorted(series.items()):
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ax.plot(xs, ys, marker="o", label=est)
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    if loglog and len(distinct) >= 2:  # slope guides need an x range
        first = sorted(series.items())[0][1]
        y0 = first[0][1] if first else min(ys_all)
        xs = np.array([min(xs_all), max(xs_all)])
        if axis in ("eps", "r"):
            ax.plot(xs, y0 * (xs / xs[0]) ** 1.0, ls="--", c="gray", lw=0.8, label="slope 1")
            ax.plot(xs, y0 * (xs / xs[0]) ** 0.5, ls=":", c="gray", lw=0.8, label="slope 1/2")
        else:
            ax.plot(xs, y0 * (xs / xs[0]) ** -0.5, ls="--", c="gray", lw=0.8, label="slope -1/2")
    ax.set_xlabel(axis)
    ax.set_ylabel("median error")
    ax.set_title(f"{name}: median error vs {axis}")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", lw=0.3, alpha=0.5)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{name}_{kind}.svg")
    fig.savefig(path, format="svg")
    plt.close(fig)
    return [path]
