"""Experiment harness: config parsing, seed plumbing, sweep execution,
resumability, summaries, plots, and the CLI entry points."""

import copy
import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from robustgan.cli import main
from robustgan.core import derive_seed
from robustgan.harness import (
    RECORD_COLUMNS,
    SUMMARY_COLUMNS,
    CleanSpec,
    ConfigError,
    ExperimentRecord,
    cell_seed,
    emit_plots,
    format_summary_table,
    parse_config,
    read_records,
    read_summary_csv,
    resolve_family,
    run_cell,
    run_sweep,
    summarize,
    write_summary_csv,
)


def _doc():
    return {
        "experiment": {
            "name": "tiny",
            "task": "mean",
            "trials": 2,
            "base_seed": 11,
            "output_dir": "unused",
        },
        "clean": {"family": "gaussian_iso", "mu": 0.5},
        "grid": {"eps": [0.1], "n": [40], "d": [2]},
        "attack": [{"kind": "point_mass", "r": [3.0, 9.0]}],
        "estimators": {"names": ["empirical_mean", "trimmed_mean:0.2"]},
    }


def _strip_wall_csv(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [",".join(line.split(",")[:-1]) for line in lines]


def _strip_wall_jsonl(path):
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        rec = json.loads(line)
        del rec["wall_time_ms"]
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def test_parse_config_minimal_and_cell_order():
    cfg = parse_config(_doc())
    assert cfg.name == "tiny" and cfg.task == "mean" and cfg.trials == 2
    assert cfg.eps_grid == (0.1,) and cfg.n_grid == (40,) and cfg.d_grid == (2,)
    assert cfg.estimators == ("empirical_mean", "trimmed_mean:0.2")
    cells = cfg.cells()
    assert [(c[0].kind, c[1], c[2], c[3], c[4]) for c in cells] == [
        ("point_mass", 0.1, 40, 2, 3.0),
        ("point_mass", 0.1, 40, 2, 9.0),
    ]


def test_unknown_keys_rejected_everywhere():
    cases = []
    for path in (
        ("bogus",),
        ("experiment", "bogus"),
        ("clean", "bogus"),
        ("grid", "bogus"),
        ("estimators", "bogus"),
        ("minimax", "bogus"),
    ):
        doc = _doc()
        doc["minimax"] = {"outer_steps": 5}
        node = doc
        for k in path[:-1]:
            node = node.setdefault(k, {})
        node[path[-1]] = 1
        cases.append(doc)
    doc = _doc()
    doc["attack"] = [{"kind": "point_mass", "r": [1.0], "bogus": 1}]
    cases.append(doc)
    for doc in cases:
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(doc)


def test_config_validation_errors():
    def mutate(fn):
        doc = _doc()
        fn(doc)
        return doc

    bad_docs = [
        mutate(lambda d: d["experiment"].__setitem__("task", "mode")),
        mutate(lambda d: d["experiment"].__setitem__("trials", 0)),
        mutate(lambda d: d["experiment"].pop("base_seed")),
        mutate(lambda d: d["experiment"].pop("output_dir")),
        mutate(lambda d: d.pop("experiment")),
        mutate(lambda d: d.pop("grid")),
        mutate(lambda d: d.pop("attack")),
        mutate(lambda d: d.pop("estimators")),
        mutate(lambda d: d["grid"].__setitem__("eps", [0.5])),
        mutate(lambda d: d["grid"].__setitem__("n", [])),
        mutate(lambda d: d["attack"][0].__setitem__("kind", "meteor")),
        mutate(lambda d: d["attack"].__setitem__(0, {"kind": "sign_flip_responses"})),
        mutate(lambda d: d["estimators"].__setitem__("names", ["empirical_mean", "empirical_mean"])),
        mutate(lambda d: d["estimators"].__setitem__("names", ["ols"])),
        mutate(lambda d: d["estimators"].__setitem__("names", ["robust:banana"])),
        mutate(lambda d: d["estimators"].__setitem__("names", ["trimmed_mean:0.6"])),
        mutate(lambda d: d["clean"].__setitem__("family", "cauchy")),
        mutate(lambda d: d["experiment"].__setitem__("task", "regression")),  # needs linear_model
    ]
    for doc in bad_docs:
        with pytest.raises(ConfigError):
            parse_config(doc)


def test_parse_config_regression_clean_section():
    doc = _doc()
    doc["experiment"]["task"] = "regression"
    doc["clean"] = {
        "family": "linear_model",
        "theta_norm": 2.0,
        "noise_s": 1.0,
        "x": {"family": "gaussian_iso"},
    }
    doc["attack"] = [{"kind": "sign_flip_responses"}]
    doc["estimators"] = {"names": ["ols", "trimmed_ols:0.2"]}
    cfg = parse_config(doc)
    assert cfg.clean.kind == "linear_model" and cfg.clean.theta_norm == 2.0
    assert cfg.attacks[0].magnitudes == (0.0,)  # magnitude-free attack


def test_resolve_family_theta_default_and_mismatch():
    spec = CleanSpec(kind="linear_model", theta_norm=2.0)
    fam = resolve_family(spec, 4)
    np.testing.assert_allclose(fam.theta, np.full(4, 1.0))  # 2 / sqrt(4)
    assert float(np.linalg.norm(fam.theta)) == pytest.approx(2.0)
    bad = CleanSpec(kind="linear_model", theta=(1.0, 2.0))
    with pytest.raises(ConfigError):
        resolve_family(bad, 3)
    iso = resolve_family(CleanSpec(kind="gaussian_iso", mu=(1.0, 2.0)), 2)
    np.testing.assert_array_equal(iso.mu, [1.0, 2.0])


def test_cell_seed_recipe_is_pinned():
    got = cell_seed(11, "mean", "gaussian_iso", "point_mass", 0.1, 40, 2, 3.0, 1)
    want = derive_seed(11, "cell", "mean", "gaussian_iso", "point_mass", 0.1, 40, 2, 3.0, 1)
    assert got == want
    assert got != cell_seed(11, "mean", "gaussian_iso", "point_mass", 0.1, 40, 2, 3.0, 2)


def test_minimax_overrides_flow_to_cells():
    from robustgan.harness import _minimax_for_cell

    cfg = parse_config(_doc())
    mm = _minimax_for_cell(cfg, "one_layer", 0.2, seed=9)
    assert mm.assumed_eps == 0.2 and mm.seed == 9  # cell eps by default
    doc = _doc()
    doc["minimax"] = {"assumed_eps": 0.3, "pool_size": 64, "saturation_slack": 0.02}
    cfg2 = parse_config(doc)
    mm2 = _minimax_for_cell(cfg2, "one_layer", 0.2, seed=9)
    assert mm2.assumed_eps == 0.3 and mm2.pool_size == 64
    assert mm2.saturation_slack == 0.02


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


def test_run_cell_record_count_formula():
    doc = _doc()
    doc["experiment"]["trials"] = 1
    cfg = parse_config(doc)
    cell = cfg.cells()[0]
    records = run_cell(cfg, cell)
    # 1 cell x 1 trial x 2 estimators -> exactly 2 records
    assert len(records) == 1 * len(cfg.estimators) == 2
    for rec in records:
        assert rec.task == "mean" and rec.attack == "point_mass"
        assert rec.eps == 0.1 and rec.n == 40 and rec.d == 2 and rec.r == 3.0
        assert math.isfinite(rec.error) and rec.wall_time_ms >= 0.0
        assert math.isnan(rec.final_distance)  # baselines report no distance


def test_record_row_round_trip():
    rec = ExperimentRecord(
        task="mean", family="gaussian_iso", attack="point_mass", eps=0.1, n=40, d=2,
        r=3.0, trial=1, seed=12345, estimator="trimmed_mean:0.2", error=0.1 + 0.2,
        final_distance=float("nan"), wall_time_ms=17.25,
    )
    back = ExperimentRecord.from_row(rec.to_row())
    for col in RECORD_COLUMNS:
        a, b = getattr(rec, col), getattr(back, col)
        assert a == b or (isinstance(a, float) and math.isnan(a) and math.isnan(b))
    with pytest.raises(ValueError):
        ExperimentRecord.from_row("a,b,c")


def test_read_records_rejects_foreign_header(tmp_path):
    path = tmp_path / "records.csv"
    path.write_text("task,who,knows\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_records(path)


# ---------------------------------------------------------------------------
# sweeps: determinism, parallelism, resume
# ---------------------------------------------------------------------------


def _robust_doc():
    doc = _doc()
    doc["experiment"]["trials"] = 1
    doc["grid"]["n"] = [50]
    doc["attack"] = [{"kind": "point_mass", "r": [2.0, 5.0]}]
    doc["estimators"] = {"names": ["robust:one_layer", "empirical_mean"]}
    doc["minimax"] = {
        "outer_steps": 8,
        "disc_steps_per_outer": 2,
        "restarts_outer": 1,
        "pool_size": 40,
    }
    return doc


def test_run_sweep_is_deterministic(tmp_path):
    cfg = parse_config(_robust_doc())
    run_sweep(cfg, quiet=True, out_dir=str(tmp_path / "a"))
    run_sweep(cfg, quiet=True, out_dir=str(tmp_path / "b"))
    assert _strip_wall_csv(tmp_path / "a" / "records.csv") == _strip_wall_csv(
        tmp_path / "b" / "records.csv"
    )
    assert _strip_wall_jsonl(tmp_path / "a" / "records.jsonl") == _strip_wall_jsonl(
        tmp_path / "b" / "records.jsonl"
    )


def test_jsonl_mirrors_csv(tmp_path):
    doc = _doc()
    doc["experiment"]["trials"] = 1
    cfg = parse_config(doc)
    records = run_sweep(cfg, quiet=True, out_dir=str(tmp_path))
    assert len(records) == len(cfg.cells()) * cfg.trials * len(cfg.estimators)
    lines = (tmp_path / "records.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == len(records)
    for line, rec in zip(lines, records):
        obj = json.loads(line)
        assert list(obj) == list(RECORD_COLUMNS)
        for col in RECORD_COLUMNS:
            v, w = obj[col], getattr(rec, col)
            # non-finite floats have no JSON literal and are written as null
            assert v == w or (isinstance(w, float) and math.isnan(w) and v is None)


def test_parallel_jobs_match_serial(tmp_path):
    cfg = parse_config(_robust_doc())
    run_sweep(cfg, jobs=1, quiet=True, out_dir=str(tmp_path / "serial"))
    run_sweep(cfg, jobs=2, quiet=True, out_dir=str(tmp_path / "par"))
    assert _strip_wall_csv(tmp_path / "serial" / "records.csv") == _strip_wall_csv(
        tmp_path / "par" / "records.csv"
    )


def test_resume_skips_complete_cells(tmp_path):
    cfg = parse_config(_robust_doc())
    out = tmp_path / "out"
    run_sweep(cfg, quiet=True, out_dir=str(out))
    full = (out / "records.csv").read_text(encoding="utf-8").splitlines()
    per_cell = cfg.trials * len(cfg.estimators)
    # keep the header and the first complete cell, as if killed mid-run
    (out / "records.csv").write_text("\n".join(full[: 1 + per_cell]) + "\n", encoding="utf-8")
    run_sweep(cfg, quiet=True, resume=True, out_dir=str(out))
    resumed = (out / "records.csv").read_text(encoding="utf-8").splitlines()
    assert resumed[: 1 + per_cell] == full[: 1 + per_cell]  # byte-identical, not rerun
    assert [",".join(l.split(",")[:-1]) for l in resumed] == [
        ",".join(l.split(",")[:-1]) for l in full
    ]


def test_resume_recomputes_partial_cells(tmp_path):
    doc = _doc()
    doc["experiment"]["trials"] = 2
    doc["attack"] = [{"kind": "point_mass", "r": [3.0]}]
    doc["estimators"] = {"names": ["empirical_mean"]}
    cfg = parse_config(doc)
    out = tmp_path / "out"
    run_sweep(cfg, quiet=True, out_dir=str(out))
    full = (out / "records.csv").read_text(encoding="utf-8").splitlines()
    assert len(full) == 1 + 2
    (out / "records.csv").write_text("\n".join(full[:2]) + "\n", encoding="utf-8")
    run_sweep(cfg, quiet=True, resume=True, out_dir=str(out))
    resumed = (out / "records.csv").read_text(encoding="utf-8").splitlines()
    assert [",".join(l.split(",")[:-1]) for l in resumed] == [
        ",".join(l.split(",")[:-1]) for l in full
    ]


# ---------------------------------------------------------------------------
# summaries and plots
# ---------------------------------------------------------------------------


def _rec(error, trial=0, estimator="empirical_mean", r=3.0):
    return ExperimentRecord(
        task="mean", family="gaussian_iso", attack="point_mass", eps=0.1, n=40, d=2,
        r=r, trial=trial, seed=1, estimator=estimator, error=error,
        final_distance=float("nan"), wall_time_ms=1.0,
    )


def test_summarize_single_record_median_equals_mean():
    rows = summarize([_rec(0.7)])
    assert len(rows) == 1
    row = rows[0]
    assert row["trials"] == 1 and row["median"] == row["mean"] == 0.7
    assert row["p10"] == row["p90"] == 0.7


def test_summarize_median_of_three():
    rows = summarize([_rec(1.0, 0), _rec(2.0, 1), _rec(3.0, 2)])
    assert rows[0]["median"] == 2.0 and rows[0]["mean"] == 2.0
    assert rows[0]["trials"] == 3


def test_summarize_preserves_first_seen_order():
    recs = [_rec(1.0, 0, "empirical_mean"), _rec(2.0, 0, "trimmed_mean:0.2"), _rec(3.0, 1, "empirical_mean")]
    rows = summarize(recs)
    assert [r["estimator"] for r in rows] == ["empirical_mean", "trimmed_mean:0.2"]
    with pytest.raises(ValueError):
        summarize([])


def test_summary_csv_round_trip(tmp_path):
    rows = summarize([_rec(1.0, 0), _rec(2.0, 1), _rec(0.5, 0, "trimmed_mean:0.2")])
    path = tmp_path / "summary.csv"
    write_summary_csv(rows, path)
    back = read_summary_csv(path)
    assert back == rows
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_summary_csv(bad)


def test_format_summary_table_shape():
    rows = summarize([_rec(1.0, 0), _rec(2.0, 0, "trimmed_mean:0.2")])
    table = format_summary_table(rows)
    lines = table.splitlines()
    assert len(lines) == 2 + len(rows)
    assert lines[0].split()[: len(SUMMARY_COLUMNS)] == list(SUMMARY_COLUMNS)


def test_emit_plots_well_formed_svg(tmp_path):
    rows = summarize(
        [_rec(e, t, est, r) for r, e in ((1.0, 0.5), (4.0, 0.9), (16.0, 1.8))
         for est in ("empirical_mean", "trimmed_mean:0.2")
         for t, e in [(0, e), (1, e * 1.1)]]
    )
    paths = emit_plots(rows, "error_vs_r", str(tmp_path), name="demo")
    assert len(paths) == 1 and paths[0].endswith(".svg")
    root = ET.parse(paths[0]).getroot()
    assert root.tag.endswith("svg")


def test_emit_plots_single_point_still_valid(tmp_path):
    rows = summarize([_rec(0.7)])
    paths = emit_plots(rows, "error_vs_r", str(tmp_path), name="single")
    root = ET.parse(paths[0]).getroot()
    assert root.tag.endswith("svg")


def test_emit_plots_other_axes_and_errors(tmp_path):
    recs = []
    for n, e in ((100, 1.0), (400, 0.5)):
        recs.append(
            ExperimentRecord(
                task="mean", family="gaussian_iso", attack="point_mass", eps=0.1, n=n,
                d=2, r=3.0, trial=0, seed=1, estimator="empirical_mean", error=e,
                final_distance=float("nan"), wall_time_ms=1.0,
            )
        )
    paths = emit_plots(summarize(recs), "error_vs_n", str(tmp_path))
    assert Path(paths[0]).exists()
    with pytest.raises(ConfigError):
        emit_plots(summarize(recs), "error_vs_time", str(tmp_path))


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


TOML = """
[experiment]
name = "cli-tiny"
task = "mean"
trials = 1
base_seed = 3
output_dir = "{out}"

[clean]
family = "gaussian_iso"
mu = 1.0

[grid]
eps = [0.1]
n = [30]
d = [2]

[[attack]]
kind = "point_mass"
r = [5.0]

[estimators]
names = ["empirical_mean", "coordinate_median"]
"""


def test_cli_sweep_summarize_plot_round_trip(tmp_path):
    out = tmp_path / "out"
    cfg_path = tmp_path / "exp.toml"
    cfg_path.write_text(TOML.format(out=out), encoding="utf-8")
    assert main(["sweep", str(cfg_path), "--quiet"]) == 0
    records = read_records(out / "records.csv")
    assert len(records) == 2
    assert main(["summarize", str(out / "records.csv"), "--quiet"]) == 0
    assert (out / "summary.csv").exists()
    assert main(["plot", str(out / "summary.csv"), "--kind", "error_vs_r", "--quiet"]) == 0
    svgs = list(out.glob("*.svg"))
    assert svgs and ET.parse(svgs[0]).getroot().tag.endswith("svg")


def test_cli_bad_config_exits_2(tmp_path):
    assert main(["sweep", str(tmp_path / "missing.toml"), "--quiet"]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("[experiment]\ntask = 'mode'\n", encoding="utf-8")
    assert main(["sweep", str(bad), "--quiet"]) == 2


def test_cli_check_gradients(capsys):
    assert main(["check-gradients", "--instances", "2", "--quiet"]) == 0
    assert main(["check-gradients", "--instances", "2", "--tolerance", "1e-30", "--quiet"]) == 1
    capsys.readouterr()


def test_cli_verify_lemmas(tmp_path, capsys):
    report = tmp_path / "lemmas.json"
    assert main(["verify-lemmas", "--pairs", "3", "--step-pairs", "3", "--out", str(report), "--quiet"]) == 0
    assert json.loads(report.read_text())
    capsys.readouterr()
