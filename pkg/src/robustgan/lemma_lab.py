"""Small-instance numerical verification of the structural results behind
the estimator: the mean-cross property of the smoothed KS distance, CDF
validity of the smoothing functions, the boundedness/closeness/tail
conditions required of discriminator pairs, and sampled resilience
membership diagnostics.

All checks return plain-dict reports (JSON-serializable via write_report)
with pass/fail flags, margins, and worst-case witnesses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import derive_seed, rng_from_seed
from .discriminator import (
    FeatureFamily,
    OneLayerParams,
    SmoothingCdf,
    SmoothingKind,
    TwoLayerParams,
    head_values,
    project_constraints,
)
from .distance import AscentConfig, DistanceKind, estimate_distance, parse_distance_kind, smoothed_ks_oracle_1d

__all__ = [
    "DiscreteDist1D",
    "random_discrete_dist",
    "xz_law_discrete",
    "xz_law_grid_cdf",
    "verify_mean_cross",
    "check_cdf_validity",
    "check_theorem_conditions",
    "resilience_membership_sampled",
    "write_report",
]

_GRID_STEP = 2.0**-10
_PAD = 40.0  # smoothing-variable tails are below 1e-17 this far out


@dataclass(frozen=True)
class DiscreteDist1D:
    """Finite discrete distribution on the line; atoms strictly increasing,
    masses nonnegative and summing to 1 within 1e-12."""

    atoms: tuple
    masses: tuple

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if a.size == 0 or a.shape != m.shape:
            raise ValueError("atoms and masses must be matching nonempty vectors")
        if np.any(np.diff(a) <= 0):
            raise ValueError("atoms must be strictly increasing; canonicalize first")
        if np.any(m < 0) or abs(float(m.sum()) - 1.0) > 1e-12:
            raise ValueError("masses must be nonnegative and sum to 1 within 1e-12")

    @staticmethod
    def canonicalize(atoms, masses) -> "DiscreteDist1D":
        """Sort atoms, merge duplicates (summing mass), drop zero-mass atoms."""
        a = np.asarray(atoms, dtype=float).ravel()
        m = np.asarray(masses, dtype=float).ravel()
        order = np.argsort(a, kind="stable")
        a, m = a[order], m[order]
        uniq, inverse = np.unique(a, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, m)
        keep = merged > 0
        return DiscreteDist1D(tuple(uniq[keep]), tuple(merged[keep]))

    def mean(self) -> float:
        return float(np.asarray(self.atoms) @ np.asarray(self.masses))

    def cdf(self, ys) -> np.ndarray:
        a = np.asarray(self.atoms)
        c = np.cumsum(self.masses)
        idx = np.searchsorted(a, np.asarray(ys, dtype=float), side="right")
        return np.concatenate([[0.0], c])[idx]


def random_discrete_dist(rng, max_atoms: int = 6, span: float = 3.0) -> DiscreteDist1D:
    k = int(rng.integers(1, max_atoms + 1))
    atoms = rng.uniform(-span, span, size=k)
    masses = rng.dirichlet(np.ones(k))
    return DiscreteDist1D.canonicalize(atoms, masses)


def _as_discrete(p) -> DiscreteDist1D:
    if isinstance(p, DiscreteDist1D):
        return p
    atoms, masses = p
    return DiscreteDist1D.canonicalize(atoms, masses)


def xz_law_discrete(p: DiscreteDist1D, smoothing: SmoothingCdf) -> DiscreteDist1D:
    """Exact law of X - Z for discrete (or identically zero) Z."""
    if smoothing.kind is SmoothingKind.STEP:
        return p
    if smoothing.kind is not SmoothingKind.DISCRETE:
        raise ValueError("exact convolution needs a discrete smoothing variable")
    xa = np.asarray(p.atoms)
    xm = np.asarray(p.masses)
    za = np.asarray(smoothing.z_atoms)
    zm = np.asarray(smoothing.z_masses)
    atoms = (xa[:, None] - za[None, :]).ravel()
    masses = (xm[:, None] * zm[None, :]).ravel()
    return DiscreteDist1D.canonicalize(atoms, masses)


def xz_law_grid_cdf(p: DiscreteDist1D, smoothing: SmoothingCdf, ys: np.ndarray) -> np.ndarray:
    """CDF of X - Z on a grid: P(X - Z <= y) = sum_i m_i S_Z(x_i - y)."""
    xa = np.asarray(p.atoms)
    xm = np.asarray(p.masses)
    return (xm[:, None] * smoothing.survival(xa[:, None] - ys[None, :])).sum(axis=0)


def _grid_mean_from_cdf(ys: np.ndarray, f: np.ndarray) -> float:
    """E[W] = y_0 + integral of (1 - F) over [y_0, y_1] for W supported on
    the grid range (tail mass certified below 1e-12 by the padding)."""
    return float(ys[0] + np.trapezoid(1.0 - f, ys))


def _discrete_mean_from_cdf(ys: np.ndarray, f: np.ndarray) -> float:
    masses = np.diff(f, prepend=0.0)
    return float(ys @ masses)


def verify_mean_cross(p, q, smoothing: SmoothingCdf, report: dict | None = None, tol: float = 1e-9) -> bool:
    """Numerically verify the mean-cross property on one pair:

    With eps the smoothed KS distance between p and q and eta = |a| eps (a
    the affine constant making a T + b a CDF), deleting eta mass from the top
    of the law of X - Z under p and from the bottom under q must leave the
    q-side stochastically dominating the p-side, and the lifted X-means may
    then differ by at most twice the worst-case eta-deletion shift of Z.
    Returns True when both hold (or when eta >= 1, where the premise of the
    statement is void and the report is marked inconclusive).
    """
    p = _as_discrete(p)
    q = _as_discrete(q)
    eps = smoothed_ks_oracle_1d(p, q, smoothing)
    a, _ = smoothing.affine
    eta = abs(a) * eps
    out = {"eps": eps, "affine_a": a, "eta": eta, "kind": smoothing.kind.value, "conclusive": True}
    if report is not None:
        report.update(out)
    if eta >= 1.0 - 1e-12:
        out.update({"conclusive": False, "passed": True, "note": "eta >= 1: premise void"})
        if report is not None:
            report.update(out)
        return True

    if smoothing.kind in (SmoothingKind.STEP, SmoothingKind.DISCRETE):
        pt = xz_law_discrete(p, smoothing)
        qt = xz_law_discrete(q, smoothing)
        ys = np.union1d(np.asarray(pt.atoms), np.asarray(qt.atoms))
        fp, fq = pt.cdf(ys), qt.cdf(ys)
        mean_of = _discrete_mean_from_cdf
    else:
        lo = min(min(p.atoms), min(q.atoms)) - _PAD
        hi = max(max(p.atoms), max(q.atoms)) + _PAD
        ys = np.arange(lo, hi + _GRID_STEP, _GRID_STEP)
        fp = xz_law_grid_cdf(p, smoothing, ys)
        fq = xz_law_grid_cdf(q, smoothing, ys)
        mean_of = _grid_mean_from_cdf

    # top-deletion of the p-side, bottom-deletion of the q-side
    f_rp = np.minimum(fp, 1.0 - eta) / (1.0 - eta)
    f_rq = np.maximum(fq - eta, 0.0) / (1.0 - eta)
    dom_violation = float(np.max(np.maximum(fq - eta, 0.0) - np.minimum(fp, 1.0 - eta)))
    dominance_ok = dom_violation <= tol

    rho = smoothing.rho_z(eta)
    mean_rp = mean_of(ys, f_rp)
    mean_rq = mean_of(ys, f_rq)
    # worst-case Z bookkeeping: lifted X-means can differ by at most 2 rho
    lifted_gap = (mean_rp - mean_rq) + 2.0 * rho
    mean_ok = lifted_gap <= 2.0 * rho + tol

    out.update(
        {
            "dominance_ok": bool(dominance_ok),
            "dominance_violation": dom_violation,
            "mean_rp": mean_rp,
            "mean_rq": mean_rq,
            "rho_z": rho,
            "lifted_gap": lifted_gap,
            "lifted_bound": 2.0 * rho + tol,
            "mean_ok": bool(mean_ok),
            "passed": bool(dominance_ok and mean_ok),
        }
    )
    if report is not None:
        report.update(out)
    return out["passed"]


def check_cdf_validity(smoothing: SmoothingCdf, lo: float = -50.0, hi: float = 50.0, n: int = 10_001) -> dict:
    """Grid check that a T + b is a genuine CDF: non-decreasing with limits
    {0, 1} at the grid ends within 1e-10; reports the raw range of T."""
    grid = np.linspace(lo, hi, n)
    f = np.asarray(smoothing.cdf(grid))
    t = np.asarray(smoothing.t_values(grid))
    monotone = bool(np.all(np.diff(f) >= -1e-12))
    left_err = abs(float(f[0]))
    right_err = abs(float(f[-1]) - 1.0)
    report = {
        "kind": smoothing.kind.value,
        "monotone": monotone,
        "left_endpoint_error": left_err,
        "right_endpoint_error": right_err,
        "t_range": [float(t.min()), float(t.max())],
        "affine": list(smoothing.affine),
        "passed": bool(monotone and left_err <= 1e-10 and right_err <= 1e-10),
    }
    return report


_HEAD_RANGE_FNS = {
    "g1": lambda s: (0.0, 1.0),
    "g2": lambda s: (s(-1.0), s(1.0)),
    "log_g2": lambda s: (math.log(s(-1.0)), math.log(s(1.0))),
    "log_1m_g2": lambda s: (math.log(s(-1.0)), math.log(s(1.0))),
}


def _head_range(which: str):
    from .core import sigmoid

    return _HEAD_RANGE_FNS[which](sigmoid)


def _random_params(rng, kind: DistanceKind, family: FeatureFamily, d: int, width: int):
    vshape = (2, d) if family is FeatureFamily.REGRESSION else (d,)
    def unit():
        return OneLayerParams(rng.standard_normal(vshape), float(rng.normal(scale=2.0)))

    if kind is DistanceKind.ONE_LAYER:
        params = unit()
    else:
        units = [unit() for _ in range(width)]
        params = TwoLayerParams(rng.standard_normal(width), units)
    return project_constraints(params, family)


def check_theorem_conditions(
    kind,
    family=FeatureFamily.MEAN,
    smoothing: SmoothingCdf | None = None,
    n_pairs: int = 50,
    seed: int = 0,
    cfg: AscentConfig | None = None,
) -> dict:
    """Empirical checks of the three conditions a discriminator pair must
    satisfy for the projection guarantee:

    1. boundedness: the scoring component, affinely rescaled by its range,
       stays within [-1/2, 1/2] on random parameters and inputs;
    2. closeness: adversarial-distance closeness implies smoothed-KS
       closeness up to an empirical constant (smallest valid C reported);
    3. tails: the smoothing variable satisfies the one-sided tail bound
       max(P(Z >= t), P(Z <= -t)) <= exp(-t / c_z) on a grid.
    """
    kind = parse_distance_kind(kind)
    family = FeatureFamily(family)
    from .discriminator import SIGMOID_CDF

    smoothing = smoothing or SIGMOID_CDF
    cfg = cfg or AscentConfig(restarts=4, steps=150)
    which = {"one_layer": "g1", "two_layer": "g2", "log_score": "log_1m_g2"}[kind.value]
    rng = rng_from_seed(derive_seed(seed, "theorem-conditions"))

    # condition 1: rescaled range bound
    lo, hi = _head_range(which)
    mid, halfwidth = (lo + hi) / 2.0, (hi - lo) / 2.0
    worst = 0.0
    for _ in range(50):
        params = _random_params(rng, kind, family, 3, cfg.width)
        x = rng.standard_normal((40, 3)) * 3.0
        y = rng.standard_normal(40) if family is FeatureFamily.REGRESSION else None
        vals = head_values(params, family, x, which, y)
        worst = max(worst, float(np.max(np.abs((vals - mid) / (2.0 * halfwidth)))))
    cond1 = {"rescaled_max_abs": worst, "passed": worst <= 0.5 + 1e-12}

    # condition 2: A-closeness vs smoothed-KS closeness on 1-d sample pairs
    ratios = []
    for i in range(n_pairs):
        pair_rng = rng_from_seed(derive_seed(seed, "cond2", i))
        n = 60
        xs_p = pair_rng.normal(pair_rng.uniform(-1, 1), 1.0, size=n)
        xs_q = pair_rng.normal(pair_rng.uniform(-1, 1), 1.0, size=n)
        a_val, _ = estimate_distance(kind, FeatureFamily.MEAN, xs_p, xs_q, cfg, seed=derive_seed(seed, "cond2-asc", i))
        ks = smoothed_ks_oracle_1d((xs_p, np.full(n, 1.0 / n)), (xs_q, np.full(n, 1.0 / n)), smoothing)
        ratios.append(ks / max(a_val, 1e-12))
    cond2 = {"c_hat": float(np.max(ratios)), "ratios_median": float(np.median(ratios)), "pairs": n_pairs}

    # condition 3: sub-exponential tail of Z on a grid
    ts = np.linspace(0.0, 50.0, 501)
    margins = []
    for t in ts:
        tail = max(float(smoothing.survival(t)), float(smoothing.cdf(-t)))
        bound = math.exp(-t / smoothing.c_z) if smoothing.c_z > 0 else (1.0 if t == 0 else 0.0)
        margins.append(tail - bound)
    cond3 = {"max_margin": float(np.max(margins)), "c_z": smoothing.c_z, "passed": float(np.max(margins)) <= 1e-12}

    return {
        "kind": kind.value,
        "condition1": cond1,
        "condition2": cond2,
        "condition3": cond3,
        "passed": bool(cond1["passed"] and cond3["passed"]),
    }


def _worst_deletion_shift(values: np.ndarray, eps: float) -> float:
    """Exact sup over eps-deletions of |E_r f - E f| for the empirical law of
    `values`: keep the top (or bottom) 1 - eps mass, fractional atom included."""
    v = np.sort(values)[::-1]
    n = v.size
    keep = 1.0 - eps
    full = int(math.floor(keep * n - 1e-12))
    partial = keep * n - full
    top = (v[:full].sum() + (v[full] * partial if full < n else 0.0)) / (keep * n)
    base = float(values.mean())
    bottom = (v[::-1][:full].sum() + (v[::-1][full] * partial if full < n else 0.0)) / (keep * n)
    return max(top - base, base - bottom)


def resilience_membership_sampled(
    samples,
    task: str,
    rho,
    eps_grid=(0.05, 0.1, 0.2, 0.5),
    n_deletions: int = 8,
    seed: int = 0,
    responses=None,
) -> dict:
    """Sampled necessary check of resilience membership: along random and
    data-driven projections, the worst eps-deletion shift of the task's
    feature values must stay within the budget rho(eps).  Reports the worst
    margin (shift minus budget) and its witness; not a certificate."""
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    n, d = x.shape
    rng = rng_from_seed(derive_seed(seed, "resilience"))
    budget = rho.radius if hasattr(rho, "radius") else rho

    directions = [rng.standard_normal(d) for _ in range(n_deletions)]
    mean_dir = x.mean(axis=0)
    if np.linalg.norm(mean_dir) > 1e-12:
        directions.append(mean_dir)
    centered = x - x.mean(axis=0)
    evals, evecs = np.linalg.eigh(centered.T @ centered)
    directions.append(evecs[:, -1])
    directions = [v / np.linalg.norm(v) for v in directions]

    checks = []
    worst = {"margin": -math.inf}
    for eps in eps_grid:
        if not 0.0 < eps <= 0.5:
            raise ValueError("eps grid must lie in (0, 0.5]")
        for j, v in enumerate(directions):
            if task == "mean":
                vals = x @ v
            elif task == "second_moment":
                vals = (x @ v) ** 2
            elif task == "regression":
                if responses is None:
                    raise ValueError("regression diagnostics need responses")
                v2 = directions[(j + 1) % len(directions)]
                vals = (responses - x @ v) ** 2 - (responses - x @ v2) ** 2
            else:
                raise ValueError(f"unknown task {task!r}")
            shift = _worst_deletion_shift(vals, eps)
            margin = shift - float(budget(eps))
            checks.append({"eps": eps, "direction": j, "shift": shift, "margin": margin})
            if margin > worst["margin"]:
                worst = {"eps": eps, "direction_index": j, "shift": shift, "margin": margin}
    passed = worst["margin"] <= 1e-9
    return {"task": task, "n": n, "d": d, "worst": worst, "passed": bool(passed), "checks": checks}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
