"""Adversarial discriminator distances between two sample sets.

Three kinds, all realized as a sup over discriminator parameters found by
multi-restart projected gradient ascent:

    one_layer:  sup |E_p[g1] - E_q[g1]|        (aliases: "a1")
    two_layer:  sup |E_p[g2] - E_q[g2]|        (aliases: "a2")
    log_score:  sup E_p[log g2] + E_q[log(1 - g2)]   (aliases: "a3")

The one- and two-layer kinds are symmetric in (p, q); the log score is not.
Ascent steps are gradient-direction normalized (the step size is a trust
region, decayed as 1/sqrt(step)), which handles the severe plateaus of
saturated sigmoids.  Absolute-value objectives ascend both signed versions
from the same initialization and keep the best.

Also provides a dense-grid 1-d oracle for the smoothed generalized
Kolmogorov-Smirnov distance sup_t |E_p T(x+t) - E_q T(x+t)|, exact for step
and discrete smoothing kinds, used to certify the ascent on small instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import derive_seed, rng_from_seed
from .discriminator import (
    DEFAULT_V_BOUND,
    FeatureFamily,
    OneLayerParams,
    SmoothingCdf,
    SmoothingKind,
    TwoLayerParams,
    feature_values,
    grad_params,
    head_values,
    project_constraints,
)

__all__ = [
    "AscentConfig",
    "DistanceKind",
    "parse_distance_kind",
    "estimate_distance",
    "abar_deviation",
    "smoothed_ks_oracle_1d",
]


@dataclass(frozen=True)
class AscentConfig:
    restarts: int = 8
    steps: int = 300
    step_size: float = 0.1
    grid_t: int = 4001
    tolerance: float = 1e-9
    width: int = 8  # inner units of two-layer discriminators
    v_bound: float = DEFAULT_V_BOUND

    def __post_init__(self):
        if min(self.restarts, self.steps, self.grid_t, self.width) < 1:
            raise ValueError("counts must be positive")
        if self.step_size <= 0 or self.tolerance <= 0 or self.v_bound <= 0:
            raise ValueError("step_size, tolerance, v_bound must be positive")


class DistanceKind(str, Enum):
    ONE_LAYER = "one_layer"
    TWO_LAYER = "two_layer"
    LOG_SCORE = "log_score"


_ALIASES = {
    "one_layer": DistanceKind.ONE_LAYER,
    "two_layer": DistanceKind.TWO_LAYER,
    "log_score": DistanceKind.LOG_SCORE,
    "a1": DistanceKind.ONE_LAYER,
    "a2": DistanceKind.TWO_LAYER,
    "a3": DistanceKind.LOG_SCORE,
}

# d2, the component of the discriminator pair whose mean difference the
# deviation statistic takes, per kind.
_D2_HEAD = {
    DistanceKind.ONE_LAYER: "g1",
    DistanceKind.TWO_LAYER: "g2",
    DistanceKind.LOG_SCORE: "log_1m_g2",
}


def parse_distance_kind(name) -> DistanceKind:
    if isinstance(name, DistanceKind):
        return name
    key = str(name).strip().lower().replace("-", "_")
    try:
        return _ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown distance kind {name!r}") from None


def _as_xy(samples):
    if hasattr(samples, "points"):
        return samples.points, samples.responses
    if isinstance(samples, tuple) and len(samples) == 2:
        x, y = samples
        return np.atleast_2d(np.asarray(x, dtype=float)), np.asarray(y, dtype=float)
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return x, None


def _check_pair(xp, yp, xq, yq, family):
    if xp.shape[0] == 0 or xq.shape[0] == 0:
        raise ValueError("both sample sets must be nonempty")
    if xp.shape[1] != xq.shape[1]:
        raise ValueError("sample sets must share a dimension")
    if family is FeatureFamily.REGRESSION and (yp is None or yq is None):
        raise ValueError("regression family requires responses")


def _unit_rows(rng, shape):
    g = rng.standard_normal(shape)
    if g.ndim == 1:
        return g / max(float(np.linalg.norm(g)), 1e-30)
    return g / np.maximum(np.linalg.norm(g, axis=-1, keepdims=True), 1e-30)


def _init_one_layer(rng, family, d, xs, ys) -> OneLayerParams:
    shape = (2, d) if family is FeatureFamily.REGRESSION else (d,)
    v = _unit_rows(rng, shape)
    probe = OneLayerParams(v, 0.0)
    f = np.concatenate([feature_values(probe, family, x, y) for x, y in zip(xs, ys)])
    lo, hi = float(f.min()), float(f.max())
    t = -(lo + float(rng.uniform()) * (hi - lo))
    return OneLayerParams(v, t)


def _init_two_layer(rng, family, d, xs, ys, width) -> TwoLayerParams:
    units = [_init_one_layer(rng, family, d, xs, ys) for _ in range(width)]
    w = rng.dirichlet(np.ones(width)) * rng.choice([-1.0, 1.0], size=width) * 0.5
    return TwoLayerParams(w, units)


def _normalized_ascent(params, value_fn, grad_fn, steps, step_size, family, v_bound):
    """Projected gradient ascent with direction-normalized 1/sqrt(t) steps.
    Tracks the best visited value; a non-finite value or gradient stops the
    ascent and keeps the best so far."""
    best_val = value_fn(params)
    best_params = params.copy()
    if not math.isfinite(best_val):
        return -math.inf, best_params
    for step in range(1, steps + 1):
        grad = grad_fn(params)
        flat = grad.flat()
        nrm = float(np.linalg.norm(flat))
        if not math.isfinite(nrm) or nrm < 1e-18:
            break
        params = params.axpy(step_size / (math.sqrt(step) * nrm), grad)
        params = project_constraints(params, family, v_bound)
        val = value_fn(params)
        if not math.isfinite(val):
            break
        if val > best_val:
            best_val, best_params = val, params.copy()
    return best_val, best_params


def _mean_head(params, family, x, y, which) -> float:
    return float(np.mean(head_values(params, family, x, which, y)))


def _ascend_abs_diff(params0, which, family, xp, yp, xq, yq, cfg):
    """Best |E_p head - E_q head| from one initialization, ascending both
    signed objectives."""
    np_, nq_ = xp.shape[0], xq.shape[0]

    def value(params):
        # evaluated as two separate means so that swapping (p, q) negates
        # the difference exactly, keeping the estimated distance symmetric
        return abs(_mean_head(params, family, xp, yp, which) - _mean_head(params, family, xq, yq, which))

    best_val, best_params = -math.inf, None
    for sign in (1.0, -1.0):

        def grad(params, s=sign):
            gp = grad_params(params, family, xp, np.full(np_, s / np_), which, yp)
            gq = grad_params(params, family, xq, np.full(nq_, -s / nq_), which, yq)
            return gp.axpy(1.0, gq)

        val, prm = _normalized_ascent(params0.copy(), value, grad, cfg.steps, cfg.step_size, family, cfg.v_bound)
        if val > best_val:
            best_val, best_params = val, prm
    return best_val, best_params


def _ascend_log_score(params0, family, xp, yp, xq, yq, cfg):
    np_, nq_ = xp.shape[0], xq.shape[0]

    def value(params):
        return _mean_head(params, family, xp, yp, "log_g2") + _mean_head(params, family, xq, yq, "log_1m_g2")

    def grad(params):
        gp = grad_params(params, family, xp, np.full(np_, 1.0 / np_), "log_g2", yp)
        gq = grad_params(params, family, xq, np.full(nq_, 1.0 / nq_), "log_1m_g2", yq)
        return gp.axpy(1.0, gq)

    return _normalized_ascent(params0.copy(), value, grad, cfg.steps, cfg.step_size, family, cfg.v_bound)


def _run_ascents(kind, family, xp, yp, xq, yq, cfg, seed, extra_inits):
    d = xp.shape[1]
    xs, ys = (xp, xq), (yp, yq)
    inits = []
    for r in range(cfg.restarts):
        rng = rng_from_seed(derive_seed(seed, "distance-restart", r))
        if kind is DistanceKind.ONE_LAYER:
            inits.append(_init_one_layer(rng, family, d, xs, ys))
        else:
            inits.append(_init_two_layer(rng, family, d, xs, ys, cfg.width))
    for extra in extra_inits or ():
        inits.append(project_constraints(extra.copy(), family, cfg.v_bound))

    best_val, best_params = -math.inf, None
    for params0 in inits:
        if kind is DistanceKind.LOG_SCORE:
            val, prm = _ascend_log_score(params0, family, xp, yp, xq, yq, cfg)
        else:
            which = _D2_HEAD[kind]
            val, prm = _ascend_abs_diff(params0, which, family, xp, yp, xq, yq, cfg)
        if val > best_val:  # ties keep the earliest initialization
            best_val, best_params = val, prm
    return best_val, best_params


def estimate_distance(kind, family, samples_p, samples_q, cfg: AscentConfig | None = None, seed: int = 0, extra_inits=None):
    """Lower-bound estimate of the chosen adversarial distance, with the
    maximizing discriminator parameters.  Deterministic given seed; the best
    value over restarts is returned, so more restarts never hurt."""
    kind = parse_distance_kind(kind)
    family = FeatureFamily(family)
    cfg = cfg or AscentConfig()
    xp, yp = _as_xy(samples_p)
    xq, yq = _as_xy(samples_q)
    _check_pair(xp, yp, xq, yq, family)
    return _run_ascents(kind, family, xp, yp, xq, yq, cfg, seed, extra_inits)


def abar_deviation(kind, family, samples_a, samples_b, cfg: AscentConfig | None = None, seed: int = 0, extra_inits=None):
    """sup |E_a[d2] - E_b[d2]| over the kind's discriminator class, where d2
    is the scoring component (g1, g2, or log(1-g2)).  Symmetric in (a, b)."""
    kind = parse_distance_kind(kind)
    family = FeatureFamily(family)
    cfg = cfg or AscentConfig()
    xa, ya = _as_xy(samples_a)
    xb, yb = _as_xy(samples_b)
    _check_pair(xa, ya, xb, yb, family)
    if kind is not DistanceKind.LOG_SCORE:
        return _run_ascents(kind, family, xa, ya, xb, yb, cfg, seed, extra_inits)

    d = xa.shape[1]
    inits = []
    for r in range(cfg.restarts):
        rng = rng_from_seed(derive_seed(seed, "distance-restart", r))
        inits.append(_init_two_layer(rng, family, d, (xa, xb), (ya, yb), cfg.width))
    for extra in extra_inits or ():
        inits.append(project_constraints(extra.copy(), family, cfg.v_bound))
    best_val, best_params = -math.inf, None
    for params0 in inits:
        val, prm = _ascend_abs_diff(params0, "log_1m_g2", family, xa, ya, xb, yb, cfg)
        if val > best_val:
            best_val, best_params = val, prm
    return best_val, best_params


# ---------------------------------------------------------------------------
# 1-d smoothed KS oracle
# ---------------------------------------------------------------------------


def _dist_atoms(dist):
    if hasattr(dist, "atoms"):
        atoms, masses = dist.atoms, dist.masses
    else:
        atoms, masses = dist
    atoms = np.asarray(atoms, dtype=float).ravel()
    masses = np.asarray(masses, dtype=float).ravel()
    if atoms.shape != masses.shape or atoms.size == 0:
        raise ValueError("atoms and masses must be matching nonempty vectors")
    if np.any(masses < -1e-15) or abs(float(masses.sum()) - 1.0) > 1e-12:
        raise ValueError("masses must be nonnegative and sum to 1 within 1e-12")
    return atoms, masses


def _expectation_curve(atoms, masses, smoothing, t):
    """E T(x + t) for a grid of offsets t."""
    return (smoothing.t_values(atoms[:, None] + t[None, :]) * masses[:, None]).sum(axis=0)


def smoothed_ks_oracle_1d(p, q, smoothing: SmoothingCdf, grid_t: int = 4001, refine: int = 2):
    """sup_t |E_p T(x+t) - E_q T(x+t)| for 1-d discrete distributions.

    Continuous smoothings use a dense grid over offsets padded by 40 beyond
    the atom range (tails < 1e-17 there) plus local refinement around the
    coarse maximizer.  Step and discrete smoothings are evaluated exactly at
    their finitely many breakpoints.
    """
    ap, mp = _dist_atoms(p)
    aq, mq = _dist_atoms(q)
    atoms_all = np.concatenate([ap, aq])

    if smoothing.kind is SmoothingKind.STEP:
        # classical KS: compare CDFs at every atom, where all jumps live
        grid = np.unique(atoms_all)
        fp = (mp[:, None] * (ap[:, None] <= grid[None, :])).sum(axis=0)
        fq = (mq[:, None] * (aq[:, None] <= grid[None, :])).sum(axis=0)
        return float(np.max(np.abs(fp - fq)))

    if smoothing.kind is SmoothingKind.DISCRETE:
        z = np.asarray(smoothing.z_atoms)
        cand = np.unique((z[:, None] - atoms_all[None, :]).ravel())
        cand = np.concatenate([cand, cand - 1e-9, cand + 1e-9])
        vals = np.abs(_expectation_curve(ap, mp, smoothing, cand) - _expectation_curve(aq, mq, smoothing, cand))
        return float(np.max(vals))

    lo = -float(atoms_all.max()) - 40.0
    hi = -float(atoms_all.min()) + 40.0
    best_t, best_val, spacing = 0.0, -1.0, hi - lo
    grid = np.linspace(lo, hi, grid_t)
    for _ in range(refine + 1):
        vals = np.abs(_expectation_curve(ap, mp, smoothing, grid) - _expectation_curve(aq, mq, smoothing, grid))
        i = int(np.argmax(vals))
        if float(vals[i]) > best_val:
            best_val, best_t = float(vals[i]), float(grid[i])
        spacing = float(grid[1] - grid[0]) if grid.size > 1 else spacing
        grid = np.linspace(best_t - spacing, best_t + spacing, 401)
    return best_val
