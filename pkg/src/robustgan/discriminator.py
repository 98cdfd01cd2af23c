"""One- and two-layer sigmoid discriminators for the three feature families,
with analytic parameter/input gradients and exact constraint projections.

Feature families (f below feeds sigmoid(f + t)):

    mean:           f(x)    = v . x,                        ||v||_2 <= 1
    second_moment:  f(x)    = (v . x)^2,                    ||v||_2 <= 1
    regression:     f(x, y) = (y - v1.x)^2 - (y - v2.x)^2,  ||v1||,||v2|| <= v_bound

One-layer output g1 = sigmoid(f + t).  Two-layer output
g2 = sigmoid(sum_j w_j g1_j) with ||w||_1 <= 1, so the pre-activation lies in
[-1, 1] and g2 in [sigmoid(-1), sigmoid(1)]; with nonnegative weights the
range tightens to [1/2, e/(e+1)].

The module also hosts the smoothing CDFs T used by the smoothed
Kolmogorov-Smirnov machinery: T(x) is, after the affine map a*T + b, the CDF
of a light-tailed variable Z, and the worst-case mean shift of Z under
eps-deletions (its resilience radius) is computed exactly here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import integrate

from .core import log_sigmoid, sigmoid

__all__ = [
    "FeatureFamily",
    "OneLayerParams",
    "TwoLayerParams",
    "two_layer_preactivation",
    "head_values",
    "SmoothingKind",
    "SmoothingCdf",
    "SIGMOID_CDF",
    "SIGMOID2_CDF",
    "LOG_SIGMOID2_CDF",
    "STEP_CDF",
    "discrete_smoothing",
    "feature_values",
    "g1_eval",
    "g2_eval",
    "grad_params",
    "grad_inputs",
    "project_constraints",
    "project_l2_ball",
    "project_l1_ball",
    "DEFAULT_V_BOUND",
]

DEFAULT_V_BOUND = 10.0

_WHICH = ("g1", "g2", "log_g2", "log_1m_g2")


class FeatureFamily(str, Enum):
    MEAN = "mean"
    SECOND_MOMENT = "second_moment"
    REGRESSION = "regression"


@dataclass
class OneLayerParams:
    """Inner unit (v, t).  For the regression family v has shape (2, d) and
    stacks the two slope vectors; otherwise v has shape (d,)."""

    v: np.ndarray
    t: float

    def copy(self) -> "OneLayerParams":
        return OneLayerParams(self.v.copy(), float(self.t))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.v.ravel(), [self.t]])

    def with_flat(self, vec: np.ndarray) -> "OneLayerParams":
        v = vec[:-1].reshape(self.v.shape)
        return OneLayerParams(v.copy(), float(vec[-1]))

    def axpy(self, alpha: float, other: "OneLayerParams") -> "OneLayerParams":
        return OneLayerParams(self.v + alpha * other.v, self.t + alpha * other.t)


@dataclass
class TwoLayerParams:
    """Outer weights w (||w||_1 <= 1) over l inner units."""

    w: np.ndarray
    units: list  # of OneLayerParams

    def copy(self) -> "TwoLayerParams":
        return TwoLayerParams(self.w.copy(), [u.copy() for u in self.units])

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w] + [u.flat() for u in self.units])

    def with_flat(self, vec: np.ndarray) -> "TwoLayerParams":
        l = len(self.w)
        w = vec[:l].copy()
        units, ofs = [], l
        for u in self.units:
            k = u.flat().size
            units.append(u.with_flat(vec[ofs : ofs + k]))
            ofs += k
        return TwoLayerParams(w, units)

    def axpy(self, alpha: float, other: "TwoLayerParams") -> "TwoLayerParams":
        return TwoLayerParams(
            self.w + alpha * other.w,
            [u.axpy(alpha, g) for u, g in zip(self.units, other.units)],
        )


def _as_xy(x, y):
    """Accept a Dataset or a raw (n, d) array; return (points, responses)."""
    if hasattr(x, "points"):
        return x.points, (x.responses if y is None else y)
    return np.atleast_2d(np.asarray(x, dtype=float)), y


def feature_values(params: OneLayerParams, family: FeatureFamily, x: np.ndarray, y=None):
    """f(x) per family for a batch x of shape (n, d); regression needs y."""
    x, y = _as_xy(x, y)
    if family is FeatureFamily.MEAN:
        return x @ params.v
    if family is FeatureFamily.SECOND_MOMENT:
        return (x @ params.v) ** 2
    if y is None:
        raise ValueError("regression family requires responses")
    y = np.asarray(y, dtype=float)
    r1 = y - x @ params.v[0]
    r2 = y - x @ params.v[1]
    return r1**2 - r2**2


def g1_eval(params: OneLayerParams, family: FeatureFamily, x, y=None):
    """sigmoid(f(x) + t); value in (0, 1)."""
    return sigmoid(feature_values(params, family, x, y) + params.t)


def _inner_activations(params: TwoLayerParams, family: FeatureFamily, x, y=None):
    return np.stack([g1_eval(u, family, x, y) for u in params.units], axis=1)


def two_layer_preactivation(params: TwoLayerParams, family: FeatureFamily, x, y=None):
    """sum_j w_j g1_j(x), the argument of the outer sigmoid; lies in
    [-||w||_1, ||w||_1]."""
    acts = _inner_activations(params, family, x, y)
    return acts @ params.w


def g2_eval(params: TwoLayerParams, family: FeatureFamily, x, y=None):
    """sigmoid(sum_j w_j g1_j(x))."""
    return sigmoid(two_layer_preactivation(params, family, x, y))


def head_values(params, family: FeatureFamily, x, which: str, y=None):
    """Per-sample discriminator outputs for the head named by `which`:
    "g1" (one-layer), "g2", "log_g2", or "log_1m_g2" (two-layer)."""
    if which == "g1":
        if not isinstance(params, OneLayerParams):
            raise TypeError("g1 head requires OneLayerParams")
        return g1_eval(params, family, x, y)
    if which not in _WHICH:
        raise ValueError(f"unknown which {which!r}")
    if not isinstance(params, TwoLayerParams):
        raise TypeError(f"{which} head requires TwoLayerParams")
    s = two_layer_preactivation(params, family, x, y)
    if which == "g2":
        return sigmoid(s)
    if which == "log_g2":
        return log_sigmoid(s)
    return log_sigmoid(-s)


def _check_weights(weights, n):
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValueError("weights must be one per sample")
    return w


def _one_layer_pre_grads(params, family, x, y):
    """Per-sample gradients of the pre-activation z = f(x) + t.

    Returns (z, dz_dv, dz_dx, dz_dy) where dz_dv has the shape of params.v
    with a leading batch axis, dz_dx is (n, d), and dz_dy is (n,) or None.
    """
    x, y = _as_xy(x, y)
    if family is FeatureFamily.MEAN:
        z = x @ params.v + params.t
        dz_dv = x
        dz_dx = np.broadcast_to(params.v, x.shape)
        return z, dz_dv, dz_dx, None
    if family is FeatureFamily.SECOND_MOMENT:
        u = x @ params.v
        z = u**2 + params.t
        dz_dv = 2.0 * u[:, None] * x
        dz_dx = 2.0 * u[:, None] * params.v[None, :]
        return z, dz_dv, dz_dx, None
    y = np.asarray(y, dtype=float)
    r1 = y - x @ params.v[0]
    r2 = y - x @ params.v[1]
    z = r1**2 - r2**2 + params.t
    dz_dv = np.stack([-2.0 * r1[:, None] * x, 2.0 * r2[:, None] * x], axis=1)
    dz_dx = -2.0 * r1[:, None] * params.v[0][None, :] + 2.0 * r2[:, None] * params.v[1][None, :]
    dz_dy = 2.0 * r1 - 2.0 * r2
    return z, dz_dv, dz_dx, dz_dy


def _outer_factor(s: np.ndarray, which: str) -> np.ndarray:
    """d(output)/d(pre-activation s) for the two-layer heads."""
    p = sigmoid(s)
    if which == "g2":
        return p * (1.0 - p)
    if which == "log_g2":
        return 1.0 - p
    if which == "log_1m_g2":
        return -p
    raise ValueError(f"unknown which {which!r}")


def grad_params(params, family: FeatureFamily, x, weights, which: str, y=None):
    """Gradient of sum_i weights_i * out(x_i) w.r.t. all parameters.

    `which` selects the head: "g1" for one-layer params, "g2" / "log_g2" /
    "log_1m_g2" for two-layer params.  Weights may be signed, which is how
    difference objectives E_p - E_q are assembled by callers.
    """
    x, y = _as_xy(x, y)
    w = _check_weights(weights, x.shape[0])
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if which == "g1":
        if not isinstance(params, OneLayerParams):
            raise TypeError("g1 gradients require OneLayerParams")
        z, dz_dv, _, _ = _one_layer_pre_grads(params, family, x, y)
        p = sigmoid(z)
        coef = w * p * (1.0 - p)
        gv = np.tensordot(coef, dz_dv, axes=(0, 0))
        return OneLayerParams(gv, float(coef.sum()))
    if which not in _WHICH:
        raise ValueError(f"unknown which {which!r}")
    if not isinstance(params, TwoLayerParams):
        raise TypeError(f"{which} gradients require TwoLayerParams")
    acts = _inner_activations(params, family, x, y)
    s = acts @ params.w
    phi = w * _outer_factor(s, which)
    gw = acts.T @ phi
    gunits = []
    for j, unit in enumerate(params.units):
        z, dz_dv, _, _ = _one_layer_pre_grads(unit, family, x, y)
        a = acts[:, j]
        coef = phi * params.w[j] * a * (1.0 - a)
        gv = np.tensordot(coef, dz_dv, axes=(0, 0))
        gunits.append(OneLayerParams(gv, float(coef.sum())))
    return TwoLayerParams(gw, gunits)


def grad_inputs(params, family: FeatureFamily, x, which: str, y=None):
    """Per-sample gradients of out(x_i) w.r.t. the inputs.

    Returns (gx, gy): gx has shape (n, d); gy is (n,) for the regression
    family and None otherwise.  Used for pathwise generator gradients.
    """
    x, y = _as_xy(x, y)
    if which == "g1":
        if not isinstance(params, OneLayerParams):
            raise TypeError("g1 gradients require OneLayerParams")
        z, _, dz_dx, dz_dy = _one_layer_pre_grads(params, family, x, y)
        p = sigmoid(z)
        coef = p * (1.0 - p)
        gx = coef[:, None] * dz_dx
        gy = coef * dz_dy if dz_dy is not None else None
        return gx, gy
    if not isinstance(params, TwoLayerParams):
        raise TypeError(f"{which} gradients require TwoLayerParams")
    acts = _inner_activations(params, family, x, y)
    s = acts @ params.w
    phi = _outer_factor(s, which)
    gx = np.zeros_like(x)
    gy = np.zeros(x.shape[0]) if family is FeatureFamily.REGRESSION else None
    for j, unit in enumerate(params.units):
        z, _, dz_dx, dz_dy = _one_layer_pre_grads(unit, family, x, y)
        a = acts[:, j]
        coef = phi * params.w[j] * a * (1.0 - a)
        gx += coef[:, None] * dz_dx
        if gy is not None:
            gy += coef * dz_dy
    return gx, gy


def project_l2_ball(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Radial projection onto the l2 ball; a strict no-op on interior points
    so that projecting twice is exactly idempotent."""
    nrm = float(np.linalg.norm(v))
    if nrm <= radius:
        return v
    out = v * (radius / nrm)
    while float(np.linalg.norm(out)) > radius:  # shave the rounding ulp
        out = out * (radius / float(np.linalg.norm(out)))
    return out


def project_l1_ball(w: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection onto the l1 ball via the sorted cumulative-sum
    threshold rule (O(l log l)); exact no-op inside the ball."""
    a = np.abs(w)
    if float(a.sum()) <= radius:
        return w
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, a.size + 1)
    k = np.nonzero(u * idx > (css - radius))[0][-1]
    tau = (css[k] - radius) / (k + 1.0)
    out = np.sign(w) * np.maximum(a - tau, 0.0)
    while float(np.abs(out).sum()) > radius:  # shave rounding ulps, clamped
        excess = float(np.abs(out).sum()) - radius
        live = np.abs(out) > 0
        out = np.sign(out) * np.maximum(np.abs(out) - excess / live.sum(), 0.0)
    return out


def project_constraints(params, family: FeatureFamily, v_bound: float = DEFAULT_V_BOUND):
    """Return params with the family's norm constraints enforced exactly.
    Offsets t are unconstrained."""
    if isinstance(params, OneLayerParams):
        if family is FeatureFamily.REGRESSION:
            v = np.stack([project_l2_ball(params.v[0], v_bound), project_l2_ball(params.v[1], v_bound)])
            return OneLayerParams(v, params.t)
        return OneLayerParams(project_l2_ball(params.v), params.t)
    if isinstance(params, TwoLayerParams):
        units = [project_constraints(u, family, v_bound) for u in params.units]
        return TwoLayerParams(project_l1_ball(params.w), units)
    raise TypeError("unknown parameter type")


# ---------------------------------------------------------------------------
# Smoothing CDFs
# ---------------------------------------------------------------------------

_SIG1 = sigmoid(1.0)  # e / (e + 1)


class SmoothingKind(str, Enum):
    SIGMOID = "sigmoid"  # T(x) = sigmoid(x): already a CDF (logistic Z)
    SIGMOID_OF_SIGMOID = "sigmoid_of_sigmoid"  # T(x) = sigmoid(sigmoid(x))
    LOG_SIGMOID_OF_SIGMOID = "log_sigmoid_of_sigmoid"  # T(x) = log(sigmoid(sigmoid(x)))
    STEP = "step"  # T(x) = 1{x >= 0}: Z == 0, the unsmoothed KS case
    DISCRETE = "discrete"  # T = CDF of a finite discrete Z


@dataclass(frozen=True)
class SmoothingCdf:
    """A smoothing function T with affine constants (a, b) such that
    a*T(x) + b is the CDF of the induced variable Z, the sub-exponential tail
    scale c_z of Z, and the exact deletion resilience radius of Z."""

    kind: SmoothingKind
    z_atoms: tuple = ()  # discrete kind only
    z_masses: tuple = ()

    # -- raw T ------------------------------------------------------------
    def t_values(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is SmoothingKind.SIGMOID:
            return sigmoid(x)
        if self.kind is SmoothingKind.SIGMOID_OF_SIGMOID:
            return sigmoid(sigmoid(x))
        if self.kind is SmoothingKind.LOG_SIGMOID_OF_SIGMOID:
            return np.log(sigmoid(sigmoid(x)))
        if self.kind is SmoothingKind.STEP:
            return (x >= 0).astype(float)
        atoms = np.asarray(self.z_atoms)
        masses = np.asarray(self.z_masses)
        return np.where(x[..., None] >= atoms, masses, 0.0).sum(axis=-1)

    @property
    def affine(self) -> tuple[float, float]:
        """(a, b) with a*T + b a valid CDF."""
        if self.kind is SmoothingKind.SIGMOID_OF_SIGMOID:
            a = 1.0 / (_SIG1 - 0.5)
            return a, -a / 2.0
        if self.kind is SmoothingKind.LOG_SIGMOID_OF_SIGMOID:
            a = 1.0 / (math.log(_SIG1) - math.log(0.5))
            return a, -a * math.log(0.5)
        return 1.0, 0.0

    @property
    def c_z(self) -> float:
        """Tail scale: max one-sided tail of Z is bounded by exp(-t / c_z)."""
        if self.kind is SmoothingKind.SIGMOID:
            return 1.0
        if self.kind in (SmoothingKind.SIGMOID_OF_SIGMOID, SmoothingKind.LOG_SIGMOID_OF_SIGMOID):
            return 10.0
        return 0.0

    def tail_bound(self, t: float) -> float:
        """Upper bound on max(P(Z >= t), P(Z <= -t)) for t >= 0."""
        if t < 0:
            raise ValueError("tail bound defined for t >= 0")
        if self.kind is SmoothingKind.STEP:
            return 1.0 if t == 0 else 0.0
        if self.kind is SmoothingKind.DISCRETE:
            if t == 0:
                return 1.0
            atoms = np.asarray(self.z_atoms)
            masses = np.asarray(self.z_masses)
            return float(max(masses[atoms >= t].sum(), masses[atoms <= -t].sum()))
        return math.exp(-t / self.c_z)

    # -- CDF of Z ----------------------------------------------------------
    def cdf(self, x):
        a, b = self.affine
        return a * self.t_values(x) + b

    def survival(self, x):
        return 1.0 - self.cdf(x)

    def quantile(self, u: float) -> float:
        """Inverse CDF on (0, 1); closed-form chain of logits."""
        if not 0.0 < u < 1.0:
            raise ValueError("quantile defined on (0, 1)")
        if self.kind is SmoothingKind.STEP:
            return 0.0
        if self.kind is SmoothingKind.DISCRETE:
            cum = np.cumsum(self.z_masses)
            return float(np.asarray(self.z_atoms)[np.searchsorted(cum, u)])
        a, b = self.affine
        tv = (u - b) / a
        if self.kind is SmoothingKind.SIGMOID:
            return _logit(tv)
        if self.kind is SmoothingKind.SIGMOID_OF_SIGMOID:
            return _logit(_logit(tv))
        return _logit(_logit(math.exp(tv)))

    def z_mean(self) -> float:
        """E[Z] of the induced smoothing variable."""
        if self.kind is SmoothingKind.STEP:
            return 0.0
        if self.kind is SmoothingKind.DISCRETE:
            return float(np.asarray(self.z_atoms) @ np.asarray(self.z_masses))
        return _z_mean_cached(self.kind.value)

    def rho_z(self, eps: float) -> float:
        """Exact worst-case mean shift of Z under eps-deletions (the smallest
        valid resilience radius of Z), by tail integration of the CDF."""
        if not 0.0 <= eps < 1.0:
            raise ValueError("eps must lie in [0, 1)")
        if eps == 0.0 or self.kind is SmoothingKind.STEP:
            return 0.0
        if self.kind is SmoothingKind.DISCRETE:
            return _discrete_deletion_shift(np.asarray(self.z_atoms), np.asarray(self.z_masses), eps)
        return _continuous_deletion_shift(self, eps)


def _logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def _discrete_deletion_shift(atoms: np.ndarray, masses: np.ndarray, eps: float) -> float:
    order = np.argsort(atoms)
    atoms, masses = atoms[order], masses[order]
    mean = float(atoms @ masses)

    def keep_top(at, ms):
        # delete eps mass from the bottom, renormalize
        kept = ms.copy()
        todo = eps
        for i in range(len(at)):
            take = min(kept[i], todo)
            kept[i] -= take
            todo -= take
            if todo <= 0:
                break
        return float(at @ kept) / (1.0 - eps)

    up = keep_top(atoms, masses) - mean
    down = mean - (-keep_top(-atoms[::-1], masses[::-1].copy()))
    return max(up, down, 0.0)


@lru_cache(maxsize=4096)
def _continuous_shift_cached(kind: str, eps: float) -> float:
    cdf = SmoothingCdf(SmoothingKind(kind))
    mean = _z_mean(cdf)
    q_lo = cdf.quantile(eps)  # delete bottom eps -> keep Z >= q_lo
    up = (q_lo * cdf.survival(q_lo) + integrate.quad(cdf.survival, q_lo, np.inf)[0]) / (1.0 - eps) - mean
    q_hi = cdf.quantile(1.0 - eps)  # delete top eps -> keep Z <= q_hi
    down = mean - (q_hi * cdf.cdf(q_hi) - integrate.quad(cdf.cdf, -np.inf, q_hi)[0]) / (1.0 - eps)
    return max(up, down, 0.0)


def _continuous_deletion_shift(cdf: SmoothingCdf, eps: float) -> float:
    return _continuous_shift_cached(cdf.kind.value, float(eps))


@lru_cache(maxsize=8)
def _z_mean_cached(kind: str) -> float:
    cdf = SmoothingCdf(SmoothingKind(kind))
    upper = integrate.quad(cdf.survival, 0.0, np.inf)[0]
    lower = integrate.quad(cdf.cdf, -np.inf, 0.0)[0]
    return upper - lower


def _z_mean(cdf: SmoothingCdf) -> float:
    return _z_mean_cached(cdf.kind.value)


SIGMOID_CDF = SmoothingCdf(SmoothingKind.SIGMOID)
SIGMOID2_CDF = SmoothingCdf(SmoothingKind.SIGMOID_OF_SIGMOID)
LOG_SIGMOID2_CDF = SmoothingCdf(SmoothingKind.LOG_SIGMOID_OF_SIGMOID)
STEP_CDF = SmoothingCdf(SmoothingKind.STEP)


def discrete_smoothing(atoms, masses) -> SmoothingCdf:
    """SmoothingCdf whose Z is the given finite discrete distribution."""
    atoms = np.asarray(atoms, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if abs(masses.sum() - 1.0) > 1e-12 or np.any(masses < 0):
        raise ValueError("masses must be nonnegative and sum to 1")
    order = np.argsort(atoms)
    return SmoothingCdf(SmoothingKind.DISCRETE, tuple(atoms[order]), tuple(masses[order]))
