"""Clean synthetic families and TV-eps adversarial corruptions.

Corruption follows the replacement realization of total-variation
contamination: exactly ceil(eps * n) rows, chosen uniformly without
replacement under the given seed, are replaced by adversarial rows; the rest
are returned byte-identical, and a boolean mask records which rows were hit.
Sample size is therefore fixed across eps, which keeps error curves directly
comparable.

Clean families: isotropic Gaussian, Student-t with i.i.d. coordinates
(dof > 2 so second moments exist), Laplace with i.i.d. coordinates
(sub-exponential), and linear models y = theta.x + noise over any of those
covariate families.  Population means and second moments are available in
closed form for loss evaluation.

Attacks:

    point_mass:          rows become mu_hat_clean + R * direction
    cluster:             rows drawn from N(mu_hat_clean + R * direction, s^2 I)
    sign_flip_responses: responses negated, covariates kept (regression only)
    mixture_tail:        rows at mu_hat_clean + R * |Cauchy| * random direction

Point attacks on regression data replace covariates only, creating leverage
points; responses of attacked rows are kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, rng_from_seed

__all__ = [
    "CleanFamily",
    "AttackSpec",
    "sample_clean",
    "corrupt",
    "replacement_count",
    "population_mean",
    "population_second_moment",
    "dataset_to_csv",
    "dataset_from_csv",
]

_FAMILY_KINDS = ("gaussian_iso", "student_t", "sub_exp_laplace", "linear_model")
_ATTACK_KINDS = ("point_mass", "cluster", "sign_flip_responses", "mixture_tail")


@dataclass(frozen=True)
class CleanFamily:
    kind: str
    mu: float | np.ndarray = 0.0  # scalar broadcast to d, or a d-vector
    sigma: float = 1.0  # gaussian_iso
    dof: float = 3.0  # student_t
    scale: float = 1.0  # sub_exp_laplace
    theta: np.ndarray | None = None  # linear_model coefficient vector
    x_family: "CleanFamily | None" = None  # linear_model covariates
    noise_kind: str = "gaussian"  # linear_model: gaussian | student_t
    noise_s: float = 1.0
    noise_dof: float = 3.0

    def __post_init__(self):
        if self.kind not in _FAMILY_KINDS:
            raise ValueError(f"unknown clean family {self.kind!r}")
        if self.kind == "gaussian_iso" and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.kind == "student_t" and self.dof <= 2:
            raise ValueError("dof must exceed 2 so the covariance exists")
        if self.kind == "sub_exp_laplace" and self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.kind == "linear_model":
            if self.theta is None or self.x_family is None:
                raise ValueError("linear_model requires theta and x_family")
            if self.x_family.kind == "linear_model":
                raise ValueError("covariate family cannot itself be a linear model")
            if self.noise_kind not in ("gaussian", "student_t"):
                raise ValueError(f"unknown noise kind {self.noise_kind!r}")
            if self.noise_kind == "student_t" and self.noise_dof <= 2:
                raise ValueError("noise dof must exceed 2")

    @property
    def is_regression(self) -> bool:
        return self.kind == "linear_model"


def _mu_vector(family: CleanFamily, d: int) -> np.ndarray:
    mu = np.asarray(family.mu, dtype=float)
    if mu.ndim == 0:
        return np.full(d, float(mu))
    if mu.shape != (d,):
        raise ValueError("mu dimension does not match d")
    return mu.copy()


def _sample_marginal(family: CleanFamily, n: int, d: int, rng) -> np.ndarray:
    mu = _mu_vector(family, d)
    if family.kind == "gaussian_iso":
        return mu + family.sigma * rng.standard_normal((n, d))
    if family.kind == "student_t":
        return mu + rng.standard_t(family.dof, size=(n, d))
    if family.kind == "sub_exp_laplace":
        return mu + rng.laplace(0.0, family.scale, size=(n, d))
    raise ValueError("linear_model has no marginal sampler")


def sample_clean(family: CleanFamily, n: int, d: int, seed: int) -> Dataset:
    """n i.i.d. draws; the corrupted mask is all-false and meta records the
    family and seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = rng_from_seed(seed)
    meta = {"family": family, "seed": int(seed)}
    if family.kind != "linear_model":
        pts = _sample_marginal(family, n, d, rng)
        return Dataset(pts, meta=meta)
    theta = np.asarray(family.theta, dtype=float)
    if theta.shape != (d,):
        raise ValueError("theta dimension does not match d")
    x = _sample_marginal(family.x_family, n, d, rng)
    if family.noise_kind == "gaussian":
        noise = family.noise_s * rng.standard_normal(n)
    else:
        noise = rng.standard_t(family.noise_dof, size=n)
    return Dataset(x, responses=x @ theta + noise, meta=meta)


def population_mean(family: CleanFamily, d: int) -> np.ndarray:
    """E[X] for marginal families, E[(X, Y)] not defined here: linear models
    expose their coefficient vector via family.theta instead."""
    if family.kind == "linear_model":
        raise ValueError("population_mean is for marginal families")
    return _mu_vector(family, d)


def population_second_moment(family: CleanFamily, d: int) -> np.ndarray:
    """E[X X^T] in closed form (i.i.d.-coordinate families)."""
    if family.kind == "linear_model":
        raise ValueError("population_second_moment is for marginal families")
    mu = _mu_vector(family, d)
    if family.kind == "gaussian_iso":
        var = family.sigma**2
    elif family.kind == "student_t":
        var = family.dof / (family.dof - 2.0)
    else:
        var = 2.0 * family.scale**2
    return var * np.eye(d) + np.outer(mu, mu)


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    eps: float
    magnitude: float = 0.0  # R
    direction: np.ndarray | None = None  # defaults to the first axis
    spread: float = 1.0  # cluster only

    def __post_init__(self):
        if self.kind not in _ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if not 0.0 <= self.eps <= 0.45:
            raise ValueError("eps must lie in [0, 0.45]")
        if self.magnitude < 0:
            raise ValueError("magnitude must be nonnegative")
        if self.spread <= 0:
            raise ValueError("spread must be positive")


def replacement_count(eps: float, n: int) -> int:
    """ceil(eps * n) with a guard against binary-float fuzz in eps * n."""
    return int(math.ceil(eps * n - 1e-9))


def _attack_direction(attack: AttackSpec, d: int) -> np.ndarray:
    if attack.direction is None:
        e1 = np.zeros(d)
        e1[0] = 1.0
        return e1
    v = np.asarray(attack.direction, dtype=float)
    if v.shape != (d,):
        raise ValueError("attack direction dimension mismatch")
    nrm = float(np.linalg.norm(v))
    if nrm == 0:
        raise ValueError("attack direction must be nonzero")
    return v / nrm


def corrupt(clean: Dataset, attack: AttackSpec, seed: int) -> Dataset:
    """Replace exactly ceil(eps n) uniformly chosen rows per the attack kind.
    Untouched rows are bit-identical to the input."""
    n, d = clean.n, clean.d
    k = replacement_count(attack.eps, n)
    if k > n // 2:
        raise ValueError("replacement count exceeds n/2; past the breakdown regime")
    if attack.kind == "sign_flip_responses" and not clean.is_regression:
        raise ValueError("sign_flip_responses requires a regression dataset")

    points = clean.points.copy()
    responses = None if clean.responses is None else clean.responses.copy()
    mask = np.zeros(n, dtype=bool)
    meta = dict(clean.meta)
    meta.update({"attack": attack, "attack_seed": int(seed)})
    if k == 0:
        return Dataset(points, responses=responses, corrupted_mask=mask, meta=meta)

    rng = rng_from_seed(seed)
    idx = rng.choice(n, size=k, replace=False)
    mask[idx] = True
    center = clean.points.mean(axis=0)
    direction = _attack_direction(attack, d)

    if attack.kind == "point_mass":
        points[idx] = center + attack.magnitude * direction
    elif attack.kind == "cluster":
        points[idx] = center + attack.magnitude * direction + attack.spread * rng.standard_normal((k, d))
    elif attack.kind == "mixture_tail":
        u = rng.standard_normal((k, d))
        u /= np.maximum(np.linalg.norm(u, axis=1, keepdims=True), 1e-30)
        radii = np.abs(rng.standard_cauchy(k))
        points[idx] = center + attack.magnitude * radii[:, None] * u
    else:  # sign_flip_responses
        responses[idx] = -responses[idx]
    return Dataset(points, responses=responses, corrupted_mask=mask, meta=meta)


# ---------------------------------------------------------------------------
# CSV round trip (response as last column; mask in a sidecar file)
# ---------------------------------------------------------------------------


def dataset_to_csv(ds: Dataset, path, mask_path=None) -> None:
    cols = [ds.points]
    header = [f"x{j + 1}" for j in range(ds.d)]
    if ds.responses is not None:
        cols.append(ds.responses[:, None])
        header.append("y")
    data = np.hstack(cols)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", comments="", header=",".join(header))
    if mask_path is not None:
        np.savetxt(mask_path, ds.corrupted_mask.astype(int), fmt="%d", comments="", header="corrupted")


def dataset_from_csv(path, mask_path=None) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    has_y = header[-1] == "y"
    points = raw[:, :-1] if has_y else raw
    responses = raw[:, -1] if has_y else None
    mask = None
    if mask_path is not None:
        mask = np.loadtxt(mask_path, skiprows=1, ndmin=1).astype(bool)
    return Dataset(points, responses=responses, corrupted_mask=mask)
