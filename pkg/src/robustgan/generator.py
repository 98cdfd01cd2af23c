"""Parametric candidate families for the min-max projection estimator, with
reparameterized sampling and pathwise gradients.

Each task optimizes over a small parametric family whose extracted functional
is the estimate itself:

    mean:           q = N(theta, I);           estimate = theta
    second_moment:  q = law of L z, z ~ N(0,I) with L lower-triangular;
                    estimate = E[X X^T] = L L^T
    regression:     x resampled from the observed covariates, y = theta.x +
                    noise_scale * z;           estimate = theta

Sampling is a deterministic map of a fixed noise pool (common random numbers
across parameter updates), so gradients of discriminator expectations flow
through the samples by the chain rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discriminator import FeatureFamily, grad_inputs

__all__ = [
    "MeanGenerator",
    "ScaleGenerator",
    "RegressionGenerator",
    "NoisePool",
    "make_noise_pool",
    "generate",
    "generator_grad",
    "extract_estimate",
    "DIAG_FLOOR",
]

DIAG_FLOOR = 1e-8


@dataclass
class MeanGenerator:
    """Candidate q = N(theta, I)."""

    theta: np.ndarray

    def copy(self):
        return MeanGenerator(self.theta.copy())

    def flat(self):
        return self.theta.copy()

    def axpy(self, alpha, other):
        return MeanGenerator(self.theta + alpha * other.theta)

    def constrain(self):
        return self


@dataclass
class ScaleGenerator:
    """Candidate q = law of L z with z ~ N(0, I); L lower-triangular with
    diagonal floored at DIAG_FLOOR so the factor stays usable."""

    chol: np.ndarray

    def copy(self):
        return ScaleGenerator(self.chol.copy())

    def flat(self):
        return self.chol.ravel().copy()

    def axpy(self, alpha, other):
        return ScaleGenerator(self.chol + alpha * other.chol)

    def constrain(self):
        l = np.tril(self.chol)
        diag = np.diag(l).copy()
        np.fill_diagonal(l, np.maximum(diag, DIAG_FLOOR))
        return ScaleGenerator(l)


@dataclass
class RegressionGenerator:
    """Candidate conditional law y = theta.x + noise_scale * z over the
    empirical covariate distribution."""

    theta: np.ndarray
    noise_scale: float

    def copy(self):
        return RegressionGenerator(self.theta.copy(), float(self.noise_scale))

    def flat(self):
        return np.concatenate([self.theta, [self.noise_scale]])

    def axpy(self, alpha, other):
        return RegressionGenerator(self.theta + alpha * other.theta, self.noise_scale + alpha * other.noise_scale)

    def constrain(self):
        return RegressionGenerator(self.theta, max(float(self.noise_scale), DIAG_FLOOR))


@dataclass(frozen=True)
class NoisePool:
    """Base noise fixed for a whole optimization run.  z is (m, d) for the
    moment tasks and (m,) for regression, where x holds the resampled
    covariate rows."""

    z: np.ndarray
    x: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.z.shape[0]


def make_noise_pool(family: FeatureFamily, m: int, d: int, rng, covariates=None) -> NoisePool:
    if m < 1:
        raise ValueError("pool size must be positive")
    if family is FeatureFamily.REGRESSION:
        if covariates is None:
            raise ValueError("regression pools resample observed covariates")
        covariates = np.asarray(covariates, dtype=float)
        rows = rng.integers(0, covariates.shape[0], size=m)
        return NoisePool(z=rng.standard_normal(m), x=covariates[rows].copy())
    return NoisePool(z=rng.standard_normal((m, d)))


def generate(params, pool: NoisePool):
    """Samples of the candidate distribution: (points, responses-or-None).
    Deterministic given (params, pool)."""
    if isinstance(params, MeanGenerator):
        if pool.z.ndim != 2 or pool.z.shape[1] != params.theta.shape[0]:
            raise ValueError("pool dimension mismatch")
        return params.theta + pool.z, None
    if isinstance(params, ScaleGenerator):
        if pool.z.ndim != 2 or pool.z.shape[1] != params.chol.shape[0]:
            raise ValueError("pool dimension mismatch")
        return pool.z @ params.chol.T, None
    if isinstance(params, RegressionGenerator):
        if pool.x is None or pool.z.ndim != 1:
            raise ValueError("regression generator needs a covariate pool")
        return pool.x, pool.x @ params.theta + params.noise_scale * pool.z
    raise TypeError("unknown generator parameters")


def generator_grad(params, pool: NoisePool, disc_params, family: FeatureFamily, which: str):
    """Pathwise gradient of mean_i out(sample_i) with respect to the
    generator parameters, where out is the discriminator head `which`."""
    x, y = generate(params, pool)
    gx, gy = grad_inputs(disc_params, family, x, which, y)
    m = pool.m
    if isinstance(params, MeanGenerator):
        return MeanGenerator(gx.mean(axis=0))
    if isinstance(params, ScaleGenerator):
        # d(L z)_a / dL_ab = z_b, lower triangle only
        return ScaleGenerator(np.tril(gx.T @ pool.z / m))
    gy = gy if gy is not None else np.zeros(m)
    return RegressionGenerator(pool.x.T @ gy / m, float(gy @ pool.z) / m)


def extract_estimate(params):
    """The task functional of the candidate: theta, or the second moment
    L L^T."""
    if isinstance(params, MeanGenerator):
        return params.theta.copy()
    if isinstance(params, ScaleGenerator):
        return params.chol @ params.chol.T
    if isinstance(params, RegressionGenerator):
        return params.theta.copy()
    raise TypeError("unknown generator parameters")
