"""Foundational numeric types: Orlicz functions and norms, resilience radii,
datasets, and the seeded-RNG contract shared by every stochastic operation.

An Orlicz function psi is convex, non-decreasing on [0, inf), with psi(0) = 0
and psi(x) -> inf.  Three kinds are supported:

    power(k):       psi(x) = x**k            (bounded k-th moment scale)
    exponential:    psi(x) = exp(x) - 1      (sub-exponential scale)
    gaussian_exp:   psi(x) = exp(x**2) - 1   (sub-Gaussian scale)

The exponential kinds subtract 1 so that psi(0) = 0 holds for all kinds.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit, log_expit

__all__ = [
    "OrliczFunction",
    "ResilienceSpec",
    "Dataset",
    "psi_eval",
    "psi_inverse",
    "resilience_radius",
    "orlicz_norm_scalar",
    "rng_from_seed",
    "derive_seed",
]

_KINDS = ("power", "exponential", "gaussian_exp")


@dataclass(frozen=True)
class OrliczFunction:
    """One of the three supported Orlicz functions."""

    kind: str
    k: float = 1.0  # exponent, used by the power kind only

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown Orlicz kind {self.kind!r}")
        if self.kind == "power" and self.k < 1.0:
            raise ValueError("power kind requires exponent k >= 1")

    @staticmethod
    def power(k: float) -> "OrliczFunction":
        return OrliczFunction("power", float(k))

    @staticmethod
    def exponential() -> "OrliczFunction":
        return OrliczFunction("exponential")

    @staticmethod
    def gaussian_exp() -> "OrliczFunction":
        return OrliczFunction("gaussian_exp")


def psi_eval(psi: OrliczFunction, x):
    """Evaluate psi at x >= 0 (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("psi is defined on [0, inf) only")
    if psi.kind == "power":
        out = x**psi.k
    elif psi.kind == "exponential":
        out = np.expm1(x)
    else:
        out = np.expm1(x**2)
    return out if out.ndim else float(out)


def psi_inverse(psi: OrliczFunction, y):
    """Generalized inverse inf{x : psi(x) > y}; closed form for all kinds."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("psi inverse is defined on [0, inf) only")
    if psi.kind == "power":
        out = y ** (1.0 / psi.k)
    elif psi.kind == "exponential":
        out = np.log1p(y)
    else:
        out = np.sqrt(np.log1p(y))
    return out if out.ndim else float(out)


def resilience_radius(psi: OrliczFunction, eps: float) -> float:
    """Resilience radius rho(eps) = eps * psi^{-1}(1/eps) of a unit-Orlicz-norm
    family at deletion level eps, with rho(0) = 0."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    if eps == 0.0:
        return 0.0
    return eps * psi_inverse(psi, 1.0 / eps)


def orlicz_norm_scalar(values, psi: OrliczFunction, rel_tol: float = 1e-9) -> float:
    """Empirical Orlicz norm: the smallest t with mean psi(|x_i| / t) <= 1.

    Solved by bisection; the bracket is seeded at
    [max|x| / psi^{-1}(n), 2 max|x|] and expanded geometrically until the
    constraint straddles 1.
    """
    a = np.abs(np.asarray(values, dtype=float))
    if a.size == 0:
        raise ValueError("empty input")
    amax = float(a.max())
    if amax == 0.0:
        return 0.0
    n = a.size

    def excess(t: float) -> float:
        return float(np.mean(psi_eval(psi, a / t))) - 1.0

    lo = amax / max(psi_inverse(psi, float(n)), 1e-300)
    hi = 2.0 * amax
    while excess(lo) <= 0.0:
        lo /= 2.0
        if lo < 1e-300:
            return 0.0
    while excess(hi) > 0.0:
        hi *= 2.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class ResilienceSpec:
    """A resilience family: Orlicz function, deletion-radius function, and the
    two variance scales used by the regression family."""

    psi: OrliczFunction
    rho: Callable[[float], float] | None = None
    sigma1: float = 1.0
    sigma2: float = 1.0

    def radius(self, eps: float) -> float:
        if self.rho is not None:
            return self.rho(eps)
        return resilience_radius(self.psi, eps)


@dataclass
class Dataset:
    """n samples of d-dimensional points, optionally with scalar responses
    (regression) and a ground-truth corruption mask for synthetic data."""

    points: np.ndarray
    responses: np.ndarray | None = None
    corrupted_mask: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 1 or self.points.shape[1] < 1:
            raise ValueError("points must be a nonempty n x d matrix")
        if self.responses is not None:
            self.responses = np.asarray(self.responses, dtype=float)
            if self.responses.shape != (self.n,):
                raise ValueError("responses must be a length-n vector")
        if self.corrupted_mask is None:
            self.corrupted_mask = np.zeros(self.n, dtype=bool)
        else:
            self.corrupted_mask = np.asarray(self.corrupted_mask, dtype=bool)
            if self.corrupted_mask.shape != (self.n,):
                raise ValueError("corrupted_mask must be a length-n vector")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def is_regression(self) -> bool:
        return self.responses is not None


def rng_from_seed(seed: int) -> np.random.Generator:
    """The package-wide RNG contract: one explicit 64-bit seed per stochastic
    operation; identical seed means bit-identical streams within one build."""
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def _canon(part) -> str:
    if isinstance(part, float):
        return repr(part)
    if isinstance(part, (int, np.integer)):
        return str(int(part))
    return str(part)


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary coordinates (SHA-256 based, identical
    across machines and runs; floats keyed by their shortest repr)."""
    payload = "\x1f".join(_canon(p) for p in parts).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")


def sigmoid(x):
    """Numerically stable logistic function."""
    out = expit(np.asarray(x, dtype=float))
    return out if out.ndim else float(out)


def log_sigmoid(x):
    """log(sigmoid(x)) without overflow for large |x|."""
    out = log_expit(np.asarray(x, dtype=float))
    return out if out.ndim else float(out)
