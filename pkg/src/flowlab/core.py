"""Target distributions and the linear interpolant.

The lab works with isotropic Gaussian-mixture targets: X1 is drawn by picking
a component mean mu_k with probability w_k and adding sigma * N(0, I) noise.
Noise Z is standard Gaussian, and the interpolant bridges the two,

    Xt = (1 - t) * Z + t * X1,      Y = X1 - Z,

for t in [0, 1]. Everything downstream (closed-form velocity fields, flow
matching, sampling, metrics) consumes the types defined here.

All sampling goes through a counter-based 64-bit generator (Philox) with an
explicit seed, so every draw in the lab is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration: bad target parameters, malformed config files."""


class NumericError(RuntimeError):
    """Numeric failure at run time: non-finite values, solver budget blown."""


class CheckFailure(AssertionError):
    """A verification check evaluated and failed."""


def rng(seed: int) -> np.random.Generator:
    """Counter-based generator with an explicit 64-bit seed."""
    return np.random.Generator(np.random.Philox(seed))


# Tolerances for target construction. Weights are accepted when they sum to 1
# within WEIGHT_SUM_TOL and then renormalized exactly; a mixture mean larger
# than MEAN_TOL (in any coordinate) is re-centered and the shift recorded.
WEIGHT_SUM_TOL = 1e-8
MEAN_TOL = 1e-9


@dataclass(frozen=True)
class GaussianMixtureTarget:
    """Mixture of isotropic Gaussians nu = sum_k w_k N(mu_k, sigma^2 I).

    Zero mixture mean is an invariant: the constructor re-centers the means
    when needed and records the applied shift in `center_shift`. `radius` is
    the largest centered mean norm, max_k ||mu_k||_2.
    """

    dim: int
    weights: np.ndarray
    means: np.ndarray
    sigma: float
    radius: float = field(init=False)
    center_shift: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        if self.dim < 1 or int(self.dim) != self.dim:
            raise ConfigError(f"dim must be a positive integer, got {self.dim}")
        if w.ndim != 1 or w.size == 0:
            raise ConfigError("weights must be a non-empty 1-d sequence")
        if np.any(w <= 0):
            raise ConfigError("all mixture weights must be positive")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ConfigError(f"weights sum to {w.sum():.12g}, expected 1")
        w = w / w.sum()
        if mu.shape != (w.size, self.dim):
            raise ConfigError(
                f"means must have shape ({w.size}, {self.dim}), got {mu.shape}"
            )
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigError(f"sigma must be positive and finite, got {self.sigma}")
        if not np.all(np.isfinite(mu)):
            raise ConfigError("means must be finite")
        shift = w @ mu
        if np.max(np.abs(shift)) > MEAN_TOL:
            mu = mu - shift
        else:
            shift = np.zeros(self.dim)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "center_shift", np.asarray(shift, dtype=float))
        object.__setattr__(self, "radius", float(np.max(np.linalg.norm(mu, axis=1))))

    @property
    def n_components(self) -> int:
        return self.weights.size

    def covariance(self) -> np.ndarray:
        """Cov(X1) = sigma^2 I + sum_k w_k mu_k mu_k^T (means are centered)."""
        between = (self.weights[:, None] * self.means).T @ self.means
        return self.sigma**2 * np.eye(self.dim) + between

    @classmethod
    def standard_gaussian(cls, dim: int) -> "GaussianMixtureTarget":
        return cls(dim=dim, weights=np.array([1.0]), means=np.zeros((1, dim)), sigma=1.0)

    @classmethod
    def from_config(cls, cfg: dict) -> "GaussianMixtureTarget":
        try:
            return cls(
                dim=int(cfg["dim"]),
                weights=np.asarray(cfg["weights"], dtype=float),
                means=np.asarray(cfg["means"], dtype=float),
                sigma=float(cfg["sigma"]),
            )
        except KeyError as exc:
            raise ConfigError(f"target config missing key {exc}") from exc

    def to_config(self) -> dict:
        return {
            "dim": self.dim,
            "sigma": self.sigma,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
        }


@dataclass(frozen=True)
class TrainingTriples:
    """Joint draws (Z, X1, t) with the induced Xt and regression target Y.

    Row-wise, xt = (1-t)*z + t*x1 and y = x1 - z hold exactly as computed;
    t is uniform on (0, tau].
    """

    n: int
    z: np.ndarray
    x1: np.ndarray
    t: np.ndarray
    xt: np.ndarray
    y: np.ndarray
    tau: float
    seed: int


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing knots t_0 = 0 < ... < t_K = 1 - t_floor."""

    knots: np.ndarray
    uniform: bool
    step: float  # common step when uniform, else nan

    def __post_init__(self) -> None:
        k = np.asarray(self.knots, dtype=float)
        if k.ndim != 1 or k.size < 2:
            raise ConfigError("grid needs at least two knots")
        if not np.all(np.isfinite(k)):
            raise ConfigError("grid knots must be finite")
        if np.any(np.diff(k) <= 0):
            raise ConfigError("grid knots must be strictly increasing")
        if k[0] != 0.0 or k[-1] > 1.0:
            raise ConfigError("grid must start at 0 and end at or before 1")
        if self.uniform:
            deltas = np.diff(k)
            if np.max(np.abs(deltas - self.step)) > 1e-12:
                raise ConfigError("grid flagged uniform but steps differ")
        object.__setattr__(self, "knots", k)

    @property
    def n_steps(self) -> int:
        return self.knots.size - 1

    @property
    def horizon(self) -> float:
        return float(self.knots[-1])

    @classmethod
    def make_uniform(cls, n_steps: int, t_floor: float = 0.0) -> "TimeGrid":
        if n_steps < 1:
            raise ConfigError(f"n_steps must be >= 1, got {n_steps}")
        if not 0.0 <= t_floor < 1.0:
            raise ConfigError(f"t_floor must lie in [0, 1), got {t_floor}")
        knots = np.linspace(0.0, 1.0 - t_floor, n_steps + 1)
        return cls(knots=knots, uniform=True, step=float(knots[1] - knots[0]))


def sample_target(target: GaussianMixtureTarget, n: int, seed: int) -> np.ndarray:
    """Draw n i.i.d. samples of X1: component choice, then Gaussian noise."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    g = rng(seed)
    comps = g.choice(target.n_components, size=n, p=target.weights)
    eps = g.standard_normal((n, target.dim))
    return target.means[comps] + target.sigma * eps


def sample_interpolant(
    target: GaussianMixtureTarget, n: int, tau: float, seed: int
) -> TrainingTriples:
    """Draw (Z, X1, t ~ U(0, tau)) and form Xt and Y."""
    if not 0.0 < tau <= 1.0:
        raise ConfigError(f"tau must lie in (0, 1], got {tau}")
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    g = rng(seed)
    z = g.standard_normal((n, target.dim))
    comps = g.choice(target.n_components, size=n, p=target.weights)
    x1 = target.means[comps] + target.sigma * g.standard_normal((n, target.dim))
    t = tau * g.uniform(size=n)
    xt = (1.0 - t)[:, None] * z + t[:, None] * x1
    y = x1 - z
    return TrainingTriples(n=n, z=z, x1=x1, t=t, xt=xt, y=y, tau=tau, seed=seed)


def interpolant_variance(target: GaussianMixtureTarget, t: float) -> float:
    """Per-coordinate isotropic part of Var(Xt): (1-t)^2 + t^2 sigma^2."""
    return (1.0 - t) ** 2 + t**2 * target.sigma**2


def marginal_logpdf_xt(
    target: GaussianMixtureTarget, t: float, x: np.ndarray
) -> np.ndarray | float:
    """log density of Xt = (1-t)Z + tX1 at x.

    Xt is itself a mixture: sum_k w_k N(t mu_k, ((1-t)^2 + t^2 sigma^2) I).
    Accepts a single point of shape (d,) or a batch of shape (n, d); computed
    with log-sum-exp and max subtraction.
    """
    if not 0.0 <= t <= 1.0:
        raise ConfigError(f"t must lie in [0, 1], got {t}")
    x_arr = np.asarray(x, dtype=float)
    single = x_arr.ndim == 1
    pts = np.atleast_2d(x_arr)
    if pts.shape[1] != target.dim:
        raise ConfigError(f"x has dim {pts.shape[1]}, target has dim {target.dim}")
    s2 = interpolant_variance(target, t)
    d = target.dim
    # (n, k) squared distances to the scaled component means
    diff = pts[:, None, :] - t * target.means[None, :, :]
    sq = np.sum(diff**2, axis=2)
    logk = np.log(target.weights)[None, :] - 0.5 * sq / s2
    logk -= 0.5 * d * np.log(2.0 * np.pi * s2)
    m = np.max(logk, axis=1, keepdims=True)
    out = m[:, 0] + np.log(np.sum(np.exp(logk - m), axis=1))
    return float(out[0]) if single else out


def marginal_pdf_xt(
    target: GaussianMixtureTarget, t: float, x: np.ndarray
) -> np.ndarray | float:
    """Density of Xt at x; exp of `marginal_logpdf_xt`."""
    return np.exp(marginal_logpdf_xt(target, t, x))
