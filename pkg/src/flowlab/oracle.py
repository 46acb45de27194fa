"""Closed-form velocity field for Gaussian-mixture targets.

For Xt = (1-t)Z + tX1 with X1 a mixture of isotropic Gaussians, the posterior
of X1 given Xt = x is itself a Gaussian mixture, and every quantity the lab
needs is available in closed form. Writing s_t^2 = (1-t)^2 + t^2 sigma^2 and
r_k(t, x) for the responsibility of component k under the marginal of Xt:

  per-component posterior:  X1 | (Xt = x, k) ~ N(m_k, s^2 I) with
      m_k = (t sigma^2 x + (1-t)^2 mu_k) / s_t^2,
      s^2 = sigma^2 (1-t)^2 / s_t^2,

  conditional moments:
      M1  = E[X1 | Xt=x]            = sum_k r_k m_k,
      M2  = E[||X1||^2 | Xt=x]      = sum_k r_k (||m_k||^2 + d s^2),
      M2c = Cov(X1 | Xt=x)          = sum_k r_k m_k m_k^T + s^2 I - M1 M1^T,
      M3  = E[X1 ||X1||^2 | Xt=x]   = sum_k r_k m_k (||m_k||^2 + (d+2) s^2),

  velocity field:           v*(t,x) = (M1 - x) / (1 - t)
                                    = [(1-t) sum_k r_k mu_k + ((sigma^2+1)t - 1) x] / s_t^2,
  space Jacobian:           grad_x v* = t/(1-t)^3 M2c - I/(1-t),
  time derivative:          dv*/dt = (M1 - x)/(1-t)^2
                                     + [(t+1) M2c x - t (M3 - M2 M1)] / (1-t)^4.

The second velocity expression cancels the (1-t) factor analytically, so it
stays finite all the way to t = 1, where it evaluates the one-sided limit
v*(1, x) = x - E[Z | X1 = x] = x.

Everything is vectorized over a batch of points x at a fixed t; functions
accept x of shape (d,) or (n, d) and return matching shapes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, GaussianMixtureTarget, interpolant_variance, marginal_logpdf_xt

# Central finite-difference steps used by the self-check report. First-order
# stencils use the smaller steps; the log-density Hessian uses a wider one to
# balance truncation against round-off in the second difference.
FD_STEP_X = 1e-4
FD_STEP_T = 1e-5
FD_STEP_HESS = 5e-4


@dataclass(frozen=True)
class PosteriorMoments:
    """Conditional moments of X1 given Xt = x at a single point."""

    responsibilities: np.ndarray  # (k,), nonnegative, sums to 1
    m1: np.ndarray  # (d,)
    m2: float
    m2c: np.ndarray  # (d, d), symmetric PSD
    m3: np.ndarray  # (d,)


def _as_batch(x: np.ndarray, dim: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    pts = np.atleast_2d(arr)
    if pts.shape[1] != dim:
        raise ConfigError(f"x has dim {pts.shape[1]}, target has dim {dim}")
    return pts, single


def responsibilities(
    target: GaussianMixtureTarget, t: float, x: np.ndarray
) -> np.ndarray:
    """Posterior component probabilities r_k(t, x), shape (n, k).

    r_k is proportional to w_k N(x; t mu_k, s_t^2 I); computed in log space
    with max subtraction so far-out x and t near 1 do not underflow.
    """
    pts, _ = _as_batch(x, target.dim)
    s2 = interpolant_variance(target, t)
    diff = pts[:, None, :] - t * target.means[None, :, :]
    logk = np.log(target.weights)[None, :] - 0.5 * np.sum(diff**2, axis=2) / s2
    logk -= np.max(logk, axis=1, keepdims=True)
    r = np.exp(logk)
    return r / np.sum(r, axis=1, keepdims=True)


def posterior_moments_batch(
    target: GaussianMixtureTarget, t: float, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Batched (responsibilities, M1, M2, M2c, M3) at fixed t.

    Shapes: (n, k), (n, d), (n,), (n, d, d), (n, d). Requires t in [0, 1);
    at t = 1 the posterior collapses to a point mass and the moment formulas
    lose meaning.
    """
    if not 0.0 <= t < 1.0:
        raise ConfigError(f"posterior moments need t in [0, 1), got {t}")
    pts, _ = _as_batch(x, target.dim)
    d = target.dim
    s2 = interpolant_variance(target, t)
    r = responsibilities(target, t, pts)
    post_var = target.sigma**2 * (1.0 - t) ** 2 / s2
    mk = (t * target.sigma**2 * pts[:, None, :] + (1.0 - t) ** 2 * target.means[None, :, :]) / s2
    m1 = np.einsum("nk,nkd->nd", r, mk)
    mk_sq = np.sum(mk**2, axis=2)
    m2 = np.sum(r * (mk_sq + d * post_var), axis=1)
    second = np.einsum("nk,nki,nkj->nij", r, mk, mk)
    second += post_var * np.eye(d)[None, :, :]
    m2c = second - m1[:, :, None] * m1[:, None, :]
    m3 = np.einsum("nk,nkd->nd", r * (mk_sq + (d + 2) * post_var), mk)
    return r, m1, m2, m2c, m3


def posterior_moments(
    target: GaussianMixtureTarget, t: float, x: np.ndarray
) -> PosteriorMoments:
    """Moments of X1 | Xt = x at a single point x of shape (d,)."""
    pts, single = _as_batch(x, target.dim)
    if not single or pts.shape[0] != 1:
        raise ConfigError("posterior_moments takes a single point; use the batch form")
    r, m1, m2, m2c, m3 = posterior_moments_batch(target, t, pts)
    return PosteriorMoments(
        responsibilities=r[0], m1=m1[0], m2=float(m2[0]), m2c=m2c[0], m3=m3[0]
    )


def velocity(
    target: GaussianMixtureTarget, t: float, x: np.ndarray
) -> np.ndarray:
    """Oracle velocity v*(t, x) = E[X1 - Z | Xt = x], valid on all of [0, 1].

    Uses the cancelled form [(1-t) sum_k r_k mu_k + ((sigma^2+1)t - 1) x]/s_t^2,
    which equals (M1 - x)/(1 - t) for t < 1 and evaluates the limit at t = 1.
    """
    if not 0.0 <= t <= 1.0:
        raise ConfigError(f"velocity needs t in [0, 1], got {t}")
    pts, single = _as_batch(x, target.dim)
    r = responsibilities(target, t, pts)
    mu_bar = r @ target.means
    s2 = interpolant_variance(target, t)
    v = ((1.0 - t) * mu_bar + ((target.sigma**2 + 1.0) * t - 1.0) * pts) / s2
    return v[0] if single else v


def velocity_rowwise(
    target: GaussianMixtureTarget, t: np.ndarray, x: np.ndarray
) -> np.ndarray:
    """Oracle velocity with a separate time per row: t (n,), x (n, d).

    Same cancelled form as `velocity`, broadcast over per-row times; used when
    scoring a model against the oracle on interpolant draws.
    """
    pts, _ = _as_batch(x, target.dim)
    t_arr = np.broadcast_to(np.asarray(t, dtype=float), (pts.shape[0],))
    if np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise ConfigError("velocity_rowwise needs all t in [0, 1]")
    sig2 = target.sigma**2
    s2 = (1.0 - t_arr) ** 2 + t_arr**2 * sig2
    diff = pts[:, None, :] - t_arr[:, None, None] * target.means[None, :, :]
    logk = np.log(target.weights)[None, :] - 0.5 * np.sum(diff**2, axis=2) / s2[:, None]
    logk -= np.max(logk, axis=1, keepdims=True)
    r = np.exp(logk)
    r /= np.sum(r, axis=1, keepdims=True)
    mu_bar = r @ target.means
    return ((1.0 - t_arr)[:, None] * mu_bar + ((sig2 + 1.0) * t_arr - 1.0)[:, None] * pts) / s2[:, None]


def velocity_jacobian(
    target: GaussianMixtureTarget, t: float, x: np.ndarray
) -> np.ndarray:
    """Space Jacobian grad_x v*(t, x) = t/(1-t)^3 M2c - I/(1-t).

    Shape (d, d) for a single point, (n, d, d) for a batch. t = 1 is outside
    the domain (the formula divides by (1-t)^3).
    """
    if not 0.0 <= t < 1.0:
        raise ConfigError(f"velocity_jacobian needs t in [0, 1), got {t}")
    pts, single = _as_batch(x, target.dim)
    _, _, _, m2c, _ = posterior_moments_batch(target, t, pts)
    eye = np.eye(target.dim)
    jac = (t / (1.0 - t) ** 3) * m2c - eye[None, :, :] / (1.0 - t)
    return jac[0] if single else jac


def velocity_time_derivative(
    target: GaussianMixtureTarget, t: float, x: np.ndarray
) -> np.ndarray:
    """Time derivative of the oracle velocity at fixed x, for t in [0, 1).

    dv*/dt = (M1 - x)/(1-t)^2 + [(t+1) M2c x - t (M3 - M2 M1)] / (1-t)^4.
    """
    if not 0.0 <= t < 1.0:
        raise ConfigError(f"velocity_time_derivative needs t in [0, 1), got {t}")
    pts, single = _as_batch(x, target.dim)
    _, m1, m2, m2c, m3 = posterior_moments_batch(target, t, pts)
    omt = 1.0 - t
    m2cx = np.einsum("nij,nj->ni", m2c, pts)
    third = m3 - m2[:, None] * m1
    dv = (m1 - pts) / omt**2 + ((t + 1.0) * m2cx - t * third) / omt**4
    return dv[0] if single else dv


def _score_fd(target: GaussianMixtureTarget, t: float, x: np.ndarray) -> np.ndarray:
    """Central-difference gradient of log p_t at a single point."""
    d = x.size
    g = np.zeros(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = FD_STEP_X
        g[i] = (
            marginal_logpdf_xt(target, t, x + e) - marginal_logpdf_xt(target, t, x - e)
        ) / (2.0 * FD_STEP_X)
    return g


def _log_hessian_fd(target: GaussianMixtureTarget, t: float, x: np.ndarray) -> np.ndarray:
    """Central-difference Hessian of log p_t at a single point."""
    d = x.size
    h = FD_STEP_HESS
    hess = np.zeros((d, d))
    f0 = marginal_logpdf_xt(target, t, x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        hess[i, i] = (
            marginal_logpdf_xt(target, t, x + ei)
            - 2.0 * f0
            + marginal_logpdf_xt(target, t, x - ei)
        ) / h**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            hess[i, j] = (
                marginal_logpdf_xt(target, t, x + ei + ej)
                - marginal_logpdf_xt(target, t, x + ei - ej)
                - marginal_logpdf_xt(target, t, x - ei + ej)
                + marginal_logpdf_xt(target, t, x - ei - ej)
            ) / (4.0 * h**2)
            hess[j, i] = hess[i, j]
    return hess


def identity_cross_checks(
    target: GaussianMixtureTarget, t: float, x: np.ndarray
) -> dict:
    """Residuals of three independent identities tying moments to the marginal.

    Viewing Xt = t X1 + (1-t) Z as signal plus Gaussian noise of variance
    (1-t)^2, the conditional-mean and conditional-covariance identities read

        M1  = (x + (1-t)^2 grad log p_t(x)) / t,
        M2c = ((1-t)^2 / t^2) (I + (1-t)^2 hess log p_t(x)),

    and differentiating the first gives grad_x M1 = (t/(1-t)^2) M2c. The
    derivatives of log p_t and of M1 are taken by central finite differences,
    so the residuals bundle formula error with stencil error. Needs t in
    (0, 1). The returned dict is JSON-ready.
    """
    if not 0.0 < t < 1.0:
        raise ConfigError(f"identity_cross_checks needs t in (0, 1), got {t}")
    pts, single = _as_batch(x, target.dim)
    if not single:
        raise ConfigError("identity_cross_checks takes a single point")
    x1d = pts[0]
    d = target.dim
    mom = posterior_moments(target, t, x1d)
    omt2 = (1.0 - t) ** 2

    score = _score_fd(target, t, x1d)
    m1_from_score = (x1d + omt2 * score) / t
    mean_resid = float(np.max(np.abs(mom.m1 - m1_from_score)))

    hess = _log_hessian_fd(target, t, x1d)
    m2c_from_hess = (omt2 / t**2) * (np.eye(d) + omt2 * hess)
    cov_resid = float(np.max(np.abs(mom.m2c - m2c_from_hess)))

    # grad_x M1 by differencing the posterior mean directly
    grad_m1 = np.zeros((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = FD_STEP_X
        hi = posterior_moments(target, t, x1d + e).m1
        lo = posterior_moments(target, t, x1d - e).m1
        grad_m1[:, i] = (hi - lo) / (2.0 * FD_STEP_X)
    grad_resid = float(np.max(np.abs(grad_m1 - (t / omt2) * mom.m2c)))

    m2_consistency = float(
        abs(mom.m2 - (np.trace(mom.m2c) + np.sum(mom.m1**2))) / max(abs(mom.m2), 1.0)
    )
    return {
        "t": t,
        "x": x1d.tolist(),
        "conditional_mean_residual": mean_resid,
        "conditional_cov_residual": cov_resid,
        "grad_mean_residual": grad_resid,
        "second_moment_consistency": m2_consistency,
    }


def velocity_field(target: GaussianMixtureTarget):
    """Oracle velocity as a (t, x-batch) callback for the integrator."""

    def field(t: float, x: np.ndarray) -> np.ndarray:
        return velocity(target, t, x)

    return field
