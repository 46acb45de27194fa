"""Numerical verifiers for the oracle field's regularity and tail behavior.

Every claim here is of the form "quantity Q(t, x) stays within an explicit
envelope" or "a sup grows no faster than a stated rate". The verifiers probe
deterministically: a low-discrepancy Halton lattice over the box of interest
plus seeded uniform points, so coverage and reproducibility both hold. All
reports are plain dicts ready for JSON.

Envelope constants, with s2 = (1-t)^2 + sigma^2 t^2 and R the largest
component-mean norm:

  Jacobian eigenvalues:   ((sigma^2+1)t - 1)/s2  <=  eig  <=  same + t(1-t)R^2/s2^2
  M2c eigenvalues:        0 <= eig <= sigma^2(1-t)^2/s2 + (1-t)^4 R^2 / s2^2
  conditional moments:    sup_{|x|_inf<=A} ||M1|| ~ A,  sup_x ||M2c|| ~ (1-t)^2,
                          sup_{|x|_inf<=A} ||M3 - M2 M1|| ~ A (1-t)^2
  time Lipschitz:         sup over [0, 1-t_floor] of ||dv/dt|| grows at most like t_floor^-2
  tails:                  P(Xt outside [-A, A]^d) <= 2 d exp(-A^2 / 2) for unit-variance marginals
"""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc

from .core import GaussianMixtureTarget, interpolant_variance, rng
from .oracle import (
    posterior_moments_batch,
    velocity_jacobian,
    velocity_rowwise,
    velocity_time_derivative,
)


def probe_box(A: float, dim: int, n: int, seed: int) -> np.ndarray:
    """n probe points in [-A, A]^d: half Halton lattice, half seeded uniforms."""
    n_lattice = n // 2
    pts = []
    if n_lattice > 0:
        lattice = qmc.Halton(d=dim, scramble=False).random(n_lattice)
        pts.append((2.0 * lattice - 1.0) * A)
    g = rng(seed)
    pts.append(g.uniform(-A, A, size=(n - n_lattice, dim)))
    return np.vstack(pts)


def jacobian_sandwich_bounds(target: GaussianMixtureTarget, t: float) -> tuple[float, float]:
    s2 = interpolant_variance(target, t)
    lo = ((target.sigma**2 + 1.0) * t - 1.0) / s2
    hi = lo + t * (1.0 - t) * target.radius**2 / s2**2
    return lo, hi


def m2c_upper_bound(target: GaussianMixtureTarget, t: float) -> float:
    s2 = interpolant_variance(target, t)
    return target.sigma**2 * (1.0 - t) ** 2 / s2 + (1.0 - t) ** 4 * target.radius**2 / s2**2


def covariance_sandwich_table(
    target: GaussianMixtureTarget,
    n_probes: int,
    seed: int,
    t_grid: np.ndarray | None = None,
    box: float | None = None,
) -> list[dict]:
    """Extreme M2c and Jacobian eigenvalues against their envelopes, per t.

    Returns one row per grid time: {t, bound_lo, eig_min, eig_max, bound_hi,
    jac_lo, jac_eig_min, jac_eig_max, jac_hi}. Spectra are taken over all
    probe points at that t.
    """
    if t_grid is None:
        t_grid = np.linspace(0.0, 1.0 - 1.0 / 64.0, 16)
    if box is None:
        box = target.radius + 3.0 * max(1.0, target.sigma)
    per_t = max(2, n_probes // max(1, len(t_grid)))
    rows = []
    for i, t in enumerate(np.asarray(t_grid, dtype=float)):
        pts = probe_box(box, target.dim, per_t, seed + i)
        _, _, _, m2c, _ = posterior_moments_batch(target, t, pts)
        eigs = np.linalg.eigvalsh(m2c)
        jac = velocity_jacobian(target, t, pts)
        jac_eigs = np.linalg.eigvalsh(0.5 * (jac + np.transpose(jac, (0, 2, 1))))
        lo, hi = jacobian_sandwich_bounds(target, t)
        rows.append(
            {
                "t": float(t),
                "bound_lo": 0.0,
                "eig_min": float(eigs.min()),
                "eig_max": float(eigs.max()),
                "bound_hi": m2c_upper_bound(target, t),
                "jac_lo": lo,
                "jac_eig_min": float(jac_eigs.min()),
                "jac_eig_max": float(jac_eigs.max()),
                "jac_hi": hi,
            }
        )
    return rows


def check_covariance_sandwich(
    target: GaussianMixtureTarget,
    n_probes: int,
    seed: int,
    tol: float = 1e-8,
    t_grid: np.ndarray | None = None,
) -> dict:
    """Worst envelope violation over the probe set; negative slack means a hit."""
    rows = covariance_sandwich_table(target, n_probes, seed, t_grid)
    m2c_low = min(r["eig_min"] - r["bound_lo"] for r in rows)
    m2c_high = min(r["bound_hi"] - r["eig_max"] for r in rows)
    jac_low = min(r["jac_eig_min"] - r["jac_lo"] for r in rows)
    jac_high = min(r["jac_hi"] - r["jac_eig_max"] for r in rows)
    worst = min(m2c_low, m2c_high, jac_low, jac_high)
    return {
        "n_times": len(rows),
        "m2c_low_slack": m2c_low,
        "m2c_high_slack": m2c_high,
        "jacobian_low_slack": jac_low,
        "jacobian_high_slack": jac_high,
        "worst_slack": worst,
        "tol": tol,
        "ok": bool(worst >= -tol),
    }


def estimate_lipschitz_x(
    target: GaussianMixtureTarget,
    t_set: np.ndarray,
    A: float,
    n_probes: int,
    seed: int,
) -> float:
    """Max sup-norm operator norm of the Jacobian over sampled (t, x)."""
    best = 0.0
    per_t = max(2, n_probes // max(1, len(t_set)))
    for i, t in enumerate(np.asarray(t_set, dtype=float)):
        pts = probe_box(A, target.dim, per_t, seed + i)
        jac = velocity_jacobian(target, t, pts)
        best = max(best, float(np.max(np.sum(np.abs(jac), axis=2))))
    return best


def estimate_lipschitz_t(
    target: GaussianMixtureTarget,
    t_floor_set: np.ndarray,
    A: float,
    seed: int,
    n_probes: int = 256,
    n_times: int = 48,
) -> dict:
    """Table of L_t(t_floor) = sup ||dv/dt||_inf over [0, 1 - t_floor] x box.

    The sup in time concentrates at the right endpoint, so the time grid
    always contains 1 - t_floor exactly.
    """
    floors = np.asarray(t_floor_set, dtype=float)
    table = {}
    for tf in floors:
        ts = 1.0 - np.geomspace(tf, 1.0, n_times)  # dense near the endpoint
        sup = 0.0
        for i, t in enumerate(ts):
            pts = probe_box(A, target.dim, n_probes, seed + i)
            dv = velocity_time_derivative(target, float(t), pts)
            sup = max(sup, float(np.max(np.abs(dv))))
        table[float(tf)] = sup
    return table


def loglog_slope(xs: np.ndarray, ys: np.ndarray) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])


def check_moment_bounds(
    target: GaussianMixtureTarget,
    t_grid: np.ndarray,
    A: float,
    seed: int,
    n_probes: int = 512,
) -> dict:
    """Normalized-sup ratios for the three conditional-moment envelopes.

    Per grid time: sup over the box of ||M1||/A, ||M2c||_op/(1-t)^2 (over a
    doubled box, the claim has no box restriction), and
    ||M3 - M2 M1|| / (A (1-t)^2). Ratios should stay bounded as the grid
    refines; the caller compares two refinement levels.
    """
    ts = np.asarray(t_grid, dtype=float)
    m1_ratios, m2c_ratios, m3_ratios = [], [], []
    for i, t in enumerate(ts):
        pts = probe_box(A, target.dim, n_probes, seed + i)
        wide = probe_box(2.0 * A, target.dim, n_probes, seed + 1000 + i)
        omt2 = (1.0 - t) ** 2
        _, m1, m2, m2c, m3 = posterior_moments_batch(target, t, pts)
        m1_ratios.append(float(np.max(np.linalg.norm(m1, axis=1))) / A)
        third = m3 - m2[:, None] * m1
        m3_ratios.append(float(np.max(np.linalg.norm(third, axis=1))) / (A * omt2))
        _, _, _, m2c_w, _ = posterior_moments_batch(target, t, wide)
        op = np.max(np.abs(np.linalg.eigvalsh(m2c_w)), axis=1)
        m2c_ratios.append(float(np.max(op)) / omt2)
    return {
        "t": ts.tolist(),
        "A": A,
        "m1_ratio": m1_ratios,
        "m2c_ratio": m2c_ratios,
        "m3_ratio": m3_ratios,
        "max_m1_ratio": max(m1_ratios),
        "max_m2c_ratio": max(m2c_ratios),
        "max_m3_ratio": max(m3_ratios),
    }


def _sample_marginal(
    target: GaussianMixtureTarget, t: float, n: int, seed: int
) -> np.ndarray:
    """Draw Xt directly from its mixture marginal sum_k w_k N(t mu_k, s2 I)."""
    g = rng(seed)
    comps = g.choice(target.n_components, size=n, p=target.weights)
    scale = np.sqrt(interpolant_variance(target, t))
    return t * target.means[comps] + scale * g.standard_normal((n, target.dim))


def estimate_tail_and_truncation(
    target: GaussianMixtureTarget,
    A_set: np.ndarray,
    n_mc: int,
    seed: int,
    t_grid: np.ndarray | None = None,
) -> dict:
    """Monte-Carlo tail probabilities and the truncated-energy proxy.

    cells[t][A] holds the tail estimate P(||Xt||_inf > A), its standard error,
    and the Gaussian reference 2 d exp(-A^2/2). proxy_max[A] is the largest
    (over t) estimate of E[||v*(t, Xt)||^2; Xt outside the box], the quantity
    controlling what clipping discards.
    """
    if t_grid is None:
        t_grid = np.linspace(0.0, 1.0 - 1.0 / 64.0, 9)
    A_arr = np.asarray(A_set, dtype=float)
    d = target.dim
    cells = []
    proxy_max = {float(A): 0.0 for A in A_arr}
    for i, t in enumerate(np.asarray(t_grid, dtype=float)):
        xt = _sample_marginal(target, float(t), n_mc, seed + i)
        v = velocity_rowwise(target, np.full(n_mc, float(t)), xt)
        vsq = np.sum(v**2, axis=1)
        sup_norm = np.max(np.abs(xt), axis=1)
        for A in A_arr:
            outside = sup_norm > A
            p_hat = float(outside.mean())
            se = float(np.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n_mc))
            proxy = float(np.mean(vsq * outside))
            proxy_max[float(A)] = max(proxy_max[float(A)], proxy)
            cells.append(
                {
                    "t": float(t),
                    "A": float(A),
                    "p_outside": p_hat,
                    "std_error": se,
                    "gaussian_bound": float(2.0 * d * np.exp(-(A**2) / 2.0)),
                    "truncation_proxy": proxy,
                }
            )
    # super-polynomial decay probe: each doubling of A must shrink the proxy
    # by more than 3x, unless the larger-A estimate already hit the MC floor
    A_sorted = sorted(proxy_max)
    decay_ok = True
    ratios: list[float | None] = []
    for a_small, a_big in zip(A_sorted[:-1], A_sorted[1:]):
        hi, lo = proxy_max[a_small], proxy_max[a_big]
        if lo == 0.0:
            ratios.append(None)  # below the Monte-Carlo floor; decay achieved
            continue
        ratios.append(hi / lo)
        if hi / lo <= 3.0:
            decay_ok = False
    return {
        "n_mc": n_mc,
        "cells": cells,
        "proxy_max": {str(a): proxy_max[a] for a in A_sorted},
        "proxy_decay_ratios": ratios,
        "proxy_decay_ok": decay_ok,
    }
