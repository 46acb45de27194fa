"""Neural velocity model and flow-matching empirical risk minimization.

The model is a plain ReLU multilayer perceptron v(t, x) taking the raw time
concatenated with the state, trained by full-batch gradient descent on

    L_n(v) = (1/n) sum_i || v(t_i, Xt_i) - Y_i ||^2,

the least-squares regression of the field onto Y = X1 - Z. Forward pass and
backpropagation are written out by hand so the gradient can be checked
coordinate by coordinate against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, GaussianMixtureTarget, NumericError, TrainingTriples, rng, sample_interpolant
from .oracle import velocity_rowwise


def param_count_formula(dim: int, widths: tuple[int, ...]) -> int:
    """Closed-form parameter count: sum over layers of (fan_in + 1) * fan_out."""
    sizes = [dim + 1, *widths, dim]
    return sum((m + 1) * k for m, k in zip(sizes[:-1], sizes[1:]))


class MlpVelocityModel:
    """ReLU MLP from (t, x) in R^{d+1} to a velocity in R^d.

    widths lists the hidden layer sizes; an empty tuple gives a bare affine
    map, which makes the empirical risk convex in the parameters.
    """

    def __init__(self, dim: int, widths: tuple[int, ...] = (64, 64), seed: int = 0):
        if dim < 1:
            raise ConfigError(f"dim must be >= 1, got {dim}")
        if any(w < 1 for w in widths):
            raise ConfigError(f"hidden widths must be >= 1, got {widths}")
        self.dim = int(dim)
        self.widths = tuple(int(w) for w in widths)
        self.seed = int(seed)
        g = rng(seed)
        sizes = [dim + 1, *self.widths, dim]
        self.params: list[tuple[np.ndarray, np.ndarray]] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            w = g.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in)
            b = np.zeros(fan_out)
            self.params.append((w, b))

    def param_count(self) -> int:
        return sum(w.size + b.size for w, b in self.params)

    def _features(self, t, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ConfigError(f"x must have shape (n, {self.dim}), got {x.shape}")
        t_col = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
        return np.column_stack([t_col, x])

    def _forward(self, feats: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        # returns the output and the post-activation of every layer input,
        # acts[l] is what multiplies params[l]; needed again in backward
        acts = [feats]
        a = feats
        for w, b in self.params[:-1]:
            a = np.maximum(a @ w + b, 0.0)
            acts.append(a)
        w_out, b_out = self.params[-1]
        return a @ w_out + b_out, acts

    def eval(self, t, x: np.ndarray) -> np.ndarray:
        """v(t, x) for scalar or per-row t; deterministic, piecewise linear."""
        out, _ = self._forward(self._features(t, x))
        return out

    def flatten(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in self.params])

    def unflatten(self, theta: np.ndarray) -> None:
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.param_count():
            raise ConfigError(
                f"parameter vector has {theta.size} entries, model needs {self.param_count()}"
            )
        pos = 0
        new_params = []
        for w, b in self.params:
            wk = theta[pos : pos + w.size].reshape(w.shape)
            pos += w.size
            bk = theta[pos : pos + b.size].copy()
            pos += b.size
            new_params.append((wk, bk))
        self.params = new_params

    def copy(self) -> "MlpVelocityModel":
        clone = MlpVelocityModel(self.dim, self.widths, self.seed)
        clone.params = [(w.copy(), b.copy()) for w, b in self.params]
        return clone


class OracleFieldModel:
    """The closed-form oracle wrapped in the model interface (no parameters)."""

    def __init__(self, target: GaussianMixtureTarget):
        self.target = target
        self.dim = target.dim

    def eval(self, t, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t_arr = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
        return velocity_rowwise(self.target, t_arr, x)


def empirical_risk(model: MlpVelocityModel, triples: TrainingTriples) -> float:
    resid = model.eval(triples.t, triples.xt) - triples.y
    return float(np.sum(resid**2) / triples.n)


def empirical_risk_and_grad(
    model: MlpVelocityModel, triples: TrainingTriples
) -> tuple[float, list[tuple[np.ndarray, np.ndarray]]]:
    """Risk L_n and its gradient in every weight and bias, by backpropagation."""
    n = triples.n
    feats = model._features(triples.t, triples.xt)
    out, acts = model._forward(feats)
    resid = out - triples.y
    loss = float(np.sum(resid**2) / n)

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(model.params)
    delta = 2.0 * resid / n
    for layer in range(len(model.params) - 1, -1, -1):
        w, _ = model.params[layer]
        a_in = acts[layer]
        grads[layer] = (a_in.T @ delta, delta.sum(axis=0))
        if layer > 0:
            # relu mask: acts[layer] is the post-activation of this layer's input
            delta = (delta @ w.T) * (acts[layer] > 0.0)
    return loss, grads


@dataclass(frozen=True)
class OptimizerConfig:
    """Full-batch gradient descent with classical momentum.

    batch_size switches to seeded minibatches; acceptance runs keep it None
    (full batch) so traces are exactly reproducible arithmetic.
    """

    step_size: float = 0.05
    iters: int = 1000
    momentum: float = 0.9
    batch_size: int | None = None
    seed: int = 0
    divergence_factor: float = 10.0
    divergence_patience: int = 50


@dataclass
class TrainResult:
    model: MlpVelocityModel
    losses: np.ndarray  # length iters + 1, losses[0] is the initial risk
    n: int


def _subsample(triples: TrainingTriples, idx: np.ndarray) -> TrainingTriples:
    return TrainingTriples(
        n=idx.size,
        z=triples.z[idx],
        x1=triples.x1[idx],
        t=triples.t[idx],
        xt=triples.xt[idx],
        y=triples.y[idx],
        tau=triples.tau,
        seed=triples.seed,
    )


def train_erm(
    model: MlpVelocityModel, triples: TrainingTriples, config: OptimizerConfig
) -> TrainResult:
    """Minimize the empirical risk in place; returns the loss trace.

    Aborts with NumericError when the full-data risk stays above
    divergence_factor times the initial risk for divergence_patience
    consecutive iterations.
    """
    losses = [empirical_risk(model, triples)]
    vel = [(np.zeros_like(w), np.zeros_like(b)) for w, b in model.params]
    g = rng(config.seed) if config.batch_size is not None else None
    bad_streak = 0
    for _ in range(config.iters):
        batch = triples
        if config.batch_size is not None:
            idx = g.choice(triples.n, size=min(config.batch_size, triples.n), replace=False)
            batch = _subsample(triples, idx)
        _, grads = empirical_risk_and_grad(model, batch)
        new_params = []
        new_vel = []
        for (w, b), (vw, vb), (gw, gb) in zip(model.params, vel, grads):
            vw = config.momentum * vw - config.step_size * gw
            vb = config.momentum * vb - config.step_size * gb
            new_params.append((w + vw, b + vb))
            new_vel.append((vw, vb))
        model.params = new_params
        vel = new_vel
        loss = empirical_risk(model, triples)
        losses.append(loss)
        if not np.isfinite(loss) or loss > config.divergence_factor * max(losses[0], 1e-300):
            bad_streak += 1
            if bad_streak >= config.divergence_patience or not np.isfinite(loss):
                raise NumericError(
                    f"training diverged: risk {loss:.3g} vs initial {losses[0]:.3g}"
                )
        else:
            bad_streak = 0
    return TrainResult(model=model, losses=np.asarray(losses), n=triples.n)


def excess_risk_vs_oracle(
    model, target: GaussianMixtureTarget, tau: float, n_mc: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo E || v_model(t, Xt) - v*(t, Xt) ||^2 over t ~ U(0, tau).

    Returns (estimate, standard error). Zero for the oracle wrapped as a
    model, which calibrates the estimator.
    """
    triples = sample_interpolant(target, n_mc, tau, seed)
    v_hat = model.eval(triples.t, triples.xt)
    v_star = velocity_rowwise(target, triples.t, triples.xt)
    per_sample = np.sum((v_hat - v_star) ** 2, axis=1)
    return float(per_sample.mean()), float(per_sample.std(ddof=1) / np.sqrt(n_mc))


def save_checkpoint(model: MlpVelocityModel, path: str) -> None:
    """JSON checkpoint: architecture header plus the flat parameter array."""
    payload = {
        "arch": {"widths": list(model.widths), "d": model.dim, "seed": model.seed},
        "params": model.flatten().tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_checkpoint(path: str) -> MlpVelocityModel:
    with open(path) as fh:
        payload = json.load(fh)
    try:
        arch = payload["arch"]
        model = MlpVelocityModel(
            dim=int(arch["d"]), widths=tuple(arch["widths"]), seed=int(arch["seed"])
        )
        model.unflatten(np.asarray(payload["params"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed checkpoint {path}: {exc}") from exc
    return model
