"""Explicit ReLU networks with exact width/depth/size accounting.

Networks here are built by hand, weight by weight, so their complexity
accounting can be read off and verified rather than estimated:

  clipper     C_A(x) = relu(x + A) - relu(x - A) - A, coordinatewise clamp to
              [-A, A]; width 2d, one hidden layer.
  time hats   phi_m(t) = psi(3M(t - m/M)) with the trapezoid
              psi(z) = relu(z+2) - relu(z+1) - relu(z-1) + relu(z-2),
              which is 1 on |z|<=1 and 0 outside |z|>=2; the family
              {phi_m}_{m=0..M} sums to exactly 1 on [0, 1].
  approximant f~(t) = sum_m phi_m(t) f(m/M), a width-O(M) depth-1 network
              whose sup error on [0,1] is at most (2/(3M)) |f|_Lip and whose
              own Lipschitz constant never exceeds 5 |f|_Lip.

Size counts nonzero parameters only; an identity block of d^2 entries
contributes d.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError


@dataclass(frozen=True)
class ReluNetwork:
    """Dense ReLU network: affine layers with ReLU on all but the last.

    layers[i] = (W, b) with W of shape (fan_out, fan_in); evaluation maps a
    batch (n, d0) through W x + b. Stored accounting must match a recount.
    """

    layers: tuple[tuple[np.ndarray, np.ndarray], ...]
    width: int = field(init=False)
    depth: int = field(init=False)
    size: int = field(init=False)

    def __post_init__(self) -> None:
        if len(self.layers) < 1:
            raise ConfigError("a network needs at least one affine layer")
        for i, (w, b) in enumerate(self.layers):
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.size:
                raise ConfigError(f"layer {i} has inconsistent shapes {w.shape}, {b.shape}")
            if i > 0 and w.shape[1] != self.layers[i - 1][0].shape[0]:
                raise ConfigError(f"layer {i} input dim does not match layer {i-1} output")
        stats = network_stats(self)
        object.__setattr__(self, "width", stats["width"])
        object.__setattr__(self, "depth", stats["depth"])
        object.__setattr__(self, "size", stats["size"])

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1][0].shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {"layers": [{"w": w.tolist(), "b": b.tolist()} for w, b in self.layers]},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ReluNetwork":
        payload = json.loads(text)
        layers = tuple(
            (np.asarray(l["w"], dtype=float), np.asarray(l["b"], dtype=float))
            for l in payload["layers"]
        )
        return cls(layers=layers)


def network_stats(net: ReluNetwork) -> dict:
    """Recount width (max hidden layer size), depth (hidden layer count), and
    size (nonzero weights and biases) directly from the layers."""
    hidden = [w.shape[0] for w, _ in net.layers[:-1]]
    nonzero = sum(
        int(np.count_nonzero(w)) + int(np.count_nonzero(b)) for w, b in net.layers
    )
    return {
        "width": max(hidden) if hidden else 0,
        "depth": len(net.layers) - 1,
        "size": nonzero,
    }


def network_eval(net: ReluNetwork, x: np.ndarray) -> np.ndarray:
    """Evaluate on a batch (n, d0) or a single point (d0,)."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    a = np.atleast_2d(arr)
    if a.shape[1] != net.input_dim:
        raise ConfigError(f"input dim {a.shape[1]}, network expects {net.input_dim}")
    for w, b in net.layers[:-1]:
        a = np.maximum(a @ w.T + b, 0.0)
    w, b = net.layers[-1]
    out = a @ w.T + b
    return out[0] if single else out


def build_clipper(A: float, dim: int) -> ReluNetwork:
    """Coordinatewise clamp to [-A, A] as a one-hidden-layer network."""
    if A <= 0:
        raise ConfigError(f"clipping level must be positive, got {A}")
    if dim < 1:
        raise ConfigError(f"dim must be >= 1, got {dim}")
    eye = np.eye(dim)
    w_hidden = np.vstack([eye, eye])  # relu(x + A) block and relu(x - A) block
    b_hidden = np.concatenate([A * np.ones(dim), -A * np.ones(dim)])
    w_out = np.hstack([eye, -eye])
    b_out = -A * np.ones(dim)
    return ReluNetwork(layers=((w_hidden, b_hidden), (w_out, b_out)))


def _hat_layers(M: int, m: int) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    # psi(3M t - 3m) via its four ReLU breakpoints
    w_hidden = np.full((4, 1), 3.0 * M)
    b_hidden = np.array([2.0 - 3.0 * m, 1.0 - 3.0 * m, -1.0 - 3.0 * m, -2.0 - 3.0 * m])
    w_out = np.array([[1.0, -1.0, -1.0, 1.0]])
    b_out = np.zeros(1)
    return (w_hidden, b_hidden), (w_out, b_out)


def build_time_pou(M: int) -> list[ReluNetwork]:
    """The M+1 trapezoid hats phi_m; they sum to exactly 1 on [0, 1]."""
    if M < 1:
        raise ConfigError(f"M must be >= 1, got {M}")
    return [ReluNetwork(layers=_hat_layers(M, m)) for m in range(M + 1)]


def build_time_approximant(samples: np.ndarray, M: int) -> ReluNetwork:
    """Network computing f~(t) = sum_m phi_m(t) * samples[m].

    samples holds the M+1 knot values f(0), f(1/M), ..., f(1). All hats share
    one hidden layer of 4(M+1) units; the output layer mixes them with the
    knot values, so the whole approximant is one depth-1 network of width
    O(M) and size O(M).
    """
    vals = np.asarray(samples, dtype=float)
    if M < 1:
        raise ConfigError(f"M must be >= 1, got {M}")
    if vals.shape != (M + 1,):
        raise ConfigError(f"need {M + 1} knot samples, got shape {vals.shape}")
    blocks = [_hat_layers(M, m) for m in range(M + 1)]
    w_hidden = np.vstack([b[0][0] for b in blocks])
    b_hidden = np.concatenate([b[0][1] for b in blocks])
    signs = np.array([1.0, -1.0, -1.0, 1.0])
    w_out = np.concatenate([f * signs for f in vals])[None, :]
    b_out = np.zeros(1)
    return ReluNetwork(layers=((w_hidden, b_hidden), (w_out, b_out)))


def piecewise_linear_breakpoints(M: int) -> np.ndarray:
    """All breakpoints of the hats {phi_m} inside [0, 1], plus the endpoints.

    Piecewise-linear functions attain their extrema at breakpoints, so sup
    norms over [0, 1] can be evaluated exactly on this finite set.
    """
    ms = np.arange(M + 1)[:, None]
    offsets = np.array([-2.0, -1.0, 1.0, 2.0])[None, :] / (3.0 * M)
    pts = (ms / M + offsets).ravel()
    pts = np.concatenate([pts, [0.0, 1.0]])
    return np.unique(np.clip(pts, 0.0, 1.0))


def measure_sup_error(net: ReluNetwork, f, grid: np.ndarray) -> float:
    """max |net(t) - f(t)| over the grid (scalar input and output nets)."""
    out = network_eval(net, grid[:, None])[:, 0]
    return float(np.max(np.abs(out - np.asarray([f(t) for t in grid]))))


def measure_lipschitz(net: ReluNetwork, grid: np.ndarray) -> float:
    """Max slope between consecutive grid points (scalar nets).

    Exact for piecewise-linear nets when the grid contains every breakpoint.
    """
    out = network_eval(net, grid[:, None])[:, 0]
    return float(np.max(np.abs(np.diff(out) / np.diff(grid))))
