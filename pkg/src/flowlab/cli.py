"""Command-line experiment runner.

Subcommands mirror the pipeline: verify (oracle identity suites), train,
sample, evaluate, regularity, approx (network constructions), experiment
(everything, plus plots), report (summarize an artifact directory).

Exit codes: 0 pass, 2 config error, 3 numeric failure, 4 check failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .core import (
    CheckFailure,
    ConfigError,
    GaussianMixtureTarget,
    NumericError,
    TimeGrid,
    rng,
    sample_target,
)
from . import oracle
from .flowmatch import (
    MlpVelocityModel,
    OptimizerConfig,
    load_checkpoint,
    save_checkpoint,
    train_erm,
)
from .core import sample_interpolant
from .metrics import ErrorReport, decompose_errors, w2_exact
from .regularity import (
    check_covariance_sandwich,
    check_moment_bounds,
    covariance_sandwich_table,
    estimate_lipschitz_t,
    estimate_lipschitz_x,
    estimate_tail_and_truncation,
    loglog_slope,
)
from .reluconstruct import (
    build_clipper,
    build_time_approximant,
    build_time_pou,
    measure_lipschitz,
    measure_sup_error,
    network_eval,
    network_stats,
    piecewise_linear_breakpoints,
)
from .sampler import euler_integrate, exact_gaussian_flow

DEFAULT_CONFIG: dict = {
    "target": {
        "dim": 2,
        "sigma": 0.5,
        "weights": [0.5, 0.5],
        "means": [[1.0, 0.0], [-1.0, 0.0]],
    },
    "model": {"widths": [64, 64], "seed": 0},
    "train": {
        "n": 4096,
        "seed": 0,
        "step_size": 0.05,
        "iters": 1200,
        "momentum": 0.9,
    },
    "grid": {"K": 256, "t_floor": 0.03125},
    "eval": {"n": 1024, "seed": 100},
    "checks": {
        "gaussian_tol": 1e-12,
        "jacobian_tol": 1e-5,
        "tderiv_tol": 1e-4,
        "cross_check_tol": 1e-4,
        "sandwich_tol": 1e-8,
    },
}


def load_config(path: str | None) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is None:
        return cfg
    try:
        with open(path) as fh:
            user = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    for section, value in user.items():
        if section not in cfg:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(value, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        for key, entry in value.items():
            if key not in cfg[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            cfg[section][key] = entry
    return cfg


def artifact_root(explicit: str | None) -> Path:
    root = explicit or os.environ.get("FLOWLAB_ARTIFACTS", "artifacts")
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def model_field(model) -> Callable[[float, np.ndarray], np.ndarray]:
    return lambda t, x: model.eval(t, x)


def verification_suite() -> list[tuple[str, GaussianMixtureTarget]]:
    """Three mixture targets covering the shapes the identity checks need."""
    return [
        ("standard_gaussian_d2", GaussianMixtureTarget.standard_gaussian(2)),
        (
            "two_component_d1",
            GaussianMixtureTarget(
                dim=1,
                weights=np.array([0.3, 0.7]),
                means=np.array([[-1.0], [0.5]]),
                sigma=0.5,
            ),
        ),
        (
            "three_component_d2",
            GaussianMixtureTarget(
                dim=2,
                weights=np.array([0.25, 0.35, 0.4]),
                means=np.array([[1.2, 0.0], [-0.5, 0.9], [-0.4, -0.8]]),
                sigma=0.7,
            ),
        ),
    ]


# ------------------------------------------------------------------ checks
@dataclass
class CheckResult:
    label: str
    ok: bool
    detail: str


def _run_checks(checks: list[tuple[str, Callable[[], tuple[bool, str]]]]) -> list[CheckResult]:
    results = []
    for label, fn in checks:
        try:
            ok, detail = fn()
        except (ConfigError, CheckFailure) as exc:
            ok, detail = False, str(exc)
        results.append(CheckResult(label, ok, detail))
        print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    return results


def _fd_jacobian(target, t, x, h=1e-4):
    d = target.dim
    jac = np.zeros((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        jac[:, i] = (oracle.velocity(target, t, x + e) - oracle.velocity(target, t, x - e)) / (2 * h)
    return jac


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    tols = cfg["checks"]
    suite = verification_suite()
    checks = []

    def gaussian_exactness():
        g = rng(12)
        target = GaussianMixtureTarget.standard_gaussian(2)
        worst = 0.0
        for _ in range(200):
            t = float(g.uniform(0.0, 1.0))
            x = g.normal(size=2) * 2.0
            c = (2 * t - 1) / (2 * t * t - 2 * t + 1)
            worst = max(worst, float(np.max(np.abs(oracle.velocity(target, t, x) - c * x))))
        return worst <= tols["gaussian_tol"], f"max |v - c(t) x| = {worst:.3e}"

    checks.append(("gaussian_velocity_coefficient", gaussian_exactness))

    def jacobian_vs_fd():
        g = rng(13)
        worst = 0.0
        for _, target in suite:
            for _ in range(50):
                t = float(g.uniform(0.0, 0.95))
                x = g.normal(size=target.dim) * 2.0
                diff = oracle.velocity_jacobian(target, t, x) - _fd_jacobian(target, t, x)
                worst = max(worst, float(np.max(np.abs(diff))))
        return worst <= tols["jacobian_tol"], f"max entry error = {worst:.3e}"

    checks.append(("jacobian_finite_difference", jacobian_vs_fd))

    def tderiv_vs_fd():
        g = rng(14)
        worst = 0.0
        h = 1e-5
        for _, target in suite:
            for _ in range(50):
                t = float(g.uniform(0.01, 0.9))
                x = g.normal(size=target.dim) * 2.0
                fd = (oracle.velocity(target, t + h, x) - oracle.velocity(target, t - h, x)) / (2 * h)
                diff = oracle.velocity_time_derivative(target, t, x) - fd
                worst = max(worst, float(np.max(np.abs(diff))))
        return worst <= tols["tderiv_tol"], f"max entry error = {worst:.3e}"

    checks.append(("time_derivative_finite_difference", tderiv_vs_fd))

    def cross_identities():
        g = rng(15)
        worst = 0.0
        for _, target in suite:
            for _ in range(10):
                t = float(g.uniform(0.2, 0.85))
                x = g.normal(size=target.dim)
                rep = oracle.identity_cross_checks(target, t, x)
                worst = max(
                    worst,
                    rep["conditional_mean_residual"],
                    rep["conditional_cov_residual"],
                    rep["grad_mean_residual"],
                )
        return worst <= tols["cross_check_tol"], f"max residual = {worst:.3e}"

    checks.append(("score_identity_cross_checks", cross_identities))

    def sandwich():
        worst = 0.0
        for i, (_, target) in enumerate(suite):
            rep = check_covariance_sandwich(target, n_probes=2000, seed=50 + i, tol=tols["sandwich_tol"])
            worst = min(worst, rep["worst_slack"]) if i else rep["worst_slack"]
        return worst >= -tols["sandwich_tol"], f"worst envelope slack = {worst:.3e}"

    checks.append(("covariance_eigenvalue_envelope", sandwich))

    results = _run_checks(checks)
    if not all(r.ok for r in results):
        raise CheckFailure("verification suite failed")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    out = artifact_root(args.out)
    target = GaussianMixtureTarget.from_config(cfg["target"])
    tau = 1.0 - cfg["grid"]["t_floor"]
    triples = sample_interpolant(target, cfg["train"]["n"], tau, cfg["train"]["seed"])
    model = MlpVelocityModel(target.dim, tuple(cfg["model"]["widths"]), cfg["model"]["seed"])
    opt = OptimizerConfig(
        step_size=cfg["train"]["step_size"],
        iters=cfg["train"]["iters"],
        momentum=cfg["train"]["momentum"],
    )
    result = train_erm(model, triples, opt)
    save_checkpoint(model, str(out / "checkpoint.json"))
    write_csv(
        out / "loss_trace.csv",
        ["step", "loss"],
        [(i, f"{v:.12g}") for i, v in enumerate(result.losses)],
    )
    print(f"trained {model.param_count()} parameters on n={triples.n}")
    print(f"initial risk {result.losses[0]:.6f} -> final risk {result.losses[-1]:.6f}")
    print(f"artifacts: {out / 'checkpoint.json'}, {out / 'loss_trace.csv'}")
    return 0


def _field_from_args(args, cfg, target):
    if getattr(args, "checkpoint", None):
        model = load_checkpoint(args.checkpoint)
        if model.dim != target.dim:
            raise ConfigError(
                f"checkpoint dim {model.dim} does not match target dim {target.dim}"
            )
        return model_field(model), "model"
    return oracle.velocity_field(target), "oracle"


def cmd_sample(args) -> int:
    cfg = load_config(args.config)
    out = artifact_root(args.out)
    target = GaussianMixtureTarget.from_config(cfg["target"])
    grid = TimeGrid.make_uniform(cfg["grid"]["K"], cfg["grid"]["t_floor"])
    field, kind = _field_from_args(args, cfg, target)
    n = cfg["eval"]["n"]
    x0 = rng(cfg["eval"]["seed"]).standard_normal((n, target.dim))
    header = [f"x{i}" for i in range(target.dim)]
    if args.trajectory:
        traj = euler_integrate(field, grid, x0, return_trajectory=True)
        rows = []
        for k in range(traj.shape[0]):
            t = grid.knots[k]
            for i in range(n):
                rows.append([k, f"{t:.12g}", i, *(f"{v:.12g}" for v in traj[k, i])])
        write_csv(out / "trajectory.csv", ["k", "t", "i", *header], rows)
        print(f"wrote {out / 'trajectory.csv'} ({kind} field)")
    else:
        end = euler_integrate(field, grid, x0)
        write_csv(
            out / "endpoints.csv",
            header,
            [[f"{v:.12g}" for v in row] for row in end],
        )
        print(f"wrote {out / 'endpoints.csv'} ({kind} field)")
    return 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    out = artifact_root(args.out)
    target = GaussianMixtureTarget.from_config(cfg["target"])
    grid = TimeGrid.make_uniform(cfg["grid"]["K"], cfg["grid"]["t_floor"])
    field, kind = _field_from_args(args, cfg, target)
    report = decompose_errors(target, field, grid, cfg["eval"]["n"], cfg["eval"]["seed"])
    with open(out / "error_report.json", "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    print(report.to_json())
    print(f"wrote {out / 'error_report.json'} ({kind} field)")
    return 0


def _regularity_payload(target: GaussianMixtureTarget, cfg: dict) -> tuple[dict, list[dict]]:
    sandwich = check_covariance_sandwich(
        target, n_probes=4000, seed=21, tol=cfg["checks"]["sandwich_tol"]
    )
    floors = np.array([2.0**-k for k in range(2, 8)])
    A = target.radius + 2.0
    lip_t = estimate_lipschitz_t(target, floors, A, seed=22, n_probes=128, n_times=32)
    slope = loglog_slope(1.0 / floors, np.array([lip_t[float(f)] for f in floors]))
    lip_x = {
        float(f): estimate_lipschitz_x(
            target, np.linspace(0.0, 1.0 - float(f), 24), A, 512, seed=23
        )
        for f in floors
    }
    moments = check_moment_bounds(
        target, np.linspace(0.0, 1.0 - 1.0 / 64.0, 12), A, seed=24, n_probes=256
    )
    # ladder starts beyond the mixture radius: decay per doubling is an
    # asymptotic claim and the first doubling must not straddle the modes
    A_lo = float(np.ceil(target.radius + 1.0))
    tail = estimate_tail_and_truncation(
        target, np.array([A_lo, 2 * A_lo, 4 * A_lo]), n_mc=20000, seed=25
    )
    payload = {
        "sandwich": sandwich,
        "lipschitz_t": {str(k): v for k, v in lip_t.items()},
        "lipschitz_t_slope": slope,
        "lipschitz_x": {str(k): v for k, v in lip_x.items()},
        "moment_ratios": moments,
        "tail": tail,
    }
    table = covariance_sandwich_table(target, n_probes=2000, seed=26)
    return payload, table


def cmd_regularity(args) -> int:
    cfg = load_config(args.config)
    out = artifact_root(args.out)
    target = GaussianMixtureTarget.from_config(cfg["target"])
    payload, table = _regularity_payload(target, cfg)
    write_json(out / "regularity_report.json", payload)
    write_csv(
        out / "sandwich_table.csv",
        ["t", "bound_lo", "eig_min", "eig_max", "bound_hi"],
        [
            [f"{r['t']:.6g}", f"{r['bound_lo']:.12g}", f"{r['eig_min']:.12g}",
             f"{r['eig_max']:.12g}", f"{r['bound_hi']:.12g}"]
            for r in table
        ],
    )
    ok = payload["sandwich"]["ok"] and payload["lipschitz_t_slope"] <= 2.3
    print(f"sandwich ok: {payload['sandwich']['ok']}")
    print(f"time-Lipschitz slope: {payload['lipschitz_t_slope']:.3f}")
    print(f"wrote {out / 'regularity_report.json'}, {out / 'sandwich_table.csv'}")
    if not ok:
        raise CheckFailure("regularity report out of bounds")
    return 0


def cmd_approx(args) -> int:
    out = artifact_root(args.out)
    checks = []

    def clipper_matches_clamp():
        g = rng(31)
        net = build_clipper(2.0, 3)
        pts = g.normal(size=(10000, 3)) * 3.0
        worst = float(np.max(np.abs(network_eval(net, pts) - np.clip(pts, -2.0, 2.0))))
        return worst < 1e-12, f"max |net - clamp| = {worst:.3e}"

    checks.append(("clipper_equals_clamp", clipper_matches_clamp))

    def pou_sums_to_one():
        worst = 0.0
        for M in (1, 4, 16, 64):
            hats = build_time_pou(M)
            ts = np.linspace(0.0, 1.0, 10001)[:, None]
            total = sum(network_eval(h, ts)[:, 0] for h in hats)
            worst = max(worst, float(np.max(np.abs(total - 1.0))))
        return worst < 1e-12, f"max |sum - 1| = {worst:.3e}"

    checks.append(("partition_of_unity_sum", pou_sums_to_one))

    approx_rows = []

    def approximant_error_and_lipschitz():
        ok = True
        details = []
        for M in (8, 32, 128):
            knots = np.arange(M + 1) / M
            net = build_time_approximant(knots, M)  # f(t) = t
            grid = np.union1d(piecewise_linear_breakpoints(M), np.linspace(0, 1, 10001))
            err = measure_sup_error(net, lambda t: t, grid)
            lip = measure_lipschitz(net, piecewise_linear_breakpoints(M))
            stats = network_stats(net)
            approx_rows.append({"M": M, "sup_error": err, "lipschitz": lip, **stats})
            ok = ok and err <= 2.0 / (3.0 * M) and lip <= 5.0
            details.append(f"M={M}: err={err:.2e} (cap {2/(3*M):.2e}) lip={lip:.2f}")
        return ok, "; ".join(details)

    checks.append(("time_approximant_bounds", approximant_error_and_lipschitz))

    results = _run_checks(checks)
    write_json(
        out / "approx_report.json",
        {
            "checks": [{"label": r.label, "ok": r.ok, "detail": r.detail} for r in results],
            "approximant": approx_rows,
        },
    )
    print(f"wrote {out / 'approx_report.json'}")
    if not all(r.ok for r in results):
        raise CheckFailure("network construction suite failed")
    return 0


def _plot_experiment(out: Path, target, endpoints, losses, lip_floors, lip_values):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fresh = sample_target(target, endpoints.shape[0], seed=987)
    fig, ax = plt.subplots(figsize=(5, 5))
    if target.dim >= 2:
        ax.scatter(fresh[:, 0], fresh[:, 1], s=6, alpha=0.4, label="target")
        ax.scatter(endpoints[:, 0], endpoints[:, 1], s=6, alpha=0.4, label="generated")
    else:
        ax.hist(fresh[:, 0], bins=60, alpha=0.5, density=True, label="target")
        ax.hist(endpoints[:, 0], bins=60, alpha=0.5, density=True, label="generated")
    ax.legend()
    ax.set_title("generated vs target")
    fig.savefig(out / "scatter.png", dpi=110)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(losses)
    ax.set_xlabel("step")
    ax.set_ylabel("empirical risk")
    ax.set_yscale("log")
    fig.savefig(out / "loss_curve.png", dpi=110)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(1.0 / np.asarray(lip_floors), lip_values, marker="o")
    ax.set_xlabel("1 / t_floor")
    ax.set_ylabel("time Lipschitz estimate")
    fig.savefig(out / "lipschitz_t.png", dpi=110)
    plt.close(fig)


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    out = artifact_root(args.out)
    started = time.time()
    write_json(out / "config_echo.json", cfg)

    target = GaussianMixtureTarget.from_config(cfg["target"])
    grid = TimeGrid.make_uniform(cfg["grid"]["K"], cfg["grid"]["t_floor"])
    tau = 1.0 - cfg["grid"]["t_floor"]

    triples = sample_interpolant(target, cfg["train"]["n"], tau, cfg["train"]["seed"])
    model = MlpVelocityModel(target.dim, tuple(cfg["model"]["widths"]), cfg["model"]["seed"])
    opt = OptimizerConfig(
        step_size=cfg["train"]["step_size"],
        iters=cfg["train"]["iters"],
        momentum=cfg["train"]["momentum"],
    )
    result = train_erm(model, triples, opt)
    save_checkpoint(model, str(out / "checkpoint.json"))
    write_csv(
        out / "loss_trace.csv",
        ["step", "loss"],
        [(i, f"{v:.12g}") for i, v in enumerate(result.losses)],
    )

    n_eval = cfg["eval"]["n"]
    x0 = rng(cfg["eval"]["seed"]).standard_normal((n_eval, target.dim))
    endpoints = euler_integrate(model_field(model), grid, x0)
    write_csv(
        out / "endpoints.csv",
        [f"x{i}" for i in range(target.dim)],
        [[f"{v:.12g}" for v in row] for row in endpoints],
    )

    report = decompose_errors(target, model_field(model), grid, n_eval, cfg["eval"]["seed"])
    with open(out / "error_report.json", "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")

    payload, table = _regularity_payload(target, cfg)
    write_json(out / "regularity_report.json", payload)
    write_csv(
        out / "sandwich_table.csv",
        ["t", "bound_lo", "eig_min", "eig_max", "bound_hi"],
        [
            [f"{r['t']:.6g}", f"{r['bound_lo']:.12g}", f"{r['eig_min']:.12g}",
             f"{r['eig_max']:.12g}", f"{r['bound_hi']:.12g}"]
            for r in table
        ],
    )

    floors = sorted(float(k) for k in payload["lipschitz_t"])
    _plot_experiment(
        out,
        target,
        endpoints,
        result.losses,
        floors,
        [payload["lipschitz_t"][str(f)] for f in floors],
    )
    print(f"experiment complete in {time.time() - started:.1f}s -> {out}")
    print(report.to_json())
    return 0


REQUIRED_ARTIFACTS = [
    "config_echo.json",
    "checkpoint.json",
    "loss_trace.csv",
    "endpoints.csv",
    "error_report.json",
    "regularity_report.json",
]


def cmd_report(args) -> int:
    out = Path(args.artifact_dir)
    missing = [name for name in REQUIRED_ARTIFACTS if not (out / name).exists()]
    if missing:
        print(f"incomplete run: missing {', '.join(missing)}")
        raise ConfigError(f"artifact directory {out} is incomplete")
    with open(out / "error_report.json") as fh:
        err = json.load(fh)
    with open(out / "regularity_report.json") as fh:
        reg = json.load(fh)
    with open(out / "loss_trace.csv") as fh:
        rows = list(csv.DictReader(fh))
    first_loss = float(rows[0]["loss"])
    last_loss = float(rows[-1]["loss"])

    lines = ["run summary", "==========="]
    lines.append(
        f"errors: discretization={err['discretization']:.4f} "
        f"velocity={err['velocity_estimation']:.4f} "
        f"early_stopping={err['early_stopping']:.4f} total={err['total']:.4f}"
    )
    lines.append(
        f"grid: K={err['K']} t_floor={err['t_floor']:.5f} n={err['n']} seed={err['seed']}"
    )
    checks = [
        ("training_improved", last_loss <= first_loss,
         f"risk {first_loss:.4f} -> {last_loss:.4f}"),
        ("covariance_envelope", bool(reg["sandwich"]["ok"]),
         f"worst slack {reg['sandwich']['worst_slack']:.2e}"),
        ("time_lipschitz_rate", reg["lipschitz_t_slope"] <= 2.3,
         f"slope {reg['lipschitz_t_slope']:.3f}"),
        ("tail_decay", bool(reg["tail"]["proxy_decay_ok"]),
         "truncation proxy ratios " + str(reg["tail"]["proxy_decay_ratios"])),
        ("total_error_finite", bool(np.isfinite(err["total"])),
         f"total {err['total']:.4f}"),
    ]
    n_pass = sum(1 for _, ok, _ in checks if ok)
    for label, ok, detail in checks:
        lines.append(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    lines.append(f"{n_pass}/{len(checks)} checks passed")
    text = "\n".join(lines)
    print(text)
    with open(out / "summary.txt", "w") as fh:
        fh.write(text + "\n")
    if n_pass != len(checks):
        raise CheckFailure("summary contains failing checks")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowlab",
        description="numerical laboratory for linear-interpolation normalizing flows",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", default=None, help="artifact directory")
        return p

    add("verify", cmd_verify, "run the oracle identity suites")
    add("train", cmd_train, "fit the velocity model by flow matching")
    p_sample = add("sample", cmd_sample, "integrate the field and export samples")
    p_sample.add_argument("--checkpoint", default=None, help="model checkpoint JSON")
    p_sample.add_argument("--trajectory", action="store_true", help="export full trajectory")
    p_eval = add("evaluate", cmd_evaluate, "three-term error decomposition")
    p_eval.add_argument("--checkpoint", default=None, help="model checkpoint JSON")
    add("regularity", cmd_regularity, "bound and rate verification report")
    add("approx", cmd_approx, "explicit network construction suite")
    add("experiment", cmd_experiment, "full pipeline with artifacts and plots")
    p_report = sub.add_parser("report", help="summarize an artifact directory")
    p_report.set_defaults(fn=cmd_report)
    p_report.add_argument("artifact_dir", help="directory produced by `experiment`")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except CheckFailure as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
