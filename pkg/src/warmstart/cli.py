"""Batch experiment driver.

Subcommands map one-to-one onto the library operations and write
`<outdir>/<name>.csv` plus `<name>.meta.json` (config echo, seed, duration).
Exit codes: 0 success, 2 validation/config error, 3 numeric failure.

Config files are flat INI text. Sections and keys are documented in the
README; every key has a default, so each subcommand also runs bare. One
master seed (--seed) feeds a splitmix-style expansion; every sub-experiment
derives its own stream, so runs are reproducible at any thread count.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from .circuits import Ansatz, Rotation, build_hea, build_hva, parse_circuit
from .errors import NumericFailure, ValidationError
from .fixtures import double_well_context, grid_scan_minimum
from .landscape import (
    HypercubeRegion,
    cut_1d,
    default_r_grid,
    estimate_variance,
    fit_power_law,
    grid_2d,
    gradient_along_path,
    pca_plane,
    variance_sweep_r,
    variance_vs_dt,
)
from .loss import (
    LossContext,
    StabilizerDataset,
    dataset_orthogonality_defect,
    gradient,
    loss,
    mu_min,
    qml_mixed_form_loss,
    sample_stabilizer_dataset,
)
from .models import xx_chain, xz_chain
from .optimize import (
    AdaptiveSchedule,
    OptimizerOptions,
    adiabatic_track,
    beta_a,
    compress_run,
    detect_minima_jump,
    minimize,
)
from .pauli import PauliString, PauliSum, parse_hamiltonian
from .seeding import derive_seed
from .states import StateVector, basis_state, load_statevector_csv
from .tables import ABSENT, table_comment, write_meta, write_table

OUTDIR_ENV = "WARMSTART_OUTDIR"

SUBCOMMANDS = (
    "variance-sweep",
    "variance-vs-dt",
    "bounds",
    "adiabatic-track",
    "minima-cut",
    "landscape-2d",
    "grad-path",
    "compress",
    "ite-suite",
    "unitary-suite",
    "selftest",
)


class Config:
    """Typed access to a flat INI config with [section] key diagnostics."""

    def __init__(self, path: str | None):
        self.path = path or "(defaults)"
        self.parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        if path is not None:
            target = Path(path)
            if not target.is_file():
                raise ValidationError(f"config file not found: {path}")
            try:
                self.parser.read_string(target.read_text(), source=path)
            except configparser.Error as exc:
                raise ValidationError(f"malformed config: {exc}") from exc

    def _raw(self, section: str, key: str) -> str | None:
        if self.parser.has_option(section, key):
            return self.parser.get(section, key)
        return None

    def get(self, section: str, key: str, default: str | None = None) -> str | None:
        raw = self._raw(section, key)
        return default if raw is None else raw.strip()

    def _convert(self, section: str, key: str, default, conv, typename):
        raw = self._raw(section, key)
        if raw is None:
            return default
        try:
            return conv(raw.strip())
        except ValueError as exc:
            raise ValidationError(
                f"config [{section}] {key}: expected {typename}, got {raw!r}"
            ) from exc

    def getint(self, section: str, key: str, default: int | None = None):
        return self._convert(section, key, default, int, "an integer")

    def getfloat(self, section: str, key: str, default: float | None = None):
        return self._convert(section, key, default, float, "a number")

    def getbool(self, section: str, key: str, default: bool = False) -> bool:
        raw = self._raw(section, key)
        if raw is None:
            return default
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValidationError(f"config [{section}] {key}: expected a boolean, got {raw!r}")

    def getfloats(self, section: str, key: str, default: list[float] | None = None):
        raw = self._raw(section, key)
        if raw is None:
            return default
        try:
            return [float(part) for part in raw.replace(";", ",").split(",") if part.strip()]
        except ValueError as exc:
            raise ValidationError(
                f"config [{section}] {key}: expected comma-separated numbers, got {raw!r}"
            ) from exc

    def getints(self, section: str, key: str, default: list[int] | None = None):
        floats = self.getfloats(section, key, None)
        if floats is None:
            return default
        ints = [int(v) for v in floats]
        if any(i != v for i, v in zip(ints, floats)):
            raise ValidationError(f"config [{section}] {key}: expected integers")
        return ints

    def echo(self) -> dict:
        return {s: dict(self.parser.items(s)) for s in self.parser.sections()}


def _build_hamiltonian(cfg: Config, n: int) -> PauliSum:
    model = cfg.get("system", "model")
    inline = cfg.get("system", "hamiltonian")
    fname = cfg.get("system", "hamiltonian_file")
    provided = [k for k, v in (("model", model), ("hamiltonian", inline), ("hamiltonian_file", fname)) if v]
    if len(provided) > 1:
        raise ValidationError(f"config [system]: give only one of {provided}")
    if inline:
        h = parse_hamiltonian(inline.replace(";", "\n"))
    elif fname:
        target = Path(fname)
        if not target.is_file():
            raise ValidationError(f"config [system] hamiltonian_file: not found: {fname}")
        h = parse_hamiltonian(target.read_text())
    else:
        coupling = cfg.getfloat("system", "coupling", 1.0)
        transverse = cfg.getfloat("system", "transverse", -0.95)
        family = model or "xz_chain"
        if family == "xz_chain":
            h = xz_chain(n, coupling, transverse)
        elif family == "xx_chain":
            h = xx_chain(n, coupling, transverse)
        else:
            raise ValidationError(
                f"config [system] model: unknown model {family!r} (xz_chain, xx_chain)"
            )
    if h.n != n:
        raise ValidationError(
            f"config [system]: hamiltonian acts on {h.n} qubits but n = {n}"
        )
    return h


def _build_ansatz(cfg: Config, h: PauliSum, n: int, seed: int) -> Ansatz:
    family = cfg.get("ansatz", "family", "hea")
    layers_raw = cfg.get("ansatz", "layers", "2")
    layers = n if layers_raw == "n" else int(layers_raw)
    if layers < 1:
        raise ValidationError("config [ansatz] layers: need >= 1")
    if family == "hea":
        shuffle = cfg.getbool("ansatz", "shuffle_axes", False)
        return build_hea(n, layers, seed=derive_seed(seed, "hea"), shuffle_axes=shuffle)
    if family == "hva":
        return build_hva(h, layers)
    if family == "file":
        fname = cfg.get("ansatz", "circuit_file")
        if not fname or not Path(fname).is_file():
            raise ValidationError("config [ansatz] circuit_file: missing or not found")
        return parse_circuit(Path(fname).read_text())
    raise ValidationError(f"config [ansatz] family: unknown family {family!r}")


def _build_psi0(cfg: Config, n: int) -> StateVector:
    mode = cfg.get("system", "initial_state", "zero")
    if mode == "zero":
        return basis_state(n)
    target = Path(mode)
    if target.is_file():
        state = load_statevector_csv(target)
        if state.n != n:
            raise ValidationError(
                f"config [system] initial_state: file has {state.n} qubits, expected {n}"
            )
        return state
    raise ValidationError(
        f"config [system] initial_state: expected 'zero' or a statevector CSV path, got {mode!r}"
    )


def _build_theta_star(cfg: Config, ansatz: Ansatz, seed: int) -> np.ndarray:
    mode = cfg.get("loss", "theta_star", "zeros")
    if mode == "zeros":
        return np.zeros(ansatz.n_params)
    if mode == "random":
        rng = np.random.default_rng(derive_seed(seed, "theta_star"))
        return rng.uniform(-np.pi, np.pi, size=ansatz.n_params)
    raise ValidationError(
        f"config [loss] theta_star: expected 'zeros' or 'random', got {mode!r}"
    )


def _build_context(cfg: Config, seed: int, n: int | None = None) -> LossContext:
    n = n if n is not None else cfg.getint("system", "n", 4)
    if n < 1:
        raise ValidationError("config [system] n: need >= 1")
    h = _build_hamiltonian(cfg, n)
    ansatz = _build_ansatz(cfg, h, n, seed)
    psi0 = _build_psi0(cfg, n)
    kind = cfg.get("loss", "kind", "real_time")
    dt = cfg.getfloat("loss", "dt", 0.0)
    dataset = None
    if kind == "qml":
        size = cfg.getint("loss", "dataset_size", 4)
        dataset = sample_stabilizer_dataset(n, size, derive_seed(seed, "dataset"))
    theta_star = _build_theta_star(cfg, ansatz, seed)
    return LossContext(ansatz, theta_star, h, dt, psi0, kind=kind, dataset=dataset)


def _optimizer_options(cfg: Config) -> OptimizerOptions:
    return OptimizerOptions(
        method=cfg.get("optimize", "method", "quasi_newton"),
        grad_tol=cfg.getfloat("optimize", "grad_tol", 1e-8),
        max_iters=cfg.getint("optimize", "max_iters", 500),
    )


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _report_dict(report: bounds_mod.BoundReport) -> dict:
    return {
        "value": report.value,
        "valid": report.valid,
        "unbounded": report.unbounded,
        "conditions": [
            {"name": c.name, "satisfied": c.satisfied, "margin": c.margin}
            for c in report.conditions
        ],
    }


def _finite_or_absent(value: float):
    return float(value) if math.isfinite(value) else None


class Runner:
    """Holds per-invocation state shared by the subcommand handlers."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.cfg = Config(args.config)
        self.seed = args.seed
        self.outdir = Path(args.outdir)
        self.threads = args.threads
        self.long_run = args.long_run
        self.started = time.monotonic()

    def system_sizes(self, default_n: int = 4) -> list[int]:
        sizes = self.cfg.getints("system", "n_list")
        if sizes is None:
            sizes = [self.cfg.getint("system", "n", default_n)]
        if self.long_run:
            long_n = self.cfg.getint("system", "long_run_n", 10)
            if long_n not in sizes:
                sizes = sizes + [long_n]
        return sizes

    def single_n(self, default_n: int = 4) -> int:
        if self.long_run:
            return self.cfg.getint("system", "long_run_n", 10)
        return self.cfg.getint("system", "n", default_n)

    def finish(self, name: str, columns, rows, meta: dict) -> None:
        comment = table_comment(self.seed, self.cfg.path)
        write_table(self.outdir / f"{name}.csv", columns, rows, comment)
        payload = {
            "subcommand": name,
            "seed": self.seed,
            "config_path": self.cfg.path,
            "config": self.cfg.echo(),
            "duration_seconds": round(time.monotonic() - self.started, 3),
        }
        payload.update(_json_safe(meta))
        write_meta(self.outdir / f"{name}.meta.json", payload)


def _r_grid(cfg: Config) -> np.ndarray:
    points = cfg.getint("sampling", "r_points", 40)
    r_min = cfg.getfloat("sampling", "r_min", 1e-3)
    r_max = cfg.getfloat("sampling", "r_max", float(np.pi))
    if points < 1 or r_min <= 0 or r_max < r_min:
        raise ValidationError("config [sampling]: need r_points >= 1, 0 < r_min <= r_max")
    if points == 1:
        return np.array([r_max])
    return np.geomspace(r_min, r_max, points)


def _cmd_variance_sweep(run: Runner) -> None:
    cfg = run.cfg
    n_samples = cfg.getint("sampling", "n_samples", 20_000)
    grid = _r_grid(cfg)
    rows = []
    peaks = []
    for n in run.system_sizes():
        ctx = _build_context(cfg, derive_seed(run.seed, "system", n), n=n)
        sweep = variance_sweep_r(ctx, grid, n_samples, derive_seed(run.seed, "sweep", n))
        m = ctx.n_params
        for i in range(grid.size):
            rows.append(
                (n, m, sweep.r[i], sweep.mean_loss[i], sweep.variance[i], sweep.var_stderr[i])
            )
        at_peak = int(np.argmax(sweep.variance))
        peaks.append(
            {
                "n": n,
                "M": m,
                "r_max": sweep.r_max,
                "variance_max": sweep.variance_max,
                "mean_loss_at_peak": float(sweep.mean_loss[at_peak]),
                "variance_at_full_r": float(sweep.variance[-1]),
            }
        )
    meta: dict = {"peaks": peaks, "n_samples": n_samples}
    fit_rows = []
    if len(peaks) >= 3:
        ms = np.array([p["M"] for p in peaks], dtype=float)
        for quantity, values in (
            ("r_max_vs_M", np.array([p["r_max"] for p in peaks])),
            ("variance_max_vs_M", np.array([p["variance_max"] for p in peaks])),
        ):
            exponent, prefactor, r2 = fit_power_law(ms, values)
            meta[quantity] = {"exponent": exponent, "prefactor": prefactor, "r_squared": r2}
            fit_rows.append((quantity, exponent, prefactor, r2))
        ns = np.array([p["n"] for p in peaks], dtype=float)
        full_r = np.array([p["variance_at_full_r"] for p in peaks])
        if np.all(full_r > 0):
            coeffs = np.polyfit(ns, np.log(full_r), 1)
            meta["log_variance_at_pi_vs_n_slope"] = float(coeffs[0])
            fit_rows.append(("log_variance_at_pi_vs_n", float(coeffs[0]), float(np.exp(coeffs[1])), -1.0))
    if fit_rows:
        write_table(
            run.outdir / "variance-sweep-fits.csv",
            ("quantity", "exponent", "prefactor", "r_squared"),
            fit_rows,
            table_comment(run.seed, cfg.path),
        )
    run.finish(
        "variance-sweep",
        ("n", "M", "r", "mean_loss", "variance", "var_stderr"),
        rows,
        meta,
    )


def _dt_grid(cfg: Config) -> np.ndarray:
    explicit = cfg.getfloats("sampling", "dt_grid")
    if explicit is not None:
        return np.array(explicit, dtype=np.float64)
    points = cfg.getint("sampling", "dt_points", 24)
    dt_min = cfg.getfloat("sampling", "dt_min", 1e-2)
    dt_max = cfg.getfloat("sampling", "dt_max", 4.0)
    scale = cfg.get("sampling", "dt_scale", "log")
    if points < 2 or dt_min <= 0 or dt_max < dt_min:
        raise ValidationError("config [sampling]: need dt_points >= 2, 0 < dt_min <= dt_max")
    if scale == "log":
        return np.geomspace(dt_min, dt_max, points)
    if scale == "linear":
        return np.linspace(dt_min, dt_max, points)
    raise ValidationError(f"config [sampling] dt_scale: expected log or linear, got {scale!r}")


def _cmd_variance_vs_dt(run: Runner) -> None:
    cfg = run.cfg
    n = run.single_n()
    n_samples = cfg.getint("sampling", "n_samples", 20_000)
    r_fixed = cfg.getfloat("sampling", "r_fixed", 0.1)
    grid = _dt_grid(cfg)
    lambdas = cfg.getfloats("sampling", "lambda_list")
    ctx = _build_context(cfg, derive_seed(run.seed, "system", n), n=n)
    base_lambda = ctx.hamiltonian.spectral_bound("exact")
    if base_lambda == 0:
        raise ValidationError("hamiltonian is zero; variance-vs-dt needs a nonzero spectrum")
    targets = lambdas if lambdas else [base_lambda]
    rows = []
    peaks = []
    for lam in targets:
        scaled = ctx.replace(hamiltonian=ctx.hamiltonian.scaled(lam / base_lambda))
        sweep = variance_vs_dt(
            scaled, grid, r_fixed, n_samples, derive_seed(run.seed, "dtsweep", repr(lam))
        )
        for i in range(grid.size):
            rows.append(
                (
                    n,
                    ctx.n_params,
                    lam,
                    sweep.dt[i],
                    sweep.mean_loss[i],
                    sweep.variance[i],
                    sweep.var_stderr[i],
                )
            )
        peaks.append({"lambda_max": lam, "dt_peak": sweep.dt_peak, "variance_peak": sweep.variance_peak})
    meta: dict = {"peaks": peaks, "r_fixed": r_fixed, "n_samples": n_samples}
    if len(peaks) >= 3:
        exponent, prefactor, r2 = fit_power_law(
            np.array([p["lambda_max"] for p in peaks]),
            np.array([p["dt_peak"] for p in peaks]),
        )
        meta["dt_peak_vs_lambda"] = {
            "exponent": exponent,
            "prefactor": prefactor,
            "r_squared": r2,
        }
        write_table(
            run.outdir / "variance-vs-dt-fits.csv",
            ("quantity", "exponent", "prefactor", "r_squared"),
            [("dt_peak_vs_lambda", exponent, prefactor, r2)],
            table_comment(run.seed, cfg.path),
        )
    run.finish(
        "variance-vs-dt",
        ("n", "M", "lambda_max", "dt", "mean_loss", "variance", "var_stderr"),
        rows,
        meta,
    )


def _cmd_bounds(run: Runner) -> None:
    cfg = run.cfg
    kind = cfg.get("bounds", "kind", "real_time")
    r = cfg.getfloat("bounds", "r", 0.1)
    r0 = cfg.getfloat("bounds", "r0", 0.5)
    m = cfg.getint("bounds", "m", 20)
    lam = cfg.getfloat("bounds", "lambda_max", 1.0)
    dt = cfg.getfloat("bounds", "dt", 0.0)
    mu = cfg.getfloat("bounds", "mu_min", 0.1)
    eps = cfg.getfloat("bounds", "epsilon", 1e-3)
    beta = cfg.getfloat("bounds", "beta", 0.5)
    eta0 = cfg.getfloat("bounds", "eta0", 0.5)
    if kind == "real_time":
        reports = {
            "variance": bounds_mod.real_time_variance_bound(r, r0, m, lam, dt),
            "convexity": bounds_mod.convexity_radius(mu, eps, m, lam, dt),
            "tracked_shift": bounds_mod.adiabatic_shift_bound(m, lam, dt, beta),
        }
        if beta > 0:
            grad_lim, convex_lim = bounds_mod.adiabatic_step_limits(m, lam, beta, eta0, mu, eps)
            ok = bounds_mod.Condition("velocity_scale_positive", True, beta)
            reports["step_limit_gradient"] = bounds_mod.BoundReport(grad_lim, True, (ok,))
            reports["step_limit_convexity"] = bounds_mod.BoundReport(convex_lim, True, (ok,))
    elif kind == "imaginary_time":
        reports = bounds_mod.imaginary_time_bounds(r, r0, m, lam, dt, mu, eps, beta, eta0)
    elif kind == "fidelity":
        fid = cfg.getfloat("bounds", "target_fidelity", 0.75)
        reports = {"variance": bounds_mod.fidelity_variance_bound(r, r0, m, fid)}
    else:
        raise ValidationError(
            f"config [bounds] kind: expected real_time, imaginary_time or fidelity, got {kind!r}"
        )
    rows = []
    for name, report in reports.items():
        base = (name, _finite_or_absent(report.value), report.valid, report.unbounded)
        if report.conditions:
            for c in report.conditions:
                rows.append(base + (c.name, c.satisfied, _finite_or_absent(c.margin)))
        else:
            rows.append(base + (ABSENT, ABSENT, ABSENT))
    for name, report in reports.items():
        value = "unbounded" if report.unbounded else f"{report.value:.9g}"
        print(f"{name:>22}  value={value:<14} valid={report.valid}")
        for c in report.conditions:
            margin = "inf" if not math.isfinite(c.margin) else f"{c.margin:.3g}"
            print(f"{'':>22}  [{'ok' if c.satisfied else 'VIOLATED'}] {c.name} (margin {margin})")
    meta = {"kind": kind, "inputs": {"r": r, "r0": r0, "m": m, "lambda_max": lam, "dt": dt,
                                     "mu_min": mu, "epsilon": eps, "beta": beta, "eta0": eta0},
            "reports": {k: _report_dict(v) for k, v in reports.items()}}
    run.finish(
        "bounds",
        ("bound", "value", "valid", "unbounded", "condition", "satisfied", "margin"),
        rows,
        meta,
    )


def _cmd_adiabatic_track(run: Runner) -> None:
    cfg = run.cfg
    dt_max = cfg.getfloat("track", "dt_max", 0.2)
    n_steps = cfg.getint("track", "n_steps", 50)
    jump_guard = cfg.getfloat("track", "jump_guard", 0.3)
    n_tracks = cfg.getint("track", "n_tracks", 1)
    opts = _optimizer_options(cfg)
    sizes = run.system_sizes()
    max_m = 0
    collected = []
    for n in sizes:
        for t in range(n_tracks):
            ctx = _build_context(cfg, derive_seed(run.seed, "track", n, t), n=n)
            track = adiabatic_track(
                ctx.ansatz,
                ctx.hamiltonian,
                ctx.theta_star,
                ctx.psi0,
                dt_max,
                n_steps,
                opts,
                jump_guard,
                kind=ctx.kind if ctx.kind in ("real_time", "imaginary_time") else "real_time",
            )
            betas = []
            for i in range(track.n_samples):
                value = beta_a(ctx, track, i) if track.n_samples >= 2 else None
                betas.append(value)
            collected.append((n, t, ctx, track, betas))
            max_m = max(max_m, ctx.n_params)
    columns = (
        "n",
        "track",
        "dt",
        "grad_norm",
        "loss",
        "dist_inf",
        "dist_2",
        "beta_a",
        "continuity_ok",
    ) + tuple(f"theta_{i}" for i in range(max_m))
    rows = []
    meta_tracks = []
    for n, t, ctx, track, betas in collected:
        for i in range(track.n_samples):
            theta_cells = list(track.theta[i]) + [None] * (max_m - ctx.n_params)
            rows.append(
                (
                    n,
                    t,
                    track.dt[i],
                    track.grad_norm[i],
                    track.loss[i],
                    track.dist_inf[i],
                    track.dist_2[i],
                    betas[i],
                    bool(track.continuity_ok[i]),
                )
                + tuple(theta_cells)
            )
        meta_tracks.append(
            {
                "n": n,
                "track": t,
                "halted": track.halted,
                "halt_reason": track.halt_reason,
                "final_dist_inf": float(track.dist_inf[-1]),
                "max_grad_norm": float(np.max(track.grad_norm)),
            }
        )
    run.finish("adiabatic-track", columns, rows, {"tracks": meta_tracks, "dt_max": dt_max})


def _cmd_minima_cut(run: Runner) -> None:
    cfg = run.cfg
    dt_list = cfg.getfloats("jump", "dt_list", [0.04, 0.08, 0.12, 0.16, 0.2])
    n_restarts = cfg.getint("jump", "n_restarts", 8)
    threshold = cfg.getfloat("jump", "jump_threshold", 0.5)
    margin = cfg.getfloat("jump", "loss_margin", 1e-3)
    grid_points = cfg.getint("cut", "grid_points", 201)
    cut_margin = cfg.getfloat("cut", "margin", 0.25)
    opts = _optimizer_options(cfg)
    n = run.single_n()
    ctx = _build_context(cfg, derive_seed(run.seed, "system", n), n=n)
    scans = []
    chosen = None
    for i, dt in enumerate(dt_list):
        report = detect_minima_jump(
            ctx,
            ctx.theta_star,
            dt,
            n_restarts,
            derive_seed(run.seed, "jump", i),
            threshold,
            margin,
            opts,
            n_workers=run.threads,
        )
        scans.append(report)
        if report.jumped:
            chosen = report
    if chosen is None:
        chosen = scans[-1]
    target = min(
        (rec for rec in chosen.minima if rec.origin != "adiabatic"),
        key=lambda rec: rec.loss,
        default=chosen.minima[0],
    )
    cut = cut_1d(ctx, np.array(dt_list), ctx.theta_star, target.theta, grid_points, cut_margin)
    rows = list(zip(cut.dt, cut.s, cut.coord_inf, cut.loss))
    meta = {
        "endpoint_a": ctx.theta_star,
        "endpoint_b": target.theta,
        "direction_norm_inf": cut.direction_norm_inf,
        "scans": [
            {
                "dt": rep.dt,
                "jumped": rep.jumped,
                "adiabatic_loss": rep.adiabatic_loss,
                "best_loss": rep.best_loss,
                "best_distance_inf": rep.best_distance_inf,
            }
            for rep in scans
        ],
    }
    run.finish("minima-cut", ("dt", "s", "coord_inf", "loss"), rows, meta)


def _descent_story(run: Runner) -> tuple[LossContext, np.ndarray, dict]:
    """Shared trajectory source for landscape-2d and grad-path.

    Runs the jump detector once (derived seed fixed across both subcommands)
    and returns the winning descent trajectory: the jumped minimum's when a
    jump is found, otherwise the best minimum's.
    """
    cfg = run.cfg
    n = run.single_n()
    dt = cfg.getfloat("loss", "dt", 0.04)
    n_restarts = cfg.getint("jump", "n_restarts", 8)
    threshold = cfg.getfloat("jump", "jump_threshold", 0.5)
    margin = cfg.getfloat("jump", "loss_margin", 1e-3)
    opts = _optimizer_options(cfg)
    ctx = _build_context(cfg, derive_seed(run.seed, "system", n), n=n)
    ctx = ctx.replace(dt=dt)
    report = detect_minima_jump(
        ctx,
        ctx.theta_star,
        dt,
        n_restarts,
        derive_seed(run.seed, "descent"),
        threshold,
        margin,
        opts,
        n_workers=run.threads,
    )
    jumpers = [
        rec
        for rec in report.minima
        if rec.distance_inf > threshold and rec.loss < report.adiabatic_loss - margin
    ]
    pick = min(jumpers, key=lambda rec: rec.loss) if jumpers else min(
        report.minima, key=lambda rec: rec.loss
    )
    info = {
        "dt": dt,
        "jumped": report.jumped,
        "origin": pick.origin,
        "final_loss": pick.loss,
        "distance_inf": pick.distance_inf,
        "adiabatic_loss": report.adiabatic_loss,
    }
    return ctx, pick.trajectory, info


def _cmd_landscape_2d(run: Runner) -> None:
    cfg = run.cfg
    resolution = cfg.getint("grid2d", "resolution", 41)
    pad = cfg.getfloat("grid2d", "pad", 0.5)
    ctx, trajectory, info = _descent_story(run)
    origin = trajectory[-1]
    try:
        plane = pca_plane(trajectory)
    except ValidationError:
        axes = np.zeros((2, ctx.n_params))
        axes[0, 0] = 1.0
        axes[1, min(1, ctx.n_params - 1)] = 1.0
        plane = None
        proj = (trajectory - origin) @ axes.T
    else:
        axes = plane.axes
        proj = (trajectory - origin) @ axes.T
    u_lo, u_hi = float(np.min(proj[:, 0])) - pad, float(np.max(proj[:, 0])) + pad
    v_lo, v_hi = float(np.min(proj[:, 1])) - pad, float(np.max(proj[:, 1])) + pad
    grid = grid_2d(ctx, origin, axes, ((u_lo, u_hi), (v_lo, v_hi)), resolution)
    rows = list(zip(grid.u, grid.v, grid.loss))
    meta = {
        "story": info,
        "origin": origin,
        "axes": axes,
        "trajectory_u": proj[:, 0],
        "trajectory_v": proj[:, 1],
        "explained_fractions": plane.explained_fractions if plane else [1.0, 0.0],
        "degenerate_plane": plane.degenerate if plane else True,
        "extents": [[u_lo, u_hi], [v_lo, v_hi]],
    }
    run.finish("landscape-2d", ("u", "v", "loss"), rows, meta)


def _cmd_grad_path(run: Runner) -> None:
    cfg = run.cfg
    n_random = cfg.getint("gradpath", "n_random", 200)
    ctx, trajectory, info = _descent_story(run)
    profile = gradient_along_path(ctx, trajectory)
    grad_norms = np.array(
        [float(np.linalg.norm(gradient(ctx, theta))) for theta in trajectory]
    )
    rng = np.random.default_rng(derive_seed(run.seed, "gradpath", "baseline"))
    random_points = rng.uniform(-np.pi, np.pi, size=(n_random, ctx.n_params))
    random_norms = np.array(
        [float(np.linalg.norm(gradient(ctx, theta))) for theta in random_points]
    )
    rows = list(
        zip(profile.arclength, profile.loss, profile.directional_gradient, grad_norms)
    )
    path_active = grad_norms[:-1] if grad_norms.size > 1 else grad_norms
    meta = {
        "story": info,
        "path_gradient_mean": float(np.mean(path_active)),
        "path_gradient_median": float(np.median(path_active)),
        "path_gradient_max": float(np.max(grad_norms)),
        "random_gradient_median": float(np.median(random_norms)),
        "random_gradient_mean": float(np.mean(random_norms)),
        "n_random": n_random,
        "ratio_median_over_random_median": float(
            np.median(path_active) / max(np.median(random_norms), 1e-300)
        ),
    }
    run.finish(
        "grad-path",
        ("arclength", "loss", "directional_gradient", "grad_norm_2"),
        rows,
        meta,
    )


def _cmd_compress(run: Runner) -> None:
    cfg = run.cfg
    n = run.single_n()
    ctx = _build_context(cfg, derive_seed(run.seed, "system", n), n=n)
    opts = _optimizer_options(cfg)
    mode = cfg.get("compress", "mode", "fixed")
    jitter = cfg.getfloat("compress", "jitter_r", 0.0)
    if mode == "fixed":
        schedule = cfg.getfloats("compress", "dt_list")
        if schedule is None:
            dt = cfg.getfloat("compress", "dt", 0.05)
            steps = cfg.getint("compress", "n_steps", 10)
            schedule = [dt] * steps
    elif mode == "adaptive":
        schedule = AdaptiveSchedule(
            total_time=cfg.getfloat("compress", "total_time", 0.5),
            dt_init=cfg.getfloat("compress", "dt_init", 0.05),
            loss_threshold=cfg.getfloat("compress", "loss_threshold", 1e-6),
            dt_min=cfg.getfloat("compress", "dt_min", 1e-6),
            dt_cap=cfg.getfloat("compress", "dt_cap"),
            max_steps=cfg.getint("compress", "max_steps", 1000),
        )
    else:
        raise ValidationError(f"config [compress] mode: expected fixed or adaptive, got {mode!r}")
    log = compress_run(
        ctx.ansatz,
        ctx.hamiltonian,
        ctx.psi0,
        schedule,
        opts,
        jitter_r=jitter,
        seed=run.seed,
        kind=ctx.kind if ctx.kind in ("real_time", "imaginary_time") else "real_time",
    )
    columns = (
        "k",
        "dt",
        "final_loss",
        "cumulative_time",
        "cumulative_fidelity",
        "iters_used",
        "converged",
    ) + tuple(f"theta_{i}" for i in range(ctx.n_params))
    rows = [
        (
            s.k,
            s.dt,
            s.final_loss,
            s.cumulative_time,
            s.cumulative_fidelity,
            s.iters_used,
            s.converged,
        )
        + tuple(s.theta)
        for s in log.steps
    ]
    run.finish(
        "compress",
        columns,
        rows,
        {
            "completed": log.completed,
            "reason": log.reason,
            "cumulative_time": log.cumulative_time,
            "final_fidelity": log.final_fidelity,
        },
    )


def _cmd_ite_suite(run: Runner) -> None:
    cfg = run.cfg
    n = run.single_n()
    ctx = _build_context(cfg, derive_seed(run.seed, "system", n), n=n)
    dtau = cfg.getfloat("loss", "dt", 0.05)
    ctx = ctx.replace(kind="imaginary_time", dt=dtau, dataset=None)
    n_samples = cfg.getint("sampling", "n_samples", 20_000)
    grid = _r_grid(cfg)
    r0 = cfg.getfloat("bounds", "r0", 0.5)
    eps = cfg.getfloat("bounds", "epsilon", 1e-3)
    eta0 = cfg.getfloat("bounds", "eta0", 0.5)
    beta = cfg.getfloat("bounds", "beta", 0.0)
    lam = ctx.hamiltonian.spectral_bound("exact" if n <= 12 else "triangle")
    mu = mu_min(ctx.ansatz, ctx.theta_star, ctx.psi0) if ctx.n_params <= 512 else 0.0
    rows = []
    for i, r in enumerate(grid):
        est = estimate_variance(
            ctx,
            HypercubeRegion(ctx.theta_star, float(r)),
            n_samples,
            derive_seed(run.seed, "ite", i),
        )
        report = bounds_mod.imaginary_time_variance_bound(float(r), r0, ctx.n_params, lam, dtau)
        rows.append(
            (
                n,
                ctx.n_params,
                r,
                est.mean,
                est.variance,
                est.std_error_of_variance,
                report.value,
                report.valid,
            )
        )
    reports = bounds_mod.imaginary_time_bounds(
        float(grid[0]), r0, ctx.n_params, lam, dtau, mu, eps, beta, eta0
    )
    meta = {
        "dtau": dtau,
        "lambda_max": lam,
        "mu_min": mu,
        "reports": {k: _report_dict(v) for k, v in reports.items()},
    }
    run.finish(
        "ite-suite",
        ("n", "M", "r", "mean_loss", "variance", "var_stderr", "bound_value", "bound_valid"),
        rows,
        meta,
    )


def _distinct_basis_dataset(n: int, n_states: int, seed: int) -> StabilizerDataset:
    """Pairwise-orthogonal dataset: distinct computational basis products."""
    dim = 1 << n
    if n_states > dim:
        raise ValidationError(f"cannot draw {n_states} distinct basis states on {n} qubits")
    rng = np.random.default_rng(seed)
    picks = rng.choice(dim, size=n_states, replace=False)
    labels = tuple(
        tuple("z-" if (b >> (n - 1 - q)) & 1 else "z+" for q in range(n)) for b in picks
    )
    return StabilizerDataset(n, labels)


def _cmd_unitary_suite(run: Runner) -> None:
    cfg = run.cfg
    n = cfg.getint("unitary", "n", 3)
    if n > 3:
        raise ValidationError("config [unitary] n: dense rewrite checks need n <= 3")
    n_theta = cfg.getint("unitary", "n_theta", 20)
    n_draws = cfg.getint("unitary", "n_draws", 1000)
    sizes = cfg.getints("unitary", "dataset_sizes", [1, 4])
    prob_sizes = cfg.getints("unitary", "prob_n_list", [2, 3, 4])
    ctx = _build_context(cfg, derive_seed(run.seed, "system", n), n=n)
    dt = cfg.getfloat("loss", "dt", 0.1)
    hst = ctx.replace(kind="unitary_hst", dt=dt, dataset=None)
    bell = ctx.replace(kind="unitary_bell", dt=dt, dataset=None)
    rng = np.random.default_rng(derive_seed(run.seed, "unitary", "theta"))
    rows = []
    max_pair_diff = 0.0
    for i in range(n_theta):
        theta = rng.uniform(-np.pi, np.pi, size=ctx.n_params)
        a = loss(hst, theta)
        b = loss(bell, theta)
        diff = abs(a - b)
        max_pair_diff = max(max_pair_diff, diff)
        rows.append(("hst_vs_bell", n, None, i, a, b, diff))
    max_qml_diff = 0.0
    for i, size in enumerate(sizes):
        dataset = _distinct_basis_dataset(n, size, derive_seed(run.seed, "qmlset", i))
        qml = ctx.replace(kind="qml", dt=dt, dataset=dataset)
        theta = rng.uniform(-np.pi, np.pi, size=ctx.n_params)
        a = loss(qml, theta)
        b = qml_mixed_form_loss(qml, theta)
        diff = abs(a - b)
        max_qml_diff = max(max_qml_diff, diff)
        rows.append(("qml_rewrite", n, size, i, a, b, diff))
    probability = {}
    for pn in prob_sizes:
        sigma = PauliString(cfg.get("unitary", "sigma_axis", "Y") * pn)
        for size in sizes:
            zeros = 0
            for j in range(n_draws):
                dataset = sample_stabilizer_dataset(
                    pn, size, derive_seed(run.seed, "draw", pn, size, j)
                )
                defect = dataset_orthogonality_defect(dataset, sigma)
                if defect == 0.0:
                    zeros += 1
            empirical = zeros / n_draws
            floor = 1.0 - size / 3.0**pn
            probability[f"n{pn}_k{size}"] = {
                "empirical": empirical,
                "lower_bound": floor,
                "satisfied": empirical >= floor,
            }
            rows.append(("orthogonality_prob", pn, size, 0, empirical, floor, None))
    meta = {
        "max_hst_bell_diff": max_pair_diff,
        "max_qml_rewrite_diff": max_qml_diff,
        "probability": probability,
        "dt": dt,
    }
    run.finish(
        "unitary-suite",
        ("check", "n", "n_states", "index", "value_a", "value_b", "difference"),
        rows,
        meta,
    )


def _cmd_selftest(run: Runner) -> None:
    checks: list[tuple[str, bool, str]] = []

    def record(name: str, ok: bool, detail: str) -> None:
        checks.append((name, ok, detail))

    r = 0.5
    identity_gap = abs(
        bounds_mod.cos4_moment(r)
        - bounds_mod.cos2_moment(r) ** 2
        - bounds_mod.cos2_variance(r)
    )
    record("moment_identity", identity_gap < 1e-12, f"gap={identity_gap:.3e}")

    well = double_well_context(0.3)
    theta = np.array([0.4, -0.9])
    shift = gradient(well, theta)
    h = 1e-6
    fd = np.zeros(2)
    for i in range(2):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        fd[i] = (loss(well, up) - loss(well, down)) / (2 * h)
    grad_gap = float(np.max(np.abs(shift - fd)))
    record("parameter_shift_vs_fd", grad_gap < 1e-8, f"gap={grad_gap:.3e}")

    opts = OptimizerOptions()
    jump = detect_minima_jump(well, np.zeros(2), 0.3, 4, seed=derive_seed(run.seed, "self"))
    oracle_theta, oracle_loss = grid_scan_minimum(0.3)
    agree = (not jump.jumped) and abs(jump.best_loss - oracle_loss) < 1e-6
    record("double_well_vs_grid_oracle", agree, f"best={jump.best_loss:.3e} oracle={oracle_loss:.3e}")

    single = LossContext(
        Ansatz(1, (Rotation(PauliString("X"), 0),)),
        np.zeros(1),
        PauliSum.from_terms([(1.0, "X")]),
        0.0,
        basis_state(1),
    )
    est = estimate_variance(single, HypercubeRegion(np.zeros(1), float(np.pi)), 40_000, derive_seed(run.seed, "sin2"))
    sin2_ok = abs(est.variance - 0.125) < 3 * est.std_error_of_variance + 1e-3
    record("sin2_variance_eighth", sin2_ok, f"var={est.variance:.5f}")

    res = minimize(single.replace(dt=0.2), np.array([0.3]), opts)
    record("single_qubit_minimize", res.loss < 1e-12, f"loss={res.loss:.3e}")

    rows = [(name, ok, detail) for name, ok, detail in checks]
    run.finish("selftest", ("check", "passed", "detail"), rows, {"all_passed": all(c[1] for c in checks)})
    if not all(c[1] for c in checks):
        failed = [c[0] for c in checks if not c[1]]
        raise NumericFailure(f"selftest failures: {', '.join(failed)}")


_HANDLERS = {
    "variance-sweep": _cmd_variance_sweep,
    "variance-vs-dt": _cmd_variance_vs_dt,
    "bounds": _cmd_bounds,
    "adiabatic-track": _cmd_adiabatic_track,
    "minima-cut": _cmd_minima_cut,
    "landscape-2d": _cmd_landscape_2d,
    "grad-path": _cmd_grad_path,
    "compress": _cmd_compress,
    "ite-suite": _cmd_ite_suite,
    "unitary-suite": _cmd_unitary_suite,
    "selftest": _cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warmstart",
        description="Warm-started variational compression experiments.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat INI config file")
        p.add_argument(
            "--outdir",
            default=os.environ.get(OUTDIR_ENV, "warmstart-out"),
            help=f"output directory (default from ${OUTDIR_ENV})",
        )
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--threads", type=int, default=None, help="worker cap")
        p.add_argument(
            "--long-run",
            action="store_true",
            help="enable the larger reproduction sizes (n = 10)",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        runner = Runner(args)
        _HANDLERS[args.subcommand](runner)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
