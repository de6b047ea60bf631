"""Scripted verification studies for the solver.

Each study is a pure function returning a plain-dict report (deterministic
given its inputs and seed); ``run_experiment`` dispatches a parsed
ExperimentSpec, executes sweep points (optionally on a thread pool, merged
in deterministic order), and writes the delimited table, the JSON manifest
and a matplotlib figure.
"""

from __future__ import annotations

import json
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .fields import multi_mode_3d, random_solenoidal, taylor_green
from .solver import (
    PdeParams,
    SimConfig,
    SpectralVelocity,
    convective_divergence_coeffs,
    integrate,
    solve_regularized,
    stress_divergence_coeffs,
)
from .spectral import TorusGrid, embed_coeffs, restrict_coeffs

__all__ = [
    "ExperimentSpec",
    "ManufacturedTarget",
    "run_taylor_green",
    "run_manufactured",
    "run_gronwall",
    "run_refinement",
    "run_regularization_sweep",
    "run_kappa_sweep",
    "run_experiment",
]

EXPERIMENT_KINDS = (
    "taylor_green",
    "manufactured",
    "refinement",
    "kappa_sweep",
    "gronwall",
    "regularization_sweep",
)


@dataclass
class ExperimentSpec:
    """A named study plus its base discretization and sweep values."""

    kind: str
    config: SimConfig
    params: PdeParams
    options: dict = field(default_factory=dict)
    output_path: str = "."

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; "
                             f"choose from {EXPERIMENT_KINDS}")


# -- Taylor-Green anchor ---------------------------------------------------


def taylor_green_exact_rates(nu: float, kappa: float) -> dict:
    """Closed-form decay of the Taylor-Green state under the p = 2 dynamics.

    Both active modes carry |k|^2 = 2, the convective term is a pure
    gradient (annihilated by the Leray projection), and div D(v) = Lap v / 2,
    so the amplitude obeys (1 + 2 kappa) a' = -nu a.  The squared norms
    (and the Voigt energy) therefore decay at rate 2 nu / (1 + 2 kappa).
    """
    amp = nu / (1.0 + 2.0 * kappa)
    return {"amplitude_rate": amp, "energy_rate": 2.0 * amp}


def run_taylor_green(config: SimConfig, params: PdeParams,
                     amplitude: float = 1.0) -> dict:
    """Accuracy anchor against the closed-form decaying Taylor-Green state."""
    if config.grid.dim != 2:
        raise ValueError("the Taylor-Green anchor is two-dimensional")
    if params.p != 2:
        raise ValueError(f"the closed form holds only for p = 2, got p={params.p}")
    if params.forcing is not None:
        raise ValueError("the closed form is unforced")
    rates = taylor_green_exact_rates(params.nu, params.kappa)
    v0 = taylor_green(config.grid, amplitude)
    traj = integrate(config, params, v0)

    t_final = traj.times[-1]
    exact = taylor_green(config.grid, amplitude * np.exp(-rates["amplitude_rate"] * t_final))
    err_abs = np.sqrt((traj.final() - exact).l2_norm_sq())
    exact_norm = np.sqrt(exact.l2_norm_sq())
    err_rel = err_abs / exact_norm if exact_norm > 0 else 0.0

    led = traj.ledger
    energy = led.energy()
    if energy[0] > 0:
        fit = np.polyfit(led.t, np.log(energy), 1)
        fitted_rate = -float(fit[0])
    else:
        fitted_rate = 0.0
    return {
        "amplitude": amplitude,
        "t_end": t_final,
        "terminal_l2_error_abs": float(err_abs),
        "terminal_l2_error_rel": float(err_rel),
        "energy_rate_fitted": fitted_rate,
        "energy_rate_predicted": rates["energy_rate"],
        "amplitude_rate_predicted": rates["amplitude_rate"],
        "trajectory": traj,
    }


# -- manufactured solutions -------------------------------------------------


@dataclass
class ManufacturedTarget:
    """Separable exact solution ``v(x, t) = g(t) V(x)`` with known g, g'.

    ``profile`` must be divergence-free and band-limited on the simulation
    grid.  The default time factor keeps g > 0 so the power-law stress is
    analytic in time.
    """

    profile: SpectralVelocity
    g: object = None
    g_prime: object = None
    omega: float = 1.7

    def __post_init__(self):
        if self.g is None:
            w = self.omega
            self.g = lambda t: 1.0 + 0.4 * np.sin(w * t)
            self.g_prime = lambda t: 0.4 * w * np.cos(w * t)
        elif self.g_prime is None:
            raise ValueError("g and g_prime must be given together")

    def state_at(self, t: float) -> SpectralVelocity:
        return self.profile * float(self.g(t))


def manufactured_forcing(target: ManufacturedTarget, params: PdeParams):
    """Forcing that makes the target an exact solution, built at 2x resolution.

    Separability keeps this cheap and honest: with v = g(t) V,

        f = g' (I - kappa Lap) V + g^2 div(V x V)
            - nu |g|^(p-2) g div A(V) - (1/n) |g|^(beta-2) g div B(V),

    where the spatial fields are assembled once on the doubled grid (so the
    oracle's aliasing error sits far below the scheme error) and truncated
    back to the simulation band.
    """
    grid = target.profile.grid
    fine = TorusGrid(grid.dim, 2 * grid.modes_per_axis, grid.box_length)
    vf = SpectralVelocity(fine, embed_coeffs(target.profile.coeffs, grid, fine))

    conv = restrict_coeffs(convective_divergence_coeffs(vf), fine, grid)
    visc = restrict_coeffs(stress_divergence_coeffs(vf, params.p), fine, grid)
    reg = None
    if params.reg_weight > 0.0:
        reg = restrict_coeffs(stress_divergence_coeffs(vf, params.beta), fine, grid)
    mass = 1.0 + params.kappa * grid.k_sq()
    v_coeffs = target.profile.coeffs

    def forcing(t: float) -> np.ndarray:
        g = float(target.g(t))
        gp = float(target.g_prime(t))
        g_pow = abs(g) ** (params.p - 2.0) * g if g != 0.0 else 0.0
        out = gp * mass * v_coeffs + g * g * conv - params.nu * g_pow * visc
        if reg is not None:
            g_beta = abs(g) ** (params.beta - 2.0) * g if g != 0.0 else 0.0
            out = out - params.reg_weight * g_beta * reg
        return out

    return forcing


def run_manufactured(config: SimConfig, params: PdeParams,
                     target: ManufacturedTarget) -> dict:
    """Integrate with the manufactured forcing and report the error."""
    if target.profile.grid is not config.grid and \
            target.profile.grid.shape != config.grid.shape:
        raise ValueError("target profile must live on the simulation grid")
    params_f = replace(params, forcing=manufactured_forcing(target, params))
    traj = integrate(config, params_f, target.state_at(0.0))
    errors = []
    for t, v in zip(traj.times, traj.snapshots):
        exact = target.state_at(t)
        scale = np.sqrt(exact.l2_norm_sq())
        err = np.sqrt((v - exact).l2_norm_sq())
        errors.append(err / scale if scale > 0 else err)
    return {
        "terminal_error_rel": float(errors[-1]),
        "max_error_rel": float(np.max(errors)),
        "times": list(map(float, traj.times)),
        "errors_rel": list(map(float, errors)),
        "trajectory": traj,
    }


# -- Gronwall stability ------------------------------------------------------


def _fit_line(t: np.ndarray, y: np.ndarray) -> tuple:
    a, b = np.polyfit(t, y, 1)
    return float(a), float(b)


def run_gronwall(config: SimConfig, params: PdeParams, v0: SpectralVelocity,
                 delta: float, seed: int = 0) -> dict:
    """Separation of two runs whose initial data differ by size ``delta``.

    The perturbation is a seeded random divergence-free field normalized to
    W^{1,2} size delta.  Reported: the per-time series of ||grad w||_2^2,
    the exponential rate fitted on the second half (transients excluded),
    and the largest excess of log ||grad w||^2 above its own full-series
    linear fit (super-exponential separation would make this blow up).
    """
    rng = np.random.default_rng(seed)
    pert = random_solenoidal(config.grid, min(2, config.galerkin_n), rng, 1.0)
    wnorm = pert.w12_norm()
    if delta > 0 and wnorm > 0:
        pert = pert * (delta / wnorm)
    else:
        pert = pert * 0.0

    base = integrate(config, params, v0)
    other = integrate(config, params, v0 + pert)

    times = np.array(base.times)
    grad_sq = np.array([
        (a - b).grad_norm_sq() for a, b in zip(other.snapshots, base.snapshots)
    ])
    report = {
        "delta": float(delta),
        "times": list(map(float, times)),
        "w_grad_sq": list(map(float, grad_sq)),
        "w_grad_max": float(np.sqrt(np.max(grad_sq))),
    }
    if delta == 0.0 or np.max(grad_sq) == 0.0:
        report.update({"rate": None, "line_max_excess": 0.0})
        return report

    log_g = np.log(np.maximum(grad_sq, 1e-300))
    half = len(times) // 2
    rate, _ = _fit_line(times[half:], log_g[half:])
    slope, intercept = _fit_line(times, log_g)
    excess = float(np.max(log_g - (slope * times + intercept)))
    report.update({"rate": rate, "line_max_excess": excess})
    return report


# -- Galerkin refinement ------------------------------------------------------


def _run_points(jobs, threads: int):
    if threads <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


def run_refinement(config: SimConfig, params: PdeParams, v0: SpectralVelocity,
                   shells: list, threads: int = 1) -> dict:
    """Cauchy table of successive Galerkin differences.

    Rows pair consecutive shells (n_i, n_{i+1}) with the L^2(Q_T) and
    sup-in-time W^{1,2} norms of the difference; a single shell yields an
    empty table.
    """
    shells = [int(n) for n in shells]
    if any(b <= a for a, b in zip(shells, shells[1:])):
        raise ValueError("shells must be strictly increasing")

    jobs = [
        (lambda n=n: integrate(replace(config, galerkin_n=n), params, v0))
        for n in shells
    ]
    trajs = _run_points(jobs, threads)

    rows = []
    for (na, ta), (nb, tb) in zip(zip(shells, trajs), zip(shells[1:], trajs[1:])):
        times = np.array(ta.times)
        l2_sq = np.array([
            (a - b).l2_norm_sq() for a, b in zip(ta.snapshots, tb.snapshots)
        ])
        w12 = np.array([
            np.sqrt((a - b).l2_norm_sq() + (a - b).grad_norm_sq())
            for a, b in zip(ta.snapshots, tb.snapshots)
        ])
        rows.append({
            "n_coarse": na,
            "n_fine": nb,
            "l2_qt": float(np.sqrt(np.trapezoid(l2_sq, times))),
            "sup_w12": float(np.max(w12)),
        })
    return {"shells": shells, "rows": rows}


# -- vanishing regularizer -----------------------------------------------------


def run_regularization_sweep(config: SimConfig, params: PdeParams, beta: float,
                             n_list: list, v0: SpectralVelocity,
                             threads: int = 1) -> dict:
    """Decay of the auxiliary stress as the regularization index grows.

    Per index n the report carries

        J(n) = int ||(1/n) B(v_n)||_{beta'}^{beta'} dt
             = n^(-1/(beta-1)) int (1/n) int |D(v_n)|^beta dt,

    read off the ledger, plus the weighted gradient integral
    int (1/n)||grad v_n||_beta^beta dt.  The log-log slope of J must be at
    most -1 (the measured decay is in fact close to -beta').
    """
    n_list = [float(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    bprime_exp = 1.0 / (beta - 1.0)

    def one(n):
        p_reg = replace(params, regularization=(beta, n))
        traj = solve_regularized(config, p_reg, v0)
        t = traj.ledger.t
        j = n ** (-bprime_exp) * float(np.trapezoid(
            traj.ledger.column("reg_strain_beta_pow"), t))
        grad_term = float(np.trapezoid(traj.ledger.column("reg_grad_v_beta_pow"), t))
        return j, grad_term

    results = _run_points([(lambda n=n: one(n)) for n in n_list], threads)
    j_vals = [r[0] for r in results]
    grad_vals = [r[1] for r in results]

    slope = None
    if len(n_list) >= 2 and all(j > 0 for j in j_vals):
        slope, _ = _fit_line(np.log(np.array(n_list)), np.log(np.array(j_vals)))
    return {
        "beta": float(beta),
        "n_list": n_list,
        "stress_integrals": list(map(float, j_vals)),
        "weighted_gradient_integrals": list(map(float, grad_vals)),
        "loglog_slope": slope,
    }


# -- kappa sweep ----------------------------------------------------------------


def run_kappa_sweep(config: SimConfig, params: PdeParams, kappa_list: list,
                    amplitude: float = 1.0, threads: int = 1) -> dict:
    """Taylor-Green energy decay rate across relaxation times.

    The predicted rate 2 nu / (1 + 2 kappa) decreases to zero as kappa
    grows (the Voigt term freezes the dynamics).
    """
    def one(kappa):
        p_k = replace(params, kappa=float(kappa))
        rep = run_taylor_green(config, p_k, amplitude)
        return {
            "kappa": float(kappa),
            "energy_rate_fitted": rep["energy_rate_fitted"],
            "energy_rate_predicted": rep["energy_rate_predicted"],
            "terminal_l2_error_rel": rep["terminal_l2_error_rel"],
        }

    rows = _run_points([(lambda k=k: one(k)) for k in kappa_list], threads)
    return {"rows": rows}


# -- dispatch and reporting -------------------------------------------------------


def _initial_state(config: SimConfig, options: dict) -> SpectralVelocity:
    kind = options.get("initial_kind", "taylor_green")
    amplitude = float(options.get("amplitude", 1.0))
    grid = config.grid
    if kind == "taylor_green":
        return taylor_green(grid, amplitude)
    if kind == "multi_mode":
        return multi_mode_3d(grid, amplitude)
    if kind == "random":
        rng = np.random.default_rng(int(options.get("seed", 0)))
        return random_solenoidal(grid, int(options.get("shell", 2)), rng, amplitude)
    raise ValueError(f"unknown initial field kind {kind!r}")


def _write_csv(path: Path, header: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                f"{x:.17g}" if isinstance(x, float) else str(x) for x in row
            ) + "\n")


def run_experiment(spec: ExperimentSpec, threads: int = 1, seed: int = 0) -> dict:
    """Execute a spec, write table + figure + manifest, return the manifest."""
    from . import plots

    outdir = Path(spec.output_path)
    outdir.mkdir(parents=True, exist_ok=True)
    started = _time.perf_counter()
    opts = dict(spec.options)
    kind = spec.kind
    outputs = []

    def table(name, header, rows):
        path = outdir / name
        _write_csv(path, header, rows)
        outputs.append(str(path))
        return path

    if kind == "taylor_green":
        rep = run_taylor_green(spec.config, spec.params, float(opts.get("amplitude", 1.0)))
        traj = rep.pop("trajectory")
        led_path = outdir / "ledger.csv"
        traj.ledger.to_csv(led_path)
        outputs.append(str(led_path))
        fig = plots.energy_series(traj.ledger, outdir / "energy.png",
                                  title="Taylor-Green energy decay")
        outputs.append(str(fig))
        results = rep
    elif kind == "manufactured":
        target = ManufacturedTarget(profile=_initial_state(spec.config, opts))
        rep = run_manufactured(spec.config, spec.params, target)
        traj = rep.pop("trajectory")
        table("errors.csv", ["t", "error_rel"],
              list(zip(rep["times"], rep["errors_rel"])))
        fig = plots.error_series(rep["times"], rep["errors_rel"],
                                 outdir / "errors.png")
        outputs.append(str(fig))
        results = {k: rep[k] for k in ("terminal_error_rel", "max_error_rel")}
    elif kind == "gronwall":
        v0 = _initial_state(spec.config, opts)
        rep = run_gronwall(spec.config, spec.params, v0,
                           float(opts.get("delta", 1e-6)),
                           seed=int(opts.get("seed", seed)))
        table("growth.csv", ["t", "w_grad_sq"],
              list(zip(rep["times"], rep["w_grad_sq"])))
        fig = plots.gronwall_growth(rep["times"], rep["w_grad_sq"],
                                    outdir / "growth.png")
        outputs.append(str(fig))
        results = {k: rep[k] for k in ("delta", "w_grad_max", "rate", "line_max_excess")}
    elif kind == "refinement":
        v0 = _initial_state(spec.config, opts)
        shells = [int(n) for n in opts.get("shells", [2, 4, 8])]
        rep = run_refinement(spec.config, spec.params, v0, shells, threads=threads)
        rows = [(r["n_coarse"], r["n_fine"], r["l2_qt"], r["sup_w12"])
                for r in rep["rows"]]
        table("cauchy.csv", ["n_coarse", "n_fine", "l2_qt", "sup_w12"], rows)
        fig = plots.refinement_table(rep["rows"], outdir / "cauchy.png")
        outputs.append(str(fig))
        results = rep
    elif kind == "regularization_sweep":
        v0 = _initial_state(spec.config, opts)
        beta = float(opts.get("beta", max((3 * spec.config.grid.dim - 4)
                                          / spec.config.grid.dim, spec.params.p)))
        n_list = [float(n) for n in opts.get("n_list", [1, 2, 4, 8, 16, 32])]
        rep = run_regularization_sweep(spec.config, spec.params, beta, n_list, v0,
                                       threads=threads)
        table("sweep.csv", ["n_reg", "stress_integral", "weighted_gradient_integral"],
              list(zip(rep["n_list"], rep["stress_integrals"],
                       rep["weighted_gradient_integrals"])))
        fig = plots.loglog_sweep(rep["n_list"], rep["stress_integrals"],
                                 rep["loglog_slope"], outdir / "sweep.png")
        outputs.append(str(fig))
        results = {k: rep[k] for k in ("beta", "n_list", "stress_integrals",
                                       "loglog_slope")}
    elif kind == "kappa_sweep":
        kappa_list = [float(k) for k in opts.get("kappa_list", [0.25, 0.5, 1.0, 2.0])]
        rep = run_kappa_sweep(spec.config, spec.params, kappa_list,
                              float(opts.get("amplitude", 1.0)), threads=threads)
        rows = [(r["kappa"], r["energy_rate_fitted"], r["energy_rate_predicted"])
                for r in rep["rows"]]
        table("rates.csv", ["kappa", "energy_rate_fitted", "energy_rate_predicted"], rows)
        fig = plots.kappa_rates(rep["rows"], outdir / "rates.png")
        outputs.append(str(fig))
        results = rep
    else:  # pragma: no cover - guarded by ExperimentSpec
        raise ValueError(kind)

    grid = spec.config.grid
    manifest = {
        "kind": kind,
        "version": __version__,
        "inputs": {
            "grid": {"dim": grid.dim, "modes": grid.modes_per_axis,
                     "box_length": grid.box_length},
            "params": {"nu": spec.params.nu, "kappa": spec.params.kappa,
                       "p": spec.params.p,
                       "regularization": spec.params.regularization},
            "time": {"dt": spec.config.dt, "t_end": spec.config.t_end,
                     "scheme": spec.config.scheme},
            "galerkin_n": spec.config.galerkin_n,
        },
        "options": {k: v for k, v in opts.items()},
        "wall_clock_s": _time.perf_counter() - started,
        "outputs": sorted(outputs),
        "results": results,
        "error": None,
    }
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return manifest
