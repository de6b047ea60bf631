"""Flat key=value configuration files (a TOML-compatible subset).

Supported syntax: ``[section]`` headers, ``key = value`` lines, ``#``
comments, and values that are integers, floats, booleans, quoted strings,
or flat lists of numbers.  All physical parameters (nu, kappa, p) must be
explicit; there are no hidden defaults for them.
"""

from __future__ import annotations

import numpy as np

from .experiments import EXPERIMENT_KINDS, ExperimentSpec
from .fields import multi_mode_3d, random_solenoidal, single_mode, taylor_green
from .solver import PdeParams, SimConfig
from .spectral import SpectralVelocity, TorusGrid

__all__ = ["ConfigError", "parse_config_text", "parse_config_file",
           "build_simulation", "build_experiment"]


class ConfigError(ValueError):
    """A malformed or missing configuration entry; ``key`` names it."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _strip_comment(line: str) -> str:
    out = []
    quote = None
    for ch in line:
        if quote:
            out.append(ch)
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
            out.append(ch)
        elif ch == "#":
            break
        else:
            out.append(ch)
    return "".join(out)


def _parse_scalar(token: str, key: str):
    token = token.strip()
    if not token:
        raise ConfigError(key, "empty value")
    if token[0] in "\"'":
        if len(token) < 2 or token[-1] != token[0]:
            raise ConfigError(key, f"unterminated string {token!r}")
        return token[1:-1]
    if token == "true":
        return True
    if token == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ConfigError(key, f"cannot parse value {token!r}") from None


def _parse_value(token: str, key: str):
    token = token.strip()
    if token.startswith("["):
        if not token.endswith("]"):
            raise ConfigError(key, f"unterminated list {token!r}")
        inner = token[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(part, key) for part in inner.split(",")]
    return _parse_scalar(token, key)


def parse_config_text(text: str) -> dict:
    """Parse into ``{section: {key: value}}``; top-level keys go to ''."""
    sections: dict = {"": {}}
    current = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}", f"malformed section header {line!r}")
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}", "empty key")
        full_key = f"{current}.{key}" if current else key
        sections[current][key] = _parse_value(value, full_key)
    return sections


def parse_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _require(section: dict, section_name: str, key: str):
    if key not in section:
        raise ConfigError(f"{section_name}.{key}", "missing required key")
    return section[key]


def _get_number(section, section_name, key, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{section_name}.{key}", "missing required key")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section_name}.{key}", f"expected a number, got {value!r}")
    return value


def build_grid(sections: dict) -> TorusGrid:
    sec = sections.get("grid", {})
    dim = int(_get_number(sec, "grid", "dim", required=True))
    modes = int(_get_number(sec, "grid", "modes", required=True))
    length = float(_get_number(sec, "grid", "box_length", default=2.0 * np.pi))
    try:
        return TorusGrid(dim, modes, length)
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from exc


def build_forcing(sections: dict, grid: TorusGrid):
    sec = sections.get("forcing", {})
    kind = sec.get("kind", "none")
    if kind == "none":
        return None
    amplitude = float(_get_number(sec, "forcing", "amplitude", default=1.0))
    if kind == "single_mode":
        mode = sec.get("mode")
        if not isinstance(mode, list) or len(mode) != grid.dim:
            raise ConfigError("forcing.mode", f"expected a {grid.dim}-entry list")
        phase = float(_get_number(sec, "forcing", "phase", default=0.0))
        coeffs = single_mode(grid, mode, amplitude, phase).coeffs
    elif kind == "taylor_green":
        if grid.dim != 2:
            raise ConfigError("forcing.kind", "taylor_green forcing is 2-D")
        coeffs = taylor_green(grid, amplitude).coeffs
    else:
        raise ConfigError("forcing.kind", f"unknown forcing kind {kind!r}")
    if "omega" in sec:
        # separable-in-time forcing f(x) cos(omega t)
        omega = float(_get_number(sec, "forcing", "omega", required=True))
        return lambda t: coeffs * np.cos(omega * t)
    return coeffs


def build_params(sections: dict, grid: TorusGrid) -> PdeParams:
    sec = sections.get("params", {})
    nu = float(_get_number(sec, "params", "nu", required=True))
    kappa = float(_get_number(sec, "params", "kappa", required=True))
    p = float(_get_number(sec, "params", "p", required=True))
    regularization = None
    if "beta" in sec or "n_reg" in sec:
        beta = float(_get_number(sec, "params", "beta", required=True))
        n_reg = float(_get_number(sec, "params", "n_reg", required=True))
        regularization = (beta, n_reg)
    try:
        params = PdeParams(nu=nu, kappa=kappa, p=p,
                           forcing=build_forcing(sections, grid),
                           regularization=regularization)
        params.validate_for_grid(grid)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from exc
    return params


def build_initial(sections: dict, grid: TorusGrid, seed: int = 0) -> SpectralVelocity:
    sec = sections.get("initial", {})
    kind = sec.get("kind", "taylor_green" if grid.dim == 2 else "multi_mode")
    amplitude = float(_get_number(sec, "initial", "amplitude", default=1.0))
    if kind == "taylor_green":
        if grid.dim != 2:
            raise ConfigError("initial.kind", "taylor_green is 2-D")
        return taylor_green(grid, amplitude)
    if kind == "multi_mode":
        if grid.dim != 3:
            raise ConfigError("initial.kind", "multi_mode is 3-D")
        return multi_mode_3d(grid, amplitude)
    if kind == "single_mode":
        mode = sec.get("mode")
        if not isinstance(mode, list) or len(mode) != grid.dim:
            raise ConfigError("initial.mode", f"expected a {grid.dim}-entry list")
        phase = float(_get_number(sec, "initial", "phase", default=0.0))
        return single_mode(grid, mode, amplitude, phase)
    if kind == "random":
        shell = int(_get_number(sec, "initial", "shell", default=2))
        rng = np.random.default_rng(int(_get_number(sec, "initial", "seed",
                                                    default=seed)))
        return random_solenoidal(grid, shell, rng, amplitude)
    raise ConfigError("initial.kind", f"unknown initial kind {kind!r}")


def build_sim_config(sections: dict, grid: TorusGrid) -> SimConfig:
    time_sec = sections.get("time", {})
    solver_sec = sections.get("solver", {})
    dt = float(_get_number(time_sec, "time", "dt", required=True))
    t_end = float(_get_number(time_sec, "time", "t_end", required=True))
    scheme = time_sec.get("scheme", "midpoint")
    galerkin_n = int(_get_number(solver_sec, "solver", "galerkin_n",
                                 default=grid.band))
    try:
        return SimConfig(
            grid=grid,
            galerkin_n=galerkin_n,
            dt=dt,
            t_end=t_end,
            scheme=scheme,
            fixed_point_tol=float(_get_number(time_sec, "time", "fixed_point_tol",
                                              default=1e-10)),
            max_fixed_point_iters=int(_get_number(time_sec, "time",
                                                  "max_fixed_point_iters", default=50)),
            record_every=int(_get_number(solver_sec, "solver", "record_every",
                                         default=1)),
        )
    except ValueError as exc:
        raise ConfigError("time", str(exc)) from exc


def build_simulation(sections: dict, seed: int = 0):
    """(SimConfig, PdeParams, initial state) from a parsed simulate config."""
    grid = build_grid(sections)
    params = build_params(sections, grid)
    config = build_sim_config(sections, grid)
    v0 = build_initial(sections, grid, seed=seed)
    return config, params, v0


def build_experiment(sections: dict, output_path: str, seed: int = 0) -> ExperimentSpec:
    sec = sections.get("experiment", {})
    kind = sec.get("kind")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError("experiment.kind",
                          f"expected one of {EXPERIMENT_KINDS}, got {kind!r}")
    grid = build_grid(sections)
    params = build_params(sections, grid)
    config = build_sim_config(sections, grid)
    options = {k: v for k, v in sec.items() if k != "kind"}
    init_sec = sections.get("initial", {})
    if "kind" in init_sec:
        options.setdefault("initial_kind", init_sec["kind"])
    for key in ("amplitude", "seed", "shell"):
        if key in init_sec:
            options.setdefault(key, init_sec[key])
    options.setdefault("seed", seed)
    return ExperimentSpec(kind=kind, config=config, params=params,
                          options=options, output_path=output_path)
