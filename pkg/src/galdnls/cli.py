"""Command-line front end.

Usage::

    galdnls CONFIG [--override key=value ...]

``CONFIG`` is a plain-text file of ``key = value`` lines (``#`` starts a comment;
lists are comma separated). The output directory can be overridden with the
``GALDNLS_OUTPUT_DIR`` environment variable. Exit status: 0 on completion (with or
without blow-up), 2 on configuration errors, 3 on runtime failures.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import harness, theory
from .analytic import ic_continuum_sech, ic_sech_background, ic_zero_background_sech
from .conserve import ConservedMonitor, e_al, e_dnls
from .integrate import IntegratorConfig, Method, evolve
from .lattice import L2, LINF, Boundary, LatticeGrid
from .models import Background, ModelSpec, NonlinearityKind

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config", "dispatch", "main", "OUTPUT_ENV"]

OUTPUT_ENV = "GALDNLS_OUTPUT_DIR"
EXPERIMENTS = ("simulate", "proximity", "blowup-scan", "zero-bc", "lifespan", "equivalence", "besse")
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def _floats(v):
    return tuple(float(x) for x in v)


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    # model
    equation: str = "gal"
    p: float = 2.0
    p1: float = 1.0
    p2: float = 1.0
    mu: float = 1.0
    gamma: float = 1.0
    nonlinearity: str = "power"
    lam: float = 1.0
    # data
    ic: str = "sech_background"
    q0: float = 0.4
    A: float = 1.2
    a: float = 1.0
    q0_list: tuple = (0.1, 0.12, 0.14, 0.16, 0.18, 0.19, 0.2)
    a_list: tuple = (1.8, 2.0, 2.2)
    p_list: tuple = (2.0, 3.0)
    h_list: tuple = (0.2, 0.1, 0.05)
    # grid
    L: float = 300.0
    h: float = 1.0
    boundary: str = "periodic"
    # integrator
    dt: float = 0.01
    tol: float = 1e-10
    newton_max_iter: int = 8
    krylov_tol: float = 1e-12
    krylov_max_iter: int = 200
    overflow_threshold: float = 1e8
    method: str = "gl4"
    t_end: float = 100.0
    t_max: float = 30000.0
    # output
    sample_every: int = 1
    dump_states: bool = False
    output_dir: str = "galdnls_out"
    threads: int = 0


_LIST_KEYS = {"q0_list", "a_list", "p_list", "h_list"}
_POSITIVE = {"dt", "tol", "krylov_tol", "L", "h", "overflow_threshold", "newton_max_iter",
             "krylov_max_iter", "sample_every", "lam"}
_NONNEG = {"t_end", "t_max", "q0", "threads"}
_CHOICES = {
    "experiment": EXPERIMENTS,
    "equation": ("gal", "gdnls"),
    "nonlinearity": ("power", "saturable"),
    "ic": ("sech_background", "zero_background", "continuum_sech"),
    "boundary": ("periodic", "dirichlet"),
    "method": ("gl4", "rk4"),
}


def _convert(key: str, raw: str, typ):
    raw = raw.strip()
    try:
        if key in _LIST_KEYS:
            return _floats(x for x in raw.split(",") if x.strip())
        if typ is bool or typ == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if typ is int or typ == "int":
            f = float(raw)
            if not f.is_integer():
                raise ValueError(raw)
            return int(f)
        if typ is float or typ == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot interpret {raw!r} as {getattr(typ, '__name__', typ)}") from None


def _validate(cfg: RunConfig) -> RunConfig:
    for key, choices in _CHOICES.items():
        if getattr(cfg, key) not in choices:
            raise ConfigError(f"{key}: must be one of {', '.join(choices)}; got {getattr(cfg, key)!r}")
    for key in _POSITIVE:
        v = getattr(cfg, key)
        if not (v > 0 and math.isfinite(v)):
            raise ConfigError(f"{key}: must be positive, got {v!r}")
    for key in _NONNEG:
        v = getattr(cfg, key)
        if not (v >= 0 and math.isfinite(v)):
            raise ConfigError(f"{key}: must be non-negative, got {v!r}")
    for key in ("p", "p1", "p2"):
        if getattr(cfg, key) < 1:
            raise ConfigError(f"{key}: must be >= 1")
    for key in _LIST_KEYS:
        if not getattr(cfg, key):
            raise ConfigError(f"{key}: list must not be empty")
    return cfg


def parse_config(text: str, overrides: Optional[dict] = None) -> RunConfig:
    """Parse a ``key = value`` document into a validated :class:`RunConfig`."""
    types = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        values[key] = raw
    values.update(overrides or {})
    unknown = sorted(set(values) - set(types))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    if "experiment" not in values:
        raise ConfigError("experiment: missing required key")
    kwargs = {k: _convert(k, v, types[k]) for k, v in values.items()}
    return _validate(RunConfig(**kwargs))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    return "".join(f"{f.name} = {_fmt(getattr(cfg, f.name))}\n" for f in fields(cfg))


# -- dispatch ------------------------------------------------------------------------

def _grid(cfg: RunConfig) -> LatticeGrid:
    return LatticeGrid.from_half_length(cfg.L, cfg.h, Boundary(cfg.boundary))


def _integrator(cfg: RunConfig) -> IntegratorConfig:
    return IntegratorConfig(dt=cfg.dt, newton_tol=cfg.tol, newton_max_iter=cfg.newton_max_iter,
                            krylov_tol=cfg.krylov_tol, krylov_max_iter=cfg.krylov_max_iter,
                            overflow_threshold=cfg.overflow_threshold, method=Method(cfg.method))


def _initial(cfg: RunConfig, grid: LatticeGrid):
    if cfg.ic == "sech_background":
        return ic_sech_background(grid, cfg.q0)
    if cfg.ic == "zero_background":
        return ic_zero_background_sech(grid, cfg.A)
    return ic_continuum_sech(grid, cfg.a)


def _model_spec(cfg: RunConfig) -> ModelSpec:
    if cfg.equation == "gal":
        return ModelSpec.gal(p=cfg.p, mu=cfg.mu)
    nl = NonlinearityKind.power(cfg.p) if cfg.nonlinearity == "power" else NonlinearityKind.saturable(cfg.lam, cfg.p)
    return ModelSpec.gdnls(p=cfg.p, gamma=cfg.gamma, nonlinearity=nl)


def _simulate(cfg: RunConfig) -> harness.ExperimentReport:
    grid = _grid(cfg)
    spec = _model_spec(cfg)
    u0 = _initial(cfg, grid)
    monitors = []
    if spec.equation.al_family and grid.periodic:
        monitors.append(ConservedMonitor("E_AL", e_al))
    elif not spec.equation.al_family:
        monitors.append(ConservedMonitor("E_DNLS", e_dnls))
    ts = evolve(u0, spec, _integrator(cfg), cfg.t_end, monitors=monitors, sample_every=cfg.sample_every,
                norms=(L2, LINF), store_states=cfg.dump_states)
    return harness.ExperimentReport(
        name="simulate",
        parameters=dataclasses.asdict(cfg),
        series={cfg.equation: ts},
        derived={"blowup_t": ts.blowup_time, "last_time": ts.last_time},
        provenance="single run",
        valid=harness._drift_ok(ts),
    )


def _lifespan(cfg: RunConfig) -> harness.ExperimentReport:
    grid = _grid(cfg)
    u0 = _initial(cfg, grid)
    bg = Background.constant(grid, cfg.q0) if cfg.ic == "sech_background" else Background.zero(grid)
    eps = float(np.linalg.norm(u0.values - bg.zeta.values))
    kappa = grid.kappa
    K = cfg.p if cfg.nonlinearity == "power" else 1.0 / cfg.lam
    derived = {"epsilon": eps}
    for name, fn in (
        ("T_dnls", lambda: theory.lifespan_dnls(eps, bg, cfg.gamma, K, cfg.p, kappa)),
        ("T_gal_X1", lambda: theory.lifespan_gal(eps, bg, cfg.mu, cfg.p, kappa, theory.Variant.X1)),
        ("T_gal_X2", lambda: theory.lifespan_gal(eps, bg, cfg.mu, cfg.p, kappa, theory.Variant.X2)),
    ):
        try:
            derived[name] = fn()
        except theory.UnboundedLifespan:
            derived[name] = "unbounded"
    if eps > 0:
        pc = theory.proximity_constants(eps, bg, eps, cfg.p1, cfg.p2, mu=cfg.mu, gamma=cfg.gamma, kappa=kappa)
        derived.update({"M1": pc.M1, "M2": pc.M2, "A1": pc.A1, "A2": pc.A2, "T_c": pc.T_c, "C": pc.C,
                        "bound_at_T_c": theory.proximity_bound(pc, pc.T_c, eps)})
    return harness.ExperimentReport("lifespan", dataclasses.asdict(cfg), derived=derived, provenance="analytic bounds")


def run_experiment(cfg: RunConfig) -> harness.ExperimentReport:
    threads = cfg.threads or None
    exp = cfg.experiment
    if exp == "simulate":
        return _simulate(cfg)
    if exp == "lifespan":
        return _lifespan(cfg)
    if exp == "proximity":
        return harness.run_proximity(cfg.p1, cfg.p2, cfg.q0, cfg.L, cfg.t_end, cfg.dt, cfg.mu, cfg.gamma,
                                     sample_every=cfg.sample_every, threads=threads, h=cfg.h)
    if exp == "blowup-scan":
        return harness.scan_blowup_q0(cfg.p, cfg.q0_list, cfg.L, cfg.dt, cfg.t_max, cfg.mu, threads=threads,
                                      sample_every=cfg.sample_every)
    if exp == "zero-bc":
        return harness.run_zero_bc_blowup(cfg.A, cfg.p, cfg.L, cfg.dt, cfg.t_max, cfg.mu, cfg.sample_every)
    if exp == "equivalence":
        return harness.run_h2t_equivalence(cfg.h_list, cfg.t_end, cfg.a, cfg.L, cfg.dt, cfg.mu,
                                           cfg.sample_every, threads=threads)
    return harness.run_besse_comparison(cfg.a_list, [int(p) if float(p).is_integer() else p for p in cfg.p_list],
                                        cfg.h, cfg.dt, cfg.L, cfg.mu, cfg.t_max, threads=threads)


def _g17(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _safe(label: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in label)


def write_outputs(report: harness.ExperimentReport, out: Path, dump_states: bool = False) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for label, ts in report.series.items():
        energy = next((v for k, v in ts.conserved.items() if k in harness.ENERGY_NAMES), None)
        with open(out / f"series_{_safe(label)}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "norm_l2", "norm_linf", "E", "newton_iters"])
            l2 = next(v for k, v in ts.norms.items() if k in ("l2", "L2"))
            for i, t in enumerate(ts.times):
                w.writerow([_g17(t), _g17(l2[i]), _g17(ts.norms["linf"][i]),
                            _g17(energy[i]) if energy is not None else "", ts.diagnostics[i].newton_iterations])
        if dump_states and ts.states is not None:
            n = ts.states.shape[1]
            with open(out / f"states_{_safe(label)}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["t"] + [f"re_{j}" for j in range(n)] + [f"im_{j}" for j in range(n)])
                for t, row in zip(ts.times, ts.states):
                    w.writerow([_g17(t)] + [_g17(x) for x in row.real] + [_g17(x) for x in row.imag])
    for name, cols in report.tables.items():
        keys = list(cols)
        with open(out / f"table_{_safe(name)}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(keys)
            for row in zip(*(np.asarray(cols[k]) for k in keys)):
                w.writerow([_g17(x) for x in row])


def _summary(report: harness.ExperimentReport) -> str:
    parts = [f"experiment={report.name}", f"valid={str(report.valid).lower()}"]
    for k, v in report.derived.items():
        if isinstance(v, (float, int)) and not isinstance(v, bool):
            parts.append(f"{k}={_g17(v)}")
        elif v is None and k.endswith("blowup_t"):
            parts.append(f"{k}=none")
        elif isinstance(v, dict) and all(isinstance(x, (float, int, type(None))) for x in v.values()):
            parts.extend(f"{k}[{kk}]={'none' if x is None else _g17(x)}" for kk, x in v.items())
    return " ".join(parts)


def dispatch(cfg: RunConfig, stdout=None) -> int:
    """Run the configured experiment, write its artifacts and print a summary line."""
    stdout = stdout or sys.stdout
    out = Path(os.environ.get(OUTPUT_ENV) or cfg.output_dir)
    try:
        report = run_experiment(cfg)
        write_outputs(report, out, cfg.dump_states)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(_summary(report), file=stdout)
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="galdnls", description="gAL/gDNLS lattice experiments")
    ap.add_argument("config", help="path to a key = value configuration file")
    ap.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    args = ap.parse_args(argv)
    try:
        overrides = {}
        for item in args.override:
            if "=" not in item:
                raise ConfigError(f"override {item!r}: expected key=value")
            k, v = item.split("=", 1)
            overrides[k.strip()] = v
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text, overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
