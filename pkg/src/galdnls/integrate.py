"""Time integration of the lattice equations.

The workhorse is the two-stage Gauss-Legendre Runge-Kutta method (order 4) applied to
the real system for ``(Re u, Im u)``. Its implicit stage equations are solved by a
Jacobian-free Newton-Krylov iteration in which every Jacobian-vector product is a
complex-step derivative of the stage residual. An explicit RK4 step serves as a
cross-check, and :func:`besse_nls_evolve` integrates the continuous NLS with the
relaxation scheme for the lifespan comparison.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, gmres, splu

from .lattice import L2, LINF, ComplexField, LatticeGrid, NormKind, norm_array
from .models import Model, ModelSpec, modulus_power, recombine, split_real_imag

__all__ = [
    "Method",
    "BlowUpCause",
    "IntegratorConfig",
    "StepDiagnostics",
    "BlowUp",
    "TimeSeries",
    "newton_jfnk",
    "gl4_step",
    "rk4_explicit_step",
    "evolve",
    "besse_nls_evolve",
    "BUTCHER_A",
    "BUTCHER_B",
    "BUTCHER_C",
]

_S3 = math.sqrt(3.0)
BUTCHER_A = np.array([[0.25, 0.25 - _S3 / 6.0], [0.25 + _S3 / 6.0, 0.25]])
BUTCHER_B = np.array([0.5, 0.5])
BUTCHER_C = np.array([0.5 - _S3 / 6.0, 0.5 + _S3 / 6.0])


class Method(str, enum.Enum):
    GAUSS_LEGENDRE4 = "gl4"
    EXPLICIT_RK4 = "rk4"
    BESSE_NLS = "besse"


class BlowUpCause(str, enum.Enum):
    OVERFLOW = "overflow"
    NAN = "nan"
    NEWTON_FAILURE = "newton_failure"
    OSCILLATION = "oscillation"


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size and solver controls.

    ``krylov_max_iter`` caps the total number of inner GMRES iterations per Newton
    step (``krylov_restart`` per cycle).
    """

    dt: float = 0.01
    newton_tol: float = 1e-10
    newton_max_iter: int = 8
    krylov_tol: float = 1e-12
    krylov_max_iter: int = 200
    krylov_restart: int = 50
    complex_step: float = 1e-100
    overflow_threshold: float = 1e8
    method: Method = Method.GAUSS_LEGENDRE4

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        for name in ("dt", "newton_tol", "krylov_tol", "complex_step", "overflow_threshold"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        for name in ("newton_max_iter", "krylov_max_iter", "krylov_restart"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class StepDiagnostics:
    newton_iterations: int
    final_residual: float
    accepted: bool


@dataclass(frozen=True)
class BlowUp:
    time: float
    cause: BlowUpCause


@dataclass
class TimeSeries:
    """Samples of a run.

    ``diagnostics[k]`` belongs to the step that produced sample ``k`` (the initial
    sample carries zero iterations). Per-step Newton counts for every step, sampled
    or not, are kept in ``step_iterations`` / ``step_residuals``.
    """

    times: np.ndarray
    norms: dict
    conserved: dict
    diagnostics: list
    blowup: Optional[BlowUp] = None
    step_iterations: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    step_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    states: Optional[np.ndarray] = None
    final_state: Optional[ComplexField] = None
    last_time: float = 0.0

    def __len__(self):
        return len(self.times)

    @property
    def blowup_time(self) -> Optional[float]:
        return None if self.blowup is None else self.blowup.time


# -- Newton-Krylov -------------------------------------------------------------

def _inf_norm(r) -> float:
    return float(np.max(np.abs(r), initial=0.0))


def newton_jfnk(residual_fn: Callable[[np.ndarray], np.ndarray], guess, cfg: IntegratorConfig):
    """Solve ``residual_fn(x) = 0`` by Newton's method with matrix-free GMRES.

    ``J(x) v`` is evaluated as ``Im residual_fn(x + i s v) / s`` with
    ``s = cfg.complex_step``, so ``residual_fn`` must accept complex arrays.
    Convergence is declared when the max-norm of the residual is at most
    ``cfg.newton_tol``.

    Returns
    -------
    x : ndarray
        Final iterate (also returned on failure).
    diag : StepDiagnostics
    """
    x = np.array(guess, dtype=float)
    n = x.size
    s = cfg.complex_step
    restart = min(cfg.krylov_restart, n)
    maxiter = max(1, -(-cfg.krylov_max_iter // restart))
    r = np.asarray(residual_fn(x), dtype=float)
    res = _inf_norm(r)
    it = 0
    while True:
        if not math.isfinite(res):
            return x, StepDiagnostics(it, res, False)
        if res <= cfg.newton_tol:
            return x, StepDiagnostics(it, res, True)
        if it >= cfg.newton_max_iter:
            return x, StepDiagnostics(it, res, False)
        x0 = x

        def jv(v, x0=x0):
            return np.imag(residual_fn(x0 + (1j * s) * v)) / s

        op = LinearOperator((n, n), matvec=jv, dtype=float)
        dx, _ = gmres(op, -r, rtol=cfg.krylov_tol, atol=0.0, restart=restart, maxiter=maxiter)
        x = x + dx
        it += 1
        r = np.asarray(residual_fn(x), dtype=float)
        res = _inf_norm(r)


# -- one-step methods ------------------------------------------------------------

def _gl4_split(model: Model, y: np.ndarray, t: float, dt: float, cfg: IntegratorConfig):
    m = y.size
    A = BUTCHER_A * dt
    tc = t + BUTCHER_C * dt

    def residual(z):
        Z = z.reshape(2, m)
        F = model.rhs_split(Z, tc[0])
        return (Z - y - A @ F).ravel()

    z0 = np.concatenate([y, y])
    z, diag = newton_jfnk(residual, z0, cfg)
    F = model.rhs_split(z.reshape(2, m), tc[0])
    y1 = y + dt * (BUTCHER_B @ F)
    return y1, diag


def gl4_step(state: ComplexField, t: float, spec: ModelSpec, cfg: IntegratorConfig, dt: Optional[float] = None):
    """Advance one Gauss-Legendre step; ``dt`` (possibly negative) overrides ``cfg.dt``."""
    if not np.all(np.isfinite(state.values)):
        raise ValueError("state must be finite")
    model = Model(spec, state.grid)
    y1, diag = _gl4_split(model, split_real_imag(state), t, cfg.dt if dt is None else dt, cfg)
    return recombine(y1, state.grid), diag


def _rk4_complex(model: Model, u: np.ndarray, t: float, dt: float) -> np.ndarray:
    f = model.rhs
    k1 = f(u, t)
    k2 = f(u + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(u + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(u + dt * k3, t + dt)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_explicit_step(state: ComplexField, t: float, spec: ModelSpec, cfg: IntegratorConfig, dt: Optional[float] = None):
    """Classical explicit RK4 on the complex field."""
    model = Model(spec, state.grid)
    return ComplexField(_rk4_complex(model, state.values, t, cfg.dt if dt is None else dt), state.grid)


# -- evolution -------------------------------------------------------------------

class _Recorder:
    def __init__(self, grid, norms, monitors, store_states):
        self.grid = grid
        self.norm_kinds = list(norms)
        self.monitors = list(monitors)
        self.times = []
        self.norms = {k.label: [] for k in self.norm_kinds}
        self.conserved = {m.name: [] for m in self.monitors}
        self.diagnostics = []
        self.states = [] if store_states else None

    def sample(self, t, u, diag):
        self.times.append(t)
        h = self.grid.spacing
        interior = u if self.grid.periodic else u[1:-1]
        for k in self.norm_kinds:
            self.norms[k.label].append(norm_array(interior if k.h_weighted else u, k, h))
        f = ComplexField(u, self.grid) if self.monitors else None
        for m in self.monitors:
            self.conserved[m.name].append(m.observe(f))
        self.diagnostics.append(diag)
        if self.states is not None:
            self.states.append(np.array(u))


def evolve(
    state0: ComplexField,
    spec: ModelSpec,
    cfg: IntegratorConfig,
    t_end: float,
    monitors: Sequence = (),
    sample_every: int = 1,
    norms: Sequence[NormKind] = (L2, LINF),
    store_states: bool = False,
    t0: float = 0.0,
) -> TimeSeries:
    """Integrate from ``t0`` to ``t0 + t_end`` or until blow-up.

    Parameters
    ----------
    monitors
        Objects with ``name`` and ``observe(field) -> float`` (see
        :class:`galdnls.conserve.ConservedMonitor`); evaluated at every sample.
    sample_every
        Record every ``sample_every`` steps; the initial state and the final
        (or last accepted, on blow-up) state are always recorded.

    Blow-up is declared when an accepted state has ``|u_n| > overflow_threshold``
    or a non-finite entry, or when Newton fails to converge. The reported time is
    the last accepted (finite, bounded) time.
    """
    if not t_end >= 0:
        raise ValueError("t_end must be non-negative")
    if int(sample_every) != sample_every or sample_every < 1:
        raise ValueError("sample_every must be a positive integer")
    if cfg.method is Method.BESSE_NLS:
        raise ValueError("use besse_nls_evolve for the continuous NLS scheme")
    grid = state0.grid
    model = Model(spec, grid)
    rec = _Recorder(grid, norms, monitors, store_states)
    dt = cfg.dt
    n_steps = int(math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    u = np.array(state0.values)
    t = t0
    rec.sample(t, u, StepDiagnostics(0, 0.0, True))
    iters = np.zeros(n_steps, dtype=np.int16)
    resid = np.zeros(n_steps)
    blow = None
    last_sampled = True
    gl4 = cfg.method is Method.GAUSS_LEGENDRE4
    y = split_real_imag(u) if gl4 else None
    k = 0
    for k in range(1, n_steps + 1):
        t_new = t0 + k * dt if k < n_steps else t0 + t_end
        h_step = t_new - t
        if gl4:
            y_new, diag = _gl4_split(model, y, t, h_step, cfg)
            u_new = recombine(y_new)
        else:
            with np.errstate(all="ignore"):
                u_new = _rk4_complex(model, u, t, h_step)
            diag = StepDiagnostics(0, 0.0, True)
            y_new = None
        iters[k - 1] = diag.newton_iterations
        resid[k - 1] = diag.final_residual
        if not diag.accepted:
            blow = BlowUp(t, BlowUpCause.NAN if not math.isfinite(diag.final_residual) else BlowUpCause.NEWTON_FAILURE)
        else:
            a = np.abs(u_new)
            if not np.all(np.isfinite(a)):
                blow = BlowUp(t, BlowUpCause.NAN)
            elif a.max() > cfg.overflow_threshold:
                blow = BlowUp(t, BlowUpCause.OVERFLOW)
        if blow is not None:
            break
        u, y, t = u_new, y_new, t_new
        last_sampled = k % sample_every == 0 or k == n_steps
        if last_sampled:
            rec.sample(t, u, diag)
    n_done = k if blow is None else k - 1
    if blow is not None and not last_sampled:
        rec.sample(t, u, StepDiagnostics(int(iters[n_done - 1]) if n_done else 0,
                                         float(resid[n_done - 1]) if n_done else 0.0, True))
    return TimeSeries(
        times=np.array(rec.times),
        norms={key: np.array(v) for key, v in rec.norms.items()},
        conserved={key: np.array(v) for key, v in rec.conserved.items()},
        diagnostics=rec.diagnostics,
        blowup=blow,
        step_iterations=iters[: k if blow is not None else n_steps].astype(int),
        step_residuals=resid[: k if blow is not None else n_steps],
        states=None if rec.states is None else np.array(rec.states),
        final_state=ComplexField(u, grid),
        last_time=t,
    )


# -- continuous NLS: relaxation scheme -----------------------------------------

def _h1_seminorm(u: np.ndarray, h: float) -> float:
    d = np.roll(u, -1) - u
    return math.sqrt(h * float(np.vdot(d, d).real)) / h


def besse_nls_evolve(
    u0,
    L: float,
    h: float,
    dt: float,
    p: float,
    t_end: float,
    mu: float = 2.0,
    oscillation_factor: float = 10.0,
    overflow_threshold: float = 1e8,
    sample_every: int = 1,
) -> TimeSeries:
    """Relaxation scheme for ``i u_t + u_xx + mu |u|^{2p} u = 0`` on a periodic grid.

    The auxiliary field is ``psi^{n+1/2} = 2 |u^n|^{2p} - psi^{n-1/2}`` with
    ``psi^{-1/2} = |u^0|^{2p}``, and each step solves the linearly implicit
    Crank-Nicolson system with the centred second difference.

    ``u0`` is a callable of ``x`` or an array of samples on ``x_n = -L + n h``.
    The scheme does not overflow; past the lifespan it produces grid-scale
    oscillations. Their onset is detected as the first step at which the relaxation
    field ``psi`` (an approximation of ``|u|^{2p} >= 0``) turns negative somewhere,
    or at which the discrete H1 seminorm grows by more than ``oscillation_factor``
    in one step. The stamped lifespan is the last time before that step.
    Norms are h-weighted; ``conserved['mass']`` is ``h sum |u_n|^2``.
    """
    grid = LatticeGrid.from_half_length(L, h)
    x = grid.x
    u = np.asarray(u0(x) if callable(u0) else u0, dtype=complex).copy()
    if u.shape != (grid.n_nodes,):
        raise ValueError("initial samples do not match the grid")
    n = grid.n_nodes
    lap = sp.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="lil")
    lap[0, n - 1] = 1.0
    lap[n - 1, 0] = 1.0
    lap = (lap / h**2).tocsc()
    eye = sp.identity(n, format="csc")
    base_l = (1j / dt) * eye + 0.5 * lap
    base_r = (1j / dt) * eye - 0.5 * lap

    h2, hw = NormKind(2.0, True), LINF
    norms = {h2.label: [], hw.label: []}
    times, mass, diags = [], [], []

    def sample(t, v):
        times.append(t)
        norms[h2.label].append(norm_array(v, h2, h))
        norms[hw.label].append(norm_array(v, hw, h))
        mass.append(h * float(np.vdot(v, v).real))
        diags.append(StepDiagnostics(0, 0.0, True))

    n_steps = int(math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    psi = modulus_power(np.abs(u) ** 2, p)
    t = 0.0
    sample(t, u)
    semi = _h1_seminorm(u, h)
    # growth out of a roundoff-level gradient (flat data) is not an oscillation
    semi_floor = 1e-8 * math.sqrt(h * float(np.vdot(u, u).real))
    blow = None
    last_sampled = True
    for k in range(1, n_steps + 1):
        psi = 2.0 * modulus_power(np.abs(u) ** 2, p) - psi
        if psi.min() < 0.0:
            blow = BlowUp(t, BlowUpCause.OSCILLATION)
            break
        pot = sp.diags(0.5 * mu * psi, format="csc")
        try:
            lu = splu((base_l + pot).tocsc())
            u_new = lu.solve((base_r - pot) @ u)
        except RuntimeError as exc:
            raise RuntimeError(f"linear solve failed at step {k}") from exc
        a = np.abs(u_new)
        new_semi = _h1_seminorm(u_new, h) if np.all(np.isfinite(a)) else math.inf
        if not np.all(np.isfinite(a)):
            blow = BlowUp(t, BlowUpCause.NAN)
        elif a.max() > overflow_threshold:
            blow = BlowUp(t, BlowUpCause.OVERFLOW)
        elif new_semi > oscillation_factor * max(semi, semi_floor):
            blow = BlowUp(t, BlowUpCause.OSCILLATION)
        if blow is not None:
            break
        u, semi = u_new, new_semi
        t = k * dt if k < n_steps else t_end
        last_sampled = k % sample_every == 0 or k == n_steps
        if last_sampled:
            sample(t, u)
    if blow is not None and not last_sampled:
        sample(t, u)
    return TimeSeries(
        times=np.array(times),
        norms={key: np.array(v) for key, v in norms.items()},
        conserved={"mass": np.array(mass)},
        diagnostics=diags,
        blowup=blow,
        final_state=ComplexField(u, grid),
        last_time=t,
    )
