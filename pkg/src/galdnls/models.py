"""Right-hand sides of the generalized Ablowitz-Ladik (gAL) and generalized DNLS (gDNLS)
lattices, in original form and in the background-subtracted ("modified") form, plus the
nonlinear operators of the local theory and the norm bounds they satisfy.

Two independent evaluation paths are provided for every equation: :meth:`Model.rhs`
works in complex arithmetic on ``u``; :meth:`Model.rhs_split` works on the stacked real
vector ``(Re u, Im u)`` using only operations that stay analytic when the real vector is
complexified, which is what the complex-step Newton solver relies on.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lattice import (
    ComplexField,
    IncompatibleFieldsError,
    L2,
    LINF,
    LatticeGrid,
    norm,
    shift_backward,
    shift_forward,
)

__all__ = [
    "NonlinearityKind",
    "Equation",
    "Background",
    "ModelSpec",
    "Model",
    "eval_F",
    "rhs",
    "operator_G",
    "operator_calG",
    "split_real_imag",
    "recombine",
    "into_bound_G",
    "lipschitz_bound_G",
    "into_bound_calG",
    "lipschitz_bound_calG",
]


def modulus_power(x, p):
    """``x**p`` for ``x = |u|^2 >= 0`` with the convention ``0**p = 0``.

    Integer exponents use repeated products, which stay exact and analytic for
    complexified inputs; other exponents go through ``exp(p log x)``.
    """
    if float(p).is_integer():
        k = int(p)
        out = x
        for _ in range(k - 1):
            out = out * x
        return out if k >= 1 else np.ones_like(x)
    x = np.asarray(x)
    zero = x == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(p * np.log(np.where(zero, 1.0, x)))
    return np.where(zero, 0.0, out)


@dataclass(frozen=True)
class NonlinearityKind:
    """Onsite nonlinearity ``F`` of gDNLS.

    ``power``: ``F(x) = x**p``; ``saturable``: ``F(x) = x / (lam (1 + x))`` (with p = 1).
    ``lipschitz_K`` defaults to ``p`` for powers and ``1/lam`` for the saturable law.
    """

    variant: str = "power"
    p: float = 1.0
    lam: float = 1.0
    lipschitz_K: Optional[float] = None

    def __post_init__(self):
        if self.variant not in ("power", "saturable"):
            raise ValueError(f"unknown nonlinearity variant {self.variant!r}")
        if not self.p >= 1:
            raise ValueError(f"nonlinearity exponent p must be >= 1, got {self.p}")
        if self.variant == "saturable" and not self.lam > 0:
            raise ValueError("saturable nonlinearity needs lam > 0")
        if self.lipschitz_K is None:
            K = self.p if self.variant == "power" else 1.0 / self.lam
            object.__setattr__(self, "lipschitz_K", float(K))
        elif not self.lipschitz_K > 0:
            raise ValueError("lipschitz_K must be positive")

    @classmethod
    def power(cls, p=1.0):
        return cls("power", p)

    @classmethod
    def saturable(cls, lam=1.0, p=1.0):
        return cls("saturable", p, lam)

    @property
    def K(self) -> float:
        return self.lipschitz_K

    def __call__(self, x):
        if self.variant == "power":
            return modulus_power(x, self.p)
        return x / (self.lam * (1.0 + x))

    def derivative(self, x):
        if self.variant == "power":
            return self.p * modulus_power(x, self.p - 1) if self.p > 1 else np.ones_like(x)
        return 1.0 / (self.lam * (1.0 + x) ** 2)


def eval_F(x, kind: NonlinearityKind):
    """Evaluate ``F(x)`` for ``x >= 0``; negative arguments are a domain error."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("F is only defined for non-negative arguments")
    out = kind(arr)
    return float(out) if np.ndim(out) == 0 else out


class Equation(str, enum.Enum):
    GAL = "gal"
    GDNLS = "gdnls"
    MODIFIED_GAL = "modified_gal"
    MODIFIED_GDNLS = "modified_gdnls"

    @property
    def modified(self) -> bool:
        return self in (Equation.MODIFIED_GAL, Equation.MODIFIED_GDNLS)

    @property
    def al_family(self) -> bool:
        return self in (Equation.GAL, Equation.MODIFIED_GAL)


def _edge_fill_shifts(z: np.ndarray, periodic: bool):
    # Off-lattice background values repeat the boundary value on Dirichlet grids.
    if periodic:
        return np.roll(z, -1), np.roll(z, 1)
    return shift_forward(z, False, z[-1]), shift_backward(z, False, z[0])


@dataclass(frozen=True, eq=False)
class Background:
    """Background sequence ``zeta`` with asymptotic modulus ``q0``.

    The first and second backward differences and the four norms entering the
    theory (``||zeta||_inf``, ``||zeta'||_2``, ``||zeta''||_2``, ``|| |zeta| - q0 ||_2``)
    are computed once at construction.
    """

    zeta: ComplexField
    q0: float
    zeta_prime: ComplexField = field(init=False, repr=False)
    zeta_second: ComplexField = field(init=False, repr=False)
    sup_norm: float = field(init=False)
    prime_norm: float = field(init=False)
    second_norm: float = field(init=False)
    modulus_deviation: float = field(init=False)

    def __post_init__(self):
        if not self.q0 >= 0:
            raise ValueError("q0 must be non-negative")
        z = self.zeta.values
        periodic = self.zeta.grid.periodic
        _, zb = _edge_fill_shifts(z, periodic)
        d1 = z - zb
        d2 = d1 - shift_backward(d1, periodic, 0.0)
        grid = self.zeta.grid
        object.__setattr__(self, "zeta_prime", ComplexField(d1, grid))
        object.__setattr__(self, "zeta_second", ComplexField(d2, grid))
        object.__setattr__(self, "sup_norm", norm(self.zeta, LINF))
        object.__setattr__(self, "prime_norm", norm(self.zeta_prime, L2))
        object.__setattr__(self, "second_norm", norm(self.zeta_second, L2))
        object.__setattr__(self, "modulus_deviation", float(np.linalg.norm(np.abs(z) - self.q0)))

    @classmethod
    def constant(cls, grid: LatticeGrid, q0: float, phase: float = 0.0) -> "Background":
        return cls(ComplexField(np.full(grid.n_nodes, q0 * np.exp(1j * phase)), grid), q0)

    @classmethod
    def zero(cls, grid: LatticeGrid) -> "Background":
        return cls(grid.zeros(), 0.0)

    @property
    def grid(self) -> LatticeGrid:
        return self.zeta.grid

    def norms(self) -> dict:
        return {
            "q0": self.q0,
            "sup": self.sup_norm,
            "prime": self.prime_norm,
            "second": self.second_norm,
            "modulus_deviation": self.modulus_deviation,
        }


@dataclass(frozen=True)
class ModelSpec:
    """Which lattice equation to integrate and its coefficients.

    ``mu`` couples the gAL nonlocal term, ``gamma`` and ``nonlinearity`` the gDNLS
    onsite term. Modified variants carry the background they subtract.
    """

    equation: Equation
    mu: float = 1.0
    gamma: float = 1.0
    p: float = 1.0
    nonlinearity: Optional[NonlinearityKind] = None
    background: Optional[Background] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "equation", Equation(self.equation))
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.equation.modified and self.background is None:
            raise ValueError(f"{self.equation.value} requires a background")
        if not self.equation.modified and self.background is not None:
            raise ValueError(f"{self.equation.value} does not take a background")
        if not self.equation.al_family and self.nonlinearity is None:
            object.__setattr__(self, "nonlinearity", NonlinearityKind.power(self.p))
        if self.equation.al_family and self.nonlinearity is not None:
            raise ValueError("the gAL family has no onsite nonlinearity F")

    @classmethod
    def gal(cls, p=1.0, mu=1.0):
        return cls(Equation.GAL, mu=mu, p=p)

    @classmethod
    def gdnls(cls, p=1.0, gamma=1.0, nonlinearity=None):
        return cls(Equation.GDNLS, gamma=gamma, p=p, nonlinearity=nonlinearity)

    def modified(self, background: Background) -> "ModelSpec":
        eq = Equation.MODIFIED_GAL if self.equation.al_family else Equation.MODIFIED_GDNLS
        return ModelSpec(eq, self.mu, self.gamma, self.p, self.nonlinearity, background)

    @property
    def frame_frequency(self) -> float:
        """Rotation rate of the background: ``mu q0^2p`` (gAL) or ``gamma F(q0^2)`` (gDNLS)."""
        q0 = self.background.q0 if self.background is not None else 0.0
        return background_frequency(self, q0)


def background_frequency(spec: ModelSpec, q0: float) -> float:
    if spec.equation.al_family:
        return spec.mu * q0 ** (2 * spec.p)
    return spec.gamma * float(spec.nonlinearity(q0**2))


class Model:
    """A :class:`ModelSpec` bound to a grid, with cached stencils."""

    def __init__(self, spec: ModelSpec, grid: LatticeGrid):
        if spec.background is not None and spec.background.grid != grid:
            raise IncompatibleFieldsError("background lives on a different grid than the model")
        self.spec = spec
        self.grid = grid
        self.n = grid.n_nodes
        self.kappa = grid.kappa
        self.periodic = grid.periodic
        eq = spec.equation
        self._al = eq.al_family
        self._modified = eq.modified
        if self._modified:
            bg = spec.background
            z = bg.zeta.values
            zf, zb = _edge_fill_shifts(z, self.periodic)
            self._z, self._zf, self._zb = z, zf, zb
            self._q2p = bg.q0 ** (2 * spec.p)
            self._Fq0 = float(spec.nonlinearity(bg.q0**2)) if not self._al else 0.0
            self._zr, self._zi = z.real.copy(), z.imag.copy()
            self._zfr, self._zfi = zf.real.copy(), zf.imag.copy()
            self._zbr, self._zbi = zb.real.copy(), zb.imag.copy()

    # -- complex path ---------------------------------------------------------
    def _shifts(self, a):
        return shift_forward(a, self.periodic), shift_backward(a, self.periodic)

    def rhs(self, u: np.ndarray, t: float = 0.0) -> np.ndarray:
        s = self.spec
        if self._modified:
            fw, bw = self._shifts(u)
            w = u + self._z
            wf, wb = fw + self._zf, bw + self._zb
        else:
            w = u
            wf, wb = self._shifts(u)
        lap = wf + wb - 2.0 * w
        m = (w * w.conj()).real
        if self._al:
            q = self.kappa * lap + 0.5 * s.mu * modulus_power(m, s.p) * (wf + wb)
            if self._modified:
                q = q - s.mu * self._q2p * w
        else:
            F = s.nonlinearity(m)
            if self._modified:
                F = F - self._Fq0
            q = self.kappa * lap + s.gamma * F * w
        out = 1j * q
        if not self.periodic:
            out[..., 0] = 0.0
            out[..., -1] = 0.0
        return out

    # -- real split path ------------------------------------------------------
    def rhs_split(self, y: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Time derivative of ``(r, s)`` where ``u = r + i s``; ``y`` may carry leading axes."""
        s = self.spec
        n = self.n
        r, im = y[..., :n], y[..., n:]
        per = self.periodic
        rf, rb = shift_forward(r, per), shift_backward(r, per)
        sf, sb = shift_forward(im, per), shift_backward(im, per)
        if self._modified:
            r, im = r + self._zr, im + self._zi
            rf, rb = rf + self._zfr, rb + self._zbr
            sf, sb = sf + self._zfi, sb + self._zbi
        m = r * r + im * im
        lap_r = rf + rb - 2.0 * r
        lap_s = sf + sb - 2.0 * im
        if self._al:
            c = 0.5 * s.mu * modulus_power(m, s.p)
            qr = self.kappa * lap_r + c * (rf + rb)
            qi = self.kappa * lap_s + c * (sf + sb)
            if self._modified:
                qr = qr - s.mu * self._q2p * r
                qi = qi - s.mu * self._q2p * im
        else:
            F = s.nonlinearity(m)
            if self._modified:
                F = F - self._Fq0
            qr = self.kappa * lap_r + s.gamma * F * r
            qi = self.kappa * lap_s + s.gamma * F * im
        out = np.concatenate([-qi, qr], axis=-1)
        if not per:
            for k in (0, n - 1, n, 2 * n - 1):
                out[..., k] = 0.0
        return out


def rhs(state: ComplexField, t: float, spec: ModelSpec, grid: LatticeGrid) -> ComplexField:
    """``du/dt`` of the lattice equation selected by ``spec``."""
    if state.grid != grid:
        raise IncompatibleFieldsError("state and grid disagree")
    return ComplexField(Model(spec, grid).rhs(state.values, t), grid)


def split_real_imag(state) -> np.ndarray:
    v = state.values if isinstance(state, ComplexField) else np.asarray(state)
    return np.concatenate([v.real, v.imag], axis=-1)


def recombine(y: np.ndarray, grid: Optional[LatticeGrid] = None):
    y = np.asarray(y)
    if y.shape[-1] % 2:
        raise ValueError("split vectors must have even length")
    n = y.shape[-1] // 2
    u = y[..., :n] + 1j * y[..., n:]
    return ComplexField(u, grid) if grid is not None else u


# -- nonlinear operators of the local theory ------------------------------------

def _same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise IncompatibleFieldsError("fields live on different grids")
    return g


def operator_G(Phi: ComplexField, bg: Background, kind: NonlinearityKind) -> ComplexField:
    """``[F(|Phi + zeta|^2) - F(q0^2)] (Phi + zeta)`` pointwise."""
    grid = _same_grid(Phi, bg.zeta)
    w = Phi.values + bg.zeta.values
    return ComplexField((kind(np.abs(w) ** 2) - kind(bg.q0**2)) * w, grid)


def operator_calG(phi: ComplexField, bg: Background, p: float) -> ComplexField:
    """``|phi_n + zeta_n|^2p (phi_{n+1} + phi_{n-1} + zeta_{n+1} + zeta_{n-1}) - 2 q0^2p (phi_n + zeta_n)``."""
    grid = _same_grid(phi, bg.zeta)
    v, z = phi.values, bg.zeta.values
    zf, zb = _edge_fill_shifts(z, grid.periodic)
    nb = shift_forward(v, grid.periodic) + shift_backward(v, grid.periodic) + zf + zb
    w = v + z
    return ComplexField(modulus_power(np.abs(w) ** 2, p) * nb - 2.0 * bg.q0 ** (2 * p) * w, grid)


def into_bound_G(Phi, bg: Background, kind: NonlinearityKind) -> float:
    """Right side of the l2 bound on ``G(Phi)`` (exponent ``p`` taken from ``kind``)."""
    p = kind.p
    return (
        2.0 * math.sqrt(2.0) * kind.K
        * (norm(Phi, LINF) + bg.sup_norm + bg.q0) ** (2 * p)
        * (norm(Phi, L2) + bg.modulus_deviation)
    )


def lipschitz_bound_G(Phi, Psi, bg: Background, kind: NonlinearityKind) -> float:
    p = kind.p
    return (
        kind.K
        * (norm(Phi, LINF) + norm(Psi, LINF) + 2.0 * bg.sup_norm + bg.q0) ** (2 * p)
        * norm(Phi - Psi, L2)
    )


def into_bound_calG(phi, bg: Background, p: float) -> float:
    q2p = bg.q0 ** (2 * p)
    return (
        16.0 * p * (norm(phi, LINF) + bg.sup_norm + bg.q0) ** (2 * p)
        * (norm(phi, L2) + bg.modulus_deviation)
        + 8.0 * q2p * norm(phi, L2)
        + 4.0 * q2p * bg.prime_norm
    )


def lipschitz_bound_calG(phi, psi, bg: Background, p: float) -> float:
    q2p = bg.q0 ** (2 * p)
    spread = norm(phi, LINF) + norm(psi, LINF) + 2.0 * bg.sup_norm
    return 2.0 * (math.sqrt(2.0) * q2p + 2.0 * (2 * p + 1) * spread ** (2 * p)) * norm(phi - psi, L2)
