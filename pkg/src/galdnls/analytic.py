"""Closed-form AL solutions (bright one-soliton, discrete Peregrine) and the initial
profiles used by the experiments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import ComplexField, LatticeGrid

__all__ = [
    "sech",
    "SolitonParams",
    "PeregrineParams",
    "one_soliton",
    "one_soliton_dt",
    "peregrine",
    "peregrine_dt",
    "ic_sech_background",
    "ic_continuum_sech",
    "ic_zero_background_sech",
]


def sech(x):
    """Overflow-free hyperbolic secant, ``2 e^{-|x|} / (1 + e^{-2|x|})``."""
    a = np.exp(-np.abs(np.asarray(x, dtype=float)))
    return 2.0 * a / (1.0 + a * a)


def _check_spacing(grid: LatticeGrid, h: float):
    if not math.isclose(grid.spacing, h, rel_tol=1e-12):
        raise ValueError(f"grid spacing {grid.spacing} differs from solution parameter h={h}")


def _node_index(grid: LatticeGrid) -> np.ndarray:
    # Physical index n = x_n / h, so that n = 0 sits at x = 0.
    return grid.x / grid.spacing


@dataclass(frozen=True)
class SolitonParams:
    """Carrier wavenumber ``alpha``, inverse width ``beta``, spacing ``h`` and ``mu``.

    ``omega`` and the velocity ``c`` follow from the dispersion relation; at
    ``beta = 0`` the velocity takes its limit ``2 sin(alpha h) / h``.
    """

    alpha: float = 0.0
    beta: float = 1.0
    h: float = 1.0
    mu: float = 1.0
    omega: float = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        if not -math.pi <= self.alpha <= math.pi:
            raise ValueError("alpha must lie in [-pi, pi]")
        if self.beta < 0 or self.h <= 0 or self.mu <= 0:
            raise ValueError("need beta >= 0, h > 0, mu > 0")
        a, b, h = self.alpha, self.beta, self.h
        omega = -2.0 * (math.cos(a * h) * math.cosh(b * h) - 1.0) / h**2
        if b == 0.0:
            c = 2.0 * math.sin(a * h) / h
        else:
            c = 2.0 * math.sin(a * h) * math.sinh(b * h) / (b * h**2)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "c", c)

    @property
    def amplitude(self) -> float:
        return math.sqrt(2.0) * math.sinh(self.beta * self.h) / (self.h * math.sqrt(self.mu))


@dataclass(frozen=True)
class PeregrineParams:
    q: float = 1.0
    h: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if self.q <= 0 or self.h <= 0 or self.mu <= 0:
            raise ValueError("q, h and mu must be positive")

    @property
    def background_amplitude(self) -> float:
        return math.sqrt(2.0) * self.q / (self.h * math.sqrt(self.mu))


def _soliton_parts(n, t, sp: SolitonParams):
    arg = sp.beta * (sp.h * n - sp.c * t)
    phase = np.exp(1j * (sp.alpha * sp.h * n - sp.omega * t))
    return arg, phase


def one_soliton(grid: LatticeGrid, t: float, params: SolitonParams) -> ComplexField:
    """Bright AL soliton sampled at ``n = x_n / h``."""
    _check_spacing(grid, params.h)
    arg, phase = _soliton_parts(_node_index(grid), t, params)
    return ComplexField(params.amplitude * sech(arg) * phase, grid)


def one_soliton_dt(grid: LatticeGrid, t: float, params: SolitonParams) -> ComplexField:
    """Exact time derivative of :func:`one_soliton`."""
    _check_spacing(grid, params.h)
    arg, phase = _soliton_parts(_node_index(grid), t, params)
    s = sech(arg)
    # d/dt sech(beta(hn - ct)) = beta c sech tanh
    ds = params.beta * params.c * s * np.tanh(arg)
    return ComplexField(params.amplitude * (ds - 1j * params.omega * s) * phase, grid)


def _peregrine_parts(n, t, pp: PeregrineParams):
    q, h = pp.q, pp.h
    q2 = q * q
    num = 4.0 * (1.0 + q2) * (1.0 + 4j * q2 * t / h**2)
    den = 1.0 + 4.0 * n**2 * q2 + 16.0 * q2 * q2 * (1.0 + q2) * t**2 / h**4
    rot = np.exp(2j * q2 * t / h**2)
    return num, den, rot


def peregrine(grid: LatticeGrid, t: float, params: PeregrineParams) -> ComplexField:
    """Rational (Peregrine-type) AL solution on a background of modulus ``sqrt(2) q / (h sqrt(mu))``."""
    _check_spacing(grid, params.h)
    num, den, rot = _peregrine_parts(_node_index(grid), t, params)
    return ComplexField(params.background_amplitude * (1.0 - num / den) * rot, grid)


def peregrine_dt(grid: LatticeGrid, t: float, params: PeregrineParams) -> ComplexField:
    _check_spacing(grid, params.h)
    q, h = params.q, params.h
    q2 = q * q
    num, den, rot = _peregrine_parts(_node_index(grid), t, params)
    dnum = 16j * (1.0 + q2) * q2 / h**2
    dden = 32.0 * q2 * q2 * (1.0 + q2) * t / h**4
    dfrac = (dnum * den - num * dden) / den**2
    omega = 2.0 * q2 / h**2
    val = (1.0 - num / den)
    return ComplexField(params.background_amplitude * (-dfrac + 1j * omega * val) * rot, grid)


def ic_sech_background(grid: LatticeGrid, q0: float) -> ComplexField:
    """``q0 (1 + i sech(n))``: localized bump on a constant background."""
    return ComplexField(q0 * (1.0 + 1j * sech(_node_index(grid))), grid)


def ic_continuum_sech(grid: LatticeGrid, a: float) -> ComplexField:
    """Samples of ``1 + i a sech(x)`` at the physical coordinates ``x_n``."""
    return ComplexField(1.0 + 1j * a * sech(grid.x), grid)


def ic_zero_background_sech(grid: LatticeGrid, A: float) -> ComplexField:
    """``i A sech(n)`` with vanishing background."""
    return ComplexField(1j * A * sech(_node_index(grid)), grid)
