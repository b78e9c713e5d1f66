"""Conserved functionals of the lattice equations and drift monitors for them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .lattice import Boundary, ComplexField, IncompatibleFieldsError, L2, NormKind, norm, shift_backward, shift_forward
from .models import Background

__all__ = [
    "e_al",
    "e_al_complex",
    "e_dnls",
    "p_modified",
    "global_bound",
    "check_global_bound",
    "ConservedMonitor",
]


def e_al_complex(state: ComplexField) -> complex:
    """``h/2 sum conj(u_n) (u_{n+1} + u_{n-1})`` over a periodic lattice, unrounded."""
    if state.grid.boundary is not Boundary.PERIODIC:
        raise ValueError("E_AL is defined for periodic lattices only")
    u = state.values
    nb = shift_forward(u, True) + shift_backward(u, True)
    return 0.5 * state.grid.spacing * complex(np.vdot(u, nb))


def e_al(state: ComplexField) -> float:
    """Real part of the AL energy; raises if the imaginary residue is not round-off."""
    val = e_al_complex(state)
    scale = float(np.vdot(state.values, state.values).real) * state.grid.spacing
    if abs(val.imag) > 1e-12 * max(scale, 1e-300):
        raise ArithmeticError(f"E_AL has a non-negligible imaginary part {val.imag:g}")
    return val.real


def e_dnls(state: ComplexField) -> float:
    """``h sum |U_n|^2``."""
    u = state.values
    return state.grid.spacing * float(np.vdot(u, u).real)


def p_modified(Phi: ComplexField, bg: Background, h_weighted: bool = False) -> float:
    """``1/2 ||Phi||^2 + Re sum Phi_n conj(zeta_n)``.

    With ``h_weighted`` both sums carry the factor ``h`` and, on Dirichlet grids,
    run over interior nodes.
    """
    if Phi.grid != bg.grid:
        raise IncompatibleFieldsError("Phi and the background live on different grids")
    v, z = Phi.values, bg.zeta.values
    w = 1.0
    if h_weighted:
        w = Phi.grid.spacing
        if Phi.grid.boundary is Boundary.DIRICHLET:
            v, z = v[1:-1], z[1:-1]
    return w * (0.5 * float(np.vdot(v, v).real) + float(np.vdot(z, v).real))


def global_bound(Phi0: ComplexField, bg: Background) -> float:
    """Right side of ``||Phi(t)||^2 <= 2||Phi(0)||^2 + 4N||zeta||_inf^2 + 4||Phi(0)||_1 ||zeta||_inf``."""
    n = Phi0.grid.n_nodes
    z = bg.sup_norm
    return 2.0 * norm(Phi0, L2) ** 2 + 4.0 * n * z**2 + 4.0 * norm(Phi0, NormKind(1.0)) * z


def check_global_bound(Phi: ComplexField, Phi0: ComplexField, bg: Background) -> bool:
    return norm(Phi, L2) ** 2 <= global_bound(Phi0, bg) * (1.0 + 1e-12)


@dataclass
class ConservedMonitor:
    """Tracks ``max |value - reference| / max(|reference|, 1e-300)`` over observed states.

    The reference is the first observed value unless given explicitly.
    """

    name: str
    evaluator: Callable[[ComplexField], float]
    reference: Optional[float] = None
    max_rel_drift: float = 0.0
    values: list = field(default_factory=list, repr=False)

    def observe(self, state: ComplexField) -> float:
        val = float(self.evaluator(state))
        if self.reference is None:
            self.reference = val
        drift = abs(val - self.reference) / max(abs(self.reference), 1e-300)
        if not math.isnan(drift):
            self.max_rel_drift = max(self.max_rel_drift, drift)
        self.values.append(val)
        return val

    @classmethod
    def energy_al(cls):
        return cls("E_AL", e_al)

    @classmethod
    def energy_dnls(cls):
        return cls("E_DNLS", e_dnls)

    @classmethod
    def modified_power(cls, bg: Background, h_weighted: bool = False):
        return cls("P", lambda f: p_modified(f, bg, h_weighted))
