"""Radii, minimum guaranteed lifespans and proximity constants of the local theory.

The lifespan conditions are inequalities ``g(T) <= 0`` with ``g`` strictly
increasing, so the largest admissible ``T`` is found by bracket doubling and
bisection (:func:`max_admissible`).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Union

from .models import Background

__all__ = [
    "UnboundedLifespan",
    "BoundInapplicable",
    "BackgroundNorms",
    "DataConstants",
    "Variant",
    "max_admissible",
    "radius_rho_dnls",
    "lifespan_dnls",
    "lifespan_condition_dnls",
    "radius_rho_gal",
    "radius_varrho_gal",
    "lifespan_gal",
    "lifespan_condition_gal",
    "ProximityConstants",
    "proximity_constants",
    "proximity_bound",
]


class UnboundedLifespan(ArithmeticError):
    """The lifespan condition holds for every T (vanishing nonlinearity)."""


class BoundInapplicable(ValueError):
    """The proximity bound is requested outside its hypotheses."""


@dataclass(frozen=True)
class BackgroundNorms:
    """The background quantities entering the bounds."""

    q0: float
    sup: float
    prime: float = 0.0
    second: float = 0.0
    deviation: float = 0.0

    @classmethod
    def of(cls, bg: Union[Background, "BackgroundNorms"]) -> "BackgroundNorms":
        if isinstance(bg, BackgroundNorms):
            return bg
        return cls(bg.q0, bg.sup_norm, bg.prime_norm, bg.second_norm, bg.modulus_deviation)

    @classmethod
    def zero(cls) -> "BackgroundNorms":
        return cls(0.0, 0.0)


@dataclass(frozen=True)
class DataConstants:
    """Data normalized by ``epsilon``.

    ``A0 = ||phi(0)||/eps``, ``B = q0/eps``, ``B0 = ||zeta||_inf/eps``,
    ``B1 = ||zeta'||/eps^(p+1)``, ``B2 = || |zeta| - q0 ||/eps``, ``B3 = ||zeta''||/eps``.
    """

    epsilon: float
    A0: float
    B: float = 0.0
    B0: float = 0.0
    B1: float = 0.0
    B2: float = 0.0
    B3: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        for name in ("A0", "B", "B0", "B1", "B2", "B3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_data(cls, phi0_norm: float, bg, epsilon: float, p: float) -> "DataConstants":
        b = BackgroundNorms.of(bg)
        e = epsilon
        return cls(e, phi0_norm / e, b.q0 / e, b.sup / e, b.prime / e ** (p + 1), b.deviation / e, b.second / e, p)

    def rescaled(self, epsilon: float) -> "DataConstants":
        return DataConstants(epsilon, self.A0, self.B, self.B0, self.B1, self.B2, self.B3, self.p)

    @property
    def phi0_norm(self) -> float:
        return self.A0 * self.epsilon

    def background_norms(self) -> BackgroundNorms:
        e = self.epsilon
        return BackgroundNorms(self.B * e, self.B0 * e, self.B1 * e ** (self.p + 1), self.B3 * e, self.B2 * e)


def max_admissible(g: Callable[[float], float], t_start: float = 1e-12, rtol: float = 1e-12, max_doublings: int = 4000) -> float:
    """Largest ``T`` with ``g(T) <= 0`` for strictly increasing ``g``.

    The bracket is grown by doubling from ``t_start``; the returned value is the
    lower (admissible) end of the final bisection bracket.
    """
    lo, hi = 0.0, t_start
    for _ in range(max_doublings):
        if g(hi) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise UnboundedLifespan("condition holds on every bracket tried")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo


# -- gDNLS -----------------------------------------------------------------------

def radius_rho_dnls(T, phi0_norm, bg, gamma, K, p, kappa) -> float:
    b = BackgroundNorms.of(bg)
    return 2.0 * (
        phi0_norm
        + math.sqrt(2.0 * kappa) * b.prime * math.sqrt(T)
        + 2.0 ** (2 * p + 1.5) * abs(gamma) * K * (b.sup + b.deviation + b.q0) ** (2 * p + 1) * T
    )


def lifespan_condition_dnls(T, phi0_norm, bg, gamma, K, p, kappa) -> float:
    """Left side of the gDNLS lifespan condition minus one."""
    b = BackgroundNorms.of(bg)
    rho = radius_rho_dnls(T, phi0_norm, b, gamma, K, p, kappa)
    return 2.0 ** (2 * p + 2.5) * abs(gamma) * K * (rho + b.sup + b.q0) ** (2 * p) * T - 1.0


def lifespan_dnls(phi0_norm, bg, gamma, K, p, kappa) -> float:
    """Minimum guaranteed lifespan of modified gDNLS; raises :class:`UnboundedLifespan` if ``gamma K = 0``."""
    if gamma == 0 or K == 0:
        raise UnboundedLifespan("gamma K = 0: the linear flow exists for all time")
    b = BackgroundNorms.of(bg)
    return max_admissible(lambda T: lifespan_condition_dnls(T, phi0_norm, b, gamma, K, p, kappa))


# -- gAL --------------------------------------------------------------------------

class Variant(str, enum.Enum):
    X1 = "X1"
    X2 = "X2"


def _gal_radius(T, phi0_norm, b: BackgroundNorms, mu, p, kappa, last):
    return 2.0 * (
        phi0_norm
        + math.sqrt(2.0 * kappa) * b.prime * math.sqrt(T)
        + abs(mu) * (2.0 ** (2 * (p + 2)) * p * (b.sup + b.q0 + b.deviation) ** (2 * p + 1) + last) * T
    )


def radius_rho_gal(T, phi0_norm, bg, mu, p, kappa) -> float:
    """Radius for backgrounds with square-summable first differences."""
    b = BackgroundNorms.of(bg)
    return _gal_radius(T, phi0_norm, b, mu, p, kappa, 2.0 * b.q0 ** (2 * p) * b.prime)


def radius_varrho_gal(T, phi0_norm, bg, mu, p, kappa) -> float:
    """Radius for backgrounds whose second differences are also square-summable."""
    b = BackgroundNorms.of(bg)
    return _gal_radius(T, phi0_norm, b, mu, p, kappa, b.q0 ** (2 * p) * b.second)


def lifespan_condition_gal(T, phi0_norm, bg, mu, p, kappa, variant=Variant.X1) -> float:
    b = BackgroundNorms.of(bg)
    radius = radius_rho_gal if Variant(variant) is Variant.X1 else radius_varrho_gal
    rho = radius(T, phi0_norm, b, mu, p, kappa)
    return (
        2.0**3.5 * abs(mu)
        * (b.q0 ** (2 * p) + 2.0 ** (2 * p + 0.5) * (2 * p + 1) * (rho + b.sup) ** (2 * p))
        * T
        - 1.0
    )


def lifespan_gal(phi0_norm, bg, mu, p, kappa, variant=Variant.X1) -> float:
    if mu == 0:
        raise UnboundedLifespan("mu = 0: the linear flow exists for all time")
    b = BackgroundNorms.of(bg)
    return max_admissible(lambda T: lifespan_condition_gal(T, phi0_norm, b, mu, p, kappa, variant))


# -- proximity --------------------------------------------------------------------

@dataclass(frozen=True)
class ProximityConstants:
    """Constants of the gAL/gDNLS distance estimate.

    ``C`` is the constant at ``T = T_c``; :meth:`C_at` gives it for other ``T``.
    ``B1_1`` and ``B1_2`` are ``||zeta'|| / eps^(p+1)`` for ``p = p1`` and ``p = p2``.
    """

    p1: float
    p2: float
    epsilon: float
    mu: float
    gamma: float
    K: float
    kappa: float
    q0: float
    A0: float
    B: float
    B0: float
    B1_1: float
    B1_2: float
    B2: float
    B3: float
    M1: float
    M2: float
    A1: float
    A2: float
    C0: float
    C: float

    @property
    def T_c(self) -> float:
        e = self.epsilon
        return min(self.M1 / e ** (2 * self.p1), self.M2 / e ** (2 * self.p2))

    @property
    def scale(self) -> float:
        e = self.epsilon
        return max(e ** (2 * self.p1 + 1), e ** (2 * self.p2 + 1))

    def C_at(self, T: float) -> float:
        p1, p2 = self.p1, self.p2
        A1, A2, B, B0, B2, B3 = self.A1, self.A2, self.B, self.B0, self.B2, self.B3
        al = abs(self.mu) * (
            8.0 * p1 * (A1 + B0 + B) ** (2 * p1) * (A1 + B2)
            + 4.0 * B ** (2 * p1) * A1
            + B ** (2 * p1) * B3
        )
        dn = 2.0 * math.sqrt(2.0) * abs(self.gamma) * self.K * (A2 + B0 + B) ** (2 * p2) * (A2 + B2)
        return self.C0 + T * (al + dn)

    def slack(self) -> tuple:
        """Values of ``1 - LHS`` of the two conditions on ``M1`` and ``M2`` (both ``>= 0``)."""
        return (-_cond_M1(self.M1, self), -_cond_M2(self.M2, self))


def _A1(M1, c) -> float:
    p1 = c.p1
    return 2.0 * (
        c.A0
        + math.sqrt(2.0 * c.kappa) * c.B1_1 * math.sqrt(M1)
        + abs(c.mu) * (2.0 ** (2 * (p1 + 2)) * p1 * (c.B0 + c.B + c.B2) ** (2 * p1 + 1) + c.B ** (2 * p1) * c.B3) * M1
    )


def _A2(M2, c) -> float:
    p2 = c.p2
    return 2.0 * (
        c.A0
        + math.sqrt(2.0 * c.kappa) * c.B1_2 * math.sqrt(M2)
        + 2.0 ** (2 * p2 + 1.5) * abs(c.gamma) * c.K * (c.B0 + c.B2 + c.B) ** (2 * p2 + 1) * M2
    )


def _cond_M1(M1, c) -> float:
    p1 = c.p1
    A1 = _A1(M1, c)
    return 2.0**3.5 * abs(c.mu) * (c.q0 ** (2 * p1) + 2.0 ** (2 * p1 + 0.5) * (2 * p1 + 1) * (A1 + c.B0) ** (2 * p1)) * M1 - 1.0


def _cond_M2(M2, c) -> float:
    p2 = c.p2
    A2 = _A2(M2, c)
    return 2.0 ** (2 * p2 + 2.5) * abs(c.gamma) * c.K * (A2 + c.B0 + c.B) ** (2 * p2) * M2 - 1.0


@dataclass
class _Partial:
    p1: float
    p2: float
    mu: float
    gamma: float
    K: float
    kappa: float
    q0: float
    A0: float
    B: float
    B0: float
    B1_1: float
    B1_2: float
    B2: float
    B3: float


def proximity_constants(phi0_norm, bg, epsilon, p1, p2, mu=1.0, gamma=1.0, K=None, kappa=1.0, C0=0.0) -> ProximityConstants:
    """Pick the largest ``M1``, ``M2`` admitted by their conditions and evaluate ``A1``, ``A2``, ``C``.

    ``A1`` depends on ``M1`` only and ``A2`` on ``M2`` only, so each condition is a
    monotone scalar inequality solved by bisection. ``K`` defaults to ``p2``.
    """
    if mu == 0 or gamma == 0:
        raise UnboundedLifespan("vanishing nonlinearity")
    b = BackgroundNorms.of(bg)
    e = epsilon
    K = float(p2 if K is None else K)
    part = _Partial(
        p1, p2, mu, gamma, K, kappa, b.q0,
        phi0_norm / e, b.q0 / e, b.sup / e, b.prime / e ** (p1 + 1), b.prime / e ** (p2 + 1),
        b.deviation / e, b.second / e,
    )
    M1 = max_admissible(lambda m: _cond_M1(m, part))
    M2 = max_admissible(lambda m: _cond_M2(m, part))
    fields = dict(vars(part))
    pc = ProximityConstants(
        epsilon=e, M1=M1, M2=M2, A1=_A1(M1, part), A2=_A2(M2, part), C0=C0, C=0.0, **fields
    )
    return ProximityConstants(**{**vars(pc), "C": pc.C_at(pc.T_c)})


def proximity_bound(pc: ProximityConstants, T: float, eps: float) -> float:
    """``C(T) max(eps^(2p1+1), eps^(2p2+1))`` for ``0 <= T <= T_c``."""
    if not math.isclose(eps, pc.epsilon, rel_tol=1e-12):
        raise BoundInapplicable("constants were computed for a different epsilon")
    if T < 0 or T > pc.T_c * (1.0 + 1e-12):
        raise BoundInapplicable(f"T={T} lies outside [0, T_c={pc.T_c}]")
    s1, s2 = pc.slack()
    if s1 < 0 or s2 < 0:
        raise BoundInapplicable("lifespan constants violate their conditions")
    return pc.C_at(T) * pc.scale
