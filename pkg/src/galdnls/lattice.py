"""Uniform 1D lattices, complex fields on them and the discrete operators/norms used
throughout the package.

Fields are thin wrappers around ``numpy`` arrays that remember their grid, so that
boundary rules (periodic wrap or clamped Dirichlet ends) are applied consistently.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Boundary",
    "LatticeGrid",
    "ComplexField",
    "NormKind",
    "IncompatibleFieldsError",
    "shift_forward",
    "shift_backward",
    "laplacian",
    "backward_diff",
    "norm",
    "distance",
    "L2",
    "L3",
    "L4",
    "LINF",
]


class IncompatibleFieldsError(ValueError):
    """Raised when two fields living on different grids are combined."""


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class LatticeGrid:
    """Equispaced nodes ``x_n = -L + n h``, ``n = 0..N-1`` with ``2L = N h``.

    For Dirichlet grids nodes ``0`` and ``N-1`` are the clamped boundary nodes.
    """

    n_nodes: int
    spacing: float = 1.0
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 3:
            raise ValueError(f"n_nodes must be an integer >= 3, got {self.n_nodes!r}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")
        object.__setattr__(self, "n_nodes", int(self.n_nodes))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @classmethod
    def from_half_length(cls, half_length, spacing=1.0, boundary=Boundary.PERIODIC):
        n = round(2.0 * half_length / spacing)
        if not math.isclose(n * spacing, 2.0 * half_length, rel_tol=1e-9):
            raise ValueError(f"2L={2 * half_length} is not a multiple of h={spacing}")
        return cls(n, spacing, boundary)

    @property
    def half_length(self) -> float:
        return 0.5 * self.n_nodes * self.spacing

    @property
    def kappa(self) -> float:
        return 1.0 / self.spacing**2

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def x(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.n_nodes)

    def zeros(self) -> "ComplexField":
        return ComplexField(np.zeros(self.n_nodes, dtype=complex), self)

    def field(self, values) -> "ComplexField":
        return ComplexField(values, self)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex amplitudes ``values[n]`` on the nodes of ``grid``."""

    values: np.ndarray
    grid: LatticeGrid = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n_nodes,):
            raise ValueError(f"field has shape {v.shape}, grid expects ({self.grid.n_nodes},)")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.grid.n_nodes

    def _check(self, other) -> np.ndarray:
        if isinstance(other, ComplexField):
            if other.grid != self.grid:
                raise IncompatibleFieldsError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return ComplexField(self.values + self._check(other), self.grid)

    __radd__ = __add__

    def __sub__(self, other):
        return ComplexField(self.values - self._check(other), self.grid)

    def __rsub__(self, other):
        return ComplexField(self._check(other) - self.values, self.grid)

    def __mul__(self, other):
        return ComplexField(self.values * self._check(other), self.grid)

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexField(-self.values, self.grid)

    def conj(self) -> "ComplexField":
        return ComplexField(self.values.conj(), self.grid)

    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def check_clamped(self) -> "ComplexField":
        """Raise unless a Dirichlet state vanishes on both boundary nodes."""
        if self.grid.boundary is Boundary.DIRICHLET and (self.values[0] != 0 or self.values[-1] != 0):
            raise ValueError("Dirichlet states must vanish on the boundary nodes")
        return self


def _values(f):
    return f.values if isinstance(f, ComplexField) else np.asarray(f)


def shift_forward(a: np.ndarray, periodic: bool, fill=0.0) -> np.ndarray:
    """Return ``a_{n+1}`` along the last axis; off-lattice entries take ``fill``."""
    if periodic:
        return np.roll(a, -1, axis=-1)
    out = np.empty_like(a)
    out[..., :-1] = a[..., 1:]
    out[..., -1] = fill
    return out


def shift_backward(a: np.ndarray, periodic: bool, fill=0.0) -> np.ndarray:
    """Return ``a_{n-1}`` along the last axis; off-lattice entries take ``fill``."""
    if periodic:
        return np.roll(a, 1, axis=-1)
    out = np.empty_like(a)
    out[..., 1:] = a[..., :-1]
    out[..., 0] = fill
    return out


def _unchecked(values, grid) -> ComplexField:
    # Skips the copy/shape validation for operator outputs on a known grid.
    obj = object.__new__(ComplexField)
    v = np.asarray(values, dtype=complex)
    v.flags.writeable = False
    object.__setattr__(obj, "values", v)
    object.__setattr__(obj, "grid", grid)
    return obj


def laplacian(f: ComplexField) -> ComplexField:
    """Unscaled second difference ``f_{n+1} + f_{n-1} - 2 f_n`` (multiply by kappa)."""
    v, periodic = f.values, f.grid.periodic
    out = shift_forward(v, periodic) + shift_backward(v, periodic) - 2.0 * v
    return _unchecked(out, f.grid)


def backward_diff(f: ComplexField) -> ComplexField:
    """``f_n - f_{n-1}``; on Dirichlet grids ``f_{-1}`` is taken as 0."""
    v = f.values
    return _unchecked(v - shift_backward(v, f.grid.periodic), f.grid)


@dataclass(frozen=True)
class NormKind:
    """Exponent ``r`` in ``[1, inf]`` and whether sums carry the spacing weight ``h``."""

    exponent: float = 2.0
    h_weighted: bool = False

    def __post_init__(self):
        r = float(self.exponent)
        if not (r >= 1.0):
            raise ValueError(f"norm exponent must be >= 1, got {self.exponent!r}")
        object.__setattr__(self, "exponent", r)

    @property
    def is_sup(self) -> bool:
        return math.isinf(self.exponent)

    @property
    def label(self) -> str:
        r = "inf" if self.is_sup else f"{self.exponent:g}"
        return f"{'L' if self.h_weighted and not self.is_sup else 'l'}{r}"


L2 = NormKind(2.0)
L3 = NormKind(3.0)
L4 = NormKind(4.0)
LINF = NormKind(math.inf)


def norm_array(v: np.ndarray, kind: NormKind, h: float = 1.0) -> float:
    a = np.abs(v)
    if kind.is_sup:
        return float(a.max(initial=0.0))
    w = h if kind.h_weighted else 1.0
    r = kind.exponent
    if r == 1.0:
        return float(w * a.sum())
    # scale by the max to avoid under/overflow of |a|^r
    m = float(a.max(initial=0.0))
    if m == 0.0 or not math.isfinite(m):
        return m
    a = a / m
    if r == 2.0:
        return float(m * math.sqrt(w * np.dot(a, a)))
    return float(m * (w * np.sum(a**r)) ** (1.0 / r))


def norm(f: ComplexField, kind: NormKind = L2) -> float:
    """``(sum_n w |f_n|^r)^(1/r)`` with ``w = h`` when h-weighted, else 1; sup for r=inf.

    On Dirichlet grids the weighted sums run over interior nodes only; the boundary
    values vanish so unweighted sums are unaffected.
    """
    v = _values(f)
    grid = f.grid if isinstance(f, ComplexField) else None
    h = grid.spacing if grid is not None else 1.0
    if grid is not None and grid.boundary is Boundary.DIRICHLET and kind.h_weighted:
        v = v[1:-1]
    return norm_array(v, kind, h)


def distance(f: ComplexField, g: ComplexField, kind: NormKind = L2) -> float:
    if isinstance(g, ComplexField) and isinstance(f, ComplexField) and f.grid != g.grid:
        raise IncompatibleFieldsError("cannot measure distance between fields on different grids")
    return norm(_unchecked(_values(f) - _values(g), f.grid), kind)
