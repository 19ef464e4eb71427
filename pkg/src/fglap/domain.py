"""Truncated one-dimensional grids, fields and singular pair weights.

The computational box is ``[lo - R, hi + R]`` cut into cells of width ``h``;
every node is a cell midpoint. Nodes are stored left to right, so the
interior nodes form one contiguous block.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "BC",
    "Grid1D",
    "PairSet",
    "Field",
    "build_grid",
    "holder_quotient",
    "pair_weight",
]


class BC(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    ROBIN = "robin"

    @classmethod
    def parse(cls, value) -> "BC":
        if isinstance(value, BC):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown boundary condition {value!r}") from None


class PairSet:
    """Unordered node pairs ``i < j`` with their distance and weight ``h^2 / |x_i - x_j|``.

    Sums over ordered pairs are twice the sums over these unordered pairs.
    """

    def __init__(self, i: np.ndarray, j: np.ndarray, x: np.ndarray, h: float):
        self.i = np.ascontiguousarray(i, dtype=np.intp)
        self.j = np.ascontiguousarray(j, dtype=np.intp)
        self.dist = np.ascontiguousarray(np.abs(x[self.j] - x[self.i]))
        self.w = h * h / self.dist
        self._ds: dict[float, tuple] = {}

    def __len__(self) -> int:
        return self.i.size

    def ds(self, s: float) -> np.ndarray:
        """``|x_i - x_j|**s``, cached per exponent."""
        return self._scaled(s)[0]

    def inv_ds(self, s: float) -> np.ndarray:
        """``|x_i - x_j|**-s``."""
        return self._scaled(s)[1]

    def w_ds(self, s: float) -> np.ndarray:
        """``w / |x_i - x_j|**s``."""
        return self._scaled(s)[2]

    def _scaled(self, s: float):
        s = float(s)
        out = self._ds.get(s)
        if out is None:
            ds = np.ascontiguousarray(self.dist**s)
            out = (ds, 1.0 / ds, self.w / ds)
            for a in out:
                a.flags.writeable = False
            self._ds[s] = out
        return out


@dataclass(frozen=True)
class Grid1D:
    lo: float
    hi: float
    n_interior: int
    collar: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got ({self.lo}, {self.hi})")
        if self.n_interior < 4:
            raise ValueError(f"n_interior must be >= 4, got {self.n_interior}")
        if not self.collar > 0:
            raise ValueError(f"collar must be > 0, got {self.collar}")

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / self.n_interior

    @property
    def R(self) -> float:
        return self.collar * (self.hi - self.lo)

    @property
    def n_ext_side(self) -> int:
        # guard against R/h landing a hair above an integer
        return int(math.ceil(self.R / self.h - 1e-9))

    @property
    def n_exterior(self) -> int:
        return 2 * self.n_ext_side

    @property
    def n_nodes(self) -> int:
        return self.n_interior + self.n_exterior

    @cached_property
    def x(self) -> np.ndarray:
        m = self.n_ext_side
        k = np.arange(-m, self.n_interior + m)
        x = self.lo + (k + 0.5) * self.h
        x.flags.writeable = False
        return x

    @cached_property
    def interior(self) -> np.ndarray:
        mask = np.zeros(self.n_nodes, dtype=bool)
        mask[self.interior_slice] = True
        mask.flags.writeable = False
        return mask

    @property
    def exterior(self) -> np.ndarray:
        return ~self.interior

    @property
    def interior_slice(self) -> slice:
        m = self.n_ext_side
        return slice(m, m + self.n_interior)

    @cached_property
    def interior_idx(self) -> np.ndarray:
        return np.flatnonzero(self.interior)

    @cached_property
    def exterior_idx(self) -> np.ndarray:
        return np.flatnonzero(~self.interior)

    # -- pair sets ------------------------------------------------------------

    @cached_property
    def star_pairs(self) -> PairSet:
        """Pairs with at least one interior node."""
        I = self.interior_idx
        E = self.exterior_idx
        ii, jj = np.triu_indices(I.size, k=1)
        a = [I[ii]]
        b = [I[jj]]
        ie, ee = np.meshgrid(I, E, indexing="ij")
        lo_ = np.minimum(ie, ee).ravel()
        hi_ = np.maximum(ie, ee).ravel()
        a.append(lo_)
        b.append(hi_)
        i = np.concatenate(a)
        j = np.concatenate(b)
        order = np.lexsort((j, i))
        return PairSet(i[order], j[order], self.x, self.h)

    @cached_property
    def extext_pairs(self) -> PairSet:
        """Pairs with both nodes exterior."""
        E = self.exterior_idx
        ii, jj = np.triu_indices(E.size, k=1)
        return PairSet(E[ii], E[jj], self.x, self.h)

    @cached_property
    def interior_pairs(self) -> PairSet:
        I = self.interior_idx
        ii, jj = np.triu_indices(I.size, k=1)
        return PairSet(I[ii], I[jj], self.x, self.h)

    def describe(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "n_interior": self.n_interior,
                "collar": self.collar, "h": self.h, "R": self.R,
                "n_exterior": self.n_exterior}


def build_grid(lo: float, hi: float, n_interior: int, collar: float = 4.0) -> Grid1D:
    """Uniform midpoint grid on (lo, hi) plus ``ceil(R/h)`` collar cells per side."""
    if not float(collar) > 0:
        raise ValueError(f"collar must be > 0, got {collar}")
    if int(n_interior) < 4:
        raise ValueError(f"n_interior must be >= 4, got {n_interior}")
    return Grid1D(float(lo), float(hi), int(n_interior), float(collar))


class Field:
    """Node values with a boundary-condition tag.

    Dirichlet fields vanish on the collar; the values array is read-only,
    so every arithmetic result is a fresh Field that re-applies the tag.
    """

    __slots__ = ("grid", "values", "bc")

    def __init__(self, grid: Grid1D, values, bc=BC.DIRICHLET):
        bc = BC.parse(bc)
        v = np.array(values, dtype=float)
        if v.shape == (grid.n_interior,):
            full = np.zeros(grid.n_nodes)
            full[grid.interior_slice] = v
            v = full
        if v.shape != (grid.n_nodes,):
            raise ValueError(f"expected {grid.n_nodes} node values, got shape {v.shape}")
        if bc is BC.DIRICHLET:
            v[~grid.interior] = 0.0
        v.flags.writeable = False
        self.grid = grid
        self.values = v
        self.bc = bc

    @classmethod
    def from_function(cls, grid: Grid1D, fn, bc=BC.DIRICHLET) -> "Field":
        return cls(grid, fn(np.asarray(grid.x)), bc)

    @property
    def interior_values(self) -> np.ndarray:
        return self.values[self.grid.interior_slice]

    def with_values(self, values) -> "Field":
        return Field(self.grid, values, self.bc)

    def __neg__(self):
        return self.with_values(-self.values)

    def __abs__(self):
        return self.with_values(np.abs(self.values))

    def __add__(self, other):
        other = other.values if isinstance(other, Field) else other
        return self.with_values(self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, Field) else other
        return self.with_values(self.values - other)

    def __mul__(self, t):
        return self.with_values(self.values * float(t))

    __rmul__ = __mul__

    def __truediv__(self, t):
        return self.with_values(self.values / float(t))

    def __repr__(self):
        return f"Field(bc={self.bc.value}, n={self.values.size})"


def holder_quotient(u: Field, i: int, j: int, s: float) -> float:
    """``(u_i - u_j) / |x_i - x_j|**s``."""
    if i == j:
        raise ValueError("degenerate pair: i == j")
    x = u.grid.x
    return float((u.values[i] - u.values[j]) / abs(x[i] - x[j]) ** s)


def pair_weight(grid: Grid1D, i: int, j: int) -> float:
    """Midpoint-rule weight of ``dx dy / |x - y|`` on the cell pair (i, j)."""
    if i == j:
        raise ValueError("degenerate pair: i == j")
    return grid.h**2 / abs(float(grid.x[i] - grid.x[j]))
