"""Discrete fractional g-Laplacian: pairings, gradients and the nonlocal normal derivative.

Sums run over ordered pairs ``(i, j)``, ``i != j``; this carries the factor 2
in front of the principal value. With that convention the star pairing
splits exactly as

    pairing_star(u, v) = sum_interior v_i L_i(u) h + sum_exterior v_i N(u)(x_i) h

where ``L_i`` is the interior row of the operator and ``N`` the normal
derivative (see :func:`interior_operator` and :func:`normal_derivative`).
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .domain import BC, Field, Grid1D
from .modular import (BULK, GAGLIARDO_FULL, GAGLIARDO_STAR, Modular, ModularKind, SumModular,
                      exterior_weight, robin)
from .young import YoungFunction

__all__ = [
    "pairing_full",
    "pairing_star",
    "normal_derivative",
    "interior_operator",
    "grad_bulk",
    "grad_gagliardo",
    "Energy",
    "Bulk",
]


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, Field) else np.asarray(u, dtype=float)


def _require_dirichlet(*fields):
    for f in fields:
        if isinstance(f, Field) and f.bc is not BC.DIRICHLET:
            raise ValueError("full pairing needs Dirichlet fields")


def pairing_full(F: YoungFunction, grid: Grid1D, u, v, s: float) -> float:
    """``sum_{i != j} g(|D_s u|) sign(D_s u) D_s v w`` over every pair of nodes."""
    _require_dirichlet(u, v)
    a, b = _values(u), _values(v)
    return (kernels.pairing(F, a, b, grid.star_pairs, s)
            + kernels.pairing(F, a, b, grid.extext_pairs, s))


def pairing_star(F: YoungFunction, grid: Grid1D, u, v, s: float) -> float:
    """As :func:`pairing_full` but skipping pairs with both nodes exterior."""
    return kernels.pairing(F, _values(u), _values(v), grid.star_pairs, s)


_GEOMETRY: dict = {}


def _row_geometry(grid: Grid1D, s: float, rows: np.ndarray, cols: np.ndarray):
    """``|x_i - x_j|^-s`` and ``h / |x_i - x_j|^(1+s)`` (zero where i = j), cached."""
    key = (grid, float(s), rows.tobytes(), cols.tobytes())
    geo = _GEOMETRY.get(key)
    if geo is None:
        x = np.asarray(grid.x)
        dist = np.abs(x[rows, None] - x[None, cols])
        same = rows[:, None] == cols[None, :]
        dist[same] = 1.0
        inv = dist**-s
        coef = grid.h * inv / dist
        coef[same] = 0.0
        if len(_GEOMETRY) >= 16:
            _GEOMETRY.clear()
        geo = _GEOMETRY[key] = (inv, coef)
    return geo


def _row_flux(F, grid, u, s, rows, cols):
    """``2 sum_{j in cols, j != i} g(|D_s u|) sign(u_i - u_j) h / |x_i - x_j|^{1+s}`` per row."""
    inv, coef = _row_geometry(grid, s, rows, cols)
    if kernels.BACKEND == "cython" and F.is_powersum:
        return kernels._ext.row_flux(np.ascontiguousarray(u, dtype=float), rows, cols,
                                     inv, coef, F.coefs, F.exps)
    diff = u[rows, None] - u[None, cols]
    term = np.copysign(F.g(np.abs(diff) * inv), diff) * coef
    return 2.0 * term.sum(axis=1)


def normal_derivative(F: YoungFunction, grid: Grid1D, u, s: float, node=None):
    """Nonlocal normal derivative at exterior nodes.

    ``N(u)(x) = 2 sum_{j interior} g(|D_s u(x, x_j)|) sign(u(x) - u(x_j)) h / |x - x_j|^{1+s}``.
    The factor 2 matches the ordered-pair convention of the operator. ``node``
    may be a single exterior index, an array of them, or ``None`` for all.
    """
    v = _values(u)
    if node is None:
        rows = grid.exterior_idx
    else:
        rows = np.atleast_1d(np.asarray(node, dtype=np.intp))
        if np.any(grid.interior[rows]):
            raise IndexError("normal derivative is defined on exterior nodes only")
    out = _row_flux(F, grid, v, s, rows, grid.interior_idx)
    return float(out[0]) if node is not None and np.ndim(node) == 0 else out


def interior_operator(F: YoungFunction, grid: Grid1D, u, s: float) -> np.ndarray:
    """Interior rows ``L_i(u) = 2 sum_{j != i} g(|D_s u|) sign(u_i - u_j) h / |x_i - x_j|^{1+s}``."""
    v = _values(u)
    return _row_flux(F, grid, v, s, grid.interior_idx, np.arange(grid.n_nodes))


def grad_bulk(F: YoungFunction, grid: Grid1D, u) -> np.ndarray:
    """Gradient of ``sum_interior G(|u_i|) h``; zero on the exterior."""
    v = _values(u)
    out = np.zeros(grid.n_nodes)
    sl = grid.interior_slice
    out[sl] = np.sign(v[sl]) * F.g(np.abs(v[sl])) * grid.h
    return out


def grad_gagliardo(F: YoungFunction, grid: Grid1D, u, s: float,
                   kind: ModularKind = GAGLIARDO_FULL, beta=None) -> np.ndarray:
    """Dual vector of ``v -> pairing(u, v)`` (plus the Robin exterior term when ``beta`` is given).

    Dirichlet fields get zero exterior entries since variations vanish there.
    """
    if kind.tag not in ("full", "star"):
        raise ValueError(f"expected a Gagliardo kind, got {kind!r}")
    v = _values(u)
    if kind.tag == "full":
        _require_dirichlet(u)
        if beta is not None:
            raise ValueError("the Robin term goes with the star pairing")
    out = np.zeros(grid.n_nodes)
    kernels.gradient(F, v, grid.star_pairs, s, out)
    if kind.tag == "full":
        kernels.gradient(F, v, grid.extext_pairs, s, out)
    if beta is not None:
        b = exterior_weight(grid, beta)
        E = grid.exterior_idx
        out[E] += b[E] * np.sign(v[E]) * F.g(np.abs(v[E])) * grid.h
    if kind.tag == "full" or (isinstance(u, Field) and u.bc is BC.DIRICHLET):
        out[grid.exterior_idx] = 0.0
    return out


class Bulk:
    """``I(u) = sum_interior G(|u_i|) h`` with its gradient and scaling profile."""

    def __init__(self, F: YoungFunction, grid: Grid1D):
        self.F, self.grid = F, grid
        self.modular = Modular(F, grid, BULK)

    def __call__(self, u) -> float:
        return self.modular(u)

    def grad(self, u) -> np.ndarray:
        return grad_bulk(self.F, self.grid, u)

    def profile(self, u):
        return self.modular.profile(u)

    def pairing(self, u, v) -> float:
        """``<I'(u), v>``."""
        return float(np.dot(self.grad(u), _values(v)))


class Energy:
    """The nonlocal energy ``J`` attached to a boundary condition.

    Dirichlet uses the full Gagliardo modular on fields vanishing outside;
    its exterior-exterior pairs contribute nothing, so only the star pairs are
    visited. Neumann uses the star modular; Robin adds the weighted exterior
    term ``sum beta_i G(|u_i|) h``.
    """

    def __init__(self, F: YoungFunction, grid: Grid1D, s: float, bc=BC.DIRICHLET, beta=None):
        self.F, self.grid, self.s = F, grid, float(s)
        self.bc = BC.parse(bc)
        if self.bc is BC.ROBIN:
            if beta is None:
                raise ValueError("Robin energy needs beta")
            self.beta = exterior_weight(grid, beta)
            self.modular = SumModular(Modular(F, grid, GAGLIARDO_STAR, s), Modular(F, grid, robin(self.beta)))
        else:
            if beta is not None and np.any(np.asarray(beta) != 0):
                raise ValueError(f"beta is only meaningful for Robin, got bc={self.bc.value}")
            self.beta = None
            self.modular = Modular(F, grid, GAGLIARDO_STAR, s)
        self.free = np.ones(grid.n_nodes, dtype=bool)
        if self.bc is BC.DIRICHLET:
            self.free = grid.interior.copy()

    def project(self, v: np.ndarray) -> np.ndarray:
        """Zero the entries that are not degrees of freedom."""
        if self.bc is BC.DIRICHLET:
            v = np.where(self.free, v, 0.0)
        return v

    def __call__(self, u) -> float:
        return self.modular(self.project(_values(u)))

    def grad(self, u) -> np.ndarray:
        v = self.project(_values(u))
        out = np.zeros(self.grid.n_nodes)
        kernels.gradient(self.F, v, self.grid.star_pairs, self.s, out)
        if self.beta is not None:
            E = self.grid.exterior_idx
            out[E] += self.beta[E] * np.sign(v[E]) * self.F.g(np.abs(v[E])) * self.grid.h
        return self.project(out)

    def profile(self, u):
        return self.modular.profile(self.project(_values(u)))

    def pairing(self, u, v) -> float:
        """``<J'(u), v>``; pair term plus the Robin exterior term."""
        a, b = self.project(_values(u)), self.project(_values(v))
        val = kernels.pairing(self.F, a, b, self.grid.star_pairs, self.s)
        if self.beta is not None:
            E = self.grid.exterior_idx
            val += float(np.sum(self.beta[E] * np.sign(a[E]) * self.F.g(np.abs(a[E])) * b[E])) * self.grid.h
        return val

    def rayleigh_numerator(self, u) -> float:
        """``sum g(|D_s u|) |D_s u| w`` plus the exterior term; equals ``<J'(u), u>``."""
        a = self.project(_values(u))
        val = kernels.rayleigh_numerator(self.F, a, self.grid.star_pairs, self.s)
        if self.beta is not None:
            E = self.grid.exterior_idx
            t = np.abs(a[E])
            val += float(np.sum(self.beta[E] * self.F.g(t) * t)) * self.grid.h
        return val

    def field(self, values) -> Field:
        return Field(self.grid, values, self.bc)


def kind_for(bc) -> ModularKind:
    return GAGLIARDO_FULL if BC.parse(bc) is BC.DIRICHLET else GAGLIARDO_STAR
