"""Modulars (bulk, Gagliardo full/star, Robin exterior), Luxemburg norms and Hölder checks.

Every modular is available both as a plain function and as a callable
:class:`Modular` evaluator. Evaluators also expose :meth:`Modular.profile`,
the scalar map ``t -> modular(t * u)``, which is what scaling root-finds
(Luxemburg norms, constraint rescaling) work on. For power-sum Young
functions the profile costs one pass over the pairs; after that each
evaluation is a handful of flops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .domain import BC, Field, Grid1D
from .young import YoungFunction, complement

__all__ = [
    "ModularKind",
    "BULK",
    "GAGLIARDO_FULL",
    "GAGLIARDO_STAR",
    "robin",
    "Modular",
    "ScalingProfile",
    "exterior_weight",
    "modular_bulk",
    "modular_gagliardo",
    "modular_robin_exterior",
    "make_modular",
    "luxemburg_norm",
    "solve_scaling",
    "HolderResult",
    "holder_check",
]


@dataclass(frozen=True, eq=False)
class ModularKind:
    """Which modular to evaluate. ``beta`` is only set for the Robin exterior kind."""

    tag: str
    beta: np.ndarray | float | None = None

    def __post_init__(self):
        if self.tag not in ("bulk", "full", "star", "robin"):
            raise ValueError(f"unknown modular kind {self.tag!r}")
        if self.tag == "robin":
            b = np.asarray(self.beta, dtype=float)
            if b.size == 0 or not np.all(np.isfinite(b)) or np.any(b < 0):
                raise ValueError("Robin weight beta must be finite and >= 0")

    def __repr__(self):
        return f"ModularKind({self.tag})"


BULK = ModularKind("bulk")
GAGLIARDO_FULL = ModularKind("full")
GAGLIARDO_STAR = ModularKind("star")


def robin(beta) -> ModularKind:
    return ModularKind("robin", beta)


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, Field) else np.asarray(u, dtype=float)


def exterior_weight(grid: Grid1D, beta) -> np.ndarray:
    """Expand ``beta`` (scalar, exterior table or node table) to a node-length array, zero inside."""
    b = np.asarray(beta, dtype=float)
    out = np.zeros(grid.n_nodes)
    if b.ndim == 0:
        out[grid.exterior_idx] = float(b)
    elif b.shape == (grid.n_exterior,):
        out[grid.exterior_idx] = b
    elif b.shape == (grid.n_nodes,):
        out[grid.exterior_idx] = b[grid.exterior_idx]
    else:
        raise ValueError(f"beta must be a scalar, {grid.n_exterior} exterior values or "
                         f"{grid.n_nodes} node values; got shape {b.shape}")
    if not np.all(np.isfinite(out)) or np.any(out < 0):
        raise ValueError("Robin weight beta must be finite and >= 0")
    return out


# -- scaling profiles -------------------------------------------------------------


class ScalingProfile:
    """``t -> modular(t * u)`` for a fixed field ``u``.

    Power-sum functions reduce to a short polynomial ``sum c_k t**p_k`` whose
    coefficients already contain the term sums. User functions keep the
    absolute arguments with their weights and re-evaluate ``G``.
    """

    def __init__(self, F: YoungFunction, parts):
        # parts: list of (term_sums, None) or (abs_args, weights)
        self.F = F
        self.parts = parts
        poly = {}
        self._user = []
        for a, w in parts:
            if w is None:
                for c, p, T in zip(F.coefs, F.exps, a):
                    poly[float(p)] = poly.get(float(p), 0.0) + float(c) * float(T)
            else:
                self._user.append((a, w))
        self._poly = sorted((p, c) for p, c in poly.items())
        self._last = None  # (t, slope of the user parts) from the latest evaluation

    @classmethod
    def from_args(cls, F: YoungFunction, args: np.ndarray, weights: np.ndarray):
        if F.is_powersum:
            T = np.array([float(np.sum(args**p * weights)) for p in F.exps])
            return cls(F, [(T, None)])
        return cls(F, [(np.asarray(args, dtype=float), np.asarray(weights, dtype=float))])

    def __add__(self, other: "ScalingProfile") -> "ScalingProfile":
        return ScalingProfile(self.F, self.parts + other.parts)

    def __call__(self, t: float) -> float:
        total = 0.0
        for p, c in self._poly:
            total += c * t**p
        if self._user:
            user_slope = 0.0
            for a, w in self._user:
                Gv, gv = self.F.G_and_g(t * a)
                total += float(np.sum(Gv * w))
                user_slope += float(np.sum(gv * a * w))
            self._last = (t, user_slope)
        return total

    def slope(self, t: float) -> float:
        """``d/dt modular(t u)``."""
        total = 0.0
        for p, c in self._poly:
            total += c * p * t ** (p - 1.0)
        if self._user:
            if self._last is not None and self._last[0] == t:
                return total + self._last[1]
            for a, w in self._user:
                total += float(np.sum(self.F.g(t * a) * a * w))
        return total


def _pair_profile(F, u, P, s) -> ScalingProfile:
    if len(P) == 0:
        return ScalingProfile.from_args(F, np.zeros(0), np.zeros(0))
    if F.is_powersum:
        return ScalingProfile(F, [(2.0 * kernels.term_sums(u, P, s, F.exps), None)])
    d = np.abs(u[P.i] - u[P.j]) / P.ds(s)
    return ScalingProfile(F, [(d, 2.0 * P.w)])


# -- evaluators -------------------------------------------------------------------


class Modular:
    """A modular bound to ``(F, grid, kind, s)``; call it on a Field or node array."""

    def __init__(self, F: YoungFunction, grid: Grid1D, kind: ModularKind, s: float | None = None):
        if kind.tag in ("full", "star") and not (s is not None and 0.0 < s < 1.0):
            raise ValueError(f"Gagliardo modulars need s in (0, 1), got {s}")
        self.F = F
        self.grid = grid
        self.kind = kind
        self.s = s
        self._beta = exterior_weight(grid, kind.beta) if kind.tag == "robin" else None

    def _check(self, u):
        if self.kind.tag == "full" and isinstance(u, Field) and u.bc is not BC.DIRICHLET:
            raise ValueError("the full Gagliardo modular needs a Dirichlet field")

    def __call__(self, u) -> float:
        self._check(u)
        v = _values(u)
        g, F = self.grid, self.F
        tag = self.kind.tag
        if tag == "bulk":
            return float(np.sum(F.G(np.abs(v[g.interior_slice])))) * g.h
        if tag == "robin":
            E = g.exterior_idx
            return float(np.sum(self._beta[E] * F.G(np.abs(v[E])))) * g.h
        val = kernels.modular(F, v, g.star_pairs, self.s)
        if tag == "full":
            val += kernels.modular(F, v, g.extext_pairs, self.s)
        return val

    def profile(self, u) -> ScalingProfile:
        self._check(u)
        v = _values(u)
        g, F = self.grid, self.F
        tag = self.kind.tag
        if tag == "bulk":
            a = np.abs(v[g.interior_slice])
            return ScalingProfile.from_args(F, a, np.full(a.size, g.h))
        if tag == "robin":
            E = g.exterior_idx
            return ScalingProfile.from_args(F, np.abs(v[E]), self._beta[E] * g.h)
        prof = _pair_profile(F, v, g.star_pairs, self.s)
        if tag == "full":
            prof = prof + _pair_profile(F, v, g.extext_pairs, self.s)
        return prof

    def __repr__(self):
        return f"Modular({self.kind.tag}, s={self.s})"


class SumModular:
    """Pointwise sum of evaluators (the Robin energy is star plus exterior)."""

    def __init__(self, *parts: Modular):
        self.parts = parts
        self.F = parts[0].F
        self.grid = parts[0].grid

    def __call__(self, u) -> float:
        return math.fsum(m(u) for m in self.parts)

    def profile(self, u) -> ScalingProfile:
        prof = self.parts[0].profile(u)
        for m in self.parts[1:]:
            prof = prof + m.profile(u)
        return prof


def make_modular(F: YoungFunction, grid: Grid1D, kind: ModularKind, s: float | None = None) -> Modular:
    return Modular(F, grid, kind, s)


def modular_bulk(F: YoungFunction, grid: Grid1D, u) -> float:
    """``sum_interior G(|u_i|) h``."""
    return Modular(F, grid, BULK)(u)


def modular_gagliardo(F: YoungFunction, grid: Grid1D, u, s: float, kind: ModularKind = GAGLIARDO_FULL) -> float:
    """``sum_{i != j} G(|D_s u|) w`` over all pairs (full) or pairs not both exterior (star)."""
    if kind.tag not in ("full", "star"):
        raise ValueError(f"expected a Gagliardo kind, got {kind!r}")
    return Modular(F, grid, kind, s)(u)


def modular_robin_exterior(F: YoungFunction, grid: Grid1D, u, beta) -> float:
    """``sum_exterior beta_i G(|u_i|) h``."""
    return Modular(F, grid, robin(beta))(u)


# -- scalar root finding ----------------------------------------------------------


def solve_scaling(profile: Callable[[float], float], target: float, rtol: float = 1e-12,
                  max_iter: int = 400) -> float:
    """Return ``t > 0`` with ``profile(t) = target`` for an increasing profile vanishing at 0.

    Brackets geometrically around ``t = 1``, then shrinks the bracket until
    the value is within ``rtol * target``. When the profile exposes a
    ``slope`` method, Newton steps that land inside the bracket replace the
    bisection midpoint.
    """
    if not target > 0:
        raise ValueError("target must be > 0")
    slope = getattr(profile, "slope", None)
    f1 = profile(1.0)
    if f1 == target:
        return 1.0
    lo, hi = 1.0, 1.0
    f_lo = f_hi = f1
    if f1 < target:
        for _ in range(2100):
            lo, f_lo = hi, f_hi
            hi = hi * 2.0
            f_hi = profile(hi)
            if f_hi >= target:
                break
        else:
            raise ArithmeticError("could not bracket the scaling root from above")
    else:
        for _ in range(2100):
            hi, f_hi = lo, f_lo
            lo = lo / 2.0
            f_lo = profile(lo)
            if f_lo <= target:
                break
        else:
            raise ArithmeticError("could not bracket the scaling root from below")
    best, f_best = (lo, f_lo) if abs(f_lo - target) <= abs(f_hi - target) else (hi, f_hi)
    for _ in range(max_iter):
        if abs(f_best - target) <= rtol * target:
            break
        cand = None
        if slope is not None:
            d = slope(best)
            if d > 0:
                cand = best - (f_best - target) / d
                if not lo < cand < hi or cand == best:
                    cand = None
        if cand is None:
            # geometric midpoint while the bracket spans more than a factor of 2
            cand = math.sqrt(lo * hi) if hi > 2.0 * lo and lo > 0 else 0.5 * (lo + hi)
            if not lo < cand < hi:
                break
        fc = profile(cand)
        err, err_best = abs(fc - target), abs(f_best - target)
        # ties go to the smaller scale
        if err < err_best or (err == err_best and cand < best):
            best, f_best = cand, fc
        if fc < target:
            lo, f_lo = cand, fc
        elif fc > target:
            hi, f_hi = cand, fc
        else:
            break
    return best


def luxemburg_norm(F: YoungFunction, modular, u, rtol: float = 1e-10) -> float:
    """``lambda > 0`` with ``modular(u / lambda) = 1``; zero when ``modular(u) = 0``.

    ``modular`` is a :class:`Modular` (or anything with ``profile``) or a plain
    callable on node arrays.
    """
    v = _values(u)
    if hasattr(modular, "profile"):
        prof = modular.profile(u)
    else:
        prof = lambda t: float(modular(t * v))  # noqa: E731
    if prof(1.0) == 0.0:
        return 0.0
    # modular(u / lam) = 1  <=>  profile(t) = 1 with t = 1 / lam
    t = solve_scaling(prof, 1.0, rtol=rtol * 1e-2)
    return 1.0 / t


# -- Hölder -----------------------------------------------------------------------


@dataclass(frozen=True)
class HolderResult:
    lhs: float
    rhs: float

    @property
    def classical_bound(self) -> float:
        """The constant-2 form that always holds."""
        return 2.0 * self.rhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + 1e-10)

    @property
    def holds_classical(self) -> bool:
        return self.lhs <= self.classical_bound * (1.0 + 1e-10)


def holder_check(F: YoungFunction, grid: Grid1D, u, v) -> HolderResult:
    """``(sum_interior |u_i v_i| h, ||u||_G * ||v||_{G~})`` over the interior."""
    a, b = _values(u), _values(v)
    sl = grid.interior_slice
    lhs = float(np.sum(np.abs(a[sl] * b[sl]))) * grid.h
    nu = luxemburg_norm(F, Modular(F, grid, BULK), a)
    Ft = complement(F)
    nv = luxemburg_norm(Ft, Modular(Ft, grid, BULK), b)
    return HolderResult(lhs, nu * nv)
