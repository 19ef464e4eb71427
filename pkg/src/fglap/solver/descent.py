"""Constrained descent for ``min J on {I = alpha}`` and ``max I on {J = alpha}``.

Every iterate is put back on the constraint by exact scalar rescaling; both
``I`` and ``J`` are strictly increasing along rays, so a one-dimensional
bisection suffices. Search directions are tangent gradients measured in the
metric of the quadratic (G = t^2) form, which turns the iteration into a
preconditioned inverse iteration for quadratic G.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..domain import BC, Field, Grid1D
from ..modular import solve_scaling
from ..operators import Bulk, Energy
from ..young import StructureError, YoungFunction, verify_structure
from .config import EigenPair, SolverConfig
from .oracle import assemble_quadratic, oracle_spectrum_p2

__all__ = [
    "InfeasibleError",
    "rescale_to_modular",
    "minimize_J_on_I",
    "maximize_I_on_J",
    "rayleigh_bar",
    "initial_guess",
    "check_structure",
    "problem",
]

ARMIJO = 1e-4
NOISE = 1e-13
UNBOUNDED = 1e12


class InfeasibleError(ValueError):
    """The starting field cannot be scaled onto the constraint."""


def rescale_to_modular(F: YoungFunction, grid: Grid1D, u, modular, alpha: float) -> Field:
    """Return ``t * u`` with ``modular(t * u) = alpha`` to relative 1e-12."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    prof = modular.profile(u)
    if prof(1.0) == 0.0:
        raise InfeasibleError("cannot rescale a field on which the modular vanishes")
    t = solve_scaling(prof, alpha, rtol=1e-12)
    if isinstance(u, Field):
        return u * t
    return np.asarray(u, dtype=float) * t


def check_structure(F: YoungFunction, s: float) -> None:
    if F.is_powersum:
        return  # built-in constructors already enforce G1 and G2
    rep = verify_structure(F, s)
    if not rep.ok:
        raise StructureError("; ".join(rep.notes) or "Young function fails G1/G2")


def _beta_key(beta):
    if beta is None:
        return None
    b = np.asarray(beta, dtype=float)
    return float(b) if b.ndim == 0 else tuple(b.ravel().tolist())


@lru_cache(maxsize=16)
def _preconditioner(grid: Grid1D, s: float, bc: BC, beta_key):
    """Cholesky factors of the metric ``K`` on the free unknowns.

    Dirichlet: ``K = A_II``. Neumann/Robin: ``K = A + M`` on every node, with the
    diagonal exterior block eliminated so only an interior-sized factor is kept.
    """
    Q = assemble_quadratic(grid, s, None if beta_key is None else np.asarray(beta_key))
    if bc is BC.DIRICHLET:
        return Q, cho_factor(Q.A_II), None
    S = Q.A_II + grid.h * np.eye(grid.n_interior) - (Q.A_IE / Q.d_E) @ Q.A_IE.T
    return Q, cho_factor(S), Q.d_E


def _metric_solve(pre, grid: Grid1D, b: np.ndarray) -> np.ndarray:
    Q, fac, dE = pre
    I, E = grid.interior_idx, grid.exterior_idx
    out = np.zeros(grid.n_nodes)
    if dE is None:
        out[I] = cho_solve(fac, b[I])
        return out
    bE = b[E] / dE
    yI = cho_solve(fac, b[I] - Q.A_IE @ bE)
    out[I] = yI
    out[E] = bE - (Q.A_IE.T @ yI) / dE
    return out


def problem(F: YoungFunction, grid: Grid1D, cfg: SolverConfig):
    """``(J, I)`` evaluators for the configured boundary condition."""
    beta = None if cfg.beta is None else np.asarray(cfg.beta, dtype=float)
    return Energy(F, grid, cfg.s, cfg.bc, beta), Bulk(F, grid)


def initial_guess(grid: Grid1D, cfg: SolverConfig) -> np.ndarray:
    if cfg.initial_guess == "supplied":
        v = cfg.initial_values
        v = v.values if isinstance(v, Field) else v
        return Field(grid, v, cfg.bc).values.copy()
    if cfg.initial_guess == "firstLinearMode":
        return oracle_spectrum_p2(grid, cfg.s, cfg.bc, cfg.beta).mode(0)
    rng = np.random.default_rng(cfg.seed)
    v = rng.standard_normal(grid.n_nodes)
    # the grid is mirror-symmetric, so reversing the array reflects x
    v = 0.5 * (v + v[::-1])
    return Field(grid, v, cfg.bc).values.copy()


def rayleigh_bar(F: YoungFunction, grid: Grid1D, u, s: float, bc=BC.DIRICHLET, beta=None) -> float:
    """``sum g(|D_s u|) |D_s u| w / sum_interior g(|u_i|) |u_i| h`` for the bc's pair set.

    For Robin the exterior term ``sum beta g(|u|) |u| h`` joins the numerator.
    """
    J = Energy(F, grid, s, bc, beta)
    v = J.project(u.values if isinstance(u, Field) else np.asarray(u, dtype=float))
    a = np.abs(v[grid.interior_slice])
    den = float(np.sum(F.g(a) * a)) * grid.h
    if den == 0.0:
        raise InfeasibleError("rayleigh_bar needs a field that is nonzero in the interior")
    return J.rayleigh_numerator(v) / den


class _Neg:
    """``-f`` for ascent on ``I``."""

    def __init__(self, f):
        self.f = f

    def __call__(self, u):
        return -self.f(u)

    def grad(self, u):
        return -self.f.grad(u)

    def profile(self, u):
        p = self.f.profile(u)
        return lambda t: -p(t)


def _solve(F: YoungFunction, grid: Grid1D, cfg: SolverConfig, maximize: bool, u0=None) -> EigenPair:
    check_structure(F, cfg.s)
    J, I = problem(F, grid, cfg)
    obj, con = (_Neg(I), J) if maximize else (J, I)
    alpha = cfg.alpha
    pre = _preconditioner(grid, float(cfg.s), cfg.bc, _beta_key(cfg.beta))

    u = J.project(initial_guess(grid, cfg) if u0 is None else np.asarray(u0, dtype=float))
    if con.profile(u)(1.0) == 0.0:
        what = "J" if maximize else "I"
        raise InfeasibleError(f"initial guess has {what} = 0; supply a field that can be scaled onto the constraint")
    u = u * solve_scaling(con.profile(u), alpha, rtol=1e-12)

    history = []
    lam_bar_min = math.inf
    step = cfg.step_init
    fval = obj(u)
    converged = False
    message = "max_iter reached"
    res = math.inf
    lam = math.nan
    it = 0
    for it in range(cfg.max_iter + 1):
        gJ, gI = J.grad(u), I.grad(u)
        pJ, pI = float(np.dot(gJ, u)), float(np.dot(gI, u))
        lam = pJ / pI
        lam_bar_min = min(lam_bar_min, lam)
        if maximize:
            gf, gc = -gI, gJ
            r = gI - gJ / lam if lam != 0 else gI
        else:
            gf, gc = gJ, gI
            r = gJ - lam * gI
        gcc = float(np.dot(gc, gc))
        r = r - (float(np.dot(r, gc)) / gcc) * gc
        res = float(np.linalg.norm(r))
        valJ = J(u) if maximize else fval
        valI = -fval if maximize else I(u)
        history.append((it, valJ, valI, lam, res))
        if res <= cfg.tol_residual * (1.0 + abs(lam)):
            converged, message = True, "converged"
            break
        if it == cfg.max_iter:
            break

        # K-metric tangent gradient d = K^-1 (gf - mu gc) with <gc, d> = 0;
        # forming q first keeps the slope <q, K^-1 q> positive in floating point
        zc = _metric_solve(pre, grid, gc)
        mu = float(np.dot(zc, gf)) / float(np.dot(gc, zc))
        q = gf - mu * gc
        d = _metric_solve(pre, grid, q)
        slope = float(np.dot(q, d))
        if not slope > 0:
            message = "no descent direction"
            break

        def trial(t):
            v = u - t * d
            pc = con.profile(v)
            if pc(1.0) == 0.0:
                return math.inf, None
            # a tight rescale keeps objective noise near rounding level
            tau = solve_scaling(pc, alpha, rtol=1e-15)
            return obj.profile(v)(tau), v * tau

        noise = NOISE * max(abs(fval), 1e-300)
        t = step
        accepted = None
        for k in range(80):
            val, w = trial(t)
            if k == 0 and math.isfinite(val):
                # one quadratic-interpolation trial from phi(0), phi'(0), phi(t)
                curv = val - fval + slope * t
                if curv > 0:
                    tq = slope * t * t / (2.0 * curv)
                    if t / 16.0 <= tq <= 8.0 * t and abs(tq - t) > 1e-3 * t:
                        vq, wq = trial(tq)
                        if vq < val or (vq == val and tq < t):
                            t, val, w = tq, vq, wq
            if val <= fval - ARMIJO * t * slope:
                accepted = (t, val, w)
                break
            if slope * t <= noise and val <= fval + noise:
                accepted = (t, val, w)
                break
            t *= 0.5
        if accepted is None:
            message = "line search failed"
            break
        t, fval, u = accepted
        u = J.project(u)
        step = 2.0 * t
        if maximize and -fval > UNBOUNDED * alpha:
            message = "unbounded: I grows without limit on {J = alpha}"
            break

    valJ, valI = J(u), I(u)
    return EigenPair(
        lam=float(lam),
        u=Field(grid, u, cfg.bc),
        constraint_kind="prescribedJ" if maximize else "prescribedI",
        value_I=valI,
        value_J=valJ,
        residual=res,
        iterations=it,
        converged=converged,
        history=history,
        diagnostics={"lambda_bar_min": lam_bar_min, "message": message, "upper_bound": False,
                     "final_step": step},
    )


def minimize_J_on_I(F: YoungFunction, grid: Grid1D, cfg: SolverConfig, u0=None) -> EigenPair:
    """Constrained minimum of ``J`` on ``{I = alpha}`` with its multiplier.

    The energy is the full Gagliardo modular for Dirichlet, the star modular
    for Neumann and star plus the weighted exterior term for Robin. ``u0``
    overrides the configured initial guess (used for warm starts).
    """
    return _solve(F, grid, cfg, maximize=False, u0=u0)


def maximize_I_on_J(F: YoungFunction, grid: Grid1D, cfg: SolverConfig, u0=None) -> EigenPair:
    """Constrained maximum of ``I`` on ``{J = alpha}`` with its multiplier.

    Raises :class:`InfeasibleError` when the starting field has ``J = 0``
    (constants under Neumann conditions).
    """
    return _solve(F, grid, cfg, maximize=True, u0=u0)
