"""Upper bound for the second minimax level via odd loops in two-dimensional subspaces.

For a pair ``(phi1, phi2)`` the loop ``theta -> rescale(cos(theta) phi1 + sin(theta) phi2)``
onto ``{I = alpha}`` is odd under ``theta -> theta + pi``, so sampling the
half circle ``[0, pi)`` covers it. The loop level is the largest ``J`` on it;
the search minimises that level over pairs drawn from the low quadratic
modes. Any such loop gives an upper bound, never the exact level.
"""
from __future__ import annotations

import math

import numpy as np

from ..domain import Field, Grid1D
from ..modular import solve_scaling
from ..young import YoungFunction
from .config import EigenPair, SolverConfig
from .descent import check_structure, problem
from .oracle import oracle_spectrum_p2

__all__ = ["loop_level", "minimax_k2"]


def loop_level(J, I, phi1: np.ndarray, phi2: np.ndarray, alpha: float, theta_samples: int):
    """Sample the loop through ``span(phi1, phi2)``.

    Returns ``(level, k_max, thetas, J_values, scales)``; ties in the maximum
    go to the smallest angle.
    """
    thetas = np.arange(theta_samples) * (math.pi / theta_samples)
    vals = np.empty(theta_samples)
    taus = np.empty(theta_samples)
    for k, th in enumerate(thetas):
        w = math.cos(th) * phi1 + math.sin(th) * phi2
        tau = solve_scaling(I.profile(w), alpha, rtol=1e-12)
        taus[k] = tau
        vals[k] = J.profile(w)(tau)
    k = int(np.argmax(vals))
    return float(vals[k]), k, thetas, vals, taus


def _check_pair(phi1, phi2):
    a, b, c = float(np.dot(phi1, phi1)), float(np.dot(phi2, phi2)), float(np.dot(phi1, phi2))
    if a == 0.0 or b == 0.0 or (a * b - c * c) <= 1e-12 * a * b:
        raise ValueError("degenerate pair: phi1 and phi2 are linearly dependent")


def minimax_k2(F: YoungFunction, grid: Grid1D, cfg: SolverConfig, basis_pairs: int = 4,
               theta_samples: int = 64, n_modes: int = 8, sweeps: int = 1,
               steps=(0.05, 0.01), perturbation: float = 0.1, pair=None) -> EigenPair:
    """Smallest loop level found over candidate pairs; an upper bound on the k = 2 level.

    Candidates are the first two quadratic modes plus ``basis_pairs - 1``
    random perturbations inside the span of the first ``n_modes`` modes. The
    best candidate is then improved by coordinate descent on its
    coefficients along modes 3..n_modes. ``pair`` fixes a single explicit
    pair and skips the search.
    """
    if basis_pairs < 1:
        raise ValueError("basis_pairs must be >= 1")
    if theta_samples < 16:
        raise ValueError("theta_samples must be >= 16")
    check_structure(F, cfg.s)
    J, I = problem(F, grid, cfg)
    alpha = cfg.alpha
    history = []

    def level(C):
        p1, p2 = J.project(C[0] @ V.T), J.project(C[1] @ V.T)
        _check_pair(p1, p2)
        out = loop_level(J, I, p1, p2, alpha, theta_samples)
        history.append((len(history), out[0], alpha, math.nan, math.nan))
        return out, (p1, p2)

    if pair is not None:
        V = np.column_stack([J.project(np.asarray(p, dtype=float)) for p in pair])
        best_C = np.eye(2)
        best, best_pair = level(best_C)
        n_evals = 1
    else:
        orc = oracle_spectrum_p2(grid, cfg.s, cfg.bc, cfg.beta)
        m = min(n_modes, orc.vectors.shape[1])
        if m < 2:
            raise ValueError("need at least two modes")
        V = orc.vectors[:, :m]
        rng = np.random.default_rng(cfg.seed)
        base = np.zeros((2, m))
        base[0, 0] = base[1, 1] = 1.0
        cands = [base] + [base + perturbation * rng.standard_normal((2, m)) for _ in range(basis_pairs - 1)]
        best = best_pair = best_C = None
        for C in cands:
            out, pr = level(C)
            if best is None or out[0] < best[0]:
                best, best_pair, best_C = out, pr, C
        for _ in range(sweeps):
            for step in steps:
                for r in range(2):
                    for k in range(2, m):
                        for sgn in (1.0, -1.0):
                            C = best_C.copy()
                            C[r, k] += sgn * step
                            try:
                                out, pr = level(C)
                            except ValueError:
                                continue
                            if out[0] < best[0]:
                                best, best_pair, best_C = out, pr, C
        n_evals = len(history)

    val, k, thetas, vals, taus = best
    p1, p2 = best_pair
    u = taus[k] * (math.cos(thetas[k]) * p1 + math.sin(thetas[k]) * p2)
    gJ, gI = J.grad(u), I.grad(u)
    lam = float(np.dot(gJ, u)) / float(np.dot(gI, u))
    r = gJ - lam * gI
    r = r - (float(np.dot(r, gI)) / float(np.dot(gI, gI))) * gI
    res = float(np.linalg.norm(r))
    loop = {"phi1": p1, "phi2": p2, "theta": thetas, "J": vals, "scale": taus}
    return EigenPair(
        lam=lam,
        u=Field(grid, u, cfg.bc),
        constraint_kind="prescribedI",
        value_I=I(u),
        value_J=val,
        residual=res,
        iterations=n_evals,
        converged=res <= cfg.tol_residual * (1.0 + abs(lam)),
        history=history,
        diagnostics={"upper_bound": True, "theta_samples": theta_samples,
                     "basis_pairs": basis_pairs, "theta_max": float(thetas[k]),
                     "message": "loop level over two-dimensional odd loops (upper bound)"},
        loop=loop,
    )
