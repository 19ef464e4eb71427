"""Alpha sweeps and the power-law comparison solve."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domain import BC, Grid1D
from ..young import YoungFunction, power
from .config import EigenPair, SolverConfig
from .descent import maximize_I_on_J, minimize_J_on_I

__all__ = ["SweepResult", "sweep_alpha", "oracle_p_lower"]


@dataclass
class SweepResult:
    alphas: np.ndarray
    lambdas: np.ndarray
    values: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    mode: str
    pairs: list[EigenPair] = field(default_factory=list, repr=False)

    @property
    def inf_lambda(self) -> float:
        return float(np.min(self.lambdas))

    def rows(self) -> list[dict]:
        return [{"alpha": float(a), "lambda": float(l), "value": float(v),
                 "converged": bool(c), "iterations": int(n)}
                for a, l, v, c, n in zip(self.alphas, self.lambdas, self.values,
                                         self.converged, self.iterations)]


def sweep_alpha(F: YoungFunction, grid: Grid1D, cfg: SolverConfig, alphas, mode: str = "minJ",
                warm_start: bool = True) -> SweepResult:
    """Solve once per alpha (in the given order), warm-starting from the previous row.

    ``mode="minJ"`` records ``J`` of the minimiser as the value column,
    ``mode="maxI"`` records ``I`` of the maximiser. Rows that fail to
    converge are kept and flagged.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0:
        raise ValueError("alphas must be a non-empty list")
    if not np.all(np.isfinite(alphas)) or np.any(alphas <= 0):
        raise ValueError("alphas must be finite and > 0")
    if np.any(np.diff(alphas) <= 0):
        raise ValueError("alphas must be strictly increasing")
    if mode not in ("minJ", "maxI"):
        raise ValueError(f"mode must be 'minJ' or 'maxI', got {mode!r}")
    solve = minimize_J_on_I if mode == "minJ" else maximize_I_on_J
    pairs = []
    prev = None
    for a in alphas:
        ep = solve(F, grid, cfg.with_(alpha=float(a)), u0=prev)
        pairs.append(ep)
        if warm_start:
            prev = ep.u.values
    lam = np.array([p.lam for p in pairs])
    val = np.array([p.value_J if mode == "minJ" else p.value_I for p in pairs])
    return SweepResult(alphas, lam, val, np.array([p.converged for p in pairs]),
                       np.array([p.iterations for p in pairs]), mode, pairs)


def oracle_p_lower(grid: Grid1D, s: float, p: float, alpha: float, bc=BC.DIRICHLET, beta=None,
                   **cfg_kw) -> EigenPair:
    """Constrained minimum for the pure power ``G = t^p`` (the comparison problem)."""
    cfg = SolverConfig(alpha=alpha, s=s, bc=bc, beta=beta, **cfg_kw)
    return minimize_J_on_I(power(p), grid, cfg)
