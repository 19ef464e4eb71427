"""Solver settings and results."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..domain import BC, Field

__all__ = ["SolverConfig", "EigenPair", "INITIAL_GUESSES"]

INITIAL_GUESSES = ("firstLinearMode", "randomSymmetric", "supplied")


@dataclass(frozen=True)
class SolverConfig:
    """Settings for one constrained solve.

    ``beta`` is the Robin exterior weight (scalar or one value per exterior
    node) and must be ``None`` for the other boundary conditions.
    ``initial_values`` is required when ``initial_guess == "supplied"``.
    """

    alpha: float
    s: float = 0.5
    bc: BC = BC.DIRICHLET
    beta: float | tuple | None = None
    tol_residual: float = 1e-8
    tol_constraint: float = 1e-10
    max_iter: int = 5000
    step_init: float = 1.0
    seed: int = 42
    initial_guess: str = "firstLinearMode"
    initial_values: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "bc", BC.parse(self.bc))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be finite and > 0, got {self.alpha}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        for name in ("tol_residual", "tol_constraint", "step_init"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.initial_guess not in INITIAL_GUESSES:
            raise ValueError(f"initial_guess must be one of {INITIAL_GUESSES}")
        if self.initial_guess == "supplied" and self.initial_values is None:
            raise ValueError("initial_guess='supplied' needs initial_values")
        if self.bc is BC.ROBIN:
            if self.beta is None:
                raise ValueError("Robin problems need beta")
            b = np.asarray(self.beta, dtype=float)
            if not np.all(np.isfinite(b)) or np.any(b < 0):
                raise ValueError("beta must be finite and >= 0")
            if b.ndim:
                object.__setattr__(self, "beta", tuple(b.ravel().tolist()))
        elif self.beta is not None:
            raise ValueError(f"beta is only used with Robin conditions (bc={self.bc.value})")

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)


@dataclass
class EigenPair:
    """A converged (or flagged) constrained critical point.

    ``constraint_kind`` is ``"prescribedI"`` when ``I(u) = alpha`` was imposed
    and ``"prescribedJ"`` for ``J(u) = alpha``. ``history`` rows are
    ``(iteration, J, I, lambda, residual)``. ``loop`` is only set by the
    two-dimensional minimax search and holds the winning loop.
    """

    lam: float
    u: Field
    constraint_kind: str
    value_I: float
    value_J: float
    residual: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)
    diagnostics: dict = field(default_factory=dict)
    loop: dict | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "constraint_kind": self.constraint_kind,
            "value_I": self.value_I,
            "value_J": self.value_J,
            "residual_norm": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "diagnostics": dict(self.diagnostics),
        }
