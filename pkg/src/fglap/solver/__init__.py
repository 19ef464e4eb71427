"""Constrained eigen-solvers, sweeps and the quadratic oracle."""
from .config import EigenPair, SolverConfig
from .descent import (InfeasibleError, maximize_I_on_J, minimize_J_on_I, rayleigh_bar,
                      rescale_to_modular)
from .minimax import loop_level, minimax_k2
from .oracle import assemble_quadratic, jacobi_eigh, oracle_spectrum_p2
from .sweep import SweepResult, oracle_p_lower, sweep_alpha

__all__ = [
    "EigenPair", "SolverConfig", "InfeasibleError", "minimize_J_on_I", "maximize_I_on_J",
    "rayleigh_bar", "rescale_to_modular", "minimax_k2", "loop_level", "assemble_quadratic",
    "jacobi_eigh", "oracle_spectrum_p2", "SweepResult", "sweep_alpha", "oracle_p_lower",
]
