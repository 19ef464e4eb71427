"""Dense oracle for the quadratic case G = t^2.

With ``c_ij = h^2 / |x_i - x_j|^(1+2s)`` the energy over the star pair set is
``J(u) = 2 sum_{i<j} c_ij (u_i - u_j)^2 = u^T A u`` with ``A`` twice the
graph Laplacian of ``c``; ``I(u) = h * sum_interior u_i^2``. Exterior-exterior
pairs are not in the star set, so the exterior block of ``A`` is diagonal and
the exterior unknowns of the Neumann/Robin problems eliminate in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..domain import BC, Grid1D
from ..modular import exterior_weight

__all__ = ["QuadraticForm", "assemble_quadratic", "jacobi_eigh", "OracleResult",
           "oracle_spectrum_p2", "MAX_ORACLE_N"]

MAX_ORACLE_N = 512


@dataclass(frozen=True)
class QuadraticForm:
    """Blocks of ``A``: interior-interior (dense), interior-exterior (dense), exterior diagonal."""

    A_II: np.ndarray
    A_IE: np.ndarray
    d_E: np.ndarray

    def full(self) -> np.ndarray:
        nI, nE = self.A_IE.shape
        A = np.zeros((nI + nE, nI + nE))
        A[:nI, :nI] = self.A_II
        A[:nI, nI:] = self.A_IE
        A[nI:, :nI] = self.A_IE.T
        A[nI:, nI:] = np.diag(self.d_E)
        return A

    def schur(self) -> np.ndarray:
        """Interior form after minimising over the exterior unknowns."""
        return self.A_II - (self.A_IE / self.d_E) @ self.A_IE.T

    def extend(self, uI: np.ndarray) -> np.ndarray:
        """Exterior values that minimise ``u^T A u`` for fixed interior values."""
        d = self.d_E if np.ndim(uI) == 1 else self.d_E[:, None]
        return -(self.A_IE.T @ uI) / d


def assemble_quadratic(grid: Grid1D, s: float, beta=None) -> QuadraticForm:
    """Assemble the G = t^2 form on the star pair set; ``beta`` adds ``beta_i h`` on the exterior."""
    x = np.asarray(grid.x)
    I, E = grid.interior_idx, grid.exterior_idx
    h2 = grid.h**2
    dII = np.abs(x[I, None] - x[None, I])
    np.fill_diagonal(dII, 1.0)
    cII = h2 / dII ** (1.0 + 2.0 * s)
    np.fill_diagonal(cII, 0.0)
    cIE = h2 / np.abs(x[I, None] - x[None, E]) ** (1.0 + 2.0 * s)
    A_II = -2.0 * cII
    A_II[np.diag_indices_from(A_II)] = 2.0 * (cII.sum(axis=1) + cIE.sum(axis=1))
    d_E = 2.0 * cIE.sum(axis=0)
    if beta is not None:
        d_E = d_E + exterior_weight(grid, beta)[E] * grid.h
    return QuadraticForm(A_II, -2.0 * cIE, d_E)


def _round_robin(n: int):
    """Tournament schedule: n-1 rounds of n/2 disjoint pairs covering every pair once."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(A: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60):
    """Symmetric eigen-decomposition by cyclic Jacobi rotations.

    Each sweep runs a round-robin schedule so that every round applies n/2
    disjoint rotations at once. Returns ascending eigenvalues and the matching
    orthonormal eigenvectors (columns).
    """
    A = np.array(A, dtype=float)
    n0 = A.shape[0]
    if A.shape != (n0, n0):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("matrix must be symmetric")
    A = 0.5 * (A + A.T)
    n = n0 + (n0 % 2)
    if n != n0:  # pad with a decoupled dummy row
        B = np.zeros((n, n))
        B[:n0, :n0] = A
        A = B
    V = np.eye(n)
    rounds = _round_robin(n)
    scale = np.linalg.norm(A)
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        rotated = False
        for p, q in rounds:
            apq = A[p, q]
            app = A[p, p]
            aqq = A[q, q]
            # skip couplings already negligible next to both diagonal entries
            active = np.abs(apq) > eps * np.maximum(np.sqrt(np.abs(app * aqq)), tol * scale)
            if not active.any():
                continue
            rotated = True
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                theta = np.where(active, (aqq - app) / (2.0 * apq), 0.0)
                t = np.where(active, np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
            t = np.where(active & (theta == 0), 1.0, t)
            c = 1.0 / np.sqrt(1.0 + t * t)
            sn = t * c
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - sn[:, None] * Aq
            A[q, :] = sn[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * c - Aq * sn
            A[:, q] = Ap * sn + Aq * c
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = Vp * c - Vq * sn
            V[:, q] = Vp * sn + Vq * c
        if not rotated:
            break
    # a padded dummy index has zero couplings, is never rotated and stays last
    w = np.diag(A)[:n0].copy()
    V = V[:n0, :n0]
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True)
class OracleResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # node values, columns normalised to I(u) = 1

    def mode(self, k: int) -> np.ndarray:
        return self.vectors[:, k].copy()


@lru_cache(maxsize=32)
def _oracle_cached(grid: Grid1D, s: float, bc: BC, beta_key):
    if grid.n_interior > MAX_ORACLE_N:
        raise ValueError(f"oracle is limited to n_interior <= {MAX_ORACLE_N}, got {grid.n_interior}")
    beta = None if beta_key is None else np.asarray(beta_key, dtype=float)
    Q = assemble_quadratic(grid, s, beta if bc is BC.ROBIN else None)
    S = Q.A_II if bc is BC.DIRICHLET else Q.schur()
    w, Y = jacobi_eigh(S / grid.h)
    # I(u) = h |u_I|^2 = 1
    UI = Y / np.sqrt(grid.h)
    U = np.zeros((grid.n_nodes, UI.shape[1]))
    U[grid.interior_idx] = UI
    if bc is not BC.DIRICHLET:
        U[grid.exterior_idx] = Q.extend(UI)
    # deterministic sign: positive sum over the interior
    sgn = np.where(UI.sum(axis=0) < 0, -1.0, 1.0)
    U = U * sgn
    w.flags.writeable = False
    U.flags.writeable = False
    return OracleResult(w, U)


def oracle_spectrum_p2(grid: Grid1D, s: float, bc=BC.DIRICHLET, beta=None) -> OracleResult:
    """Ascending eigenvalues of ``A u = lambda M u`` for G = t^2, with eigenvectors.

    Neumann and Robin eliminate the exterior unknowns (Schur complement) and
    return the extended eigenvectors on all nodes.
    """
    bc = BC.parse(bc)
    if bc is BC.ROBIN:
        if beta is None:
            raise ValueError("Robin oracle needs beta")
        b = np.asarray(beta, dtype=float)
        beta_key = float(b) if b.ndim == 0 else tuple(b.ravel().tolist())
    else:
        beta_key = None
    return _oracle_cached(grid, float(s), bc, beta_key)
