"""Randomised inequality suites for a Young function on a grid.

Each suite draws its own samples from a seeded generator and reports the
number of violations and the worst margin (``rhs - lhs`` in the suite's
own normalisation; negative means violated). Suites marked ``hard`` decide
the exit status of ``fglap verify``; the others are reported for information.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..domain import BC, Grid1D
from ..modular import BULK, Modular, holder_check, luxemburg_norm
from ..operators import Energy, interior_operator, normal_derivative, pairing_star
from ..young import YoungFunction, eval_G_tilde, verify_structure, xi_bounds

__all__ = ["SuiteResult", "VerifyReport", "run_verify", "SUITES"]


@dataclass
class SuiteResult:
    name: str
    hard: bool
    samples: int
    violations: int
    worst_margin: float
    seconds: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {"name": self.name, "hard": self.hard, "samples": self.samples,
                "violations": self.violations, "worst_margin": self.worst_margin,
                "passed": self.passed, "seconds": self.seconds, "note": self.note}


@dataclass
class VerifyReport:
    suites: list[SuiteResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.suites if r.hard)

    def as_dict(self) -> dict:
        return {"ok": self.ok, "suites": [r.as_dict() for r in self.suites]}


def _loguniform(rng, lo, hi, n):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), n))


def _random_values(rng, grid: Grid1D, amplitude: float) -> np.ndarray:
    """Smooth random node values: a few random cosines across the whole box."""
    x = np.asarray(grid.x)
    L = x[-1] - x[0] + grid.h
    k = np.arange(1, 5)
    c = rng.normal(0.0, 0.5, k.size)
    ph = rng.uniform(0.0, 2 * np.pi, k.size)
    v = (c[None, :] * np.cos(np.pi * k[None, :] * (x[:, None] - x[0]) / L * 4 + ph)).sum(axis=1)
    v += 0.1 * rng.normal(size=x.size)
    return amplitude * v / max(1.0, float(np.abs(v).max()))


def _margin_stats(margin: np.ndarray) -> tuple[int, float]:
    margin = np.asarray(margin, dtype=float)
    bad = ~(margin >= 0)
    return int(bad.sum()), float(np.nanmin(margin)) if margin.size else 0.0


# -- pointwise Young-function suites --------------------------------------------


def suite_young(F, rng, n, tilde_factor=1.0):
    """``a b <= G(a) + G~(b)``."""
    a = rng.uniform(0.0, 50.0, n)
    b = rng.uniform(0.0, 50.0, n)
    rhs = F.G(a) + tilde_factor * eval_G_tilde(F, b)
    return _margin_stats(rhs - a * b + 1e-10 * (1.0 + a * b))


def suite_scaling(F, rng, n):
    """``min(a^p-, a^p+) G(b) <= G(a b) <= max(a^p-, a^p+) G(b)``."""
    a = _loguniform(rng, 1e-3, 1e3, n)
    b = _loguniform(rng, 1e-3, 1e3, n)
    lo, hi = xi_bounds(F, a)
    Gab, Gb = F.G(a * b), F.G(b)
    m1 = (Gab - lo * Gb) / Gab + 1e-12
    m2 = (hi * Gb - Gab) / Gab + 1e-12
    return _margin_stats(np.minimum(m1, m2))


def suite_quasi_triangle(F, rng, n):
    """``G(a + b) <= 2^p+ (G(a) + G(b))``."""
    a = _loguniform(rng, 1e-3, 1e3, n)
    b = _loguniform(rng, 1e-3, 1e3, n)
    rhs = 2.0**F.p_plus * (F.G(a) + F.G(b))
    return _margin_stats((rhs - F.G(a + b)) / rhs + 1e-12)


def suite_complement_of_derivative(F, rng, n):
    """``G~(g(t)) <= p+ G(t)``."""
    t = _loguniform(rng, 1e-4, 1e4, n)
    rhs = F.p_plus * F.G(t)
    return _margin_stats((rhs - eval_G_tilde(F, F.g(t))) / rhs + 1e-10)


def suite_midpoint(F, rng, n):
    """``(G(|a|) + G(|b|)) / 2 >= G(|a+b|/2) + G(|a-b|/2)``."""
    scale = _loguniform(rng, 1e-3, 1e3, n)
    a = rng.normal(size=n) * scale
    b = rng.normal(size=n) * scale
    lhs = 0.5 * (F.G(np.abs(a)) + F.G(np.abs(b)))
    rhs = F.G(np.abs(a + b) / 2) + F.G(np.abs(a - b) / 2)
    return _margin_stats((lhs - rhs) / np.maximum(lhs, 1e-300) + 1e-12)


# -- field suites -------------------------------------------------------------------


def suite_norm_sandwich_bulk(F, grid, rng, n):
    """``xi-(||u||) <= I(u) <= xi+(||u||)`` with the Luxemburg norm of the bulk modular."""
    mod = Modular(F, grid, BULK)
    margins = np.empty(n)
    for k in range(n):
        u = _random_values(rng, grid, _loguniform(rng, 0.05, 20.0, 1)[0])
        val = mod(u)
        lo, hi = xi_bounds(F, luxemburg_norm(F, mod, u))
        margins[k] = min(val - lo * (1 - 1e-9), hi * (1 + 1e-9) - val) / val
    return _margin_stats(margins)


def suite_norm_sandwich_gagliardo(F, grid, s, rng, n):
    """Same sandwich for the Gagliardo modular of Dirichlet fields.

    Exterior-exterior pairs vanish identically for Dirichlet fields, so the
    Dirichlet energy (which skips them) equals the full modular here.
    """
    J = Energy(F, grid, s, BC.DIRICHLET)
    margins = np.empty(n)
    for k in range(n):
        u = J.project(_random_values(rng, grid, _loguniform(rng, 0.05, 20.0, 1)[0]))
        prof = J.profile(u)
        val = prof(1.0)
        lo, hi = xi_bounds(F, luxemburg_norm(F, J.modular, u))
        margins[k] = min(val - lo * (1 - 1e-9), hi * (1 + 1e-9) - val) / val
    return _margin_stats(margins)


def suite_holder(F, grid, rng, n):
    """Returns ``(factor-2 stats, constant-free stats)``."""
    m2 = np.empty(n)
    m1 = np.empty(n)
    for k in range(n):
        u = _random_values(rng, grid, _loguniform(rng, 0.05, 20.0, 1)[0])
        v = _random_values(rng, grid, _loguniform(rng, 0.05, 20.0, 1)[0])
        r = holder_check(F, grid, u, v)
        m2[k] = (r.classical_bound * (1 + 1e-10) - r.lhs) / max(r.classical_bound, 1e-300)
        m1[k] = (r.rhs * (1 + 1e-10) - r.lhs) / max(r.rhs, 1e-300)
    return _margin_stats(m2), _margin_stats(m1)


def suite_monotonicity(F, grid, s, rng, n):
    """``<J'(u) - J'(v), u - v> >= 4 J((u - v) / 2)`` on Dirichlet pairs."""
    J = Energy(F, grid, s, BC.DIRICHLET)
    margins = np.empty(n)
    for k in range(n):
        u = J.project(_random_values(rng, grid, _loguniform(rng, 0.05, 5.0, 1)[0]))
        v = J.project(_random_values(rng, grid, _loguniform(rng, 0.05, 5.0, 1)[0]))
        w = u - v
        pu, pv = J.pairing(u, w), J.pairing(v, w)
        rhs = 4.0 * J(0.5 * w)
        scale = abs(pu) + abs(pv) + rhs + 1e-300
        margins[k] = (pu - pv - rhs) / scale + 1e-12
    return _margin_stats(margins)


def suite_integration_by_parts(F, grid, s, rng, n):
    """Absolute gap between the star pairing and its interior/exterior split (limit 1e-12)."""
    I, E = grid.interior_idx, grid.exterior_idx
    margins = np.empty(n)
    for k in range(n):
        u = _random_values(rng, grid, rng.uniform(0.1, 1.0))
        v = _random_values(rng, grid, rng.uniform(0.1, 1.0))
        lhs = pairing_star(F, grid, u, v, s)
        L = interior_operator(F, grid, u, s)
        N = normal_derivative(F, grid, u, s)
        rhs = (np.dot(v[I], L) + np.dot(v[E], N)) * grid.h
        margins[k] = 1e-12 - abs(lhs - rhs)
    return _margin_stats(margins)


def suite_pairing_sandwich(F, grid, s, rng, n):
    """``p- J(u) <= <J'(u), u> <= p+ J(u)`` for Neumann-type fields."""
    J = Energy(F, grid, s, BC.NEUMANN)
    margins = np.empty(n)
    for k in range(n):
        u = _random_values(rng, grid, _loguniform(rng, 0.05, 5.0, 1)[0])
        j = J(u)
        pj = J.rayleigh_numerator(u)
        margins[k] = min(pj - F.p_minus * j, F.p_plus * j - pj) / max(j, 1e-300) + 1e-10
    return _margin_stats(margins)


SUITES = (
    "structure_G1_G2", "structure_G3", "young", "scaling_sandwich", "quasi_triangle",
    "complement_of_derivative", "midpoint_inequality", "norm_sandwich_bulk",
    "norm_sandwich_gagliardo", "holder_factor2", "holder_constant_free",
    "operator_monotonicity", "integration_by_parts", "pairing_sandwich",
)


def run_verify(F: YoungFunction, grid: Grid1D, s: float, samples: int = 10_000, seed: int = 42,
               tilde_factor: float = 1.0, only=None) -> VerifyReport:
    """Run every suite (or those named in ``only``).

    ``tilde_factor`` scales G~ inside the Young suite; values below 1 inject a
    fault that the suite must detect.
    """
    rep = VerifyReport()
    want = set(SUITES if only is None else only)
    unknown = want - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites {sorted(unknown)}")

    def run(name, hard, fn, note=""):
        if name not in want:
            return
        t0 = time.perf_counter()
        # one child generator per suite keeps suites independent of each other
        rng = np.random.default_rng([seed, SUITES.index(name)])
        viol, worst = fn(rng)
        rep.suites.append(SuiteResult(name, hard, samples, viol, worst, time.perf_counter() - t0, note))

    if "structure_G1_G2" in want or "structure_G3" in want:
        t0 = time.perf_counter()
        sr = verify_structure(F, s)
        dt = time.perf_counter() - t0
        if "structure_G1_G2" in want:
            ok = sr.g_basic and sr.g1 and sr.g2
            # the convexity test tolerates 1e-12; fold it into the margin like the other suites
            rep.suites.append(SuiteResult("structure_G1_G2", True, 1, 0 if ok else 1,
                                          sr.g2_worst_margin + 1e-12, dt, "; ".join(sr.notes)))
        if "structure_G3" in want:
            rep.suites.append(SuiteResult("structure_G3", False, 1, 0 if sr.g3 else 1, 0.0, 0.0,
                                          "integrability classified from growth exponents"))

    run("young", True, lambda r: suite_young(F, r, samples, tilde_factor))
    run("scaling_sandwich", True, lambda r: suite_scaling(F, r, samples))
    run("quasi_triangle", True, lambda r: suite_quasi_triangle(F, r, samples))
    run("complement_of_derivative", True, lambda r: suite_complement_of_derivative(F, r, samples))
    run("midpoint_inequality", True, lambda r: suite_midpoint(F, r, samples))
    run("norm_sandwich_bulk", True, lambda r: suite_norm_sandwich_bulk(F, grid, r, samples))
    run("norm_sandwich_gagliardo", True, lambda r: suite_norm_sandwich_gagliardo(F, grid, s, r, samples))
    if "holder_factor2" in want or "holder_constant_free" in want:
        t0 = time.perf_counter()
        rng = np.random.default_rng([seed, SUITES.index("holder_factor2")])
        (v2, w2), (v1, w1) = suite_holder(F, grid, rng, samples)
        dt = time.perf_counter() - t0
        if "holder_factor2" in want:
            rep.suites.append(SuiteResult("holder_factor2", True, samples, v2, w2, dt))
        if "holder_constant_free" in want:
            rep.suites.append(SuiteResult("holder_constant_free", False, samples, v1, w1, 0.0,
                                          "informational: the sharp constant is not asserted"))
    run("operator_monotonicity", True, lambda r: suite_monotonicity(F, grid, s, r, samples))
    run("integration_by_parts", True, lambda r: suite_integration_by_parts(F, grid, s, r, samples))
    run("pairing_sandwich", True, lambda r: suite_pairing_sandwich(F, grid, s, r, samples))
    return rep
