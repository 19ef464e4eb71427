"""Young functions G, their derivatives g = G', inverses and complements.

Three families are supported:

``power``
    ``G(t) = c * t**p`` with ``p >= 2``.
``powersum``
    ``G(t) = sum_k a_k * t**p_k`` with ``a_k > 0`` and every ``p_k >= 2``.
``user``
    an arbitrary pair of vectorised callables ``(G, g)``; these must pass
    :func:`verify_structure` before any solver accepts them.

All evaluators are total on ``[0, inf)`` and return exactly ``0`` at ``t = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "StructureError",
    "YoungFunction",
    "StructureReport",
    "power",
    "powersum",
    "from_functions",
    "from_descriptor",
    "eval_G_tilde",
    "G_tilde_quadrature",
    "invert_G",
    "invert_g",
    "exponents",
    "verify_structure",
    "xi_bounds",
    "complement",
]

EXPONENT_GRID = (1e-8, 1e8)
EXPONENT_SAMPLES = 4096


class StructureError(ValueError):
    """A Young function violates one of the structural conditions."""


def _as_nonneg(t, name="t"):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError(f"{name} must be >= 0")
    return arr


def _ret(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


@dataclass(frozen=True, eq=False)
class YoungFunction:
    """An immutable Young function.

    For the ``power`` and ``powersum`` families ``terms`` holds the
    ``(coefficient, exponent)`` pairs and the evaluators are closed form.
    For ``user`` functions ``G_fn`` and ``g_fn`` are called directly.
    """

    family: str
    terms: tuple[tuple[float, float], ...] = ()
    G_fn: Callable | None = None
    g_fn: Callable | None = None
    name: str = ""
    p_minus: float = field(default=math.nan)
    p_plus: float = field(default=math.nan)
    Gg_fn: Callable | None = None

    # -- evaluators -------------------------------------------------------

    @property
    def is_powersum(self) -> bool:
        return self.family in ("power", "powersum")

    @property
    def coefs(self) -> np.ndarray:
        return np.array([a for a, _ in self.terms], dtype=float)

    @property
    def exps(self) -> np.ndarray:
        return np.array([p for _, p in self.terms], dtype=float)

    def G(self, t):
        t = np.asarray(t, dtype=float)
        if self.is_powersum:
            out = np.zeros_like(t)
            for a, p in self.terms:
                out = out + a * t**p
            return _ret(out, t)
        out = np.where(t > 0, self.G_fn(np.where(t > 0, t, 1.0)), 0.0)
        return _ret(out, t)

    def g(self, t):
        t = np.asarray(t, dtype=float)
        if self.is_powersum:
            out = np.zeros_like(t)
            for a, p in self.terms:
                out = out + (a * p) * t ** (p - 1.0)
            return _ret(out, t)
        out = np.where(t > 0, self.g_fn(np.where(t > 0, t, 1.0)), 0.0)
        return _ret(out, t)

    def G_and_g(self, t):
        """``(G(t), g(t))`` on an array, sharing work when the function allows it."""
        t = np.asarray(t, dtype=float)
        if self.Gg_fn is None:
            return self.G(t), self.g(t)
        pos = t > 0
        Gv, gv = self.Gg_fn(np.where(pos, t, 1.0))
        return np.where(pos, Gv, 0.0), np.where(pos, gv, 0.0)

    def __call__(self, t):
        return self.G(t)

    # -- serialisation ----------------------------------------------------

    def descriptor(self) -> dict:
        if self.family == "power":
            (c, p), = self.terms
            d = {"family": "power", "p": p}
            if c != 1.0:
                d["coef"] = c
            return d
        if self.family == "powersum":
            return {"family": "powersum", "terms": [[a, p] for a, p in self.terms]}
        raise ValueError("user-supplied Young functions have no descriptor")

    def __repr__(self) -> str:
        if self.is_powersum:
            body = " + ".join(f"{a:g}*t^{p:g}" for a, p in self.terms)
        else:
            body = self.name or "user"
        return f"YoungFunction({self.family}: {body}; p-={self.p_minus:g}, p+={self.p_plus:g})"


def power(p: float, coef: float = 1.0) -> YoungFunction:
    """``G(t) = coef * t**p``. Requires ``p >= 2`` so that ``G(sqrt(t))`` is convex."""
    p = float(p)
    coef = float(coef)
    if not p >= 2.0:
        raise StructureError(f"power family requires p >= 2, got p={p}")
    if not coef > 0:
        raise StructureError(f"power family requires coef > 0, got {coef}")
    return YoungFunction("power", ((coef, p),), p_minus=p, p_plus=p)


def powersum(terms: Sequence[Sequence[float]]) -> YoungFunction:
    """``G(t) = sum a_k t**p_k`` with positive coefficients and exponents >= 2."""
    terms = tuple((float(a), float(p)) for a, p in terms)
    if not terms:
        raise StructureError("powersum needs at least one term")
    for a, p in terms:
        if not a > 0:
            raise StructureError(f"powersum coefficients must be > 0, got {a}")
        if not p >= 2.0:
            raise StructureError(f"powersum exponents must be >= 2, got {p}")
    terms = tuple(sorted(terms, key=lambda ap: ap[1]))
    exps = [p for _, p in terms]
    return YoungFunction("powersum", terms, p_minus=min(exps), p_plus=max(exps))


def from_functions(G: Callable, g: Callable, name: str = "user",
                   sample_count: int = EXPONENT_SAMPLES) -> YoungFunction:
    """Wrap a user pair ``(G, g = G')``. Both callables must accept numpy arrays."""
    F = YoungFunction("user", (), G_fn=G, g_fn=g, name=name)
    pm, pp = exponents(F, sample_count)
    return YoungFunction("user", (), G_fn=G, g_fn=g, name=name, p_minus=pm, p_plus=pp)


def from_descriptor(desc: dict) -> YoungFunction:
    fam = desc.get("family")
    if fam == "power":
        return power(desc["p"], desc.get("coef", 1.0))
    if fam == "powersum":
        return powersum(desc["terms"])
    raise ValueError(f"unknown Young family {fam!r}")


# -- exponents ----------------------------------------------------------------


def _ratio(F: YoungFunction, t: np.ndarray) -> np.ndarray:
    return t * F.g(t) / F.G(t)


def exponents(F: YoungFunction, sample_count: int = EXPONENT_SAMPLES) -> tuple[float, float]:
    """Infimum and supremum of ``t g(t) / G(t)`` over a log grid on [1e-8, 1e8].

    Closed-form values override the sampled ones for the built-in families.
    """
    if sample_count < 2:
        raise ValueError("sample_count must be >= 2")
    t = np.geomspace(*EXPONENT_GRID, sample_count)
    with np.errstate(all="ignore"):
        r = _ratio(F, t)
    if not np.all(np.isfinite(r)):
        raise StructureError("t g(t)/G(t) is unbounded or undefined on the sample grid")
    lo, hi = float(r.min()), float(r.max())
    if lo <= 1.0:
        raise StructureError(f"t g(t)/G(t) reaches {lo:g} <= 1")
    if F.is_powersum:
        exps = [p for _, p in F.terms]
        return float(min(exps)), float(max(exps))
    return lo, hi


def xi_bounds(F: YoungFunction, t):
    """``(min(t^p-, t^p+), max(t^p-, t^p+))``."""
    t = _as_nonneg(t)
    a, b = t**F.p_minus, t**F.p_plus
    return _ret(np.minimum(a, b), t), _ret(np.maximum(a, b), t)


# -- inverses -------------------------------------------------------------------


def _bisect_increasing(fn, y, rtol, atol_scale):
    """Vectorised bracketing + bisection for an increasing fn with fn(0) = 0."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    for _ in range(2100):
        short = fn(hi) < y
        if not short.any():
            break
        hi = np.where(short, hi * 2.0, hi)
        lo = np.where(short, hi / 2.0, lo)
    tol = atol_scale(y)
    t = 0.5 * (lo + hi)
    for _ in range(2200):
        t = 0.5 * (lo + hi)
        ft = fn(t)
        done = (np.abs(ft - y) <= tol) | (hi - lo <= rtol * hi) | (t <= lo) | (t >= hi)
        if done.all():
            break
        up = ft < y
        lo = np.where(~done & up, t, lo)
        hi = np.where(~done & ~up, t, hi)
    return np.where(y == 0, 0.0, t)


def invert_G(F: YoungFunction, y):
    """Return t with ``|G(t) - y| <= 1e-12 * max(1, y)``."""
    yy = _as_nonneg(y, "y")
    t = _bisect_increasing(F.G, yy, 0.0, lambda v: 1e-12 * np.maximum(1.0, v))
    return _ret(t.reshape(np.shape(yy)), yy)


def invert_g(F: YoungFunction, tau):
    """Generalised inverse of g.

    Closed form for ``power``, log-space Newton for power sums, bisection to
    1e-13 relative in t for user functions.
    """
    yy = _as_nonneg(tau, "tau")
    if F.family == "power":
        (c, p), = F.terms
        return _ret((yy / (c * p)) ** (1.0 / (p - 1.0)), yy)
    if F.is_powersum:
        t = _newton_g_inverse(F, np.atleast_1d(yy))
    else:
        t = _bisect_increasing(F.g, yy, 1e-13, lambda v: np.zeros_like(v))
    return _ret(t.reshape(np.shape(yy)), yy)


def _newton_g_inverse(F: YoungFunction, y: np.ndarray) -> np.ndarray:
    """Invert a power-sum ``g`` by Newton in log coordinates, from the right.

    ``s -> log g(exp s)`` is a log-sum-exp of linear functions, hence convex
    and increasing, so Newton iterates started where ``g >= y`` decrease
    monotonically to the root. Each single-term inverse
    ``(y / (a p))**(1/(p-1))`` is such a start. The map is close to linear,
    so a handful of steps reach machine precision.
    """
    out = np.zeros_like(y)
    pos = y > 0
    if not pos.any():
        return out
    yp = y[pos]
    a, p = F.coefs, F.exps
    ap = a * p
    t = np.min((yp[:, None] / ap) ** (1.0 / (p - 1.0)), axis=1)
    logy = np.log(yp)
    for _ in range(100):
        gv = 0.0
        tdg = 0.0
        for c, e in zip(ap, p):
            term = c * t ** (e - 1.0)
            gv = gv + term
            tdg = tdg + (e - 1.0) * term
        # step in s = log t; never move right of the current iterate
        step = np.maximum((np.log(gv) - logy) * gv / tdg, 0.0)
        t = t * np.exp(-step)
        if np.all(step <= 2e-16):
            break
    out[pos] = t
    return out


# -- complementary function ---------------------------------------------------


def eval_G_tilde(F: YoungFunction, t, method: str = "auto"):
    """Complementary Young function ``G~(t) = int_0^t g^{-1}``.

    ``method="auto"`` uses the closed form for ``power`` and the conjugate
    identity ``G~(t) = t s - G(s)`` with ``s = g^{-1}(t)`` otherwise;
    ``method="quadrature"`` integrates ``g^{-1}`` by adaptive Simpson.
    """
    tt = _as_nonneg(t)
    if method == "quadrature":
        out = np.array([G_tilde_quadrature(F, v) for v in np.ravel(tt)]).reshape(tt.shape)
        return _ret(out, tt)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if F.family == "power":
        (c, p), = F.terms
        q = p / (p - 1.0)
        return _ret((c * p) ** (-1.0 / (p - 1.0)) * tt**q / q, tt)
    s = invert_g(F, tt)
    out = np.maximum(tt * s - F.G(s), 0.0)
    return _ret(np.where(tt == 0, 0.0, out), tt)


def complement(F: YoungFunction) -> YoungFunction:
    """G~ packaged as a YoungFunction (closed form for the power family)."""
    if F.family == "power":
        (c, p), = F.terms
        q = p / (p - 1.0)
        coef = (c * p) ** (-1.0 / (p - 1.0)) / q
        return YoungFunction("power", ((coef, q),), p_minus=q, p_plus=q)
    pm, pp = F.p_minus, F.p_plus
    # conjugate exponents swap: p'- = p+ / (p+ - 1), p'+ = p- / (p- - 1)

    def both(t):
        # one inversion gives G~(t) = t s - G(s) and its derivative s = g^{-1}(t)
        s = invert_g(F, t)
        return np.maximum(t * s - F.G(s), 0.0), s

    return YoungFunction("user", (), G_fn=lambda t: eval_G_tilde(F, t), g_fn=lambda t: invert_g(F, t),
                         name=f"complement({F!r})", p_minus=pp / (pp - 1.0), p_plus=pm / (pm - 1.0),
                         Gg_fn=both)


def _scalar_inv_g(F, tau, tol=1e-13):
    if tau <= 0.0:
        return 0.0
    hi = 1.0
    while float(F.g(hi)) < tau:
        hi *= 2.0
    lo = 0.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if float(F.g(mid)) < tau:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def G_tilde_quadrature(F: YoungFunction, t: float, tol: float = 1e-12) -> float:
    """Adaptive Simpson of ``g^{-1}`` on ``[0, t]``; g inverted by bisection to 1e-13."""
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0

    def f(x):
        return _scalar_inv_g(F, x)

    def simpson(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = f(m)
        return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    # explicit stack keeps the summation order fixed (left to right)
    fa, fb = f(0.0), f(t)
    m, fm, whole = simpson(0.0, fa, t, fb)
    stack = [(0.0, fa, t, fb, m, fm, whole, tol, 0)]
    total = 0.0
    while stack:
        a, fa, b, fb, m, fm, whole, eps, depth = stack.pop()
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        delta = left + right - whole
        if depth >= 48 or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((m, fm, b, fb, rm, frm, right, eps / 2.0, depth + 1))
            stack.append((a, fa, m, fm, lm, flm, left, eps / 2.0, depth + 1))
    return total


# -- structural conditions ----------------------------------------------------


@dataclass
class StructureReport:
    """Pass/fail per structural condition; only G1 and G2 gate the solvers."""

    g_basic: bool
    g1: bool
    g2: bool
    g3: bool
    p_minus: float
    p_plus: float
    g2_worst_margin: float
    g3_exponent_zero: float
    g3_exponent_inf: float
    g3_finite_near_zero: bool
    g3_divergent_at_inf: bool
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.g_basic and self.g1 and self.g2

    def as_dict(self) -> dict:
        return {
            "g_basic": self.g_basic,
            "G1": self.g1,
            "G2": self.g2,
            "G3": self.g3,
            "p_minus": self.p_minus,
            "p_plus": self.p_plus,
            "G2_worst_margin": self.g2_worst_margin,
            "G3_exponent_zero": self.g3_exponent_zero,
            "G3_exponent_inf": self.g3_exponent_inf,
            "G3_finite_near_zero": self.g3_finite_near_zero,
            "G3_divergent_at_inf": self.g3_divergent_at_inf,
            "notes": list(self.notes),
        }


def verify_structure(F: YoungFunction, s: float, n: int = 1, samples: int = EXPONENT_SAMPLES,
                     triples: int = 4096, seed: int = 0) -> StructureReport:
    """Check (g1)-(g3) and G1-G3 numerically.

    G3 is classified from the local growth exponents of G at 0 and at infinity:
    ``G^{-1}(tau) ~ tau^{1/p}`` so the integrand behaves like
    ``tau^{1/p - (n+s)/n}``; the borderline exponent -1 counts as divergent.
    """
    notes = []
    t = np.geomspace(*EXPONENT_GRID, samples)
    with np.errstate(all="ignore"):
        gt = F.g(t)
        Gt = F.G(t)
        g_basic = bool(float(F.g(0.0)) == 0.0 and np.all(gt > 0) and np.all(np.diff(gt) >= 0)
                       and np.all(np.isfinite(Gt)) and np.all(np.diff(Gt) > 0))
        r = t * gt / Gt
    if not g_basic:
        notes.append("g fails g(0)=0, positivity or monotonicity on the sample grid")

    try:
        pm, pp = exponents(F, samples)
        g1 = 1.0 < pm <= pp < math.inf
    except StructureError as exc:
        pm, pp, g1 = math.nan, math.nan, False
        notes.append(f"G1: {exc}")

    rng = np.random.default_rng(seed)
    # midpoint convexity of t -> G(sqrt(t)) on log-uniform pairs
    a = 10.0 ** rng.uniform(-4, 4, triples)
    b = a * 10.0 ** rng.uniform(-3, 3, triples)
    with np.errstate(all="ignore"):
        lhs = F.G(np.sqrt(0.5 * (a + b)))
        rhs = 0.5 * (F.G(np.sqrt(a)) + F.G(np.sqrt(b)))
    margin = (rhs - lhs) / np.maximum(rhs, 1e-300)
    worst = float(np.nanmin(margin))
    g2 = worst >= -1e-12
    if not g2:
        notes.append(f"G2: G(sqrt(t)) fails midpoint convexity (relative margin {worst:.3e})")

    p0 = float(r[np.isfinite(r)][0]) if np.isfinite(r).any() else math.nan
    pinf = float(r[np.isfinite(r)][-1]) if np.isfinite(r).any() else math.nan
    if F.is_powersum:
        p0, pinf = pm, pp
    crit = s / n
    finite0 = (1.0 / p0) > crit + 1e-9
    div_inf = (1.0 / pinf) >= crit - 1e-9
    g3 = bool(finite0 and div_inf)
    if not finite0:
        notes.append(f"G3: integral on (0,1) diverges (local exponent {p0:g}, 1/p <= s/n = {crit:g})")
    if not div_inf:
        notes.append(f"G3: integral on (1,inf) converges (local exponent {pinf:g}, 1/p < s/n = {crit:g})")
    return StructureReport(g_basic, bool(g1), bool(g2), g3, pm, pp, worst, p0, pinf,
                           bool(finite0), bool(div_inf), notes)
