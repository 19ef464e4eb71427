"""Pair-sum kernels with a compiled core and a numpy fallback.

The compiled extension ``fglap._kernels`` is used for power-sum Young
functions when it imports; user-supplied Young functions always take the
numpy route. Set ``FGLAP_BACKEND=numpy`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from .domain import PairSet
from .young import YoungFunction

try:  # pragma: no cover - depends on the build
    from . import _kernels as _ext
except ImportError:  # pragma: no cover
    _ext = None

__all__ = ["BACKEND", "available_backends", "use_backend", "term_sums", "modular",
           "gradient", "pairing", "rayleigh_numerator"]


def available_backends() -> list[str]:
    return ["numpy"] + (["cython"] if _ext is not None else [])


BACKEND = "cython" if _ext is not None and os.environ.get("FGLAP_BACKEND", "") != "numpy" else "numpy"


def use_backend(name: str) -> str:
    """Switch backend at runtime; returns the previous one."""
    global BACKEND
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    prev, BACKEND = BACKEND, name
    return prev


def _compiled(F: YoungFunction) -> bool:
    return BACKEND == "cython" and F.is_powersum


def _absD(u, P: PairSet, s):
    return np.abs(u[P.i] - u[P.j]) * P.inv_ds(s)


# -- numpy reference paths ----------------------------------------------------


def _np_term_sums(u, P, s, exps):
    d = _absD(u, P, s)
    return np.array([np.sum(d**p * P.w) for p in exps])


def _np_modular(F, u, P, s):
    return float(np.sum(F.G(_absD(u, P, s)) * P.w))


def _np_phi(F, u, P, s):
    diff = u[P.i] - u[P.j]
    return np.sign(diff) * F.g(np.abs(diff) * P.inv_ds(s)) * P.w_ds(s)


def _np_gradient(F, u, P, s, out):
    phi = 2.0 * _np_phi(F, u, P, s)
    n = out.size
    out += np.bincount(P.i, phi, n) - np.bincount(P.j, phi, n)


def _np_pairing(F, u, v, P, s):
    return 2.0 * float(np.sum(_np_phi(F, u, P, s) * (v[P.i] - v[P.j])))


# -- public dispatch ------------------------------------------------------------


def term_sums(u: np.ndarray, P: PairSet, s: float, exps) -> np.ndarray:
    """``sum_pairs |D_s u|**p * w`` for each exponent p (unordered pairs)."""
    exps = np.ascontiguousarray(exps, dtype=float)
    if BACKEND == "cython":
        return _ext.term_sums(np.ascontiguousarray(u, dtype=float), P.i, P.j, P.inv_ds(s), P.w, exps)
    return _np_term_sums(u, P, s, exps)


def modular(F: YoungFunction, u: np.ndarray, P: PairSet, s: float) -> float:
    """``sum_ordered G(|D_s u|) w`` over the pair set."""
    if len(P) == 0:
        return 0.0
    if F.is_powersum:
        return 2.0 * float(np.dot(F.coefs, term_sums(u, P, s, F.exps)))
    return 2.0 * _np_modular(F, u, P, s)


def rayleigh_numerator(F: YoungFunction, u: np.ndarray, P: PairSet, s: float) -> float:
    """``sum_ordered g(|D_s u|) |D_s u| w``."""
    if len(P) == 0:
        return 0.0
    if F.is_powersum:
        return 2.0 * float(np.dot(F.coefs * F.exps, term_sums(u, P, s, F.exps)))
    d = _absD(u, P, s)
    return 2.0 * float(np.sum(F.g(d) * d * P.w))


def gradient(F: YoungFunction, u: np.ndarray, P: PairSet, s: float, out: np.ndarray) -> np.ndarray:
    """Add the gradient of ``sum_ordered G(|D_s u|) w`` to ``out`` in place."""
    if len(P) == 0:
        return out
    if _compiled(F):
        _ext.gradient(np.ascontiguousarray(u, dtype=float), P.i, P.j, P.inv_ds(s), P.w_ds(s),
                      F.coefs, F.exps, out)
    else:
        _np_gradient(F, u, P, s, out)
    return out


def pairing(F: YoungFunction, u: np.ndarray, v: np.ndarray, P: PairSet, s: float) -> float:
    """``sum_ordered g(|D_s u|) sign(D_s u) D_s v w``."""
    if len(P) == 0:
        return 0.0
    if _compiled(F):
        return float(_ext.pairing(np.ascontiguousarray(u, dtype=float),
                                  np.ascontiguousarray(v, dtype=float),
                                  P.i, P.j, P.inv_ds(s), P.w_ds(s), F.coefs, F.exps))
    return _np_pairing(F, u, v, P, s)
