# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pair-loop kernels for power-sum Young functions.

Every routine walks the unordered pair list ``(i[k], j[k])`` once.
Reductions go through fixed-size blocks followed by a pairwise tree, so the
result depends only on the inputs, never on timing.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, fabs, copysign, sqrt, floor

cnp.import_array()

cdef enum:
    BLOCK = 128
    KMAX = 16
    NMAX = 16


cdef struct Term:
    double c
    double p
    int n
    int kind  # 0: integer power n, 1: n + 1/2, 2: libm pow


cdef inline double _pw(double x, const Term* t) noexcept nogil:
    cdef double r = 1.0
    cdef int i
    if t.kind == 2:
        return pow(x, t.p)
    for i in range(t.n):
        r *= x
    if t.kind == 1:
        r *= sqrt(x)
    return r


cdef inline double _eval(double x, Py_ssize_t K, const Term* terms) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t k
    for k in range(K):
        acc += terms[k].c * _pw(x, &terms[k])
    return acc


cdef Py_ssize_t _fill_terms(const double[::1] coefs, const double[::1] exps, bint derivative,
                            Term* out) except -1:
    """Terms of ``G`` (``derivative=False``) or of ``g`` (``c p t^(p-1)``)."""
    cdef Py_ssize_t K = exps.shape[0], k
    cdef double p, twice
    if K > KMAX:
        raise ValueError("too many terms")
    for k in range(K):
        p = exps[k] - 1.0 if derivative else exps[k]
        out[k].c = coefs[k] * exps[k] if derivative else coefs[k]
        out[k].p = p
        twice = 2.0 * p
        if p >= 0.0 and p <= NMAX and twice == floor(twice):
            out[k].n = <int>floor(p)
            out[k].kind = 0 if p == floor(p) else 1
        else:
            out[k].n = 0
            out[k].kind = 2
    return K


cdef void _tree_reduce(double[:, ::1] part, Py_ssize_t nb, Py_ssize_t K) noexcept nogil:
    cdef Py_ssize_t width = nb, half, b, k
    while width > 1:
        half = width // 2
        for b in range(half):
            for k in range(K):
                part[b, k] = part[2 * b, k] + part[2 * b + 1, k]
        if width % 2 == 1:
            for k in range(K):
                part[half, k] = part[width - 1, k]
            width = half + 1
        else:
            width = half


def term_sums(const double[::1] u, const Py_ssize_t[::1] pi, const Py_ssize_t[::1] pj,
              const double[::1] inv_ds, const double[::1] w, const double[::1] exps):
    """``out[k] = sum_pairs |D|**exps[k] * w`` with ``D = (u_i - u_j) * inv_ds``."""
    cdef Term terms[KMAX]
    cdef Py_ssize_t K = _fill_terms(np.ones(exps.shape[0]), exps, False, terms)
    cdef Py_ssize_t n = pi.shape[0]
    cdef Py_ssize_t nb = (n + BLOCK - 1) // BLOCK
    out = np.zeros(K)
    if n == 0:
        return out
    part_arr = np.zeros((nb, K))
    cdef double[:, ::1] part = part_arr
    cdef double[::1] o = out
    cdef Py_ssize_t b, m, lo, hi, k
    cdef double d, acc[KMAX]
    with nogil:
        for b in range(nb):
            lo = b * BLOCK
            hi = lo + BLOCK
            if hi > n:
                hi = n
            for k in range(K):
                acc[k] = 0.0
            for m in range(lo, hi):
                d = fabs(u[pi[m]] - u[pj[m]]) * inv_ds[m]
                for k in range(K):
                    acc[k] += _pw(d, &terms[k]) * w[m]
            for k in range(K):
                part[b, k] = acc[k]
        _tree_reduce(part, nb, K)
        for k in range(K):
            o[k] = part[0, k]
    return out


def gradient(const double[::1] u, const Py_ssize_t[::1] pi, const Py_ssize_t[::1] pj,
             const double[::1] inv_ds, const double[::1] w_ds, const double[::1] coefs,
             const double[::1] exps, double[::1] out):
    """Accumulate d/du of ``2 * sum_pairs G(|D|) w`` into ``out`` (ordered-pair factor included)."""
    cdef Term terms[KMAX]
    cdef Py_ssize_t K = _fill_terms(coefs, exps, True, terms)
    cdef Py_ssize_t n = pi.shape[0], m
    cdef double diff, phi
    with nogil:
        for m in range(n):
            diff = u[pi[m]] - u[pj[m]]
            # exponents exceed 1, so g(0) = 0 and no zero test is needed
            phi = copysign(2.0 * _eval(fabs(diff) * inv_ds[m], K, terms) * w_ds[m], diff)
            out[pi[m]] += phi
            out[pj[m]] -= phi


def pairing(const double[::1] u, const double[::1] v, const Py_ssize_t[::1] pi,
            const Py_ssize_t[::1] pj, const double[::1] inv_ds, const double[::1] w_ds,
            const double[::1] coefs, const double[::1] exps):
    """``sum_ordered g(|D_s u|) sign(D_s u) D_s v w``."""
    cdef Term terms[KMAX]
    cdef Py_ssize_t K = _fill_terms(coefs, exps, True, terms)
    cdef Py_ssize_t n = pi.shape[0]
    cdef Py_ssize_t nb = (n + BLOCK - 1) // BLOCK
    if n == 0:
        return 0.0
    part_arr = np.zeros((nb, 1))
    cdef double[:, ::1] part = part_arr
    cdef Py_ssize_t b, m, lo, hi
    cdef double diff, acc
    with nogil:
        for b in range(nb):
            lo = b * BLOCK
            hi = lo + BLOCK
            if hi > n:
                hi = n
            acc = 0.0
            for m in range(lo, hi):
                diff = u[pi[m]] - u[pj[m]]
                acc += (copysign(_eval(fabs(diff) * inv_ds[m], K, terms), diff)
                        * (v[pi[m]] - v[pj[m]]) * w_ds[m])
            part[b, 0] = acc
        _tree_reduce(part, nb, 1)
    return 2.0 * part[0, 0]


def row_flux(const double[::1] u, const Py_ssize_t[::1] rows, const Py_ssize_t[::1] cols,
             const double[:, ::1] inv_ds, const double[:, ::1] coef,
             const double[::1] coefs, const double[::1] exps):
    """``2 sum_c g(|u_r - u_c| inv_ds) sign(u_r - u_c) coef`` for each row, summed densely."""
    cdef Term terms[KMAX]
    cdef Py_ssize_t K = _fill_terms(coefs, exps, True, terms)
    cdef Py_ssize_t nr = rows.shape[0], nc = cols.shape[0], a, c
    out = np.zeros(nr)
    cdef double[::1] o = out
    cdef double ur, diff, acc
    with nogil:
        for a in range(nr):
            ur = u[rows[a]]
            acc = 0.0
            for c in range(nc):
                diff = ur - u[cols[c]]
                acc += copysign(_eval(fabs(diff) * inv_ds[a, c], K, terms), diff) * coef[a, c]
            o[a] = 2.0 * acc
    return out
