import numpy as np
import pytest

from fglap import kernels, power, powersum
from fglap.domain import build_grid
from fglap.operators import interior_operator, normal_derivative

needs_ext = pytest.mark.skipif("cython" not in kernels.available_backends(),
                               reason="compiled extension not built")

FAMILIES = [power(2.0), power(3.0), powersum([[1.0, 2.0], [1.0, 4.0]]),
            powersum([[1.0, 2.0], [0.5, 2.5]]), powersum([[2.0, 2.2], [0.1, 5.7]])]


@pytest.fixture
def backend():
    prev = kernels.BACKEND
    yield kernels.use_backend
    kernels.use_backend(prev)


def _run_all(F, g, u, v, s):
    P = g.star_pairs
    out = np.zeros(g.n_nodes)
    kernels.gradient(F, u, P, s, out)
    return {
        "modular": kernels.modular(F, u, P, s),
        "term_sums": kernels.term_sums(u, P, s, F.exps),
        "rayleigh": kernels.rayleigh_numerator(F, u, P, s),
        "gradient": out,
        "pairing": kernels.pairing(F, u, v, P, s),
        "pairing_abs": 2.0 * np.sum(F.g(np.abs(u[P.i] - u[P.j]) * P.inv_ds(s))
                                    * np.abs(v[P.i] - v[P.j]) * P.w_ds(s)),
        "interior": interior_operator(F, g, u, s),
        "normal": normal_derivative(F, g, u, s),
    }


@needs_ext
@pytest.mark.parametrize("F", FAMILIES, ids=repr)
@pytest.mark.parametrize("s", [0.2, 0.5, 0.85])
def test_backends_agree(F, s, backend):
    g = build_grid(-1.0, 1.0, 24, 3.0)
    rng = np.random.default_rng(7)
    u, v = rng.normal(size=g.n_nodes), rng.normal(size=g.n_nodes)
    backend("numpy")
    ref = _run_all(F, g, u, v, s)
    backend("cython")
    got = _run_all(F, g, u, v, s)
    for k in ref:
        # the pairing cancels; measure it against the sum of term magnitudes
        scale = ref["pairing_abs"] if k == "pairing" else max(np.max(np.abs(ref[k])), 1e-300)
        assert np.max(np.abs(np.asarray(got[k]) - ref[k])) <= 1e-13 * scale, k


@needs_ext
def test_compiled_reduction_is_deterministic(backend):
    backend("cython")
    g = build_grid(-1.0, 1.0, 64, 4.0)
    F = powersum([[1.0, 2.0], [1.0, 4.0]])
    u = np.random.default_rng(3).normal(size=g.n_nodes)
    vals = {kernels.modular(F, u, g.star_pairs, 0.5) for _ in range(5)}
    assert len(vals) == 1


def test_use_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def test_gradient_accumulates(backend):
    g = build_grid(-1.0, 1.0, 8, 1.0)
    F = power(2.0)
    u = np.random.default_rng(0).normal(size=g.n_nodes)
    for b in kernels.available_backends():
        backend(b)
        once = kernels.gradient(F, u, g.star_pairs, 0.5, np.zeros(g.n_nodes)).copy()
        out = np.ones(g.n_nodes)
        kernels.gradient(F, u, g.star_pairs, 0.5, out)
        np.testing.assert_allclose(out, once + 1.0, rtol=1e-14)
