import numpy as np
import pytest

from fglap import power, powersum
from fglap.domain import BC, Field, build_grid
from fglap.modular import BULK, Modular
from fglap.operators import Bulk, Energy
from fglap.solver import (InfeasibleError, SolverConfig, maximize_I_on_J, minimax_k2,
                          minimize_J_on_I, oracle_p_lower, oracle_spectrum_p2, rayleigh_bar,
                          rescale_to_modular, sweep_alpha)
from fglap.solver.minimax import loop_level

G32 = build_grid(-1.0, 1.0, 32, 2.0)
PS = powersum([[1.0, 2.0], [1.0, 4.0]])


def cfg(**kw):
    return SolverConfig(**{"alpha": 1.0, **kw})


def test_rescale_examples(rng):
    u = Field(G32, rng.normal(size=G32.n_nodes))
    F = power(3.0)
    M = Modular(F, G32, BULK)
    m = M(u)
    v = rescale_to_modular(F, G32, u, M, 2.0)
    np.testing.assert_allclose(v.values, u.values * (2.0 / m) ** (1 / 3), rtol=1e-12)
    same = rescale_to_modular(F, G32, u, M, m)
    np.testing.assert_allclose(same.values, u.values, rtol=1e-12)
    M2 = Modular(PS, G32, BULK)
    w = rescale_to_modular(PS, G32, u, M2, 0.37)
    assert M2(w) == pytest.approx(0.37, rel=1e-10)
    with pytest.raises(InfeasibleError):
        rescale_to_modular(PS, G32, Field(G32, np.zeros(G32.n_nodes)), M2, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(alpha=0.0)
    with pytest.raises(ValueError):
        SolverConfig(alpha=1.0, bc="robin")
    with pytest.raises(ValueError):
        SolverConfig(alpha=1.0, beta=1.0)
    with pytest.raises(ValueError):
        SolverConfig(alpha=1.0, s=1.0)
    with pytest.raises(ValueError):
        SolverConfig(alpha=1.0, initial_guess="supplied")


def test_quadratic_minimum_matches_oracle():
    lam0 = oracle_spectrum_p2(G32, 0.5).eigenvalues[0]
    ep = minimize_J_on_I(power(2.0), G32, cfg(initial_guess="randomSymmetric"))
    assert ep.converged
    assert ep.lam == pytest.approx(lam0, rel=1e-6)
    assert ep.value_I == pytest.approx(1.0, rel=1e-10)


def test_power_minimum_is_alpha_independent():
    lams = [minimize_J_on_I(power(3.0), G32, cfg(alpha=a)).lam for a in (0.5, 1.0, 2.0)]
    np.testing.assert_allclose(lams, lams[1], rtol=1e-8)


def test_neumann_minimum_is_zero():
    ep = minimize_J_on_I(PS, G32, cfg(bc="neumann", initial_guess="randomSymmetric"))
    assert ep.converged and abs(ep.lam) <= 1e-8 and ep.value_J <= 1e-8


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_maximum_product_identity(p):
    ep = maximize_I_on_J(power(p), G32, cfg(alpha=1.5))
    assert ep.converged
    assert ep.value_I * ep.lam == pytest.approx(1.5, rel=1e-8)


def test_maximum_is_sign_invariant():
    u0 = oracle_spectrum_p2(G32, 0.5).mode(0)
    a = maximize_I_on_J(PS, G32, cfg(), u0=u0)
    b = maximize_I_on_J(PS, G32, cfg(), u0=-u0)
    assert a.lam == b.lam


def test_maximum_needs_nonconstant_guess():
    c = np.ones(G32.n_nodes)
    with pytest.raises(InfeasibleError):
        maximize_I_on_J(PS, G32, cfg(bc="neumann", initial_guess="supplied", initial_values=c))


@pytest.mark.parametrize("bc,beta", [("dirichlet", None), ("robin", 1.0)])
def test_converged_pair_invariants(bc, beta):
    c = cfg(bc=bc, beta=beta, alpha=0.8)
    ep = minimize_J_on_I(PS, G32, c)
    assert ep.converged
    J, I = Energy(PS, G32, 0.5, bc, beta), Bulk(PS, G32)
    u = ep.u.values
    # multiplier sandwich with exponents (2, 4)
    assert 0.5 * J(u) / I(u) <= ep.lam * (1 + 1e-8)
    assert ep.lam <= 2.0 * J(u) / I(u) * (1 + 1e-8)
    # the multiplier equals the quotient of pairings at its own eigenfunction
    assert ep.lam >= rayleigh_bar(PS, G32, u, 0.5, bc, beta) - 1e-8
    # descent: accepted iterates never raise J
    Js = np.array([h[1] for h in ep.history])
    assert np.all(np.diff(Js) <= 1e-12 * Js[0])
    # first eigenfunction is one-signed up to solver tolerance
    assert J(np.abs(u)) <= J(u) + 1e-8


def test_rayleigh_bar_examples(rng):
    u = rng.normal(size=G32.n_nodes)
    F = power(2.0)
    J, I = Energy(F, G32, 0.5), Bulk(F, G32)
    assert rayleigh_bar(F, G32, u, 0.5) == pytest.approx(J(u) / I(u), rel=1e-12)
    F3 = power(3.0)
    assert rayleigh_bar(F3, G32, 2.7 * u, 0.5) == pytest.approx(rayleigh_bar(F3, G32, u, 0.5), rel=1e-12)
    with pytest.raises(InfeasibleError):
        rayleigh_bar(F, G32, np.zeros(G32.n_nodes), 0.5)


def test_minimax_upper_bound_and_ordering():
    c1 = minimize_J_on_I(PS, G32, cfg())
    c2 = minimax_k2(PS, G32, cfg(), basis_pairs=2, theta_samples=32, n_modes=4)
    assert c2.diagnostics["upper_bound"] is True
    assert c2.value_J >= c1.value_J
    lam2 = oracle_spectrum_p2(G32, 0.5).eigenvalues[1]
    q = minimax_k2(power(2.0), G32, cfg(), basis_pairs=2, theta_samples=64, n_modes=4)
    assert lam2 * (1 - 1e-10) <= q.value_J <= 1.05 * lam2


def test_minimax_finer_loop_never_lower_for_fixed_pair():
    orc = oracle_spectrum_p2(G32, 0.5)
    pair = (orc.mode(0) + 0.3 * orc.mode(2), orc.mode(1) - 0.2 * orc.mode(3))
    J, I = Energy(PS, G32, 0.5), Bulk(PS, G32)
    levels = [loop_level(J, I, *pair, 1.0, n)[0] for n in (16, 32, 64, 128)]
    # the finer grids contain the coarser ones, so the sampled maximum can only grow
    assert all(b >= a for a, b in zip(levels, levels[1:]))
    mm = [minimax_k2(PS, G32, cfg(), theta_samples=n, pair=pair).value_J for n in (16, 32)]
    assert mm[1] >= mm[0]


def test_minimax_degenerate_pair():
    v = oracle_spectrum_p2(G32, 0.5).mode(0)
    with pytest.raises(ValueError):
        minimax_k2(PS, G32, cfg(), pair=(v, 2 * v))
    with pytest.raises(ValueError):
        minimax_k2(PS, G32, cfg(), theta_samples=8)


def test_sweep_power_is_flat_and_inf_is_min():
    res = sweep_alpha(power(3.0), G32, cfg(), [0.25, 0.5, 1.0, 2.0])
    assert res.converged.all()
    np.testing.assert_allclose(res.lambdas, res.lambdas[0], rtol=1e-6)
    ps = sweep_alpha(PS, G32, cfg(), [0.2, 0.6, 1.0])
    assert ps.inf_lambda == ps.lambdas.min()
    assert [r["alpha"] for r in ps.rows()] == [0.2, 0.6, 1.0]
    with pytest.raises(ValueError):
        sweep_alpha(PS, G32, cfg(), [1.0, 0.5])


def test_power_lower_comparison():
    lam0 = oracle_spectrum_p2(G32, 0.5).eigenvalues[0]
    assert oracle_p_lower(G32, 0.5, 2.0, 1.0).lam == pytest.approx(lam0, rel=1e-6)
    a, b = (oracle_p_lower(G32, 0.5, 3.0, al).lam for al in (0.5, 2.0))
    assert np.isfinite(a) and a > 0
    assert a == pytest.approx(b, rel=1e-6)
