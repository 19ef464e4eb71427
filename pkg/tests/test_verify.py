import pytest

from fglap import build_grid, power, powersum
from fglap.cli.verify import SUITES, run_verify

grid = build_grid(-1.0, 1.0, 16, 2.0)


@pytest.mark.parametrize("F", [power(2.0), power(3.0), powersum([[1.0, 2.0], [1.0, 4.0]])], ids=repr)
def test_hard_suites_pass(F):
    rep = run_verify(F, grid, 0.5, samples=300, seed=5)
    failed = [r.name for r in rep.suites if r.hard and not r.passed]
    assert rep.ok, failed
    assert {r.name for r in rep.suites} == set(SUITES)


def test_fault_injection_is_detected():
    rep = run_verify(power(2.0), grid, 0.5, samples=300, tilde_factor=1 / 1.1, only=["young"])
    assert not rep.ok and rep.suites[0].violations > 0


def test_suites_are_reproducible():
    a = run_verify(power(3.0), grid, 0.5, samples=100, seed=1, only=["midpoint_inequality", "young"])
    b = run_verify(power(3.0), grid, 0.5, samples=100, seed=1, only=["young", "midpoint_inequality"])
    assert [(r.name, r.worst_margin) for r in a.suites] == [(r.name, r.worst_margin) for r in b.suites]


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_verify(power(2.0), grid, 0.5, only=["nope"])
