import numpy as np
import pytest

from gatebudget.canonical import canonical_gate, decompose
from gatebudget.errors import NotUnitary
from gatebudget.invariants import locally_equivalent, theorem2_check
from gatebudget.numkernel import haar_unitary, is_unitary, kron, random_source
from gatebudget.synth import (
    SynthesisProblem,
    assemble,
    circuit_residual,
    obstruction_evidence,
    su2,
    synthesize,
)

PI = np.pi
B_C = (PI / 4, PI / 8, 0.0)
SQRT_SWAP_C = (PI / 8, PI / 8, PI / 8)


def test_su2_is_special_unitary(rng):
    for a, b, g in rng.uniform(-7, 7, size=(50, 3)):
        u = su2(a, b, g)
        assert is_unitary(u, 1e-14)
        assert np.linalg.det(u) == pytest.approx(1.0, abs=1e-14)


def test_assemble_order(rng):
    e = haar_unitary(4, rng)
    layers = [(haar_unitary(2, rng), haar_unitary(2, rng)) for _ in range(3)]
    k = [kron(a, b) for a, b in layers]
    assert np.allclose(assemble(e, layers), k[2] @ e @ k[1] @ e @ k[0], atol=1e-13)
    with pytest.raises(ValueError):
        assemble(e, layers[:1])


def test_two_swap_class_gates_cancel_to_local(rng, gates):
    # a swap-class gate commutes a local through itself with the factors exchanged
    for _ in range(20):
        s1 = kron(haar_unitary(2, rng), haar_unitary(2, rng)) @ gates["SWAP"]
        s2 = gates["SWAP"] @ kron(haar_unitary(2, rng), haar_unitary(2, rng))
        mid = (haar_unitary(2, rng), haar_unitary(2, rng))
        u = s2 @ kron(*mid) @ s1
        assert np.allclose(decompose(u).canonical, 0.0, atol=1e-7)


def test_circuit_residual_ignores_global_phase(rng):
    u = haar_unitary(4, rng)
    assert circuit_residual(u, np.exp(0.7j) * u) == pytest.approx(0.0, abs=1e-14)
    assert circuit_residual(u, -u) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize(
    "kwargs", [{"applications": 0}, {"restarts": 0}, {"objective_tolerance": 0.0}]
)
def test_problem_validation(kwargs):
    base = {"elementary": np.eye(4), "target": np.eye(4), "applications": 2}
    with pytest.raises(ValueError):
        SynthesisProblem(**{**base, **kwargs})


def test_synthesize_rejects_non_unitary():
    with pytest.raises(NotUnitary):
        synthesize(SynthesisProblem(np.ones((4, 4)), np.eye(4), 2))


def _check_result(res, elementary, target, n):
    assert res.converged
    assert res.invariant_residual < 1e-6
    assert res.residual < 1e-6
    assert len(res.locals) == n + 1
    assert circuit_residual(assemble(elementary, res.locals), target) == pytest.approx(res.residual, abs=1e-12)


def test_b_gate_two_applications(rng):
    e = canonical_gate(B_C)
    for _ in range(5):
        t = haar_unitary(4, rng)
        _check_result(synthesize(SynthesisProblem(e, t, 2, seed=int(rng.integers(2**31)))), e, t, 2)


def test_cnot_three_applications(rng, gates):
    for _ in range(3):
        t = haar_unitary(4, rng)
        res = synthesize(SynthesisProblem(gates["CNOT"], t, 3, seed=int(rng.integers(2**31))))
        _check_result(res, gates["CNOT"], t, 3)


def test_cnot_two_applications_cannot_reach_swap(gates):
    res = synthesize(SynthesisProblem(gates["CNOT"], gates["SWAP"], 2, restarts=20))
    assert not res.converged
    assert res.invariant_residual > 1e-3
    assert len(res.restart_residuals) == 20
    assert res.residual > 1e-3


def test_single_application(gates):
    res = synthesize(SynthesisProblem(gates["CNOT"], gates["CZ"], 1))
    _check_result(res, gates["CNOT"], gates["CZ"], 1)
    assert res.iterations_used == 0
    res = synthesize(SynthesisProblem(gates["CNOT"], gates["SWAP"], 1))
    assert not res.converged


def test_synthesis_is_deterministic(gates):
    t = haar_unitary(4, random_source(77))
    a = synthesize(SynthesisProblem(gates["CNOT"], t, 3, restarts=5, seed=9))
    b = synthesize(SynthesisProblem(gates["CNOT"], t, 3, restarts=5, seed=9))
    assert a.residual == b.residual and a.invariant_residual == b.invariant_residual
    assert a.restart_residuals == b.restart_residuals
    for (p, q), (r, s) in zip(a.locals, b.locals):
        assert np.array_equal(p, r) and np.array_equal(q, s)


def test_budget_exhaustion_returns_best_effort(gates):
    res = synthesize(
        SynthesisProblem(gates["CNOT"], haar_unitary(4, random_source(3)), 3, restarts=2, max_iterations=5)
    )
    assert not res.converged
    assert res.invariant_residual >= 0
    assert res.iterations_used <= 2 * 5 + 2


def test_theorem2_holds_along_synthesized_circuits(gates):
    rng = random_source(1)
    e = canonical_gate(B_C)
    for elem, n in [(e, 2), (e, 2), (gates["CNOT"], 3)]:
        t = haar_unitary(4, rng)
        res = synthesize(SynthesisProblem(elem, t, n, seed=int(rng.integers(2**31))))
        assert res.converged
        prefix = kron(*res.locals[0])
        for a, b in res.locals[1:]:
            step = kron(a, b) @ elem
            assert theorem2_check(step, prefix)
            prefix = step @ prefix
        assert locally_equivalent(prefix, t)


def test_obstruction_partitions_without_synthesis():
    rep = obstruction_evidence(B_C, 2, 1000, random_source(2), run_synthesis=False)
    assert rep.obstructed == [] and len(rep.feasible) == 1000
    rep = obstruction_evidence(SQRT_SWAP_C, 6, 1000, random_source(2), run_synthesis=False)
    assert rep.obstructed == []
    rep = obstruction_evidence(SQRT_SWAP_C, 3, 1000, random_source(2), run_synthesis=False)
    assert len(rep.obstructed) > 0
    assert len(rep.obstructed) + len(rep.feasible) == 1000
    with pytest.raises(ValueError):
        obstruction_evidence(B_C, 2, 0, random_source(2))


def test_obstruction_report_statistics():
    rep = obstruction_evidence(B_C, 2, 3, random_source(6), restarts=10)
    assert rep.feasible_ceiling < 1e-6
    assert np.isnan(rep.obstructed_floor)
