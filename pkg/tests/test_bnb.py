import json

import numpy as np
import pytest

from qaprecoding.model import RngSeed, SystemDims, SystemInstance, generate_channel, mse_closed_form
from qaprecoding.precoders import beta_wf, quantizer_for, wf_precoder
from qaprecoding.qap_solver import (
    RealQuadraticProgram,
    SolverConfig,
    Status,
    branch_and_bound,
    brute_force_solve,
    build_real_program,
    dumps_solution,
    embed,
    improve_point,
    loads_solution,
    quantization_aware_precoder,
)
from qaprecoding.quantizer import make_quantizer, quantize_indices

from conftest import random_instance


def _scalar_program():
    inst = SystemInstance(np.array([[1 + 1j]]), q=1.0)
    return build_real_program(inst, 1.0, make_quantizer(2, 1.0))


def test_scalar_example():
    prog = _scalar_program()
    for res in (branch_and_bound(prog), brute_force_solve(prog)):
        assert res.status is Status.OPTIMAL
        assert np.allclose(res.a, [0.5, -0.5])
        assert res.objective == pytest.approx(-1.0)


def test_spec_real_program_example():
    # the same program written with c_R = [1, 1]
    prog = RealQuadraticProgram(2 * np.eye(2), np.ones(2), 1.0, 1.0, 2)
    res = branch_and_bound(prog)
    assert np.allclose(res.a, [0.5, 0.5])
    assert res.objective == pytest.approx(-1.0)


def test_brute_force_tie_break():
    prog = RealQuadraticProgram(np.eye(2), np.zeros(2), 1.0, 1.0, 2)
    res = brute_force_solve(prog)
    assert res.objective == pytest.approx(0.5)
    assert list(res.x) == [0, 0]


def test_brute_force_infeasible_and_guard():
    prog = RealQuadraticProgram(np.eye(2), np.zeros(2), 0.1, 1.0, 2)
    assert brute_force_solve(prog).status is Status.INFEASIBLE
    assert branch_and_bound(prog).status is Status.INFEASIBLE
    big = RealQuadraticProgram(np.eye(12), np.zeros(12), 1.0, 1.0, 8)
    with pytest.raises(ValueError):
        brute_force_solve(big)


def test_zero_linear_term_sign_patterns(rng):
    for n in (2, 4, 6):
        A = rng.standard_normal((n, n))
        prog = RealQuadraticProgram(A @ A.T, np.zeros(n), 10.0, 0.8, 4)
        ref = brute_force_solve(prog)
        res = branch_and_bound(prog)
        assert np.all(np.abs(res.a) == pytest.approx(0.4))
        assert res.objective == pytest.approx(ref.objective, abs=1e-9)


def test_oracle_equality_random_programs(rng):
    for _ in range(60):
        n = int(rng.integers(1, 7))
        L = int(rng.choice([2, 3, 4]))
        A = rng.standard_normal((n, n))
        delta = rng.uniform(0.2, 1.5)
        labels = delta * (np.arange(L) - (L - 1) / 2)
        q = n * np.min(labels**2) + rng.uniform(0, n * np.max(labels**2))
        prog = RealQuadraticProgram(A @ A.T, rng.normal(0, 2, n), q, delta, L)
        ref, res = brute_force_solve(prog), branch_and_bound(prog)
        assert res.status is Status.OPTIMAL
        assert res.objective == pytest.approx(ref.objective, abs=1e-9)


def test_depth_first_agrees(rng):
    for _ in range(10):
        inst = random_instance(rng, 2, 2)
        prog = build_real_program(inst, beta_wf(inst), quantizer_for(inst, 4))
        a = branch_and_bound(prog, SolverConfig(node_selection="depth-first"))
        b = brute_force_solve(prog)
        assert a.objective == pytest.approx(b.objective, abs=1e-9)


def test_result_invariants(rng):
    for _ in range(20):
        inst = random_instance(rng, 3, 2, snr_db=15.0)
        spec = quantizer_for(inst, 4)
        prog = build_real_program(inst, beta_wf(inst), spec)
        res = branch_and_bound(prog, SolverConfig(record_trace=True))
        assert res.status is Status.OPTIMAL
        assert set(np.round(res.a / spec.step + 1.5, 12)) <= {0, 1, 2, 3}
        assert res.a @ res.a <= inst.q + 1e-9
        assert res.objective == pytest.approx(prog.objective(res.a))
        assert res.lower_bound <= res.objective + 1e-12
        values = [v for _, v in res.incumbent_trace]
        assert all(b <= a for a, b in zip(values, values[1:]))
        assert res.nodes_explored >= 1 and res.relaxation_solves >= 1
        assert res.node_trace and all(e["bound"] <= res.objective + 1e-9 for e in res.node_trace
                                      if e["depth"] == 0)


def test_node_limit_returns_incumbent(rng):
    H = generate_channel(SystemDims(8, 2), 1.0, RngSeed(0, 1))
    inst = SystemInstance.from_snr_db(H, 20.0)
    prog = build_real_program(inst, beta_wf(inst), quantizer_for(inst, 8))
    res = branch_and_bound(prog, SolverConfig(node_limit=5))
    assert res.status is Status.NODE_LIMIT
    assert res.feasible and res.nodes_explored == 5
    assert res.lower_bound <= res.objective
    res_t = branch_and_bound(prog, SolverConfig(time_limit=1e-6))
    assert res_t.status is Status.TIME_LIMIT


def test_improve_point_repairs():
    prog = RealQuadraticProgram(np.eye(4), np.ones(4), 1.0, 0.5, 4)
    x, f = improve_point(prog, np.full(4, 10.0))
    a = prog.to_a(x)
    assert a @ a <= 1.0 + 1e-12
    assert f == pytest.approx(prog.objective(a))
    x, f = improve_point(RealQuadraticProgram(np.eye(4), np.ones(4), 0.1, 0.5, 4), np.ones(4))
    assert x is None and f == np.inf


def test_config_validation():
    for kwargs in ({"gap_tolerance": 0}, {"node_selection": "random"}, {"branching": "pseudo"},
                   {"time_limit": 0}, {"node_limit": 0}):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


def test_aware_precoder_desk_solvability():
    nodes = []
    for t in range(50):
        H = generate_channel(SystemDims(4, 2), 1.0, RngSeed(2024, t))
        inst = SystemInstance.from_snr_db(H, 10.0)
        spec = quantizer_for(inst, 4)
        P, beta, res = quantization_aware_precoder(inst, spec)
        assert res.status is Status.OPTIMAL
        assert np.linalg.norm(P) ** 2 <= inst.q + 1e-9
        assert beta == pytest.approx(beta_wf(inst))
        on_lattice = np.isin(np.round(embed(P) / spec.step + 1.5, 9), np.arange(4))
        assert on_lattice.all()
        # never worse than the rounded Wiener filter point when that point is feasible
        prog = build_real_program(inst, beta, spec)
        a0 = prog.to_a(quantize_indices(spec, embed(wf_precoder(inst))))
        if prog.is_feasible(a0):
            assert res.objective <= prog.objective(a0) + 1e-9
        nodes.append(res.nodes_explored)
    assert np.median(nodes) < 5000


def test_refine_beta_never_worse(rng):
    for _ in range(5):
        inst = random_instance(rng, 3, 2, snr_db=20.0)
        spec = quantizer_for(inst, 4)
        P0, b0, _ = quantization_aware_precoder(inst, spec)
        P1, b1, _ = quantization_aware_precoder(inst, spec, SolverConfig(refine_beta=True))
        assert mse_closed_form(inst, P1, b1) <= mse_closed_form(inst, P0, b0) + 1e-9


def test_aware_infeasible_raises():
    H = generate_channel(SystemDims(8, 4), 1.0, RngSeed(0))
    inst = SystemInstance(H, 1.0)
    with pytest.raises(RuntimeError):
        quantization_aware_precoder(inst, quantizer_for(inst, 2))


def test_dump_roundtrip(rng):
    inst = random_instance(rng, 2, 2, snr_db=10.0)
    spec = quantizer_for(inst, 4)
    P, beta, res = quantization_aware_precoder(inst, spec, SolverConfig(record_trace=True))
    prog = build_real_program(inst, beta, spec)
    text = dumps_solution(prog, res, inst, beta)
    doc = json.loads(text)
    assert doc["solution"]["status"] == "optimal"
    prog2, res2, inst2, beta2 = loads_solution(text)
    assert np.array_equal(prog2.V, prog.V) and np.array_equal(prog2.c, prog.c)
    assert (prog2.q, prog2.delta, prog2.levels) == (prog.q, prog.delta, prog.levels)
    assert np.array_equal(res2.x, res.x) and res2.objective == res.objective
    assert res2.status is res.status and res2.incumbent_trace == res.incumbent_trace
    assert np.array_equal(inst2.H, inst.H) and beta2 == beta
    assert dumps_solution(prog2, res2, inst2, beta2) == text
    assert branch_and_bound(prog2).objective == pytest.approx(res.objective, abs=1e-9)


def test_dump_infeasible_and_bad_format():
    prog = RealQuadraticProgram(np.eye(2), np.zeros(2), 0.1, 1.0, 2)
    res = branch_and_bound(prog)
    prog2, res2, inst2, beta2 = loads_solution(dumps_solution(prog, res))
    assert res2.x is None and res2.objective == np.inf and inst2 is None and beta2 is None
    with pytest.raises(ValueError):
        loads_solution('{"format": "other"}')
