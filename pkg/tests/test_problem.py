import json

import numpy as np
import pytest

from jumplq.problem import (
    CoefficientSlice,
    DeterministicEnv,
    LqProblem,
    MarkSpace,
    OutOfHorizon,
    ProblemFormatError,
    RegimeSwitchingEnv,
    UnknownBenchmark,
    canned_problem,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    save_problem,
    slice_at,
    total_intensity,
    validate,
)
from jumplq.symcone import SymMat

BENCHMARK_IDS = [
    "scalar-riccati",
    "lyapunov-only",
    "two-regime-symmetric",
    "random-psd(seed=7, n=2, m=1, d=2, K=1)",
    "random-psd(seed=11, n=3, m=2, d=2, K=2, R=2)",
]


def scalar_oracle(t, T=1.0):
    # closed form for the scalar benchmark: k(t) = 1/(1 + T - t)
    return 1.0 / (1.0 + T - t)


def test_scalar_oracle_satisfies_riccati_ode():
    # dk/dt = k^2 with k(T) = 1, checked by central differences
    T, h = 1.0, 1e-6
    for t in [0.0, 0.3, 0.7, 0.99]:
        lhs = (scalar_oracle(t + h, T) - scalar_oracle(t - h, T)) / (2 * h)
        assert lhs == pytest.approx(scalar_oracle(t, T) ** 2, rel=1e-8)
    assert scalar_oracle(T, T) == pytest.approx(1.0, abs=1e-15)
    assert scalar_oracle(0.0, T) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("name", BENCHMARK_IDS)
def test_canned_problems_validate_clean(name):
    p = canned_problem(name)
    report = validate(p)
    assert report.ok, report.summary()


def test_unknown_benchmark():
    with pytest.raises(UnknownBenchmark):
        canned_problem("no-such-benchmark")
    with pytest.raises(UnknownBenchmark):
        canned_problem("random-psd(seed=1)")


def test_random_psd_deterministic_from_seed():
    a = canned_problem("random-psd(seed=3, n=2, m=2, d=1, K=1)")
    b = canned_problem("random-psd(seed=3, n=2, m=2, d=1, K=1)")
    sa = a.env.slices[0]
    sb = b.env.slices[0]
    assert np.array_equal(sa.A, sb.A)
    assert np.array_equal(sa.F, sb.F)
    assert np.array_equal(a.x0, b.x0)


def test_total_intensity_examples():
    assert total_intensity(MarkSpace(["a", "b"], [1.0, 2.0])) == pytest.approx(3.0)
    assert total_intensity(MarkSpace([], [])) == 0.0
    assert total_intensity(MarkSpace(["a"], [0.5])) == pytest.approx(0.5)


def _scalar_slice(a=0.0, q=0.0, n_cost=1.0):
    return CoefficientSlice(
        A=[[a]], B=[[1.0]], C=[[[0.0]]], D=[[[0.0]]], E=[], F=[],
        Q=[[q]], N=[[n_cost]],
    )


def test_slice_at_conventions():
    single = canned_problem("scalar-riccati")
    s = slice_at(single, 0.42)
    assert s is single.env.slices[0]

    # two intervals [0,1) and [1,2]: t = 1 belongs to the second
    p = LqProblem(
        n=1, m=1, d=1, T=2.0, x0=[1.0], marks=MarkSpace([], []),
        env=DeterministicEnv(grid=[0.0, 1.0], slices=[_scalar_slice(a=0.0), _scalar_slice(a=5.0)]),
        M=SymMat([[1.0]]),
    )
    assert slice_at(p, 1.0).A[0, 0] == 5.0
    assert slice_at(p, 1.0 - 1e-9).A[0, 0] == 0.0
    assert slice_at(p, 2.0).A[0, 0] == 5.0

    with pytest.raises(OutOfHorizon):
        slice_at(p, -0.1)
    with pytest.raises(OutOfHorizon):
        slice_at(p, 2.5)


def test_slice_at_regime_lookup():
    p = canned_problem("two-regime-symmetric")
    s0 = slice_at(p, 0.5, regime=0)
    s1 = slice_at(p, 0.5, regime=1)
    assert s0 is p.env.regimes[0][0]
    assert s1 is p.env.regimes[1][0]
    with pytest.raises(ValueError):
        slice_at(p, 0.5, regime=2)


def test_validate_reports_n_below_floor():
    s = CoefficientSlice(
        A=[[0.0]], B=[[1.0]], C=[[[0.0]]], D=[[[0.0]]], E=[], F=[],
        Q=[[0.0]], N=[[0.0]],
    )
    p = LqProblem(
        n=1, m=1, d=1, T=1.0, x0=[1.0], marks=MarkSpace([], []),
        env=DeterministicEnv([0.0], [s]), M=SymMat([[1.0]]),
    )
    report = validate(p)
    assert not report.ok
    assert any("delta floor" in v for v in report.violations)


def test_validate_reports_nonzero_f_in_regime_mode():
    s_bad = CoefficientSlice(
        A=[[0.0]], B=[[1.0]], C=[[[0.0]]], D=[[[0.0]]],
        E=[[[0.0]]], F=[[[0.3]]], Q=[[1.0]], N=[[1.0]],
    )
    env = RegimeSwitchingEnv(grid=[0.0], regimes=[[s_bad]], jump_map=[[0]])
    p = LqProblem(
        n=1, m=1, d=1, T=1.0, x0=[1.0], marks=MarkSpace(["a"], [1.0]),
        env=env, M=SymMat([[1.0]]),
    )
    report = validate(p)
    assert any("F must vanish" in v for v in report.violations)


def test_validate_reports_dimension_mismatch():
    s = CoefficientSlice(
        A=np.zeros((2, 2)), B=np.zeros((2, 1)), C=[np.zeros((2, 2))],
        D=[np.zeros((2, 1))], E=[], F=[], Q=np.eye(2), N=[[1.0]],
    )
    p = LqProblem(
        n=3, m=1, d=1, T=1.0, x0=[1.0, 0.0, 0.0], marks=MarkSpace([], []),
        env=DeterministicEnv([0.0], [s]), M=SymMat(np.eye(3)),
    )
    report = validate(p)
    assert any("A has shape" in v for v in report.violations)


@pytest.mark.parametrize("name", BENCHMARK_IDS)
def test_json_round_trip(name, tmp_path):
    p = canned_problem(name)
    path = tmp_path / "prob.json"
    save_problem(p, path)
    q = load_problem(path)
    assert q.n == p.n and q.m == p.m and q.d == p.d
    assert q.T == p.T and q.delta == p.delta
    assert np.array_equal(q.x0, p.x0)
    assert np.array_equal(q.marks.weights, p.marks.weights)
    assert q.M == p.M
    assert type(q.env) is type(p.env)
    assert validate(q).ok
    # a second save produces identical bytes
    path2 = tmp_path / "prob2.json"
    save_problem(q, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_problem_from_dict_reports_field_path():
    doc = problem_to_dict(canned_problem("scalar-riccati"))
    del doc["env"]["slices"][0]["A"]
    with pytest.raises(ProblemFormatError) as exc:
        problem_from_dict(doc)
    assert "env.slices[0].A" in str(exc.value)

    doc = problem_to_dict(canned_problem("scalar-riccati"))
    doc["x0"] = "oops"
    with pytest.raises(ProblemFormatError) as exc:
        problem_from_dict(doc)
    assert "x0" in str(exc.value)


def test_load_rejects_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ProblemFormatError):
        load_problem(path)


def test_regime_round_trip_preserves_jump_map(tmp_path):
    p = canned_problem("random-psd(seed=11, n=3, m=2, d=2, K=2, R=2)")
    doc = json.loads(json.dumps(problem_to_dict(p)))
    q = problem_from_dict(doc)
    assert np.array_equal(q.env.jump_map, p.env.jump_map)
    assert q.env.r0 == p.env.r0
