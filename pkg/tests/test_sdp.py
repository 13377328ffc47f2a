import numpy as np
import pytest

from pepkit.pep import build_dual_sdp
from pepkit.schedule import gm_schedule, hbm_schedule
from pepkit.sdp import (
    INFEASIBLE,
    MAX_ITERATIONS,
    OPTIMAL,
    UNBOUNDED,
    SdpError,
    SdpProblem,
    SolverConfig,
    is_psd,
    min_eigenvalue,
    solve,
)


def E(n, i, j):
    M = np.zeros((n, n))
    M[i, j] = M[j, i] = 1.0
    return M


def test_scalar_lmi():
    sol = solve(SdpProblem([1.0], np.zeros((1, 1)), [np.ones((1, 1))]))
    assert sol.status == OPTIMAL
    assert abs(sol.vars[0]) < 1e-7
    assert abs(sol.objective_value) < 1e-7


def test_schur_two_by_two():
    # minimize t/2 s.t. [[1, 1], [1, t]] >= 0
    F0 = np.array([[1.0, 1.0], [1.0, 0.0]])
    sol = solve(SdpProblem([0.5], F0, [E(2, 1, 1)]))
    assert sol.status == OPTIMAL
    assert sol.vars[0] == pytest.approx(1.0, abs=1e-7)
    assert sol.objective_value == pytest.approx(0.5, abs=1e-7)
    assert sol.min_eig >= -1e-9


def test_gm_one_step_dual():
    sol = solve(build_dual_sdp(gm_schedule(1, 1.0)))
    assert sol.status == OPTIMAL
    assert sol.objective_value == pytest.approx(1 / 6, abs=1e-7)


def test_infeasible_lmi():
    # diag(-1, y) can never be PSD
    F0 = np.diag([-1.0, 0.0])
    sol = solve(SdpProblem([1.0], F0, [E(2, 1, 1)]))
    assert sol.status == INFEASIBLE
    assert not sol.optimal


def test_unbounded():
    sol = solve(SdpProblem([-1.0], np.zeros((1, 1)), [np.ones((1, 1))]))
    assert sol.status == UNBOUNDED


def test_iteration_cap():
    sol = solve(build_dual_sdp(gm_schedule(4, 1.0)), SolverConfig(max_iter=2))
    assert sol.status == MAX_ITERATIONS
    assert sol.iterations == 2


def test_equalities_and_signs():
    # minimize y0 + 2 y1 s.t. y0 + y1 = 1, y >= 0, trivial LMI
    p = SdpProblem([1.0, 2.0], np.eye(1), [np.zeros((1, 1))] * 2, nonneg=[0, 1],
                   eq_matrix=[[1.0, 1.0]], eq_rhs=[1.0])
    sol = solve(p)
    assert sol.status == OPTIMAL
    np.testing.assert_allclose(sol.vars, [1.0, 0.0], atol=1e-7)


def test_rejects_bad_data():
    with pytest.raises(SdpError):
        SdpProblem([1.0], np.zeros((2, 2)), [np.array([[0.0, 1.0], [0.0, 0.0]])])
    with pytest.raises(SdpError):
        SdpProblem([1.0, 1.0], np.zeros((2, 2)), [np.eye(2)])
    with pytest.raises(SdpError):
        SdpProblem([1.0], np.zeros((2, 2)), [np.eye(3)])


def test_min_eigenvalue_helpers():
    assert min_eigenvalue(np.eye(3)) == pytest.approx(1.0)
    M = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert min_eigenvalue(M) == pytest.approx(-1.0)
    assert not is_psd(M)
    with pytest.raises(ValueError):
        min_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_deterministic():
    p = build_dual_sdp(hbm_schedule(6, 1.0, 0.5))
    a, b = solve(p), solve(p)
    assert np.array_equal(a.vars, b.vars)
    assert a.iterations == b.iterations


def test_objective_scaling():
    s = hbm_schedule(4, 1.0, 0.5)
    p = build_dual_sdp(s)
    base = solve(p).objective_value
    p.objective = 10 * p.objective
    assert solve(p).objective_value == pytest.approx(10 * base, rel=1e-7)


def test_env_config(monkeypatch):
    monkeypatch.setenv("PEPKIT_TOL", "1e-6")
    monkeypatch.setenv("PEPKIT_MAX_ITER", "17")
    cfg = SolverConfig.from_env()
    assert cfg.tol == 1e-6 and cfg.max_iter == 17
    assert SolverConfig.from_env(tol=1e-9).tol == 1e-9


def test_iteration_log(tmp_path):
    sol = solve(build_dual_sdp(gm_schedule(3, 1.0)))
    path = tmp_path / "log.csv"
    sol.write_log(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,gap,primal_res,dual_res"
    assert len(lines) == len(sol.history) + 1


def _random_problem(rng, n, m):
    """Strictly feasible at y = 0 and bounded (objective is an adjoint of a PD matrix)."""
    F = []
    for _ in range(m):
        A = rng.standard_normal((n, n))
        F.append(A + A.T)
    B = rng.standard_normal((n, n))
    X = B @ B.T + np.eye(n)
    c = np.array([np.sum(Fi * X) for Fi in F])
    return SdpProblem(c, np.eye(n), F)


@pytest.mark.parametrize("seed", range(4))
def test_matches_cvxpy(seed):
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(seed)
    p = _random_problem(rng, 5, 4)
    sol = solve(p)
    y = cp.Variable(4)
    lmi = p.constant + sum(y[j] * p.coeffs[j] for j in range(4))
    prob = cp.Problem(cp.Minimize(p.objective @ y), [0.5 * (lmi + lmi.T) >> 0])
    prob.solve(solver=cp.CLARABEL)
    assert sol.status == OPTIMAL
    assert sol.objective_value == pytest.approx(prob.value, rel=1e-5, abs=1e-6)


def test_dual_sdp_matches_cvxpy():
    cp = pytest.importorskip("cvxpy")
    p = build_dual_sdp(hbm_schedule(5, 1.0, 0.5))
    sol = solve(p)
    y = cp.Variable(p.num_vars)
    lmi = p.constant + sum(y[j] * p.coeffs[j].toarray() for j in range(p.num_vars))
    cons = [0.5 * (lmi + lmi.T) >> 0, p.eq_matrix @ y == p.eq_rhs, y[list(p.nonneg)] >= 0]
    prob = cp.Problem(cp.Minimize(p.objective @ y), cons)
    prob.solve(solver=cp.CLARABEL)
    assert sol.objective_value == pytest.approx(prob.value, rel=1e-5)
