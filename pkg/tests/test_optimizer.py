import numpy as np
import pytest
from hypothesis import given, strategies as st

from mazeplan.envmap import build_sdf, signed_distance
from mazeplan.gpmp2_core import ObstacleModel, process_noise_cov, transition, whitener
from mazeplan.optimizer import (
    LAMBDA_MAX,
    LAMBDA_MIN,
    AnchorFactor,
    Factor,
    FactorGraph,
    GPPriorFactor,
    LMConfig,
    ObstacleFactor,
    SolverStallError,
    linearize,
    lm_optimize,
    total_cost,
)
from oracles import dense_prior_cost, fd_jacobian, random_grid


class Rosenbrock(Factor):
    """f(x, y) = (1 - x)^2 + 100 (y - x^2)^2 as two residuals."""

    def linearize(self, values):
        x, y = values[self.keys[0]]
        r = np.array([10.0 * (y - x * x), 1.0 - x])
        return r, [np.array([[-20.0 * x, 10.0], [-1.0, 0.0]])]


class WrongSign(Factor):
    """A residual with a deliberately negated Jacobian: no damped step can descend."""

    def linearize(self, values):
        x = values[self.keys[0]]
        return x - 1.0, [-np.eye(len(x))]


def prior_graph(states, dt, qc, anchors=True):
    g = FactorGraph(list(states))
    n = len(states)
    if anchors:
        g.add(AnchorFactor(0, states[0]))
        g.add(AnchorFactor(n - 1, states[-1]))
    for i in range(n - 1):
        g.add(GPPriorFactor(i, i + 1, dt, qc))
    return g


def random_obstacle_graph(rng, n_states=5, anchor_weight=None):
    """A small graph with every factor kind, states kept off interpolation kinks."""
    sdf = build_sdf(random_grid(rng, (48, 48), density=0.03))
    model = ObstacleModel(epsilon=3.0, sigma_obs=float(rng.uniform(0.3, 1.5)))
    states = []
    while len(states) < n_states:
        p = rng.uniform(2, 45, size=2)
        d = signed_distance(sdf, p)
        if abs(d - model.epsilon) < 0.05 or np.any(np.abs(p - np.round(p)) < 1e-3):
            continue
        states.append(np.array([*p, *rng.normal(size=2)]))
    dt, qc = float(rng.uniform(0.5, 5)), float(rng.uniform(0.2, 3))
    g = FactorGraph(states)
    w = float(rng.uniform(0.5, 2)) if anchor_weight is None else anchor_weight
    g.add(AnchorFactor(0, states[0] + rng.normal(size=4), weight=w))
    g.add(AnchorFactor(n_states - 1, states[-1] + rng.normal(size=4), weight=w))
    for i in range(n_states - 1):
        g.add(GPPriorFactor(i, i + 1, dt, qc))
    for i in range(1, n_states - 1):
        g.add(ObstacleFactor(i, sdf, model))
    g.validate()
    return g


# --- total cost -------------------------------------------------------------------


def test_total_cost_zero_residuals():
    states = [np.array([k, 0.0, 1.0, 0.0]) for k in range(4)]
    assert total_cost(prior_graph(states, 1.0, 1.0)) == 0.0


def test_total_cost_single_anchor():
    g = FactorGraph([np.array([3.0, 4.0, 0.0, 0.0])])
    g.add(AnchorFactor(0, np.zeros(4), weight=1.0))
    assert total_cost(g) == 12.5


@given(st.integers(0, 2**32 - 1), st.floats(0.2, 5.0), st.floats(0.1, 3.0))
def test_prior_cost_equals_dense_kernel_form(seed, dt, qc):
    rng = np.random.default_rng(seed)
    states = rng.normal(size=(6, 4)) * 3
    mu0 = rng.normal(size=4)
    a = rng.normal(size=(4, 4))
    k0 = a @ a.T + 0.5 * np.eye(4)
    g = prior_graph(states, dt, qc, anchors=False)
    g.add(AnchorFactor(0, mu0, sqrt_info=whitener(k0)))
    g.validate(require_anchors=False)
    dense = dense_prior_cost(states, mu0, k0, dt, qc, transition, process_noise_cov)
    assert total_cost(g) == pytest.approx(dense, rel=1e-6)


# --- linearization ---------------------------------------------------------------


def test_anchor_only_system_is_block_diagonal():
    g = FactorGraph([np.ones(4), np.zeros(4), np.full(4, 2.0)])
    for k in range(3):
        g.add(AnchorFactor(k, np.zeros(4), weight=2.0))
    h, grad = linearize(g)
    dense = h.toarray()
    assert np.count_nonzero(dense - np.diag(np.diag(dense))) == 0
    np.testing.assert_allclose(np.diag(dense), 4.0)
    np.testing.assert_allclose(grad, 4.0 * np.concatenate(g.variables))


@given(st.integers(0, 2**32 - 1))
def test_normal_equations_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    g = random_obstacle_graph(rng)
    x = g.stacked()
    h, grad = linearize(g)
    jac, r = fd_jacobian(g, x)
    jtj, jtr = jac.T @ jac, jac.T @ r
    assert np.linalg.norm(h.toarray() - jtj) <= 1e-4 * np.linalg.norm(jtj)
    assert np.linalg.norm(grad - jtr) <= 1e-4 * max(np.linalg.norm(jtr), 1e-12)


@given(st.integers(0, 2**32 - 1))
def test_system_symmetric_psd_and_block_tridiagonal(seed):
    rng = np.random.default_rng(seed)
    g = random_obstacle_graph(rng, n_states=6)
    h = linearize(g)[0].toarray()
    np.testing.assert_allclose(h, h.T, atol=1e-9 * np.abs(h).max())
    assert np.linalg.eigvalsh(h).min() >= -1e-8 * np.abs(h).max()
    for i in range(6):
        for j in range(6):
            if abs(i - j) > 1:
                assert not h[4 * i : 4 * i + 4, 4 * j : 4 * j + 4].any()


# --- graph validation ------------------------------------------------------------


def test_validate_rejects_bad_graphs():
    states = [np.zeros(4) for _ in range(3)]
    g = prior_graph(states, 1.0, 1.0, anchors=False)
    with pytest.raises(ValueError, match="anchor"):
        g.validate()
    g.add(AnchorFactor(0, np.zeros(4)))
    g.add(AnchorFactor(2, np.zeros(4)))
    g.validate()
    g.add(AnchorFactor(2, np.zeros(4)))
    with pytest.raises(ValueError, match="exactly one"):
        g.validate()
    bad = FactorGraph(states, [AnchorFactor(5, np.zeros(4))])
    with pytest.raises(ValueError, match="missing"):
        bad.validate(require_anchors=False)
    with pytest.raises(ValueError):
        GPPriorFactor(0, 2, 1.0, 1.0)


def test_lm_config_validation():
    LMConfig()
    for bad in (dict(lambda_init=0), dict(lambda_up=0.5), dict(lambda_down=1.5), dict(max_iters=0)):
        with pytest.raises(ValueError):
            LMConfig(**bad)


# --- Levenberg-Marquardt ----------------------------------------------------------


def test_single_variable_linear_problem():
    g = FactorGraph([np.array([0.0])])
    g.add(AnchorFactor(0, [3.0], weight=1.0))
    rep = lm_optimize(g)
    assert rep.converged and rep.iterations <= 3
    assert abs(g.variables[0][0] - 3.0) < 1e-8


def test_zero_residual_graph_is_already_converged():
    states = [np.array([k, 0.0, 1.0, 0.0]) for k in range(4)]
    g = prior_graph(states, 1.0, 1.0)
    rep = lm_optimize(g)
    assert rep.converged and rep.accepted_steps == 0 and rep.final_cost == 0


def test_rosenbrock_reaches_known_minimizer():
    g = FactorGraph([np.array([-1.2, 1.0])])
    g.add(Rosenbrock([0]))
    rep = lm_optimize(g)
    assert rep.final_cost < 1e-8
    np.testing.assert_allclose(g.variables[0], [1.0, 1.0], atol=1e-4)


def test_quadratic_graph_solved_in_one_step():
    rng = np.random.default_rng(2)
    states = rng.normal(size=(6, 4)) * 4
    g = prior_graph(states, 2.0, 1.0, anchors=False)
    g.add(AnchorFactor(0, rng.normal(size=4), weight=3.0))
    g.add(AnchorFactor(5, rng.normal(size=4), weight=3.0))
    h, grad = linearize(g)
    x0 = g.stacked()
    x_star = x0 - np.linalg.solve(h.toarray(), grad)
    best = total_cost(g, g.unstack(x_star))
    initial = total_cost(g)
    rep = lm_optimize(g, LMConfig(max_iters=1))
    assert rep.accepted_steps == 1
    # the only gap left is the Marquardt damping of the first step
    assert rep.final_cost - best <= 1e-6 * initial


def test_random_problems_monotone_with_bounded_damping():
    rng = np.random.default_rng(99)
    for _ in range(100):
        g = random_obstacle_graph(rng, n_states=int(rng.integers(3, 8)), anchor_weight=1e6)
        try:
            rep = lm_optimize(g, LMConfig(max_iters=30))
        except SolverStallError as exc:
            rep = exc.report
        hist = np.array(rep.cost_history)
        assert np.all(np.diff(hist) <= 0)
        assert rep.final_cost <= rep.initial_cost
        assert all(LAMBDA_MIN <= lam <= LAMBDA_MAX for lam in rep.lambda_history)


def test_anchored_endpoints_stay_pinned():
    rng = np.random.default_rng(4)
    for _ in range(10):
        g = random_obstacle_graph(rng, anchor_weight=1e6)
        targets = [g.factors[0].target.copy(), g.factors[1].target.copy()]
        try:
            lm_optimize(g)
        except SolverStallError:
            pass
        assert np.linalg.norm(g.variables[0] - targets[0]) < 1e-3
        assert np.linalg.norm(g.variables[-1] - targets[1]) < 1e-3


def test_stall_raises_with_best_state():
    g = FactorGraph([np.array([5.0, -2.0])])
    g.add(WrongSign([0]))
    with pytest.raises(SolverStallError) as info:
        lm_optimize(g)
    err = info.value
    np.testing.assert_array_equal(err.values[0], [5.0, -2.0])
    assert err.report.reason == "stall"
    assert err.report.final_cost == err.report.initial_cost
