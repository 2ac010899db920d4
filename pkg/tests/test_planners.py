import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mazeplan.envmap import OccupancyGrid, build_sdf, segment_in_collision, signed_distance
from mazeplan.gpmp2_core import GPPriorParams, ObstacleModel, gp_prior_error
from mazeplan.gpmp2_planner import build_graph, init_trajectory, plan_gpmp2
from mazeplan.optimizer import total_cost
from mazeplan.rrt_planner import NoPathError, RRTConfig, nearest, plan_rrt, steer

# --- GPMP2 ----------------------------------------------------------------------


def test_init_trajectory_example():
    traj = init_trajectory((0, 0), (10, 0), GPPriorParams(total_time=10, num_states=3))
    np.testing.assert_allclose(traj[:, :2], [[0, 0], [5, 0], [10, 0]])
    np.testing.assert_allclose(traj[:, 2:], [[1, 0]] * 3)


def test_init_trajectory_degenerate():
    traj = init_trajectory((4, 4), (4, 4), GPPriorParams(num_states=5))
    np.testing.assert_array_equal(traj, [[4, 4, 0, 0]] * 5)


@given(
    st.tuples(st.floats(-500, 500), st.floats(-500, 500)),
    st.tuples(st.floats(-500, 500), st.floats(-500, 500)),
    st.integers(2, 40),
    st.floats(1, 300),
)
def test_init_trajectory_is_prior_optimal(a, b, n, total):
    params = GPPriorParams(total_time=total, num_states=n)
    traj = init_trajectory(a, b, params)
    np.testing.assert_array_equal(traj[0, :2], a)
    np.testing.assert_array_equal(traj[-1, :2], b)
    for i in range(n - 1):
        np.testing.assert_allclose(gp_prior_error(traj[i], traj[i + 1], params.dt), 0, atol=1e-9)


def test_graph_structure():
    sdf = build_sdf(OccupancyGrid(np.zeros((50, 50), bool)))
    g = build_graph((5, 5), (40, 40), sdf, GPPriorParams(num_states=7), ObstacleModel())
    kinds = [f.kind for f in g.factors]
    assert kinds.count("anchor") == 2 and kinds.count("gp_prior") == 6 and kinds.count("obstacle") == 5
    assert all(f.keys in ((0,), (6,)) for f in g.factors if f.kind == "anchor")


def test_open_map_path_stays_straight(open_sdf):
    res = plan_gpmp2((100, 100), (400, 400), open_sdf)
    init = init_trajectory((100, 100), (400, 400), GPPriorParams())
    assert len(res.path) == 31
    assert np.max(np.hypot(*(res.path - init[:, :2]).T)) < 1.0
    assert res.report.final_cost <= res.report.initial_cost
    assert res.elapsed_ms > 0


def test_gpmp2_endpoints_and_cost_on_obstacle_map():
    cells = np.zeros((200, 200), bool)
    cells[80:120, 90:110] = True  # block in the middle of the straight line
    sdf = build_sdf(OccupancyGrid(cells))
    res = plan_gpmp2((20, 100), (180, 101), sdf)
    assert tuple(res.path[0]) == (20, 100) and tuple(res.path[-1]) == (180, 101)
    # underlying states pinned to within the anchor tolerance
    assert np.hypot(*(res.states[0, :2] - (20, 100))) < 1e-3
    assert np.hypot(*(res.states[-1, :2] - (180, 101))) < 1e-3
    assert res.report.final_cost <= res.report.initial_cost
    # the obstacle cost pushed the middle away from the block
    init_cost = total_cost(build_graph((20, 100), (180, 101), sdf, GPPriorParams(), ObstacleModel()))
    assert res.report.initial_cost == pytest.approx(init_cost)


# --- RRT --------------------------------------------------------------------------


def test_steer_examples():
    assert steer((0, 0), (3, 4), 10) == (3, 4)
    np.testing.assert_allclose(steer((0, 0), (30, 40), 10), (6, 8))
    assert steer((1, 1), (1, 1), 10) == (1, 1)
    with pytest.raises(ValueError):
        steer((0, 0), (1, 1), 0)


@given(st.integers(0, 2**32 - 1))
def test_steer_never_exceeds_step(seed):
    rng = np.random.default_rng(seed)
    for a, b in rng.uniform(-100, 100, size=(50, 2, 2)):
        step = float(rng.uniform(0.1, 30))
        out = steer(tuple(a), tuple(b), step)
        assert math.dist(out, a) <= step + 1e-9


def test_nearest_examples_and_ties():
    assert nearest([(5, 5)], (100, 100)) == 0
    assert nearest([(0, 0), (10, 0)], (2, 0)) == 0
    assert nearest([(0, 0), (10, 0)], (5, 0)) == 0  # tie -> lowest index


@given(st.integers(0, 2**32 - 1))
def test_nearest_matches_linear_scan(seed):
    rng = np.random.default_rng(seed)
    verts = [tuple(v) for v in rng.integers(0, 20, size=(int(rng.integers(1, 60)), 2)).astype(float)]
    q = tuple(rng.integers(0, 20, size=2).astype(float))
    best = min(range(len(verts)), key=lambda i: (math.dist(verts[i], q), i))
    assert nearest(verts, q) == best


def test_rrt_direct_goal(open_sdf):
    res = plan_rrt(open_sdf, (100, 100), (105, 100), RRTConfig(rng_seed=1))
    np.testing.assert_array_equal(res.path, [[100, 100], [105, 100]])
    assert res.iterations == 0


def test_rrt_sealed_goal_raises_with_tree():
    cells = np.zeros((60, 60), bool)
    cells[30, :] = True
    sdf = build_sdf(OccupancyGrid(cells))
    with pytest.raises(NoPathError) as info:
        plan_rrt(sdf, (30, 10), (30, 50), RRTConfig(max_iters=500))
    assert len(info.value.tree.vertices) > 1


def test_rrt_rejects_colliding_endpoints():
    sdf = build_sdf(OccupancyGrid(np.zeros((30, 30), bool)))
    with pytest.raises(ValueError):
        plan_rrt(sdf, (0, 0), (15, 15))


def test_rrt_config_validation():
    for bad in (dict(step_length=0), dict(goal_bias=1.0), dict(goal_tolerance=-1), dict(max_iters=0)):
        with pytest.raises(ValueError):
            RRTConfig(**bad)


@pytest.fixture(scope="module")
def slot_sdf():
    cells = np.zeros((120, 120), bool)
    cells[60, :100] = True
    return build_sdf(OccupancyGrid(cells))


@given(st.integers(0, 2**63 - 1))
def test_rrt_tree_invariants(slot_sdf, seed):
    cfg = RRTConfig(rng_seed=seed, clearance=0.5)
    res = plan_rrt(slot_sdf, (20, 20), (20, 100), cfg)
    t = res.tree
    assert t.parents[0] == -1 and all(0 <= p < i for i, p in enumerate(t.parents) if i)
    for p, c in t.edges:
        a, b = t.vertices[p], t.vertices[c]
        length = math.dist(a, b)
        last = c == len(t.vertices) - 1
        assert length <= (cfg.goal_tolerance if last else cfg.step_length) + 1e-9
        assert not segment_in_collision(slot_sdf, a, b, cfg.clearance)
    np.testing.assert_array_equal(res.path[0], (20, 20))
    np.testing.assert_array_equal(res.path[-1], (20, 100))


def test_rrt_deterministic_per_seed(slot_sdf):
    a = plan_rrt(slot_sdf, (20, 20), (20, 100), RRTConfig(rng_seed=42))
    b = plan_rrt(slot_sdf, (20, 20), (20, 100), RRTConfig(rng_seed=42))
    c = plan_rrt(slot_sdf, (20, 20), (20, 100), RRTConfig(rng_seed=43))
    np.testing.assert_array_equal(a.path, b.path)
    assert a.tree.vertices == b.tree.vertices and a.tree.parents == b.tree.parents
    assert not np.array_equal(a.path, c.path) or a.tree.vertices != c.tree.vertices


def test_rrt_samples_only_free_space(slot_sdf):
    res = plan_rrt(slot_sdf, (20, 20), (20, 100), RRTConfig(rng_seed=3))
    for v in res.tree.vertices:
        assert signed_distance(slot_sdf, v) >= 0
