"""Hybrid RRT / GP trajectory-optimization motion planning on 2-D occupancy grids."""

from .envmap import (
    BENCHMARK_ENDPOINTS,
    OccupancyGrid,
    SignedDistanceField,
    build_sdf,
    gen_benchmark_maze,
    load_map,
    save_map,
    segment_in_collision,
    signed_distance,
)
from .gpmp2_core import GPPriorParams, ObstacleModel, TrajectoryState
from .gpmp2_planner import plan_gpmp2
from .hybrid import find_collision_windows, plan_hybrid
from .metrics import path_length, smoothness
from .optimizer import FactorGraph, LMConfig, lm_optimize
from .rrt_planner import RRTConfig, plan_rrt

__version__ = "0.1.0"
