"""Hierarchical grid navigation: subgoal-graph planning + learned local control."""

from .grid import GridMap, MapFormatError, downsample, load_map, random_map, save_map
from .clearance import DistanceField, build_alert_map, distance_field
from .subgoal_graph import (
    AbstractPath,
    SubgoalGraph,
    build_subgoal_graph,
    connect_to_graph,
    find_abstract_path,
    find_path,
    get_direct_h_reachable,
    grid_astar,
    h_reachable,
    identify_subgoals,
    load_graph,
    octile,
    save_graph,
    try_direct_path,
)
from .robot import Action, RobotParams, RobotState, collides, sense, step
from .mdp import (
    RewardParams,
    SampleSet,
    SAState,
    collect_samples,
    oa_reward_comparative,
    oa_reward_concise,
    sa_reward,
    sa_state,
    switch_penalty,
)
from .lspi import BasisSpec, LspiConfig, Policy, greedy_action, lspi_train, lstdq

__version__ = "0.1.0"
