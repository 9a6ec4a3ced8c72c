"""Run metrics, benchmark drivers, training experiments, and scene rendering.

The query-time benchmark times the subgoal-graph search against grid A* on
identical random pairs and doubles as the system-level optimality check.
The training experiment trains one avoidance policy per seed, scores it on
a fixed cluttered field, and aggregates success, switching, and solver
iteration statistics so reward/environment variants can be compared.
"""

import csv
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .clearance import alert_cells
from .grid import random_map
from .lspi import LspiConfig, lspi_train, oa_basis
from .mdp import OA, RewardParams, collect_samples, switch_penalty
from .robot import Action, RobotParams, RobotState, collides, sense, step
from .subgoal_graph import find_path, grid_astar, octile
from . import fixtures

CROSSED = "crossed"
COLLIDED = "collided"
TIMEOUT = "timeout"
BLOCKED_START = "blocked_start"

LOW_SWITCH_THRESHOLD = 0.30


class MetricError(ValueError):
    """A metric was requested on a trajectory that cannot support it."""


class BenchmarkError(RuntimeError):
    """Benchmark setup failed (e.g., no solvable pairs found)."""


class RenderError(ValueError):
    """Render layers disagree on dimensions."""


# ---------------------------------------------------------------------------
# trajectory metrics
# ---------------------------------------------------------------------------

def action_switching_frequency(trajectory):
    """Fraction of control ticks whose action differs from the previous one."""
    actions = trajectory.actions()
    if len(actions) == 0:
        raise MetricError("trajectory has no action ticks")
    if len(actions) == 1:
        return 0.0
    return float(np.count_nonzero(actions[1:] != actions[:-1])) / len(actions)


def path_length(trajectory):
    """Sum of straight-line distances between consecutive logged positions."""
    pts = trajectory.positions()
    if len(pts) < 2:
        return 0.0
    return float(np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1])).sum())


@dataclass
class RunMetrics:
    run_id: str
    seed: int
    outcome: str
    switch_freq: float
    path_len: float
    h_time: float

    HEADER = ["run_id", "seed", "outcome", "switch_freq", "path_len", "h_time"]

    def row(self):
        return [self.run_id, self.seed, self.outcome,
                repr(self.switch_freq), repr(self.path_len), repr(self.h_time)]


# ---------------------------------------------------------------------------
# query-time benchmark
# ---------------------------------------------------------------------------

@dataclass
class HtimeStats:
    rows: list
    median_graph: float
    median_grid: float
    mean_graph: float
    mean_grid: float

    @property
    def speedup(self):
        return self.median_grid / self.median_graph

    def save_csv(self, stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["sx", "sy", "gx", "gy", "grid_len", "graph_len",
                         "grid_s", "graph_s"])
        for r in self.rows:
            writer.writerow([r["sx"], r["sy"], r["gx"], r["gy"],
                             repr(r["grid_len"]), repr(r["graph_len"]),
                             repr(r["grid_s"]), repr(r["graph_s"])])


def htime_benchmark(grid, graph, n_queries, seed, min_octile=0.0,
                    max_attempts_factor=200):
    """Time graph queries against grid A* on identical random solvable pairs.

    Both solvers must agree on solvability for every sampled pair; solvable
    pairs are timed individually after one warm-up query.  Preprocessing is
    excluded (the graph comes in prebuilt).
    """
    rng = np.random.default_rng(seed)
    free = grid.free_cells()
    if len(free) < 2:
        raise BenchmarkError("map has fewer than two free cells")

    # warm-up so one-time setup costs stay out of the timings
    a = tuple(free[0])
    grid_astar(grid, a, a)
    find_path(graph, grid, a, a)

    rows = []
    attempts = 0
    limit = max_attempts_factor * n_queries
    while len(rows) < n_queries:
        attempts += 1
        if attempts > limit:
            raise BenchmarkError(
                f"only {len(rows)} solvable pairs after {attempts} attempts")
        s = tuple(free[rng.integers(len(free))])
        g = tuple(free[rng.integers(len(free))])
        if s == g or octile(s, g) < min_octile:
            continue
        t0 = time.perf_counter()
        base = grid_astar(grid, s, g)
        grid_s = time.perf_counter() - t0
        result = find_path(graph, grid, s, g)
        if (base is None) != (result.path is None):
            raise BenchmarkError(f"solvability mismatch on pair {s} -> {g}")
        if base is None:
            continue
        rows.append({
            "sx": s[0], "sy": s[1], "gx": g[0], "gy": g[1],
            "grid_len": base[0], "graph_len": result.path.length,
            "grid_s": grid_s, "graph_s": result.h_time,
        })
    return HtimeStats(
        rows=rows,
        median_graph=statistics.median(r["graph_s"] for r in rows),
        median_grid=statistics.median(r["grid_s"] for r in rows),
        mean_graph=statistics.fmean(r["graph_s"] for r in rows),
        mean_grid=statistics.fmean(r["grid_s"] for r in rows),
    )


# ---------------------------------------------------------------------------
# avoidance gauntlet
# ---------------------------------------------------------------------------

_EDGES = {
    ("left", "right"): (0, 0.0),
    ("right", "left"): (1, math.pi),
    ("top", "bottom"): (2, math.pi / 2),
    ("bottom", "top"): (3, -math.pi / 2),
}


def _edge_start(grid, start_edge, finish_edge, rng):
    key = (start_edge, finish_edge)
    if key not in _EDGES:
        raise ValueError(f"unsupported edge pair {key}")
    axis, heading = _EDGES[key]
    if axis == 0:
        cells = [y for y in range(grid.height) if grid.is_free(0, y)]
        pick = lambda c: RobotState(0.5, c + 0.5, heading)
    elif axis == 1:
        cells = [y for y in range(grid.height) if grid.is_free(grid.width - 1, y)]
        pick = lambda c: RobotState(grid.width - 0.5, c + 0.5, heading)
    elif axis == 2:
        cells = [x for x in range(grid.width) if grid.is_free(x, 0)]
        pick = lambda c: RobotState(c + 0.5, 0.5, heading)
    else:
        cells = [x for x in range(grid.width) if grid.is_free(x, grid.height - 1)]
        pick = lambda c: RobotState(c + 0.5, grid.height - 0.5, heading)
    if not cells:
        return None
    return pick(int(cells[rng.integers(len(cells))]))


def _finished(grid, state, start_edge):
    if start_edge == "left":
        return state.x >= grid.width - 1.0
    if start_edge == "right":
        return state.x <= 1.0
    if start_edge == "top":
        return state.y >= grid.height - 1.0
    return state.y <= 1.0


def greedy_with_switch_cost(policy, state_vec, prev_action, cost):
    """Argmax of the penalized objective: action values plus the change cost.

    Policies trained against the action-change penalty cannot see the
    previous action in their state, so the cost re-enters at decision time.
    """
    q = policy.q_values(state_vec)
    if prev_action is not None:
        q = q + np.array([switch_penalty(a, prev_action, cost) for a in range(len(q))])
    return int(np.argmax(q))


def drive_avoidance(policy, grid, pose, budget, robot_params=None,
                    start_edge="left", switch_cost=None):
    """Run the avoidance policy open-loop until crossing, collision, or timeout.

    Returns (outcome, switch frequency over the executed ticks).
    """
    params = robot_params or RobotParams()
    t = 0.0
    prev = None
    switches = 0
    ticks = 0
    while t < budget:
        if _finished(grid, pose, start_edge):
            return CROSSED, (switches / ticks if ticks else 0.0)
        readings = sense(grid, pose, params)
        if switch_cost is not None:
            action = greedy_with_switch_cost(policy, readings, prev, switch_cost)
        else:
            action = policy.action(readings)
        if prev is not None and action != prev:
            switches += 1
        prev = action
        ticks += 1
        for _ in range(params.substeps):
            pose = step(pose, Action(action), params)
            if collides(grid, pose):
                return COLLIDED, (switches / ticks if ticks else 0.0)
        t += params.act_dt
    return TIMEOUT, (switches / ticks if ticks else 0.0)


@dataclass
class GauntletRun:
    map_index: int
    outcome: str
    switch_freq: float
    success: bool


@dataclass
class GauntletResult:
    runs: list
    criterion: str

    @property
    def success_ratio(self):
        return sum(r.success for r in self.runs) / len(self.runs)


def gauntlet_test(oa_policy, test_maps, start_edge="left", finish_edge="right",
                  budget=200.0, seed=0, robot_params=None, criterion="cross",
                  switch_cost=None):
    """Score an avoidance policy over edge-to-edge runs on each test map.

    The default criterion requires crossing the finish edge without
    collision inside the budget; the "survive" criterion only requires
    staying collision-free (a run that crosses early still counts).
    """
    if criterion not in ("cross", "survive"):
        raise ValueError(f"unknown success criterion {criterion!r}")
    runs = []
    for i, grid in enumerate(test_maps):
        rng = np.random.default_rng((seed, i))
        pose = _edge_start(grid, start_edge, finish_edge, rng)
        if pose is None:
            runs.append(GauntletRun(i, BLOCKED_START, 0.0, False))
            continue
        outcome, sw = drive_avoidance(oa_policy, grid, pose, budget,
                                      robot_params, start_edge, switch_cost)
        success = outcome == CROSSED if criterion == "cross" \
            else outcome in (CROSSED, TIMEOUT)
        runs.append(GauntletRun(i, outcome, sw, success))
    return GauntletResult(runs, criterion)


# ---------------------------------------------------------------------------
# reward / training-map experiment
# ---------------------------------------------------------------------------

@dataclass
class TrainingRow:
    seed: int
    success: bool
    switch_freq: float
    lspi_iters: int


@dataclass
class TrainingReport:
    rows: list
    map_kind: str
    reward_kind: str
    use_switch_penalty: bool

    @property
    def success_ratio(self):
        return sum(r.success for r in self.rows) / len(self.rows)

    @property
    def low_switch_ratio(self):
        return sum(r.success and r.switch_freq < LOW_SWITCH_THRESHOLD
                   for r in self.rows) / len(self.rows)

    @property
    def mean_iterations(self):
        return statistics.fmean(r.lspi_iters for r in self.rows)

    def save_csv(self, stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["seed", "success", "switch_freq", "lspi_iters"])
        for r in self.rows:
            writer.writerow([r.seed, int(r.success), repr(r.switch_freq),
                             r.lspi_iters])


def reward_design_experiment(n_seeds, sample_count, map_kind, reward_kind,
                             use_switch_penalty=False, base_seed=0,
                             test_map=None, budget=200.0, robot_params=None,
                             reward_cfg=None, lspi_cfg=None,
                             criterion="survive"):
    """Train one avoidance policy per seed and score it on the gauntlet field.

    map_kind picks the training environment ("office" fixture or a fresh 5%
    random-obstacle map per seed); reward_kind picks "concise" or
    "comparative", optionally with the action-change penalty.  Policies
    trained with the penalty are also executed against the penalized
    objective, since their state cannot carry the previous action.  The
    default success criterion is collision-free completion of the budgeted
    run, with switching and solver iterations recorded per seed.
    """
    if map_kind not in ("office", "random"):
        raise ValueError(f"unknown map kind {map_kind!r}")
    params = robot_params or RobotParams()
    cfg = reward_cfg or RewardParams()
    lspi_cfg = lspi_cfg or LspiConfig()
    spec = oa_basis(sensor_max=params.sensor_max)
    if test_map is None:
        test_map = fixtures.gauntlet_map()
    switch_cost = cfg.switch_penalty if use_switch_penalty else None

    rows = []
    for i in range(n_seeds):
        if map_kind == "office":
            train_map = fixtures.office_map()
        else:
            train_map = random_map(50, 50, 0.05, seed=(base_seed, i, 0))
        samples = collect_samples(OA, train_map, sample_count,
                                  seed=(base_seed, i, 1), reward_cfg=cfg,
                                  robot_params=params, oa_reward=reward_kind,
                                  use_switch_penalty=use_switch_penalty)
        policy, iters = lspi_train(samples, spec, lspi_cfg)
        result = gauntlet_test(policy, [test_map], budget=budget,
                               seed=(base_seed, i, 2), robot_params=params,
                               criterion=criterion, switch_cost=switch_cost)
        run = result.runs[0]
        rows.append(TrainingRow(i, run.success, run.switch_freq, iters))
    return TrainingReport(rows, map_kind, reward_kind, use_switch_penalty)


# ---------------------------------------------------------------------------
# deterministic SVG rendering
# ---------------------------------------------------------------------------

_COLORS = {
    "free": "#f7f7f5",
    "blocked": "#2b2b2b",
    "alert": "#f0c869",
    "vertex": "#3a6ea5",
    "edge": "#c0504d",
    "abstract": "#2b7bba",
    "trajectory": "#111111",
}


def render_svg(grid, alert_map=None, graph=None, abstract_path=None,
               trajectory=None, cell=8):
    """Layered scene as deterministic SVG text.

    Obstacles render dark, inflation-only cells in a distinct tint, then the
    graph, the waypoint chain, and the executed trajectory (one polyline
    vertex per control tick).  Identical inputs yield identical bytes.
    """
    shape = (grid.height, grid.width)
    alert = None
    if alert_map is not None:
        if (alert_map.height, alert_map.width) != shape:
            raise RenderError("alert map dimensions do not match the base map")
        alert = alert_cells(grid, alert_map)
    if graph is not None and (graph.height, graph.width) != shape:
        raise RenderError("graph dimensions do not match the base map")

    def pt(x, y):
        return f"{x * cell:.3f},{y * cell:.3f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" '
           f'width="{grid.width * cell}" height="{grid.height * cell}" '
           f'viewBox="0 0 {grid.width * cell} {grid.height * cell}">']
    for y in range(grid.height):
        for x in range(grid.width):
            if grid.blocked[y, x]:
                fill = _COLORS["blocked"]
            elif alert is not None and alert[y, x]:
                fill = _COLORS["alert"]
            else:
                fill = _COLORS["free"]
            out.append(f'<rect x="{x * cell}" y="{y * cell}" '
                       f'width="{cell}" height="{cell}" fill="{fill}"/>')
    if graph is not None:
        for (x1, y1), (x2, y2), _ in graph.edges():
            out.append(f'<line x1="{(x1 + 0.5) * cell:.3f}" y1="{(y1 + 0.5) * cell:.3f}" '
                       f'x2="{(x2 + 0.5) * cell:.3f}" y2="{(y2 + 0.5) * cell:.3f}" '
                       f'stroke="{_COLORS["edge"]}" stroke-width="1"/>')
        for x, y in graph.cells:
            out.append(f'<circle cx="{(x + 0.5) * cell:.3f}" cy="{(y + 0.5) * cell:.3f}" '
                       f'r="{0.3 * cell:.3f}" fill="{_COLORS["vertex"]}"/>')
    if abstract_path is not None and len(abstract_path.cells) > 0:
        pts = " ".join(pt(x + 0.5, y + 0.5) for x, y in abstract_path.cells)
        out.append(f'<polyline points="{pts}" fill="none" '
                   f'stroke="{_COLORS["abstract"]}" stroke-width="2"/>')
    if trajectory is not None and len(trajectory.ticks) > 0:
        pts = " ".join(pt(t.state.x, t.state.y) for t in trajectory.ticks)
        out.append(f'<polyline points="{pts}" fill="none" '
                   f'stroke="{_COLORS["trajectory"]}" stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
