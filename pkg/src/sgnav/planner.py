"""Two-layer plan executor.

A query first runs the subgoal-graph search on the planning (inflated) map
to get a waypoint chain, then drives the robot with the trained policies:
every control tick the six sensors are read on the ORIGINAL map, the
readings choose between the goal-approach and avoidance policies, and the
chosen action is held through the kinematic sub-steps.  Waypoints advance
under a loose tolerance, the final goal under a tight one; the planning map
is never consulted again after the abstract query, so unexpected obstacles
in the original map are handled purely by the avoidance policy.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .grid import GridMap
from .mdp import sa_state
from .robot import Action, RobotParams, RobotState, collides, sense, step
from .subgoal_graph import find_path

SA_MODE = "SA"
OA_MODE = "OA"

REACHED = "reached"
COLLIDED = "collided"
TIMEOUT = "timeout"


class PlanningError(RuntimeError):
    """No abstract path exists (or the query endpoints are unusable)."""


class ObstaclePlacementError(RuntimeError):
    """Could not place injected obstacles without covering a waypoint."""


@dataclass(frozen=True)
class PlanConfig:
    subgoal_tol: float = 1.5     # cells, intermediate waypoints
    final_tol: float = 0.5       # cells, the last waypoint
    oa_threshold: float = 2.5    # switch to avoidance below this reading
    time_budget: float | None = None  # seconds; None picks 4x abstract length / speed
    # when set, avoidance decisions maximize Q plus this action-change cost;
    # use for policies trained with the change penalty (their state cannot
    # carry the previous action, so the cost re-enters at decision time)
    oa_switch_cost: float | None = None

    def __post_init__(self):
        if not self.subgoal_tol >= self.final_tol > 0:
            raise ValueError("need subgoal_tol >= final_tol > 0")


@dataclass(frozen=True)
class TrajectoryTick:
    time: float
    state: RobotState
    action: int
    mode: str


@dataclass
class Trajectory:
    ticks: list
    outcome: str
    final_state: RobotState
    abstract_length: float = 0.0

    def __len__(self):
        return len(self.ticks)

    def positions(self):
        """Tick positions plus the final state, as an (n+1, 2) array."""
        pts = [(t.state.x, t.state.y) for t in self.ticks]
        pts.append((self.final_state.x, self.final_state.y))
        return np.array(pts)

    def actions(self):
        return np.array([t.action for t in self.ticks], dtype=np.int64)

    def modes(self):
        return [t.mode for t in self.ticks]

    def save_csv(self, stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["t", "x", "y", "theta", "action", "mdp_mode"])
        for t in self.ticks:
            writer.writerow([repr(t.time), repr(t.state.x), repr(t.state.y),
                             repr(t.state.theta), Action(t.action).name, t.mode])


def select_mdp(readings, cfg):
    """Avoidance when any reading is strictly below the trigger, else approach."""
    return OA_MODE if float(np.min(readings)) < cfg.oa_threshold else SA_MODE


def advance_subgoal(position, targets, cfg):
    """Pop every leading waypoint already inside its tolerance.

    Re-checks after each pop so co-located waypoints collapse in one tick.
    Returns the current target point or None when the chain is finished.
    """
    x, y = position
    while targets:
        tol = cfg.final_tol if len(targets) == 1 else cfg.subgoal_tol
        tx, ty = targets[0]
        if math.hypot(tx - x, ty - y) < tol:
            targets.pop(0)
        else:
            return targets[0]
    return None


def _cell_center(cell):
    return (cell[0] + 0.5, cell[1] + 0.5)


def plan(original_map, planning_map, graph, start_pose, goal_cell,
         sa_policy, oa_policy, cfg=None, robot_params=None):
    """Run one full query and return the executed trajectory.

    Raises PlanningError when the abstract layer finds no path; collisions
    and timeouts are outcomes, not exceptions.
    """
    cfg = cfg or PlanConfig()
    params = robot_params or RobotParams()
    start_cell = (int(math.floor(start_pose.x)), int(math.floor(start_pose.y)))
    goal_cell = (int(goal_cell[0]), int(goal_cell[1]))
    if not planning_map.is_free(*start_cell):
        raise PlanningError(f"start cell {start_cell} is blocked in the planning map")
    if not planning_map.is_free(*goal_cell):
        raise PlanningError(f"goal cell {goal_cell} is blocked in the planning map")

    goal_point = _cell_center(goal_cell)
    if math.hypot(goal_point[0] - start_pose.x,
                  goal_point[1] - start_pose.y) <= cfg.final_tol:
        return Trajectory([], REACHED, start_pose, 0.0)

    result = find_path(graph, planning_map, start_cell, goal_cell)
    if result.path is None:
        raise PlanningError(f"no abstract path from {start_cell} to {goal_cell}")
    targets = [_cell_center(c) for c in result.path.cells]

    budget = cfg.time_budget
    if budget is None:
        budget = 4.0 * max(result.path.length, 1.0) / params.cruise_speed

    state = start_pose
    ticks = []
    t = 0.0
    prev_action = None
    outcome = None
    while True:
        target = advance_subgoal((state.x, state.y), targets, cfg)
        if target is None:
            outcome = REACHED
            break
        if t >= budget:
            outcome = TIMEOUT
            break
        readings = sense(original_map, state, params)
        mode = select_mdp(readings, cfg)
        if mode == OA_MODE:
            if cfg.oa_switch_cost is not None and prev_action is not None:
                q = oa_policy.q_values(readings)
                for a in range(len(q)):
                    if a != prev_action:
                        q[a] += cfg.oa_switch_cost
                action = int(np.argmax(q))
            else:
                action = oa_policy.action(readings)
        else:
            action = sa_policy.action(sa_state(state, target).as_vector())
        prev_action = int(action)
        ticks.append(TrajectoryTick(t, state, int(action), mode))
        collided = False
        for _ in range(params.substeps):
            state = step(state, Action(action), params)
            if collides(original_map, state):
                collided = True
                break
        t += params.act_dt
        if collided:
            outcome = COLLIDED
            break
    return Trajectory(ticks, outcome, state, result.path.length)


def _corridor_cells(grid, path_cells, radius):
    """Cells whose center lies within `radius` of the waypoint polyline."""
    pts = np.array([_cell_center(c) for c in path_cells])
    out = set()
    for (ax, ay), (bx, by) in zip(pts, pts[1:]):
        x0 = max(0, int(math.floor(min(ax, bx) - radius)))
        x1 = min(grid.width - 1, int(math.ceil(max(ax, bx) + radius)))
        y0 = max(0, int(math.floor(min(ay, by) - radius)))
        y1 = min(grid.height - 1, int(math.ceil(max(ay, by) + radius)))
        vx, vy = bx - ax, by - ay
        vv = vx * vx + vy * vy
        for y in range(y0, y1 + 1):
            for x in range(x0, x1 + 1):
                cx, cy = x + 0.5, y + 0.5
                if vv == 0.0:
                    dist = math.hypot(cx - ax, cy - ay)
                else:
                    u = max(0.0, min(1.0, ((cx - ax) * vx + (cy - ay) * vy) / vv))
                    dist = math.hypot(cx - (ax + u * vx), cy - (ay + u * vy))
                if dist <= radius:
                    out.add((x, y))
    if len(pts) == 1:
        x, y = path_cells[0]
        out.add((x, y))
    return sorted(out)


def inject_obstacles(original_map, abstract_path, count, max_size, seed,
                     corridor_radius=3.0, keepout=1.5, max_tries=100):
    """Drop random rectangles near the waypoint corridor, sparing waypoints.

    Rectangle centers are sampled uniformly from cells within
    `corridor_radius` of the path segments; any placement putting a cell
    within `keepout` of a waypoint is rejected and retried.  Returns a new
    map; the input and the prebuilt graph stay as they were.
    """
    if count == 0:
        return GridMap(original_map.blocked)
    cells = abstract_path.cells
    if not cells:
        raise ValueError("abstract path is empty")
    corridor = _corridor_cells(original_map, cells, corridor_radius)
    if not corridor:
        raise ObstaclePlacementError("empty corridor")
    waypoints = np.array([_cell_center(c) for c in cells])
    rng = np.random.default_rng(seed)
    blocked = original_map.blocked.copy()
    for _ in range(count):
        placed = False
        for _ in range(max_tries):
            cx, cy = corridor[int(rng.integers(len(corridor)))]
            w = int(rng.integers(1, max_size + 1))
            h = int(rng.integers(1, max_size + 1))
            x0 = max(0, cx - (w - 1) // 2)
            y0 = max(0, cy - (h - 1) // 2)
            x1 = min(original_map.width, x0 + w)
            y1 = min(original_map.height, y0 + h)
            xs, ys = np.meshgrid(np.arange(x0, x1) + 0.5, np.arange(y0, y1) + 0.5)
            centers = np.stack([xs.ravel(), ys.ravel()], axis=1)
            d = np.hypot(centers[:, None, 0] - waypoints[None, :, 0],
                         centers[:, None, 1] - waypoints[None, :, 1])
            if d.min() < keepout:
                continue
            blocked[y0:y1, x0:x1] = True
            placed = True
            break
        if not placed:
            raise ObstaclePlacementError(
                f"no placement clear of waypoints after {max_tries} tries")
    return GridMap(blocked)
