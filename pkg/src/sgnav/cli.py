"""Command-line front end tying the library into reproducible workflows.

Subcommands mirror the offline/online split: `preprocess` builds the
distance field, planning map, and vertex graph for a map file; `train`
produces a policy file; `plan` executes one full query; `bench` times graph
queries against grid A*; `experiment` runs the reward/training-map study;
`fixtures` materializes the bundled maps.  Every command writes a manifest
(config + seeds + input hashes) that reproduces it exactly.

Exit codes: 0 success, 2 usage or bad config, 3 parse/I-O error,
4 no abstract path, 5 numerical failure.
"""

import argparse
import hashlib
import math
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import fixtures
from .clearance import DEFAULT_ALERT_RADIUS, build_alert_map, distance_field
from .evaluation import (RunMetrics, action_switching_frequency,
                         gauntlet_test, htime_benchmark, path_length,
                         render_svg, reward_design_experiment)
from .grid import GridMap, MapFormatError, load_map, random_map, save_map
from .lspi import (LspiConfig, Policy, PolicyError, SolverError, lspi_train,
                   oa_basis, sa_basis)
from .mdp import OA, SA, RewardParams, collect_samples, sa_state
from .planner import PlanConfig, PlanningError, inject_obstacles, plan
from .robot import RobotParams, RobotState, Action, collides, step
from .subgoal_graph import build_subgoal_graph, load_graph, save_graph

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_NOPATH = 4
EXIT_NUMERIC = 5


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    """Every tunable, flattened; serialized in full into each run manifest."""

    r_alert: float = DEFAULT_ALERT_RADIUS
    wheel_radius: float = 2.0
    track_separation: float = 1.0
    dt: float = 0.1
    act_dt: float = 0.5
    sensor_max: float = 5.0
    n_rays: int = 7
    d_n: float = 0.5
    d_norm: float = math.hypot(50.0, 50.0)
    eps_a: float = 0.05
    p_scale: float = 0.9
    d_ur: float = 1.0
    d_sa: float = 2.5
    collide_penalty: float = -4.0
    switch_penalty: float = -0.2
    sa_order: int = 4
    oa_order: int = 3
    gamma: float = 0.9
    lspi_epsilon: float = 1e-3
    lspi_max_iters: int = 20
    ridge: float = 1e-6
    subgoal_tol: float = 1.5
    final_tol: float = 0.5
    oa_threshold: float = 2.5
    oa_switch_cost: float = 0.0  # 0 = plain greedy avoidance decisions
    time_budget: float = 0.0   # 0 = derive from the abstract path length
    sample_count: int = 20000
    sample_hold: float = 1.0
    n_seeds: int = 30
    n_queries: int = 100
    min_octile: float = 0.0
    budget: float = 200.0
    seed: int = 0

    def robot_params(self):
        return RobotParams(self.wheel_radius, self.track_separation, self.dt,
                           self.act_dt, self.sensor_max, self.n_rays)

    def reward_params(self):
        return RewardParams(self.d_n, self.d_norm, self.eps_a, self.p_scale,
                            self.d_ur, self.d_sa, self.collide_penalty,
                            self.switch_penalty)

    def lspi_config(self):
        return LspiConfig(self.gamma, self.lspi_epsilon, self.lspi_max_iters,
                          self.ridge)

    def plan_config(self):
        return PlanConfig(self.subgoal_tol, self.final_tol, self.oa_threshold,
                          self.time_budget if self.time_budget > 0 else None,
                          self.oa_switch_cost if self.oa_switch_cost != 0 else None)

    def apply(self, key, raw):
        matching = {f.name: f for f in fields(self)}
        if key not in matching:
            raise ConfigError(f"unknown config key {key!r}")
        kind = matching[key].type
        try:
            if kind is int or kind == "int":
                value = int(raw)
            elif kind is float or kind == "float":
                value = float(raw)
            else:
                value = raw
        except ValueError:
            raise ConfigError(f"bad value {raw!r} for config key {key}")
        setattr(self, key, value)

    def load_file(self, path):
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, raw = line.split("=", 1)
            self.apply(key.strip(), raw.strip())

    def items(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self)]


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, command, config, inputs=(), extra=()):
    lines = [f"command={command}"]
    for key, value in config.items():
        lines.append(f"config.{key}={value!r}")
    for path in inputs:
        lines.append(f"input.{Path(path).name}={_sha256(path)}")
    for key, value in extra:
        lines.append(f"{key}={value}")
    (Path(out_dir) / "manifest.txt").write_text("\n".join(lines) + "\n")


def _load_env(spec_str, config):
    """Map source: 'empty', 'office', 'random', 'gauntlet', or a file path."""
    if spec_str == "empty":
        return GridMap(np.zeros((50, 50), dtype=bool))
    if spec_str == "office":
        return fixtures.office_map()
    if spec_str == "random":
        return random_map(50, 50, 0.05, seed=config.seed)
    if spec_str == "gauntlet":
        return fixtures.gauntlet_map()
    return load_map(Path(spec_str).read_text())


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_preprocess(args, config):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = load_map(Path(args.map).read_text())
    t0 = time.perf_counter()
    field = distance_field(grid)
    planning = build_alert_map(grid, field, config.r_alert)
    graph = build_subgoal_graph(planning)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    (out / "alert.map").write_text(save_map(planning))
    with open(out / "field.csv", "w") as f:
        field.to_csv(f)
    with open(out / "graph.txt", "w") as f:
        save_graph(graph, f)
    write_manifest(out, "preprocess", config, [args.map],
                   [("r_alert", config.r_alert)])
    print(f"vertices={graph.n_vertices} edges={graph.n_edges} "
          f"preprocess_ms={elapsed_ms:.2f}")
    return EXIT_OK


def _evaluate_sa_policy(policy, config, n_runs=20):
    """Goal-reaching spot check on the empty training arena."""
    params = config.robot_params()
    grid = GridMap(np.zeros((50, 50), dtype=bool))
    rng = np.random.default_rng((config.seed, 99))
    reached = 0
    switch_freqs = []
    for _ in range(n_runs):
        pose = RobotState(rng.uniform(5, 45), rng.uniform(5, 45),
                          rng.uniform(-math.pi, math.pi))
        goal = (rng.uniform(5, 45), rng.uniform(5, 45))
        t, prev, switches, ticks = 0.0, None, 0, 0
        while t < config.budget:
            s = sa_state(pose, goal)
            if s.d_g < config.final_tol:
                reached += 1
                break
            action = policy.action(s.as_vector())
            if prev is not None and action != prev:
                switches += 1
            prev = action
            ticks += 1
            dead = False
            for _ in range(params.substeps):
                pose = step(pose, Action(action), params)
                if collides(grid, pose):
                    dead = True
                    break
            if dead:
                break
            t += params.act_dt
        if ticks:
            switch_freqs.append(switches / ticks)
    return reached / n_runs, float(np.mean(switch_freqs)) if switch_freqs else 0.0


def cmd_train(args, config):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = config.robot_params()
    reward_cfg = config.reward_params()
    env = _load_env(args.env, config)
    kind = SA if args.kind == "sa" else OA
    samples = collect_samples(kind, env, config.sample_count, seed=config.seed,
                              reward_cfg=reward_cfg, robot_params=params,
                              oa_reward=args.reward,
                              use_switch_penalty=args.switch_penalty,
                              hold=config.sample_hold)
    if kind == SA:
        spec = sa_basis(d_max=config.d_norm, order=config.sa_order)
    else:
        spec = oa_basis(sensor_max=config.sensor_max, order=config.oa_order)
    policy, iters = lspi_train(samples, spec, config.lspi_config())
    with open(out / "policy.txt", "w") as f:
        policy.save(f)
    if args.save_samples:
        with open(out / "samples.csv", "w") as f:
            samples.save_csv(f)
    if kind == SA:
        ratio, switch_freq = _evaluate_sa_policy(policy, config)
        success = ratio >= 0.9
    else:
        switch_cost = config.switch_penalty if args.switch_penalty else None
        result = gauntlet_test(policy, [fixtures.gauntlet_map()],
                               budget=config.budget, seed=(config.seed, 98),
                               robot_params=params, criterion="survive",
                               switch_cost=switch_cost)
        success = result.runs[0].success
        switch_freq = result.runs[0].switch_freq
        ratio = result.success_ratio
    (out / "report.csv").write_text(
        "seed,success,switch_freq,lspi_iters\n"
        f"{config.seed},{int(success)},{switch_freq!r},{iters}\n")
    inputs = [] if args.env in ("empty", "office", "random", "gauntlet") else [args.env]
    write_manifest(out, f"train-{args.kind}", config, inputs,
                   [("env", args.env), ("reward", args.reward),
                    ("switch_penalty", args.switch_penalty),
                    ("lspi_iters", iters), ("eval_ratio", ratio)])
    print(f"trained {args.kind} policy: iters={iters} eval={ratio:.2f}")
    return EXIT_OK


def cmd_plan(args, config):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = load_map(Path(args.map).read_text())
    planning = load_map(Path(args.alert).read_text())
    with open(args.graph) as f:
        graph = load_graph(f, planning)
    with open(args.sa) as f:
        sa_policy = Policy.load(f)
    with open(args.oa) as f:
        oa_policy = Policy.load(f)
    start = tuple(float(v) for v in args.start.split(","))
    goal = tuple(int(v) for v in args.goal.split(","))
    abstract = None
    if args.inject:
        from .subgoal_graph import find_path
        probe = find_path(graph, planning,
                          (int(start[0]), int(start[1])), goal)
        if probe.path is None:
            raise PlanningError("no abstract path to inject along")
        abstract = probe.path
        grid = inject_obstacles(grid, abstract, args.inject, args.inject_size,
                                seed=(config.seed, 97))
        (out / "perturbed.map").write_text(save_map(grid))
    pose = RobotState(start[0], start[1], start[2] if len(start) > 2 else 0.0)
    traj = plan(grid, planning, graph, pose, goal, sa_policy, oa_policy,
                config.plan_config(), config.robot_params())
    with open(out / "trajectory.csv", "w") as f:
        traj.save_csv(f)
    (out / "scene.svg").write_text(
        render_svg(grid, planning, graph, abstract, traj))
    metrics = RunMetrics(
        run_id="plan", seed=config.seed, outcome=traj.outcome,
        switch_freq=action_switching_frequency(traj) if len(traj) else 0.0,
        path_len=path_length(traj), h_time=0.0)
    (out / "metrics.csv").write_text(
        ",".join(RunMetrics.HEADER) + "\n" + ",".join(map(str, metrics.row())) + "\n")
    write_manifest(out, "plan", config, [args.map, args.alert, args.graph,
                                         args.sa, args.oa],
                   [("start", args.start), ("goal", args.goal),
                    ("outcome", traj.outcome)])
    print(f"outcome={traj.outcome} ticks={len(traj)} "
          f"length={path_length(traj):.2f}")
    return EXIT_OK


def cmd_bench(args, config):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.map == "rooms512":
        grid = fixtures.bench_map_512()
        inputs = []
    else:
        grid = load_map(Path(args.map).read_text())
        inputs = [args.map]
    t0 = time.perf_counter()
    graph = build_subgoal_graph(grid)
    preprocess_s = time.perf_counter() - t0
    stats = htime_benchmark(grid, graph, config.n_queries, seed=config.seed,
                            min_octile=config.min_octile)
    with open(out / "pairs.csv", "w") as f:
        stats.save_csv(f)
    summary = (f"queries={len(stats.rows)}\n"
               f"median_graph_s={stats.median_graph!r}\n"
               f"median_grid_s={stats.median_grid!r}\n"
               f"mean_graph_s={stats.mean_graph!r}\n"
               f"mean_grid_s={stats.mean_grid!r}\n"
               f"speedup={stats.speedup!r}\n"
               f"preprocess_s={preprocess_s!r}\n")
    (out / "summary.txt").write_text(summary)
    write_manifest(out, "bench", config, inputs,
                   [("map", args.map), ("queries", config.n_queries)])
    print(summary.strip())
    return EXIT_OK


def cmd_experiment(args, config):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = reward_design_experiment(
        n_seeds=config.n_seeds, sample_count=config.sample_count,
        map_kind=args.map_kind, reward_kind=args.reward,
        use_switch_penalty=args.switch_penalty, base_seed=config.seed,
        budget=config.budget, robot_params=config.robot_params(),
        reward_cfg=config.reward_params(), lspi_cfg=config.lspi_config())
    name = f"{args.map_kind}-{args.reward}" + \
        ("-switch" if args.switch_penalty else "")
    with open(out / f"report-{name}.csv", "w") as f:
        report.save_csv(f)
    write_manifest(out, "experiment", config, [],
                   [("arm", name),
                    ("success_ratio", report.success_ratio),
                    ("low_switch_ratio", report.low_switch_ratio),
                    ("mean_iterations", report.mean_iterations)])
    print(f"{name}: success={report.success_ratio:.2f} "
          f"low_switch={report.low_switch_ratio:.2f} "
          f"iters={report.mean_iterations:.2f}")
    return EXIT_OK


def cmd_fixtures(args, config):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "office.map").write_text(save_map(fixtures.office_map()))
    (out / "gauntlet.map").write_text(save_map(fixtures.gauntlet_map()))
    if args.rooms:
        (out / "rooms512.map").write_text(save_map(fixtures.bench_map_512()))
    print(f"fixtures written to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="sgnav",
        description="Subgoal-graph navigation: preprocessing, training, "
                    "planning, and benchmarks.")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config key")
    parser.add_argument("--seed", type=int, help="base RNG seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="build alert map and vertex graph")
    p.add_argument("map")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="collect samples and train a policy")
    p.add_argument("kind", choices=["sa", "oa"])
    p.add_argument("--env", default="empty",
                   help="empty | office | random | gauntlet | map file path")
    p.add_argument("--reward", choices=["concise", "comparative"],
                   default="concise")
    p.add_argument("--switch-penalty", action="store_true")
    p.add_argument("--save-samples", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("plan", help="run one full navigation query")
    p.add_argument("--map", required=True)
    p.add_argument("--alert", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--sa", required=True)
    p.add_argument("--oa", required=True)
    p.add_argument("--start", required=True, metavar="X,Y[,THETA]")
    p.add_argument("--goal", required=True, metavar="X,Y")
    p.add_argument("--inject", type=int, default=0,
                   help="obstacles to drop along the corridor")
    p.add_argument("--inject-size", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="time graph queries against grid A*")
    p.add_argument("--map", default="rooms512",
                   help="map file path or 'rooms512' for the bundled fixture")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("experiment", help="reward/training-map study arm")
    p.add_argument("--map-kind", choices=["office", "random"], required=True)
    p.add_argument("--reward", choices=["concise", "comparative"],
                   required=True)
    p.add_argument("--switch-penalty", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("fixtures", help="materialize bundled maps")
    p.add_argument("--rooms", action="store_true",
                   help="include the 512x512 benchmark map")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = Config()
    try:
        if args.config:
            config.load_file(args.config)
        for override in args.set:
            if "=" not in override:
                raise ConfigError(f"--set expects KEY=VALUE, got {override!r}")
            key, raw = override.split("=", 1)
            config.apply(key.strip(), raw.strip())
        if args.seed is not None:
            config.seed = args.seed
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.func(args, config)
    except (MapFormatError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except PlanningError as err:
        print(f"no path: {err}", file=sys.stderr)
        return EXIT_NOPATH
    except (SolverError, PolicyError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
