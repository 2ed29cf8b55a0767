"""Experiment command line: simulate datasets, run estimation, certify Jacobians.

Commands:

    padvio simulate        --config cfg.json --out DIR [--seed S]
    padvio estimate FILE   --config cfg.json --out DIR [--no-constraint]
                           [--iterations K] [--damping A]
    padvio check-jacobians [--seed S] [--trials T]

The config file is JSON with flat keys (all optional; defaults reproduce the
reference desk-scale experiment). Exit codes: 0 success, 1 config error,
2 solver failure, 3 certification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import dataset_io, sim
from .checks import run_certification
from .graph import PoseState, min_landmarks
from .imu import WorldParams
from .sim import CameraModel, Dataset, NoiseSpec, Profile, TrajectorySpec
from .solver import IterationError, SolveReport, SolverConfig, solve


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Flat experiment description; defaults are the reference scenario."""

    window_length: int = 7
    imu_dt: float = 0.02
    camera_dt: float = 0.4
    imu_noise_variance: float = 1e-4
    pixel_noise_variance: float = 1e-5
    seed: int = 0
    focal: float = 1.0
    principal_point: List[float] = field(default_factory=lambda: [0.0, 0.0])
    gravity: List[float] = field(default_factory=lambda: [0.0, 0.0, 9.81])
    landmarks: Optional[List[List[float]]] = None  # default: 1 m triangle on the pad
    angular_profile: dict = field(
        default_factory=lambda: {"name": "constant", "value": [0.05, -0.04, 0.12]}
    )
    accel_profile: dict = field(
        default_factory=lambda: {"name": "constant", "value": [0.25, 0.15, -9.51]}
    )
    initial_position: List[float] = field(default_factory=lambda: [0.0, 0.0, -4.0])
    initial_velocity: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    damping: float = 0.1
    iterations: int = 50
    constrain_altitude: bool = True
    convergence_tol: float = 0.0
    photometric_weight: float = 1000.0
    init: str = "cold"  # estimation start: "cold" or "truth"


def load_config(path: Optional[str]) -> ExperimentConfig:
    config = ExperimentConfig()
    if path is None:
        return config
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file is not valid JSON: {err}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown config field: {key}")
        setattr(config, key, value)
    validate_config(config)
    return config


def validate_config(config: ExperimentConfig) -> None:
    def bad(name: str, why: str):
        return ConfigError(f"invalid config field {name}: {why}")

    if not isinstance(config.window_length, int) or config.window_length < 2:
        raise bad("window_length", "must be an integer >= 2")
    for name in ("imu_dt", "camera_dt", "focal", "photometric_weight"):
        value = getattr(config, name)
        if not isinstance(value, (int, float)) or not value > 0:
            raise bad(name, "must be a positive number")
    for name in ("imu_noise_variance", "pixel_noise_variance", "damping", "convergence_tol"):
        value = getattr(config, name)
        if not isinstance(value, (int, float)) or value < 0:
            raise bad(name, "must be a number >= 0")
    if not isinstance(config.iterations, int) or config.iterations < 1:
        raise bad("iterations", "must be an integer >= 1")
    if config.init not in ("cold", "truth"):
        raise bad("init", "must be 'cold' or 'truth'")
    for name, size in (("principal_point", 2), ("gravity", 3), ("initial_position", 3), ("initial_velocity", 3)):
        value = getattr(config, name)
        try:
            arr = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            raise bad(name, f"must be a {size}-vector") from None
        if arr.shape != (size,):
            raise bad(name, f"must be a {size}-vector")
    if config.landmarks is not None:
        arr = np.asarray(config.landmarks, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
            raise bad("landmarks", "must be a list of [x, y, z] triples")
        if np.any(arr[:, 2] != 0.0):
            raise bad("landmarks", "all landmarks must sit on the ground plane z = 0")
    for name in ("angular_profile", "accel_profile"):
        value = getattr(config, name)
        if not isinstance(value, dict) or "name" not in value:
            raise bad(name, "must be an object with a 'name' key")


def _profile_from(config_entry: dict) -> Profile:
    params = {k: v for k, v in config_entry.items() if k != "name"}
    return Profile(config_entry["name"], params)


def config_landmarks(config: ExperimentConfig) -> np.ndarray:
    if config.landmarks is None:
        return sim.triangle_landmarks(1.0)
    return np.asarray(config.landmarks, dtype=float)


def dataset_from_config(config: ExperimentConfig) -> Dataset:
    spec = TrajectorySpec(
        duration=config.camera_dt * (config.window_length - 1),
        imu_dt=config.imu_dt,
        camera_dt=config.camera_dt,
        initial_pose=PoseState(
            R=np.eye(3),
            v=np.asarray(config.initial_velocity, dtype=float),
            p=np.asarray(config.initial_position, dtype=float),
        ),
        angular_profile=_profile_from(config.angular_profile),
        accel_profile=_profile_from(config.accel_profile),
    )
    return sim.generate(
        spec,
        config_landmarks(config),
        CameraModel(float(config.focal), np.asarray(config.principal_point, dtype=float)),
        WorldParams(np.asarray(config.gravity, dtype=float)),
        NoiseSpec(config.imu_noise_variance, config.pixel_noise_variance, config.seed),
    )


def solver_config(config: ExperimentConfig) -> SolverConfig:
    return SolverConfig(
        damping=float(config.damping),
        max_iterations=int(config.iterations),
        constrain_altitude=bool(config.constrain_altitude),
        convergence_tol=float(config.convergence_tol),
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def write_convergence(path: Path, cost_history, step_norms) -> None:
    rows = [
        (i + 1, _fmt(cost), _fmt(norm))
        for i, (cost, norm) in enumerate(zip(cost_history, step_norms))
    ]
    # a run aborted between cost evaluation and step gets a blank step column
    if len(cost_history) == len(step_norms) + 1:
        rows.append((len(cost_history), _fmt(cost_history[-1]), ""))
    _write_csv(path, "iteration,cost,step_norm", rows)


def _rotation_angle(Ra: np.ndarray, Rb: np.ndarray) -> float:
    # trace form stays defined at pi, unlike the full log map
    return float(np.arccos(np.clip((np.trace(Ra.T @ Rb) - 1.0) / 2.0, -1.0, 1.0)))


def write_reports(out: Path, dataset: Dataset, report: SolveReport, wall_clock: float) -> None:
    truth = dataset.ground_truth
    final = report.final_window

    write_convergence(out / "convergence.csv", report.cost_history, report.step_norms)

    pose_rows = []
    for i, (est, ref) in enumerate(zip(final.poses, truth.poses), start=1):
        dp = est.p - ref.p
        angle = _rotation_angle(ref.R, est.R)
        pose_rows.append((i, _fmt(dp[0]), _fmt(dp[1]), _fmt(dp[2]), _fmt(angle)))
    _write_csv(out / "pose_errors.csv", "frame,dx,dy,dz,rot_angle_error_rad", pose_rows)

    lm_rows = []
    for i in range(truth.num_landmarks):
        d = final.landmarks[i] - truth.landmarks[i]
        lm_rows.append((i + 1, _fmt(d[0]), _fmt(d[1]), _fmt(d[2])))
    _write_csv(out / "landmark_errors.csv", "id,dx,dy,dz", lm_rows)

    _write_csv(
        out / "summary.csv",
        "keyframes,landmarks,imu_samples,measurements,iterations,initial_cost,final_cost,wall_clock_seconds",
        [
            (
                truth.n,
                truth.num_landmarks,
                len(dataset.imu_samples),
                2 * len(dataset.pixel_measurements),
                report.iterations_run,
                _fmt(report.cost_history[0]),
                _fmt(report.cost_history[-1]),
                _fmt(wall_clock),
            )
        ],
    )


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    n = config.window_length
    needed = min_landmarks(n)
    if config_landmarks(config).shape[0] < needed:
        print(
            f"warning: {config_landmarks(config).shape[0]} landmarks is below the "
            f"necessary minimum {needed} for window length {n}",
            file=sys.stderr,
        )
    dataset = dataset_from_config(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "dataset.txt"
    dataset_io.write_dataset(dataset, path)
    print(
        f"{dataset.ground_truth.n} keyframes, {len(dataset.imu_samples)} imu samples, "
        f"{2 * len(dataset.pixel_measurements)} measurements"
    )
    print(f"wrote {path}")
    return 0


def cmd_estimate(args) -> int:
    config = load_config(args.config)
    if args.iterations is not None:
        config.iterations = args.iterations
    if args.damping is not None:
        config.damping = args.damping
    if args.no_constraint:
        config.constrain_altitude = False
    validate_config(config)
    try:
        dataset = dataset_io.read_dataset(args.dataset)
    except OSError as err:
        raise ConfigError(f"cannot read dataset: {err}") from None
    except dataset_io.DatasetFormatError as err:
        raise ConfigError(f"bad dataset file: {err}") from None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    window = sim.perturb_initialization(dataset, config.init)
    problem = sim.make_problem(dataset, window, config.photometric_weight)
    start = time.perf_counter()
    try:
        report = solve(problem, solver_config(config))
    except IterationError as err:
        write_convergence(out / "convergence.csv", err.cost_history, err.step_norms)
        print(f"solver failed: {err}", file=sys.stderr)
        return 2
    wall_clock = time.perf_counter() - start
    write_reports(out, dataset, report, wall_clock)
    print(
        f"{report.iterations_run} iterations, cost {_fmt(report.cost_history[0])} -> "
        f"{_fmt(report.cost_history[-1])}, {wall_clock:.3f} s"
    )
    print(f"wrote reports to {out}")
    return 0


def cmd_check_jacobians(args) -> int:
    report = run_certification(
        seed=args.seed if args.seed is not None else 0,
        trials=args.trials,
        corrupt=1e-3 if args.corrupt else 0.0,
    )
    for line in report.lines():
        print(line)
    return 0 if report.passed else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padvio",
        description="Visual-inertial pose and landing-pad landmark estimation experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic flight dataset")
    p_sim.add_argument("--config", help="JSON experiment config")
    p_sim.add_argument("--seed", type=int, help="override the config seed")
    p_sim.add_argument("--out", default="out", help="output directory (default: out)")
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", help="run estimation on a dataset file")
    p_est.add_argument("dataset", help="dataset file written by simulate")
    p_est.add_argument("--config", help="JSON experiment config")
    p_est.add_argument("--out", default="out", help="output directory (default: out)")
    p_est.add_argument("--no-constraint", action="store_true", help="disable the landmark altitude constraint")
    p_est.add_argument("--iterations", type=int, help="override iteration count")
    p_est.add_argument("--damping", type=float, help="override the damping constant")
    p_est.set_defaults(func=cmd_estimate)

    p_chk = sub.add_parser("check-jacobians", help="certify analytic Jacobians against finite differences")
    p_chk.add_argument("--seed", type=int, default=0)
    p_chk.add_argument("--trials", type=int, default=100)
    p_chk.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p_chk.set_defaults(func=cmd_check_jacobians)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
