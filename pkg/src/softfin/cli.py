"""
Command line entry point.

    softfin [--seed N] [--config FILE] [--out DIR] <command> [options]

Commands write under the output directory:

    data/               collect
    surrogate/          train-surrogate (checkpoint, curves, metrics.csv)
    policies/           train-rl (single.ckpt, grid/)
    eval/<controller>/  evaluate (summary.csv, trace.csv)
    eval/               compare (compare.csv, transfer.csv)
    plots/              plot
"""

import argparse
import logging
import os
import sys
from typing import Optional, Sequence, Tuple

import numpy as np

from softfin import settings as lab_settings
from softfin.__version__ import __version__
from softfin.datagen import (
    generate_dataset,
    held_out_logs,
    read_dataset,
    training_logs,
    write_dataset,
)
from softfin.errors import SoftfinError
from softfin.evaluation import (
    compare_controllers,
    read_trace,
    reference_label,
    run_evaluation,
    transfer_report,
    write_comparison,
    write_summaries,
    write_trace,
    write_transfer,
)
from softfin.plots import emit_plots
from softfin.reward import calibrate_smoothness_weight
from softfin.rl.environment import SurrogateEnvironment, dual_rate_rollout
from softfin.rl.policy import PolicyCheckpoint, RandomActor
from softfin.rl.training import GridBank, grid_select, train_grid, train_single
from softfin.surrogate import (
    SurrogateModel,
    evaluate_surrogate,
    train_surrogate,
    write_metrics_table,
)

logger = logging.getLogger(__name__)

CONTROLLERS = ("single", "grid", "random")
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class Lab:
    """
    Paths and settings of one invocation.
    """

    def __init__(self, settings: lab_settings.Settings):
        self.settings = settings
        self.out = settings.out()

    def path(self, *parts: str) -> str:
        """
        Path under the output directory.
        """
        return os.path.join(self.out, *parts)

    @property
    def data_dir(self) -> str:
        return self.path("data")

    @property
    def surrogate_path(self) -> str:
        return self.path("surrogate", "surrogate.ckpt")

    @property
    def single_path(self) -> str:
        return self.path("policies", "single.ckpt")

    @property
    def grid_dir(self) -> str:
        return self.path("policies", "grid")

    def load_surrogate(self) -> SurrogateModel:
        """
        :raises FileNotFoundError: Naming the missing checkpoint.
        """
        if not os.path.isfile(self.surrogate_path):
            raise FileNotFoundError(
                f"Surrogate checkpoint {self.surrogate_path} not found; "
                "run train-surrogate"
            )
        return SurrogateModel.load(self.surrogate_path)

    def load_single(self) -> PolicyCheckpoint:
        """
        :raises FileNotFoundError: Naming the missing checkpoint.
        """
        if not os.path.isfile(self.single_path):
            raise FileNotFoundError(
                f"Policy checkpoint {self.single_path} not found; "
                "run train-rl --mode single"
            )
        return PolicyCheckpoint.load(self.single_path)

    def load_grid(self) -> GridBank:
        return GridBank.load(self.grid_dir)


def _print_size(label: str, size: int) -> None:
    print(f"{label}: {size} bytes ({size / 1e6:.3f} MB)")


def cmd_collect(lab: Lab, args: argparse.Namespace) -> None:
    del args
    settings = lab.settings
    dataset = generate_dataset(
        lab_settings.dataset_config(settings),
        settings.seed(),
        lab_settings.plant_params(settings),
    )
    write_dataset(dataset.logs, dataset.manifest, lab.data_dir)
    print(f"Wrote {len(dataset.logs)} logs to {lab.data_dir}")


def cmd_train_surrogate(lab: Lab, args: argparse.Namespace) -> None:
    del args
    settings = lab.settings
    dataset = read_dataset(lab.data_dir)
    model, curves = train_surrogate(
        training_logs(dataset), lab_settings.train_config(settings)
    )
    _print_size("surrogate", model.save(lab.surrogate_path))
    for name, curve in curves.items():
        curve.write_csv(lab.path("surrogate", f"{name}_curve.csv"))
    rows = evaluate_surrogate(
        model, held_out_logs(dataset), settings.surrogate_dtw_band()
    )
    write_metrics_table(rows, lab.path("surrogate", "metrics.csv"))
    for row in rows:
        print(
            f"{row.model}: RMSE {row.rmse:.4f}  MAE {row.mae:.4f}  DTW {row.dtw:.4f}  "
            f"parameters {row.parameters} (published {row.reference_parameters})"
        )


def cmd_train_rl(lab: Lab, args: argparse.Namespace) -> None:
    settings = lab.settings
    surrogate = lab.load_surrogate()
    ppo = lab_settings.ppo_config(settings)
    rewards = lab_settings.reward_params(settings)
    if args.mode == "single":
        checkpoint = train_single(surrogate, ppo, rewards, settings.seed())
        _print_size("single policy", checkpoint.save(lab.single_path))
        return
    bank = train_grid(
        surrogate, settings.rl_grid_points(), ppo, rewards, settings.seed()
    )
    for point, size in bank.save(lab.grid_dir).items():
        _print_size(f"grid policy {reference_label(point)}", size)
    for point, message in bank.failures.items():
        print(f"grid policy {reference_label(point)} failed: {message}")


def _controller(lab: Lab, kind: str, reference: Tuple[float, float]):
    if kind == "single":
        return lab.load_single().policy
    if kind == "grid":
        return grid_select(lab.load_grid(), reference).policy
    return RandomActor()


def cmd_evaluate(lab: Lab, args: argparse.Namespace) -> None:
    settings = lab.settings
    references = [args.reference] if args.reference else settings.eval_references()
    plant = lab_settings.plant_params(settings)
    rewards = lab_settings.reward_params(settings)
    out_dir = lab.path("eval", args.controller)
    summaries = []
    for reference in references:
        controller = _controller(lab, args.controller, reference)
        for seed in lab_settings.eval_seeds(settings):
            summary, trajectory = run_evaluation(
                controller,
                plant,
                reference,
                seed,
                settings.eval_steps(),
                rewards,
                getattr(controller, "k", settings.rl_history()),
                settings.eval_average_window(),
            )
            summaries.append(summary)
            if not summaries[:-1]:
                write_trace(trajectory, os.path.join(out_dir, "trace.csv"))
            print(
                f"{reference_label(reference)} seed {seed}: "
                f"x error {summary.x_error:.4f} (std {summary.x_std:.4f})  "
                f"y error {summary.y_error:.4f} (std {summary.y_std:.4f})"
            )
    write_summaries(summaries, os.path.join(out_dir, "summary.csv"))


def cmd_compare(lab: Lab, args: argparse.Namespace) -> None:
    del args
    settings = lab.settings
    seeds = lab_settings.eval_seeds(settings)
    plant = lab_settings.plant_params(settings)
    rewards = lab_settings.reward_params(settings)
    bank = lab.load_grid()
    comparison = compare_controllers(
        lab.load_single().policy,
        bank,
        settings.eval_references(),
        seeds,
        plant,
        rewards,
        settings.rl_history(),
        settings.eval_steps(),
        settings.eval_average_window(),
    )
    write_comparison(comparison, lab.path("eval", "compare.csv"))
    transfer = transfer_report(
        bank,
        lab.load_surrogate(),
        seeds,
        plant,
        rewards,
        settings.eval_steps(),
        settings.eval_average_window(),
    )
    write_transfer(transfer, lab.path("eval", "transfer.csv"))
    overall = comparison.overall
    print(
        f"Overall x error: single {overall.single[0]:.4f}, grid {overall.grid[0]:.4f} "
        f"({'grid <= single' if comparison.ordering_holds else 'ordering violated'})"
    )


def cmd_plot(lab: Lab, args: argparse.Namespace) -> None:
    trace_path = args.trace or lab.path("eval", "grid", "trace.csv")
    if not os.path.isfile(trace_path):
        raise FileNotFoundError(f"Trace {trace_path} not found; run evaluate first")
    reference = args.reference or lab.settings.eval_references()[0]
    paths = emit_plots(
        read_trace(trace_path),
        lab.path("plots"),
        reference,
        lab.settings.eval_average_window(),
    )
    for path in paths.values():
        print(path)


def cmd_pipeline(lab: Lab, args: argparse.Namespace) -> None:
    del args
    cmd_collect(lab, argparse.Namespace())
    cmd_train_surrogate(lab, argparse.Namespace())
    cmd_train_rl(lab, argparse.Namespace(mode="single"))
    cmd_train_rl(lab, argparse.Namespace(mode="grid"))
    cmd_evaluate(lab, argparse.Namespace(controller="grid", reference=None))
    cmd_compare(lab, argparse.Namespace())
    cmd_plot(lab, argparse.Namespace(trace=None, reference=None))


def format_setting(value) -> str:
    """
    Setting value in the text form the config file accepts.
    """
    if not isinstance(value, list):
        return str(value)
    if value and isinstance(value[0], tuple):
        return ";".join(",".join(f"{v:g}" for v in item) for item in value)
    return ",".join(f"{item:g}" for item in value)


def cmd_show_config(lab: Lab, args: argparse.Namespace) -> None:
    del args
    for key, value in lab_settings.describe(lab.settings):
        print(f"{key} = {format_setting(value)}")


def cmd_calibrate_reward(lab: Lab, args: argparse.Namespace) -> None:
    settings = lab.settings
    ppo = lab_settings.ppo_config(settings)
    window = settings.reward_window()
    env = SurrogateEnvironment(lab.load_surrogate())
    rng = np.random.default_rng(np.random.SeedSequence([settings.seed(), 31]))
    windows = []
    for _ in range(args.episodes):
        reference = (
            float(rng.uniform(*ppo.fx_range)),
            float(rng.uniform(*ppo.fy_range)),
        )
        episode = dual_rate_rollout(
            RandomActor(), env, reference, ppo.episode_steps, k=ppo.history, rng=rng
        )
        forces = episode.force_trace
        for end in np.cumsum(episode.tick_counts):
            if end >= window:
                windows.append((forces[end - window : end], reference))
    lambda_x, lambda_y = calibrate_smoothness_weight(windows)
    print(f"reward_lambda_x = {lambda_x:.6g}")
    print(f"reward_lambda_y = {lambda_y:.6g}")


def _reference(text: str) -> Tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from e
    return x, y


def build_parser() -> argparse.ArgumentParser:
    """
    Argument parser with one sub-command per stage.
    """
    parser = argparse.ArgumentParser(
        prog="softfin", description="Soft fin force control laboratory."
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument("--seed", type=int, default=None, help="Run seed (default 0)")
    parser.add_argument("--config", default=None, help="Key-value settings file")
    parser.add_argument(
        "--out", default=None, help="Output directory (default softfin-out)"
    )
    commands = parser.add_subparsers(dest="command", metavar="command", required=True)

    commands.add_parser("collect", help="Generate the plant dataset").set_defaults(
        handler=cmd_collect
    )
    commands.add_parser(
        "train-surrogate", help="Train PosNet and ForceNet, report metrics"
    ).set_defaults(handler=cmd_train_surrogate)
    train_rl = commands.add_parser("train-rl", help="Train the motion controller")
    train_rl.add_argument("--mode", choices=("single", "grid"), required=True)
    train_rl.set_defaults(handler=cmd_train_rl)

    evaluate = commands.add_parser("evaluate", help="Run a controller on the plant")
    evaluate.add_argument("--controller", choices=CONTROLLERS, default="grid")
    evaluate.add_argument("--reference", type=_reference, default=None, metavar="X,Y")
    evaluate.set_defaults(handler=cmd_evaluate)

    commands.add_parser(
        "compare", help="Single versus grid on the plant, and grid transfer"
    ).set_defaults(handler=cmd_compare)

    plot = commands.add_parser("plot", help="Emit plot data of an evaluation trace")
    plot.add_argument(
        "--trace", default=None, help="Trace file (default eval/grid/trace.csv)"
    )
    plot.add_argument("--reference", type=_reference, default=None, metavar="X,Y")
    plot.set_defaults(handler=cmd_plot)

    commands.add_parser("pipeline", help="Run every stage").set_defaults(
        handler=cmd_pipeline
    )
    commands.add_parser("show-config", help="Print every setting").set_defaults(
        handler=cmd_show_config
    )
    calibrate = commands.add_parser(
        "calibrate-reward", help="Suggest smoothness weights from random rollouts"
    )
    calibrate.add_argument("--episodes", type=int, default=10)
    calibrate.set_defaults(handler=cmd_calibrate_reward)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line; returns the exit code.
    """
    args = build_parser().parse_args(argv)
    try:
        settings = lab_settings.load_settings(
            args.config, overrides={"seed": args.seed, "out": args.out}
        )
        logging.basicConfig(level=settings.log_level(), format=LOG_FORMAT)
        args.handler(Lab(settings), args)
    except (SoftfinError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0
