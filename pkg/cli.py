#!/usr/bin/env python3
"""Command line for the transport controllability experiments.

Examples:
  python cli.py steer --config config/example.json --out out
  python cli.py linear-control --config config/example.json
  python cli.py probe-lipschitz --m-max 10000
  python cli.py mnc --sets 50 --nblocks 2
  python cli.py selftest
"""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from config.application import config
from config.transport import default_transport
from utils.control import ControlSignal, ControllabilityContext
from utils.dynamics import mild_solve
from utils.errors import ConfigInvalid, DomainError
from utils.io import json_ready, write_control_csv, write_json, write_trajectory_csv
from utils.selftest import run_selftest
from utils.space import GridFunction
from utils.transport import (
    build_transport_model,
    condensing_probe,
    dissipativity_probe,
    lipschitz_sweep,
    steer_transport,
)

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CONFIG = 2


def load_config(path):
    """Experiment config from a JSON file, or {} when no file is given"""
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigInvalid([f"config: file not found: {path}"])
    except json.JSONDecodeError as e:
        raise ConfigInvalid([f"config: invalid JSON ({e})"])
    if not isinstance(data, dict):
        raise ConfigInvalid(["config: expected a JSON object"])
    return data


def _model(args):
    data = load_config(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["output_dir"] = args.out
    model = build_transport_model(data, default_transport)
    Path(model.config.output_dir).mkdir(parents=True, exist_ok=True)
    return model


def _finish(command, model, summary, filename="summary.json"):
    write_json(Path(model.config.output_dir) / filename, summary)
    logger.info("Wrote %s artifacts to %s", command, model.config.output_dir)
    print(f"✓ {command}: " + json.dumps(json_ready(summary), sort_keys=True))
    return EXIT_OK


def cmd_steer(args):
    model = _model(args)
    result = steer_transport(model)
    out = Path(model.config.output_dir)
    write_trajectory_csv(out / "trajectory.csv", result.trajectory)
    write_control_csv(out / "control.csv", result.control)
    summary = {**result.summary(), **model.metadata(), "target_norm": model.target.norm()}
    return _finish("steer", model, summary)


def cmd_linear_control(args):
    model = _model(args)
    context = ControllabilityContext(model.semigroup, model.control_operator, model.grid)
    u = context.inverse(model.target)
    trajectory = mild_solve(
        model.semigroup, model.control_operator, None, u, model.grid, GridFunction.zeros(model.n)
    )
    out = Path(model.config.output_dir)
    write_trajectory_csv(out / "trajectory.csv", trajectory)
    write_control_csv(out / "control.csv", u)
    summary = {
        "reconstruction_residual": (trajectory.final - model.target).norm(),
        "control_energy": u.energy(),
        "gramian": context.gramian.diagnostics(),
        **model.metadata(),
    }
    return _finish("linear-control", model, summary)


def cmd_simulate(args):
    model = _model(args)
    amplitude = model.config.control_amplitude
    u = ControlSignal.constant(model.grid, np.full(model.n, amplitude))
    trajectory = mild_solve(
        model.semigroup,
        model.control_operator,
        model.nonlinearity,
        u,
        model.grid,
        model.initial,
    )
    out = Path(model.config.output_dir)
    write_trajectory_csv(out / "trajectory.csv", trajectory)
    write_control_csv(out / "control.csv", u)
    summary = {
        "T": model.grid.T,
        "nt": model.grid.nt,
        "n": model.n,
        "final_norm": trajectory.final.norm(),
        "control_amplitude": amplitude,
    }
    return _finish("simulate", model, summary)


def _seed(args, model):
    return model.config.seed if args.seed is None else args.seed


def cmd_probe_dissipative(args):
    model = _model(args)
    report = dissipativity_probe(model.n, args.pairs, _seed(args, model))
    return _finish("probe-dissipative", model, report.to_dict(), "probes.json")


def cmd_probe_lipschitz(args):
    model = _model(args)
    report = lipschitz_sweep(model.n, args.m_max)
    return _finish("probe-lipschitz", model, report.to_dict(), "probes.json")


def cmd_mnc(args):
    model = _model(args)
    report = condensing_probe(model.n, args.sets, args.nblocks, _seed(args, model))
    return _finish("mnc", model, report.to_dict(), "probes.json")


def cmd_selftest(args):
    seed = config["seed"] if args.seed is None else args.seed
    return EXIT_OK if run_selftest(seed) else EXIT_DOMAIN


def build_parser():
    parser = argparse.ArgumentParser(description="Semilinear exact controllability toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON experiment config")
    common.add_argument("--out", default=None, help="Output directory")
    common.add_argument("--seed", type=int, default=None, help="Seed for sampled probes")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("steer", parents=[common]).set_defaults(handler=cmd_steer)
    commands.add_parser("linear-control", parents=[common]).set_defaults(handler=cmd_linear_control)
    commands.add_parser("simulate", parents=[common]).set_defaults(handler=cmd_simulate)

    probe = commands.add_parser("probe-dissipative", parents=[common])
    probe.add_argument("--pairs", type=int, default=10_000)
    probe.set_defaults(handler=cmd_probe_dissipative)

    probe = commands.add_parser("probe-lipschitz", parents=[common])
    probe.add_argument("--m-max", type=int, default=10_000)
    probe.set_defaults(handler=cmd_probe_lipschitz)

    probe = commands.add_parser("mnc", parents=[common])
    probe.add_argument("--sets", type=int, default=50)
    probe.add_argument("--nblocks", type=int, default=2)
    probe.set_defaults(handler=cmd_mnc)

    commands.add_parser("selftest", parents=[common]).set_defaults(handler=cmd_selftest)
    return parser


def _report(error):
    print(json.dumps(json_ready(error.to_dict()), sort_keys=True), file=sys.stderr)


def run_cli(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=config["log_level"].upper(), format="%(asctime)s %(name)s %(levelname)s %(message)s"
    )
    try:
        return args.handler(args)
    except ConfigInvalid as e:
        _report(e)
        print(f"✗ {args.command}: invalid configuration")
        return EXIT_CONFIG
    except DomainError as e:
        _report(e)
        print(f"✗ {args.command}: {e.message}")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(run_cli())
