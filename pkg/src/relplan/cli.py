"""Command-line front end.

Subcommands: train, eval, graph, dump-mdp, oracle, random-baseline.
Exit codes: 0 success, 1 usage error, 2 model or file error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .evaluate import evaluate, load_baselines, random_baseline
from .graph import build_graph
from .grounding import GroundingError, extract_dbn, ground
from .model import FingerprintMismatch, ModelConfig, PolicyNetwork
from .params import CheckpointError, OptimConfig
from .rddl import RddlError, parse_domain, parse_instance, validate
from .simulator import SimulationError
from .trainer import TrainConfig, TrainingError, train
from .value_iteration import OracleError, value_iteration

_MODEL_ERRORS = (RddlError, GroundingError, SimulationError, CheckpointError,
                 FingerprintMismatch, OracleError, TrainingError, OSError,
                 ValueError, KeyError)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="relplan",
                     description="relational planning with generalized "
                                 "graph-network policies")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p, with_instance=True):
        p.add_argument("--domain", required=True, help="domain .rddl file")
        if with_instance:
            p.add_argument("--instance", required=True, help="instance .rddl file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="JSON file overriding defaults")

    p_train = sub.add_parser("train", help="train a generalized policy")
    p_train.add_argument("--domain", required=True)
    p_train.add_argument("--instance", required=True, nargs="+",
                         help="one or more training instance files")
    p_train.add_argument("--out", required=True, help="checkpoint path")
    p_train.add_argument("--steps", type=int, default=50_000)
    p_train.add_argument("--workers", type=int, default=None)
    p_train.add_argument("--log", help="CSV training log path")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--config", help="JSON file overriding defaults")

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint greedily")
    common(p_eval)
    p_eval.add_argument("--model", required=True, help="checkpoint file")
    p_eval.add_argument("--rollouts", type=int, default=200)
    p_eval.add_argument("--undiscounted", action="store_true")
    p_eval.add_argument("--baselines", help="JSON {instance: {v_min, v_max}}")
    p_eval.add_argument("--json", dest="json_out", help="write the JSON report here")

    p_graph = sub.add_parser("graph", help="emit the instance graph")
    common(p_graph)
    p_graph.add_argument("--format", choices=("dot", "json"), default="dot")

    p_dump = sub.add_parser("dump-mdp", help="dump the ground MDP as JSON")
    common(p_dump)

    p_oracle = sub.add_parser("oracle", help="exact optimal value (small instances)")
    common(p_oracle)
    p_oracle.add_argument("--json", dest="json_out")

    p_rand = sub.add_parser("random-baseline", help="uniform-policy value estimate")
    common(p_rand)
    p_rand.add_argument("--rollouts", type=int, default=200)
    p_rand.add_argument("--undiscounted", action="store_true")
    p_rand.add_argument("--json", dest="json_out")

    return parser


def _load_model(domain_path: str, instance_path: str):
    domain = parse_domain(Path(domain_path).read_text(encoding="utf-8"))
    instance = parse_instance(Path(instance_path).read_text(encoding="utf-8"))
    return validate(domain, instance)


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _cmd_train(args) -> int:
    overrides = _load_config(args.config)
    models = [_load_model(args.domain, inst) for inst in args.instance]
    model_cfg = ModelConfig(**overrides.get("model", {}))
    optim_cfg = OptimConfig(**overrides.get("optim", {}))
    train_kwargs = dict(overrides.get("train", {}))
    train_kwargs.setdefault("total_steps", args.steps)
    if args.workers is not None:
        train_kwargs["workers"] = args.workers
    train_cfg = TrainConfig(optim=optim_cfg, seed=args.seed, **train_kwargs)
    network = PolicyNetwork(models[0].domain, model_cfg, seed=args.seed)
    log_stream = open(args.log, "w", encoding="utf-8") if args.log else None
    try:
        train(network, models, train_cfg, checkpoint_path=args.out,
              log_stream=log_stream)
    finally:
        if log_stream is not None:
            log_stream.close()
    print(f"checkpoint written to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = _load_model(args.domain, args.instance)
    network = PolicyNetwork.load(args.model, model.domain)
    baselines = load_baselines(args.baselines) if args.baselines else None
    report = evaluate(network, model, n_rollouts=args.rollouts, seed=args.seed,
                      discounted=not args.undiscounted, baselines=baselines)
    print(report.format_table())
    if args.json_out:
        Path(args.json_out).write_text(report.to_json(), encoding="utf-8")
    return 0


def _cmd_graph(args) -> int:
    model = _load_model(args.domain, args.instance)
    mdp = ground(model)
    graph = build_graph(mdp, extract_dbn(mdp))
    if args.format == "dot":
        sys.stdout.write(graph.to_dot())
    else:
        print(json.dumps(graph.to_dict(mdp), indent=2))
    return 0


def _cmd_dump_mdp(args) -> int:
    mdp = ground(_load_model(args.domain, args.instance))
    print(mdp.dump_json())
    return 0


def _cmd_oracle(args) -> int:
    mdp = ground(_load_model(args.domain, args.instance))
    result = value_iteration(mdp)
    print(f"V*(s0) = {result.optimal_value}")
    if args.json_out:
        payload = {"optimal_value": result.optimal_value,
                   "n_states": result.n_states, "horizon": result.horizon,
                   "discount": result.discount}
        Path(args.json_out).write_text(json.dumps(payload, indent=2),
                                       encoding="utf-8")
    return 0


def _cmd_random_baseline(args) -> int:
    model = _load_model(args.domain, args.instance)
    report = random_baseline(model, n_rollouts=args.rollouts, seed=args.seed,
                             discounted=not args.undiscounted)
    print(report.format_table())
    if args.json_out:
        Path(args.json_out).write_text(report.to_json(), encoding="utf-8")
    return 0


_DISPATCH = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "graph": _cmd_graph,
    "dump-mdp": _cmd_dump_mdp,
    "oracle": _cmd_oracle,
    "random-baseline": _cmd_random_baseline,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a subcommand is required")
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"relplan: error: {exc}", file=sys.stderr)
        return 1
    try:
        return _DISPATCH[args.command](args)
    except _MODEL_ERRORS as exc:
        print(f"relplan: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
