"""Command-line interface: ``pldnn train|reason|eval|merge|export|rules-extract``.

Exit codes: 0 success, 1 non-convergence (or recall below 100% with
``eval --strict``), 2 usage or input/output errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from pldnn.errors import PLDNNError
from pldnn.events import Event, Transition
from pldnn.export import DotOptions, export_dot
from pldnn.ingestion import DatasetSchema, dedupe_conflicts, load_records
from pldnn.learning import ConvergenceReport, RecallReport, evaluate_recall, train
from pldnn.merge import merge_networks
from pldnn.network import Network
from pldnn.persistence import load_event_log, load_network, save_network
from pldnn.reasoning import (
    DEFAULT_THETA,
    Mode,
    as_fraction,
    check_theta,
    reason_chain,
    reason_step,
)
from pldnn.rules import (
    RuleLibrary,
    extract_rules,
    parse_rules,
    render_rules,
    rules_to_transitions,
)

log = logging.getLogger("pldnn")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    mode: Mode = Mode.DETERMINISTIC
    theta: Fraction = DEFAULT_THETA
    max_epochs: int = 10
    strict: bool = False
    closed_world: bool = True
    dedupe: bool = False

    def validate(self) -> RunConfig:
        self.mode = Mode.coerce(self.mode)
        self.theta = check_theta(self.theta)
        if not isinstance(self.max_epochs, int) or self.max_epochs < 1:
            raise UsageError("max-epochs must be a positive integer")
        return self


def resolve_config(args: argparse.Namespace, environ: dict[str, str] | None = None) -> RunConfig:
    """Flags beat the config file, which beats ``PLDNN_THETA``, which beats defaults."""
    environ = os.environ if environ is None else environ
    cfg = RunConfig()
    if environ.get("PLDNN_THETA"):
        cfg.theta = as_fraction(environ["PLDNN_THETA"])
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in RunConfig.__dataclass_fields__:
                raise UsageError(f"unknown config key {key!r}")
            setattr(cfg, key, as_fraction(value) if key == "theta" else value)
    for key in ("mode", "theta", "max_epochs", "strict", "closed_world", "dedupe"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, as_fraction(value) if key == "theta" else value)
    return cfg.validate()


# -- inputs -------------------------------------------------------------------


@dataclass
class Loaded:
    transitions: list[Transition]
    info: dict[str, Any] = field(default_factory=dict)


def load_rules_file(path: str) -> RuleLibrary:
    return parse_rules(Path(path).read_text(encoding="utf-8"))


def load_training(args: argparse.Namespace, cfg: RunConfig) -> Loaded:
    if args.rules:
        lib = load_rules_file(args.rules)
        ts = rules_to_transitions(lib, closed_world=cfg.closed_world)
        return Loaded(ts, {"source": "rules", "rules": len(lib.rules)})
    if args.data:
        if not args.schema:
            raise UsageError("--data needs --schema")
        result = load_records(args.data, DatasetSchema.load(args.schema))
        info: dict[str, Any] = {
            "source": "data",
            "rows": len(result),
            "row_errors": [{"row": e.row, "message": e.message} for e in result.errors],
        }
        records = list(result)
        if cfg.dedupe:
            d = dedupe_conflicts(records)
            records = d.records
            info.update(conflicts=d.conflicts, removed=d.removed)
            print(f"conflicting duplicate groups: {d.conflicts} ({d.removed} rows excluded)")
        for e in result.errors:
            print(f"warning: row {e.row} skipped: {e.message}", file=sys.stderr)
        return Loaded([r.transition for r in records], info)
    if args.log:
        return Loaded(load_event_log(args.log), {"source": "log"})
    raise UsageError("one of --rules, --data or --log is required")


def add_source_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--rules", help="rule library file")
    src.add_argument("--data", help="CSV dataset (needs --schema)")
    src.add_argument("--log", help="event log, one transition per line")
    p.add_argument("--schema", help="JSON dataset schema")
    p.add_argument(
        "--closed-world",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="compile rules with explicit negatives for unstated things (default on)",
    )
    p.add_argument("--dedupe", action="store_true", default=None,
                   help="drop rows whose features repeat with a different target")


def add_reasoning_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["det", "prob", "deterministic", "probabilistic"])
    p.add_argument("--theta", help="probabilistic threshold in (0, 1], e.g. 1/2 or 0.5")


def write_report(path: str | None, payload: dict[str, Any]) -> None:
    if path:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        Path(path).write_text(text, encoding="utf-8")


def _recall_json(recall: RecallReport) -> dict[str, Any]:
    return {
        "total": recall.total,
        "recalled": recall.recalled,
        "recall": str(recall.fraction),
        "failures": [
            {
                "index": f.index,
                "event": str(f.transition.pre),
                "expected": sorted(f.transition.post.positives),
                "predicted": sorted(f.predicted),
            }
            for f in recall.failures
        ],
    }


def _convergence_json(rep: ConvergenceReport) -> dict[str, Any]:
    return {
        "converged": rep.converged,
        "epochs": rep.epochs,
        "changes_per_epoch": rep.changes_per_epoch,
        "recall": str(rep.recall),
    }


def _print_convergence(rep: ConvergenceReport, total: int) -> None:
    state = "converged" if rep.converged else "did not converge"
    print(f"{state} after {rep.epochs} epoch(s); structural changes {rep.changes_per_epoch}")
    recalled = round(rep.recall * total)
    print(f"recall {recalled}/{total} ({float(rep.recall):.2%})")
    for f in rep.failures[:20]:
        print(f"  row {f.index}: expected {sorted(f.transition.post.positives)}, "
              f"got {sorted(f.predicted)}")


def _summary(network: Network) -> str:
    return (f"{len(network)} neurons, {network.num_excitatory} excitatory links, "
            f"{network.num_inhibitory} inhibitory links")


# -- commands -----------------------------------------------------------------


def cmd_train(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    loaded = load_training(args, cfg)
    network = Network()
    rep = train(network, loaded.transitions, cfg.max_epochs, cfg.mode, cfg.theta)
    _print_convergence(rep, len(loaded.transitions))
    print(_summary(network))
    if args.out:
        save_network(network, args.out)
    write_report(args.report, {
        "command": "train",
        **loaded.info,
        **_convergence_json(rep),
        "failures": _recall_json(RecallReport(len(loaded.transitions), rep.failures))["failures"],
        "neurons": len(network),
        "excitatory_links": network.num_excitatory,
        "inhibitory_links": network.num_inhibitory,
    })
    return EXIT_OK if rep.converged else EXIT_FAIL


def _warn_unknown(network: Network, event: Event) -> None:
    for label in sorted(event.labels):
        if label not in network:
            print(f"warning: unknown thing {label!r} ignored", file=sys.stderr)


def _fmt(labels: Sequence[str] | frozenset[str]) -> str:
    return ", ".join(sorted(labels)) if labels else "(none)"


def cmd_reason(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    network = load_network(args.network)
    event = Event.parse(args.event)
    _warn_unknown(network, event)
    payload: dict[str, Any] = {"command": "reason", "event": str(event), "mode": cfg.mode.value}
    if args.chain:
        chain = reason_chain(network, event, args.max_depth)
        for i, rnd in enumerate(chain.rounds, 1):
            print(f"round {i}: {_fmt(rnd)}")
        print(_fmt(chain.inferred))
        if not chain.fixpoint:
            print(f"warning: no fixpoint within {args.max_depth} rounds", file=sys.stderr)
        payload.update(
            inferred=sorted(chain.inferred),
            rounds=[sorted(r) for r in chain.rounds],
            fixpoint=chain.fixpoint,
        )
        write_report(args.report, payload)
        return EXIT_OK

    result = reason_step(network, event, cfg.mode, cfg.theta)
    print(_fmt(result.predicted))
    scored = sorted(
        ((s, label) for label, s in result.rs.scores.items() if s > 0),
        key=lambda pair: (-pair[0], pair[1]),
    )
    if cfg.mode is Mode.PROBABILISTIC:
        for s, label in scored:
            mark = "*" if label in result.rs else " "
            print(f"{mark} {label}\t{s}\t({float(s):.3f})")
    if args.trace:
        for entries in result.trace.values():
            for e in entries:
                state = "inhibited" if e.inhibited else "active"
                print(f"  {e.signature} w={e.weight} {state} score={e.score}")
                for il in e.inhibitors:
                    print(f"    blocked by {il.signature} w={il.weight}")
    payload.update(
        predicted=sorted(result.predicted),
        theta=str(result.rs.theta),
        scores={label: str(s) for s, label in scored},
        unknown=sorted(result.activation.unknown),
    )
    write_report(args.report, payload)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    network = load_network(args.network)
    loaded = load_training(args, cfg)
    recall = evaluate_recall(network, loaded.transitions, cfg.mode, cfg.theta)
    print(f"recall {recall.recalled}/{recall.total} ({float(recall.fraction):.2%})")
    for f in recall.failures[:20]:
        print(f"  row {f.index}: missing {sorted(f.missing)}, extra {sorted(f.extra)}")
    write_report(args.report, {"command": "eval", **loaded.info, **_recall_json(recall)})
    if cfg.strict and recall.failures:
        return EXIT_FAIL
    return EXIT_OK


def _load_replay(paths: Sequence[str], closed_world: bool) -> list[Transition]:
    # rule files are pooled into one library so the closed world spans them all
    rules, logs = [], []
    for p in paths:
        if p.endswith(".rules"):
            rules.extend(load_rules_file(p).rules)
        else:
            logs.extend(load_event_log(p))
    out: list[Transition] = []
    if rules:
        unique = list(dict.fromkeys(rules))
        out += rules_to_transitions(RuleLibrary(tuple(unique)), closed_world=closed_world)
    return out + logs


def cmd_merge(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    a, b = load_network(args.network_a), load_network(args.network_b)
    replay = _load_replay(args.replay, cfg.closed_world) if args.replay else None
    result = merge_networks(a, b, replay, cfg.max_epochs, cfg.mode, cfg.theta)
    if result.report is not None:
        _print_convergence(result.report, len(replay or ()))
    print(_summary(result.network))
    save_network(result.network, args.out)
    payload: dict[str, Any] = {"command": "merge", "structural_only": result.structural_only}
    if result.report is not None:
        payload.update(_convergence_json(result.report))
    write_report(args.report, payload)
    if result.report is not None and not result.report.converged:
        return EXIT_FAIL
    return EXIT_OK


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_export(args: argparse.Namespace) -> int:
    network = load_network(args.network)
    _emit(export_dot(network, DotOptions(weights=not args.no_weights)), args.out)
    return EXIT_OK


def cmd_rules_extract(args: argparse.Namespace) -> int:
    network = load_network(args.network)
    lib = extract_rules(network, as_fraction(args.min_weight))
    _emit(render_rules(lib), args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pldnn", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file with run settings")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="build a network from rules, data or an event log")
    add_source_args(p)
    add_reasoning_args(p)
    p.add_argument("--out", help="where to write the network document")
    p.add_argument("--max-epochs", type=int)
    p.add_argument("--report", help="write a JSON report here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("reason", help="predict what happens after an event")
    p.add_argument("network")
    p.add_argument("event", help='literals such as "+hair,-feathers"')
    add_reasoning_args(p)
    p.add_argument("--chain", action="store_true", help="feed predictions back until fixpoint")
    p.add_argument("--max-depth", type=int, default=10)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--report")
    p.set_defaults(func=cmd_reason)

    p = sub.add_parser("eval", help="exact one-step recall of a network on a dataset")
    p.add_argument("network")
    add_source_args(p)
    add_reasoning_args(p)
    p.add_argument("--strict", action="store_true", default=None,
                   help="exit 1 unless recall is 100%%")
    p.add_argument("--report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("merge", help="integrate two networks")
    p.add_argument("network_a")
    p.add_argument("network_b")
    p.add_argument("--replay", nargs="+", metavar="FILE",
                   help="rule files and/or event logs to replay on the union")
    p.add_argument("--out", required=True)
    p.add_argument("--max-epochs", type=int)
    p.add_argument("--closed-world", action=argparse.BooleanOptionalAction, default=None)
    add_reasoning_args(p)
    p.add_argument("--report")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("export", help="render a network as a graph")
    p.add_argument("network")
    p.add_argument("--format", choices=["dot"], default="dot")
    p.add_argument("--no-weights", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("rules-extract", help="read the network back as if-then rules")
    p.add_argument("network")
    p.add_argument("--min-weight", default="1/2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rules_extract)
    return parser


def _setup_logging(verbosity: int) -> None:
    # a fresh handler per call so it writes to whatever sys.stderr is now
    logger = logging.getLogger("pldnn")
    for h in list(logger.handlers):
        if getattr(h, "pldnn_cli", False):
            logger.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.pldnn_cli = True  # type: ignore[attr-defined]
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.WARNING - 10 * min(verbosity, 2))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, PLDNNError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
