import argparse
import json
import logging
import sys
import traceback
from typing import List, Optional

from config import (
    APP_DESCRIPTION, APP_NAME, APP_VERSION, DEFAULT_QUERIES_PER_TRIAL, DEFAULT_SEED,
    EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, GENERATOR_KINDS, LOG_FORMAT, LOG_LEVEL
)
from models.schemas import PreprocessOptions, Trial
from services.errors import FlowError, InvariantViolation, OracleError, RoundLimitError
from services.generators import generate_graph
from services.graph_core import Graph, load_graph
from services.oracle import preprocess
from services.storage import StorageService
from services.verification import report_passed, run_bench, run_verify
from utils.helpers import (
    clean_old_reports, create_report_path, parse_vertex_list, validate_graph_file, validate_workload_file
)

logger = logging.getLogger(__name__)


def read_graph(path: str) -> Graph:
    """Load an edge-list graph file"""
    if not validate_graph_file(path):
        raise ValueError(f"unsupported graph file extension: {path}")
    with open(path, "rb") as f:
        return load_graph(f.read())


def options_from(args) -> PreprocessOptions:
    return PreprocessOptions(
        sparsify=getattr(args, "sparsify", False),
        memory_cap=getattr(args, "memory_cap", None),
        decremental=getattr(args, "decremental", False),
    )


def parse_pairs(text: Optional[str]) -> List[tuple]:
    """'0,2 3,4' -> [(0, 2), (3, 4)]"""
    pairs = []
    for token in (text or "").split():
        ids = parse_vertex_list(token)
        if len(ids) != 2:
            raise ValueError(f"bad query pair: {token!r}")
        pairs.append((ids[0], ids[1]))
    return pairs


def emit(text: str) -> None:
    sys.stdout.write(text.rstrip("\n") + "\n")


# Commands

def cmd_gen(args) -> int:
    graph = generate_graph(args.kind, args.n, args.m, args.n_off, args.seed)
    text = graph.to_text()
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
        logger.info(f"graph written to {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_preprocess(args) -> int:
    oracle = preprocess(read_graph(args.graph), args.d_star, options_from(args))
    emit(oracle.metrics.model_dump_json(indent=2))
    return EXIT_OK


def cmd_update(args) -> int:
    oracle = preprocess(read_graph(args.graph), args.d_star, options_from(args))
    state = oracle.update(parse_vertex_list(args.D))
    emit(state.summary.model_dump_json(indent=2))
    return EXIT_OK


def cmd_query(args) -> int:
    oracle = preprocess(read_graph(args.graph), args.d_star, options_from(args))
    if args.workload:
        if not validate_workload_file(args.workload):
            raise ValueError(f"unsupported workload file extension: {args.workload}")
        trials = StorageService.load_workload(args.workload).trials
    else:
        trials = [Trial(D=parse_vertex_list(args.D), queries=parse_pairs(args.pairs))]

    status = EXIT_OK
    for index, trial in enumerate(trials):
        oracle.update(trial.D)
        for k, (u, v) in enumerate(trial.queries):
            result = oracle.explain(u, v)
            emit(result.model_dump_json())
            if trial.expected is not None and k < len(trial.expected) and trial.expected[k] != result.connected:
                logger.error(f"trial {index}: query ({u}, {v}) expected {trial.expected[k]}")
                status = EXIT_MISMATCH
    return status


def cmd_verify(args) -> int:
    graph = read_graph(args.graph)
    report = run_verify(
        graph,
        args.d_star,
        args.trials,
        queries=args.queries,
        seed=args.seed,
        opts=options_from(args),
        inject_fault=args.inject_fault,
        shadow=args.shadow,
        label=args.graph,
    )
    emit(report.model_dump_json(indent=2))
    if args.save:
        clean_old_reports(args.keep_hours)
        path = create_report_path(prefix="verify")
        if StorageService.save_report(path.stem, report):
            logger.info(f"report saved to {path}")
    if not report_passed(report):
        logger.error(f"verification failed: {report.mismatches} mismatches")
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_bench(args) -> int:
    graph = read_graph(args.graph)
    d_values = parse_vertex_list(args.d_values)
    if not d_values:
        raise ValueError("--d-values must list at least one update size")
    frame, slope = run_bench(graph, d_values, args.reps, queries=args.queries, seed=args.seed, opts=options_from(args))
    if args.output:
        StorageService.save_csv(args.output, frame)
    else:
        sys.stdout.write(frame.to_csv(index=False))
    if slope is not None:
        logger.info(f"log-log slope of update time in d: {slope:.3f}")
    emit(json.dumps({"rows": len(frame), "loglog_slope": slope}))
    return EXIT_OK


def cmd_inspect(args) -> int:
    oracle = preprocess(read_graph(args.graph), args.d_star, options_from(args))
    emit(oracle.hierarchy.dump())
    emit(json.dumps({"fingerprint": oracle.fingerprint(), **oracle.metrics.model_dump()}, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=APP_NAME, description=APP_DESCRIPTION)
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="root log level")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a graph file")
    gen.add_argument("kind", choices=GENERATOR_KINDS)
    gen.add_argument("n", type=int, help="vertex count (rows for grid)")
    gen.add_argument("m", type=int, nargs="?", help="edge count for gnm, columns for grid")
    gen.add_argument("--n-off", type=int, default=0)
    gen.add_argument("--seed", type=int, default=DEFAULT_SEED)
    gen.add_argument("-o", "--output")
    gen.set_defaults(func=cmd_gen)

    def oracle_command(name: str, help_text: str, func, d_star_required: bool = True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("graph", help="edge-list graph file")
        p.add_argument("--d-star", type=int, required=d_star_required, default=0)
        p.add_argument("--sparsify", action="store_true", help="keep only d_star+1 sparse forests of on-on edges")
        p.add_argument("--memory-cap", type=int, help="cap on sum |A||B| during preprocessing")
        p.add_argument("--decremental", action="store_true", help="treat every vertex as initially on")
        p.set_defaults(func=func)
        return p

    oracle_command("preprocess", "build the oracle and print its metrics", cmd_preprocess)

    update = oracle_command("update", "apply one update and print its summary", cmd_update)
    update.add_argument("--D", default="", help="vertices to switch, e.g. '1,4,7'")

    query = oracle_command("query", "answer connectivity queries after an update", cmd_query)
    query.add_argument("--D", default="", help="vertices to switch")
    query.add_argument("--pairs", default="", help="query pairs, e.g. '0,2 3,5'")
    query.add_argument("--workload", help="JSON workload of trials")

    verify = oracle_command("verify", "cross-check random workloads against BFS", cmd_verify)
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--queries", type=int, default=DEFAULT_QUERIES_PER_TRIAL)
    verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    verify.add_argument("--inject-fault", action="store_true", help="flip answers to test the harness")
    verify.add_argument("--shadow", action="store_true", help="also check against the explicit affected graph")
    verify.add_argument("--save", action="store_true", help="store the report under the reports directory")
    verify.add_argument("--keep-hours", type=int, default=24 * 7)

    bench = oracle_command("bench", "time updates and queries for several update sizes", cmd_bench, d_star_required=False)
    bench.add_argument("--d-values", required=True, help="update sizes, e.g. '1,2,4,8'")
    bench.add_argument("--reps", type=int, default=10)
    bench.add_argument("--queries", type=int, default=DEFAULT_QUERIES_PER_TRIAL)
    bench.add_argument("--seed", type=int, default=DEFAULT_SEED)
    bench.add_argument("-o", "--output", help="CSV output path")

    oracle_command("inspect", "dump the hierarchy and preprocessing metrics", cmd_inspect, d_star_required=False)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    # Configure logging
    logging.basicConfig(
        level=args.log_level.upper(),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)]
    )

    try:
        return args.func(args)
    except (InvariantViolation, RoundLimitError, FlowError) as e:
        logger.error(f"{args.command} failed: {e}")
        logger.debug(traceback.format_exc())
        return EXIT_MISMATCH
    except (OracleError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_USAGE
    except Exception:
        logger.exception(f"{args.command} failed unexpectedly")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
