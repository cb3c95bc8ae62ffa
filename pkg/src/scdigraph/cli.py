"""Command-line interface.

Subcommands expose the library's four faces: ``lambda`` and ``count``
evaluate the asymptotic formulas, ``exact`` runs the brute-force and
inclusion-exclusion oracles, ``sample`` writes uniform dicores as edge-list
files, ``mc`` runs the Monte Carlo experiments, and ``validate`` sweeps the
asymptotic dicore count against the exact one.

Machine output goes to stdout only; warnings and error messages go to
stderr.  Identical argument vectors (seed included) produce byte-identical
stdout: JSON keys are emitted in a fixed order and floats are rendered with
%.12g.  Exit codes: 0 success, 2 usage error, 3 domain error, 4 resource
ceiling.
"""

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from .counts import log_count_dicore, log_count_min_degree, log_count_strong
from .digraph import write_edge_list
from .errors import DomainError, ResourceLimitError
from .generation import (
    mc_heart_strong,
    mc_scycle_census,
    mc_simple_fraction,
    mc_strong_probability,
    sample_dicore,
)
from .oracles import brute_force_census, ie_dicore_count, ie_dicore_count_loopfree
from .truncated_poisson import TruncatedPoisson, solve_rate

_SCYCLE_MAX_LEN = 5


def _fmt(x: float) -> str:
    return "%.12g" % x


def _check_seed(seed: int) -> int:
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _cmd_lambda(args) -> None:
    rate = solve_rate(args.c, args.k)
    eta = TruncatedPoisson.from_rate(args.k, rate).factorial_ratio
    print(
        '{"lambda": %s, "eta": %s, "c": %s}' % (_fmt(rate), _fmt(eta), _fmt(args.c))
    )


def _cmd_count(args) -> None:
    if args.kind != "kdicore" and (args.kplus != 1 or args.kminus != 1):
        raise DomainError("--kplus/--kminus apply only to --kind kdicore")
    if args.kind != "strong" and args.form != "main":
        raise DomainError("--form applies only to --kind strong")
    if args.kind == "strong":
        result = log_count_strong(args.n, args.m, args.loop_free, form=args.form)
    elif args.kind == "dicore":
        result = log_count_dicore(args.n, args.m, args.loop_free)
    else:
        result = log_count_min_degree(
            args.n, args.m, args.kplus, args.kminus, args.loop_free
        )
    print(
        '{"log_natural": %s, "log10": %s, "sci_notation": "%s"}'
        % (_fmt(result.log_value), _fmt(result.log10), result.sci)
    )


def _cmd_exact(args) -> None:
    cutoffs = (args.kplus, args.kminus)
    if args.method == "ie":
        if args.predicate != "dicore":
            raise DomainError(
                "inclusion-exclusion computes dicore counts only; "
                "use --method brute for the strong predicate"
            )
        if cutoffs != (1, 1):
            raise DomainError(
                "inclusion-exclusion handles the (1, 1) cutoffs only"
            )
        ie = ie_dicore_count_loopfree if args.loop_free else ie_dicore_count
        print(ie(args.n, args.m))
        return
    census = brute_force_census(
        args.n, args.m, loop_free=args.loop_free,
        kplus=args.kplus, kminus=args.kminus, jobs=args.jobs,
    )
    if args.predicate == "strong":
        if cutoffs != (1, 1):
            raise DomainError("the strong predicate does not take degree cutoffs")
        print(census.strongly_connected)
    else:
        print(census.min_degree(args.kplus, args.kminus))


def _cmd_sample(args) -> None:
    _check_seed(args.seed)
    if args.count < 1:
        raise DomainError(f"--count must be positive, got {args.count}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for index in range(args.count):
        rng = np.random.default_rng([args.seed, index])
        graph = sample_dicore(
            args.n, args.m, kplus=args.kplus, kminus=args.kminus,
            loop_free=args.loop_free, rng=rng,
        )
        path = out_dir / f"dicore_{index:05d}.txt"
        write_edge_list(graph, path)
        print(path)


def _cmd_mc(args) -> None:
    _check_seed(args.seed)
    if args.experiment == "strong":
        report = mc_strong_probability(
            args.n, args.m, args.trials, args.seed,
            loop_free=args.loop_free, jobs=args.jobs,
        )
    elif args.experiment == "simple":
        report = mc_simple_fraction(
            args.n, args.m, args.trials, args.seed,
            loop_free=args.loop_free, jobs=args.jobs,
        )
    elif args.experiment == "scycles":
        report = mc_scycle_census(
            args.n, args.m, _SCYCLE_MAX_LEN, args.trials, args.seed,
            loop_free=args.loop_free, jobs=args.jobs,
        )
    else:
        if args.loop_free:
            raise DomainError("the heart experiment has no loop-free variant")
        report = mc_heart_strong(
            args.n, args.m, args.trials, args.seed, jobs=args.jobs
        )
    print(report.to_json())


def _cmd_validate(args) -> None:
    try:
        sizes = [int(part) for part in args.n_list.split(",") if part.strip()]
    except ValueError as exc:
        raise DomainError(f"--n-list must be comma-separated integers: {exc}")
    if not sizes:
        raise DomainError("--n-list is empty")
    kind = "dicore-loopfree" if args.loop_free else "dicore"
    ie = ie_dicore_count_loopfree if args.loop_free else ie_dicore_count
    print("n,m,kind,exact,asymptotic_log,rel_error,runtime_ms")
    for n in sizes:
        m = round(args.c * n)
        start = time.perf_counter()
        exact = ie(n, m)
        log_asym = log_count_dicore(n, m, loop_free=args.loop_free).log_value
        runtime_ms = (time.perf_counter() - start) * 1000.0
        rel_error = abs(math.expm1(log_asym - math.log(exact)))
        print(
            "%d,%d,%s,%d,%s,%s,%.3f"
            % (n, m, kind, exact, _fmt(log_asym), _fmt(rel_error), runtime_ms)
        )


def _add_degree_flags(parser, kplus_help: str) -> None:
    parser.add_argument("--kplus", type=int, default=1, help=kplus_help)
    parser.add_argument("--kminus", type=int, default=1, help="minimum indegree")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scdigraph",
        description="Count, sample, and validate digraphs with degree constraints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "lambda", help="solve the rate whose truncated Poisson has mean c"
    )
    p.add_argument("--c", type=float, required=True, help="target mean degree")
    p.add_argument("--k", type=int, default=1, help="truncation cutoff")
    p.set_defaults(handler=_cmd_lambda)

    p = sub.add_parser("count", help="asymptotic log-counts")
    p.add_argument(
        "--kind", choices=("strong", "dicore", "kdicore"), required=True
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _add_degree_flags(p, "minimum outdegree (kdicore only)")
    p.add_argument("--loop-free", action="store_true")
    p.add_argument(
        "--form", choices=("main", "sparse", "dense"), default="main",
        help="formula variant (strong only)",
    )
    p.set_defaults(handler=_cmd_count)

    p = sub.add_parser("exact", help="exact counts from the oracles")
    p.add_argument("--method", choices=("brute", "ie"), required=True)
    p.add_argument("--predicate", choices=("strong", "dicore"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--loop-free", action="store_true")
    _add_degree_flags(p, "minimum outdegree (brute dicore only)")
    p.add_argument("--jobs", type=int, default=1, help="brute-force shards")
    p.set_defaults(handler=_cmd_exact)

    p = sub.add_parser("sample", help="write uniform samples as edge lists")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _add_degree_flags(p, "minimum outdegree")
    p.add_argument("--loop-free", action="store_true")
    p.add_argument("--count", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, required=True, help="64-bit unsigned seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("mc", help="Monte Carlo experiments")
    p.add_argument(
        "--experiment", choices=("strong", "simple", "scycles", "heart"),
        required=True,
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True, help="64-bit unsigned seed")
    p.add_argument("--loop-free", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="trial shards")
    p.set_defaults(handler=_cmd_mc)

    p = sub.add_parser(
        "validate", help="sweep the asymptotic count against the exact one"
    )
    p.add_argument("--kind", choices=("dicore",), default="dicore")
    p.add_argument("--c", type=float, default=2.0, help="mean degree of the sweep")
    p.add_argument(
        "--n-list", default="20,40,80,160",
        help="comma-separated vertex counts",
    )
    p.add_argument("--loop-free", action="store_true")
    p.set_defaults(handler=_cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
