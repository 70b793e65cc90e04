"""Command-line entry point: sweeps, verification, live sessions, serving.

Exit codes: 0 success, 1 property failure, 2 usage error, 3 I/O error.
The CAT_SEED environment variable supplies the seed when --seed is absent.
"""

from __future__ import annotations

import argparse
import os
import sys

from .harness import emit_csv, format_report, sweep, verify
from .strategies import SessionStatus, StrategyKind, start
from .subject import Outcome

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _parse_strategy(name: str) -> StrategyKind:
    try:
        return StrategyKind(name.lower())
    except ValueError:
        choices = ", ".join(k.value for k in StrategyKind)
        raise argparse.ArgumentTypeError(f"unknown strategy {name!r} (choose from {choices})")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catsearch",
        description="Adaptive difficulty search: sweeps, verification, live sessions.",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="master seed (falls back to CAT_SEED, then 0)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="sweep one strategy over all p and write CSV")
    p_sweep.add_argument("--strategy", type=_parse_strategy, required=True)
    p_sweep.add_argument("--n", type=int, required=True)
    p_sweep.add_argument("--out", required=True)

    p_compare = sub.add_parser("compare", help="sweep several strategies into one CSV")
    p_compare.add_argument(
        "--strategies",
        required=True,
        help="comma-separated strategy names",
    )
    p_compare.add_argument("--n", type=int, required=True)
    p_compare.add_argument("--out", required=True)

    p_verify = sub.add_parser("verify", help="run the property battery")
    p_verify.add_argument("--n-max", type=int, default=4096)

    p_session = sub.add_parser(
        "session", help="interactive line-protocol session on stdin/stdout"
    )
    p_session.add_argument("--strategy", type=_parse_strategy, required=True)
    p_session.add_argument("--n", type=int, required=True)

    p_serve = sub.add_parser("serve", help="start the HTTP session service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--log", default="catsearch-events.jsonl")
    p_serve.add_argument("--static-dir", default=None)
    return parser


def _effective_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CAT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            print(f"error: CAT_SEED must be an integer, got {env!r}", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
    return 0


def cmd_sweep(strategy: StrategyKind, n: int, out: str) -> int:
    if n < 1:
        print(f"error: --n must be >= 1, got {n}", file=sys.stderr)
        return EXIT_USAGE
    try:
        emit_csv(sweep(strategy, n), out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_compare(strategies: list[StrategyKind], n: int, out: str) -> int:
    if n < 1:
        print(f"error: --n must be >= 1, got {n}", file=sys.stderr)
        return EXIT_USAGE
    rows = []
    for strategy in strategies:
        rows.extend(sweep(strategy, n))
    try:
        emit_csv(rows, out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_verify(n_max: int, seed: int) -> int:
    if n_max < 16:
        print(f"error: --n-max must be >= 16, got {n_max}", file=sys.stderr)
        return EXIT_USAGE
    report = verify(n_max, seed=seed)
    print(format_report(report))
    return EXIT_OK if report.overall_pass else EXIT_PROPERTY_FAILURE


def cmd_session(strategy: StrategyKind, n: int, stdin=None, stdout=None) -> int:
    """Line protocol: print PROBE <level>, read pass/fail/quit, print RESULT."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    if n < 1:
        print(f"error: --n must be >= 1, got {n}", file=sys.stderr)
        return EXIT_USAGE
    session = start(strategy, n)
    while session.status is not SessionStatus.DONE:
        level = session.next_probe()
        print(f"PROBE {level}", file=stdout, flush=True)
        line = stdin.readline()
        if not line:
            return EXIT_USAGE  # stdin closed mid-session
        word = line.strip().lower()
        if word == "quit":
            return EXIT_OK
        if word not in ("pass", "fail"):
            print(f"error: expected pass, fail or quit, got {word!r}", file=sys.stderr)
            return EXIT_USAGE
        session.observe(Outcome(word))
    print(
        f"RESULT {session.result} NEGATIVES {session.negatives} "
        f"TOTAL {len(session.trace)}",
        file=stdout,
        flush=True,
    )
    return EXIT_OK


def cmd_serve(port: int, host: str, log: str, static_dir: str | None) -> int:
    import uvicorn

    from .service import SessionStore, create_app

    try:
        store = SessionStore(log)
    except OSError as exc:
        print(f"error: cannot open event log {log}: {exc}", file=sys.stderr)
        return EXIT_IO
    app = create_app(store, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    seed = _effective_seed(args)
    if args.command == "sweep":
        return cmd_sweep(args.strategy, args.n, args.out)
    if args.command == "compare":
        try:
            strategies = [_parse_strategy(s) for s in args.strategies.split(",") if s]
        except argparse.ArgumentTypeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if not strategies:
            print("error: --strategies must name at least one strategy", file=sys.stderr)
            return EXIT_USAGE
        return cmd_compare(strategies, args.n, args.out)
    if args.command == "verify":
        return cmd_verify(args.n_max, seed)
    if args.command == "session":
        return cmd_session(args.strategy, args.n)
    if args.command == "serve":
        return cmd_serve(args.port, args.host, args.log, args.static_dir)
    parser.error(f"unknown command {args.command!r}")  # pragma: no cover
    return EXIT_USAGE  # pragma: no cover


if __name__ == "__main__":
    raise SystemExit(main())
