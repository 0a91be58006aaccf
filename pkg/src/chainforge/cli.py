"""Command-line client for the chainforge service.

Every data command talks HTTP to the service API. By default the
service runs in-process (no daemon needed, results land on stdout
exactly as a remote call would produce them); pass --server to point
the same commands at a running instance instead. Exit codes: 0 on
success, 1 when a computation was refused or failed (resource guards,
unreachable server), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import shlex
import sys
from pathlib import Path

import httpx

from . import __version__
from .errors import ModelError
from .exact import parse_probability, parse_rational

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_USAGE = 2

DEFAULT_SAMPLES = 100_000


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class Client:
    """JSON-over-HTTP caller that maps service errors to exit codes."""

    def __init__(self, http: httpx.AsyncClient):
        self._http = http

    async def call(self, method: str, path: str, *, body=None, params=None):
        try:
            response = await self._http.request(method, path, json=body, params=params)
        except httpx.HTTPError as exc:
            raise CliFailure(EXIT_COMPUTE, f"service unreachable: {exc}") from None
        if response.status_code >= 400:
            raise CliFailure(_exit_for_status(response.status_code), _error_detail(response))
        return response.json()


def _exit_for_status(status: int) -> int:
    if status == 507:
        return EXIT_COMPUTE
    if 400 <= status < 500:
        return EXIT_USAGE
    return EXIT_COMPUTE


def _error_detail(response: httpx.Response) -> str:
    try:
        detail = response.json().get("detail")
    except Exception:
        detail = None
    if isinstance(detail, str):
        return detail
    if detail is None:
        return f"service error {response.status_code}"
    return json.dumps(detail)


def rational_arg(text: str) -> str:
    try:
        parse_rational(text)
    except ModelError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def probability_arg(text: str) -> str:
    try:
        parse_probability(text)
    except ModelError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def gate_payload(text: str):
    """Preset name, or explicit "GAIN,LOSS" effects for a custom gate."""
    if "," not in text:
        return text
    parts = text.split(",")
    if len(parts) != 2:
        raise CliFailure(EXIT_USAGE, f"bad gate {text!r}: use a preset name or GAIN,LOSS")
    try:
        gain, loss = int(parts[0]), int(parts[1])
    except ValueError:
        raise CliFailure(EXIT_USAGE, f"bad gate {text!r}: use a preset name or GAIN,LOSS") from None
    return {"name": "", "success_gain": gain, "failure_loss": loss}


def format_value(exact: str, approx: float) -> str:
    return f"{exact} ({approx!r})"


def render_csv(columns, rows, argv_line: str, failures=()) -> str:
    def cell(value) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return repr(value)
        return str(value)

    lines = [f"# chainforge {__version__} | {argv_line}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(cell(row.get(col)) for col in columns))
    for failure in failures:
        fields = " ".join(f"{key}={failure[key]}" for key in failure)
        lines.append(f"# failed: {fields}")
    return "\n".join(lines) + "\n"


def emit(text: str, output: str | None):
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


async def cmd_optimize(client: Client, args) -> int:
    body = {
        "n_pairs": args.pairs,
        "gate": gate_payload(args.gate),
        "p": args.p,
        "mode": args.mode,
        "allow_halt": args.halt,
        "reachable_only": args.reachable_only,
        "include_table": args.output is not None,
    }
    if args.max_entries is not None:
        body["max_entries"] = args.max_entries
    doc = await client.call("POST", "/tables", body=body)
    print(
        f"table {doc['table_id']}: {doc['entries']} entries"
        + (" (cached)" if doc.get("cached") else ""),
        file=sys.stderr,
    )
    if args.output is not None:
        emit(json.dumps(doc["table"], indent=2) + "\n", args.output)
        print(f"wrote table to {args.output}", file=sys.stderr)
    print(format_value(doc["value"], doc["value_float"]))
    return EXIT_OK


async def cmd_policy(client: Client, args) -> int:
    try:
        document = json.loads(Path(args.table).read_text())
    except OSError as exc:
        raise CliFailure(EXIT_USAGE, f"cannot read table file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliFailure(EXIT_USAGE, f"table file is not valid JSON: {exc}") from None
    imported = await client.call("POST", "/tables/import", body={"table": document})
    entry = await client.call(
        "GET", f"/tables/{imported['table_id']}/entry", params={"config": args.config}
    )
    print(f"value: {format_value(entry['value'], entry['value_float'])}")
    action = entry["action"] if entry["action"] is not None else "none (terminal)"
    print(f"action: {action}")
    return EXIT_OK


async def cmd_sweep(client: Client, args) -> int:
    if args.n_max < args.n_min:
        raise CliFailure(EXIT_USAGE, "--n-max must not be below --n-min")
    modes = args.modes
    strategies = args.strategies
    if modes is None and strategies is None:
        modes = ["best", "worst"]  # an explicitly empty list stays an empty sweep
    modes = modes or []
    strategies = strategies or []
    body = {
        "n_values": list(range(args.n_min, args.n_max + 1, args.n_step)),
        "p_values": args.p,
        "gates": [gate_payload(g) for g in args.gates],
        "modes": modes,
        "strategies": strategies,
        "allow_halt": args.halt,
    }
    if args.max_entries is not None:
        body["max_entries"] = args.max_entries
    doc = await client.call("POST", "/sweep", body=body)
    emit(render_csv(doc["columns"], doc["rows"], args.argv_line, doc["failures"]), args.output)
    if doc["failures"]:
        print(f"sweep: {len(doc['failures'])} of {len(doc['rows'])} cells failed", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


async def cmd_simulate(client: Client, args) -> int:
    if args.strategy and args.mode:
        raise CliFailure(EXIT_USAGE, "give either --strategy or --mode, not both")
    body = {
        "config": args.config,
        "gate": gate_payload(args.gate),
        "p": args.p,
        "allow_halt": args.halt,
    }
    if args.mode:
        body["mode"] = args.mode
    else:
        body["strategy"] = args.strategy or "modesty"
    if args.exact:
        if args.max_vertices is not None:
            body["max_vertices"] = args.max_vertices
        doc = await client.call("POST", "/distribution", body=body)
    else:
        body["samples"] = args.samples
        body["seed"] = args.seed
        doc = await client.call("POST", "/simulate", body=body)
    print(json.dumps(doc["summary"], indent=2))
    return EXIT_OK


async def cmd_weave(client: Client, args) -> int:
    sub = args.weave_command
    if sub in ("bound", "exact"):
        doc = await client.call(
            "POST", "/weave/eval", body={"n": args.n, "a": args.a, "p": args.p}
        )
        if sub == "bound":
            print(repr(doc["bound"]))
        else:
            print(format_value(doc["exact"], doc["exact_float"]))
        return EXIT_OK
    if sub == "solve":
        doc = await client.call(
            "POST",
            "/weave/solve",
            body={
                "n": args.n,
                "p": args.p,
                "target": args.target,
                "model": args.model,
                "resolution": args.resolution,
            },
        )
        print(f"a: {doc['a']!r}")
        if doc["budget"] is not None:
            print(f"budget: {doc['budget']}")
        print(f"achieved: {doc['achieved']!r}")
        return EXIT_OK
    if sub == "cost":
        doc = await client.call("POST", "/weave/cost", body={"p": args.p})
        print(f"total: {format_value(doc['total'], doc['total_float'])}")
        print(f"lattice_edges: {doc['lattice_edges']}")
        print(f"trim_loss: {doc['trim_loss']}")
        print(f"failure_loss: {doc['failure_loss']}")
        print(f"note: {doc['note']}")
        return EXIT_OK
    if sub == "sweep":
        if (args.a is None) == (args.target is None):
            raise CliFailure(EXIT_USAGE, "give either --a values or --target, not both")
        body = {
            "n_values": args.n,
            "p_values": args.p,
            "model": args.model,
        }
        if args.a is not None:
            body["a_values"] = args.a
        if args.target is not None:
            body["target"] = args.target
        doc = await client.call("POST", "/weave/sweep", body=body)
        emit(render_csv(doc["columns"], doc["rows"], args.argv_line), args.output)
        return EXIT_OK
    raise CliFailure(EXIT_USAGE, f"unknown weave subcommand {sub!r}")


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainforge",
        description="Exact analysis of control strategies for probabilistic chain assembly.",
    )
    parser.add_argument(
        "--version", action="version", version=f"chainforge {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--server",
        metavar="URL",
        default=None,
        help="talk to a running service at URL instead of computing in-process",
    )

    opt = sub.add_parser(
        "optimize",
        parents=[common],
        help="build a quality table and report the expected final length",
    )
    opt.add_argument("--pairs", "-n", "--n", type=positive_int, required=True,
                     help="number of fresh entangled pairs to start from")
    opt.add_argument("--gate", default="fusion",
                     help="gate preset name, or GAIN,LOSS for a custom gate")
    opt.add_argument("--p", type=probability_arg, default="1/2",
                     help="gate success probability (exact rational, e.g. 1/2)")
    opt.add_argument("--mode", choices=("best", "worst"), default="best")
    opt.add_argument("--halt", action="store_true",
                     help="allow stopping early and keeping the longest chain")
    opt.add_argument("--reachable-only", action="store_true",
                     help="key only configurations reachable from the initial one")
    opt.add_argument("--max-entries", type=positive_int, default=None,
                     help="override the table size guard for this run")
    opt.add_argument("--output", metavar="FILE", default=None,
                     help="also write the full table as JSON")

    pol = sub.add_parser(
        "policy",
        parents=[common],
        help="look up the prescribed action for a configuration in a table file",
    )
    pol.add_argument("--table", metavar="FILE", required=True,
                     help="table JSON produced by optimize --output")
    pol.add_argument("--config", required=True,
                     help="configuration string, e.g. '5^1 2^2 1^3'")

    swp = sub.add_parser(
        "sweep",
        parents=[common],
        help="tabulate distribution statistics across pair counts and probabilities (CSV)",
    )
    swp.add_argument("--n-min", type=positive_int, required=True)
    swp.add_argument("--n-max", type=positive_int, required=True)
    swp.add_argument("--n-step", type=positive_int, default=1)
    swp.add_argument("--p", type=probability_arg, nargs="+", default=["1/2"],
                     help="one or more success probabilities")
    swp.add_argument("--gates", nargs="+", default=["fusion"],
                     help="gate presets or GAIN,LOSS customs")
    swp.add_argument("--modes", nargs="*", choices=("best", "worst"), default=None,
                     help="optimized series to include")
    swp.add_argument("--strategies", nargs="*",
                     choices=("modesty", "greed", "static"), default=None,
                     help="fixed strategy series to include")
    swp.add_argument("--halt", action="store_true",
                     help="allow halting in the best series")
    swp.add_argument("--max-entries", type=positive_int, default=None)
    swp.add_argument("--output", metavar="FILE", default=None,
                     help="write CSV here instead of stdout")

    sim = sub.add_parser(
        "simulate",
        parents=[common],
        help="final-length distribution for one configuration (Monte Carlo or exact)",
    )
    sim.add_argument("--config", required=True)
    sim.add_argument("--gate", default="fusion")
    sim.add_argument("--p", type=probability_arg, default="1/2")
    sim.add_argument("--strategy", choices=("modesty", "greed", "static"), default=None,
                     help="fixed strategy (default: modesty)")
    sim.add_argument("--mode", choices=("best", "worst"), default=None,
                     help="play the optimized policy instead of a fixed strategy")
    sim.add_argument("--halt", action="store_true")
    sim.add_argument("--samples", type=positive_int, default=DEFAULT_SAMPLES)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--exact", action="store_true",
                     help="compute the exact distribution instead of sampling")
    sim.add_argument("--max-vertices", type=positive_int, default=None,
                     help="override the exact-distribution size guard")

    weave = sub.add_parser("weave", help="resource estimates for weaving square sheets")
    weave_sub = weave.add_subparsers(dest="weave_command", required=True)

    wb = weave_sub.add_parser("bound", parents=[common],
                              help="closed-form lower bound on weaving success")
    wx = weave_sub.add_parser("exact", parents=[common],
                              help="exact weaving success probability")
    for wparser in (wb, wx):
        wparser.add_argument("--n", type=positive_int, required=True, help="sheet side")
        wparser.add_argument("--a", type=rational_arg, required=True,
                             help="edge budget coefficient (exact rational)")
        wparser.add_argument("--p", type=probability_arg, required=True)

    ws = weave_sub.add_parser("solve", parents=[common],
                              help="smallest budget coefficient meeting a target")
    ws.add_argument("--n", type=positive_int, required=True)
    ws.add_argument("--p", type=probability_arg, required=True)
    ws.add_argument("--target", type=probability_arg, required=True)
    ws.add_argument("--model", choices=("bound", "exact"), default="bound")
    ws.add_argument("--resolution", type=float, default=1e-6)

    wc = weave_sub.add_parser("cost", parents=[common],
                              help="expected edges consumed per lattice site")
    wc.add_argument("--p", type=probability_arg, required=True)

    wsw = weave_sub.add_parser("sweep", parents=[common],
                               help="grid of weaving success values (CSV)")
    wsw.add_argument("--n", type=positive_int, nargs="+", required=True)
    wsw.add_argument("--p", type=probability_arg, nargs="+", required=True)
    wsw.add_argument("--a", type=rational_arg, nargs="+", default=None)
    wsw.add_argument("--target", type=probability_arg, default=None)
    wsw.add_argument("--model", choices=("bound", "exact"), default="bound")
    wsw.add_argument("--output", metavar="FILE", default=None)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8712)

    return parser


HANDLERS = {
    "optimize": cmd_optimize,
    "policy": cmd_policy,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "weave": cmd_weave,
}


async def _with_client(args, handler) -> int:
    if args.server:
        http = httpx.AsyncClient(base_url=args.server, timeout=httpx.Timeout(None))
    else:
        from .service.app import create_app

        http = httpx.AsyncClient(
            transport=httpx.ASGITransport(app=create_app()),
            base_url="http://chainforge.local",
            timeout=httpx.Timeout(None),
        )
    async with http:
        return await handler(Client(http), args)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv_line = shlex.join(["chainforge", *argv])
    try:
        if args.command == "serve":
            return cmd_serve(args)
        return asyncio.run(_with_client(args, HANDLERS[args.command]))
    except CliFailure as failure:
        print(f"chainforge: {failure.message}", file=sys.stderr)
        return failure.code


def entrypoint():
    sys.exit(main())
