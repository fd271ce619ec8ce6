"""CLI Entry Point - csp-refuter subcommands.

Results go to stdout (JSON, or CSV for bench-norms); diagnostics go to stderr.

Exit codes: 0 ok, 1 usage, 2 heuristic certificate, 3 resource limit,
4 I/O, 5 verification failed.
"""

import argparse
import asyncio
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.io import dumps
from csp_refuter.dispatch import (
    ALL_TOOL_DEFINITIONS,
    IO,
    RESOURCE,
    configure_tools,
    execute_tool,
)
from csp_refuter.errors import InvalidParameters
from csp_refuter.spectral.bench import CSV_COLUMNS

logger = logging.getLogger("csp_refuter.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_HEURISTIC = 2
EXIT_RESOURCE = 3
EXIT_IO = 4
EXIT_VERIFY_FAILED = 5

CATEGORY_EXIT = {RESOURCE: EXIT_RESOURCE, IO: EXIT_IO}

CAP_FLAGS = {
    "dense_cap": "--dense-cap",
    "cap_states": "--cap-states",
    "net_cap": "--net-cap",
    "threads": "--threads",
}


@dataclass
class RunConfig:
    """Validated command line: subcommand, input/output paths and config overrides."""

    subcommand: str
    arguments: dict[str, Any] = field(default_factory=dict)
    inputs: list = field(default_factory=list)
    output: Optional[str] = None
    overrides: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        for name, value in self.overrides.items():
            if name in CAP_FLAGS and value <= 0:
                raise InvalidParameters(f"{CAP_FLAGS[name]} must be positive, got {value}")
        for path in self.inputs:
            if not Path(path).is_file():
                raise FileNotFoundError(f"No such file: {path}")
        if self.output and not Path(self.output).resolve().parent.is_dir():
            raise FileNotFoundError(f"Output directory does not exist: {Path(self.output).parent}")

    def settings(self, base: RefuterConfig) -> RefuterConfig:
        return base.model_copy(update=self.overrides) if self.overrides else base


def _lp_mode(args: argparse.Namespace) -> Optional[bool]:
    return getattr(args, "exact", None)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (default: CPU count)")
    parser.add_argument("--dense-cap", type=int, default=None, help="Largest matrix dimension solved densely")
    parser.add_argument("--cap-states", type=int, default=None, help="Largest q^n searched exhaustively")
    parser.add_argument("--net-cap", type=int, default=None, help="Largest number of marginal points")
    parser.add_argument("--log-level", default=None, help="Log level on stderr (default: REFUTER_LOG_LEVEL)")


def _add_lp_mode(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--exact", dest="exact", action="store_true", default=None, help="Exact rational LPs")
    group.add_argument("--float", dest="exact", action="store_false", help="Floating-point LPs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csp-refuter",
        description="Random k-CSP instances, opt_t and spectral refutation certificates.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("gen", help="Sample a random instance")
    gen.add_argument("--family", required=True, help="Preset name (neq, eq, nae3, ...) or family JSON path")
    gen.add_argument("--n", type=int, required=True, help="Number of variables")
    gen.add_argument("--m", type=float, required=True, help="Expected number of constraints")
    gen.add_argument("--seed", type=int, default=0, help="Random seed (default: %(default)s)")
    gen.add_argument("-o", "--output", default=None, help="Instance JSON path (default: stdout)")
    _add_common(gen)

    ref = sub.add_parser("refute", help="Certify an upper bound on an instance's value")
    ref.add_argument("instance", help="Instance JSON path")
    ref.add_argument("--t", type=int, default=2, help="Independence order (default: %(default)s)")
    ref.add_argument("--ell", type=int, default=None, help="Kikuchi level (default: smallest legal)")
    ref.add_argument("--epsilon", type=float, default=0.2, help="Error budget (default: %(default)s)")
    ref.add_argument("--mode", choices=["indicator", "monomial"], default="indicator", help="Polynomial basis")
    norms = ref.add_mutually_exclusive_group()
    norms.add_argument("--exact-norms", dest="norm_mode", action="store_const", const="exact",
                       help="Dense eigensolves only; fail above the dense cap")
    norms.add_argument("--norm-mode", dest="norm_mode", choices=["exact", "estimate"], default=None,
                       help="Spectral norm mode (default: by dense cap)")
    ref.add_argument("--net-step", type=float, default=None, help="Force a marginal grid with this step")
    ref.add_argument("--no-combine", dest="combine", action="store_false",
                     help="Certify each assignment separately only")
    ref.add_argument("--seed", type=int, default=0, help="Power-iteration seed (default: %(default)s)")
    ref.add_argument("-o", "--output", default=None, help="Certificate JSON path (default: stdout)")
    _add_lp_mode(ref)
    _add_common(ref)

    opt = sub.add_parser("opt-t", help="Compute opt_t of a relation family")
    opt.add_argument("--family", required=True, help="Preset name or family JSON path")
    opt.add_argument("--t", type=int, default=2, help="Independence order (default: %(default)s)")
    opt.add_argument("--epsilon", type=float, default=0.1, help="Target accuracy (default: %(default)s)")
    opt.add_argument("--net-step", type=float, default=None, help="Fixed marginal grid step")
    _add_lp_mode(opt)
    _add_common(opt)

    tw = sub.add_parser("check-twise", help="Tri-state t-wise independence test")
    tw.add_argument("--family", required=True, help="Preset name or family JSON path")
    tw.add_argument("--t", type=int, default=2, help="Independence order (default: %(default)s)")
    tw.add_argument("--tol", type=float, default=1e-9, help="Minimum separator margin (default: %(default)s)")
    tw.add_argument("--net-step", type=float, default=0.1, help="Marginal grid step (default: %(default)s)")
    _add_lp_mode(tw)
    _add_common(tw)

    bench = sub.add_parser("bench-norms", help="Kikuchi norm-scaling sweep (CSV)")
    bench.add_argument("--n", type=int, required=True, help="Number of variables")
    bench.add_argument("--m", type=float, nargs="+", required=True, help="Expected constraint counts")
    bench.add_argument("--ell", type=int, default=1, help="Kikuchi level (default: %(default)s)")
    bench.add_argument("--s-size", type=int, default=2, help="Size of S (default: %(default)s)")
    bench.add_argument("--seeds", type=int, default=10, help="Seeds per point (default: %(default)s)")
    bench.add_argument("-o", "--output", default=None, help="CSV path (default: stdout)")
    _add_common(bench)

    ver = sub.add_parser("verify", help="Run the oracle suite against a certificate")
    ver.add_argument("certificate", help="Certificate JSON path")
    ver.add_argument("--instance", required=True, help="Instance JSON path")
    ver.add_argument("-o", "--output", default=None, help="Report JSON path (default: stdout)")
    _add_common(ver)

    tools = sub.add_parser("tools", help="List or call registered tools")
    tools.add_argument("tool", nargs="?", default=None, help="Tool name; lists tools when omitted")
    tools.add_argument("--args", dest="tool_args", default="{}", help="JSON object of tool arguments")
    _add_common(tools)
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    """Translate parsed flags into a tool call."""
    overrides = {name: getattr(args, name) for name in CAP_FLAGS if getattr(args, name, None) is not None}
    if args.log_level:
        overrides["log_level"] = args.log_level.upper()
    cmd = args.subcommand
    output = getattr(args, "output", None)

    if cmd == "gen":
        arguments = {"family": args.family, "n": args.n, "m": args.m, "seed": args.seed, "output": output}
        inputs = [args.family] if args.family.endswith(".json") else []
        return RunConfig(cmd, arguments, inputs, output, overrides)
    if cmd == "refute":
        arguments = {
            "instance": args.instance, "t": args.t, "epsilon": args.epsilon, "ell": args.ell,
            "mode": args.mode, "norm_mode": args.norm_mode, "net_step": args.net_step,
            "exact": _lp_mode(args), "seed": args.seed, "combine": args.combine, "output": output,
        }
        return RunConfig(cmd, arguments, [args.instance], output, overrides)
    if cmd == "opt-t":
        arguments = {"family": args.family, "t": args.t, "epsilon": args.epsilon,
                     "exact": _lp_mode(args), "net_step": args.net_step}
        inputs = [args.family] if args.family.endswith(".json") else []
        return RunConfig(cmd, arguments, inputs, None, overrides)
    if cmd == "check-twise":
        arguments = {"family": args.family, "t": args.t, "tol": args.tol,
                     "net_step": args.net_step, "exact": _lp_mode(args)}
        inputs = [args.family] if args.family.endswith(".json") else []
        return RunConfig(cmd, arguments, inputs, None, overrides)
    if cmd == "bench-norms":
        arguments = {"n": args.n, "m_values": args.m, "ell": args.ell, "s_size": args.s_size, "seeds": args.seeds}
        return RunConfig(cmd, arguments, [], output, overrides)
    if cmd == "verify":
        arguments = {"certificate": args.certificate, "instance": args.instance, "output": output}
        return RunConfig(cmd, arguments, [args.certificate, args.instance], output, overrides)
    try:
        tool_args = json.loads(args.tool_args)
    except json.JSONDecodeError as e:
        raise InvalidParameters(f"--args is not valid JSON: {e}")
    if not isinstance(tool_args, dict):
        raise InvalidParameters("--args must be a JSON object")
    return RunConfig(cmd, {"tool": args.tool, "arguments": tool_args}, [], None, overrides)


TOOL_FOR = {
    "gen": "generate_instance",
    "refute": "refute_instance",
    "opt-t": "compute_opt_t",
    "check-twise": "check_twise",
    "bench-norms": "bench_norms",
    "verify": "verify_certificate_file",
}


def _emit(data: Any) -> None:
    sys.stdout.write(json.dumps(data, indent=2) + "\n")


def _emit_csv(rows: list[dict], output: Optional[str]) -> None:
    if output:
        with Path(output).open("w", encoding="utf-8", newline="") as stream:
            _write_rows(rows, stream)
    else:
        _write_rows(rows, sys.stdout)


def _write_rows(rows: list[dict], stream) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def _failure(result: dict[str, Any]) -> int:
    logger.error("%s: %s", result.get("error_type", "error"), result.get("error"))
    return CATEGORY_EXIT.get(result.get("category"), EXIT_USAGE)


async def run(run_cfg: RunConfig) -> int:
    """Execute one validated subcommand and write its result to stdout."""
    cmd = run_cfg.subcommand
    if cmd == "tools":
        if run_cfg.arguments["tool"] is None:
            _emit([{"name": d["name"], "description": d["description"]} for d in ALL_TOOL_DEFINITIONS])
            return EXIT_OK
        result = await execute_tool(run_cfg.arguments["tool"], run_cfg.arguments["arguments"])
        if result.get("status") != "success":
            return _failure(result)
        _emit(result["data"])
        return EXIT_OK

    result = await execute_tool(TOOL_FOR[cmd], run_cfg.arguments)
    if result.get("status") != "success":
        return _failure(result)
    data = result["data"]

    if cmd == "gen":
        if run_cfg.output:
            logger.info("wrote %d constraints to %s", data["m"], run_cfg.output)
        else:
            sys.stdout.write(dumps(data["instance"]))
        return EXIT_OK
    if cmd == "refute":
        if run_cfg.output:
            _emit({key: value for key, value in data.items() if key != "certificate"})
        else:
            sys.stdout.write(dumps(data["certificate"]))
        if data["heuristic"]:
            logger.warning("certificate relies on estimated norms; soundness is heuristic")
            return EXIT_HEURISTIC
        return EXIT_OK
    if cmd == "bench-norms":
        _emit_csv(data["rows"], run_cfg.output)
        logger.info("median-ratio spread %s", data["ratio_spread"])
        return EXIT_OK
    if cmd == "verify":
        if not run_cfg.output:
            _emit(data)
        return EXIT_OK if data["passed"] else EXIT_VERIFY_FAILED
    _emit(data)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point for CLI."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("csp_refuter")
    root.handlers[:] = [handler]

    try:
        run_cfg = run_config(args)
        cfg = run_cfg.settings(config)
        root.setLevel(cfg.log_level.upper())
        run_cfg.validate()
    except ValueError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except OSError as e:
        logger.error("%s", e)
        return EXIT_IO

    configure_tools(cfg)
    try:
        return asyncio.run(run(run_cfg))
    except KeyboardInterrupt:
        return EXIT_USAGE
    finally:
        configure_tools(None)


if __name__ == "__main__":
    sys.exit(main())
