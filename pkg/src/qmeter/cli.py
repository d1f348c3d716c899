"""``qmeter`` command line: run scenarios, verify suites, search, describe models.

Exit codes: 0 all checks pass, 1 an asserted check failed, 2 invalid input,
3 internal error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, parse_config
from .models import FAMILIES
from .report import FORMATS, Report, emit_report
from .runner import ScenarioError, run_scenario
from .suites import SUITES

__all__ = ["ScenarioConfig", "Report", "parse_config", "run_scenario", "emit_report", "main"]

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qmeter", description="Finite-dimensional quantum measurement scenarios.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path)
    run.add_argument("--format", choices=FORMATS)

    ver = sub.add_parser("verify", help="run a randomized theorem suite")
    ver.add_argument("--suite", required=True, choices=sorted(SUITES))
    ver.add_argument("--trials", type=int)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", type=Path)
    ver.add_argument("--format", choices=FORMATS, default="json")

    se = sub.add_parser("search", help="search for instruments beating the SQL bound")
    se.add_argument("--config", required=True, type=Path)
    se.add_argument("--budget", type=int)
    se.add_argument("--seed", type=int)
    se.add_argument("--out", type=Path)
    se.add_argument("--format", choices=FORMATS, default="json")

    de = sub.add_parser("describe", help="describe a model family")
    de.add_argument("--model", required=True)
    return p


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from exc


def _search_config(raw: bytes, budget, seed):
    cfg = parse_config(raw)
    if cfg.kind not in ("search", "sql"):
        raise ConfigError("kind", "search needs a 'search' or 'sql' scenario")
    data = {k: v for k, v in cfg.data.items() if k not in ("model", "kind")}
    data["kind"] = "search"
    opts = dict(data.get("search", {}))
    if budget is not None:
        opts["budget"] = budget
    if opts:
        data["search"] = opts
    if seed is not None:
        data["seed"] = seed
    return parse_config(data)


def describe(name: str) -> str:
    if name not in FAMILIES:
        raise ConfigError("model", f"unknown model {name!r}; choose from {', '.join(sorted(FAMILIES))}")
    info = FAMILIES[name]
    lines = [name, "", info["doc"], "", "parameters: " + (", ".join(info["params"]) or "none")]
    return "\n".join(lines) + "\n"


def _write(data: bytes, out: Path | None):
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        out.write_bytes(data)


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        if args.command == "describe":
            sys.stdout.write(describe(args.model))
            return EXIT_OK
        if args.command == "run":
            cfg = parse_config(_read(args.config))
            fmt = args.format or cfg.output_format
        elif args.command == "verify":
            if args.trials is not None and args.trials < 1:
                raise ConfigError("trials", "must be at least 1")
            data = {"kind": "suite", "suite": args.suite, "seed": args.seed}
            if args.trials is not None:
                data["trials"] = args.trials
            cfg = parse_config(data)
            fmt = args.format
        else:
            cfg = _search_config(_read(args.config), args.budget, args.seed)
            fmt = args.format
        report = run_scenario(cfg)
        _write(emit_report(report, fmt), args.out)
        return EXIT_OK if report.passed else EXIT_CHECK
    except (UsageError, ConfigError, ScenarioError) as exc:
        print(f"qmeter: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"qmeter: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
