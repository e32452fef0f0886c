"""Command-line entry point: search, eval, record and cache subcommands."""

import argparse
import asyncio
import json
import os
import sys
from datetime import date
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, TextIO

from ..agents.orchestrator import RunReport
from ..config.settings import LLMMode, RunConfig, Settings, Toggles, load_config
from ..errors import ConfigError, PreconditionError, SchemaError, SparError
from ..evaluation.benchmark import load_benchmark
from ..evaluation.harness import format_table, run_eval, sweep
from ..models.paper import SourceKind
from ..models.query import UserQuery
from ..services.cache import DiskCache
from ..services.pipeline import build_pipeline
from ..utils.logging import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_RUN_ERROR = 1
EXIT_USAGE = 2


def _ablation(value: str) -> str:
    name, sep, state = value.partition("=")
    name, state = name.strip().lower(), state.strip().lower()
    if not sep or name not in Toggles.names() or state not in ("on", "off"):
        raise argparse.ArgumentTypeError(
            f"expected name=on|off with name in {', '.join(Toggles.names())}, got {value!r}"
        )
    return value


def _search_time(value: str) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {value!r}")


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--k", type=int, help="Paper Cache size K")
    parser.add_argument("--max-iterations", type=int, help="Maximum search iterations")
    parser.add_argument("--threshold", type=float, help="Relevance threshold in [0, 1]")
    parser.add_argument("--seed", type=int, help="Seed for query subset selection")
    parser.add_argument(
        "--ablate", action="append", type=_ablation, default=[], metavar="NAME=on|off",
        help="Switch a pipeline stage on or off (repeatable)",
    )
    parser.add_argument(
        "--source", action="append", default=[], metavar="NAME",
        help="Restrict searching to these sources (repeatable)",
    )
    parser.add_argument("--no-http-cache", action="store_true", help="Bypass the HTTP response cache")
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--replay", metavar="DIR", help="Answer LLM calls from the cassette in DIR only")
    mode.add_argument("--record", metavar="DIR", help="Call the LLM and record responses into DIR")
    mode.add_argument("--live", action="store_true", help="Call the LLM without a cassette (default)")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-file", help="Also log to this rotating file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spar",
        description="Agentic scholarly paper retrieval with query evolution and citation expansion",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    search = commands.add_parser("search", help="Retrieve and rank papers for one question")
    search.add_argument("--query", help="The research question")
    search.add_argument("--query-file", help="Read the question from this file")
    search.add_argument("--search-time", type=_search_time, help="Search date; later papers are excluded")
    search.add_argument("--out", default="spar_run.jsonl", help="Run artifact path")
    _add_run_options(search)

    evaluate = commands.add_parser("eval", help="Score the pipeline on a benchmark")
    evaluate.add_argument("--benchmark", required=True, help="Benchmark JSONL or JSON file")
    evaluate.add_argument("--sweep", nargs="?", const="toggles", choices=["toggles"], help="Run every toggle combination")
    evaluate.add_argument("--baseline", metavar="SOURCE", help="Single-source keyword baseline instead of the full pipeline")
    evaluate.add_argument("--out", default="spar_eval.json", help="Report path")
    _add_run_options(evaluate)

    record = commands.add_parser("record", help="Run live and record every LLM response")
    target = record.add_mutually_exclusive_group(required=True)
    target.add_argument("--query", help="The research question")
    target.add_argument("--benchmark", help="Record every question of a benchmark")
    record.add_argument("--cassette", required=True, metavar="DIR", help="Cassette directory")
    record.add_argument("--search-time", type=_search_time, help="Search date for --query")
    record.add_argument("--out", default="spar_run.jsonl", help="Run artifact path")
    _add_run_options(record)

    cache = commands.add_parser("cache", help="Inspect or clear the HTTP cache")
    cache.add_argument("action", choices=["info", "clear"])
    cache.add_argument("--cassettes", metavar="DIR", help="Also list cassette suites in DIR")
    cache.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return parser


def collect_flags(args: argparse.Namespace) -> Dict[str, Any]:
    """Command-line values as configuration keys; unset flags are left out."""
    flags: Dict[str, Any] = {
        "cache_target": args.k,
        "max_iterations": args.max_iterations,
        "threshold": args.threshold,
        "seed": args.seed,
    }
    if args.source:
        flags["sources"] = ",".join(args.source)
    if args.no_http_cache:
        flags["http_cache_enabled"] = False
    for item in args.ablate:
        name, _, state = item.partition("=")
        flags[f"ablate_{name.strip().lower()}"] = state.strip().lower()

    cassette = getattr(args, "cassette", None)
    if args.command == "record" or args.record:
        flags["llm_mode"] = LLMMode.RECORD.value
        flags["cassette_dir"] = cassette or args.record
    elif args.replay:
        flags["llm_mode"] = LLMMode.REPLAY.value
        flags["cassette_dir"] = args.replay
    elif args.live:
        flags["llm_mode"] = LLMMode.LIVE.value
    return {k: v for k, v in flags.items() if v is not None}


def format_ranked(report: RunReport) -> str:
    """One tab-separated line per paper: rank, title, year, venue, score, source, depth."""
    lines = []
    for rank, entry in enumerate(report.ranked, start=1):
        record = entry.record
        lines.append("\t".join([
            str(rank),
            record.title,
            str(record.year) if record.year else "-",
            record.venue or "-",
            f"{entry.score:.4f}",
            record.source.display_name,
            str(record.refchain_depth),
        ]))
    return "".join(line + "\n" for line in lines)


def _read_query(args: argparse.Namespace) -> Optional[str]:
    if getattr(args, "query", None):
        return args.query
    if getattr(args, "query_file", None):
        return Path(args.query_file).read_text(encoding="utf-8").strip()
    return None


async def _search(query: UserQuery, config: RunConfig, settings: Settings, out: str, stdout: TextIO) -> int:
    async with build_pipeline(config, settings) as pipeline:
        report = await pipeline.orchestrator.run(query)
    stdout.write(format_ranked(report))
    path = report.write_artifact(out)
    logger.info(f"Run artifact written to {path}")
    for warning in report.warnings:
        logger.warning(warning)
    return EXIT_OK


async def _eval(
    args: argparse.Namespace,
    config: RunConfig,
    settings: Settings,
    baseline: Optional[SourceKind],
    stdout: TextIO,
) -> int:
    cases = load_benchmark(args.benchmark)
    async with build_pipeline(config, settings) as pipeline:
        if args.sweep:
            reports = await sweep(pipeline.orchestrator, cases, config)
        else:
            reports = [await run_eval(pipeline.orchestrator, cases, config, baseline=baseline)]
    stdout.write(format_table(reports))
    document = [report.to_dict() for report in reports]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    logger.info(f"Evaluation report written to {out}")
    return EXIT_OK


async def _record_benchmark(args: argparse.Namespace, config: RunConfig, settings: Settings, stdout: TextIO) -> int:
    cases = load_benchmark(args.benchmark)
    async with build_pipeline(config, settings) as pipeline:
        report = await run_eval(pipeline.orchestrator, cases, config)
        recorded = pipeline.gateway.stats["recorded"]
    stdout.write(format_table([report]))
    stdout.write(f"Recorded {recorded} responses into {args.cassette}\n")
    return EXIT_OK


async def _cache(args: argparse.Namespace, settings: Settings, stdout: TextIO) -> int:
    cache = DiskCache(settings.http_cache_dir)
    if args.action == "clear":
        removed = await cache.clear()
        stdout.write(f"Removed {removed} cached responses from {cache.directory}\n")
    else:
        info = cache.info()
        stdout.write(f"directory\t{info['directory']}\nentries\t{info['entries']}\nbytes\t{info['bytes']}\n")
    if args.cassettes:
        for suite in sorted(Path(args.cassettes).glob("*.json")):
            try:
                entries = len(json.loads(suite.read_text(encoding="utf-8")))
            except (OSError, ValueError) as e:
                logger.warning(f"Unreadable cassette {suite}: {e}")
                continue
            stdout.write(f"cassette\t{suite.stem}\t{entries}\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, stdout: TextIO = sys.stdout, stderr: TextIO = sys.stderr) -> int:
    """Run the command line; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    settings = Settings.load_from_env()
    setup_logging(
        log_level=args.log_level or settings.log_level,
        log_file=getattr(args, "log_file", None) or settings.log_file,
        secrets=settings.secret_values(),
    )

    if args.command == "cache":
        return asyncio.run(_cache(args, settings, stdout))

    try:
        config = load_config(args.config, env=os.environ, flags=collect_flags(args))
        baseline = SourceKind.parse(args.baseline) if getattr(args, "baseline", None) else None
    except (ConfigError, ValueError) as e:
        stderr.write(f"spar: error: {e}\n")
        return EXIT_USAGE

    try:
        if args.command == "eval":
            return asyncio.run(_eval(args, config, settings, baseline, stdout))
        if args.command == "record" and args.benchmark:
            return asyncio.run(_record_benchmark(args, config, settings, stdout))

        text = _read_query(args)
        if not text:
            parser.print_usage(stderr)
            stderr.write("spar: error: a question is required (--query or --query-file)\n")
            return EXIT_USAGE
        query = UserQuery(text=text, search_time=args.search_time)
        return asyncio.run(_search(query, config, settings, args.out, stdout))
    except (FileNotFoundError, SchemaError, ConfigError, PreconditionError) as e:
        stderr.write(f"spar: error: {e}\n")
        return EXIT_USAGE
    except SparError as e:
        stderr.write(f"spar: {args.command} failed: {type(e).__name__}: {e}\n")
        return EXIT_RUN_ERROR


if __name__ == "__main__":
    sys.exit(main())
