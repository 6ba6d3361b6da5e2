#!/usr/bin/env python3
"""
Citation Network Analytics - Command Line Interface
===================================================

Wires ingest, graph construction, metrics and reports together.

Exit codes: 0 success, 1 unexpected failure, 2 invalid configuration or
parameter, 3 ingest failure, 4 inconsistent data, 5 no convergence,
6 undefined metric, 7 unusable graph cache.
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from loguru import logger
from pydantic import ValidationError

from src.analytics import (
    affiliate_rank_table,
    author_counts,
    author_profile,
    authorrank,
    authorrank_of_papers,
    build_flow_matrix,
    ccoin_papers,
    citation_coin,
    citation_coin_plus,
    gender_stats,
    generation_expansion,
    group_metric,
    group_time_series,
    grouping_scheme,
    h_index,
    journal_table,
    load_geo_denominators,
    metric_correlations,
    n_cit,
    n_icit_papers,
    paperrank,
    paperrank_of_authors,
    per_capita,
    top_referred,
    town_shares,
    trend_series,
)
from src.citegraph import (
    CitationGraph,
    build_graph,
    fingerprint,
    load_graph_cache,
    save_graph_cache,
)
from src.config import settings
from src.dataset import FixtureParams, gen_fixture, read_canonical, write_canonical
from src.errors import CitationMetricsError, ConfigurationError, GraphCacheError
from src.models import (
    Dataset,
    DateWindow,
    FilterReport,
    GroupKind,
    IngestOptions,
    MetricVector,
    OutputFormat,
    RunConfig,
)
from src.reports import ReportWriter, RunSummary, author_table, emit_summary, group_table, paper_table

PAPER_METRICS = ("ncit", "nicit", "paperrank", "arp", "ccoin")
AUTHOR_METRICS = ("npap", "nipap", "ncit", "nicit", "h", "prank", "arank", "ccoin", "ccoin-plus")

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


def setup_logging(level: Optional[str] = None) -> None:
    """Setup logging configuration."""
    level = (level or settings.LOG_LEVEL).upper()
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=level)
    if settings.LOG_TO_FILE:
        Path(settings.LOG_DIR).mkdir(parents=True, exist_ok=True)
        logger.add(
            Path(settings.LOG_DIR) / "citenet.log",
            rotation="1 day",
            retention="30 days",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
            level=level,
        )


# ---------------------------------------------------------------------------
# Argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", type=Path, help="canonical JSONL dataset")
    common.add_argument("--output", type=Path, help="result file (default: stdout)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.CSV.value)
    common.add_argument("--log-level", help="overrides LOG_LEVEL")

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--graph-cache", type=Path, help="binary graph cache, rebuilt when stale")
    graph.add_argument("--after", type=int, help="first year of the window")
    graph.add_argument("--before", type=int, help="last year of the window")
    graph.add_argument("--no-self-citations", action="store_true", help="drop citations between papers sharing an author")
    graph.add_argument("--published-only", action="store_true", help="keep only citations from published papers")
    graph.add_argument("--damping", type=float, help="PaperRank damping")
    graph.add_argument("--author-damping", type=float, help="AuthorRank damping")
    graph.add_argument("--tolerance", type=float)
    graph.add_argument("--max-iters", type=int)
    graph.add_argument("--threads", type=int)
    graph.add_argument("--top", type=int)

    parser = argparse.ArgumentParser(prog="citenet", description="Citation network analytics")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", parents=[common], help="validate and canonicalize a dataset")
    p.add_argument("--strict", action="store_true", help="fail on the first malformed record")

    p = sub.add_parser("rank-papers", parents=[common, graph], help="rank papers")
    p.add_argument("--metric", choices=PAPER_METRICS, default="nicit")
    p.add_argument("--reference-count", choices=("declared", "indexed"), default="declared")
    p.add_argument("--since", type=int, help="arp only: papers written in or after this year")
    p.add_argument("--max-authors", type=int, help="arp only: papers with fewer authors")
    p.add_argument("--generations", type=int, help="paperrank only: add the citations-of-citations resum")

    p = sub.add_parser("rank-authors", parents=[common, graph], help="rank authors")
    p.add_argument("--metric", choices=AUTHOR_METRICS, default="nicit")
    p.add_argument("--remove-self-flow", action="store_true", help="arank: zero the flow-matrix diagonal")
    p.add_argument("--antisymmetrize", action="store_true", help="arank: keep only net pair flows")

    p = sub.add_parser("author-report", parents=[common, graph], help="full profile of one author")
    p.add_argument("--author", type=int, required=True)

    p = sub.add_parser("rank-groups", parents=[common, graph], help="rank institutions, towns, countries ...")
    p.add_argument("--by", choices=[k.value for k in GroupKind], required=True)
    p.add_argument("--metric", choices=PAPER_METRICS, default="nicit")
    p.add_argument("--active-after", type=int, help="institution only: affiliate table of authors active since")
    p.add_argument("--radius-km", type=float, help="town clustering radius")
    p.add_argument("--geo-denominators", type=Path, help="CSV country,population,gdp_usd")

    p = sub.add_parser("timeseries", parents=[common, graph], help="yearly world percentages per group")
    p.add_argument("--by", choices=[k.value for k in GroupKind], required=True)
    p.add_argument("--metric", choices=PAPER_METRICS, default="nicit")
    p.add_argument("--category")
    p.add_argument("--radius-km", type=float)

    p = sub.add_parser("trends", parents=[common, graph], help="yearly dataset trends")
    p.add_argument("--category")

    p = sub.add_parser("correlations", parents=[common, graph], help="correlations between metrics")
    p.add_argument("--entity", choices=("papers", "authors"), default="papers")

    p = sub.add_parser("gen-fixture", parents=[common], help="write a synthetic dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-papers", type=int, default=1000)
    p.add_argument("--refs-mean", type=float)
    p.add_argument("--authors-mean", type=float)
    p.add_argument("--start-year", type=int)
    p.add_argument("--n-years", type=int)
    return parser


CORE_FIELDS = {
    "input": "input_path",
    "output": "output_path",
    "graph_cache": "graph_cache",
    "after": "after",
    "before": "before",
    "no_self_citations": "drop_self_citations",
    "published_only": "published_only",
    "damping": "damping",
    "author_damping": "author_damping",
    "tolerance": "tolerance",
    "max_iters": "max_iters",
    "format": "output_format",
    "threads": "threads",
    "seed": "seed",
    "top": "top",
}


def make_config(args: argparse.Namespace) -> RunConfig:
    """Validate parsed arguments, reporting every problem at once."""
    values = vars(args).copy()
    values.pop("log_level", None)
    fields = {"subcommand": values.pop("subcommand")}
    for arg, field in CORE_FIELDS.items():
        if arg in values:
            value = values.pop(arg)
            if value is not None:
                fields[field] = value
    fields.setdefault("tolerance", settings.RANK_TOLERANCE)
    fields.setdefault("max_iters", settings.RANK_MAX_ITERS)
    fields.setdefault("threads", settings.THREADS)

    problems: List[str] = []
    if fields["subcommand"] != "gen-fixture" and "input_path" not in fields:
        problems.append("--input: required")
    try:
        config = RunConfig(**fields, options=values)
    except ValidationError as e:
        for err in e.errors():
            where = ".".join(str(part) for part in err["loc"]) or "config"
            problems.append(f"{where}: {err['msg']}")
        config = None
    if problems:
        raise ConfigurationError(problems)
    return config


# ---------------------------------------------------------------------------
# Pipeline steps

def load_inputs(config: RunConfig, summary: RunSummary) -> Tuple[Dataset, CitationGraph]:
    """Ingest the dataset and build (or load) the filtered graph."""
    options = IngestOptions(
        lenient=not settings.INGEST_STRICT,
        min_year=settings.MIN_PAPER_YEAR,
        max_year=settings.max_paper_year,
    )
    d, ingest_report = read_canonical(config.input_path, options)
    summary.ingest = ingest_report

    edge_filter = config.edge_filter
    graph: Optional[CitationGraph] = None
    report: Optional[FilterReport] = None
    if config.graph_cache is not None:
        key = fingerprint(config.input_path, edge_filter)
        if config.graph_cache.exists():
            try:
                graph, report = load_graph_cache(config.graph_cache, key)
            except GraphCacheError as e:
                logger.warning(f"Rebuilding graph: {e}")
        if graph is None:
            graph, report = build_graph(d, edge_filter)
            save_graph_cache(graph, report, config.graph_cache, key)
    else:
        graph, report = build_graph(d, edge_filter)

    summary.filter = report
    summary.describe_graph(graph)
    return d, graph


def _damping(value: Optional[float], default: float) -> float:
    return value if value is not None else default


def _paperrank(g: CitationGraph, config: RunConfig, summary: RunSummary) -> MetricVector:
    result = paperrank(
        g,
        damping=_damping(config.damping, settings.PAPERRANK_DAMPING),
        tol=config.tolerance,
        max_iters=config.max_iters,
        threads=config.threads,
    )
    summary.iterations["paperrank"] = result.iterations
    summary.residuals["paperrank"] = result.residual
    return result.vector


def _authorrank(
    g: CitationGraph,
    config: RunConfig,
    summary: RunSummary,
    remove_self: bool = False,
    antisymmetrize: bool = False,
) -> MetricVector:
    flow = build_flow_matrix(g, remove_self=remove_self, antisymmetrize=antisymmetrize)
    result = authorrank(
        flow,
        damping=_damping(config.author_damping, settings.AUTHORRANK_DAMPING),
        tol=config.tolerance,
        max_iters=config.max_iters,
        threads=config.threads,
    )
    summary.iterations["authorrank"] = result.iterations
    summary.residuals["authorrank"] = result.residual
    return result.vector


def paper_metric(name: str, g: CitationGraph, config: RunConfig, summary: RunSummary) -> MetricVector:
    if name == "ncit":
        return n_cit(g)
    if name == "nicit":
        return n_icit_papers(g, config.options.get("reference_count") or "declared")
    if name == "paperrank":
        return _paperrank(g, config, summary)
    if name == "arp":
        return authorrank_of_papers(g, _authorrank(g, config, summary))
    if name == "ccoin":
        return ccoin_papers(g)
    raise ConfigurationError([f"--metric: unknown paper metric {name!r}"])


def author_metric(name: str, g: CitationGraph, config: RunConfig, summary: RunSummary) -> MetricVector:
    if name in ("npap", "nipap", "ncit", "nicit"):
        return getattr(author_counts(g), name)
    if name == "h":
        return h_index(g)
    if name == "prank":
        return paperrank_of_authors(_paperrank(g, config, summary), g)
    if name == "arank":
        return _authorrank(
            g,
            config,
            summary,
            remove_self=bool(config.options.get("remove_self_flow")),
            antisymmetrize=bool(config.options.get("antisymmetrize")),
        )
    if name == "ccoin":
        coin = citation_coin(g)
        summary.extra["closed_form_discrepancy"] = coin.params["closed_form_discrepancy"]
        return coin
    if name == "ccoin-plus":
        return citation_coin_plus(g)
    raise ConfigurationError([f"--metric: unknown author metric {name!r}"])


def _scheme(by: GroupKind, d: Dataset, g: CitationGraph, config: RunConfig):
    if by == GroupKind.TOWN:
        return town_shares(d, g.paper_ids, config.options.get("radius_km"))
    return grouping_scheme(by, d, g.paper_ids)


def _group_names(by: GroupKind, d: Dataset) -> Optional[Dict]:
    if by in (GroupKind.INSTITUTION, GroupKind.TOWN):
        return {i: r.name for i, r in d.institutions.items()}
    if by == GroupKind.JOURNAL:
        return d.journals
    return None


# ---------------------------------------------------------------------------
# Subcommands

def cmd_ingest(config: RunConfig, writer: ReportWriter, summary: RunSummary) -> None:
    options = IngestOptions(
        lenient=not (config.options.get("strict") or settings.INGEST_STRICT),
        min_year=settings.MIN_PAPER_YEAR,
        max_year=settings.max_paper_year,
    )
    d, report = read_canonical(config.input_path, options)
    summary.ingest = report
    if config.output_path is not None:
        write_canonical(d, config.output_path)
        summary.rows_written = d.n_papers


def cmd_rank_papers(config: RunConfig, writer: ReportWriter, summary: RunSummary) -> None:
    d, g = load_inputs(config, summary)
    opts = config.options
    metric = opts["metric"]
    if metric == "arp" and (opts.get("since") is not None or opts.get("max_authors") is not None):
        vector = top_referred(g, _authorrank(g, config, summary), opts.get("since"), opts.get("max_authors"))
    else:
        vector = paper_metric(metric, g, config, summary)

    vectors = {metric: vector}
    if metric == "paperrank" and opts.get("generations"):
        expansion = generation_expansion(g, _damping(config.damping, settings.PAPERRANK_DAMPING), opts["generations"])
        vectors["paperrank_expansion"] = expansion.resum()
    summary.rows_written = writer.write_frame(paper_table(d, g, vectors, config.top))


def cmd_rank_authors(config: RunConfig, writer: ReportWriter, summary: RunSummary) -> None:
    d, g = load_inputs(config, summary)
    metric = config.options["metric"]
    vector = author_metric(metric, g, config, summary)
    summary.rows_written = writer.write_frame(author_table(d, {metric: vector}, config.top))


def cmd_author_report(config: RunConfig, writer: ReportWriter, summary: RunSummary) -> None:
    d, g = load_inputs(config, summary)
    profile = author_profile(
        d,
        g,
        config.options["author"],
        paper_rank=_paperrank(g, config, summary),
        author_rank=_authorrank(g, config, summary),
        top=config.top or 5,
    )
    summary.rows_written = writer.write_json(profile)


def cmd_rank_groups(config: RunConfig, writer: ReportWriter, summary: RunSummary) -> None:
    d, g = load_inputs(config, summary)
    opts = config.options
    by = GroupKind(opts["by"])

    if by == GroupKind.GENDER:
        counts = author_counts(g)
        metrics = {"nicit": counts.nicit, "prank": paperrank_of_authors(_paperrank(g, config, summary), g)}
        stats = gender_stats(d, g, metrics)
        summary.extra["female_icit_pct"] = stats.female_icit_pct.to_dict()
        summary.rows_written = writer.write_frame(stats.shares, index=True)
        return

    if by == GroupKind.INSTITUTION and opts.get("active_after") is not None:
        counts = author_counts(g)
        metrics = {
            "nicit": counts.nicit,
            "prank": paperrank_of_authors(_paperrank(g, config, summary), g),
            "arank": _authorrank(g, config, summary),
            "ccoin": citation_coin(g),
        }
        window = DateWindow.from_years(opts["active_after"], config.before)
        table = affiliate_rank_table(d, metrics, window)
        summary.rows_written = writer.write_frame(table.head(config.top) if config.top else table, index=True)
        return

    if by == GroupKind.JOURNAL and opts["metric"] == "nicit":
        table = journal_table(d, g)
        summary.rows_written = writer.write_frame(table.head(config.top) if config.top else table, index=True)
        return

    scores = group_metric(_scheme(by, d, g, config), paper_metric(opts["metric"], g, config, summary))
    if by == GroupKind.COUNTRY and opts.get("geo_denominators") is not None:
        table = per_capita(scores, load_geo_denominators(opts["geo_denominators"]))
        table = table.sort_values("per_capita", ascending=False, kind="mergesort")
        summary.rows_written = writer.write_frame(table.head(config.top) if config.top else table, index=True)
        return
    table = group_table(scores, f"{by.value}_id", _group_names(by, d), config.top)
    summary.rows_written = writer.write_frame(table)


def cmd_timeseries(config: RunConfig, writer: ReportWriter, summary: RunSummary) -> None:
    d, g = load_inputs(config, summary)
    opts = config.options
    by = GroupKind(opts["by"])
    scheme = _scheme(by, d, g, config)
    series = group_time_series(scheme, paper_metric(opts["metric"], g, config, summary), g, d, opts.get("category"))
    summary.rows_written = writer.write_frame(series.frame, index=True)


def cmd_trends(config: RunConfig, writer: ReportWriter, summary: RunSummary) -> None:
    d, g = load_inputs(config, summary)
    trends = trend_series(d, g, config.options.get("category"))
    table = trends.per_year.join(trends.turnover, how="outer").fillna(0)
    table.index.name = "year"
    summary.rows_written = writer.write_frame(table, index=True)


def cmd_correlations(config: RunConfig, writer: ReportWriter, summary: RunSummary) -> None:
    d, g = load_inputs(config, summary)
    if config.options["entity"] == "papers":
        vectors = [paper_metric(m, g, config, summary) for m in ("ncit", "nicit", "paperrank", "arp")]
    else:
        vectors = [author_metric(m, g, config, summary) for m in ("npap", "nipap", "ncit", "nicit", "h", "prank", "arank", "ccoin")]
    result = metric_correlations(vectors)
    summary.extra["undefined"] = result.undefined
    table = pd.concat({"pearson": result.pearson, "spearman": result.spearman}, names=["method", "metric"])
    summary.rows_written = writer.write_frame(table, index=True)


def cmd_gen_fixture(config: RunConfig, writer: ReportWriter, summary: RunSummary) -> None:
    opts = config.options
    overrides = {
        key: opts[arg]
        for arg, key in (("refs_mean", "refs_mean"), ("authors_mean", "authors_mean"), ("start_year", "start_year"), ("n_years", "n_years"))
        if opts.get(arg) is not None
    }
    try:
        params = FixtureParams(**overrides)
        blob = gen_fixture(config.seed, opts["n_papers"], params)
    except ValidationError as e:
        raise ConfigurationError([f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors()]) from e

    if config.output_path is None:
        sys.stdout.buffer.write(blob)
        sys.stdout.buffer.flush()
    else:
        config.output_path.parent.mkdir(parents=True, exist_ok=True)
        config.output_path.write_bytes(blob)
    summary.rows_written = blob.count(b"\n")


COMMANDS: Dict[str, Callable[[RunConfig, ReportWriter, RunSummary], None]] = {
    "ingest": cmd_ingest,
    "rank-papers": cmd_rank_papers,
    "rank-authors": cmd_rank_authors,
    "author-report": cmd_author_report,
    "rank-groups": cmd_rank_groups,
    "timeseries": cmd_timeseries,
    "trends": cmd_trends,
    "correlations": cmd_correlations,
    "gen-fixture": cmd_gen_fixture,
}


def run(config: RunConfig) -> RunSummary:
    """Execute one subcommand and return its summary."""
    summary = RunSummary(
        subcommand=config.subcommand,
        output=str(config.output_path) if config.output_path else None,
    )
    writer = ReportWriter(config.output_path, config.output_format)
    logger.info(f"Running {config.subcommand}")
    COMMANDS[config.subcommand](config, writer, summary)
    return summary


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main execution function."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        config = make_config(args)
        summary = run(config)
    except ConfigurationError as e:
        for problem in e.problems:
            logger.error(f"Invalid configuration: {problem}")
        return e.exit_code
    except CitationMetricsError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return 1

    # results on stdout push the summary to stderr
    emit_summary(summary, sys.stdout if config.output_path is not None else sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
