import json
import sys
from pathlib import Path
from typing import IO, Any, Dict, Mapping, Optional

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field

from src.citegraph import CitationGraph
from src.models import Dataset, FilterReport, IngestReport, MetricVector, OutputFormat


class RunSummary(BaseModel):
    """Machine-readable account of one CLI run."""

    subcommand: str
    rows_written: int = 0
    output: Optional[str] = None
    n_papers: Optional[int] = None
    n_edges: Optional[int] = None
    n_authors: Optional[int] = None
    iterations: Dict[str, int] = Field(default_factory=dict)
    residuals: Dict[str, float] = Field(default_factory=dict)
    ingest: Optional[IngestReport] = None
    filter: Optional[FilterReport] = None
    extra: Dict[str, Any] = Field(default_factory=dict)

    def describe_graph(self, g: CitationGraph) -> None:
        self.n_papers = g.n_papers
        self.n_edges = g.n_edges
        self.n_authors = g.authorship.n_authors


def _ranked_order(scores: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """Descending score, ties by ascending id."""
    return np.lexsort((ids, -scores))


def paper_table(
    d: Dataset,
    g: CitationGraph,
    vectors: Mapping[str, MetricVector],
    top: Optional[int] = None,
) -> pd.DataFrame:
    """paper_id, title, date, n_authors and one column per score, ranked by the first score."""
    first = next(iter(vectors.values()))
    ids = first.ids
    order = _ranked_order(first.values, ids)[:top]
    ids = ids[order]
    table = pd.DataFrame({
        "paper_id": ids,
        "title": [d.papers[pid].title for pid in ids.tolist()],
        "date": [str(d.papers[pid].date) for pid in ids.tolist()],
        "n_authors": g.authorship.n_author_links[g.index_of(ids)],
    })
    for name, vector in vectors.items():
        table[name] = vector.reindex(ids)
    return table


def author_table(d: Dataset, vectors: Mapping[str, MetricVector], top: Optional[int] = None) -> pd.DataFrame:
    first = next(iter(vectors.values()))
    order = _ranked_order(first.values, first.ids)[:top]
    ids = first.ids[order]
    table = pd.DataFrame({
        "author_id": ids,
        "display_name": [d.authors[a].display_name if a in d.authors else "" for a in ids.tolist()],
    })
    for name, vector in vectors.items():
        table[name] = vector.reindex(ids)
    return table


def group_table(vector: MetricVector, label: str, names: Optional[Mapping] = None, top: Optional[int] = None) -> pd.DataFrame:
    order = _ranked_order(vector.values, np.arange(vector.ids.size))[:top]
    ids = vector.ids[order]
    table = pd.DataFrame({label: ids, "score": vector.values[order]})
    total = vector.total()
    table["percent"] = 100.0 * table["score"] / total if total else 0.0
    if names is not None:
        table.insert(1, "name", [names.get(i, "") for i in ids.tolist()])
    return table


class ReportWriter:
    """Writes result tables as CSV or JSONL, plus the run summary."""

    def __init__(self, output_path: Optional[Path] = None, fmt: OutputFormat = OutputFormat.CSV):
        self.output_path = Path(output_path) if output_path is not None else None
        self.fmt = OutputFormat(fmt)

    def _sink(self) -> IO[str]:
        if self.output_path is None:
            return sys.stdout
        self.output_path.parent.mkdir(parents=True, exist_ok=True)
        return open(self.output_path, "w", encoding="utf-8", newline="")

    def write_frame(self, frame: pd.DataFrame, index: bool = False) -> int:
        """Write one table; returns the number of rows."""
        if index:
            frame = frame.reset_index()
        sink = self._sink()
        try:
            if self.fmt == OutputFormat.CSV:
                frame.to_csv(sink, index=False, float_format="%.12g")
            else:
                for record in frame.to_dict(orient="records"):
                    sink.write(json.dumps(_plain(record), sort_keys=False) + "\n")
        except OSError as e:
            logger.error(f"Error writing results to {self.output_path}: {e}")
            raise
        finally:
            if sink is not sys.stdout:
                sink.close()
        logger.info(f"Wrote {len(frame)} rows to {self.output_path or 'stdout'}")
        return len(frame)

    def write_json(self, payload: Mapping[str, Any]) -> int:
        sink = self._sink()
        try:
            json.dump(_plain(payload), sink, indent=2)
            sink.write("\n")
        finally:
            if sink is not sys.stdout:
                sink.close()
        return 1


def _plain(value: Any) -> Any:
    """numpy and pandas scalars to JSON-friendly Python values."""
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def emit_summary(summary: RunSummary, stream: Optional[IO[str]] = None) -> None:
    """Print the summary as a single JSON line."""
    stream = stream or sys.stdout
    stream.write(summary.model_dump_json(exclude_none=True) + "\n")
    stream.flush()
