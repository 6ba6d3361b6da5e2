"""
Binary cache of a built CitationGraph.

Layout (all integers little-endian)::

    8 bytes   magic b"CITEGRPH"
    uint32    format version
    uint32    metadata length L
    L bytes   UTF-8 JSON metadata (fingerprint, array sizes, filter report)
    arrays    in _ARRAYS order, raw little-endian, no padding

Reverse adjacency and topological order are recomputed on load.
"""

import hashlib
import json
import struct
from pathlib import Path
from typing import BinaryIO, Dict, Optional, Tuple

import numpy as np
from loguru import logger
from scipy import sparse

from src.errors import GraphCacheError
from src.models import EdgeFilter, FilterReport

from .citegraph import AuthorshipIndex, CitationGraph

MAGIC = b"CITEGRPH"
VERSION = 1

# name, dtype, length key in metadata
_ARRAYS = (
    ("paper_ids", "<i8", "n"),
    ("year", "<i4", "n"),
    ("month", "<i1", "n"),
    ("day", "<i1", "n"),
    ("declared_ref_count", "<i8", "n"),
    ("published", "u1", "n"),
    ("n_author_links", "<i4", "n"),
    ("forward_indptr", "<i8", "n+1"),
    ("forward_indices", "<i4", "edges"),
    ("author_ids", "<i8", "authors"),
    ("incidence_indptr", "<i8", "n+1"),
    ("incidence_indices", "<i4", "incidence"),
)


def fingerprint(source: Path, edge_filter: EdgeFilter) -> str:
    """Identity of a graph build: source file state plus filter."""
    stat = Path(source).stat()
    h = hashlib.sha256()
    h.update(str(Path(source).resolve()).encode())
    h.update(f"{stat.st_size}:{stat.st_mtime_ns}".encode())
    h.update(edge_filter.model_dump_json().encode())
    return h.hexdigest()


def _columns(g: CitationGraph) -> Dict[str, np.ndarray]:
    return {
        "paper_ids": g.paper_ids,
        "year": g.year,
        "month": g.month,
        "day": g.day,
        "declared_ref_count": g.declared_ref_count,
        "published": g.published,
        "n_author_links": g.authorship.n_author_links,
        "forward_indptr": g.forward.indptr,
        "forward_indices": g.forward.indices,
        "author_ids": g.authorship.author_ids,
        "incidence_indptr": g.authorship.incidence.indptr,
        "incidence_indices": g.authorship.incidence.indices,
    }


def save_graph_cache(g: CitationGraph, report: FilterReport, path: Path, key: str) -> None:
    """Write the graph and its filter report to `path`."""
    meta = {
        "fingerprint": key,
        "n": g.n_papers,
        "n+1": g.n_papers + 1,
        "edges": g.n_edges,
        "authors": g.authorship.n_authors,
        "incidence": int(g.authorship.incidence.nnz),
        "filter_report": report.model_dump(),
    }
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    columns = _columns(g)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<II", VERSION, len(blob)))
            f.write(blob)
            for name, dtype, _ in _ARRAYS:
                f.write(np.ascontiguousarray(columns[name], dtype=dtype).tobytes())
    except OSError as e:
        logger.error(f"Error writing graph cache {path}: {e}")
        raise
    logger.info(f"Cached citation graph to {path}")


def _read_array(f: BinaryIO, dtype: str, count: int) -> np.ndarray:
    width = np.dtype(dtype).itemsize
    raw = f.read(width * count)
    if len(raw) != width * count:
        raise GraphCacheError("truncated graph cache")
    return np.frombuffer(raw, dtype=dtype, count=count)


def load_graph_cache(path: Path, key: Optional[str] = None) -> Tuple[CitationGraph, FilterReport]:
    """Read a cached graph; raises GraphCacheError on any mismatch."""
    try:
        with open(path, "rb") as f:
            if f.read(len(MAGIC)) != MAGIC:
                raise GraphCacheError(f"{path} is not a graph cache")
            header = f.read(8)
            if len(header) != 8:
                raise GraphCacheError("truncated graph cache header")
            version, length = struct.unpack("<II", header)
            if version != VERSION:
                raise GraphCacheError(f"unsupported graph cache version {version}")
            meta = json.loads(f.read(length).decode("utf-8"))
            if key is not None and meta["fingerprint"] != key:
                raise GraphCacheError("graph cache is stale")
            arrays = {name: _read_array(f, dtype, int(meta[size])) for name, dtype, size in _ARRAYS}
    except (OSError, ValueError, KeyError) as e:
        raise GraphCacheError(f"unreadable graph cache {path}: {e}") from e

    n = int(meta["n"])
    forward = sparse.csr_matrix(
        (np.ones(int(meta["edges"])), arrays["forward_indices"].astype(np.int64), arrays["forward_indptr"].astype(np.int64)),
        shape=(n, n),
    )
    incidence = sparse.csr_matrix(
        (np.ones(int(meta["incidence"])), arrays["incidence_indices"].astype(np.int64), arrays["incidence_indptr"].astype(np.int64)),
        shape=(n, int(meta["authors"])),
    )
    graph = CitationGraph(
        paper_ids=arrays["paper_ids"].astype(np.int64),
        year=arrays["year"].astype(np.int64),
        month=arrays["month"].astype(np.int64),
        day=arrays["day"].astype(np.int64),
        declared_ref_count=arrays["declared_ref_count"].astype(np.int64),
        published=arrays["published"].astype(bool),
        forward=forward,
        authorship=AuthorshipIndex(
            author_ids=arrays["author_ids"].astype(np.int64),
            incidence=incidence,
            n_author_links=arrays["n_author_links"].astype(np.int64),
        ),
    )
    logger.info(f"Loaded cached citation graph from {path}: {graph.n_papers} papers, {graph.n_edges} edges")
    return graph, FilterReport.model_validate(meta["filter_report"])
