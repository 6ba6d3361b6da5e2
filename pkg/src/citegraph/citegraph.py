"""
Sparse citation graph with time ordering.

Node ``i`` of a graph is the paper ``paper_ids[i]``; ids are sorted ascending.
``forward`` has one row per citing paper and one column per cited paper,
``reverse`` is its transpose.
"""

from dataclasses import dataclass, field
from itertools import chain
from typing import List, Tuple

import numpy as np
from loguru import logger
from scipy import sparse

from src.models import Dataset, EdgeFilter, FilterReport, PaperRecord


@dataclass(frozen=True, eq=False)
class AuthorshipIndex:
    """Paper × author incidence over resolvable author ids."""

    author_ids: np.ndarray
    incidence: sparse.csr_matrix
    n_author_links: np.ndarray

    @property
    def n_authors(self) -> int:
        return int(self.author_ids.size)

    @property
    def authors_per_paper(self) -> np.ndarray:
        """N_p^aut: number of distinct resolvable authors of each paper."""
        return np.diff(self.incidence.indptr)

    def author_index(self, author_id: int) -> int:
        pos = int(np.searchsorted(self.author_ids, author_id))
        if pos >= self.author_ids.size or self.author_ids[pos] != author_id:
            raise KeyError(f"author {author_id} has no paper in this graph")
        return pos

    def papers_of(self, author_id: int) -> np.ndarray:
        """Node indices of the author's papers."""
        column = self.incidence[:, self.author_index(author_id)]
        return column.nonzero()[0]


@dataclass(frozen=True, eq=False)
class CitationGraph:
    paper_ids: np.ndarray
    year: np.ndarray
    month: np.ndarray
    day: np.ndarray
    declared_ref_count: np.ndarray
    published: np.ndarray
    forward: sparse.csr_matrix
    authorship: AuthorshipIndex
    reverse: sparse.csr_matrix = field(init=False)
    topo_order: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        # frozen dataclass: derived arrays are set through object.__setattr__
        object.__setattr__(self, "reverse", self.forward.T.tocsr())
        object.__setattr__(self, "topo_order", np.lexsort((self.paper_ids, self.year)))

    @property
    def n_papers(self) -> int:
        return int(self.paper_ids.size)

    @property
    def n_edges(self) -> int:
        return int(self.forward.nnz)

    @property
    def indexed_ref_count(self) -> np.ndarray:
        return np.diff(self.forward.indptr)

    @property
    def in_degree(self) -> np.ndarray:
        return np.diff(self.reverse.indptr)

    def index_of(self, paper_ids: np.ndarray) -> np.ndarray:
        """Node indices of the given paper ids."""
        ids = np.asarray(paper_ids, dtype=np.int64)
        pos = np.searchsorted(self.paper_ids, ids)
        ok = pos < self.paper_ids.size
        ok[ok] = self.paper_ids[pos[ok]] == ids[ok]
        if not ok.all():
            raise KeyError(f"papers not in graph: {ids[~ok][:5].tolist()}")
        return pos

    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """(citing, cited) paper id arrays."""
        coo = self.forward.tocoo()
        return self.paper_ids[coo.row], self.paper_ids[coo.col]


@dataclass(frozen=True, eq=False)
class PruningLayers:
    """Result of iterative leaf peeling."""

    layers: List[np.ndarray]
    residual: np.ndarray

    @property
    def depth(self) -> int:
        return len(self.layers)


def _incidence(papers: List[PaperRecord]) -> Tuple[np.ndarray, sparse.csr_matrix, np.ndarray]:
    per_paper = [p.resolved_author_ids for p in papers]
    lengths = np.fromiter((len(a) for a in per_paper), dtype=np.int64, count=len(papers))
    flat = np.fromiter(chain.from_iterable(per_paper), dtype=np.int64, count=int(lengths.sum()))
    author_ids, columns = np.unique(flat, return_inverse=True)
    indptr = np.concatenate(([0], np.cumsum(lengths)))
    incidence = sparse.csr_matrix(
        (np.ones(flat.size), columns.astype(np.int64), indptr),
        shape=(len(papers), author_ids.size),
    )
    incidence.sort_indices()
    n_links = np.fromiter((len(p.authors) for p in papers), dtype=np.int64, count=len(papers))
    return author_ids, incidence, n_links


def _shares_author(incidence: sparse.csr_matrix, citing: np.ndarray, cited: np.ndarray) -> np.ndarray:
    if citing.size == 0 or incidence.shape[1] == 0:
        return np.zeros(citing.size, dtype=bool)
    overlap = incidence[citing].multiply(incidence[cited])
    return np.asarray(overlap.sum(axis=1)).ravel() > 0


def build_graph(d: Dataset, f: EdgeFilter = EdgeFilter()) -> Tuple[CitationGraph, FilterReport]:
    """Build the filtered, time-ordered citation graph of a dataset."""
    papers = d.sorted_papers()
    n_all = len(papers)
    all_ids = np.fromiter((p.paper_id for p in papers), dtype=np.int64, count=n_all)
    year = np.fromiter((p.date.year for p in papers), dtype=np.int64, count=n_all)

    ref_counts = np.fromiter((len(p.references) for p in papers), dtype=np.int64, count=n_all)
    citing = np.repeat(np.arange(n_all, dtype=np.int64), ref_counts)
    cited_ids = np.fromiter(
        chain.from_iterable(p.references for p in papers), dtype=np.int64, count=int(ref_counts.sum())
    )
    cited = np.searchsorted(all_ids, cited_ids)
    resolvable = cited < n_all
    resolvable[resolvable] = all_ids[cited[resolvable]] == cited_ids[resolvable]
    if not resolvable.all():
        logger.warning(f"Ignoring {int((~resolvable).sum())} references to papers outside the dataset")
        citing, cited = citing[resolvable], cited[resolvable]

    report = FilterReport(raw_edges=int(citing.size))

    if f.window is not None:
        inside = np.fromiter((f.window.overlaps(p.date) for p in papers), dtype=bool, count=n_all)
    else:
        inside = np.ones(n_all, dtype=bool)
    report.papers_excluded = int(n_all - inside.sum())

    keep = inside[citing] & inside[cited]
    report.window_excluded = int((~keep).sum())

    acausal = keep & (year[citing] < year[cited])
    report.acausal = int(acausal.sum())
    keep &= ~acausal

    author_ids, incidence, n_links = _incidence(papers)
    if f.drop_self_citations:
        candidates = np.flatnonzero(keep)
        selfcite = _shares_author(incidence, citing[candidates], cited[candidates])
        report.self_citations = int(selfcite.sum())
        keep[candidates[selfcite]] = False

    if f.published_only:
        published = np.fromiter((p.published for p in papers), dtype=bool, count=n_all)
        unpublished = keep & ~published[citing]
        report.unpublished_citers = int(unpublished.sum())
        keep &= ~unpublished

    report.kept_edges = int(keep.sum())

    # compact node numbering to the papers inside the window
    nodes = np.flatnonzero(inside)
    renumber = np.cumsum(inside) - 1
    n = nodes.size
    forward = sparse.csr_matrix(
        (np.ones(report.kept_edges), (renumber[citing[keep]], renumber[cited[keep]])),
        shape=(n, n),
    )
    forward.sum_duplicates()

    sub_incidence = incidence[nodes]
    used = np.flatnonzero(np.diff(sub_incidence.tocsc().indptr) > 0)
    kept_papers = [papers[i] for i in nodes]
    graph = CitationGraph(
        paper_ids=all_ids[nodes],
        year=year[nodes],
        month=np.fromiter((p.date.month or 0 for p in kept_papers), dtype=np.int64, count=n),
        day=np.fromiter((p.date.day or 0 for p in kept_papers), dtype=np.int64, count=n),
        declared_ref_count=np.fromiter((p.declared_ref_count for p in kept_papers), dtype=np.int64, count=n),
        published=np.fromiter((p.published for p in kept_papers), dtype=bool, count=n),
        forward=forward,
        authorship=AuthorshipIndex(
            author_ids=author_ids[used],
            incidence=sub_incidence[:, used].tocsr(),
            n_author_links=n_links[nodes],
        ),
    )

    logger.info(
        f"Built citation graph: {graph.n_papers} papers, {graph.n_edges} edges, "
        f"{graph.authorship.n_authors} authors"
    )
    if report.acausal:
        logger.warning(f"Deleted {report.acausal} acausal references")
    return graph, report


def topological_order(g: CitationGraph) -> np.ndarray:
    """Paper ids sorted oldest to newest, ties by paper id."""
    return g.paper_ids[g.topo_order]


def prune_leaves(g: CitationGraph) -> PruningLayers:
    """Peel uncited papers layer by layer.

    Layer 0 holds papers nobody cites; layer k holds papers all of whose citers
    sit in earlier layers. Papers on same-year citation cycles never peel and
    end up in the residual set.
    """
    n = g.n_papers
    remaining = g.in_degree.astype(np.int64)
    alive = np.ones(n, dtype=bool)
    frontier = np.flatnonzero(remaining == 0)
    layers: List[np.ndarray] = []

    while frontier.size:
        layers.append(g.paper_ids[frontier])
        alive[frontier] = False
        released = np.bincount(g.forward[frontier].indices, minlength=n)
        remaining -= released
        frontier = np.flatnonzero(alive & (released > 0) & (remaining == 0))

    residual = g.paper_ids[alive]
    if residual.size:
        logger.warning(f"{residual.size} papers lie on same-year citation cycles and cannot be peeled")
    return PruningLayers(layers=layers, residual=residual)
