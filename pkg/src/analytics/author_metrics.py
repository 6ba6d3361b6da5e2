"""
Per-author indices.

Every paper metric is shared equally among the resolvable authors of the
paper. Papers whose author list holds only a collaboration tag count for paper
metrics but for no author.
"""

from dataclasses import dataclass
from typing import Any, Dict, Literal, Optional

import numpy as np
import pandas as pd
from loguru import logger
from scipy import sparse

from src.citegraph import CitationGraph
from src.config import settings
from src.models import Dataset, EntityKind, MetricKind, MetricVector

from .paper_metrics import citer_weights, n_icit_papers, paperrank
from .power import RankResult, RowPartitionedMatrix, check_damping, power_iterate


def _author_vector(ids: np.ndarray, kind: MetricKind, values: np.ndarray, **params) -> MetricVector:
    return MetricVector(
        metric_kind=kind,
        entity=EntityKind.AUTHOR,
        ids=ids,
        values=np.asarray(values, dtype=float),
        params=params,
    )


def _inverse_authors(g: CitationGraph) -> np.ndarray:
    n_aut = g.authorship.authors_per_paper
    return np.divide(1.0, n_aut, out=np.zeros(g.n_papers), where=n_aut > 0)


def _diag(values: np.ndarray) -> sparse.csr_matrix:
    n = values.size
    return sparse.csr_matrix((values, (np.arange(n), np.arange(n))), shape=(n, n))


def share_among_authors(g: CitationGraph, per_paper: np.ndarray) -> np.ndarray:
    """Σ over the author's papers of per_paper / N_aut."""
    return g.authorship.incidence.T @ (np.asarray(per_paper, dtype=float) * _inverse_authors(g))


@dataclass(frozen=True, eq=False)
class AuthorCounts:
    npap: MetricVector
    nipap: MetricVector
    ncit: MetricVector
    nicit: MetricVector
    unattributed_papers: int

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {v.metric_kind.value: v.values for v in (self.npap, self.nipap, self.ncit, self.nicit)},
            index=pd.Index(self.npap.ids, name="author_id"),
        )


def author_counts(g: CitationGraph) -> AuthorCounts:
    """Papers, individual papers, citations and individual citations per author."""
    authorship = g.authorship
    ids = authorship.author_ids
    unattributed = int((authorship.authors_per_paper == 0).sum())
    if unattributed:
        logger.info(f"{unattributed} papers have no resolvable author and count for no author")

    nicit_p = n_icit_papers(g).values
    return AuthorCounts(
        npap=_author_vector(ids, MetricKind.NPAP, authorship.incidence.T @ np.ones(g.n_papers)),
        nipap=_author_vector(ids, MetricKind.NIPAP, share_among_authors(g, np.ones(g.n_papers))),
        ncit=_author_vector(ids, MetricKind.AUTHOR_NCIT, authorship.incidence.T @ g.in_degree.astype(float)),
        nicit=_author_vector(ids, MetricKind.AUTHOR_NICIT, share_among_authors(g, nicit_p)),
        unattributed_papers=unattributed,
    )


def h_index(g: CitationGraph) -> MetricVector:
    """Largest h such that h of the author's papers have at least h citations."""
    authorship = g.authorship
    coo = authorship.incidence.tocoo()
    frame = pd.DataFrame({"author": coo.col, "citations": g.in_degree[coo.row]})
    frame = frame.sort_values(["author", "citations"], ascending=[True, False], kind="mergesort")
    frame["position"] = frame.groupby("author").cumcount() + 1
    qualifying = frame[frame["citations"] >= frame["position"]]
    h = qualifying.groupby("author")["position"].max()

    values = np.zeros(authorship.n_authors)
    values[h.index.to_numpy()] = h.to_numpy()
    return _author_vector(authorship.author_ids, MetricKind.H_INDEX, values)


def paperrank_of_authors(paper_rank: MetricVector, g: CitationGraph) -> MetricVector:
    """R_A = Σ over the author's papers of R_p / N_aut."""
    values = share_among_authors(g, paper_rank.reindex(g.paper_ids))
    return _author_vector(g.authorship.author_ids, MetricKind.PAPERRANK_OF_AUTHORS, values, **paper_rank.params)


# ---------------------------------------------------------------------------
# Author flow matrix

@dataclass(frozen=True, eq=False)
class AuthorFlowMatrix:
    """Individual citations flowing between authors.

    ``weights[i, j]`` is the flow from author ``author_ids[i]`` (citing) to
    author ``author_ids[j]`` (cited).
    """

    author_ids: np.ndarray
    weights: sparse.csr_matrix
    self_citations_removed: bool = False
    antisymmetrized: bool = False

    @property
    def n_authors(self) -> int:
        return int(self.author_ids.size)

    def given(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()

    def received(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=0)).ravel()

    def with_weights(self, weights: sparse.spmatrix) -> "AuthorFlowMatrix":
        return AuthorFlowMatrix(
            author_ids=self.author_ids,
            weights=sparse.csr_matrix(weights),
            self_citations_removed=self.self_citations_removed,
            antisymmetrized=self.antisymmetrized,
        )


def build_flow_matrix(
    g: CitationGraph,
    remove_self: bool = False,
    antisymmetrize: bool = False,
) -> AuthorFlowMatrix:
    """w[A′→A] = Σ over citations p′→p of 1/(N_aut(p) · N_aut(p′) · N_ref(p′))."""
    incidence = g.authorship.incidence
    inv_aut = _inverse_authors(g)
    citing = _diag(citer_weights(g, "declared") * inv_aut) @ incidence
    cited = _diag(inv_aut) @ incidence
    weights = (citing.T @ g.forward @ cited).tocsr()

    if remove_self:
        weights = (weights - _diag(weights.diagonal())).tocsr()
    if antisymmetrize:
        weights = (weights - weights.T).maximum(0.0).tocsr()
    weights.eliminate_zeros()
    weights.sort_indices()

    logger.info(f"Author flow matrix: {incidence.shape[1]} authors, {weights.nnz} nonzeros")
    return AuthorFlowMatrix(
        author_ids=g.authorship.author_ids,
        weights=weights,
        self_citations_removed=remove_self,
        antisymmetrized=antisymmetrize,
    )


@dataclass(frozen=True, eq=False)
class StochasticAuthorMatrix:
    author_ids: np.ndarray
    transition: sparse.csr_matrix
    dangling: np.ndarray

    @property
    def dangling_authors(self) -> np.ndarray:
        return self.author_ids[self.dangling]


def stochastic_matrix(m: AuthorFlowMatrix) -> StochasticAuthorMatrix:
    """Row-normalize the flow matrix; rows with no outflow are flagged dangling."""
    out = m.given()
    dangling = out <= 0.0
    scale = np.divide(1.0, out, out=np.zeros_like(out), where=~dangling)
    transition = (_diag(scale) @ m.weights).tocsr()
    return StochasticAuthorMatrix(author_ids=m.author_ids, transition=transition, dangling=dangling)


def authorrank(
    m: AuthorFlowMatrix,
    damping: Optional[float] = None,
    tol: Optional[float] = None,
    max_iters: Optional[int] = None,
    threads: int = 1,
) -> RankResult:
    """Damped principal eigenvector of the stochastic author matrix.

    Dangling rows jump uniformly to every author. The result sums to the
    number of authors.
    """
    damping = settings.AUTHORRANK_DAMPING if damping is None else damping
    tol = settings.RANK_TOLERANCE if tol is None else tol
    max_iters = settings.RANK_MAX_ITERS if max_iters is None else max_iters
    check_damping(damping)

    chain = stochastic_matrix(m)
    n = m.n_authors
    inflow = RowPartitionedMatrix(chain.transition.T.tocsr(), threads)
    dangling = chain.dangling
    if dangling.any():
        logger.debug(f"{int(dangling.sum())} authors give no in-dataset citations")

    def step(rank: np.ndarray) -> np.ndarray:
        leaked = rank[dangling].sum() / n
        return damping * (inflow.dot(rank) + leaked) + (1.0 - damping)

    raw, iterations, residual = power_iterate(step, np.ones(n), tol, max_iters)
    total = float(raw.sum())
    values = raw * (n / total) if total else raw
    logger.info(f"AuthorRank converged in {iterations} iterations (damping {damping})")
    vector = _author_vector(m.author_ids, MetricKind.AUTHORRANK, values, damping=damping, tolerance=tol)
    return RankResult(vector=vector, iterations=iterations, residual=residual)


# ---------------------------------------------------------------------------
# CitationCoin

def net_flow(m: AuthorFlowMatrix) -> MetricVector:
    """Received minus given; diagonal entries and closed cycles cancel."""
    return _author_vector(m.author_ids, MetricKind.CCOIN_AUTHOR, m.received() - m.given())


def citation_coin(g: CitationGraph, method: Literal["matrix", "counts"] = "matrix") -> MetricVector:
    """Individual citations received minus individual citations given.

    Only citations between papers that both have resolvable authors move
    coin, so the totals cancel exactly. ``params["closed_form_discrepancy"]``
    is Σ_A |ℂ_A − (N_icit − N_ipap)|, non-zero when references point outside
    the dataset or to author-less papers.
    """
    if method == "matrix":
        values = net_flow(build_flow_matrix(g)).values
    elif method == "counts":
        authored = (g.authorship.authors_per_paper > 0).astype(float)
        weights = citer_weights(g, "declared")
        received = g.reverse @ (authored * weights)
        given = (g.forward @ authored) * weights
        values = share_among_authors(g, received * authored) - share_among_authors(g, given)
    else:
        raise ValueError(f"unknown CitationCoin method {method!r}")

    counts = author_counts(g)
    discrepancy = float(np.abs(values - (counts.nicit.values - counts.nipap.values)).sum())
    if discrepancy > 1e-9:
        logger.debug(f"CitationCoin differs from N_icit - N_ipap by {discrepancy:.4g} in total")
    return _author_vector(
        g.authorship.author_ids,
        MetricKind.CCOIN_AUTHOR,
        values,
        method=method,
        closed_form_discrepancy=discrepancy,
    )


def citation_coin_plus(g: CitationGraph) -> MetricVector:
    """Shares of the positive paper coins only."""
    positive = np.maximum(n_icit_papers(g).values - 1.0, 0.0)
    return _author_vector(g.authorship.author_ids, MetricKind.CCOIN_PLUS, share_among_authors(g, positive))


# ---------------------------------------------------------------------------
# Profile

def _ranked(ids: np.ndarray, values: np.ndarray, top: int) -> list[Dict[str, Any]]:
    keep = values > 0
    ids, values = ids[keep], values[keep]
    order = np.lexsort((ids, -values))[:top]
    return [{"author_id": int(ids[i]), "weight": float(values[i])} for i in order]


def author_profile(
    d: Dataset,
    g: CitationGraph,
    author_id: int,
    paper_rank: Optional[MetricVector] = None,
    author_rank: Optional[MetricVector] = None,
    top: int = 5,
) -> Dict[str, Any]:
    """Everything known about one author, as plain JSON-ready data."""
    authorship = g.authorship
    column = authorship.author_index(author_id)
    nodes = authorship.papers_of(author_id)

    if paper_rank is None:
        paper_rank = paperrank(g).vector
    flow = build_flow_matrix(g)
    if author_rank is None:
        author_rank = authorrank(flow).vector

    counts = author_counts(g)
    metrics = {
        "npap": counts.npap.values[column],
        "nipap": counts.nipap.values[column],
        "ncit": counts.ncit.values[column],
        "nicit": counts.nicit.values[column],
        "h": h_index(g).values[column],
        "prank": paperrank_of_authors(paper_rank, g).values[column],
        "arank": author_rank[author_id],
        "ccoin": net_flow(flow).values[column],
        "ccoin_plus": citation_coin_plus(g).values[column],
    }

    inv_aut = _inverse_authors(g)[nodes]
    per_paper = pd.DataFrame({
        "year": g.year[nodes],
        "papers": 1.0,
        "individual_papers": inv_aut,
        "individual_citations": n_icit_papers(g).values[nodes] * inv_aut,
    })
    evolution = per_paper.groupby("year").sum().sort_index()
    evolution = evolution.join(evolution.cumsum().add_prefix("cumulative_"))

    given, received = flow.given()[column], flow.received()[column]
    self_flow = flow.weights[column, column]
    outgoing = flow.weights.getrow(column).toarray().ravel()
    incoming = flow.weights.getcol(column).toarray().ravel()
    outgoing[column] = incoming[column] = 0.0

    coauthors = np.asarray(authorship.incidence[nodes].sum(axis=0)).ravel()
    coauthors[column] = 0.0

    paper_ids = g.paper_ids[nodes]
    categories = pd.Series(
        [c for pid in paper_ids.tolist() for c in d.papers[pid].categories], dtype="object"
    ).value_counts()

    record = d.authors.get(author_id)
    first, last = (int(g.year[nodes].min()), int(g.year[nodes].max())) if nodes.size else (None, None)
    return {
        "author_id": author_id,
        "display_name": record.display_name if record else "",
        "gender_tag": record.gender_tag.value if record and record.gender_tag else None,
        "metrics": {k: float(v) for k, v in metrics.items()},
        "first_year": first,
        "last_year": last,
        "scientific_age": last - first + 1 if nodes.size else 0,
        "self_citations_given_pct": 100.0 * self_flow / given if given else 0.0,
        "self_citations_received_pct": 100.0 * self_flow / received if received else 0.0,
        "time_evolution": [
            {"year": int(year), **{k: float(v) for k, v in row.items()}}
            for year, row in evolution.iterrows()
        ],
        "top_citers": _ranked(flow.author_ids, incoming, top),
        "top_citees": _ranked(flow.author_ids, outgoing, top),
        "collaborators": [
            {"author_id": c["author_id"], "papers": int(c["weight"])}
            for c in _ranked(authorship.author_ids, coauthors, top)
        ],
        "categories": {str(k): int(v) for k, v in categories.items()},
    }
