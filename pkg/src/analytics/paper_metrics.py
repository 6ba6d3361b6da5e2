"""
Per-paper indices: citations, individual citations, PaperRank, its
citations-of-citations expansion, AuthorRank of papers and CitationCoin.

Two reference counts are in play. Individual citations divide by the
declared bibliography length of the citing paper; rank transitions divide by
its indexed (in-dataset) references.
"""

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from loguru import logger

from src.citegraph import CitationGraph, prune_leaves
from src.config import settings
from src.errors import DataInconsistencyError, ParameterError
from src.models import EntityKind, GenerationProfile, MetricKind, MetricVector

from .power import RankResult, RowPartitionedMatrix, check_damping, power_iterate

ReferenceCount = Literal["declared", "indexed"]


def _paper_vector(g: CitationGraph, kind: MetricKind, values: np.ndarray, **params) -> MetricVector:
    return MetricVector(
        metric_kind=kind,
        entity=EntityKind.PAPER,
        ids=g.paper_ids,
        values=np.asarray(values, dtype=float),
        params=params,
    )


def citer_weights(g: CitationGraph, reference_count: ReferenceCount = "declared") -> np.ndarray:
    """1 / (references of the citing paper) for every paper, 0 for papers citing nothing."""
    counts = g.declared_ref_count if reference_count == "declared" else g.indexed_ref_count
    cites = g.indexed_ref_count > 0
    broken = np.flatnonzero(cites & (counts <= 0))
    if broken.size:
        paper_id = int(g.paper_ids[broken[0]])
        logger.error(f"Paper {paper_id} has indexed references but declared_ref_count 0")
        raise DataInconsistencyError(
            f"paper {paper_id} cites {int(g.indexed_ref_count[broken[0]])} papers "
            f"but declares 0 references",
            paper_id=paper_id,
        )
    weights = np.zeros(g.n_papers)
    weights[cites] = 1.0 / counts[cites]
    return weights


def n_cit(g: CitationGraph) -> MetricVector:
    """Number of citations received (in-degree)."""
    return _paper_vector(g, MetricKind.NCIT, g.in_degree)


def n_icit_papers(g: CitationGraph, reference_count: ReferenceCount = "declared") -> MetricVector:
    """Individual citations: each citation weighs 1/N_ref of the citing paper."""
    values = g.reverse @ citer_weights(g, reference_count)
    kind = MetricKind.NICIT if reference_count == "declared" else MetricKind.NICIT_INDEXED
    return _paper_vector(g, kind, values, reference_count=reference_count)


def _rescale_to_citations(g: CitationGraph, raw: np.ndarray) -> np.ndarray:
    r_tot = float(g.n_edges)
    total = float(raw.sum())
    if r_tot == 0.0 or total == 0.0:
        return np.zeros_like(raw)
    return raw * (r_tot / total)


def paperrank(
    g: CitationGraph,
    damping: Optional[float] = None,
    tol: Optional[float] = None,
    max_iters: Optional[int] = None,
    threads: int = 1,
) -> RankResult:
    """PageRank over the citation graph, normalized to the total citation count.

    Solves R = damping * Mᵀ R + 1 with M[p', p] = 1/indexed_refs(p') by Jacobi
    iteration, then rescales so that Σ R equals the number of citations. Rank
    leaving through papers without indexed references is not redistributed;
    the final rescale absorbs it.
    """
    damping = settings.PAPERRANK_DAMPING if damping is None else damping
    tol = settings.RANK_TOLERANCE if tol is None else tol
    max_iters = settings.RANK_MAX_ITERS if max_iters is None else max_iters
    check_damping(damping)

    inv_refs = citer_weights(g, "indexed")
    transition = RowPartitionedMatrix(g.reverse, threads)

    def step(rank: np.ndarray) -> np.ndarray:
        return damping * transition.dot(rank * inv_refs) + 1.0

    raw, iterations, residual = power_iterate(step, np.ones(g.n_papers), tol, max_iters)
    values = _rescale_to_citations(g, raw)
    logger.info(f"PaperRank converged in {iterations} iterations (damping {damping})")
    vector = _paper_vector(
        g, MetricKind.PAPERRANK, values, damping=damping, r_tot=float(g.n_edges), tolerance=tol
    )
    return RankResult(vector=vector, iterations=iterations, residual=residual)


@dataclass(frozen=True, eq=False)
class GenerationExpansion:
    """Citations-of-citations weights of every paper, generation by generation.

    ``contributions[i, k]`` sums, over citation paths of length k ending at
    paper i, the product of 1/indexed_refs along the path.
    """

    paper_ids: np.ndarray
    damping: float
    contributions: np.ndarray
    r_tot: float

    @property
    def g_max(self) -> int:
        return self.contributions.shape[1] - 1

    def profile(self, paper_id: int) -> GenerationProfile:
        pos = int(np.searchsorted(self.paper_ids, paper_id))
        if pos >= self.paper_ids.size or self.paper_ids[pos] != paper_id:
            raise KeyError(paper_id)
        return GenerationProfile(
            paper_id=paper_id,
            damping=self.damping,
            contributions=tuple(self.contributions[pos].tolist()),
        )

    def resum(self) -> MetricVector:
        """Σ_g damping^g contributions[g], normalized like PaperRank."""
        powers = self.damping ** np.arange(self.g_max + 1)
        raw = self.contributions @ powers
        total = float(raw.sum())
        values = raw * (self.r_tot / total) if self.r_tot and total else np.zeros_like(raw)
        return MetricVector(
            metric_kind=MetricKind.PAPERRANK,
            entity=EntityKind.PAPER,
            ids=self.paper_ids,
            values=values,
            params={"damping": self.damping, "g_max": self.g_max, "r_tot": self.r_tot},
        )


def generation_expansion(g: CitationGraph, damping: Optional[float] = None, g_max: Optional[int] = None) -> GenerationExpansion:
    """Expand PaperRank into generations of citations-of-citations."""
    damping = settings.PAPERRANK_DAMPING if damping is None else damping
    g_max = settings.GENERATION_MAX if g_max is None else g_max
    check_damping(damping)
    if g_max < 1:
        raise ParameterError(f"G_max must be at least 1, got {g_max}")

    residual = prune_leaves(g).residual
    if residual.size:
        logger.warning(
            f"Graph has {residual.size} papers on same-year cycles; "
            f"their contributions are truncated at generation {g_max}"
        )

    inv_refs = citer_weights(g, "indexed")
    contributions = np.zeros((g.n_papers, g_max + 1))
    current = np.ones(g.n_papers)
    contributions[:, 0] = current
    for generation in range(1, g_max + 1):
        current = g.reverse @ (current * inv_refs)
        contributions[:, generation] = current
        if not current.any():
            logger.debug(f"Generation expansion exhausted after {generation - 1} generations")
            break

    return GenerationExpansion(
        paper_ids=g.paper_ids, damping=damping, contributions=contributions, r_tot=float(g.n_edges)
    )


def authorrank_of_papers(g: CitationGraph, author_rank: MetricVector) -> MetricVector:
    """Citations weighted by the AuthorRank of the citing authors.

    Each citing paper spreads the mean AuthorRank of its authors over its
    declared references. Citing papers with no resolvable author add nothing.
    """
    weights = citer_weights(g, "declared")
    authorship = g.authorship
    ranks = author_rank.reindex(authorship.author_ids)
    n_aut = authorship.authors_per_paper
    rank_sum = authorship.incidence @ ranks
    mean_rank = np.divide(rank_sum, n_aut, out=np.zeros(g.n_papers), where=n_aut > 0)
    values = g.reverse @ (mean_rank * weights)
    return _paper_vector(g, MetricKind.AUTHORRANK_OF_PAPERS, values)


def ccoin_papers(g: CitationGraph) -> MetricVector:
    """CitationCoin of papers: individual citations minus one."""
    values = n_icit_papers(g).values - 1.0
    return _paper_vector(g, MetricKind.CCOIN_PAPER, values)


def top_referred(
    g: CitationGraph,
    author_rank: MetricVector,
    since_year: Optional[int] = None,
    max_authors: Optional[int] = None,
) -> MetricVector:
    """AuthorRank of papers restricted to recent papers with few authors.

    Build `g` with self-citations removed to keep prolific self-citers from
    dominating the list.
    """
    scores = authorrank_of_papers(g, author_rank)
    eligible = np.ones(g.n_papers, dtype=bool)
    if since_year is not None:
        eligible &= g.year >= since_year
    if max_authors is not None:
        eligible &= g.authorship.n_author_links < max_authors
    return MetricVector(
        metric_kind=MetricKind.AUTHORRANK_OF_PAPERS,
        entity=EntityKind.PAPER,
        ids=g.paper_ids[eligible],
        values=scores.values[eligible],
        params={"since_year": since_year, "max_authors": max_authors},
    )
