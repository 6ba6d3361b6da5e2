"""
Fixture Builders
================

Small helpers that assemble datasets and graphs by hand, plus dense
reference solvers used as numerical oracles.
"""

from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from src.citegraph import CitationGraph, build_graph
from src.models import (
    AuthorLink,
    AuthorRecord,
    Dataset,
    EdgeFilter,
    InstitutionRecord,
    PaperRecord,
    PartialDate,
)

AuthorSpec = Union[int, None, Tuple[Optional[int], Sequence[int]]]


def link(spec: AuthorSpec) -> AuthorLink:
    """An author entry from an id, None, or an (id, affiliations) pair."""
    if isinstance(spec, tuple):
        author_id, affiliations = spec
        return AuthorLink(author_id=author_id, affiliation_ids=tuple(affiliations))
    return AuthorLink(author_id=spec)


def paper(
    paper_id: int,
    year: int = 2000,
    refs: Iterable[int] = (),
    authors: Iterable[AuthorSpec] = (),
    declared: Optional[int] = None,
    month: Optional[int] = None,
    journal_id: Optional[int] = None,
    published: bool = False,
    categories: Sequence[str] = (),
) -> PaperRecord:
    refs = tuple(refs)
    return PaperRecord(
        paper_id=paper_id,
        date=PartialDate(year=year, month=month),
        title=f"Paper {paper_id}",
        authors=tuple(link(a) for a in authors),
        journal_id=journal_id,
        categories=tuple(categories),
        declared_ref_count=len(refs) if declared is None else declared,
        references=refs,
        published=published,
    )


def dataset(
    papers: Iterable[PaperRecord],
    institutions: Iterable[InstitutionRecord] = (),
    authors: Iterable[AuthorRecord] = (),
    journals: Optional[Dict[int, str]] = None,
) -> Dataset:
    """Dataset with an AuthorRecord for every author id mentioned by a paper."""
    papers = {p.paper_id: p for p in papers}
    known = {a.author_id: a for a in authors}
    for p in papers.values():
        for author_id in p.resolved_author_ids:
            known.setdefault(author_id, AuthorRecord(author_id=author_id, display_name=f"Author {author_id}"))
    return Dataset(
        papers=papers,
        authors=known,
        institutions={i.institution_id: i for i in institutions},
        journals=journals or {},
    )


def graph(d: Dataset, **filter_options) -> CitationGraph:
    g, _ = build_graph(d, EdgeFilter(**filter_options))
    return g


def chain() -> Dataset:
    """C (2002) cites B (2001) cites A (2000)."""
    return dataset([
        paper(1, 2000, authors=[1]),
        paper(2, 2001, refs=[1], authors=[2]),
        paper(3, 2002, refs=[2], authors=[3]),
    ])


def random_dataset(
    seed: int,
    n_papers: int,
    edge_probability: float,
    acyclic: bool = True,
    n_authors: int = 0,
    extra_declared: int = 0,
) -> Dataset:
    """Random citation dataset.

    Acyclic datasets give paper i year 1900 + i and only let newer papers cite
    older ones; cyclic ones put every paper in the same year.
    """
    rng = np.random.default_rng(seed)
    papers = []
    for i in range(1, n_papers + 1):
        candidates = np.arange(1, i) if acyclic else np.setdiff1d(np.arange(1, n_papers + 1), [i])
        refs = candidates[rng.random(candidates.size) < edge_probability].tolist()
        authors = []
        if n_authors:
            k = int(rng.integers(1, 4))
            authors = sorted(set(rng.integers(1, n_authors + 1, size=k).tolist()))
        papers.append(
            paper(
                i,
                year=1900 + i if acyclic else 2000,
                refs=refs,
                authors=authors,
                declared=len(refs) + int(rng.integers(0, extra_declared + 1)),
            )
        )
    return dataset(papers)


def dense_paperrank(g: CitationGraph, damping: float) -> np.ndarray:
    """Direct solve of R = damping * Mᵀ R + 1, rescaled to the citation count."""
    forward = g.forward.toarray()
    refs = forward.sum(axis=1)
    transition = np.divide(forward, refs[:, None], out=np.zeros_like(forward), where=refs[:, None] > 0)
    raw = np.linalg.solve(np.eye(g.n_papers) - damping * transition.T, np.ones(g.n_papers))
    return raw * g.n_edges / raw.sum()


def dense_authorrank(weights: np.ndarray, damping: float) -> np.ndarray:
    """Direct solve of the damped chain with uniform dangling rows, summing to N."""
    n = weights.shape[0]
    out = weights.sum(axis=1)
    chain = np.where(out[:, None] > 0, weights / np.where(out > 0, out, 1.0)[:, None], 1.0 / n)
    raw = np.linalg.solve(np.eye(n) - damping * chain.T, (1.0 - damping) * np.ones(n))
    return raw * n / raw.sum()
