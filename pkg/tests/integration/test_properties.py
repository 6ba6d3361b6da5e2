"""
Property Tests on Random and Synthetic Datasets
==============================================

Numerical oracles and conservation laws checked over many random inputs.
"""

import numpy as np
import pytest
from scipy import sparse

from src.analytics import (
    AuthorFlowMatrix,
    authorrank,
    build_flow_matrix,
    citation_coin,
    generation_expansion,
    gini,
    grouping_scheme,
    metric_correlations,
    n_cit,
    n_icit_papers,
    net_flow,
    paperrank,
)
from src.dataset import FixtureParams, generate_dataset
from src.models import Dataset, GroupKind
from tests.fixtures import dataset, dense_authorrank, dense_paperrank, graph, paper, random_dataset


def ring_dataset(seed: int, n_papers: int) -> Dataset:
    """Same-year papers, each citing its successor plus random extras."""
    rng = np.random.default_rng(seed)
    papers = []
    for i in range(1, n_papers + 1):
        extras = rng.choice(np.arange(1, n_papers + 1), size=3, replace=False).tolist()
        refs = sorted({i % n_papers + 1, *extras} - {i})
        papers.append(paper(i, 2000, refs=refs, authors=[int(rng.integers(1, 6))]))
    return dataset(papers)


def random_flow(rng: np.random.Generator, n: int) -> AuthorFlowMatrix:
    weights = sparse.random(n, n, density=min(1.0, 4.0 / n), random_state=rng, format="lil")
    dangling = rng.choice(n, size=max(1, n // 10), replace=False)
    weights[dangling, :] = 0.0
    return AuthorFlowMatrix(author_ids=np.arange(1, n + 1), weights=sparse.csr_matrix(weights))


@pytest.mark.integration
class TestRankOracles:
    """Iterative ranks against direct solves"""

    @pytest.mark.parametrize("seed", range(100))
    def test_paperrank_oracle(self, seed):
        """Test PaperRank on mixed acyclic and cyclic random graphs"""
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 300))
        acyclic = bool(seed % 2)
        g = graph(random_dataset(seed, n, 3.0 / n, acyclic=acyclic))
        result = paperrank(g, damping=0.85, tol=1e-14, max_iters=10_000)
        expected = dense_paperrank(g, 0.85)
        assert np.allclose(result.vector.values, expected, rtol=1e-8, atol=0.0)

    @pytest.mark.parametrize("seed", range(50))
    def test_expansion_equivalence(self, seed):
        """Test that the damped resum of generations reproduces PaperRank"""
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(5, 200))
        g = graph(random_dataset(100 + seed, n, 4.0 / n))
        expansion = generation_expansion(g, damping=0.5, g_max=60)
        ranks = paperrank(g, damping=0.5, tol=1e-14).vector.values
        assert np.allclose(expansion.resum().values, ranks, rtol=1e-8)

    @pytest.mark.parametrize("seed", range(20))
    def test_small_damping_limit(self, seed):
        """Test that tiny damping orders papers by indexed individual citations"""
        g = graph(random_dataset(200 + seed, 60, 0.08))
        ranks = paperrank(g, damping=1e-4, tol=1e-15).vector.values
        nicit = n_icit_papers(g, reference_count="indexed").values
        ahead = nicit[:, None] - nicit[None, :] > 1e-2
        assert (ranks[:, None] > ranks[None, :])[ahead].all()

    @pytest.mark.parametrize("seed", range(50))
    def test_authorrank_oracle(self, seed):
        """Test AuthorRank on random flow matrices with dangling rows"""
        rng = np.random.default_rng(300 + seed)
        m = random_flow(rng, int(rng.integers(3, 200)))
        result = authorrank(m, damping=0.9, tol=1e-14, max_iters=10_000)
        assert np.allclose(result.vector.values, dense_authorrank(m.weights.toarray(), 0.9), rtol=1e-8)

    @pytest.mark.parametrize("seed", range(30))
    def test_paperrank_grows_with_new_citation(self, seed):
        """Test that an added citation never lowers the cited paper's rank relative to an uncited paper"""
        rng = np.random.default_rng(700 + seed)
        n = int(rng.integers(10, 120))
        d = random_dataset(700 + seed, n, 3.0 / n)
        newest = n
        old = paperrank(graph(d), damping=0.85, tol=1e-14).vector
        for _ in range(5):
            cited = int(rng.integers(1, n))
            citer = int(rng.integers(cited + 1, n + 1))
            before = d.papers[citer]
            if cited in before.references:
                continue
            injected = dataset([
                p if p.paper_id != citer else p.model_copy(update={
                    "references": before.references + (cited,),
                    "declared_ref_count": before.declared_ref_count + 1,
                })
                for p in d.papers.values()
            ])
            new = paperrank(graph(injected), damping=0.85, tol=1e-14).vector
            # the newest paper is never cited, so it carries the unscaled base rank
            old_ratio = old[cited] / old[newest]
            new_ratio = new[cited] / new[newest]
            assert new_ratio >= old_ratio * (1.0 - 1e-9)
            assert new[citer] / new[newest] == pytest.approx(old[citer] / old[newest], rel=1e-9)

    @pytest.mark.parametrize("seed", range(20))
    def test_authorrank_ignores_flow_scale(self, seed):
        """Test that scaling every flow weight by a constant leaves AuthorRank unchanged"""
        rng = np.random.default_rng(800 + seed)
        m = random_flow(rng, int(rng.integers(3, 150)))
        base = authorrank(m, damping=0.9, tol=1e-14).vector.values
        for scale in (1e-3, 7.5, 1e4):
            scaled = authorrank(m.with_weights(m.weights * scale), damping=0.9, tol=1e-14).vector.values
            assert np.allclose(scaled, base, rtol=1e-9, atol=0.0)


@pytest.mark.integration
class TestConservation:
    """Sum rules and invariances"""

    @pytest.mark.parametrize("seed", range(10))
    def test_paperrank_total(self, seed):
        """Test that PaperRank sums to the citation count"""
        g = graph(random_dataset(400 + seed, 150, 0.03, acyclic=bool(seed % 2)))
        total = paperrank(g, damping=0.85, tol=1e-13).vector.values.sum()
        assert total == pytest.approx(g.n_edges, rel=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_individual_citations_total(self, seed):
        """Test that individual citations add up to the paper count when every reference is internal"""
        g = graph(ring_dataset(seed, 80))
        assert abs(n_icit_papers(g).values.sum() - g.n_papers) < 1e-9

    @pytest.mark.parametrize("seed", range(10))
    def test_citation_coin_total(self, seed):
        """Test that CitationCoin cancels over all authors"""
        g = graph(random_dataset(500 + seed, 120, 0.05, n_authors=30, extra_declared=6))
        assert abs(citation_coin(g).values.sum()) < 1e-9

    def test_cartel_immunity(self):
        """Test that flow injected along closed author cycles never changes coin balances"""
        rng = np.random.default_rng(42)
        m = build_flow_matrix(graph(random_dataset(43, 150, 0.04, n_authors=40)))
        base = net_flow(m).values
        n = m.n_authors
        for _ in range(1000):
            length = int(rng.integers(1, 6))
            cycle = rng.choice(n, size=length, replace=False)
            delta = float(rng.uniform(0.0, 10.0))
            injected = sparse.csr_matrix(
                (np.full(length, delta), (cycle, np.roll(cycle, -1))), shape=(n, n)
            )
            shifted = net_flow(m.with_weights(m.weights + injected)).values
            assert np.abs(shifted - base).max() < 1e-12


@pytest.mark.integration
class TestSyntheticFixture:
    """Properties of the preferential-attachment synthetic dataset"""

    @pytest.fixture(scope="class")
    def synthetic(self):
        d = generate_dataset(2024, FixtureParams(n_papers=3000))
        return d, graph(d)

    def test_share_rows(self, synthetic):
        """Test that every grouping scheme distributes covered papers fully"""
        d, _ = synthetic
        for kind in GroupKind:
            scheme = grouping_scheme(kind, d)
            sums = np.asarray(scheme.shares.sum(axis=1)).ravel()[scheme.covered]
            assert np.abs(sums - 1.0).max() < 1e-12, kind

    def test_citation_gini(self, synthetic):
        """Test that citation counts are heavy-tailed"""
        _, g = synthetic
        assert 0.5 <= gini(g.in_degree) <= 0.9

    def test_metric_agreement(self, synthetic):
        """Test that citation metrics rank papers alike"""
        _, g = synthetic
        result = metric_correlations([n_cit(g), n_icit_papers(g), paperrank(g, damping=0.5).vector])
        assert result.spearman.loc["ncit", "nicit"] > 0.8
        assert result.spearman.loc["ncit", "paperrank"] > 0.5
        assert result.undefined == []

    def test_individual_citations_track_citations_closest(self, synthetic):
        """Test that individual citations follow citation counts more closely than PaperRank does"""
        _, g = synthetic
        result = metric_correlations([n_cit(g), n_icit_papers(g), paperrank(g).vector])
        assert result.spearman.loc["ncit", "nicit"] > result.spearman.loc["ncit", "paperrank"]

    @pytest.mark.slow
    def test_share_rows_large(self):
        """Test share normalization on a large fixture"""
        d = generate_dataset(7, FixtureParams(n_papers=10_000))
        for kind in (GroupKind.INSTITUTION, GroupKind.COUNTRY, GroupKind.GENDER):
            scheme = grouping_scheme(kind, d)
            sums = np.asarray(scheme.shares.sum(axis=1)).ravel()[scheme.covered]
            assert np.abs(sums - 1.0).max() < 1e-12
