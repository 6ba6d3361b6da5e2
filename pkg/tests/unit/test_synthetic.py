"""
Unit Tests for Synthetic Datasets
================================

Test cases for the seeded fixture generator.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from src.analytics import gini
from src.dataset import FixtureParams, gen_fixture, generate_dataset, ingest


def citations_received(d) -> np.ndarray:
    cited = [r for p in d.papers.values() for r in p.references]
    return np.bincount(np.asarray(cited, dtype=np.int64), minlength=d.n_papers + 1)[1:]


@pytest.mark.dataset
@pytest.mark.unit
class TestGenFixture:
    """Test cases for gen_fixture"""

    def test_deterministic_bytes(self):
        """Test that a seed always yields the same bytes"""
        assert gen_fixture(1, 10) == gen_fixture(1, 10)
        assert gen_fixture(1, 10) != gen_fixture(2, 10)

    def test_single_paper(self):
        """Test the smallest fixture"""
        d, _ = ingest(gen_fixture(5, 1).splitlines())
        assert d.n_papers == 1
        assert d.papers[1].references == ()

    def test_invalid_size(self):
        """Test that n_papers must be positive"""
        with pytest.raises(ValidationError):
            gen_fixture(1, 0)

    def test_references_point_backwards_in_time(self):
        """Test that internal references never cite a newer year"""
        d = generate_dataset(11, FixtureParams(n_papers=500))
        for p in d.papers.values():
            for r in p.references:
                assert d.papers[r].date.year <= p.date.year

    @pytest.mark.slow
    def test_reference_mean(self):
        """Test the empirical mean of declared references"""
        d = generate_dataset(3, FixtureParams(n_papers=10_000, refs_mean=20.0))
        declared = np.array([p.declared_ref_count for p in d.papers.values()])
        assert declared.mean() == pytest.approx(20.0, rel=0.1)

    def test_collaboration_papers_have_no_authors(self):
        """Test collaboration-only papers"""
        d = generate_dataset(2, FixtureParams(n_papers=400, collaboration_fraction=0.5))
        collaborations = [p for p in d.papers.values() if p.collaboration]
        assert collaborations
        assert all(p.authors == () for p in collaborations)

    def test_journals_only_on_published(self):
        """Test journal assignment"""
        d = generate_dataset(4, FixtureParams(n_papers=200))
        assert all(p.published for p in d.papers.values() if p.journal_id is not None)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_citation_inequality(self, seed):
        """Test that citation counts are skewed but not concentrated on the oldest papers"""
        d = generate_dataset(seed, FixtureParams(n_papers=3000))
        assert 0.5 <= gini(citations_received(d)) <= 0.9

    def test_attractiveness_flattens_citations(self):
        """Test that a larger initial attractiveness lowers citation inequality"""
        counts = []
        for ratio in (0.05, 5.0):
            d = generate_dataset(9, FixtureParams(n_papers=2000, attractiveness_ratio=ratio))
            counts.append(gini(citations_received(d)))
        assert counts[0] > counts[1]
