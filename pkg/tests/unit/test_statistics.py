"""
Unit Tests for Statistics
========================

Test cases for the Gini coefficient and metric correlations.
"""

import itertools

import numpy as np
import pytest

from src.analytics import gini, metric_correlations
from src.errors import ParameterError, UndefinedMetricError
from src.models import EntityKind, MetricKind, MetricVector


def vector(kind, ids, values) -> MetricVector:
    return MetricVector(
        metric_kind=kind,
        entity=EntityKind.PAPER,
        ids=np.asarray(ids),
        values=np.asarray(values, dtype=float),
    )


@pytest.mark.unit
class TestGini:
    """Test cases for gini"""

    @pytest.mark.parametrize(
        "values, expected",
        [([1, 1, 1, 1], 0.0), ([0, 0, 0, 1], 0.75), ([1, 2, 3, 4], 0.25), ([5], 0.0)],
    )
    def test_known_values(self, values, expected):
        """Test hand-computed coefficients"""
        assert gini(values) == pytest.approx(expected)

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_pairwise_definition(self, seed):
        """Test the sorted form against the double sum"""
        rng = np.random.default_rng(seed)
        x = rng.pareto(1.5, size=int(rng.integers(2, 60)))
        pairwise = sum(abs(a - b) for a, b in itertools.product(x, x)) / (2 * x.size * x.sum())
        assert abs(gini(x) - pairwise) < 1e-12

    def test_order_invariant(self):
        """Test that input order does not matter"""
        assert gini([4, 1, 3, 2]) == pytest.approx(gini([1, 2, 3, 4]))

    def test_all_zero(self):
        """Test the undefined case"""
        with pytest.raises(UndefinedMetricError):
            gini([0, 0, 0])
        with pytest.raises(UndefinedMetricError):
            gini([])

    def test_negative(self):
        """Test rejection of negative values"""
        with pytest.raises(ParameterError):
            gini([-1, 2])


@pytest.mark.unit
class TestCorrelations:
    """Test cases for metric_correlations"""

    def test_perfect_correlations(self):
        """Test a vector against itself and its negation"""
        x = np.array([3.0, 1.0, 4.0, 1.5, 9.0])
        ids = np.arange(1, 6)
        result = metric_correlations([
            vector(MetricKind.NCIT, ids, x),
            vector(MetricKind.PAPERRANK, ids, -x),
            vector(MetricKind.NICIT, ids, x ** 3),
        ])
        assert result.pearson.loc["ncit", "paperrank"] == pytest.approx(-1.0)
        assert result.spearman.loc["ncit", "nicit"] == pytest.approx(1.0)
        assert result.pearson.loc["ncit", "nicit"] < 1.0
        assert result.undefined == []

    def test_inner_join(self):
        """Test that only common ids are correlated"""
        a = vector(MetricKind.NCIT, [1, 2, 3, 4], [1, 2, 3, 100])
        b = vector(MetricKind.NICIT, [1, 2, 3], [2, 4, 6])
        result = metric_correlations([a, b])
        assert result.pearson.loc["ncit", "nicit"] == pytest.approx(1.0)

    def test_constant_metric_is_undefined(self):
        """Test that zero-variance metrics are reported, not correlated"""
        ids = [1, 2, 3]
        result = metric_correlations([vector(MetricKind.NCIT, ids, [1, 2, 3]), vector(MetricKind.NICIT, ids, [2, 2, 2])])
        assert result.undefined == ["nicit"]
        assert np.isnan(result.spearman.loc["ncit", "nicit"])
        assert np.isnan(result.pearson.loc["nicit", "nicit"])

    def test_duplicate_names(self):
        """Test that repeated metric kinds get distinct columns"""
        ids = [1, 2, 3]
        result = metric_correlations([vector(MetricKind.NCIT, ids, [1, 2, 3]), vector(MetricKind.NCIT, ids, [3, 1, 2])])
        assert list(result.pearson.columns) == ["ncit_0", "ncit_1"]

    def test_needs_two(self):
        """Test the minimum number of vectors"""
        with pytest.raises(ParameterError):
            metric_correlations([vector(MetricKind.NCIT, [1], [1])])

    @pytest.mark.parametrize("seed", range(20))
    def test_matrices_symmetric_and_semidefinite(self, seed):
        """Test that both correlation matrices are symmetric with no negative eigenvalues"""
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 200))
        ids = np.arange(1, n + 1)
        base = rng.pareto(1.5, size=n)
        kinds = [MetricKind.NCIT, MetricKind.NICIT, MetricKind.PAPERRANK, MetricKind.NCIT, MetricKind.NICIT]
        vectors = [vector(kind, ids, base * rng.uniform(0.5, 2.0, size=n) + rng.normal(0.0, 1.0, size=n)) for kind in kinds]
        result = metric_correlations(vectors)
        for matrix in (result.pearson.to_numpy(), result.spearman.to_numpy()):
            assert np.abs(matrix - matrix.T).max() < 1e-10
            assert np.linalg.eigvalsh(matrix).min() >= -1e-10
            assert np.allclose(np.diag(matrix), 1.0)
