"""
Unit Tests for the Citation Graph
================================

Test cases for graph construction, filtering, ordering and the binary cache.
"""

import numpy as np
import pytest

from src.citegraph import build_graph, fingerprint, load_graph_cache, prune_leaves, save_graph_cache, topological_order
from src.errors import GraphCacheError
from src.models import DateWindow, EdgeFilter
from tests.fixtures import dataset, graph, paper


@pytest.mark.graph
@pytest.mark.unit
class TestBuildGraph:
    """Test cases for build_graph"""

    def test_chain(self, chain_dataset):
        """Test node and edge layout"""
        g, report = build_graph(chain_dataset)
        assert g.paper_ids.tolist() == [1, 2, 3]
        assert g.n_edges == 2
        assert g.in_degree.tolist() == [1, 1, 0]
        assert g.indexed_ref_count.tolist() == [0, 1, 1]
        citing, cited = g.edges()
        assert sorted(zip(citing.tolist(), cited.tolist())) == [(2, 1), (3, 2)]
        assert report.raw_edges == report.kept_edges == 2

    def test_acausal_edges_removed(self):
        """Test that citing a strictly newer paper is deleted and same-year kept"""
        d = dataset([
            paper(1, 2000, refs=[2]),
            paper(2, 2001),
            paper(3, 2001, refs=[2]),
            paper(4, 2001, refs=[3]),
        ])
        g, report = build_graph(d)
        assert report.acausal == 1
        assert g.n_edges == 2

    def test_self_citations(self):
        """Test removal of citations between papers sharing an author"""
        d = dataset([
            paper(1, 2000, authors=[1, 2]),
            paper(2, 2001, refs=[1], authors=[2]),
            paper(3, 2001, refs=[1], authors=[3]),
        ])
        g, report = build_graph(d, EdgeFilter(drop_self_citations=True))
        assert report.self_citations == 1
        assert g.in_degree.tolist() == [1, 0, 0]

    def test_published_only(self):
        """Test that unpublished citers are dropped"""
        d = dataset([paper(1, 2000), paper(2, 2001, refs=[1], published=True), paper(3, 2001, refs=[1])])
        g, report = build_graph(d, EdgeFilter(published_only=True))
        assert report.unpublished_citers == 1
        assert g.n_edges == 1

    def test_window_removes_papers(self, chain_dataset):
        """Test that papers outside the window disappear with their edges"""
        g, report = build_graph(chain_dataset, EdgeFilter(window=DateWindow.from_years(after=2001)))
        assert g.paper_ids.tolist() == [2, 3]
        assert g.n_edges == 1
        assert report.papers_excluded == 1
        assert report.window_excluded == 1

    def test_declared_counts_survive_window(self, chain_dataset):
        """Test that windowing keeps declared reference counts"""
        g = graph(chain_dataset, window=DateWindow.from_years(after=2001))
        assert g.declared_ref_count.tolist() == [1, 1]
        assert g.indexed_ref_count.tolist() == [0, 1]

    def test_authorship(self):
        """Test the paper-author incidence"""
        d = dataset([paper(1, authors=[3, 1, 3]), paper(2, authors=[None]), paper(3, authors=[1])])
        g = graph(d)
        a = g.authorship
        assert a.author_ids.tolist() == [1, 3]
        assert a.authors_per_paper.tolist() == [2, 0, 1]
        assert a.n_author_links.tolist() == [3, 1, 1]
        assert g.paper_ids[a.papers_of(1)].tolist() == [1, 3]
        with pytest.raises(KeyError):
            a.author_index(2)

    def test_empty_dataset(self):
        """Test graph of an empty dataset"""
        g, report = build_graph(dataset([]))
        assert g.n_papers == 0
        assert g.n_edges == 0
        assert report.kept_edges == 0

    @pytest.mark.parametrize("seed", range(20))
    def test_edge_accounting(self, seed):
        """Test that every raw edge is either kept or counted by exactly one filter step"""
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 80))
        papers = []
        for i in range(1, n + 1):
            refs = sorted(set(rng.integers(1, n + 1, size=int(rng.integers(0, 6))).tolist()) - {i})
            authors = sorted(set(rng.integers(1, 10, size=int(rng.integers(0, 3))).tolist()))
            papers.append(paper(i, int(rng.integers(1995, 2005)), refs=refs, authors=authors, published=bool(rng.random() < 0.6)))
        options = dict(
            drop_self_citations=bool(seed % 2),
            published_only=bool(seed % 3 == 0),
            window=DateWindow.from_years(after=1997, before=2002) if seed % 4 < 2 else None,
        )
        g, report = build_graph(dataset(papers), EdgeFilter(**options))
        assert report.raw_edges == sum(len(p.references) for p in papers)
        assert report.raw_edges == report.kept_edges + report.deletions
        assert report.kept_edges == g.n_edges
        assert (g.forward.T != g.reverse).nnz == 0
        assert np.array_equal(g.in_degree, np.asarray(g.forward.sum(axis=0)).ravel())
        assert np.array_equal(g.indexed_ref_count, np.asarray(g.reverse.sum(axis=0)).ravel())


@pytest.mark.graph
@pytest.mark.unit
class TestOrdering:
    """Test cases for topological order and leaf pruning"""

    def test_topological_order(self):
        """Test oldest-first ordering with id ties"""
        d = dataset([paper(5, 1999), paper(2, 2001), paper(3, 1999), paper(1, 2001, month=1)])
        assert topological_order(graph(d)).tolist() == [3, 5, 1, 2]

    def test_prune_layers(self, chain_dataset):
        """Test layered peeling of a chain"""
        layers = prune_leaves(graph(chain_dataset))
        assert [layer.tolist() for layer in layers.layers] == [[3], [2], [1]]
        assert layers.depth == 3
        assert layers.residual.size == 0

    def test_same_year_cycle_is_residual(self):
        """Test that same-year cycles never peel"""
        d = dataset([paper(1, 2000, refs=[2]), paper(2, 2000, refs=[1]), paper(3, 2001, refs=[1])])
        layers = prune_leaves(graph(d))
        assert layers.layers[0].tolist() == [3]
        assert sorted(layers.residual.tolist()) == [1, 2]


@pytest.mark.graph
@pytest.mark.unit
class TestGraphCache:
    """Test cases for the binary graph cache"""

    def test_round_trip(self, tmp_path, fixture_file):
        """Test that a cached graph loads back identically"""
        from src.dataset import read_canonical

        d, _ = read_canonical(fixture_file)
        f = EdgeFilter(drop_self_citations=True)
        g, report = build_graph(d, f)
        key = fingerprint(fixture_file, f)
        path = tmp_path / "graph.bin"
        save_graph_cache(g, report, path, key)

        loaded, loaded_report = load_graph_cache(path, key)
        assert np.array_equal(loaded.paper_ids, g.paper_ids)
        assert np.array_equal(loaded.year, g.year)
        assert (loaded.forward != g.forward).nnz == 0
        assert (loaded.authorship.incidence != g.authorship.incidence).nnz == 0
        assert np.array_equal(loaded.published, g.published)
        assert loaded_report == report

    def test_stale_fingerprint(self, tmp_path, chain_dataset):
        """Test that a mismatching fingerprint is rejected"""
        g, report = build_graph(chain_dataset)
        path = tmp_path / "graph.bin"
        save_graph_cache(g, report, path, "old")
        with pytest.raises(GraphCacheError):
            load_graph_cache(path, "new")

    def test_bad_magic(self, tmp_path):
        """Test that foreign files are rejected"""
        path = tmp_path / "graph.bin"
        path.write_bytes(b"NOTAGRPH" + bytes(16))
        with pytest.raises(GraphCacheError):
            load_graph_cache(path)

    def test_truncated(self, tmp_path, chain_dataset):
        """Test that truncated caches are rejected"""
        g, report = build_graph(chain_dataset)
        path = tmp_path / "graph.bin"
        save_graph_cache(g, report, path, "k")
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(GraphCacheError):
            load_graph_cache(path, "k")

    def test_fingerprint_depends_on_filter(self, fixture_file):
        """Test that different filters give different keys"""
        assert fingerprint(fixture_file, EdgeFilter()) != fingerprint(fixture_file, EdgeFilter(published_only=True))
