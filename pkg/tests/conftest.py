"""
Test Configuration and Fixtures
==============================

Shared test configuration, fixtures, and utilities for the test suite.
"""

import sys
from pathlib import Path

import pytest

# Add the repository root to the Python path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.dataset import gen_fixture  # noqa: E402
from src.models import InstitutionRecord  # noqa: E402

from tests.fixtures import chain, dataset, paper  # noqa: E402


@pytest.fixture
def chain_dataset():
    """C -> B -> A in consecutive years"""
    return chain()


@pytest.fixture
def star_dataset():
    """Four papers citing paper 1"""
    return dataset([paper(1, 2000, authors=[1])] + [paper(i, 2001, refs=[1], authors=[i]) for i in range(2, 6)])


@pytest.fixture
def institutions():
    """CERN, INFN-Pisa, Pisa U and INFN-Genova"""
    return [
        InstitutionRecord(institution_id=1, name="CERN", latitude=46.2330, longitude=6.0557, country_code="CH", continent="EU"),
        InstitutionRecord(institution_id=2, name="INFN Pisa", latitude=43.7200, longitude=10.4080, country_code="IT", continent="EU"),
        InstitutionRecord(institution_id=3, name="Pisa U", latitude=43.7160, longitude=10.3966, country_code="IT", continent="EU"),
        InstitutionRecord(institution_id=4, name="INFN Genova", latitude=44.4056, longitude=8.9463, country_code="IT", continent="EU"),
    ]


@pytest.fixture
def affiliation_dataset(institutions):
    """One paper by two authors: {CERN, INFN-Pisa, Pisa U} and {CERN, INFN-Genova}"""
    return dataset(
        [paper(1, 2010, authors=[(1, [1, 2, 3]), (2, [1, 4])]), paper(2, 2011, refs=[1], authors=[(3, [4])])],
        institutions=institutions,
    )


@pytest.fixture
def fixture_lines():
    """Canonical JSONL of a small synthetic dataset"""
    return gen_fixture(seed=7, n_papers=300).decode("utf-8").splitlines()


@pytest.fixture
def fixture_file(tmp_path):
    """Synthetic dataset written to disk"""
    path = tmp_path / "papers.jsonl"
    path.write_bytes(gen_fixture(seed=3, n_papers=200))
    return path
