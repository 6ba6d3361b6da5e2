"""
Seeded synthetic bibliographic datasets.

Papers appear in time order with a yearly growth rate. Internal references go
to earlier (or same-year) papers by preferential attachment with an initial
attractiveness, so citation counts are heavy-tailed without being dominated by
a handful of the oldest papers.
"""

import io
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from src.models import (
    AuthorLink,
    AuthorRecord,
    Continent,
    Dataset,
    GenderTag,
    InstitutionRecord,
    PaperRecord,
    PartialDate,
)

from .dataset import export_canonical

CATEGORIES = ("hep-ph", "hep-th", "hep-ex", "astro-ph", "gr-qc", "nucl-th", "hep-lat", "nucl-ex")

COUNTRIES: Tuple[Tuple[str, Continent, float, float], ...] = (
    ("CH", Continent.EUROPE, 46.2, 6.1),
    ("IT", Continent.EUROPE, 43.7, 10.4),
    ("US", Continent.NORTH_AMERICA, 41.8, -88.3),
    ("JP", Continent.ASIA, 36.1, 140.1),
    ("DE", Continent.EUROPE, 53.6, 9.9),
    ("BR", Continent.SOUTH_AMERICA, -23.5, -46.6),
    ("IN", Continent.ASIA, 19.1, 72.9),
    ("AU", Continent.OCEANIA, -37.8, 145.0),
)

KM_PER_DEGREE = 111.2


class FixtureParams(BaseModel):
    n_papers: int = Field(default=1000, ge=1)
    start_year: int = 1970
    n_years: int = Field(default=45, ge=1)
    growth_rate: float = Field(default=0.05, ge=0.0)
    authors_mean: float = Field(default=3.0, ge=1.0)
    author_pool_ratio: float = Field(default=0.3, gt=0.0)
    refs_mean: float = Field(default=20.0, ge=0.0)
    internal_fraction: float = Field(default=0.7, ge=0.0, le=1.0)
    # initial attractiveness of every paper, in units of the mean internal references
    attractiveness_ratio: float = Field(default=0.75, gt=0.0)
    collaboration_fraction: float = Field(default=0.02, ge=0.0, le=1.0)
    second_affiliation_fraction: float = Field(default=0.2, ge=0.0, le=1.0)
    n_institutions: Optional[int] = Field(default=None, ge=1)
    n_towns: int = Field(default=8, ge=1)
    town_spread_km: float = Field(default=10.0, ge=0.0)
    n_journals: int = Field(default=12, ge=1)
    published_fraction: float = Field(default=0.8, ge=0.0, le=1.0)
    month_known_fraction: float = Field(default=0.7, ge=0.0, le=1.0)
    gender_tagged_fraction: float = Field(default=0.8, ge=0.0, le=1.0)
    female_fraction: float = Field(default=0.15, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def check_years(self) -> "FixtureParams":
        if self.start_year < 1200:
            raise ValueError("start_year must be at least 1200")
        return self


def _institutions(rng: np.random.Generator, params: FixtureParams, n_institutions: int) -> Dict[int, InstitutionRecord]:
    towns = []
    for t in range(params.n_towns):
        code, continent, lat, lon = COUNTRIES[t % len(COUNTRIES)]
        towns.append((code, continent, lat + rng.uniform(-3, 3), lon + rng.uniform(-3, 3)))

    spread = params.town_spread_km / KM_PER_DEGREE
    institutions = {}
    for i in range(1, n_institutions + 1):
        code, continent, lat, lon = towns[(i - 1) % len(towns)]
        institutions[i] = InstitutionRecord(
            institution_id=i,
            name=f"Institute {i}",
            latitude=float(np.clip(lat + rng.normal(0, spread), -90, 90)),
            longitude=float(np.clip(lon + rng.normal(0, spread), -180, 180)),
            country_code=code,
            continent=continent,
        )
    return institutions


def _authors(rng: np.random.Generator, params: FixtureParams, n_authors: int) -> Dict[int, AuthorRecord]:
    authors = {}
    for a in range(1, n_authors + 1):
        tag = None
        if rng.random() < params.gender_tagged_fraction:
            tag = GenderTag.FEMALE if rng.random() < params.female_fraction else GenderTag.MALE
        authors[a] = AuthorRecord(author_id=a, display_name=f"Author {a}", gender_tag=tag)
    return authors


def generate_dataset(seed: int, params: Optional[FixtureParams] = None) -> Dataset:
    """Build a deterministic synthetic Dataset."""
    params = params or FixtureParams()
    rng = np.random.default_rng(seed)
    n = params.n_papers

    weights = (1.0 + params.growth_rate) ** np.arange(params.n_years)
    per_year = rng.multinomial(n, weights / weights.sum())
    years = np.repeat(params.start_year + np.arange(params.n_years), per_year)

    n_authors = max(1, int(round(n * params.author_pool_ratio)))
    n_institutions = params.n_institutions or max(3, n // 100)
    institutions = _institutions(rng, params, n_institutions)
    authors = _authors(rng, params, n_authors)
    home = rng.integers(1, n_institutions + 1, size=n_authors + 1)
    second = rng.integers(1, n_institutions + 1, size=n_authors + 1)
    has_second = rng.random(n_authors + 1) < params.second_affiliation_fraction
    journals = {j: f"Journal {j}" for j in range(1, params.n_journals + 1)}

    declared = rng.poisson(params.refs_mean, size=n)
    internal = rng.binomial(declared, params.internal_fraction)
    attractiveness = params.attractiveness_ratio * max(params.refs_mean * params.internal_fraction, 1.0)
    # one entry per citation received; the attractiveness term is drawn uniformly
    pool = np.empty(int(internal.sum()), dtype=np.int64)
    pool_len = 0

    papers: Dict[int, PaperRecord] = {}
    for i in range(n):
        paper_id = i + 1
        year = int(years[i])

        refs: List[int] = []
        if i and internal[i]:
            k = int(internal[i])
            uniform = rng.random(k) * (attractiveness * i + pool_len) < attractiveness * i
            picks = rng.integers(0, i, size=k)
            from_pool = ~uniform
            if from_pool.any():
                picks[from_pool] = pool[rng.integers(0, pool_len, size=int(from_pool.sum()))]
            picks = np.unique(picks)
            refs = (picks + 1).tolist()
            pool[pool_len:pool_len + picks.size] = picks
            pool_len += picks.size

        links: Tuple[AuthorLink, ...] = ()
        collaboration = None
        if rng.random() < params.collaboration_fraction:
            collaboration = f"Collaboration {1 + i % 7}"
        else:
            k = min(n_authors, 1 + int(rng.poisson(params.authors_mean - 1.0)))
            centre = (i / n) * n_authors
            drawn = np.clip(np.rint(rng.normal(centre, max(5.0, 0.05 * n_authors), size=k)), 1, n_authors)
            chosen = list(dict.fromkeys(int(a) for a in drawn))
            links = tuple(
                AuthorLink.model_construct(
                    author_id=a,
                    affiliation_ids=(int(home[a]), int(second[a])) if has_second[a] and home[a] != second[a] else (int(home[a]),),
                )
                for a in chosen
            )

        month = int(rng.integers(1, 13)) if rng.random() < params.month_known_fraction else None
        published = bool(rng.random() < params.published_fraction)
        papers[paper_id] = PaperRecord.model_construct(
            paper_id=paper_id,
            date=PartialDate(year=year, month=month),
            title=f"Synthetic paper {paper_id}",
            authors=links,
            journal_id=int(rng.integers(1, params.n_journals + 1)) if published else None,
            collaboration=collaboration,
            categories=(CATEGORIES[int(rng.integers(len(CATEGORIES)))],),
            declared_ref_count=max(int(declared[i]), len(refs)),
            references=tuple(refs),
            published=published,
        )

    logger.info(f"Generated synthetic dataset: {n} papers, {n_authors} authors, seed {seed}")
    return Dataset.model_construct(papers=papers, authors=authors, institutions=institutions, journals=journals)


def gen_fixture(seed: int, n_papers: int, params: Optional[FixtureParams] = None) -> bytes:
    """Canonical JSONL bytes of a seeded synthetic dataset."""
    base = params or FixtureParams()
    checked = FixtureParams.model_validate({**base.model_dump(), "n_papers": n_papers})
    dataset = generate_dataset(seed, checked)
    buffer = io.BytesIO()
    export_canonical(dataset, buffer)
    return buffer.getvalue()
