"""
Group-level aggregation: institutions, towns, countries, continents,
journals and gender, plus yearly trend tables.

A GroupingScheme spreads each paper over groups with weights summing to one;
a group's score for any paper metric is the share-weighted sum over papers.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger
from scipy import sparse
from sklearn.cluster import DBSCAN

from src.citegraph import CitationGraph
from src.config import settings
from src.errors import IngestError, ParameterError, UndefinedMetricError
from src.models import (
    Dataset,
    DateWindow,
    EntityKind,
    GenderTag,
    GroupKind,
    InstitutionRecord,
    MetricKind,
    MetricVector,
)

from .paper_metrics import n_icit_papers
from .statistics import gini

EARTH_RADIUS_KM = 6371.0088
UNPUBLISHED = "unpublished"


@dataclass(frozen=True, eq=False)
class GroupingScheme:
    """Paper × group share matrix; every covered row sums to one."""

    kind: GroupKind
    paper_ids: np.ndarray
    group_ids: np.ndarray
    shares: sparse.csr_matrix

    @property
    def covered(self) -> np.ndarray:
        """Mask of papers with at least one group."""
        return np.diff(self.shares.indptr) > 0

    def share(self, paper_id: int, group_id) -> float:
        row = int(np.searchsorted(self.paper_ids, paper_id))
        hits = np.flatnonzero(self.group_ids == group_id)
        if row >= self.paper_ids.size or self.paper_ids[row] != paper_id or not hits.size:
            return 0.0
        return float(self.shares[row, hits[0]])

    def as_frame(self) -> pd.DataFrame:
        coo = self.shares.tocoo()
        return pd.DataFrame({
            "paper_id": self.paper_ids[coo.row],
            "group_id": self.group_ids[coo.col],
            "share": coo.data,
        })


def _paper_ids(d: Dataset, paper_ids: Optional[np.ndarray]) -> np.ndarray:
    if paper_ids is not None:
        return np.asarray(paper_ids, dtype=np.int64)
    return np.array(sorted(d.papers), dtype=np.int64)


def _scheme(kind: GroupKind, paper_ids: np.ndarray, rows: Sequence[int], labels: Sequence, weights: Sequence[float]) -> GroupingScheme:
    """Assemble and row-normalize a scheme from (row, group label, weight) triplets."""
    labels = np.asarray(labels)
    if labels.size:
        group_ids, columns = np.unique(labels, return_inverse=True)
    else:
        group_ids, columns = np.array([], dtype=np.int64), np.array([], dtype=np.int64)
    shares = sparse.csr_matrix(
        (np.asarray(weights, dtype=float), (np.asarray(rows, dtype=np.int64), columns.ravel())),
        shape=(paper_ids.size, group_ids.size),
    )
    shares.sum_duplicates()
    totals = np.asarray(shares.sum(axis=1)).ravel()
    scale = np.divide(1.0, totals, out=np.zeros_like(totals), where=totals > 0)
    shares = sparse.csr_matrix(shares.multiply(scale[:, None]))
    shares.eliminate_zeros()

    uncovered = int((totals <= 0).sum())
    if uncovered:
        logger.info(f"{uncovered} of {paper_ids.size} papers have no {kind.value} and are left out")
    return GroupingScheme(kind=kind, paper_ids=paper_ids, group_ids=group_ids, shares=shares)


def institution_shares(d: Dataset, paper_ids: Optional[np.ndarray] = None) -> GroupingScheme:
    """p_I = Σ over author entries listing I of 1/N_aff, renormalized per paper.

    Author entries without affiliations drop out before renormalization.
    """
    paper_ids = _paper_ids(d, paper_ids)
    rows: List[int] = []
    labels: List[int] = []
    weights: List[float] = []
    for row, pid in enumerate(paper_ids.tolist()):
        for link in d.papers[pid].authors:
            n_aff = len(link.affiliation_ids)
            for inst in link.affiliation_ids:
                rows.append(row)
                labels.append(inst)
                weights.append(1.0 / n_aff)
    return _scheme(GroupKind.INSTITUTION, paper_ids, rows, np.asarray(labels, dtype=np.int64), weights)


def _relabel(scheme: GroupingScheme, kind: GroupKind, mapping: Mapping) -> GroupingScheme:
    """Merge institution columns into coarser groups; unmapped institutions drop out."""
    coo = scheme.shares.tocoo()
    labels = [mapping.get(int(inst)) for inst in scheme.group_ids[coo.col]]
    keep = np.array([label is not None for label in labels], dtype=bool)
    kept_labels = np.array([label for label in labels if label is not None])
    return _scheme(kind, scheme.paper_ids, coo.row[keep], kept_labels, coo.data[keep])


def haversine_km(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Great-circle distance on a spherical Earth, broadcasting over arrays."""
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlambda = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlambda / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


@dataclass(frozen=True)
class TownPartition:
    """Institution id → town id (the smallest institution id in the town)."""

    town_of: Dict[int, int]
    without_coordinates: List[int] = field(default_factory=list)

    @property
    def n_towns(self) -> int:
        return len(set(self.town_of.values()))

    def members(self) -> Dict[int, List[int]]:
        towns: Dict[int, List[int]] = {}
        for inst, town in sorted(self.town_of.items()):
            towns.setdefault(town, []).append(inst)
        return towns


def cluster_towns(
    institutions: Union[Mapping[int, InstitutionRecord], Iterable[InstitutionRecord]],
    radius_km: Optional[float] = None,
) -> TownPartition:
    """Single-linkage clustering of institutions closer than `radius_km`.

    DBSCAN with min_samples=1 makes every point a core point, so clusters are
    exactly the connected components of the "within radius" relation.
    Institutions without coordinates become towns of their own.
    """
    radius_km = settings.TOWN_RADIUS_KM if radius_km is None else radius_km
    if radius_km <= 0:
        raise ParameterError(f"town radius must be positive, got {radius_km}")
    records = list(institutions.values()) if isinstance(institutions, Mapping) else list(institutions)
    records.sort(key=lambda r: r.institution_id)

    located = [r for r in records if r.has_coordinates]
    unlocated = [r.institution_id for r in records if not r.has_coordinates]
    town_of = {i: i for i in unlocated}
    if unlocated:
        logger.warning(f"{len(unlocated)} institutions have no coordinates and form singleton towns")

    if located:
        coords = np.radians([[r.latitude, r.longitude] for r in located])
        labels = DBSCAN(
            eps=radius_km / EARTH_RADIUS_KM, min_samples=1, metric="haversine", algorithm="ball_tree"
        ).fit_predict(coords)
        ids = np.array([r.institution_id for r in located], dtype=np.int64)
        town_id = pd.Series(ids).groupby(labels).transform("min").to_numpy()
        town_of.update(zip(ids.tolist(), town_id.tolist()))

    partition = TownPartition(town_of=town_of, without_coordinates=unlocated)
    logger.info(f"Clustered {len(records)} institutions into {partition.n_towns} towns (radius {radius_km} km)")
    return partition


def town_shares(d: Dataset, paper_ids: Optional[np.ndarray] = None, radius_km: Optional[float] = None) -> GroupingScheme:
    towns = cluster_towns(d.institutions, radius_km)
    return _relabel(institution_shares(d, paper_ids), GroupKind.TOWN, towns.town_of)


def country_shares(d: Dataset, paper_ids: Optional[np.ndarray] = None) -> GroupingScheme:
    countries = {i: r.country_code for i, r in d.institutions.items() if r.country_code}
    return _relabel(institution_shares(d, paper_ids), GroupKind.COUNTRY, countries)


def continent_shares(d: Dataset, paper_ids: Optional[np.ndarray] = None) -> GroupingScheme:
    continents = {i: r.continent.value for i, r in d.institutions.items() if r.continent}
    return _relabel(institution_shares(d, paper_ids), GroupKind.CONTINENT, continents)


def journal_shares(d: Dataset, paper_ids: Optional[np.ndarray] = None) -> GroupingScheme:
    paper_ids = _paper_ids(d, paper_ids)
    journals = [d.papers[pid].journal_id for pid in paper_ids.tolist()]
    rows = [row for row, j in enumerate(journals) if j is not None]
    return _scheme(
        GroupKind.JOURNAL, paper_ids, rows, np.array([journals[r] for r in rows], dtype=np.int64), np.ones(len(rows))
    )


def gender_shares(d: Dataset, paper_ids: Optional[np.ndarray] = None) -> GroupingScheme:
    """Fraction of each paper's female and male tagged authors.

    Untagged and indeterminate authors drop out before renormalization.
    """
    paper_ids = _paper_ids(d, paper_ids)
    rows: List[int] = []
    labels: List[str] = []
    for row, pid in enumerate(paper_ids.tolist()):
        for author_id in d.papers[pid].resolved_author_ids:
            record = d.authors.get(author_id)
            if record is not None and record.gender_tag in (GenderTag.FEMALE, GenderTag.MALE):
                rows.append(row)
                labels.append(record.gender_tag.value)
    return _scheme(GroupKind.GENDER, paper_ids, rows, np.array(labels, dtype=object), np.ones(len(rows)))


SCHEME_BUILDERS = {
    GroupKind.INSTITUTION: institution_shares,
    GroupKind.TOWN: town_shares,
    GroupKind.COUNTRY: country_shares,
    GroupKind.CONTINENT: continent_shares,
    GroupKind.JOURNAL: journal_shares,
    GroupKind.GENDER: gender_shares,
}


def grouping_scheme(kind: GroupKind, d: Dataset, paper_ids: Optional[np.ndarray] = None) -> GroupingScheme:
    return SCHEME_BUILDERS[GroupKind(kind)](d, paper_ids)


def group_metric(scheme: GroupingScheme, paper_metric: MetricVector) -> MetricVector:
    """values[G] = Σ_p share(p, G) · metric[p]."""
    values = scheme.shares.T @ paper_metric.reindex(scheme.paper_ids)
    return MetricVector(
        metric_kind=MetricKind.GROUP_SUM,
        entity=EntityKind.GROUP,
        ids=scheme.group_ids,
        values=np.asarray(values, dtype=float),
        window=paper_metric.window,
        params={"by": scheme.kind.value, "metric": paper_metric.metric_kind.value},
    )


# ---------------------------------------------------------------------------
# Tables

def affiliate_rank_table(
    d: Dataset,
    author_metrics: Mapping[str, MetricVector],
    active_window: DateWindow,
) -> pd.DataFrame:
    """Active-author headcount and author metrics per institution.

    An author is active when they wrote a paper inside the window; their
    affiliation fractions are averaged over those papers. Metric columns are
    percentages of the world total.
    """
    records = []
    for paper in d.sorted_papers():
        if not active_window.overlaps(paper.date):
            continue
        for link in paper.authors:
            if link.author_id is None or not link.affiliation_ids:
                continue
            n_aff = len(link.affiliation_ids)
            for inst in link.affiliation_ids:
                records.append((link.author_id, paper.paper_id, inst, 1.0 / n_aff))

    columns = ["n_iaut", "n_iaut_pct"] + [f"{name}_pct" for name in author_metrics]
    if not records:
        logger.warning(f"No active authors with affiliations in {active_window}")
        return pd.DataFrame(columns=columns, index=pd.Index([], name="institution_id"))

    links = pd.DataFrame(records, columns=["author_id", "paper_id", "institution_id", "weight"])
    # an author listed twice on one paper counts once
    links = links.drop_duplicates(["author_id", "paper_id", "institution_id"])
    papers_per_author = links.groupby("author_id")["paper_id"].nunique()
    fractions = links.groupby(["author_id", "institution_id"], as_index=False)["weight"].sum()
    fractions["weight"] /= fractions["author_id"].map(papers_per_author)

    table = fractions.groupby("institution_id")["weight"].sum().to_frame("n_iaut")
    table["n_iaut_pct"] = 100.0 * table["n_iaut"] / table["n_iaut"].sum()
    authors = fractions["author_id"].to_numpy()
    for name, vector in author_metrics.items():
        weighted = fractions["weight"] * vector.reindex(authors)
        total = weighted.groupby(fractions["institution_id"]).sum()
        world = total.sum()
        table[f"{name}_pct"] = 100.0 * total / world if world else 0.0

    logger.info(f"Affiliate table: {len(papers_per_author)} active authors, {len(table)} institutions")
    return table.sort_values("n_iaut", ascending=False, kind="mergesort")


def journal_table(d: Dataset, g: CitationGraph, window: Optional[DateWindow] = None) -> pd.DataFrame:
    """Per journal: papers, individual citations, their ratio and CitationCoin."""
    nicit = n_icit_papers(g).values
    frame = pd.DataFrame({"paper_id": g.paper_ids, "n_icit": nicit})
    if window is not None:
        inside = np.fromiter((window.overlaps(d.papers[pid].date) for pid in g.paper_ids.tolist()), dtype=bool, count=g.n_papers)
        frame = frame[inside]

    journal_ids = [d.papers[pid].journal_id for pid in frame["paper_id"].tolist()]
    frame["journal"] = [UNPUBLISHED if j is None else str(j) for j in journal_ids]
    table = frame.groupby("journal").agg(n_pap=("paper_id", "size"), n_icit=("n_icit", "sum"))
    table["n_icit_per_paper"] = table["n_icit"] / table["n_pap"]
    table["ccoin"] = table["n_icit"] - table["n_pap"]
    table["name"] = [UNPUBLISHED if j == UNPUBLISHED else d.journals.get(int(j), "") for j in table.index]
    return table.sort_values("n_icit", ascending=False, kind="mergesort")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Year × group percentages of the yearly world total."""

    kind: GroupKind
    metric: str
    frame: pd.DataFrame
    category: Optional[str] = None

    def of(self, group_id) -> pd.Series:
        return self.frame[group_id]


def _category_mask(d: Dataset, g: CitationGraph, category: Optional[str]) -> np.ndarray:
    if category is None:
        return np.ones(g.n_papers, dtype=bool)
    return np.fromiter(
        (category in d.papers[pid].categories for pid in g.paper_ids.tolist()), dtype=bool, count=g.n_papers
    )


def group_time_series(
    scheme: GroupingScheme,
    paper_metric: MetricVector,
    g: CitationGraph,
    d: Optional[Dataset] = None,
    category: Optional[str] = None,
) -> TimeSeries:
    """Each group's percentage of the metric earned by papers written each year.

    With a category, both the groups and the world total are restricted to
    papers of that category.
    """
    if category is not None and d is None:
        raise ParameterError("a category filter needs the dataset")
    mask = _category_mask(d, g, category) if d is not None else np.ones(g.n_papers, dtype=bool)
    rows = g.index_of(scheme.paper_ids)
    metric = paper_metric.reindex(scheme.paper_ids) * mask[rows]
    years = g.year[rows]

    world = pd.Series(metric).groupby(years).sum()
    if years.size:
        full_years = pd.RangeIndex(int(years.min()), int(years.max()) + 1, name="year")
    else:
        full_years = pd.RangeIndex(0, name="year")

    coo = scheme.shares.tocoo()
    if coo.nnz:
        parts = pd.DataFrame({
            "year": years[coo.row],
            "group_id": scheme.group_ids[coo.col],
            "value": coo.data * metric[coo.row],
        })
        totals = parts.pivot_table(index="year", columns="group_id", values="value", aggfunc="sum", fill_value=0.0)
        totals = totals.reindex(full_years, fill_value=0.0)
    else:
        totals = pd.DataFrame(index=full_years)
    world = world.reindex(full_years, fill_value=0.0)
    percentages = 100.0 * totals.div(world.where(world > 0), axis=0)
    return TimeSeries(
        kind=scheme.kind,
        metric=paper_metric.metric_kind.value,
        frame=percentages.fillna(0.0),
        category=category,
    )


@dataclass(frozen=True, eq=False)
class TrendTables:
    per_year: pd.DataFrame
    turnover: pd.DataFrame


def author_turnover(g: CitationGraph, mask: Optional[np.ndarray] = None) -> pd.DataFrame:
    """Per-year percentages of authors born (active in y, not y−1) and dead (active in y−1, not y).

    With a paper mask, an author is active in a year only through masked papers.
    """
    coo = g.authorship.incidence.tocoo()
    if mask is not None:
        keep = mask[coo.row]
        coo = sparse.coo_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=coo.shape)
    if coo.nnz == 0:
        return pd.DataFrame(columns=["active", "born_pct", "dead_pct"], index=pd.Index([], name="year"))
    presence = pd.DataFrame({"author": coo.col, "year": g.year[coo.row]}).drop_duplicates()
    years = pd.RangeIndex(int(presence["year"].min()), int(presence["year"].max()) + 2, name="year")
    active = pd.crosstab(presence["author"], presence["year"]).reindex(columns=years, fill_value=0) > 0
    previous = active.shift(1, axis=1, fill_value=False)

    n_active = active.sum(axis=0)
    n_previous = previous.sum(axis=0)
    born = (active & ~previous).sum(axis=0)
    dead = (previous & ~active).sum(axis=0)
    return pd.DataFrame({
        "active": n_active,
        "born_pct": 100.0 * born / n_active.where(n_active > 0),
        "dead_pct": 100.0 * dead / n_previous.where(n_previous > 0),
    }).fillna(0.0)


def _yearly_gini(values: pd.Series) -> float:
    try:
        return gini(values.to_numpy())
    except UndefinedMetricError:
        return float("nan")


def trend_series(d: Dataset, g: CitationGraph, category: Optional[str] = None) -> TrendTables:
    """Yearly paper counts and means of references, authors and citations."""
    mask = _category_mask(d, g, category)
    from_published = g.reverse @ g.published.astype(float)
    papers = pd.DataFrame({
        "year": g.year,
        "refs": g.declared_ref_count,
        "authors": g.authorship.n_author_links,
        "citations": g.in_degree,
        "published_citations": from_published,
    })[mask]

    grouped = papers.groupby("year")
    per_year = pd.DataFrame({
        "papers": grouped.size(),
        "mean_refs": grouped["refs"].mean(),
        "mean_authors": grouped["authors"].mean(),
        "mean_citations": grouped["citations"].mean(),
        "mean_published_citations": grouped["published_citations"].mean(),
        "citation_gini": grouped["citations"].agg(_yearly_gini),
    })
    if len(per_year):
        span = pd.RangeIndex(int(per_year.index.min()), int(per_year.index.max()) + 1, name="year")
        gini_column = per_year["citation_gini"].reindex(span)
        per_year = per_year.drop(columns="citation_gini").reindex(span, fill_value=0)
        per_year["citation_gini"] = gini_column
    per_year.index.name = "year"
    return TrendTables(per_year=per_year, turnover=author_turnover(g, mask))


@dataclass(frozen=True, eq=False)
class GenderSummary:
    shares: pd.DataFrame
    female_icit_pct: pd.Series

    @property
    def empty(self) -> bool:
        return self.shares.empty


def gender_stats(
    d: Dataset,
    g: CitationGraph,
    author_metrics: Mapping[str, MetricVector],
    category: Optional[str] = None,
) -> GenderSummary:
    """Share of authors and of each author metric held by each gender tag."""
    ids = g.authorship.author_ids
    tags = pd.Series(
        [d.authors[a].gender_tag.value if a in d.authors and d.authors[a].gender_tag else None for a in ids.tolist()],
        index=ids,
        dtype="object",
    )
    tagged = tags.isin([GenderTag.FEMALE.value, GenderTag.MALE.value])
    if not tagged.any():
        logger.warning("No gender-tagged authors; gender summary is empty")
        return GenderSummary(shares=pd.DataFrame(), female_icit_pct=pd.Series(dtype=float))

    columns = {"authors": pd.Series(1.0, index=ids)}
    columns.update({name: pd.Series(v.reindex(ids), index=ids) for name, v in author_metrics.items()})
    frame = pd.DataFrame(columns)[tagged.to_numpy()]
    sums = frame.groupby(tags[tagged]).sum()
    shares = 100.0 * sums / sums.sum()
    shares.index.name = "gender"

    series = group_time_series(gender_shares(d, g.paper_ids), n_icit_papers(g), g, d, category)
    female = series.frame.get(GenderTag.FEMALE.value, pd.Series(0.0, index=series.frame.index))
    return GenderSummary(shares=shares.add_suffix("_pct"), female_icit_pct=female.rename("female_icit_pct"))


# ---------------------------------------------------------------------------
# Per-capita normalization

GEO_COLUMNS = ("country", "population", "gdp_usd")


def load_geo_denominators(path: Path) -> pd.DataFrame:
    """Read a country,population,gdp_usd CSV indexed by country code."""
    try:
        table = pd.read_csv(path, dtype={"country": str})
    except (OSError, pd.errors.ParserError) as e:
        logger.error(f"Cannot read geo denominators {path}: {e}")
        raise IngestError(f"cannot read geo denominators {path}: {e}") from e
    missing = [c for c in GEO_COLUMNS if c not in table.columns]
    if missing:
        raise IngestError(f"geo denominators {path} lack columns {missing}")
    table["country"] = table["country"].str.strip().str.upper()
    return table.set_index("country")[["population", "gdp_usd"]].astype(float)


def per_capita(group_vector: MetricVector, denominators: pd.DataFrame) -> pd.DataFrame:
    """Country totals divided by population and by GDP."""
    table = group_vector.to_series("value").to_frame().join(denominators, how="left")
    table.index.name = "country"
    missing = table["population"].isna().sum()
    if missing:
        logger.warning(f"{missing} countries have no denominators")
    table["per_capita"] = table["value"] / table["population"]
    table["per_gdp_usd"] = table["value"] / table["gdp_usd"]
    return table
