from datetime import date
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# ids end up in int64 arrays
RecordId = Annotated[int, Field(ge=-(2**63), lt=2**63)]


class RecordKind(str, Enum):
    PAPER = "paper"
    AUTHOR = "author"
    INSTITUTION = "institution"
    JOURNAL = "journal"


class GenderTag(str, Enum):
    FEMALE = "female"
    MALE = "male"
    INDETERMINATE = "indeterminate"


class Continent(str, Enum):
    AFRICA = "AF"
    ANTARCTICA = "AN"
    ASIA = "AS"
    EUROPE = "EU"
    NORTH_AMERICA = "NA"
    OCEANIA = "OC"
    SOUTH_AMERICA = "SA"


class PartialDate(BaseModel):
    """Calendar date where month and day may be unknown."""

    model_config = ConfigDict(frozen=True)

    year: int
    month: Optional[int] = None
    day: Optional[int] = None

    @model_validator(mode="after")
    def check_calendar(self) -> "PartialDate":
        if self.day is not None and self.month is None:
            raise ValueError("day given without month")
        if self.month is not None:
            # raises ValueError on impossible month/day combinations
            date(self.year, self.month, self.day or 1)
        return self

    @classmethod
    def parse(cls, text: str) -> "PartialDate":
        """Parse 'YYYY', 'YYYY-MM' or 'YYYY-MM-DD'."""
        parts = str(text).strip().split("-")
        if not 1 <= len(parts) <= 3 or not all(p.isdigit() for p in parts):
            raise ValueError(f"unparseable date {text!r}")
        numbers = [int(p) for p in parts]
        return cls(
            year=numbers[0],
            month=numbers[1] if len(numbers) > 1 else None,
            day=numbers[2] if len(numbers) > 2 else None,
        )

    @property
    def granularity(self) -> str:
        if self.day is not None:
            return "day"
        return "month" if self.month is not None else "year"

    def bounds(self) -> Tuple[date, date]:
        """First and last calendar day this date may stand for."""
        if self.month is None:
            return date(self.year, 1, 1), date(self.year, 12, 31)
        if self.day is not None:
            exact = date(self.year, self.month, self.day)
            return exact, exact
        last = pd.Timestamp(year=self.year, month=self.month, day=1).days_in_month
        return date(self.year, self.month, 1), date(self.year, self.month, last)

    def __str__(self) -> str:
        text = f"{self.year:04d}"
        if self.month is not None:
            text += f"-{self.month:02d}"
        if self.day is not None:
            text += f"-{self.day:02d}"
        return text


class AuthorLink(BaseModel):
    """One entry of a paper's author list."""

    model_config = ConfigDict(frozen=True)

    author_id: Optional[RecordId] = None
    affiliation_ids: Tuple[RecordId, ...] = ()


class PaperRecord(BaseModel):
    """Bibliographic record of one paper."""

    model_config = ConfigDict(frozen=True)

    paper_id: RecordId
    date: PartialDate
    title: str = ""
    authors: Tuple[AuthorLink, ...] = ()
    journal_id: Optional[RecordId] = None
    collaboration: Optional[str] = None
    categories: Tuple[str, ...] = ()
    declared_ref_count: int = Field(default=0, ge=0, lt=2**63)
    references: Tuple[RecordId, ...] = ()
    published: bool = False

    @model_validator(mode="after")
    def check_reference_counts(self) -> "PaperRecord":
        if self.declared_ref_count < len(self.references):
            raise ValueError(
                f"paper {self.paper_id}: declared_ref_count {self.declared_ref_count} "
                f"< {len(self.references)} indexed references"
            )
        return self

    @property
    def resolved_author_ids(self) -> Tuple[int, ...]:
        """Distinct resolvable author ids in author-list order."""
        seen: Dict[int, None] = {}
        for link in self.authors:
            if link.author_id is not None:
                seen.setdefault(link.author_id, None)
        return tuple(seen)


class AuthorRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    author_id: RecordId
    display_name: str = ""
    gender_tag: Optional[GenderTag] = None


class InstitutionRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    institution_id: RecordId
    name: str = ""
    latitude: Optional[float] = None
    longitude: Optional[float] = None
    country_code: Optional[str] = None
    continent: Optional[Continent] = None

    @field_validator("country_code")
    @classmethod
    def validate_country_code(cls, v: Optional[str]) -> Optional[str]:
        if v is None:
            return v
        code = v.strip().upper()
        if len(code) != 2 or not code.isalpha():
            raise ValueError(f"country_code must be ISO-3166 alpha-2, got {v!r}")
        return code

    @model_validator(mode="after")
    def check_coordinates(self) -> "InstitutionRecord":
        if (self.latitude is None) != (self.longitude is None):
            raise ValueError("latitude and longitude must be given together")
        if self.latitude is not None and not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} out of range")
        if self.longitude is not None and not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} out of range")
        return self

    @property
    def has_coordinates(self) -> bool:
        return self.latitude is not None


class JournalRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    journal_id: RecordId
    name: str = ""


class Dataset(BaseModel):
    """Immutable, id-indexed bibliographic dataset."""

    model_config = ConfigDict(frozen=True)

    papers: Dict[int, PaperRecord] = Field(default_factory=dict)
    authors: Dict[int, AuthorRecord] = Field(default_factory=dict)
    institutions: Dict[int, InstitutionRecord] = Field(default_factory=dict)
    journals: Dict[int, str] = Field(default_factory=dict)

    @property
    def n_papers(self) -> int:
        return len(self.papers)

    def sorted_papers(self) -> list[PaperRecord]:
        return [self.papers[k] for k in sorted(self.papers)]


# ---------------------------------------------------------------------------
# Ingest

class DropReason(str, Enum):
    MALFORMED = "malformed"
    BAD_DATE = "bad_date"
    DUPLICATE_ID = "duplicate_id"


class IngestOptions(BaseModel):
    lenient: bool = True
    min_year: int = 1200
    max_year: int = Field(default_factory=lambda: date.today().year)
    max_logged_errors: int = 20


class IngestReport(BaseModel):
    """Data-quality counters of one ingest run."""

    records_read: int = 0
    records_kept: int = 0
    dropped: Dict[DropReason, int] = Field(default_factory=lambda: {r: 0 for r in DropReason})
    external_refs: int = 0
    duplicate_refs: int = 0
    self_references: int = 0
    dangling_author_links: int = 0
    dangling_affiliations: int = 0
    dangling_journals: int = 0
    declared_ref_raised: int = 0
    errors: list[str] = Field(default_factory=list)

    @property
    def dropped_total(self) -> int:
        return sum(self.dropped.values())

    @property
    def bad_date(self) -> int:
        return self.dropped[DropReason.BAD_DATE]

    def drop(self, reason: DropReason) -> None:
        self.dropped[reason] += 1


# ---------------------------------------------------------------------------
# Graph filtering

class DateWindow(BaseModel):
    """Closed date range; either end may be open."""

    model_config = ConfigDict(frozen=True)

    start: Optional[date] = None
    end: Optional[date] = None

    @model_validator(mode="after")
    def check_nonempty(self) -> "DateWindow":
        if self.start is not None and self.end is not None and self.start > self.end:
            raise ValueError(f"empty window: {self.start} > {self.end}")
        return self

    @classmethod
    def from_years(cls, after: Optional[int] = None, before: Optional[int] = None) -> "DateWindow":
        """Window covering calendar years after..before (inclusive)."""
        return cls(
            start=date(after, 1, 1) if after is not None else None,
            end=date(before, 12, 31) if before is not None else None,
        )

    def overlaps(self, when: PartialDate) -> bool:
        lo, hi = when.bounds()
        if self.start is not None and hi < self.start:
            return False
        if self.end is not None and lo > self.end:
            return False
        return True

    def __str__(self) -> str:
        return f"[{self.start or '-inf'}, {self.end or '+inf'}]"


class EdgeFilter(BaseModel):
    model_config = ConfigDict(frozen=True)

    drop_self_citations: bool = False
    window: Optional[DateWindow] = None
    published_only: bool = False


class FilterReport(BaseModel):
    raw_edges: int = 0
    kept_edges: int = 0
    acausal: int = 0
    self_citations: int = 0
    window_excluded: int = 0
    unpublished_citers: int = 0
    papers_excluded: int = 0

    @property
    def deletions(self) -> int:
        return self.acausal + self.self_citations + self.window_excluded + self.unpublished_citers


# ---------------------------------------------------------------------------
# Metrics

class EntityKind(str, Enum):
    PAPER = "paper"
    AUTHOR = "author"
    GROUP = "group"


class GroupKind(str, Enum):
    INSTITUTION = "institution"
    TOWN = "town"
    COUNTRY = "country"
    CONTINENT = "continent"
    JOURNAL = "journal"
    GENDER = "gender"


class MetricKind(str, Enum):
    NCIT = "ncit"
    NICIT = "nicit"
    NICIT_INDEXED = "nicit_indexed"
    PAPERRANK = "paperrank"
    AUTHORRANK_OF_PAPERS = "arp"
    CCOIN_PAPER = "ccoin"
    NPAP = "npap"
    NIPAP = "nipap"
    AUTHOR_NCIT = "author_ncit"
    AUTHOR_NICIT = "author_nicit"
    H_INDEX = "h"
    PAPERRANK_OF_AUTHORS = "prank"
    AUTHORRANK = "arank"
    CCOIN_AUTHOR = "author_ccoin"
    CCOIN_PLUS = "ccoin_plus"
    GROUP_SUM = "group_sum"


class MetricVector(BaseModel):
    """Score per entity id, with the provenance of the computation."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    metric_kind: MetricKind
    entity: EntityKind
    ids: np.ndarray
    values: np.ndarray
    window: Optional[DateWindow] = None
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_alignment(self) -> "MetricVector":
        if self.ids.shape != self.values.shape:
            raise ValueError("ids and values must have the same shape")
        return self

    def __len__(self) -> int:
        return int(self.ids.size)

    def __getitem__(self, entity_id: int) -> float:
        pos = int(np.searchsorted(self.ids, entity_id))
        if pos >= self.ids.size or self.ids[pos] != entity_id:
            raise KeyError(entity_id)
        return float(self.values[pos])

    def as_dict(self) -> Dict[int, float]:
        return dict(zip(self.ids.tolist(), self.values.tolist()))

    def to_series(self, name: Optional[str] = None) -> pd.Series:
        return pd.Series(self.values, index=pd.Index(self.ids, name="id"), name=name or self.metric_kind.value)

    def total(self) -> float:
        return float(self.values.sum())

    def reindex(self, ids: np.ndarray, fill: float = 0.0) -> np.ndarray:
        """Values aligned to `ids` (sorted), missing entities get `fill`."""
        out = np.full(ids.shape, fill, dtype=float)
        if self.ids.size == 0 or ids.size == 0:
            return out
        pos = np.clip(np.searchsorted(self.ids, ids), 0, self.ids.size - 1)
        hit = self.ids[pos] == ids
        out[hit] = self.values[pos[hit]]
        return out

    def top(self, n: Optional[int] = None) -> pd.Series:
        """Scores sorted descending, ties broken by ascending id."""
        order = np.lexsort((self.ids, -self.values))
        if n is not None:
            order = order[:n]
        return pd.Series(self.values[order], index=pd.Index(self.ids[order], name="id"))


class GenerationProfile(BaseModel):
    """Per-generation path weights of one paper's rank."""

    model_config = ConfigDict(frozen=True)

    paper_id: int
    damping: float
    contributions: Tuple[float, ...]

    def resum(self, damping: Optional[float] = None) -> float:
        """Unnormalized Σ_g damping^g contributions[g]."""
        d = self.damping if damping is None else damping
        return float(sum(c * d ** g for g, c in enumerate(self.contributions)))


# ---------------------------------------------------------------------------
# CLI

class OutputFormat(str, Enum):
    CSV = "csv"
    JSONL = "jsonl"


class RunConfig(BaseModel):
    """Validated options of one CLI invocation."""

    subcommand: str
    input_path: Optional[Path] = None
    output_path: Optional[Path] = None
    graph_cache: Optional[Path] = None
    after: Optional[int] = None
    before: Optional[int] = None
    drop_self_citations: bool = False
    published_only: bool = False
    damping: Optional[float] = None
    author_damping: Optional[float] = None
    tolerance: float = 1e-10
    max_iters: int = 10_000
    output_format: OutputFormat = OutputFormat.CSV
    threads: int = 1
    seed: int = 0
    top: Optional[int] = None
    options: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("damping", "author_damping")
    @classmethod
    def validate_damping(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not 0.0 < v < 1.0:
            raise ValueError("damping must lie strictly between 0 and 1")
        return v

    @field_validator("tolerance")
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("tolerance must be positive")
        return v

    @field_validator("max_iters", "threads")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("top")
    @classmethod
    def validate_top(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("top must be at least 1")
        return v

    @model_validator(mode="after")
    def check_window(self) -> "RunConfig":
        if self.after is not None and self.before is not None and self.after > self.before:
            raise ValueError(f"empty year window: after {self.after} > before {self.before}")
        return self

    @property
    def edge_filter(self) -> EdgeFilter:
        window = None
        if self.after is not None or self.before is not None:
            window = DateWindow.from_years(self.after, self.before)
        return EdgeFilter(
            drop_self_citations=self.drop_self_citations,
            window=window,
            published_only=self.published_only,
        )
