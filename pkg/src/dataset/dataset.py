import json
from pathlib import Path
from typing import IO, Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.errors import DateResolutionError, IngestError
from src.models import (
    AuthorLink,
    AuthorRecord,
    Dataset,
    DropReason,
    IngestOptions,
    IngestReport,
    InstitutionRecord,
    JournalRecord,
    PaperRecord,
    PartialDate,
    RecordId,
    RecordKind,
)

# Resolution priority, highest first
DATE_FIELDS = ("earliest_date", "preprint_date", "publication_date", "added_date")


class RawPaper(BaseModel):
    """Paper line as found in the canonical JSONL before cleaning."""

    model_config = ConfigDict(extra="ignore")

    paper_id: RecordId
    date: Optional[str] = None
    earliest_date: Optional[str] = None
    preprint_date: Optional[str] = None
    publication_date: Optional[str] = None
    added_date: Optional[str] = None
    title: str = ""
    authors: List[AuthorLink] = Field(default_factory=list)
    journal_id: Optional[RecordId] = None
    collaboration: Optional[str] = None
    categories: List[str] = Field(default_factory=list)
    declared_ref_count: Optional[int] = Field(default=None, ge=0, lt=2**63)
    references: List[RecordId] = Field(default_factory=list)
    published: bool = False

    @field_validator("date", *DATE_FIELDS, mode="before")
    @classmethod
    def stringify_dates(cls, v: Any) -> Optional[str]:
        # bare years often arrive as JSON numbers
        return None if v is None else str(v)


_RECORD_MODELS = {
    RecordKind.AUTHOR: AuthorRecord,
    RecordKind.INSTITUTION: InstitutionRecord,
    RecordKind.JOURNAL: JournalRecord,
}


def resolve_date(record: Mapping[str, Any]) -> PartialDate:
    """Pick the date of a paper from its candidate date fields.

    The earliest year wins. Within that year, candidates that know their month
    beat year-only ones and the earliest month/day is taken; exact ties go to
    the field priority earliest > preprint > publication > added. Keys may be
    given with or without the ``_date`` suffix. Unparseable candidates are
    ignored.
    """
    candidates: List[Tuple[PartialDate, int]] = []
    for priority, field in enumerate(DATE_FIELDS):
        value = record.get(field)
        if value is None:
            value = record.get(field.removesuffix("_date"))
        if value is None or str(value).strip() == "":
            continue
        try:
            candidates.append((PartialDate.parse(str(value)), priority))
        except ValueError as e:
            logger.debug(f"Ignoring {field}={value!r}: {e}")

    if not candidates:
        raise DateResolutionError("no usable date among " + ", ".join(DATE_FIELDS))

    first_year = min(c.year for c, _ in candidates)
    same_year = [(c, p) for c, p in candidates if c.year == first_year]
    pool = [(c, p) for c, p in same_year if c.month is not None] or same_year
    best, _ = min(pool, key=lambda cp: (cp[0].month or 0, cp[0].day or 0, cp[1]))
    return best


class DatasetIngestor:
    """Reads canonical JSONL into a cleaned Dataset."""

    def __init__(self, options: Optional[IngestOptions] = None):
        """Initialize ingestor."""
        self.options = options or IngestOptions()
        self.report = IngestReport()
        self._papers: Dict[int, PaperRecord] = {}
        self._ids: Dict[int, int] = {}
        self._records: Dict[RecordKind, Dict[int, BaseModel]] = {k: {} for k in _RECORD_MODELS}

    def _reject(self, line_number: int, reason: DropReason, message: str) -> None:
        fatal = reason is DropReason.MALFORMED or reason is DropReason.DUPLICATE_ID
        if fatal and not self.options.lenient:
            logger.error(f"Ingest aborted at line {line_number}: {message}")
            raise IngestError(message, line_number=line_number, reason=reason.value)
        self.report.drop(reason)
        if len(self.report.errors) < self.options.max_logged_errors:
            self.report.errors.append(f"line {line_number}: {reason.value}: {message}")
            logger.warning(f"Skipping line {line_number} ({reason.value}): {message}")

    def extract_records(self, source: Iterable[Union[bytes, str]]) -> None:
        """Parse and validate every line of the source."""
        for line_number, raw in enumerate(source, start=1):
            try:
                text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
            except UnicodeDecodeError as e:
                self.report.records_read += 1
                self._reject(line_number, DropReason.MALFORMED, f"invalid UTF-8: {e}")
                continue
            if not text.strip():
                continue
            self.report.records_read += 1
            try:
                obj = json.loads(text)
                kind = RecordKind(obj.pop("kind"))
            except (ValueError, KeyError, TypeError, AttributeError) as e:
                self._reject(line_number, DropReason.MALFORMED, f"unreadable record: {e}")
                continue

            try:
                if kind is RecordKind.PAPER:
                    self._extract_paper(line_number, RawPaper.model_validate(obj))
                else:
                    self._extract_entity(line_number, kind, _RECORD_MODELS[kind].model_validate(obj))
            except ValidationError as e:
                self._reject(line_number, DropReason.MALFORMED, f"invalid {kind.value}: {e.errors()[0]['msg']}")

    def _extract_paper(self, line_number: int, raw: RawPaper) -> None:
        try:
            when = PartialDate.parse(raw.date) if raw.date else resolve_date(raw.model_dump())
        except (ValueError, DateResolutionError) as e:
            self._reject(line_number, DropReason.BAD_DATE, f"paper {raw.paper_id}: {e}")
            return
        if not self.options.min_year <= when.year <= self.options.max_year:
            self._reject(line_number, DropReason.BAD_DATE, f"paper {raw.paper_id}: year {when.year} out of range")
            return
        if raw.paper_id in self._papers:
            self._reject(line_number, DropReason.DUPLICATE_ID, f"duplicate paper_id {raw.paper_id}")
            return
        # staged: references still raw, declared_ref_count may be None
        paper_id = self._ids.setdefault(raw.paper_id, raw.paper_id)
        self._papers[paper_id] = PaperRecord.model_construct(
            paper_id=paper_id,
            date=when,
            title=raw.title,
            authors=tuple(raw.authors),
            journal_id=raw.journal_id,
            collaboration=raw.collaboration,
            categories=tuple(raw.categories),
            declared_ref_count=raw.declared_ref_count,
            references=tuple(self._ids.setdefault(r, r) for r in raw.references),
            published=raw.published,
        )

    def _extract_entity(self, line_number: int, kind: RecordKind, record: BaseModel) -> None:
        key = int(getattr(record, f"{kind.value}_id"))
        store = self._records[kind]
        if key in store:
            self._reject(line_number, DropReason.DUPLICATE_ID, f"duplicate {kind.value}_id {key}")
            return
        store[key] = record

    def transform_papers(self) -> Dict[int, PaperRecord]:
        """Resolve cross references and enforce the paper invariants."""
        authors = self._records[RecordKind.AUTHOR]
        institutions = self._records[RecordKind.INSTITUTION]
        journals = self._records[RecordKind.JOURNAL]
        report = self.report
        papers = self._papers

        # staged records are replaced in place, one per paper at any time
        for paper_id in list(papers):
            staged = papers[paper_id]
            distinct = list(dict.fromkeys(staged.references))
            report.duplicate_refs += len(staged.references) - len(distinct)
            if paper_id in distinct:
                distinct.remove(paper_id)
                report.self_references += 1
            internal = tuple(r for r in distinct if r in papers)
            report.external_refs += len(distinct) - len(internal)

            declared = staged.declared_ref_count if staged.declared_ref_count is not None else len(distinct)
            if declared < len(internal):
                report.declared_ref_raised += 1
                declared = len(internal)

            links = []
            for link in staged.authors:
                author_id = link.author_id
                if author_id is not None and author_id not in authors:
                    report.dangling_author_links += 1
                    author_id = None
                affiliations = tuple(a for a in dict.fromkeys(link.affiliation_ids) if a in institutions)
                report.dangling_affiliations += len(set(link.affiliation_ids)) - len(affiliations)
                links.append(AuthorLink.model_construct(author_id=author_id, affiliation_ids=affiliations))

            journal_id = staged.journal_id
            if journal_id is not None and journal_id not in journals:
                report.dangling_journals += 1
                journal_id = None

            papers[paper_id] = PaperRecord.model_construct(
                paper_id=paper_id,
                date=staged.date,
                title=staged.title,
                authors=tuple(links),
                journal_id=journal_id,
                collaboration=staged.collaboration,
                categories=staged.categories,
                declared_ref_count=declared,
                references=internal,
                published=staged.published,
            )
        self._ids.clear()
        self._papers = {}
        return papers

    def load_dataset(self, papers: Dict[int, PaperRecord]) -> Dataset:
        """Assemble the immutable Dataset and close the report."""
        journals = {k: r.name for k, r in self._records[RecordKind.JOURNAL].items()}
        dataset = Dataset.model_construct(
            papers=papers,
            authors=dict(self._records[RecordKind.AUTHOR]),
            institutions=dict(self._records[RecordKind.INSTITUTION]),
            journals=journals,
        )
        self.report.records_kept = (
            len(papers) + len(dataset.authors) + len(dataset.institutions) + len(journals)
        )
        return dataset

    def run(self, source: Iterable[Union[bytes, str]]) -> Tuple[Dataset, IngestReport]:
        """Run the complete ingest."""
        try:
            self.extract_records(source)
            dataset = self.load_dataset(self.transform_papers())
        except IngestError:
            raise
        except Exception as e:
            logger.error(f"Ingest failed: {e}")
            raise

        report = self.report
        logger.info(
            f"Ingested {report.records_read} records: kept {report.records_kept}, "
            f"dropped {report.dropped_total}, external refs {report.external_refs}"
        )
        if report.dangling_author_links or report.dangling_affiliations or report.dangling_journals:
            logger.warning(
                f"Dangling links removed: {report.dangling_author_links} authors, "
                f"{report.dangling_affiliations} affiliations, {report.dangling_journals} journals"
            )
        return dataset, report


def ingest(source: Iterable[Union[bytes, str]], options: Optional[IngestOptions] = None) -> Tuple[Dataset, IngestReport]:
    """Parse canonical JSONL lines into a Dataset plus its IngestReport."""
    return DatasetIngestor(options).run(source)


def _dump_line(kind: RecordKind, record: BaseModel) -> bytes:
    body = record.model_dump(mode="json", exclude_none=True)
    body["kind"] = kind.value
    return (json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n").encode("utf-8")


def _paper_line(paper: PaperRecord) -> bytes:
    authors = []
    for link in paper.authors:
        entry: Dict[str, Any] = {"affiliation_ids": list(link.affiliation_ids)}
        if link.author_id is not None:
            entry["author_id"] = link.author_id
        authors.append(entry)

    body: Dict[str, Any] = {
        "kind": RecordKind.PAPER.value,
        "paper_id": paper.paper_id,
        "date": str(paper.date),
        "title": paper.title,
        "authors": authors,
        "categories": list(paper.categories),
        "declared_ref_count": paper.declared_ref_count,
        "references": list(paper.references),
        "published": paper.published,
    }
    if paper.journal_id is not None:
        body["journal_id"] = paper.journal_id
    if paper.collaboration is not None:
        body["collaboration"] = paper.collaboration
    return (json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n").encode("utf-8")


def export_canonical(d: Dataset, sink: IO[bytes]) -> None:
    """Write the dataset as canonical JSONL, sorted by kind then id."""
    try:
        for journal_id in sorted(d.journals):
            sink.write(_dump_line(RecordKind.JOURNAL, JournalRecord(journal_id=journal_id, name=d.journals[journal_id])))
        for institution_id in sorted(d.institutions):
            sink.write(_dump_line(RecordKind.INSTITUTION, d.institutions[institution_id]))
        for author_id in sorted(d.authors):
            sink.write(_dump_line(RecordKind.AUTHOR, d.authors[author_id]))
        for paper_id in sorted(d.papers):
            sink.write(_paper_line(d.papers[paper_id]))
    except OSError as e:
        logger.error(f"Error writing canonical dataset: {e}")
        raise


def read_canonical(path: Path, options: Optional[IngestOptions] = None) -> Tuple[Dataset, IngestReport]:
    """Ingest a canonical JSONL file."""
    try:
        f = open(path, "rb")
    except OSError as e:
        logger.error(f"Cannot open dataset {path}: {e}")
        raise IngestError(f"cannot open dataset {path}: {e}", reason="unreadable") from e
    with f:
        return ingest(f, options)


def write_canonical(d: Dataset, path: Path) -> None:
    """Export a dataset to a canonical JSONL file."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        export_canonical(d, f)
    logger.info(f"Wrote {d.n_papers} papers to {path}")
