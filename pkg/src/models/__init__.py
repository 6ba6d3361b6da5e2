"""
Data Models Module
=================

Pydantic models for bibliographic records, reports and metric vectors.
"""

from .models import (
    AuthorLink,
    AuthorRecord,
    Continent,
    Dataset,
    DateWindow,
    DropReason,
    EdgeFilter,
    EntityKind,
    FilterReport,
    GenderTag,
    GenerationProfile,
    GroupKind,
    IngestOptions,
    IngestReport,
    InstitutionRecord,
    JournalRecord,
    MetricKind,
    MetricVector,
    OutputFormat,
    PaperRecord,
    PartialDate,
    RecordId,
    RecordKind,
    RunConfig,
)

__all__ = [
    'AuthorLink',
    'AuthorRecord',
    'Continent',
    'Dataset',
    'DateWindow',
    'DropReason',
    'EdgeFilter',
    'EntityKind',
    'FilterReport',
    'GenderTag',
    'GenerationProfile',
    'GroupKind',
    'IngestOptions',
    'IngestReport',
    'InstitutionRecord',
    'JournalRecord',
    'MetricKind',
    'MetricVector',
    'OutputFormat',
    'PaperRecord',
    'PartialDate',
    'RecordId',
    'RecordKind',
    'RunConfig',
]
