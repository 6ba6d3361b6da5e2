"""
Dataset Module
=============

Ingest, cleaning and canonical export of bibliographic records, plus the
synthetic dataset generator.
"""

from .dataset import (
    DatasetIngestor,
    export_canonical,
    ingest,
    read_canonical,
    resolve_date,
    write_canonical,
)
from .synthetic import FixtureParams, gen_fixture, generate_dataset

__all__ = [
    'DatasetIngestor',
    'FixtureParams',
    'export_canonical',
    'gen_fixture',
    'generate_dataset',
    'ingest',
    'read_canonical',
    'resolve_date',
    'write_canonical',
]
