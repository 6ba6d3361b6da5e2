"""
Reports Module
=============

Result tables (CSV or JSONL) and the JSON run summary.
"""

from .reports import ReportWriter, RunSummary, author_table, emit_summary, group_table, paper_table

__all__ = [
    'ReportWriter',
    'RunSummary',
    'author_table',
    'emit_summary',
    'group_table',
    'paper_table',
]
