"""
Unit Tests
==========

Ingest, graph construction and metric functions on small hand-checked datasets.
"""
