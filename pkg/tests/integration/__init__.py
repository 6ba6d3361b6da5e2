"""
Integration Tests
=================

CLI runs, numerical oracles and scale benchmarks on synthetic datasets.
"""
