"""
Citation Graph Module
====================

Immutable sparse citation graph, time ordering and its binary cache.
"""

from .cache import fingerprint, load_graph_cache, save_graph_cache
from .citegraph import (
    AuthorshipIndex,
    CitationGraph,
    PruningLayers,
    build_graph,
    prune_leaves,
    topological_order,
)

__all__ = [
    'AuthorshipIndex',
    'CitationGraph',
    'PruningLayers',
    'build_graph',
    'fingerprint',
    'load_graph_cache',
    'prune_leaves',
    'save_graph_cache',
    'topological_order',
]
