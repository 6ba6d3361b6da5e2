"""
Citation Network Analytics
==========================

Citation-graph construction and bibliometric indices for papers, authors,
institutions and other groups: individual citations, PaperRank, AuthorRank
and CitationCoin.
"""

__version__ = "1.0.0"
__description__ = "Citation network analytics engine"
