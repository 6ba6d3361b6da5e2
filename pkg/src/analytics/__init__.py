"""
Analytics Module
===============

Paper, author and group metrics over a citation graph.
"""

from .author_metrics import (
    AuthorCounts,
    AuthorFlowMatrix,
    StochasticAuthorMatrix,
    author_counts,
    author_profile,
    authorrank,
    build_flow_matrix,
    citation_coin,
    citation_coin_plus,
    h_index,
    net_flow,
    paperrank_of_authors,
    stochastic_matrix,
)
from .group_metrics import (
    GenderSummary,
    GroupingScheme,
    TimeSeries,
    TownPartition,
    TrendTables,
    affiliate_rank_table,
    author_turnover,
    cluster_towns,
    continent_shares,
    country_shares,
    gender_shares,
    gender_stats,
    group_metric,
    group_time_series,
    grouping_scheme,
    haversine_km,
    institution_shares,
    journal_shares,
    journal_table,
    load_geo_denominators,
    per_capita,
    town_shares,
    trend_series,
)
from .paper_metrics import (
    GenerationExpansion,
    authorrank_of_papers,
    ccoin_papers,
    generation_expansion,
    n_cit,
    n_icit_papers,
    paperrank,
    top_referred,
)
from .power import RankResult
from .statistics import CorrelationResult, gini, metric_correlations

__all__ = [
    'AuthorCounts',
    'AuthorFlowMatrix',
    'CorrelationResult',
    'GenderSummary',
    'GenerationExpansion',
    'GroupingScheme',
    'RankResult',
    'StochasticAuthorMatrix',
    'TimeSeries',
    'TownPartition',
    'TrendTables',
    'affiliate_rank_table',
    'author_counts',
    'author_profile',
    'author_turnover',
    'authorrank',
    'authorrank_of_papers',
    'build_flow_matrix',
    'ccoin_papers',
    'citation_coin',
    'citation_coin_plus',
    'cluster_towns',
    'continent_shares',
    'country_shares',
    'gender_shares',
    'gender_stats',
    'generation_expansion',
    'gini',
    'group_metric',
    'group_time_series',
    'grouping_scheme',
    'h_index',
    'haversine_km',
    'institution_shares',
    'journal_shares',
    'journal_table',
    'load_geo_denominators',
    'metric_correlations',
    'n_cit',
    'n_icit_papers',
    'net_flow',
    'paperrank',
    'paperrank_of_authors',
    'per_capita',
    'stochastic_matrix',
    'top_referred',
    'town_shares',
    'trend_series',
]
