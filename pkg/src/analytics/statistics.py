"""
Inequality and correlation statistics over metric vectors.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from src.errors import ParameterError, UndefinedMetricError
from src.models import MetricVector


def gini(values: Sequence[float]) -> float:
    """Gini coefficient Σ_ij |x_i − x_j| / (2 n Σ x), via the sorted form."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size and x[0] < 0:
        raise ParameterError("Gini coefficient needs nonnegative values")
    total = x.sum()
    if total <= 0:
        raise UndefinedMetricError("Gini coefficient is undefined for an all-zero vector")
    n = x.size
    ranks = np.arange(1, n + 1)
    return float(2.0 * (ranks * x).sum() / (n * total) - (n + 1.0) / n)


@dataclass(frozen=True, eq=False)
class CorrelationResult:
    pearson: pd.DataFrame
    spearman: pd.DataFrame
    undefined: List[str]


def metric_correlations(vectors: Sequence[MetricVector]) -> CorrelationResult:
    """Pairwise Pearson and Spearman correlations over the common entity set.

    Constant vectors get NaN rows and columns and are listed in ``undefined``.
    """
    if len(vectors) < 2:
        raise ParameterError("correlations need at least two metric vectors")
    names = [v.metric_kind.value for v in vectors]
    names = [n if names.count(n) == 1 else f"{n}_{i}" for i, n in enumerate(names)]
    frame = pd.concat([v.to_series(n) for v, n in zip(vectors, names)], axis=1, join="inner")
    if len(frame) < len(vectors[0]):
        logger.warning(f"Correlating over {len(frame)} common entities out of {len(vectors[0])}")

    undefined = [c for c in frame.columns if frame[c].nunique() <= 1]
    if undefined:
        logger.warning(f"Zero-variance metrics have undefined correlations: {undefined}")

    pearson = frame.corr(method="pearson")
    spearman = frame.corr(method="spearman")
    for column in undefined:
        pearson.loc[column, :] = pearson.loc[:, column] = np.nan
        spearman.loc[column, :] = spearman.loc[:, column] = np.nan
    return CorrelationResult(pearson=pearson, spearman=spearman, undefined=undefined)
