"""
Learned Correlation Inspection
Exports the constrained correlations of a trained model and measures how many of each
vertex's strongest incoming connections stay inside the graph the correlation started from.
"""

import logging
import os
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import torch
import torch.nn as nn

from config import settings
from src.dynamic_gc.layers import DynamicSpatialGC, DynamicTemporalGC

logger = logging.getLogger(__name__)


@dataclass
class CorrelationSummary:
    path: str
    axis: str
    top: List[List[int]]
    agreement: Optional[float]


def top_connections(matrix: torch.Tensor, k: int = settings.INSPECT_TOP_K) -> List[List[int]]:
    """For every target vertex q, the k sources p with the largest a[p, q] (self excluded), strongest first."""
    values = matrix.detach().clone()
    values.fill_diagonal_(float('-inf'))
    k = min(k, values.shape[0] - 1)
    if k < 1:
        return [[] for _ in range(values.shape[0])]
    return torch.topk(values.t(), k, dim=1).indices.tolist()


def is_prior_graph(prior: torch.Tensor) -> bool:
    """0/1 valued with at least one edge between distinct vertices."""
    if not bool(((prior == 0) | (prior == 1)).all()):
        return False
    off_diagonal = prior.detach().clone()
    off_diagonal.fill_diagonal_(0)
    return bool(off_diagonal.any())


def prior_agreement(matrix: torch.Tensor, prior: torch.Tensor,
                    k: int = settings.INSPECT_TOP_K) -> Optional[float]:
    """
    Fraction of the top-k incoming connections that are nonzero in the prior graph.

    None when the starting matrix is not a prior graph (random or zero initialization),
    where the fraction carries no information.
    """
    if not is_prior_graph(prior):
        return None
    top = top_connections(matrix, k)
    total = sum(len(row) for row in top)
    if total == 0:
        return 1.0
    inside = sum(int(prior[p, q] != 0) for q, row in enumerate(top) for p in row)
    return inside / total


def inspect_model(model: nn.Module, k: int = settings.INSPECT_TOP_K) -> List[CorrelationSummary]:
    summaries = []
    for path, module in model.named_modules():
        if isinstance(module, (DynamicSpatialGC, DynamicTemporalGC)):
            correlation = module.correlation
            axis = 'spatial' if isinstance(module, DynamicSpatialGC) else 'temporal'
            summaries.append(CorrelationSummary(
                path=path,
                axis=axis,
                top=top_connections(correlation.value, k),
                agreement=prior_agreement(correlation.value, correlation.initial, k),
            ))
    logger.info(f"Inspected {len(summaries)} constrained correlations")
    return summaries


def export_correlations(model: nn.Module, out_dir: str) -> List[str]:
    """One CSV per constrained correlation, rows are source vertices."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for path, module in model.named_modules():
        if isinstance(module, (DynamicSpatialGC, DynamicTemporalGC)):
            target = os.path.join(out_dir, f"{path.replace('.', '_')}.csv")
            np.savetxt(target, module.correlation.value.detach().to(torch.float64).numpy(),
                       delimiter=',', fmt='%.17g')
            written.append(target)
    return written
