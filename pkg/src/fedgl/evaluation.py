"""Edge-detection metrics against ground-truth graphs.

Estimated graphs are binarized at a small absolute weight cutoff (projected
gradient drives pruned edges to exact zero, so any small positive cutoff is
stable); the truth counts every strictly positive weight as an edge.
Relative error is computed on raw weights without thresholding.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .graphs import GraphVector
from .datagen import GraphFamily

DEFAULT_EDGE_THRESHOLD = 1e-4


@dataclass(frozen=True)
class GraphMetrics:
    precision: float
    recall: float
    fs: float
    re: float
    edge_threshold: float


def score_graph(est: GraphVector, truth: GraphVector,
                edge_threshold: float = DEFAULT_EDGE_THRESHOLD) -> GraphMetrics:
    """Precision/recall/F-score on edge sets plus relative weight error.

    A zero-norm truth leaves the relative error undefined (NaN).
    """
    if est.d != truth.d:
        raise ValueError("graphs must share the node count")
    pred = est.w > edge_threshold
    real = truth.w > 0
    tp = int(np.sum(pred & real))
    fp = int(np.sum(pred & ~real))
    fn = int(np.sum(~pred & real))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    fs = 2.0 * tp / (2.0 * tp + fp + fn) if 2 * tp + fp + fn > 0 else 0.0
    truth_norm = float(np.linalg.norm(truth.w))
    re = float(np.linalg.norm(est.w - truth.w)) / truth_norm if truth_norm > 0 else math.nan
    return GraphMetrics(precision=precision, recall=recall, fs=fs, re=re,
                        edge_threshold=edge_threshold)


def _mean_metrics(metrics, edge_threshold) -> GraphMetrics:
    return GraphMetrics(
        precision=float(np.mean([m.precision for m in metrics])),
        recall=float(np.mean([m.recall for m in metrics])),
        fs=float(np.mean([m.fs for m in metrics])),
        re=float(np.mean([m.re for m in metrics])),
        edge_threshold=edge_threshold,
    )


@dataclass(frozen=True)
class RunScore:
    per_client: list
    local_avg: GraphMetrics
    consensus: GraphMetrics | None


def score_run(locals_est, con_est: GraphVector | None, family: GraphFamily,
              edge_threshold: float = DEFAULT_EDGE_THRESHOLD) -> RunScore:
    """Score per-client estimates against their truths, averaged over clients,
    and the consensus estimate against the kept-edge truth."""
    if len(locals_est) != family.n_clients:
        raise ValueError(
            f"got {len(locals_est)} estimates for {family.n_clients} clients")
    per_client = [
        score_graph(est, truth, edge_threshold)
        for est, truth in zip(locals_est, family.locals_truth)
    ]
    consensus = None
    if con_est is not None:
        consensus = score_graph(con_est, family.consensus_truth, edge_threshold)
    return RunScore(per_client=per_client,
                    local_avg=_mean_metrics(per_client, edge_threshold),
                    consensus=consensus)


METRICS_COLUMNS = ["method", "seed", "N", "q", "precision", "recall", "fs", "re"]


def metrics_row(method: str, seed, n_samples, q: float, m: GraphMetrics) -> dict:
    return {
        "method": method,
        "seed": "" if seed is None else seed,
        "N": n_samples,
        "q": q,
        "precision": repr(m.precision),
        "recall": repr(m.recall),
        "fs": repr(m.fs),
        "re": repr(m.re),
    }


def write_metrics_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRICS_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="", encoding="ascii") as fh:
        return list(csv.DictReader(fh))
