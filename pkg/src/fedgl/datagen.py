"""Synthetic benchmark generation.

Ground-truth graphs are Gaussian-RBF geometric graphs on the unit square
with weak edges thresholded away.  A heterogeneous family keeps a fraction
q of the base edges as the shared consensus graph and pads each client's
graph back to the original edge count with random extra edges.  Signals are
drawn from a zero-mean Gaussian whose covariance is the Laplacian
pseudo-inverse plus isotropic noise, so they are smooth on their graph.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.random import Generator, default_rng

from .graphs import GraphVector, edge_endpoints, load_edgelist, save_edgelist, to_laplacian

# eigenvalues below this are treated as the Laplacian's null space
PINV_CUTOFF = 1e-10

# weight range of surviving RBF edges; random extra edges are drawn from the
# same range so they are statistically indistinguishable from kept ones
ADDED_WEIGHT_LOW = 0.7
ADDED_WEIGHT_HIGH = 1.0


@dataclass(frozen=True)
class GraphFamily:
    """A base graph, its kept-edge consensus subgraph, and per-client graphs."""

    base: GraphVector
    consensus_truth: GraphVector
    locals_truth: list
    q: float
    seed: int | None = None

    @property
    def n_clients(self) -> int:
        return len(self.locals_truth)


def rbf_graph_from_points(points: np.ndarray, sigma_r: float = 0.5,
                          threshold: float = 0.7) -> GraphVector:
    """Gaussian-kernel weights exp(-dist^2 / 2 sigma_r^2) between given points,
    with weights below the threshold removed."""
    points = np.asarray(points, dtype=np.float64)
    if sigma_r <= 0:
        raise ValueError("kernel width must be positive")
    if not 0 <= threshold < 1:
        raise ValueError("threshold must be in [0, 1)")
    d = points.shape[0]
    if d < 2:
        raise ValueError("need at least 2 nodes")
    rows, cols = edge_endpoints(d)
    dist_sq = np.sum((points[rows] - points[cols]) ** 2, axis=1)
    w = np.exp(-dist_sq / (2.0 * sigma_r**2))
    w[w < threshold] = 0.0
    return GraphVector(d, w)


def generate_rbf_graph(d: int, sigma_r: float = 0.5, threshold: float = 0.7,
                       seed: int | Generator | None = None) -> GraphVector:
    """Random geometric graph on d points drawn uniformly in the unit square."""
    if d < 2:
        raise ValueError("need at least 2 nodes")
    rng = default_rng(seed)
    return rbf_graph_from_points(rng.random((d, 2)), sigma_r, threshold)


def make_family(g0: GraphVector, n_clients: int, q: float,
                seed: int | Generator | None = None) -> GraphFamily:
    """Split a base graph into shared consensus edges plus client extras.

    ceil(q * |E0|) base edges are kept in every client graph; each client is
    then padded back to |E0| edges with uniformly chosen absent pairs whose
    weights are drawn uniformly from the surviving-RBF weight range.
    Different clients may add the same pair by chance.
    """
    if not 0 < q <= 1:
        raise ValueError("edge-retention fraction q must be in (0, 1]")
    if n_clients < 1:
        raise ValueError("need at least one client")
    rng = default_rng(seed)
    edges0 = np.flatnonzero(g0.w)
    if edges0.size == 0:
        raise ValueError("base graph has no edges")
    n_keep = math.ceil(q * edges0.size)
    if n_keep == 0:
        raise ValueError("q is too small: no consensus edges would remain")

    kept = rng.choice(edges0, size=n_keep, replace=False)
    w_con = np.zeros(g0.p)
    w_con[kept] = g0.w[kept]
    consensus = GraphVector(g0.d, w_con)

    n_add = edges0.size - n_keep
    locals_truth = []
    for _ in range(n_clients):
        w_i = w_con.copy()
        if n_add > 0:
            absent = np.flatnonzero(w_i == 0)
            added = rng.choice(absent, size=n_add, replace=False)
            w_i[added] = rng.uniform(ADDED_WEIGHT_LOW, ADDED_WEIGHT_HIGH, size=n_add)
        locals_truth.append(GraphVector(g0.d, w_i))
    seed_val = seed if isinstance(seed, int) else None
    return GraphFamily(base=g0, consensus_truth=consensus, locals_truth=locals_truth,
                       q=q, seed=seed_val)


def laplacian_pinv(g: GraphVector, cutoff: float = PINV_CUTOFF) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of the graph Laplacian."""
    vals, vecs = np.linalg.eigh(to_laplacian(g))
    inv = np.where(vals > cutoff, 1.0 / np.where(vals > cutoff, vals, 1.0), 0.0)
    return (vecs * inv) @ vecs.T


def sample_smooth_signals(g: GraphVector, n: int, sigma_w: float = 0.1,
                          seed: int | Generator | None = None) -> np.ndarray:
    """Draw n signals from N(0, pinv(L) + sigma_w^2 I), one per column.

    Sampling goes through the symmetric square root of the covariance; the
    Laplacian's null space contributes nothing beyond the noise floor.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if sigma_w < 0:
        raise ValueError("noise scale must be non-negative")
    rng = default_rng(seed)
    vals, vecs = np.linalg.eigh(to_laplacian(g))
    pinv_vals = np.where(vals > PINV_CUTOFF, 1.0 / np.where(vals > PINV_CUTOFF, vals, 1.0), 0.0)
    sqrt_cov = (vecs * np.sqrt(pinv_vals + sigma_w**2)) @ vecs.T
    return sqrt_cov @ rng.standard_normal((g.d, n))


# --- dataset directories ----------------------------------------------------
#
# A benchmark directory holds the family truths as edge lists, one signal
# matrix per client as a plain CSV (d rows, N_i columns), and a manifest
# with the generation parameters and the assumptions baked into the family
# construction.

MANIFEST_NAME = "manifest.json"
_ASSUMPTIONS = {
    "added_edge_weights": f"uniform in [{ADDED_WEIGHT_LOW}, {ADDED_WEIGHT_HIGH}]",
    "added_edge_collisions_across_clients": "allowed",
}


def generate_dataset(d: int, n_clients: int, q: float, n_samples,
                     sigma_r: float = 0.5, weight_threshold: float = 0.7,
                     sigma_w: float = 0.1, seed: int = 0):
    """Build a family and its signal matrices from one master seed."""
    counts = list(n_samples) if np.iterable(n_samples) else [int(n_samples)] * n_clients
    if len(counts) != n_clients:
        raise ValueError(f"got {len(counts)} sample counts for {n_clients} clients")
    streams = np.random.SeedSequence(seed).spawn(2 + n_clients)
    g0 = generate_rbf_graph(d, sigma_r, weight_threshold, default_rng(streams[0]))
    family = make_family(g0, n_clients, q, default_rng(streams[1]))
    family = GraphFamily(base=family.base, consensus_truth=family.consensus_truth,
                         locals_truth=family.locals_truth, q=q, seed=seed)
    datasets = [
        sample_smooth_signals(g_i, n_i, sigma_w, default_rng(stream))
        for g_i, n_i, stream in zip(family.locals_truth, counts, streams[2:])
    ]
    return family, datasets


def write_dataset(outdir, family: GraphFamily, datasets, params: dict) -> None:
    """Write truths, signals, and the manifest into a directory."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    save_edgelist(family.base, out / "truth_base.edges")
    save_edgelist(family.consensus_truth, out / "truth_consensus.edges")
    for i, (g_i, X_i) in enumerate(zip(family.locals_truth, datasets)):
        save_edgelist(g_i, out / f"truth_client_{i}.edges")
        np.savetxt(out / f"signals_client_{i}.csv", X_i, delimiter=",", fmt="%.17g")
    manifest = dict(params)
    manifest["clients"] = family.n_clients
    manifest["q"] = family.q
    manifest["homogeneous"] = family.q == 1
    manifest["n_samples"] = [int(X.shape[1]) for X in datasets]
    manifest["base_edges"] = int(np.count_nonzero(family.base.w))
    manifest["consensus_edges"] = int(np.count_nonzero(family.consensus_truth.w))
    manifest["assumptions"] = _ASSUMPTIONS
    with open(out / MANIFEST_NAME, "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(path):
    """Read a dataset directory back: (family, signal matrices, manifest)."""
    root = Path(path)
    with open(root / MANIFEST_NAME, "r", encoding="ascii") as fh:
        manifest = json.load(fh)
    n_clients = manifest["clients"]
    family = GraphFamily(
        base=load_edgelist(root / "truth_base.edges"),
        consensus_truth=load_edgelist(root / "truth_consensus.edges"),
        locals_truth=[load_edgelist(root / f"truth_client_{i}.edges")
                      for i in range(n_clients)],
        q=manifest["q"],
        seed=manifest.get("seed"),
    )
    datasets = [
        np.loadtxt(root / f"signals_client_{i}.csv", delimiter=",", ndmin=2)
        for i in range(n_clients)
    ]
    return family, datasets, manifest
