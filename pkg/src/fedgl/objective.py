"""Per-client smooth objective, its gradient, and stepsize machinery.

The objective of one client over edge weights w is

    (1/N) z.w  -  alpha * sum_i log(deg_i(w) + zeta)  +  2 beta ||w||^2

where z holds the squared pairwise distances between node signal rows and
deg(w) are the node degrees. During a communication round the client also
carries a proximity term (rho * gamma / 2) ||w - w_con||^2 toward the
consensus graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import as_weights, degree_operator, edge_count


@dataclass(frozen=True)
class DistanceVector:
    """Squared pairwise row distances of a d x N signal matrix.

    This is the only data-derived quantity the solvers touch; the sample
    count n rides along so the data term is always scaled by the right N.
    """

    d: int
    z: np.ndarray
    n: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("need at least 2 nodes")
        if self.n < 1:
            raise ValueError("sample count must be >= 1")
        z = np.asarray(self.z, dtype=np.float64).copy()
        if z.shape != (edge_count(self.d),):
            raise ValueError(
                f"expected {edge_count(self.d)} entries for d={self.d}, got {z.shape}"
            )
        if np.any(z < 0) or not np.all(np.isfinite(z)):
            raise ValueError("squared distances must be finite and non-negative")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class HyperParams:
    """Model and algorithm constants, immutable after construction.

    rho is derived as lambda_ * nu and never set directly.  zeta may be
    zero for analytic edge cases but then objective values are only finite
    at graphs with all node degrees positive.
    """

    alpha: float = 1.0
    beta: float = 0.005
    nu: float = 2.6
    lambda_: float = 0.08
    xi: float = 0.9
    eta_w: float = 0.005
    zeta: float = 0.05
    eps_gamma: float = 1e-8
    local_loops: int = 5
    rounds: int = 50
    rho: float = field(init=False)

    def __post_init__(self):
        for name in ("beta", "nu", "lambda_", "eps_gamma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        # alpha = 0 and zeta = 0 are permitted for analytic edge cases
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.zeta < 0:
            raise ValueError("zeta must be >= 0")
        if not 0 <= self.xi < 1:
            raise ValueError("momentum weight xi must be in [0, 1)")
        if self.eta_w <= 0:
            raise ValueError("stepsize eta_w must be > 0")
        if self.local_loops < 1 or self.rounds < 1:
            raise ValueError("local_loops and rounds must be >= 1")
        object.__setattr__(self, "rho", self.lambda_ * self.nu)


def pairwise_distance(X: np.ndarray) -> DistanceVector:
    """Squared Euclidean distances between all row pairs of X (d rows)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("signal matrix must be 2-D (nodes x samples)")
    d, n = X.shape
    if d < 2:
        raise ValueError("need at least 2 nodes")
    if n < 1:
        raise ValueError("need at least 1 sample")
    sq = np.sum(X * X, axis=1)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    rows, cols = np.triu_indices(d, k=1)
    return DistanceVector(d, np.maximum(D2[rows, cols], 0.0), n)


def smoothness_value(w, z: DistanceVector) -> float:
    """Per-sample Dirichlet energy (1/N) z.w of the signals behind z."""
    wv = as_weights(w)
    if wv.shape != z.z.shape:
        raise ValueError("graph and distance vector sizes disagree")
    return float(z.z @ wv) / z.n


def local_objective(w, z: DistanceVector, hp: HyperParams) -> float:
    """Smooth per-client objective g at w (w may be a raw weight array)."""
    wv = as_weights(w)
    if wv.shape != z.z.shape:
        raise ValueError("graph and distance vector sizes disagree")
    value = float(z.z @ wv) / z.n + 2.0 * hp.beta * float(wv @ wv)
    if hp.alpha:
        deg = degree_operator(z.d).apply(wv)
        value -= hp.alpha * float(np.sum(np.log(deg + hp.zeta)))
    return value


def local_gradient(w, z: DistanceVector, hp: HyperParams) -> np.ndarray:
    """Gradient of local_objective: z/N - alpha S^T(1/(Sw + zeta)) + 4 beta w."""
    wv = as_weights(w)
    if wv.shape != z.z.shape:
        raise ValueError("graph and distance vector sizes disagree")
    grad = z.z / z.n + 4.0 * hp.beta * wv
    if hp.alpha:
        op = degree_operator(z.d)
        grad -= hp.alpha * op.adjoint(1.0 / (op.apply(wv) + hp.zeta))
    return grad


def round_objective(w, w_con, gamma: float, z: DistanceVector, hp: HyperParams) -> float:
    """Round objective f = g(w) + (rho * gamma / 2) ||w - w_con||^2."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    diff = as_weights(w) - as_weights(w_con)
    return local_objective(w, z, hp) + 0.5 * hp.rho * gamma * float(diff @ diff)


def lipschitz_bound(hp: HyperParams, d: int, gamma: float) -> float:
    """Smoothness constant 4 beta + 2 alpha (d-1) / zeta^2 + rho gamma.

    Valid over the whole non-negative orthant; infinite when the barrier is
    active (alpha > 0) but unshifted (zeta == 0).
    """
    if hp.alpha and hp.zeta == 0:
        return float("inf")
    barrier = 2.0 * hp.alpha * (d - 1) / hp.zeta**2 if hp.alpha else 0.0
    return 4.0 * hp.beta + barrier + hp.rho * gamma


@dataclass(frozen=True)
class StepsizeCheck:
    ok: bool
    eta_w: float
    eta_max: float
    lipschitz: float


def check_stepsize(hp: HyperParams, d: int, gamma_max: float) -> StepsizeCheck:
    """Check the constant-stepsize rule eta_w <= 1 / L(gamma_max)."""
    L = lipschitz_bound(hp, d, gamma_max)
    eta_max = 1.0 / L if L > 0 else float("inf")
    return StepsizeCheck(ok=hp.eta_w <= eta_max, eta_w=hp.eta_w, eta_max=eta_max, lipschitz=L)
