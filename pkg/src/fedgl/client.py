"""One silo's local solver.

A client owns its private distance vector and advances its personalized
graph with accelerated projected gradient steps.  Per communication round
it runs a fixed number of inner steps against the received consensus graph
and contribution weight, then ships only the updated graph back.

Momentum history deliberately survives across rounds: the first inner step
of round t extrapolates from the last two iterates of round t-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import GraphVector, to_edgelist
from .objective import DistanceVector, HyperParams, local_gradient, pairwise_distance


@dataclass(frozen=True)
class ClientUpdateMsg:
    """Graph update sent to the server; carries no raw-data payload."""

    client_id: int
    w: GraphVector
    round: int

    def to_text(self) -> str:
        return f"client={self.client_id} round={self.round}\n" + to_edgelist(self.w)


class ClientState:
    """State of one client between communication rounds.

    The distance vector is private: no public attribute or method exposes
    it, and the only outbound objects are ClientUpdateMsg instances.
    """

    def __init__(self, client_id: int, z: DistanceVector, w0: GraphVector):
        if w0.d != z.d:
            raise ValueError("initial graph and data disagree on node count")
        self.client_id = client_id
        self._z = z
        self.w = w0
        self.w_prev = w0
        self.gamma = 0.0
        self.w_con = GraphVector.zero(z.d)
        self.round = 0

    @property
    def d(self) -> int:
        return self._z.d

    def __repr__(self):
        return (
            f"ClientState(client_id={self.client_id}, d={self.d}, "
            f"round={self.round}, gamma={self.gamma:.6g})"
        )


def client_init(client_id: int, X: np.ndarray, w0: GraphVector | None = None) -> ClientState:
    """Summarize raw signals into distances and set up solver state.

    The raw matrix X is not retained; only its pairwise row distances are.
    """
    z = pairwise_distance(X)
    if w0 is None:
        w0 = GraphVector.zero(z.d)
    return ClientState(client_id, z, w0)


def _step(w: np.ndarray, w_prev: np.ndarray, w_con: np.ndarray, gamma: float,
          z: DistanceVector, hp: HyperParams) -> np.ndarray:
    """One extrapolate / gradient / project update on raw weight arrays."""
    w_ex = w + hp.xi * (w - w_prev)
    grad = local_gradient(w_ex, z, hp) + hp.rho * gamma * (w_ex - w_con)
    return np.maximum(w_ex - hp.eta_w * grad, 0.0)


def inner_step(s: ClientState, hp: HyperParams) -> ClientState:
    """Advance the client by one accelerated projected gradient step."""
    w_new = _step(s.w.w, s.w_prev.w, s.w_con.w, s.gamma, s._z, hp)
    s.w_prev = s.w
    s.w = GraphVector(s.d, w_new)
    return s


def local_round(s: ClientState, w_con: GraphVector, gamma: float,
                hp: HyperParams) -> tuple[ClientState, ClientUpdateMsg]:
    """Run one communication round: K inner steps against (w_con, gamma)."""
    if w_con.d != s.d:
        raise ValueError("consensus graph has wrong node count")
    if gamma <= 0:
        raise ValueError("contribution weight must be positive")
    s.w_con = w_con
    s.gamma = gamma
    for _ in range(hp.local_loops):
        inner_step(s, hp)
    msg = ClientUpdateMsg(client_id=s.client_id, w=s.w, round=s.round)
    s.round += 1
    return s, msg


@dataclass(frozen=True)
class LocalSolution:
    """Result of solving one local subproblem to (approximate) convergence."""

    w: GraphVector
    converged: bool
    iterations: int


def solve_local_to_convergence(z: DistanceVector, w_con: GraphVector | None,
                               gamma: float, hp: HyperParams,
                               tol: float = 1e-8,
                               max_iter: int = 100_000) -> LocalSolution:
    """Iterate the inner step until the update stalls below tol.

    With gamma == 0 this is the plain single-graph problem; hitting the
    iteration cap is reported through the converged flag, not raised.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    w_con_arr = np.zeros(z.z.shape[0]) if w_con is None else w_con.w
    w = np.zeros(z.z.shape[0])
    w_prev = w
    for it in range(1, max_iter + 1):
        w_new = _step(w, w_prev, w_con_arr, gamma, z, hp)
        done = np.linalg.norm(w_new - w) <= tol * (1.0 + np.linalg.norm(w))
        w_prev, w = w, w_new
        if done:
            return LocalSolution(GraphVector(z.d, w), True, it)
    return LocalSolution(GraphVector(z.d, w), False, max_iter)
