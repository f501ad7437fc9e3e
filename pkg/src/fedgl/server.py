"""Central-server math: consensus proximal update and contribution weights.

Per round the server averages the received graphs with the current weights,
applies the l1 proximal map, and only then refreshes the weights from the
distances to the new consensus graph.  That order is load-bearing: the two
updates would be circular the other way around.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import GraphVector, soft_threshold, to_edgelist
from .client import ClientUpdateMsg
from .objective import HyperParams


class ProtocolError(Exception):
    """Raised when the round's update set is incomplete or inconsistent."""


@dataclass
class ServerState:
    w_con: GraphVector
    gamma: np.ndarray
    round: int
    n_clients: int

    @classmethod
    def init(cls, d: int, n_clients: int, w0: GraphVector | None = None) -> "ServerState":
        """Fresh state with uniform weights gamma_i = 1/I."""
        if n_clients < 1:
            raise ValueError("need at least one client")
        w_con = GraphVector.zero(d) if w0 is None else w0
        return cls(w_con=w_con, gamma=np.full(n_clients, 1.0 / n_clients), round=0,
                   n_clients=n_clients)


@dataclass(frozen=True)
class ServerBroadcast:
    """Per-client reply: new consensus graph and contribution weight."""

    client_id: int
    w_con: GraphVector
    gamma: float
    round: int

    def to_text(self) -> str:
        return f"gamma={self.gamma:.12g} round={self.round}\n" + to_edgelist(self.w_con)


def _checked_updates(updates, s: ServerState) -> list[ClientUpdateMsg]:
    """Validate and return the round's updates sorted by client id."""
    if len(updates) != s.n_clients:
        raise ProtocolError(f"expected {s.n_clients} updates, got {len(updates)}")
    seen = {}
    for msg in updates:
        if msg.client_id in seen:
            raise ProtocolError(f"duplicate update from client {msg.client_id}")
        seen[msg.client_id] = msg
    if sorted(seen) != list(range(s.n_clients)):
        raise ProtocolError(f"client ids {sorted(seen)} are not 0..{s.n_clients - 1}")
    rounds = {msg.round for msg in updates}
    if len(rounds) != 1 or rounds != {s.round}:
        raise ProtocolError(f"round mismatch: server at {s.round}, updates carry {sorted(rounds)}")
    dims = {msg.w.d for msg in updates}
    if dims != {s.w_con.d}:
        raise ProtocolError(f"node-count mismatch: server d={s.w_con.d}, updates {sorted(dims)}")
    return [seen[i] for i in range(s.n_clients)]


def consensus_mu(gamma: np.ndarray, hp: HyperParams) -> float:
    """Proximal threshold lambda / (sum_i gamma_i * rho) of the consensus step."""
    c_gamma = float(np.sum(gamma))
    if c_gamma <= 0:
        raise ValueError("weights must sum to a positive value")
    return hp.lambda_ / (c_gamma * hp.rho)


def consensus_update(updates, s: ServerState, hp: HyperParams) -> ServerState:
    """Soft-threshold the gamma-weighted average of the received graphs."""
    msgs = _checked_updates(updates, s)
    c_gamma = float(np.sum(s.gamma))
    # fixed ascending-id summation order keeps runs bit-reproducible
    avg = np.zeros(s.w_con.p)
    for gamma_i, msg in zip(s.gamma, msgs):
        avg += gamma_i * msg.w.w
    avg /= c_gamma
    w_con = soft_threshold(avg, consensus_mu(s.gamma, hp))
    return ServerState(w_con=GraphVector(s.w_con.d, w_con), gamma=s.gamma.copy(),
                       round=s.round, n_clients=s.n_clients)


def gamma_update(updates, w_con: GraphVector, hp: HyperParams) -> np.ndarray:
    """Inverse-distance weights 1 / (||w_i - w_con|| + eps) per client."""
    gammas = np.empty(len(updates))
    for k, msg in enumerate(sorted(updates, key=lambda m: m.client_id)):
        if msg.w.d != w_con.d:
            raise ValueError("update and consensus graph sizes disagree")
        gammas[k] = 1.0 / (np.linalg.norm(msg.w.w - w_con.w) + hp.eps_gamma)
    return gammas


def server_round(updates, s: ServerState,
                 hp: HyperParams) -> tuple[ServerState, list[ServerBroadcast]]:
    """Aggregate one complete round: consensus first, then the weights."""
    new = consensus_update(updates, s, hp)
    new.gamma = gamma_update(updates, new.w_con, hp)
    new.round = s.round + 1
    broadcasts = [
        ServerBroadcast(client_id=i, w_con=new.w_con, gamma=float(new.gamma[i]),
                        round=new.round)
        for i in range(new.n_clients)
    ]
    return new, broadcasts
