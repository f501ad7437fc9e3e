"""Round-synchronous federation loop.

Fan out local rounds over all clients (sequentially or on a thread pool),
barrier, run the server step, and record a per-round trace of movement,
weights, and the aggregate objective.  Every message crossing the
client/server boundary is kept in an audit log so the privacy contract can
be checked after the fact.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graphs import GraphVector
from .objective import HyperParams, check_stepsize, local_objective
from .client import client_init, local_round
from .server import ServerBroadcast, ServerState, consensus_mu, server_round

logger = logging.getLogger(__name__)

# practical weight bound for the stepsize rule; the hard cap 1/eps_gamma is
# far too pessimistic to ever admit a usable stepsize
DEFAULT_GAMMA_CAP = 1e3


@dataclass
class RoundRecord:
    round: int
    sum_dw_local_sq: float
    dw_con_sq: float
    mu: float
    gamma: tuple
    objective: float


@dataclass
class FederationRun:
    """Everything a completed run leaves behind (one trace row per round)."""

    clients: list
    server: ServerState
    hp: HyperParams
    trace: list = field(default_factory=list)
    audit_log: list = field(default_factory=list)
    seed: int | None = None


def aggregate_objective(clients, w_con: GraphVector, hp: HyperParams) -> float:
    """Joint objective: sum of local objectives plus the coupling penalties.

    Computed with simulator-level access to the clients' private summaries;
    this is a diagnostic, nothing here crosses the silo boundary.
    """
    total = 0.0
    coupling = 0.0
    for c in clients:
        total += local_objective(c.w, c._z, hp)
        coupling += float(np.linalg.norm(c.w.w - w_con.w))
    return total + hp.lambda_ * (hp.nu * coupling + float(np.sum(np.abs(w_con.w))))


def _map_local_rounds(clients, broadcasts, hp, scheduler):
    if scheduler == "sequential":
        return [local_round(c, b.w_con, b.gamma, hp)[1] for c, b in zip(clients, broadcasts)]
    if scheduler == "threads":
        with ThreadPoolExecutor(max_workers=len(clients)) as pool:
            futures = [
                pool.submit(local_round, c, b.w_con, b.gamma, hp)
                for c, b in zip(clients, broadcasts)
            ]
            return [f.result()[1] for f in futures]
    raise ValueError(f"unknown scheduler {scheduler!r} (use 'sequential' or 'threads')")


def run_federation(datasets, hp: HyperParams, seed: int | None = None,
                   w0: GraphVector | None = None, scheduler: str = "sequential",
                   gamma_cap: float = DEFAULT_GAMMA_CAP,
                   ) -> tuple[list[GraphVector], GraphVector, FederationRun]:
    """Run T communication rounds over the given per-client signal matrices.

    Args:
        datasets: list of d x N_i arrays, one per client, same node count.
        hp: model and algorithm constants.
        seed: recorded for provenance; the loop itself is deterministic.
        w0: common initial graph for clients and server (zero graph default).
        scheduler: 'sequential' or 'threads'; results are identical.
        gamma_cap: practical weight bound used for the stepsize check.

    Returns:
        (local graphs after round T, consensus graph, FederationRun record).
    """
    if len(datasets) < 1:
        raise ValueError("need at least one client dataset")
    dims = {np.asarray(X).shape[0] for X in datasets}
    if len(dims) != 1:
        raise ValueError(f"all datasets must share the node count, got {sorted(dims)}")
    d = dims.pop()

    chk = check_stepsize(hp, d, gamma_cap)
    if not chk.ok:
        logger.warning(
            "stepsize %.3g exceeds 1/L = %.3g at the practical weight cap %.3g "
            "(worst-case bound at 1/eps_gamma: 1/L = %.3g); continuing anyway",
            hp.eta_w, chk.eta_max, gamma_cap,
            check_stepsize(hp, d, 1.0 / hp.eps_gamma).eta_max,
        )

    if w0 is None:
        w0 = GraphVector.zero(d)
    clients = [client_init(i, X, w0) for i, X in enumerate(datasets)]
    server = ServerState.init(d, len(clients), w0)
    run = FederationRun(clients=clients, server=server, hp=hp, seed=seed)

    broadcasts = [
        ServerBroadcast(client_id=i, w_con=server.w_con, gamma=float(server.gamma[i]), round=0)
        for i in range(len(clients))
    ]
    for t in range(hp.rounds):
        run.audit_log.extend(broadcasts)
        w_before = [c.w.w for c in clients]
        updates = _map_local_rounds(clients, broadcasts, hp, scheduler)
        run.audit_log.extend(updates)

        mu = consensus_mu(server.gamma, hp)
        w_con_before = server.w_con.w
        server, broadcasts = server_round(updates, server, hp)

        run.trace.append(RoundRecord(
            round=t,
            sum_dw_local_sq=float(sum(
                np.sum((c.w.w - wb) ** 2) for c, wb in zip(clients, w_before))),
            dw_con_sq=float(np.sum((server.w_con.w - w_con_before) ** 2)),
            mu=mu,
            gamma=tuple(float(g) for g in server.gamma),
            objective=aggregate_objective(clients, server.w_con, hp),
        ))
    run.server = server
    return [c.w for c in clients], server.w_con, run


@dataclass
class ConvergenceReport:
    """Running-average movement of the iterates and its empirical decay."""

    t_prime: np.ndarray | None = None
    a_local: np.ndarray | None = None
    a_con: np.ndarray | None = None
    exponent_local: float | None = None
    exponent_con: float | None = None
    tail_nonincreasing_local: bool | None = None
    tail_nonincreasing_con: bool | None = None
    converged: bool = False
    insufficient: bool = False


def _decay_exponent(t_prime, a):
    mask = (t_prime >= 5) & (a > 0)
    if mask.sum() < 2:
        return None
    slope = np.polyfit(np.log(t_prime[mask]), np.log(a[mask]), 1)[0]
    return float(slope)


def convergence_report(run: FederationRun, tail_start: int = 10) -> ConvergenceReport:
    """Summarize the run's movement trace.

    A(T') is the average over the first T' rounds of the squared per-round
    movement (summed over clients for the local graphs).  Sub-linear growth
    of T' * A(T') is the empirical signature of averaged movement decaying
    like 1/T'; here it is operationalized as A(T') non-increasing past the
    transient (T' >= tail_start).
    """
    T = len(run.trace)
    if T < 5:
        return ConvergenceReport(insufficient=True)
    s_local = np.array([r.sum_dw_local_sq for r in run.trace])
    s_con = np.array([r.dw_con_sq for r in run.trace])
    t_prime = np.arange(1, T + 1, dtype=float)
    a_local = np.cumsum(s_local) / t_prime
    a_con = np.cumsum(s_con) / t_prime

    if np.all(s_local == 0) and np.all(s_con == 0):
        return ConvergenceReport(t_prime=t_prime, a_local=a_local, a_con=a_con,
                                 converged=True)

    def tail_ok(a):
        if T <= tail_start:
            return None
        tail = a[tail_start - 1:]
        return bool(np.all(np.diff(tail) <= 0))

    return ConvergenceReport(
        t_prime=t_prime, a_local=a_local, a_con=a_con,
        exponent_local=_decay_exponent(t_prime, a_local),
        exponent_con=_decay_exponent(t_prime, a_con),
        tail_nonincreasing_local=tail_ok(a_local),
        tail_nonincreasing_con=tail_ok(a_con),
    )


def write_trace_csv(run: FederationRun, path) -> None:
    """Trace as CSV: round, movement, mu, per-client gammas, objective."""
    n = run.server.n_clients
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "sum_dw_local_sq", "dw_con_sq", "mu"]
                        + [f"gamma_{i + 1}" for i in range(n)] + ["objective"])
        for r in run.trace:
            writer.writerow([r.round, repr(r.sum_dw_local_sq), repr(r.dw_con_sq),
                             repr(r.mu)] + [repr(g) for g in r.gamma]
                            + [repr(r.objective)])
