"""Federated inference of graph topologies from smooth signals in data silos.

Each client learns a personalized graph from its private signals while a
central server maintains a sparse consensus graph and auto-assigned
contribution weights; only graph vectors ever cross the silo boundary.
"""

from .graphs import (
    DegreeOperator,
    GraphVector,
    degree_operator,
    edge_count,
    from_adjacency,
    from_edgelist,
    load_edgelist,
    project_nonneg,
    save_edgelist,
    soft_threshold,
    to_adjacency,
    to_edgelist,
    to_laplacian,
)
from .objective import (
    DistanceVector,
    HyperParams,
    check_stepsize,
    lipschitz_bound,
    local_gradient,
    local_objective,
    pairwise_distance,
    round_objective,
    smoothness_value,
)
from .client import (
    ClientState,
    ClientUpdateMsg,
    LocalSolution,
    client_init,
    inner_step,
    local_round,
    solve_local_to_convergence,
)
from .server import (
    ProtocolError,
    ServerBroadcast,
    ServerState,
    consensus_update,
    gamma_update,
    server_round,
)
from .federation import (
    FederationRun,
    convergence_report,
    run_federation,
    write_trace_csv,
)
from .datagen import (
    GraphFamily,
    generate_dataset,
    generate_rbf_graph,
    laplacian_pinv,
    load_dataset,
    make_family,
    sample_smooth_signals,
    write_dataset,
)
from .baselines import solve_global, solve_igl
from .evaluation import GraphMetrics, RunScore, score_graph, score_run
from .config import ConfigError, ExperimentConfig, config_text, load_config, parse_config

__version__ = "0.1.0"
