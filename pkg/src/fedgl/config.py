"""Flat key = value experiment configuration.

One text file drives dataset generation and every solver run.  Unknown keys
are rejected so typos fail loudly, and each run writes its fully resolved
configuration back out for provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from .objective import HyperParams


class ConfigError(Exception):
    """Bad configuration file, key, or value."""


def _log_spaced(lo: float, hi: float, n: int) -> tuple:
    return tuple(float(v) for v in np.logspace(np.log10(lo), np.log10(hi), n))


@dataclass(frozen=True)
class ExperimentConfig:
    # model / algorithm
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
    # synthetic data
    d: int = 20
    clients: int = 5
    q: float = 0.5
    sigma_r: float = 0.5
    weight_threshold: float = 0.7
    sigma_w: float = 0.1
    n_samples: tuple = (100,)
    seed: int = 0
    # runtime / scoring
    edge_threshold: float = 1e-4
    tol: float = 1e-8
    max_iter: int = 100_000
    gamma_cap: float = 1e3
    scheduler: str = "sequential"
    # grid search ranges
    beta_grid: tuple = ()
    nu_grid: tuple = _log_spaced(1.0, 100.0, 5)
    lambda_grid: tuple = _log_spaced(0.01, 1.0, 5)

    def hyperparams(self) -> HyperParams:
        try:
            return HyperParams(alpha=self.alpha, beta=self.beta, nu=self.nu,
                               lambda_=self.lambda_, xi=self.xi, eta_w=self.eta_w,
                               zeta=self.zeta, eps_gamma=self.eps_gamma,
                               local_loops=self.local_loops, rounds=self.rounds)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def samples_per_client(self) -> list:
        """Expand n_samples to one count per client."""
        if len(self.n_samples) == 1:
            return [self.n_samples[0]] * self.clients
        if len(self.n_samples) != self.clients:
            raise ConfigError(
                f"n_samples lists {len(self.n_samples)} values for {self.clients} clients")
        return list(self.n_samples)

    def validate(self) -> "ExperimentConfig":
        if self.d < 2:
            raise ConfigError("d must be >= 2")
        if self.clients < 1:
            raise ConfigError("clients must be >= 1")
        if not 0 < self.q <= 1:
            raise ConfigError("q must be in (0, 1]")
        if self.sigma_w < 0:
            raise ConfigError("sigma_w must be >= 0")
        if any(n < 1 for n in self.n_samples):
            raise ConfigError("n_samples entries must be >= 1")
        if self.scheduler not in ("sequential", "threads"):
            raise ConfigError("scheduler must be 'sequential' or 'threads'")
        self.samples_per_client()
        self.hyperparams()
        return self


# config-file key -> dataclass field (identical except for the keyword clash)
_KEY_TO_FIELD = {f.name if f.name != "lambda_" else "lambda": f.name
                 for f in fields(ExperimentConfig)}
_INT_FIELDS = {"local_loops", "rounds", "d", "clients", "seed", "max_iter"}
_TUPLE_FIELDS = {"n_samples", "beta_grid", "nu_grid", "lambda_grid"}


def _parse_value(field_name: str, raw: str):
    try:
        if field_name in _TUPLE_FIELDS:
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            if field_name == "n_samples":
                return tuple(int(p) for p in parts)
            return tuple(float(p) for p in parts)
        if field_name in _INT_FIELDS:
            return int(raw)
        if field_name == "scheduler":
            return raw
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {field_name!r}: {raw!r}") from exc


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = base or ExperimentConfig()
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        field_name = _KEY_TO_FIELD[key]
        overrides[field_name] = _parse_value(field_name, raw)
    return replace(cfg, **overrides).validate()


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, base)


def config_text(cfg: ExperimentConfig) -> str:
    """Resolved configuration in the same flat format, deterministic order."""
    lines = []
    for f in fields(ExperimentConfig):
        key = "lambda" if f.name == "lambda_" else f.name
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
