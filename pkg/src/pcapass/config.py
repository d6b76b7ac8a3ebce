"""Flat "key = value" run configuration.

Precedence: built-in defaults, then the config file, then command-line
flags. Unknown keys are errors so typos never pass silently.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


@dataclass
class RunConfig:
    # global
    seed: int = 0
    threads: int = 1
    out: str = "run_out"
    dataset_dir: str = ""  # empty: <out>/dataset
    embeddings_path: str = ""  # empty: <out>/embeddings.csv
    model_path: str = ""  # empty: <out>/model.bin
    # synthetic dataset
    n_nodes: int = 2000
    n_classes: int = 4
    p_in: float = 0.05
    p_out: float = 0.005
    n_features: int = 16
    feature_signal: float = 1.0
    train_frac: float = 0.6
    valid_frac: float = 0.2
    test_frac: float = 0.2
    # embedding
    method: str = "pcapass"
    aggregator: str = "mean"
    k: int = 8
    d: int = 16
    embed_binary: bool = False
    # classifier
    learning_rate: float = 0.1
    max_depth: int = 6
    n_rounds: int = 500
    reg_lambda: float = 1.0
    min_child_hessian: float = 1.0
    patience: int = 10
    n_bins: int = 256
    subsample: float = 1.0
    # over-smoothing sweep
    sweep_hops: int = 30
    sweep_methods: str = "pcapass,message_passing,skip_connections"
    k_clusters: int = 0  # 0: number of distinct labels
    kmeans_restarts: int = 1
    # hyperparameter search
    hpo_runs: int = 50
    hpo_k_min: int = 1
    hpo_k_max: int = 10
    hpo_d_min: int = 4
    hpo_d_max: int = 32
    hpo_lr_min: float = 0.03
    hpo_lr_max: float = 0.3
    hpo_depth_min: int = 3
    hpo_depth_max: int = 8
    hpo_lambda_min: float = 0.1
    hpo_lambda_max: float = 10.0
    hpo_subsample_min: float = 0.6
    hpo_subsample_max: float = 1.0
    hpo_rounds: int = 200
    hpo_aggregators: str = "mean,symnorm"


_HELP = {
    "seed": "global RNG seed; feeds data generation, training and analyses",
    "threads": "worker count for parallel sweep cells and search runs",
    "out": "output directory for the command's files",
    "dataset_dir": "dataset directory (default: <out>/dataset)",
    "embeddings_path": "embeddings CSV path (default: <out>/embeddings.csv)",
    "model_path": "classifier model path (default: <out>/model.bin)",
    "n_nodes": "synthetic graph size",
    "n_classes": "number of block classes",
    "p_in": "within-block edge probability",
    "p_out": "cross-block edge probability",
    "n_features": "node feature dimension",
    "feature_signal": "distance between class feature centroids (unit noise)",
    "train_frac": "train split fraction (stratified by class)",
    "valid_frac": "validation split fraction",
    "test_frac": "test split fraction",
    "method": "embedder: pcapass | message_passing | skip_connections",
    "aggregator": "neighborhood aggregation: mean | symnorm",
    "k": "number of aggregation hops",
    "d": "embedding dimension (pcapass only)",
    "embed_binary": "also write a binary embeddings file",
    "learning_rate": "boosting shrinkage per round",
    "max_depth": "maximum tree depth",
    "n_rounds": "maximum boosting rounds",
    "reg_lambda": "L2 leaf weight regularizer",
    "min_child_hessian": "minimum hessian sum per child to allow a split",
    "patience": "rounds without validation improvement before stopping",
    "n_bins": "histogram bins per feature",
    "subsample": "row fraction sampled per boosting round",
    "sweep_hops": "maximum hop count scanned by the over-smoothing sweep",
    "sweep_methods": "comma-separated methods to sweep",
    "k_clusters": "clusters for the sweep's k-means (0: distinct label count)",
    "kmeans_restarts": "k-means seeding restarts per sweep cell",
    "hpo_runs": "number of random-search runs",
    "hpo_k_min": "search range for hops, lower bound",
    "hpo_k_max": "search range for hops, upper bound",
    "hpo_d_min": "search range for embedding dimension, lower bound",
    "hpo_d_max": "search range for embedding dimension, upper bound",
    "hpo_lr_min": "learning-rate range (log-uniform), lower bound",
    "hpo_lr_max": "learning-rate range (log-uniform), upper bound",
    "hpo_depth_min": "tree-depth range, lower bound",
    "hpo_depth_max": "tree-depth range, upper bound",
    "hpo_lambda_min": "reg_lambda range (log-uniform), lower bound",
    "hpo_lambda_max": "reg_lambda range (log-uniform), upper bound",
    "hpo_subsample_min": "subsample range, lower bound",
    "hpo_subsample_max": "subsample range, upper bound",
    "hpo_rounds": "boosting round cap during search runs",
    "hpo_aggregators": "comma-separated aggregators sampled during search",
}

_FIELDS = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, raw: str):
    typ = _FIELDS[key]
    raw = raw.strip()
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        if typ == "bool":
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r} (expected {typ})") from None


def parse_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: dict = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"{path}: line {lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def build_config(config_path=None, overrides: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    if config_path:
        for key, value in parse_config_file(config_path).items():
            setattr(cfg, key, value)
    for key, value in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, value)
    return cfg


def config_help_text() -> str:
    lines = ["configuration keys (key = default):"]
    for f in dataclasses.fields(RunConfig):
        lines.append(f"  {f.name} = {f.default!r:<40} {_HELP[f.name]}")
    return "\n".join(lines)
