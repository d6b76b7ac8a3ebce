"""Over-smoothing sweep and random-search generalization study.

The sweep embeds each method once for the full hop budget, snapshots the
state at every hop, and scores each snapshot by clustering it and comparing
against the true labels with v-measure. Scores are normalized per method by
that method's own maximum so the hop trends are comparable across methods.

The generalization study samples embedding and classifier hyperparameters
jointly, trains once per sample, and records (validation loss, test
accuracy) pairs whose correlation summarizes how well model selection on
validation loss transfers to unseen data.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .aggregate import Aggregator
from .datasets import TEST, TRAIN, VALID, Dataset
from .embed import EmbedConfig, Method, embed, hop_states
from .gbdt import GbdtParams, gbdt_predict, gbdt_train
from .metrics import accuracy, kmeans, pearson_correlation, standardize, v_measure


@dataclass
class SweepResult:
    method: Method
    v_measures: np.ndarray  # raw score at hops 1..K
    normalized: np.ndarray  # raw / max(raw); all ones if scores are all zero
    argmax_k: int  # 1-based hop of the best raw score (first max)


@dataclass
class HpoRecord:
    params: dict
    valid_ce: float  # +inf marks a failed run
    test_accuracy: float


@dataclass(frozen=True)
class SearchSpace:
    """Uniform sampling ranges, inclusive for integers; learning_rate and
    reg_lambda are sampled log-uniformly."""

    k: tuple[int, int] = (1, 10)
    d: tuple[int, int] = (4, 32)
    learning_rate: tuple[float, float] = (0.03, 0.3)
    max_depth: tuple[int, int] = (3, 8)
    reg_lambda: tuple[float, float] = (0.1, 10.0)
    subsample: tuple[float, float] = (0.6, 1.0)
    aggregators: tuple[str, ...] = ("mean", "symnorm")
    n_rounds: int = 200
    patience: int = 10


def normalize_scores(raw) -> np.ndarray:
    """Divide by the maximum; the best hop scores exactly 1.0. Constant
    (including all-zero) inputs normalize to all ones."""
    raw = np.asarray(raw, dtype=np.float64)
    top = raw.max()
    if top <= 0.0:
        return np.ones_like(raw)
    return raw / top


def oversmoothing_sweep(
    g,
    X,
    y,
    methods: list[Method],
    max_hops: int,
    k_clusters: int | None = None,
    seed: int = 0,
    kmeans_restarts: int = 1,
    threads: int = 1,
) -> list[SweepResult]:
    """Score every (method, hop) cell by standardize -> kmeans -> v-measure.

    Embedding dimension is pinned to the input feature width so no method
    gets to resize; mean aggregation is used throughout. Each cell owns an
    RNG seeded by `seed ^ cell_index`, so results do not depend on the
    execution schedule.
    """
    y = np.asarray(y)
    if max_hops < 1:
        raise ValueError(f"max_hops must be >= 1, got {max_hops}")
    if k_clusters is None or k_clusters <= 0:
        k_clusters = int(np.unique(y).size)
    width = np.asarray(X).shape[1]

    states: list[list[np.ndarray]] = []
    for method in methods:
        cfg = EmbedConfig(k=max_hops, d=width, aggregator=Aggregator.MEAN, method=method)
        states.append([h for h, _ in hop_states(g, X, cfg)])

    def run_cell(cell) -> float:
        mi, ki = cell
        cell_seed = seed ^ (mi * max_hops + ki)
        z = standardize(states[mi][ki])
        assign = kmeans(z, k_clusters, seed=cell_seed, n_restarts=kmeans_restarts)
        return v_measure(y, assign)

    cells = [(mi, ki) for mi in range(len(methods)) for ki in range(max_hops)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(run_cell, cells))
    else:
        scores = [run_cell(c) for c in cells]

    results = []
    for mi, method in enumerate(methods):
        raw = np.array(scores[mi * max_hops : (mi + 1) * max_hops])
        results.append(
            SweepResult(
                method=method,
                v_measures=raw,
                normalized=normalize_scores(raw),
                argmax_k=int(np.argmax(raw)) + 1,
            )
        )
    return results


def _sample_params(space: SearchSpace, rng: np.random.Generator) -> dict:
    def log_uniform(lo, hi):
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    return {
        "k": int(rng.integers(space.k[0], space.k[1] + 1)),
        "d": int(rng.integers(space.d[0], space.d[1] + 1)),
        "aggregator": space.aggregators[int(rng.integers(len(space.aggregators)))],
        "learning_rate": log_uniform(*space.learning_rate),
        "max_depth": int(rng.integers(space.max_depth[0], space.max_depth[1] + 1)),
        "reg_lambda": log_uniform(*space.reg_lambda),
        "subsample": float(rng.uniform(*space.subsample)),
        "n_rounds": space.n_rounds,
        "patience": space.patience,
        "seed": int(rng.integers(2**31)),
    }


def _execute_run(dataset: Dataset, method: Method, sampled: dict) -> tuple[float, float]:
    cfg = EmbedConfig(
        k=sampled["k"],
        d=sampled["d"],
        aggregator=Aggregator(sampled["aggregator"]),
        method=method,
    )
    emb = embed(dataset.graph, dataset.X, cfg).embeddings
    tr = dataset.indices(TRAIN)
    va = dataset.indices(VALID)
    te = dataset.indices(TEST)
    params = GbdtParams(
        learning_rate=sampled["learning_rate"],
        max_depth=sampled["max_depth"],
        n_rounds=sampled["n_rounds"],
        reg_lambda=sampled["reg_lambda"],
        patience=sampled["patience"],
        subsample=sampled["subsample"],
        seed=sampled["seed"],
    )
    model = gbdt_train(emb[tr], dataset.y[tr], emb[va], dataset.y[va], params)
    test_acc = accuracy(gbdt_predict(model, emb[te]), dataset.y[te])
    return model.best_valid_ce, test_acc


def random_search(
    space: SearchSpace,
    n_runs: int,
    seed: int,
    dataset: Dataset,
    method: Method = Method.PCAPASS,
    threads: int = 1,
) -> list[HpoRecord]:
    """Independent uniform samples over `space`; each run embeds, trains and
    records (validation loss, test accuracy). A failed run is recorded with
    infinite loss instead of aborting the search. Run i draws from an RNG
    seeded with `seed ^ i`, so the record list is schedule-independent."""
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")

    def one(i: int) -> HpoRecord:
        rng = np.random.default_rng(seed ^ i)
        sampled = _sample_params(space, rng)
        try:
            valid_ce, test_acc = _execute_run(dataset, method, sampled)
        except Exception:
            return HpoRecord(params=sampled, valid_ce=math.inf, test_accuracy=0.0)
        return HpoRecord(params=sampled, valid_ce=valid_ce, test_accuracy=test_acc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(n_runs)))
    return [one(i) for i in range(n_runs)]


def hpo_summary(records: list[HpoRecord]) -> dict:
    """Best-by-validation-loss run plus the Pearson correlation between
    validation loss and test accuracy over the successful runs."""
    ok = [(i, r) for i, r in enumerate(records) if math.isfinite(r.valid_ce)]
    summary: dict = {"n_runs": len(records), "n_failed": len(records) - len(ok)}
    if not ok:
        summary.update(best_run=None, best_valid_ce=None, best_run_test_accuracy=None,
                       pearson_valid_ce_vs_test_accuracy=None)
        return summary
    best_i, best = min(ok, key=lambda pair: (pair[1].valid_ce, pair[0]))
    summary["best_run"] = best_i
    summary["best_valid_ce"] = best.valid_ce
    summary["best_run_test_accuracy"] = best.test_accuracy
    try:
        summary["pearson_valid_ce_vs_test_accuracy"] = pearson_correlation(
            [r.valid_ce for _, r in ok], [r.test_accuracy for _, r in ok]
        )
    except ValueError:
        summary["pearson_valid_ce_vs_test_accuracy"] = None
    return summary
