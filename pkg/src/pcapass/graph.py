"""Immutable CSR graphs preprocessed to be bidirectional with self-loops."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True, eq=False)
class EdgeList:
    """Raw edge pairs over nodes 0..n_nodes-1.

    May contain duplicates and self-loops; `prepare` normalizes both.
    """

    n_nodes: int
    pairs: np.ndarray  # (m, 2) int64

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if self.n_nodes < 0:
            raise DataError(f"n_nodes must be non-negative, got {self.n_nodes}")
        if pairs.size and (pairs.min() < 0 or pairs.max() >= self.n_nodes):
            bad = pairs[(pairs < 0).any(axis=1) | (pairs >= self.n_nodes).any(axis=1)][0]
            raise DataError(
                f"edge ({bad[0]}, {bad[1]}) out of range for n_nodes={self.n_nodes}"
            )
        pairs.flags.writeable = False
        object.__setattr__(self, "pairs", pairs)

    @property
    def n_edges(self) -> int:
        return self.pairs.shape[0]


@dataclass(frozen=True, eq=False)
class CsrGraph:
    """Compressed sparse row adjacency; immutable after construction.

    After `prepare` the adjacency is symmetric, reflexive (every node has a
    self-loop), deduplicated, and each row's neighbor ids are strictly
    increasing. `degree[v]` counts neighbors including the self-loop.
    """

    n_nodes: int
    row_ptr: np.ndarray  # (n+1,) int64, non-decreasing
    col_idx: np.ndarray  # (nnz,) int64, strictly increasing within each row
    degree: np.ndarray  # (n,) int64

    def __post_init__(self):
        for name in ("row_ptr", "col_idx", "degree"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_idx[self.row_ptr[v] : self.row_ptr[v + 1]]

    @property
    def n_entries(self) -> int:
        return self.col_idx.shape[0]


def load_edge_list(path, n_nodes: int) -> EdgeList:
    """Parse a tab-separated edge file: one "src<TAB>dst" pair per line.

    Lines starting with '#' are comments; blank lines are ignored. Node ids
    are 0-based decimal integers and must be < n_nodes.
    """
    src, dst = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("#") or not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}: line {lineno}: expected 'src<TAB>dst'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataError(
                    f"{path}: line {lineno}: non-integer node id in {parts!r}"
                ) from None
            if not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise DataError(
                    f"{path}: line {lineno}: node id out of range for n_nodes={n_nodes}"
                )
            src.append(u)
            dst.append(v)
    pairs = np.array([src, dst], dtype=np.int64).T if src else np.empty((0, 2), np.int64)
    return EdgeList(n_nodes=n_nodes, pairs=pairs)


def prepare(edges: EdgeList) -> CsrGraph:
    """Build the CSR form used everywhere downstream.

    For every input edge (u, v) both directions are inserted, every node
    gets a self-loop, duplicates collapse, and rows are sorted. Idempotent:
    preparing the edges of a prepared graph reproduces it.
    """
    n = edges.n_nodes
    loops = np.arange(n, dtype=np.int64)
    u = np.concatenate([edges.pairs[:, 0], edges.pairs[:, 1], loops])
    v = np.concatenate([edges.pairs[:, 1], edges.pairs[:, 0], loops])
    order = np.lexsort((v, u))
    u, v = u[order], v[order]
    if u.size:
        keep = np.ones(u.size, dtype=bool)
        keep[1:] = (u[1:] != u[:-1]) | (v[1:] != v[:-1])
        u, v = u[keep], v[keep]
    counts = np.bincount(u, minlength=n)
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return CsrGraph(n_nodes=n, row_ptr=row_ptr, col_idx=v, degree=counts)


def degrees(g: CsrGraph) -> np.ndarray:
    """Per-node neighbor counts (self-loop included on prepared graphs)."""
    return np.diff(g.row_ptr)


def graphs_equal(a: CsrGraph, b: CsrGraph) -> bool:
    return (
        a.n_nodes == b.n_nodes
        and np.array_equal(a.row_ptr, b.row_ptr)
        and np.array_equal(a.col_idx, b.col_idx)
    )


def edge_list_of(g: CsrGraph) -> EdgeList:
    """Unique undirected edges (u < v) of a prepared graph, self-loops dropped."""
    rows = np.repeat(np.arange(g.n_nodes, dtype=np.int64), np.diff(g.row_ptr))
    mask = rows < g.col_idx
    pairs = np.stack([rows[mask], g.col_idx[mask]], axis=1)
    return EdgeList(n_nodes=g.n_nodes, pairs=pairs)
