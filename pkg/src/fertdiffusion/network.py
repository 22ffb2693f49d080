"""Watts-Strogatz small-world peer network and adoption snapshots."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

MAX_CONNECT_RETRIES = 100


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class SocialNetwork:
    """Undirected simple graph over farm positions ``0..n-1``.

    ``seed`` is the seed that produced this graph, which may be larger than
    the requested seed when connectivity forced regeneration.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    k: int
    p: float
    seed: int
    requested_seed: int | None = None
    n_rewired: int = 0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self.adjacency], dtype=int)

    @property
    def n_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs if i < j]

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def matrix(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix (cached)."""
        if "csr" not in self._cache:
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            indptr[1:] = np.cumsum(self.degrees)
            indices = np.fromiter((j for nbrs in self.adjacency for j in nbrs), dtype=np.int64, count=indptr[-1])
            data = np.ones(len(indices), dtype=float)
            self._cache["csr"] = sparse.csr_matrix((data, indices, indptr), shape=(self.n, self.n))
        return self._cache["csr"]

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        count, _ = connected_components(self.matrix(), directed=False)
        return count == 1

    def to_edge_csv(self, path: str | Path) -> None:
        """Two-column edge list, one ``i<j`` pair per row."""
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["source", "target"])
            writer.writerows(self.edges())

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_cache"] = {}
        return state


def _ws_attempt(n: int, k: int, p: float, seed: int) -> tuple[list[set[int]], int]:
    rng = np.random.default_rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    half = k // 2
    for i in range(n):
        for d in range(1, half + 1):
            j = (i + d) % n
            adj[i].add(j)
            adj[j].add(i)
    rewired = 0
    # Lattice edges visited offset-major, then by source node.
    for d in range(1, half + 1):
        for i in range(n):
            j = (i + d) % n
            if j not in adj[i] or rng.random() >= p:
                continue
            if len(adj[i]) >= n - 1:
                continue
            # Redraw until the new endpoint is neither i nor an existing neighbour.
            while True:
                w = int(rng.integers(n))
                if w != i and w not in adj[i]:
                    break
            adj[i].discard(j)
            adj[j].discard(i)
            adj[i].add(w)
            adj[w].add(i)
            rewired += 1
    return adj, rewired


def watts_strogatz(n: int, k: int, p: float, seed: int, *, max_retries: int = MAX_CONNECT_RETRIES) -> SocialNetwork:
    """Connected Watts-Strogatz graph.

    Ring lattice with ``k/2`` neighbours per side; each lattice edge
    ``(i, i+d)`` has its far endpoint rewired with probability ``p``.
    A disconnected draw is regenerated with ``seed + 1``, up to
    ``max_retries`` times.
    """
    if not (isinstance(n, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise NetworkError("n and k must be integers")
    if k < 2 or k % 2:
        raise NetworkError(f"k must be an even integer >= 2, got {k}")
    if n <= k:
        raise NetworkError(f"need n > k, got n={n}, k={k}")
    if not 0.0 <= p <= 1.0:
        raise NetworkError(f"p must lie in [0, 1], got {p}")
    for attempt in range(max_retries + 1):
        s = seed + attempt
        adj, rewired = _ws_attempt(int(n), int(k), float(p), s)
        net = SocialNetwork(
            n=int(n),
            adjacency=tuple(tuple(sorted(nbrs)) for nbrs in adj),
            k=int(k),
            p=float(p),
            seed=s,
            requested_seed=seed,
            n_rewired=rewired,
        )
        if net.is_connected():
            return net
    raise NetworkError(f"no connected graph within {max_retries} retries from seed {seed}")


def peer_signal(i: int, adopted: Sequence[bool] | np.ndarray, net: SocialNetwork) -> float:
    """Share of node ``i``'s neighbours that have adopted (0 for isolated nodes)."""
    if not 0 <= i < net.n:
        raise IndexError(f"node {i} out of range for network of {net.n} nodes")
    nbrs = net.adjacency[i]
    if not nbrs:
        return 0.0
    return sum(bool(adopted[j]) for j in nbrs) / len(nbrs)


def peer_signals(adopted: np.ndarray, net: SocialNetwork) -> np.ndarray:
    """Vectorised :func:`peer_signal` for every node."""
    deg = net.degrees.astype(float)
    counts = net.matrix() @ np.asarray(adopted, dtype=float)
    out = np.zeros(net.n, dtype=float)
    np.divide(counts, deg, out=out, where=deg > 0)
    return out


@dataclass(frozen=True)
class Snapshot:
    """Node-state table for one year."""

    year: int
    node: np.ndarray
    adopted: np.ndarray
    degree: np.ndarray
    size_norm: np.ndarray

    @property
    def adopter_count(self) -> int:
        return int(self.adopted.sum())

    @property
    def adoption_share(self) -> float:
        return float(self.adopted.mean()) if len(self.adopted) else 0.0

    def rows(self) -> list[tuple[int, int, int, float]]:
        return [
            (int(i), int(a), int(d), float(s))
            for i, a, d, s in zip(self.node, self.adopted, self.degree, self.size_norm)
        ]

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["year", "node", "adopted", "degree", "size_norm"])
            for node, a, d, s in self.rows():
                writer.writerow([self.year, node, a, d, repr(s)])


def snapshot(adopted: Sequence[bool] | np.ndarray, year: int, net: SocialNetwork, size_norm: Sequence[float] | None = None) -> Snapshot:
    adopted = np.asarray(adopted, dtype=bool)
    if size_norm is None:
        size_norm = np.zeros(net.n)
    return Snapshot(
        year=int(year),
        node=np.arange(net.n),
        adopted=adopted.copy(),
        degree=net.degrees,
        size_norm=np.asarray(size_norm, dtype=float),
    )


__all__ = [
    "NetworkError",
    "SocialNetwork",
    "Snapshot",
    "peer_signal",
    "peer_signals",
    "snapshot",
    "watts_strogatz",
]
