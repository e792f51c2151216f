"""Graph families and their edge-vertex incidence matrices.

Every builder returns a :class:`Graph` with a canonical edge ordering:
edges are stored as ``(i, j)`` pairs with ``i < j`` (0-based vertex
indices) and sorted lexicographically, so the incidence matrix of a
given family/size/seed is reproducible bit-for-bit.

The incidence matrix convention is ``+1`` at the lower-indexed endpoint
and ``-1`` at the higher one, one row per edge.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class GraphGenerationError(RuntimeError):
    """Raised when a randomized builder exhausts its retry budget."""


@dataclass
class Graph:
    """Undirected simple graph with a canonical edge list.

    Attributes
    ----------
    n : int
        Number of vertices, labeled ``0 .. n-1``.
    edges : np.ndarray
        Integer array of shape ``(m, 2)``; each row ``(i, j)`` with
        ``i < j``, rows sorted lexicographically, no duplicates.
    family : str
        Family tag (``path``, ``grid``, ``hypercube``, ``complete``,
        ``star``, ``cycle_power``, ``erdos_renyi``, ``random_regular``,
        ``custom``).
    params : dict
        Family parameters (e.g. ``{"d": 2, "N": 8}`` for a grid).
    """

    n: int
    edges: np.ndarray
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        _validate_edges(self.n, self.edges)
        self.edges.setflags(write=False)

    @property
    def m(self) -> int:
        return self.edges.shape[0]


def _validate_edges(n: int, edges: np.ndarray) -> None:
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    if edges.size == 0:
        return
    if edges.min() < 0 or edges.max() >= n:
        raise ValueError("edge endpoint out of range")
    if np.any(edges[:, 0] >= edges[:, 1]):
        raise ValueError("edges must satisfy i < j (no self-loops)")
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    if not np.array_equal(order, np.arange(len(edges))):
        raise ValueError("edges must be sorted lexicographically")
    if len(np.unique(edges, axis=0)) != len(edges):
        raise ValueError("duplicate edges are not allowed")


def _canonical_edges(pairs) -> np.ndarray:
    """Sort endpoints within each pair, then sort pairs lexicographically."""
    e = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    e = np.sort(e, axis=1)
    order = np.lexsort((e[:, 1], e[:, 0]))
    return e[order]


# ---------------------------------------------------------------------------
# deterministic families


def build_path(N: int) -> Graph:
    """Path graph on N vertices: edges (i, i+1)."""
    if N < 2:
        raise ValueError("path graph needs N >= 2")
    i = np.arange(N - 1, dtype=np.int64)
    return Graph(N, np.column_stack([i, i + 1]), family="path", params={"N": N})


def build_augmented_path(N: int) -> sp.csr_matrix:
    """Square N x N anchored difference matrix for the path.

    Row 0 is the anchor ``theta_1`` itself; row i computes
    ``theta_i - theta_{i-1}``.  The matrix is invertible with inverse
    equal to the cumulative-sum (lower-triangular all-ones) matrix.
    Not a graph incidence matrix: the anchor row has a single entry.
    """
    if N < 1:
        raise ValueError("augmented path needs N >= 1")
    rows = [0]
    cols = [0]
    data = [1.0]
    for i in range(1, N):
        rows += [i, i]
        cols += [i - 1, i]
        data += [-1.0, 1.0]
    return sp.csr_matrix((data, (rows, cols)), shape=(N, N))


def grid_linear_index(multi: np.ndarray, N: int) -> np.ndarray:
    """Column-major linearization: coordinate 0 varies fastest."""
    multi = np.asarray(multi, dtype=np.int64)
    strides = N ** np.arange(multi.shape[-1], dtype=np.int64)
    return multi @ strides


def build_grid(d: int, N: int) -> Graph:
    """d-dimensional grid with side length N, column-major vertex order.

    Vertex ``(i_1, ..., i_d)`` (0-based coordinates) maps to the linear
    index ``i_1 + N*i_2 + ... + N^(d-1)*i_d``; edges connect vertices
    differing by one in exactly one coordinate.
    """
    if d < 1:
        raise ValueError("grid dimension must be >= 1")
    if N < 2:
        raise ValueError("grid side length must be >= 2")
    n = N**d
    if n > 16_000_000:
        raise ValueError(f"grid {N}^{d} = {n} vertices exceeds the supported size")
    idx = np.arange(n, dtype=np.int64)
    pairs = []
    for axis in range(d):
        step = N**axis
        coord = (idx // step) % N
        src = idx[coord < N - 1]
        pairs.append(np.column_stack([src, src + step]))
    edges = _canonical_edges(np.concatenate(pairs, axis=0))
    return Graph(n, edges, family="grid", params={"d": d, "N": N})


def build_hypercube(d: int) -> Graph:
    """d-dimensional hypercube: vertices are bit strings, edges flip one bit."""
    if d < 1:
        raise ValueError("hypercube dimension must be >= 1")
    n = 2**d
    idx = np.arange(n, dtype=np.int64)
    pairs = []
    for b in range(d):
        src = idx[(idx >> b) & 1 == 0]
        pairs.append(np.column_stack([src, src + (1 << b)]))
    edges = _canonical_edges(np.concatenate(pairs, axis=0))
    return Graph(n, edges, family="hypercube", params={"d": d})


def build_complete(n: int) -> Graph:
    """Complete graph K_n."""
    if n < 2:
        raise ValueError("complete graph needs n >= 2")
    i, j = np.triu_indices(n, k=1)
    return Graph(n, _canonical_edges(np.column_stack([i, j])), family="complete", params={})


def build_star(n: int) -> Graph:
    """Star S_n: vertex 0 is the center, connected to all others."""
    if n < 2:
        raise ValueError("star graph needs n >= 2")
    j = np.arange(1, n, dtype=np.int64)
    return Graph(n, np.column_stack([np.zeros(n - 1, dtype=np.int64), j]), family="star", params={})


def build_cycle_power(n: int, k: int) -> Graph:
    """k-th power of the cycle C_n: i ~ j iff circular distance <= k."""
    if n < 3:
        raise ValueError("cycle power needs n >= 3")
    if k < 1 or 2 * k > n:
        raise ValueError("cycle power requires 1 <= k <= n/2")
    pairs = []
    for i in range(n):
        for step in range(1, k + 1):
            j = (i + step) % n
            if i != j:
                pairs.append((min(i, j), max(i, j)))
    edges = np.unique(_canonical_edges(pairs), axis=0)
    return Graph(n, edges, family="cycle_power", params={"n": n, "k": k})


# ---------------------------------------------------------------------------
# random families


def build_erdos_renyi(n: int, p: float, seed: int, max_retries: int = 100) -> Graph:
    """Connected Erdos-Renyi draw G(n, p).

    Disconnected draws are resampled (up to ``max_retries``) because the
    denoising theory assumes a connected graph.  Deterministic given
    ``seed``.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0 < p <= 1:
        raise ValueError("need 0 < p <= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_retries):
        mask = rng.random(len(iu)) < p
        edges = _canonical_edges(np.column_stack([iu[mask], ju[mask]]))
        g = Graph(n, edges, family="erdos_renyi", params={"p": p, "seed": seed})
        if is_connected(g):
            return g
    raise GraphGenerationError(
        f"no connected Erdos-Renyi draw with n={n}, p={p} in {max_retries} attempts"
    )


def build_random_regular(n: int, d: int, seed: int, max_retries: int = 1000) -> Graph:
    """Random d-regular graph via the pairing (configuration) model.

    The full pairing is restarted whenever it produces a self-loop, a
    multi-edge, or a disconnected graph.  Deterministic given ``seed``.
    """
    if n < 2 or d < 1 or d >= n:
        raise ValueError("need 1 <= d < n")
    if (n * d) % 2 != 0:
        raise ValueError("n * d must be even")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(max_retries):
        perm = rng.permutation(stubs)
        a, b = perm[0::2], perm[1::2]
        if np.any(a == b):
            continue
        pairs = np.sort(np.column_stack([a, b]), axis=1)
        uniq = np.unique(pairs, axis=0)
        if len(uniq) != len(pairs):
            continue
        g = Graph(n, _canonical_edges(uniq), family="random_regular",
                  params={"d": d, "seed": seed})
        if is_connected(g):
            return g
    raise GraphGenerationError(
        f"no simple connected {d}-regular pairing with n={n} in {max_retries} attempts"
    )


# ---------------------------------------------------------------------------
# derived objects


def incidence(g: Graph) -> sp.csr_matrix:
    """Edge-vertex incidence matrix D (m x n), rows in canonical edge order.

    Row e for edge (i, j) with i < j has +1 at column i and -1 at column j,
    so ``D.T @ D`` is the unnormalized graph Laplacian.
    """
    m = g.m
    if m == 0:
        return sp.csr_matrix((0, g.n))
    rows = np.repeat(np.arange(m, dtype=np.int64), 2)
    cols = g.edges.reshape(-1)
    data = np.tile(np.array([1.0, -1.0]), m)
    return sp.csr_matrix((data, (rows, cols)), shape=(m, g.n))


def adjacency(g: Graph) -> sp.csr_matrix:
    i, j = g.edges[:, 0], g.edges[:, 1]
    data = np.ones(2 * g.m)
    return sp.csr_matrix((data, (np.concatenate([i, j]), np.concatenate([j, i]))),
                         shape=(g.n, g.n))


def degrees(g: Graph) -> np.ndarray:
    deg = np.zeros(g.n, dtype=np.int64)
    np.add.at(deg, g.edges[:, 0], 1)
    np.add.at(deg, g.edges[:, 1], 1)
    return deg


def max_degree(g: Graph) -> int:
    return int(degrees(g).max()) if g.m else 0


def is_connected(g: Graph) -> bool:
    """True iff the graph has a single connected component."""
    if g.n == 1:
        return True
    if g.m == 0:
        return False
    ncomp, _ = connected_components(adjacency(g), directed=False)
    return ncomp == 1


# ---------------------------------------------------------------------------
# edge-list text format for custom graphs (1-based, '#' comments)


def parse_edge_list(text: str, n: int | None = None) -> Graph:
    """Parse the ``i j`` edge-list format (1-based indices, '#' comments)."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"line {lineno}: expected 'i j', got {raw!r}")
        i, j = int(fields[0]), int(fields[1])
        if i < 1 or j < 1 or i == j:
            raise ValueError(f"line {lineno}: invalid edge ({i}, {j})")
        pairs.append((i - 1, j - 1))
    if not pairs:
        raise ValueError("edge list is empty")
    edges = np.unique(_canonical_edges(pairs), axis=0)
    nv = n if n is not None else int(edges.max()) + 1
    return Graph(nv, edges, family="custom", params={})


def read_edge_list(path, n: int | None = None) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read(), n=n)


def write_edge_list(path, g: Graph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {g.family} graph, n={g.n}, m={g.m}\n")
        for i, j in g.edges:
            fh.write(f"{i + 1} {j + 1}\n")
