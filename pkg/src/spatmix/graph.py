"""Adjacency structure over regions: neighbor lists, lattice builders, label counts.

A neighborhood system is a symmetric, loop-free relation on node indices
0..n-1.  Nodes with no neighbors are allowed (islands attached later, or
never).  Graphs are immutable once built and safe to share across threads.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ParseError


class AdjacencyGraph:
    """Symmetric neighbor structure over ``n`` nodes.

    Stored in CSR form (``indptr``/``indices``) so that per-node neighbor
    lists are contiguous views and whole-graph label counts reduce to one
    sparse matrix product.
    """

    def __init__(self, n, neighbors):
        n = int(n)
        if n < 1:
            raise ValueError("graph needs at least one node")
        if len(neighbors) != n:
            raise ValueError(f"expected {n} neighbor lists, got {len(neighbors)}")
        indptr = np.zeros(n + 1, dtype=np.int64)
        chunks = []
        for i, nb in enumerate(neighbors):
            nb = np.unique(np.asarray(nb, dtype=np.int64))
            if nb.size and (nb.min() < 0 or nb.max() >= n):
                raise ValueError(f"neighbor index out of range at node {i}")
            if np.any(nb == i):
                raise ValueError(f"self-loop at node {i}")
            chunks.append(nb)
            indptr[i + 1] = indptr[i] + nb.size
        self._n = n
        self._indptr = indptr
        self._indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
        self._adj = None
        self._nbr_lists = None
        self._check_symmetry()

    def _check_symmetry(self):
        a = self.adjacency()
        if (a != a.T).nnz != 0:
            raise ValueError("adjacency is not symmetric: j in N_i must imply i in N_j")

    @property
    def n(self):
        return self._n

    @property
    def degrees(self):
        """Neighbor count per node, shape (n,)."""
        return np.diff(self._indptr)

    @property
    def num_edges(self):
        """Number of undirected edges."""
        return self._indices.size // 2

    def neighbors(self, i):
        """Sorted neighbor indices of node ``i`` (read-only view)."""
        nb = self._indices[self._indptr[i]:self._indptr[i + 1]]
        nb.flags.writeable = False
        return nb

    def adjacency(self):
        """Binary adjacency matrix as scipy CSR (int64 data, cached)."""
        if self._adj is None:
            data = np.ones(self._indices.size, dtype=np.int64)
            self._adj = sp.csr_matrix(
                (data, self._indices, self._indptr), shape=(self._n, self._n)
            )
        return self._adj

    def neighbor_lists(self):
        """Neighbor indices as plain Python lists (cached; for tight loops)."""
        if self._nbr_lists is None:
            idx = self._indices.tolist()
            ptr = self._indptr.tolist()
            self._nbr_lists = [idx[ptr[i]:ptr[i + 1]] for i in range(self._n)]
        return self._nbr_lists

    def edges(self):
        """Undirected edge list as (i, j) pairs with i < j, sorted."""
        out = []
        for i in range(self._n):
            for j in self.neighbors(i):
                if i < j:
                    out.append((i, int(j)))
        return out


@dataclass
class NeighborCounts:
    """Per-(node, component) neighbor tallies for a labeling.

    ``same[i, k]`` counts neighbors of i carrying label k, ``other[i, k]``
    counts the rest, so same + other equals the node degree in every row.
    """

    same: np.ndarray
    other: np.ndarray

    @property
    def difference(self):
        """same - other, the interaction statistic of the label prior."""
        return self.same - self.other


def build_from_edges(n, edges):
    """Build a graph from undirected edge pairs; duplicates collapse."""
    nbrs = [[] for _ in range(int(n))]
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"self-loop edge ({i},{j}) violates the neighborhood axioms")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) out of range for n={n}")
        nbrs[i].append(j)
        nbrs[j].append(i)
    return AdjacencyGraph(n, nbrs)


def build_lattice(side, scheme="rook"):
    """Square lattice of side x side nodes, no wrap-around at borders.

    ``rook`` links the 4 axis neighbors, ``queen`` adds the 4 diagonals.
    Node index of cell (r, c) is r*side + c.
    """
    side = int(side)
    if side < 2:
        raise ValueError("lattice side must be at least 2")
    if scheme not in ("rook", "queen"):
        raise ValueError(f"unknown lattice scheme {scheme!r}")
    edges = []
    for r in range(side):
        for c in range(side):
            i = r * side + c
            if c + 1 < side:
                edges.append((i, i + 1))
            if r + 1 < side:
                edges.append((i, i + side))
            if scheme == "queen" and r + 1 < side:
                if c + 1 < side:
                    edges.append((i, i + side + 1))
                if c - 1 >= 0:
                    edges.append((i, i + side - 1))
    return build_from_edges(side * side, edges)


def neighbor_counts(graph, labels, K):
    """Count, for every node and component, neighbors in and out of it."""
    labels = np.asarray(labels)
    K = int(K)
    if labels.shape != (graph.n,):
        raise ValueError(f"labels must have shape ({graph.n},), got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= K):
        raise ValueError(f"labels must lie in [0, {K})")
    onehot = np.zeros((graph.n, K), dtype=np.int64)
    onehot[np.arange(graph.n), labels] = 1
    same = np.asarray(graph.adjacency() @ onehot)
    other = graph.degrees[:, None] - same
    return NeighborCounts(same=same, other=other)


def read_edge_list(path, n):
    """Parse the edge-list text format: one '<i> <j>' pair per line, '#' comments."""
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected two indices, got {line!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: non-integer index in {line!r}") from exc
            edges.append((i, j))
    return build_from_edges(n, edges)


def write_edge_list(graph, path):
    """Write the undirected edge list, one pair per line, i < j."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# edge list: two 0-based node indices per line\n")
        for i, j in graph.edges():
            fh.write(f"{i} {j}\n")
