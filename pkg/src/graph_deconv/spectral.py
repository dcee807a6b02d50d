"""Graphs, the Laplacian shift, its eigendecomposition, and the graph Fourier transform.

Vertices are labelled 1..N everywhere in the public interface. Arrays are
positional, so entry ``k`` of a length-N vector belongs to vertex ``k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum

SYMMETRY_TOL = 1e-10
DISTINCTNESS_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-8
SIGN_PIVOT_TOL = 1e-12

VERTEX = "vertex"
SPECTRAL = "spectral"


@dataclass(frozen=True)
class Graph:
    """Undirected, unweighted, finite graph on vertices 1..N.

    Edges are unordered pairs stored as tuples (i, j) with i < j. Self loops
    and duplicate edges are rejected.
    """

    n_vertices: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError(f"graph needs at least one vertex, got {self.n_vertices}")
        object.__setattr__(self, "edges", frozenset(normalize_edge(e) for e in self.edges))
        for i, j in self.edges:
            if not (1 <= i < j <= self.n_vertices):
                raise ValueError(f"edge ({i}, {j}) out of range for {self.n_vertices} vertices")

    def neighbors(self) -> list[list[int]]:
        """Adjacency lists indexed by vertex - 1, each sorted ascending."""
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, j in self.edges:
            adj[i - 1].append(j)
            adj[j - 1].append(i)
        for lst in adj:
            lst.sort()
        return adj

    def is_connected(self) -> bool:
        if self.n_vertices == 1:
            return True
        adj = self.neighbors()
        seen = {1}
        stack = [1]
        while stack:
            v = stack.pop()
            for w in adj[v - 1]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices


def normalize_edge(pair) -> tuple[int, int]:
    i, j = int(pair[0]), int(pair[1])
    if i == j:
        raise ValueError(f"self loop at vertex {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class SpectralBasis:
    """Orthonormal eigenmodes of a symmetric graph shift.

    ``modes`` holds the eigenvectors as columns; ``eigenvalues`` is sorted by
    ascending magnitude, with a (lambda, -lambda) tie ordered negative first.
    """

    modes: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.modes.shape[0]


@dataclass(frozen=True)
class SignalEnsemble:
    """M real signals of dimension N, rows are samples.

    ``domain`` is "vertex" or "spectral" and records which side of the graph
    Fourier transform the rows live on.
    """

    signals: np.ndarray
    domain: str = VERTEX

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.signals, dtype=float))
        if arr.ndim != 2:
            raise ValueError(f"signals must be a 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < 1:
            raise ValueError("ensemble needs at least one signal")
        if self.domain not in (VERTEX, SPECTRAL):
            raise ValueError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "signals", arr)

    @property
    def n_signals(self) -> int:
        return self.signals.shape[0]

    @property
    def n_vertices(self) -> int:
        return self.signals.shape[1]


def build_radius_graph(coords, radius: float) -> Graph:
    """Connect every pair of points within Euclidean distance ``radius``.

    ``coords`` is a sequence of (id, x, y) rows. Ids may be arbitrary but must
    be distinct; vertices are numbered 1..N in input order.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    rows = list(coords)
    if len(rows) < 2:
        raise ValueError(f"need at least 2 coordinates, got {len(rows)}")
    ids = [r[0] for r in rows]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate coordinate ids: {dupes}")
    xy = np.array([[float(r[1]), float(r[2])] for r in rows])
    n = len(rows)
    diff = xy[:, None, :] - xy[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    edges = set()
    r2 = float(radius) ** 2
    for i in range(n):
        for j in range(i + 1, n):
            if dist2[i, j] <= r2:
                edges.add((i + 1, j + 1))
    return Graph(n_vertices=n, edges=frozenset(edges))


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian D - A. Rows sum to zero."""
    lap = np.zeros((g.n_vertices, g.n_vertices))
    for i, j in g.edges:
        lap[i - 1, j - 1] = -1.0
        lap[j - 1, i - 1] = -1.0
        lap[i - 1, i - 1] += 1.0
        lap[j - 1, j - 1] += 1.0
    return lap


def eigendecompose(shift: np.ndarray) -> SpectralBasis:
    """Eigendecompose a symmetric graph shift with distinct eigenvalues.

    Eigenpairs come back sorted by ascending |lambda|; when lambda and -lambda
    tie in magnitude the negative one goes first. Each eigenvector is flipped
    so that its first entry of magnitude above 1e-12 is positive, which makes
    spectra reproducible across solver versions.

    Raises DegenerateSpectrum when any two eigenvalues coincide within
    ``1e-9 * max(1, max|lambda|)``.
    """
    shift = np.asarray(shift, dtype=float)
    if shift.ndim != 2 or shift.shape[0] != shift.shape[1]:
        raise ValueError(f"shift must be square, got shape {shift.shape}")
    asym = np.max(np.abs(shift - shift.T)) if shift.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValueError(f"shift is not symmetric (max |S - S^T| = {asym:.3e})")

    vals, vecs = np.linalg.eigh(shift)

    scale = max(1.0, float(np.max(np.abs(vals))))
    gaps = np.diff(np.sort(vals))
    if gaps.size and np.min(gaps) <= DISTINCTNESS_TOL * scale:
        k = int(np.argmin(gaps))
        pair = np.sort(vals)[k : k + 2]
        raise DegenerateSpectrum(
            f"eigenvalues {pair[0]:.12g} and {pair[1]:.12g} coincide within tolerance "
            f"{DISTINCTNESS_TOL * scale:.3e}"
        )

    # |lambda| ascending; a magnitude tie (lambda, -lambda) orders negative first.
    order = np.lexsort((vals, np.abs(vals)))
    vals = vals[order]
    vecs = vecs[:, order]

    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        nonzero = np.nonzero(np.abs(col) > SIGN_PIVOT_TOL)[0]
        if nonzero.size and col[nonzero[0]] < 0:
            vecs[:, k] = -col

    residual = np.max(np.abs(vecs @ np.diag(vals) @ vecs.T - shift))
    if residual > RECONSTRUCTION_TOL:
        raise ValueError(f"eigendecomposition residual {residual:.3e} exceeds {RECONSTRUCTION_TOL}")
    gram = np.max(np.abs(vecs.T @ vecs - np.eye(vecs.shape[0])))
    if gram > SYMMETRY_TOL:
        raise ValueError(f"eigenvectors lost orthogonality ({gram:.3e})")
    return SpectralBasis(modes=vecs, eigenvalues=vals)


def gft(basis: SpectralBasis, e: SignalEnsemble) -> SignalEnsemble:
    """Graph Fourier transform of a vertex-domain ensemble: each row x -> U^T x."""
    if e.domain != VERTEX:
        raise ValueError(f"gft expects a vertex-domain ensemble, got {e.domain!r}")
    if e.n_vertices != basis.n_vertices:
        raise ValueError(f"signal length {e.n_vertices} != basis dimension {basis.n_vertices}")
    return SignalEnsemble(signals=e.signals @ basis.modes, domain=SPECTRAL)


def igft(basis: SpectralBasis, e: SignalEnsemble) -> SignalEnsemble:
    """Inverse graph Fourier transform: each row xhat -> U xhat."""
    if e.domain != SPECTRAL:
        raise ValueError(f"igft expects a spectral-domain ensemble, got {e.domain!r}")
    if e.n_vertices != basis.n_vertices:
        raise ValueError(f"signal length {e.n_vertices} != basis dimension {basis.n_vertices}")
    return SignalEnsemble(signals=e.signals @ basis.modes.T, domain=VERTEX)
