"""Covariance-driven estimation of a shift-invariant channel.

The observer knows the source spectral covariance and sees only noisy filtered
samples. Diagonal and off-diagonal entries of the two covariances are tied
together by a per-edge quadratic system whose closed-form solution yields the
response magnitude at every frequency; magnitudes are averaged over all source
edges incident to the frequency. Signs are then fixed per connected component
of the observation graph: pick the lowest-index vertex as anchor, give it the
requested sign, and propagate along a breadth-first spanning tree using the
sign of the ratio between observed and source covariance on each tree edge.
The result is the true channel up to one sign per component, which is the best
any observer of second-order statistics can do.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .covariance import (
    ObservationGraph,
    SourceGraph,
    build_observation_graph,
    empirical_covariance,
    ensure_positive_diagonal,
    neighbor_lists,
)
from .errors import IsolatedVertex
from .spectral import SignalEnsemble, SpectralBasis, gft


@dataclass(frozen=True)
class Component:
    """One connected component of the observation graph with its sign metadata.

    ``parents`` maps every non-anchor vertex to its parent in the breadth-first
    spanning tree rooted at the anchor.
    """

    vertices: tuple[int, ...]
    anchor: int
    anchor_sign: int
    parents: dict[int, int]


@dataclass(frozen=True)
class ChannelEstimate:
    """Estimated frequency responses with support and component structure."""

    gamma_m: np.ndarray
    support: frozenset[int]
    components: tuple[Component, ...]

    @property
    def n_vertices(self) -> int:
        return self.gamma_m.size

    @classmethod
    def from_response(cls, gamma, support=None) -> "ChannelEstimate":
        """Wrap a known response as an estimate, for deconvolving with ground truth.

        Default support is every index with a response magnitude above 1e-12.
        The single pseudo-component carries no spanning tree.
        """
        gamma = np.asarray(gamma, dtype=float).reshape(-1)
        if support is None:
            support = {n for n in range(1, gamma.size + 1) if abs(gamma[n - 1]) > 1e-12}
        support = frozenset(int(n) for n in support)
        components: tuple[Component, ...] = ()
        if support:
            anchor = min(support)
            components = (
                Component(
                    vertices=tuple(sorted(support)),
                    anchor=anchor,
                    anchor_sign=sign_of(gamma[anchor - 1]),
                    parents={},
                ),
            )
        return cls(gamma_m=gamma, support=support, components=components)


def sign_of(x: float) -> int:
    """Sign with the convention that zero counts as positive."""
    return -1 if x < 0 else 1


def estimate_magnitudes(cov_x: np.ndarray, cov_ym: np.ndarray, source: SourceGraph) -> np.ndarray:
    """Response magnitudes from source and observation spectral covariances.

    For each source edge (n, n') the two covariances give one equation pair:
    the observed variance gap alpha(n,n') and the covariance ratio
    beta(n,n') = C_obs(n,n') / C_src(n,n'). Solving for |gamma(n)| gives

        sqrt((sqrt(mu) + alpha) / (2 C_src(n,n))),
        mu = 4 C_src(n,n) C_src(n',n') beta^2 + alpha^2,

    and the estimate averages this over the theta(n) edges incident to n.
    Sampling noise can push the inner radicand sqrt(mu) + alpha slightly below
    zero (mathematically it cannot be); such values are clamped to zero and a
    RuntimeWarning reports how many edges were affected.
    """
    cov_x = ensure_positive_diagonal(cov_x, "source covariance")
    cov_ym = np.asarray(cov_ym, dtype=float)
    n = source.n_vertices
    if cov_x.shape != (n, n) or cov_ym.shape != (n, n):
        raise ValueError(
            f"covariance shapes {cov_x.shape}, {cov_ym.shape} do not match graph size {n}"
        )
    isolated = np.nonzero(source.degrees == 0)[0]
    if isolated.size:
        raise IsolatedVertex(
            f"vertex {isolated[0] + 1} has no incident source edge, magnitude undefined"
        )

    adjacent = np.zeros((n, n), dtype=bool)
    for i, j in source.edges:
        adjacent[i - 1, j - 1] = True
        adjacent[j - 1, i - 1] = True
    if np.any(adjacent & (cov_x == 0)):
        i, j = np.argwhere(adjacent & (cov_x == 0))[0]
        raise ValueError(f"source covariance is zero on edge ({i + 1}, {j + 1})")

    diag_x = np.diag(cov_x)
    diag_y = np.diag(cov_ym)
    alpha = diag_y[:, None] - diag_y[None, :]
    beta = np.zeros((n, n))
    beta[adjacent] = cov_ym[adjacent] / cov_x[adjacent]
    mu = 4.0 * np.outer(diag_x, diag_x) * beta**2 + alpha**2
    inner = np.sqrt(mu) + alpha

    clamped = int(np.count_nonzero(adjacent & (inner < 0)))
    if clamped:
        worst = float(np.min(inner[adjacent]))
        warnings.warn(
            f"clamped negative radicand on {clamped} edge(s) (min {worst:.3e}); "
            "the two covariances are inconsistent, likely from sampling noise",
            RuntimeWarning,
            stacklevel=2,
        )
        inner = np.maximum(inner, 0.0)

    per_edge = np.sqrt(inner)
    sums = np.where(adjacent, per_edge, 0.0).sum(axis=1)
    return sums / (source.degrees * np.sqrt(2.0 * diag_x))


def assign_signs(
    magnitudes,
    obs: ObservationGraph,
    cov_x: np.ndarray,
    cov_ym: np.ndarray,
    anchor_signs=None,
) -> ChannelEstimate:
    """Fix signs per component by anchored breadth-first propagation.

    The anchor of each component is its lowest-index vertex and receives the
    corresponding entry of ``anchor_signs`` (all +1 by default). Every other
    supported vertex gets the sign that makes the product of endpoint signs
    match the sign of the observed/source covariance ratio on its tree edge.
    Off-support vertices keep sign +1.
    """
    mags = np.asarray(magnitudes, dtype=float).reshape(-1)
    n = obs.n_vertices
    if mags.size != n:
        raise ValueError(f"got {mags.size} magnitudes for {n} vertices")
    cov_x = np.asarray(cov_x, dtype=float)
    cov_ym = np.asarray(cov_ym, dtype=float)
    if anchor_signs is None:
        anchor_signs = [1] * len(obs.components)
    anchor_signs = [int(s) for s in anchor_signs]
    if len(anchor_signs) != len(obs.components):
        raise ValueError(
            f"got {len(anchor_signs)} anchor signs for {len(obs.components)} components"
        )
    if any(s not in (-1, 1) for s in anchor_signs):
        raise ValueError("anchor signs must be -1 or +1")

    adj = neighbor_lists(n, obs.edges)
    signs = np.ones(n)
    components = []
    for eps_k, vertices in zip(anchor_signs, obs.components):
        if not vertices:
            raise ValueError("observation graph produced an empty component")
        members = set(vertices)
        anchor = min(vertices)
        signs[anchor - 1] = eps_k
        parents: dict[int, int] = {}
        queue = [anchor]
        visited = {anchor}
        while queue:
            v = queue.pop(0)
            for w in adj[v - 1]:
                if w in members and w not in visited:
                    visited.add(w)
                    parents[w] = v
                    ratio = cov_ym[w - 1, v - 1] / cov_x[w - 1, v - 1]
                    if ratio == 0:
                        warnings.warn(
                            f"zero covariance ratio on tree edge ({w}, {v}), using sign +1",
                            RuntimeWarning,
                            stacklevel=2,
                        )
                    signs[w - 1] = signs[v - 1] * sign_of(ratio)
                    queue.append(w)
        components.append(
            Component(vertices=vertices, anchor=anchor, anchor_sign=eps_k, parents=parents)
        )

    return ChannelEstimate(
        gamma_m=signs * mags, support=obs.support, components=tuple(components)
    )


def estimate_channel(
    cov_x: np.ndarray,
    observations: SignalEnsemble,
    basis: SpectralBasis,
    source: SourceGraph,
    delta: float,
) -> ChannelEstimate:
    """Full channel estimation pipeline from vertex-domain observations.

    Transforms the observations, forms their empirical spectral covariance,
    recovers magnitudes from the per-edge quadratic solution, thresholds the
    observation graph at ``delta``, and assigns signs component by component
    with every anchor set to +1.
    """
    yhat = gft(basis, observations)
    cov_ym = empirical_covariance(yhat)
    magnitudes = estimate_magnitudes(cov_x, cov_ym, source)
    obs = build_observation_graph(cov_ym, source, delta)
    return assign_signs(magnitudes, obs, cov_x, cov_ym)


def sign_consistency_report(
    estimate: ChannelEstimate,
    obs: ObservationGraph,
    cov_x: np.ndarray,
    cov_ym: np.ndarray,
) -> list[tuple[int, int]]:
    """Observation-graph edges whose sign relation the estimate violates.

    Spanning-tree edges are consistent by construction, so anything reported
    here is a non-tree edge; a long list signals heavy noise. Returns sorted
    (n, n') pairs with n < n'.
    """
    cov_x = np.asarray(cov_x, dtype=float)
    cov_ym = np.asarray(cov_ym, dtype=float)
    gamma = estimate.gamma_m
    violated = []
    for i, j in sorted(obs.edges):
        ratio = cov_ym[i - 1, j - 1] / cov_x[i - 1, j - 1]
        if sign_of(gamma[i - 1]) * sign_of(gamma[j - 1]) != sign_of(ratio):
            violated.append((i, j))
    return violated
