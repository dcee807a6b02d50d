"""Spectral covariances, source and observation graphs, and concentration bounds.

The source graph lives on frequency indices 1..N and has an edge wherever the
source spectral covariance is (significantly) nonzero; the observation graph
is the subgraph of it that survives thresholding of the empirical observation
correlations. Sign recovery later walks the observation graph per connected
component, so component enumeration here is deterministic: breadth-first
search with neighbors visited in ascending vertex order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveVariance
from .spectral import SignalEnsemble


@dataclass(frozen=True)
class SourceGraph:
    """Graph on frequency indices with edges at thresholded source correlations."""

    n_vertices: int
    edges: frozenset[tuple[int, int]]
    degrees: np.ndarray
    connected: bool

    def neighbors(self) -> list[list[int]]:
        return neighbor_lists(self.n_vertices, self.edges)


@dataclass(frozen=True)
class ObservationGraph:
    """Thresholded subgraph of the source graph seen through noisy observations.

    ``support`` collects the indices with at least one surviving incident
    correlation; ``components`` partitions the support into connected pieces,
    each listed as an ascending tuple, ordered by their smallest vertex.
    """

    n_vertices: int
    support: frozenset[int]
    edges: frozenset[tuple[int, int]]
    components: tuple[tuple[int, ...], ...]


def neighbor_lists(n_vertices: int, edges) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n_vertices)]
    for i, j in edges:
        adj[i - 1].append(j)
        adj[j - 1].append(i)
    for lst in adj:
        lst.sort()
    return adj


def connected_components(vertices, n_vertices: int, edges) -> tuple[tuple[int, ...], ...]:
    """Connected components of the subgraph on ``vertices``, BFS in ascending order."""
    adj = neighbor_lists(n_vertices, edges)
    members = set(vertices)
    seen: set[int] = set()
    comps: list[tuple[int, ...]] = []
    for start in sorted(members):
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        comp = []
        while queue:
            v = queue.pop(0)
            comp.append(v)
            for w in adj[v - 1]:
                if w in members and w not in seen:
                    seen.add(w)
                    queue.append(w)
        comps.append(tuple(sorted(comp)))
    return tuple(comps)


def empirical_covariance(e: SignalEnsemble) -> np.ndarray:
    """Empirical second-moment matrix (1/M) sum_m s_m s_m^T of an ensemble.

    Symmetric by construction and positive semidefinite with rank at most M.
    """
    y = e.signals
    cov = (y.T @ y) / y.shape[0]
    return (cov + cov.T) / 2.0


def empirical_kurtosis(e: SignalEnsemble) -> float:
    """Largest empirical fourth moment across components, max_n (1/M) sum_m s_m(n)^4."""
    return float(np.max(np.mean(e.signals**4, axis=0)))


def ensure_positive_diagonal(cov: np.ndarray, what: str) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"{what} must be square, got shape {cov.shape}")
    diag = np.diag(cov)
    bad = np.nonzero(diag <= 0)[0]
    if bad.size:
        raise NonpositiveVariance(
            f"{what} has nonpositive variance at vertex {bad[0] + 1} ({diag[bad[0]]:.3e})"
        )
    return cov


def pearson_matrix(cov: np.ndarray, what: str = "covariance") -> np.ndarray:
    cov = ensure_positive_diagonal(cov, what)
    scale = np.sqrt(np.diag(cov))
    return np.abs(cov) / np.outer(scale, scale)


def build_source_graph(cov_x: np.ndarray, pearson_threshold: float) -> SourceGraph:
    """Edges at pairs whose source correlation magnitude reaches the threshold.

    Also reports whether the resulting graph is connected; estimation works
    per component either way, but a disconnected source graph means responses
    are only identifiable up to one sign per component.
    """
    if pearson_threshold < 0:
        raise ValueError(f"pearson_threshold must be >= 0, got {pearson_threshold}")
    rho = pearson_matrix(cov_x, "source covariance")
    n = rho.shape[0]
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rho[i, j] >= pearson_threshold:
                edges.add((i + 1, j + 1))
    degrees = np.zeros(n, dtype=int)
    for i, j in edges:
        degrees[i - 1] += 1
        degrees[j - 1] += 1
    comps = connected_components(range(1, n + 1), n, edges)
    return SourceGraph(
        n_vertices=n,
        edges=frozenset(edges),
        degrees=degrees,
        connected=len(comps) == 1,
    )


def build_observation_graph(cov_ym: np.ndarray, source: SourceGraph, delta: float) -> ObservationGraph:
    """Keep the source edges whose empirical observation correlation reaches ``delta``.

    The support W holds every index whose best surviving incident correlation
    reaches delta, so W is exactly the set of endpoints of kept edges (plus
    nothing else). The result is always a subgraph of the source graph.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    rho = pearson_matrix(cov_ym, "observation covariance")
    if rho.shape[0] != source.n_vertices:
        raise ValueError(
            f"covariance size {rho.shape[0]} != source graph size {source.n_vertices}"
        )
    edges = {(i, j) for (i, j) in source.edges if rho[i - 1, j - 1] >= delta}
    support: set[int] = set()
    for i, j in source.edges:
        r = rho[i - 1, j - 1]
        if r >= delta:
            support.add(i)
            support.add(j)
    comps = connected_components(support, source.n_vertices, edges)
    return ObservationGraph(
        n_vertices=source.n_vertices,
        support=frozenset(support),
        edges=frozenset(edges),
        components=comps,
    )


def concentration_bound(
    c4: float, h_norm: float, sigma: float, m: int, eps: float, diagonal: bool
) -> float:
    """Chebyshev-type tail bound on one empirical observation-covariance entry.

    Bounds the probability that the M-sample estimate deviates from the true
    entry by at least ``eps``. The diagonal bound carries the larger fourth
    moment of squared coefficients; off-diagonal entries get the tighter
    product-moment bound.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if c4 < 0 or h_norm < 0 or sigma < 0:
        raise ValueError("c4, h_norm and sigma must be nonnegative")
    if diagonal:
        numerator = c4 * h_norm**4 + 6.0 * math.sqrt(c4) * h_norm**2 * sigma**2 + 3.0 * sigma**4
    else:
        numerator = (math.sqrt(c4) * h_norm**2 + sigma**2) ** 2
    return numerator / (m * eps**2)


def delta_cap(cov_x: np.ndarray, source: SourceGraph, h_norm: float) -> float:
    """Largest safe observation threshold, ||H||^2 * delta0 / 8.

    delta0 is the smallest source covariance magnitude over source edges. Only
    computable when the channel norm is known, so this is a simulation-side
    helper; on real data delta stays a user parameter.
    """
    cov_x = np.asarray(cov_x, dtype=float)
    if not source.edges:
        raise ValueError("source graph has no edges")
    delta0 = min(abs(cov_x[i - 1, j - 1]) for i, j in source.edges)
    return h_norm**2 * delta0 / 8.0


@dataclass(frozen=True)
class BoundCheck:
    """One probed entry of the Monte Carlo bound validation."""

    n: int
    nprime: int
    eps: float
    empirical: float
    bound: float
    flag: bool

    @property
    def diagonal(self) -> bool:
        return self.n == self.nprime

    @property
    def informative(self) -> bool:
        return self.bound < 1.0


def validate_bound_monte_carlo(
    config,
    trials: int,
    probes=None,
    bound_targets: tuple[float, ...] = (0.1, 0.3, 0.6),
) -> list[BoundCheck]:
    """Measure empirical covariance exceedance rates against the tail bounds.

    ``config`` is a SimulationConfig; its seed fixes the population (mixing
    matrix and channel) while trial t re-draws sources and noise from the
    stream seeded with ``seed + t``. For each probed entry, epsilons are
    chosen so the theoretical bound lands on ``bound_targets``; a check is
    flagged when the empirical frequency exceeds the bound by more than three
    binomial standard errors.
    """
    from .simulate import population_model

    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    pop = population_model(config)
    n = config.n_vertices
    m = config.sample_count
    sigma = config.noise_sigma

    if probes is None:
        off = np.abs(pop.cov_x - np.diag(np.diag(pop.cov_x)))
        i, j = np.unravel_index(int(np.argmax(off)), off.shape)
        probes = [(1, 1), (min(i, j) + 1, max(i, j) + 1)]
    for p, q in probes:
        if not (1 <= p <= n and 1 <= q <= n):
            raise ValueError(f"probe ({p}, {q}) out of range 1..{n}")

    checks: list[tuple[int, int, float, float]] = []
    for p, q in probes:
        diagonal = p == q
        numerator = concentration_bound(pop.c4, pop.h_norm, sigma, 1, 1.0, diagonal)
        for target in bound_targets:
            eps = math.sqrt(numerator / (m * target))
            bound = concentration_bound(pop.c4, pop.h_norm, sigma, m, eps, diagonal)
            checks.append((p, q, eps, bound))

    exceed = np.zeros(len(checks), dtype=int)
    truth = {(p, q): pop.cov_y[p - 1, q - 1] for p, q, _, _ in checks}
    for t in range(trials):
        rng = np.random.default_rng(config.seed + t)
        z = rng.standard_normal((m, n))
        xhat = z @ pop.mixing.T
        yhat = xhat * pop.gamma
        if sigma > 0:
            yhat = yhat + sigma * rng.standard_normal((m, n))
        for k, (p, q, eps, _) in enumerate(checks):
            entry = float(yhat[:, p - 1] @ yhat[:, q - 1]) / m
            if abs(entry - truth[(p, q)]) >= eps:
                exceed[k] += 1

    report = []
    for k, (p, q, eps, bound) in enumerate(checks):
        freq = float(exceed[k]) / trials
        se = math.sqrt(freq * (1.0 - freq) / trials)
        report.append(
            BoundCheck(
                n=p, nprime=q, eps=eps, empirical=freq, bound=bound, flag=bool(freq > bound + 3 * se)
            )
        )
    return report
