"""Estimating an unknown channel from covariances alone.

The observer sees noisy filtered samples and knows only the source's spectral
covariance. Magnitudes come from a per-edge quadratic identity; signs are
propagated from an anchor along a spanning tree of the observation graph.
"""

import numpy as np

from graph_deconv import (
    build_observation_graph,
    build_source_graph,
    empirical_covariance,
    estimate_channel,
    estimate_magnitudes,
    gft,
    igft,
    random_channel,
    sign_consistency_report,
    transmit,
)
from graph_deconv.simulate import simulation_graph, synthetic_source

N, M, SEED = 16, 744, 5

coords, radius, graph, basis = simulation_graph(N, SEED)
mixing, xhat = synthetic_source(N, M, SEED)
sources = igft(basis, xhat)
cov_x = empirical_covariance(xhat)

source_graph = build_source_graph(cov_x, pearson_threshold=0.01)
print(f"source graph: {len(source_graph.edges)} edges, connected={source_graph.connected}")

gamma = random_channel(N, amplitude=0.2, seed=SEED + 1)

for sigma in (0.0, 0.5, 2.0):
    observations = transmit(sources, gamma, basis, sigma, seed=SEED + 2)
    estimate = estimate_channel(cov_x, observations, basis, source_graph, delta=0.001)

    mag_err = np.max(np.abs(np.abs(estimate.gamma_m) - np.abs(gamma)))
    comp = estimate.components[0]
    rel_signs = np.sign(estimate.gamma_m) * np.sign(gamma)
    per_component = [
        set(rel_signs[v - 1] for v in c.vertices) for c in estimate.components
    ]
    up_to_flip = all(len(s) == 1 for s in per_component)

    cov_ym = empirical_covariance(gft(basis, observations))
    obs_graph = build_observation_graph(cov_ym, source_graph, 0.001)
    violations = sign_consistency_report(estimate, obs_graph, cov_x, cov_ym)

    print(f"\nsigma = {sigma}")
    print(f"  support {len(estimate.support)}/{N}, "
          f"{len(estimate.components)} component(s), anchor {comp.anchor}")
    print(f"  max magnitude error: {mag_err:.3e}")
    print(f"  signs correct up to one flip per component: {up_to_flip}")
    print(f"  non-tree sign violations: {len(violations)}")

print("\nWith sigma = 0 the observation covariance factors exactly through the")
print("source covariance, so recovery is exact; noise degrades magnitudes")
print("first while the anchored tree keeps the sign pattern consistent.")
