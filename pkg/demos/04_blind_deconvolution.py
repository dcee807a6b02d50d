"""Blind deconvolution end to end, with the dB covariance diagnostics.

Runs the full seeded pipeline at the reference operating point (M = 744
samples, noise 1/2) and reports how much better cross-covariances are
recovered than individual variances.
"""

import numpy as np

from graph_deconv import SimulationConfig, run_simulation

config = SimulationConfig(
    n_vertices=32,
    sample_count=744,
    noise_sigma=0.5,
    channel_amplitude=0.2,
    pearson_threshold=0.01,
    delta=0.001,
    seed=42,
    trials=200,
)
result = run_simulation(config)

print(f"graph: {result.graph.n_vertices} vertices, {len(result.graph.edges)} edges, "
      f"radius {result.radius:.3f}")
print(f"source graph connected: {result.source_graph.connected}")
print(f"support: {len(result.estimate.support)}/{config.n_vertices}, "
      f"components: {len(result.estimate.components)}")

print(f"\nover {config.trials} trials (fresh channel and noise each time):")
print(f"  sign pattern recovered: {result.sign_recovery_rate:.1%} of trials")
print(f"  magnitude error, mean of per-trial max: {result.magnitude_error_mean:.4f}")

print("\ntrial-averaged covariance discrepancy (dB, floored at -20):")
gap = result.gap
print(f"  diagonal mean      {gap.mean_diagonal_db:8.4f} dB")
print(f"  off-diagonal mean  {gap.mean_offdiagonal_db:8.4f} dB")
print(f"  gap                {gap.gap_db:8.4f} dB")
print("cross-covariances come back an order of magnitude cleaner than")
print("variances: inverting the channel leaves sigma^2/gain^2 on the diagonal.")

# Each trial redraws the channel, so the trial-averaged diagonal excess
# compares against sigma^2 times the mean of 1/gain^2 over the channel law,
# which is sigma^2 / (1 - amplitude^2) for uniform gain offsets.
inflation = result.avg_diagnostics.diagonal_inflation
predicted = config.noise_sigma**2 / (1.0 - config.channel_amplitude**2)
print(f"\ndiagonal excess, predicted {predicted:.4f} at every frequency:")
for n in range(6):
    print(f"  n={n + 1}: measured {inflation[n]:7.4f}")

print(f"\naligned reconstruction error, noiseless rerun:")
clean = run_simulation(SimulationConfig(
    n_vertices=32, sample_count=744, noise_sigma=0.0, seed=42))
print(f"  max |x_tilde - x| = {clean.max_reconstruction_error:.2e} "
      f"(exact up to one sign per component)")
