"""Monte Carlo validation of the covariance concentration bounds.

Each empirical observation-covariance entry obeys a Chebyshev-type tail bound
driven by the source kurtosis, the channel norm, and the noise level. The
bound scales as 1/(M eps^2); the measured exceedance rates must stay below it.
"""

from graph_deconv import SimulationConfig, concentration_bound, validate_bound_monte_carlo

print("tail bound per entry, C4 = 3, |H| = 1.2, sigma = 0.5, eps = 0.05:")
for m in (100, 744, 10000):
    off = concentration_bound(3.0, 1.2, 0.5, m, 0.05, diagonal=False)
    diag = concentration_bound(3.0, 1.2, 0.5, m, 0.05, diagonal=True)
    print(f"  M = {m:6d}: off-diagonal {off:10.4f}   diagonal {diag:10.4f}")
print("(values above 1 are vacuous; the bound only bites at large M)")

print("\nempirical exceedance vs bound, 2000 trials per configuration:")
print(f"{'M':>6} {'entry':>8} {'eps':>10} {'empirical':>10} {'bound':>8} {'flag':>5}")
for m in (100, 400, 1600):
    config = SimulationConfig(n_vertices=8, sample_count=m, noise_sigma=0.5, seed=4242)
    report = validate_bound_monte_carlo(config, trials=2000, bound_targets=(0.1, 0.3, 0.8))
    for check in report:
        entry = f"({check.n},{check.nprime})"
        print(
            f"{m:>6} {entry:>8} {check.eps:>10.4g} {check.empirical:>10.4f} "
            f"{check.bound:>8.4f} {str(check.flag):>5}"
        )

print("\nno flag: the measured rates sit far below the bounds, as a")
print("second-moment tail bound must. Shrinking eps until the bound nears 1")
print("shows where the guarantee stops being informative.")
