"""Simulation harness: configs, synthetic sources, determinism, bundles."""

import json

import numpy as np
import pytest

from graph_deconv import (
    SimulationConfig,
    build_source_graph,
    empirical_covariance,
    pearson_matrix,
    run_simulation,
    synthetic_source,
    transmit,
    variance_profile,
)
from graph_deconv.simulate import (
    connectivity_radius,
    mixing_matrix,
    population_model,
    signs_match,
    simulation_graph,
)
from graph_deconv.estimation import ChannelEstimate, Component


class TestConfig:
    def test_json_round_trip(self, tmp_path):
        cfg = SimulationConfig(
            n_vertices=12, sample_count=500, noise_sigma=0.25, seed=9, trials=3
        )
        path = tmp_path / "sim.json"
        cfg.to_json_file(path)
        assert SimulationConfig.from_json_file(path) == cfg

    def test_field_names_mirror_json(self, tmp_path):
        cfg = SimulationConfig(n_vertices=4, sample_count=10, noise_sigma=0.0)
        data = json.loads(json.dumps(cfg.to_json()))
        assert set(data) == {
            "n_vertices",
            "sample_count",
            "noise_sigma",
            "channel_amplitude",
            "pearson_threshold",
            "delta",
            "seed",
            "trials",
        }

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="config"):
            SimulationConfig.from_json({"n_vertices": 4, "sample_count": 10, "noise_sigma": 0.0, "bogus": 1})

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n_vertices=1, sample_count=10, noise_sigma=0.0),
            dict(n_vertices=4, sample_count=0, noise_sigma=0.0),
            dict(n_vertices=4, sample_count=10, noise_sigma=-0.1),
            dict(n_vertices=4, sample_count=10, noise_sigma=0.0, channel_amplitude=1.0),
            dict(n_vertices=4, sample_count=10, noise_sigma=0.0, delta=-0.1),
            dict(n_vertices=4, sample_count=10, noise_sigma=0.0, trials=0),
            dict(n_vertices=4, sample_count=10, noise_sigma=0.0, seed=-1),
        ],
    )
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ValueError):
            SimulationConfig(**kwargs)


class TestSyntheticSource:
    def test_variance_profile_decays_from_dominant_head(self):
        v = variance_profile(32)
        assert v[0] == pytest.approx(177.8017)
        assert np.all(np.diff(v) < 0)
        assert v[-1] == pytest.approx(0.2584)
        assert len(variance_profile(2)) == 2

    def test_mixing_hits_the_profile_variances(self):
        mixing = mixing_matrix(16, 123)
        cov = mixing @ mixing.T
        np.testing.assert_allclose(np.diag(cov), variance_profile(16), rtol=1e-12)

    def test_pairwise_correlations_have_a_floor(self):
        """The shared direction keeps every spectral pair well correlated, so
        source-graph edges never degenerate into coin-flip sign decisions."""
        mixing = mixing_matrix(32, 456)
        rho = pearson_matrix(mixing @ mixing.T)
        off = rho[~np.eye(32, dtype=bool)]
        assert off.min() > 0.2

    def test_source_graph_is_connected(self):
        for seed in range(5):
            mixing, xhat = synthetic_source(16, 400, seed)
            source = build_source_graph(empirical_covariance(xhat), 0.01)
            assert source.connected

    def test_deterministic(self):
        a_mix, a = synthetic_source(8, 100, 77)
        b_mix, b = synthetic_source(8, 100, 77)
        np.testing.assert_array_equal(a_mix, b_mix)
        np.testing.assert_array_equal(a.signals, b.signals)

    def test_empirical_covariance_approaches_population(self):
        mixing, xhat = synthetic_source(8, 200000, 5)
        emp = empirical_covariance(xhat)
        pop = mixing @ mixing.T
        scale = np.sqrt(np.outer(np.diag(pop), np.diag(pop)))
        assert np.max(np.abs(emp - pop) / scale) < 0.05


class TestTransmit:
    def test_zero_noise_domains_agree(self):
        coords, radius, graph, basis = simulation_graph(6, 3)
        mixing, xhat = synthetic_source(6, 50, 3)
        from graph_deconv import igft

        sources = igft(basis, xhat)
        gamma = np.linspace(0.5, 1.5, 6)
        a = transmit(sources, gamma, basis, 0.0, 1, noise_domain="spectral")
        b = transmit(sources, gamma, basis, 0.0, 1, noise_domain="vertex")
        np.testing.assert_array_equal(a.signals, b.signals)

    def test_noise_inflates_energy_equivalently_in_both_domains(self):
        coords, radius, graph, basis = simulation_graph(6, 4)
        mixing, xhat = synthetic_source(6, 5000, 4)
        from graph_deconv import igft

        sources = igft(basis, xhat)
        gamma = np.ones(6)
        clean = transmit(sources, gamma, basis, 0.0, 1)
        spec = transmit(sources, gamma, basis, 1.0, 2, noise_domain="spectral")
        vert = transmit(sources, gamma, basis, 1.0, 3, noise_domain="vertex")
        # The signal-noise cross term fluctuates with the dominant source
        # variance, so the check is loose.
        base = np.mean(clean.signals**2)
        for noisy in (spec, vert):
            added = np.mean(noisy.signals**2) - base
            assert abs(added - 1.0) < 0.3

    def test_unknown_noise_domain(self):
        coords, radius, graph, basis = simulation_graph(4, 5)
        mixing, xhat = synthetic_source(4, 10, 5)
        from graph_deconv import igft

        with pytest.raises(ValueError, match="noise domain"):
            transmit(igft(basis, xhat), np.ones(4), basis, 0.1, 1, noise_domain="time")


class TestSimulationGraph:
    def test_connectivity_radius_on_known_points(self):
        xy = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
        assert connectivity_radius(xy) == pytest.approx(2.0)

    def test_graph_is_connected_and_distinct(self):
        coords, radius, graph, basis = simulation_graph(12, 9)
        assert graph.is_connected()
        gaps = np.diff(np.sort(basis.eigenvalues))
        assert gaps.min() > 1e-9 * max(1.0, np.abs(basis.eigenvalues).max())

    def test_deterministic(self):
        a = simulation_graph(10, 11)
        b = simulation_graph(10, 11)
        assert a[0] == b[0]
        assert a[2].edges == b[2].edges


class TestPopulationModel:
    def test_shapes_and_norm(self):
        cfg = SimulationConfig(n_vertices=8, sample_count=100, noise_sigma=0.5, seed=2)
        pop = population_model(cfg)
        assert pop.cov_x.shape == (8, 8)
        assert pop.h_norm == np.max(np.abs(pop.gamma))
        assert pop.c4 == pytest.approx(3.0 * np.max(np.diag(pop.cov_x)) ** 2)
        np.testing.assert_allclose(
            pop.cov_y, np.outer(pop.gamma, pop.gamma) * pop.cov_x + 0.25 * np.eye(8)
        )


class TestSignsMatch:
    def make_estimate(self, gamma, components):
        return ChannelEstimate(
            gamma_m=gamma,
            support=frozenset(v for c in components for v in c.vertices),
            components=components,
        )

    def test_global_flip_counts_as_match(self):
        gamma = np.array([1.0, -2.0, 3.0])
        comps = (Component(vertices=(1, 2, 3), anchor=1, anchor_sign=1, parents={}),)
        est = self.make_estimate(-gamma, comps)
        assert signs_match(est, gamma)

    def test_partial_flip_is_a_mismatch(self):
        gamma = np.array([1.0, -2.0, 3.0])
        wrong = gamma.copy()
        wrong[1] *= -1
        comps = (Component(vertices=(1, 2, 3), anchor=1, anchor_sign=1, parents={}),)
        est = self.make_estimate(wrong, comps)
        assert not signs_match(est, gamma)


class TestRunSimulation:
    def test_noiseless_run_recovers_everything(self):
        cfg = SimulationConfig(n_vertices=8, sample_count=400, noise_sigma=0.0, seed=6)
        result = run_simulation(cfg)
        assert result.sign_recovery_rate == 1.0
        assert result.magnitude_error_max <= 1e-8
        assert result.max_reconstruction_error <= 1e-8
        assert result.consistency_violations == []

    def test_bundle_files_and_determinism(self, tmp_path):
        cfg = SimulationConfig(
            n_vertices=6, sample_count=120, noise_sigma=0.3, seed=8, trials=2
        )
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        run_simulation(cfg, out_dir=out_a)
        run_simulation(cfg, out_dir=out_b)
        expected = {
            "config.json",
            "coords.csv",
            "edges.csv",
            "sources.csv",
            "observations.csv",
            "cov_x.csv",
            "true_channel.csv",
            "channel_estimate.csv",
            "components.json",
            "reconstructed.csv",
            "recon_cov.csv",
            "abs_diff_db.csv",
            "rel_diff_db.csv",
            "bound_report.csv",
            "summary.json",
        }
        assert {p.name for p in out_a.iterdir()} == expected
        for name in sorted(expected):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    def test_different_seeds_differ(self, tmp_path):
        base = dict(n_vertices=6, sample_count=120, noise_sigma=0.3, trials=1)
        r1 = run_simulation(SimulationConfig(seed=1, **base))
        r2 = run_simulation(SimulationConfig(seed=2, **base))
        assert not np.array_equal(r1.channel, r2.channel)
