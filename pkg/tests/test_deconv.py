"""Pseudo-inverse deconvolution, reconstructed covariance, and dB diagnostics.

Ground truth:
- noiseless deconvolution with the true channel must reproduce the sources
- the dB arithmetic is checked against hand-evaluated logarithms
- the diagonal-excess law is checked by Monte Carlo against sigma^2/gamma^2
"""

import numpy as np
import pytest

from graph_deconv import (
    ChannelEstimate,
    NearZeroResponse,
    NonpositiveVariance,
    SignalEnsemble,
    align_component_signs,
    blind_deconvolve,
    covariance_diagnostics,
    db_scale,
    empirical_covariance,
    igft,
    random_channel,
    reconstructed_covariance,
    summarize_gap,
    transmit,
)
from graph_deconv.deconv import DiagnosticMatrices
from graph_deconv.estimation import Component
from graph_deconv.simulate import derive_seed, simulation_graph, synthetic_source


def noiseless_setup(n=8, m=200, seed=50):
    coords, radius, graph, basis = simulation_graph(n, seed)
    mixing, xhat = synthetic_source(n, m, seed)
    sources = igft(basis, xhat)
    gamma = random_channel(n, 0.2, seed + 1)
    observations = transmit(sources, gamma, basis, 0.0, seed + 2)
    return basis, xhat, sources, gamma, observations


class TestBlindDeconvolve:
    def test_true_channel_reproduces_sources(self):
        basis, xhat, sources, gamma, observations = noiseless_setup()
        est = ChannelEstimate.from_response(gamma)
        result = blind_deconvolve(est, observations, basis)
        assert np.max(np.abs(result.reconstructed.signals - sources.signals)) <= 1e-10

    def test_negated_channel_reproduces_negated_sources(self):
        basis, xhat, sources, gamma, observations = noiseless_setup(seed=51)
        est = ChannelEstimate.from_response(-gamma)
        result = blind_deconvolve(est, observations, basis)
        assert np.max(np.abs(result.reconstructed.signals + sources.signals)) <= 1e-10

    def test_off_support_coefficients_are_exactly_zero(self):
        basis, xhat, sources, gamma, observations = noiseless_setup(seed=52)
        support = {1, 3, 5}
        est = ChannelEstimate.from_response(gamma, support=support)
        result = blind_deconvolve(est, observations, basis)
        outside = [n - 1 for n in range(1, 9) if n not in support]
        assert np.all(result.spectral.signals[:, outside] == 0.0)

    def test_empty_support_rejected(self):
        basis, xhat, sources, gamma, observations = noiseless_setup(seed=53)
        est = ChannelEstimate(gamma_m=gamma, support=frozenset(), components=())
        with pytest.raises(ValueError, match="empty support"):
            blind_deconvolve(est, observations, basis)

    def test_near_zero_response_on_support_rejected(self):
        basis, xhat, sources, gamma, observations = noiseless_setup(seed=54)
        bad = gamma.copy()
        bad[2] = 1e-14
        est = ChannelEstimate(
            gamma_m=bad, support=frozenset(range(1, 9)), components=()
        )
        with pytest.raises(NearZeroResponse):
            blind_deconvolve(est, observations, basis)


class TestReconstructedCovariance:
    def test_noiseless_equals_source_covariance(self):
        basis, xhat, sources, gamma, observations = noiseless_setup(seed=55)
        est = ChannelEstimate.from_response(gamma)
        result = blind_deconvolve(est, observations, basis)
        cov = reconstructed_covariance(result)
        np.testing.assert_allclose(cov, empirical_covariance(xhat), atol=1e-10)

    def test_single_sample_is_rank_one(self):
        basis, xhat, sources, gamma, _ = noiseless_setup(seed=56)
        one = SignalEnsemble(signals=sources.signals[:1], domain="vertex")
        est = ChannelEstimate.from_response(gamma)
        result = blind_deconvolve(est, transmit(one, gamma, basis, 0.0, 1), basis)
        cov = reconstructed_covariance(result)
        x = result.spectral.signals[0]
        np.testing.assert_allclose(cov, np.outer(x, x), atol=1e-12)
        assert np.linalg.matrix_rank(cov, tol=1e-10) == 1

    def test_covariance_limit_diagonal_excess_and_offdiagonal_match(self):
        """sigma = 0.5, known channel: on average over trials the reconstructed
        variance exceeds the source variance by sigma^2/gamma(n)^2 while the
        cross-covariances converge to the source's (small version of the
        acceptance run)."""
        n, m, sigma, trials = 8, 4000, 0.5, 40
        coords, radius, graph, basis = simulation_graph(n, 57)
        rng = np.random.default_rng(57)
        mixing = rng.standard_normal((n, n)) / np.sqrt(n)
        gamma = random_channel(n, 0.2, 58)
        est = ChannelEstimate.from_response(gamma)
        diff = np.zeros((n, n))
        for t in range(trials):
            trng = np.random.default_rng(derive_seed(57, 90, t))
            xhat = SignalEnsemble(trng.standard_normal((m, n)) @ mixing.T, domain="spectral")
            sources = igft(basis, xhat)
            y = transmit(sources, gamma, basis, sigma, derive_seed(57, 91, t))
            cov = reconstructed_covariance(blind_deconvolve(est, y, basis))
            diff += cov - empirical_covariance(xhat)
        diff /= trials
        excess = np.diag(diff)
        expected = sigma**2 / gamma**2
        assert np.max(np.abs(excess - expected) / expected) <= 0.1
        off = diff[~np.eye(n, dtype=bool)]
        assert np.max(np.abs(off)) <= 0.03


class TestSignEquivariance:
    def test_per_component_flip_negates_only_that_component(self):
        """Flipping one component's estimated signs negates exactly its
        spectral coefficients; within-component covariance blocks are
        unchanged and cross-component entries flip sign."""
        basis, xhat, sources, gamma, observations = noiseless_setup(seed=59)
        comp_a = (1, 2, 3, 4)
        comp_b = (5, 6, 7, 8)
        est = ChannelEstimate(
            gamma_m=gamma,
            support=frozenset(range(1, 9)),
            components=(
                Component(vertices=comp_a, anchor=1, anchor_sign=1, parents={}),
                Component(vertices=comp_b, anchor=5, anchor_sign=1, parents={}),
            ),
        )
        flipped_gamma = gamma.copy()
        cols_b = [v - 1 for v in comp_b]
        flipped_gamma[cols_b] = -flipped_gamma[cols_b]
        est_flipped = ChannelEstimate(
            gamma_m=flipped_gamma, support=est.support, components=est.components
        )
        base = blind_deconvolve(est, observations, basis)
        flip = blind_deconvolve(est_flipped, observations, basis)
        cols_a = [v - 1 for v in comp_a]
        np.testing.assert_array_equal(
            flip.spectral.signals[:, cols_a], base.spectral.signals[:, cols_a]
        )
        np.testing.assert_array_equal(
            flip.spectral.signals[:, cols_b], -base.spectral.signals[:, cols_b]
        )
        cov_base = reconstructed_covariance(base)
        cov_flip = reconstructed_covariance(flip)
        np.testing.assert_allclose(
            cov_flip[np.ix_(cols_a, cols_a)], cov_base[np.ix_(cols_a, cols_a)], atol=1e-14
        )
        np.testing.assert_allclose(
            cov_flip[np.ix_(cols_b, cols_b)], cov_base[np.ix_(cols_b, cols_b)], atol=1e-14
        )
        np.testing.assert_allclose(
            cov_flip[np.ix_(cols_a, cols_b)], -cov_base[np.ix_(cols_a, cols_b)], atol=1e-14
        )


class TestAlignComponentSigns:
    def test_alignment_recovers_flipped_components(self):
        basis, xhat, sources, gamma, observations = noiseless_setup(seed=60)
        comp_a = (1, 2, 3, 4)
        comp_b = (5, 6, 7, 8)
        flipped = gamma.copy()
        flipped[[v - 1 for v in comp_b]] *= -1
        est = ChannelEstimate(
            gamma_m=flipped,
            support=frozenset(range(1, 9)),
            components=(
                Component(vertices=comp_a, anchor=1, anchor_sign=1, parents={}),
                Component(vertices=comp_b, anchor=5, anchor_sign=1, parents={}),
            ),
        )
        raw = blind_deconvolve(est, observations, basis)
        aligned, flips = align_component_signs(raw, xhat, est.components, basis)
        assert flips == (1, -1)
        assert np.max(np.abs(aligned.reconstructed.signals - sources.signals)) <= 1e-10


class TestDiagnostics:
    def test_zero_difference_clamps_to_floor(self):
        """10 log10(1e-5) = -50 sits below the -20 floor everywhere."""
        cov = np.array([[1.0, 0.2], [0.2, 1.0]])
        d = covariance_diagnostics(cov, cov, floor_db=-20.0)
        np.testing.assert_array_equal(d.abs_diff_db, np.full((2, 2), -20.0))
        np.testing.assert_array_equal(d.rel_diff_db, np.full((2, 2), -20.0))
        np.testing.assert_array_equal(d.diagonal_inflation, [0.0, 0.0])

    def test_point_one_discrepancy_is_minus_ten_db(self):
        source = np.eye(2)
        recon = source + np.array([[0.1, 0.0], [0.0, 0.1]])
        d = covariance_diagnostics(recon, source)
        assert d.abs_diff_db[0, 0] == pytest.approx(10 * np.log10(0.1 + 1e-5), abs=1e-12)
        assert d.abs_diff_db[0, 0] == pytest.approx(-10.0, abs=1e-3)

    def test_relative_mode_scales_by_source_variances(self):
        source = np.diag([4.0, 1.0])
        recon = source + np.array([[0.0, 0.2], [0.2, 0.0]])
        d = covariance_diagnostics(recon, source)
        np.testing.assert_allclose(
            d.rel_diff_db[0, 1], 10 * np.log10(0.2 / 2.0 + 1e-5), atol=1e-12
        )

    def test_relative_mode_requires_positive_variance(self):
        with pytest.raises(NonpositiveVariance):
            covariance_diagnostics(np.eye(2), np.diag([1.0, 0.0]))

    def test_floor_is_configurable(self):
        cov = np.eye(2)
        d = covariance_diagnostics(cov, cov, floor_db=-30.0)
        np.testing.assert_array_equal(d.abs_diff_db, np.full((2, 2), -30.0))

    def test_db_scale_matches_hand_arithmetic(self):
        m = np.array([[0.1, 0.0], [1.0, 10.0]])
        out = db_scale(m, floor_db=-30.0)
        assert out[0, 0] == pytest.approx(10 * np.log10(0.10001))
        assert out[0, 1] == -30.0
        assert out[1, 1] == pytest.approx(10 * np.log10(10.00001))


class TestSummarizeGap:
    def test_constant_matrix_has_zero_gap(self):
        d = DiagnosticMatrices(
            abs_diff_db=np.full((3, 3), -7.0),
            rel_diff_db=np.full((3, 3), -7.0),
            diagonal_inflation=np.zeros(3),
        )
        gap = summarize_gap(d)
        assert gap.gap_db == 0.0

    def test_hand_example(self):
        m = np.full((4, 4), -16.0)
        np.fill_diagonal(m, -6.0)
        d = DiagnosticMatrices(abs_diff_db=m, rel_diff_db=m, diagonal_inflation=np.zeros(4))
        gap = summarize_gap(d)
        assert gap.mean_diagonal_db == -6.0
        assert gap.mean_offdiagonal_db == -16.0
        assert gap.gap_db == -10.0

    def test_needs_two_vertices(self):
        d = DiagnosticMatrices(
            abs_diff_db=np.array([[-5.0]]),
            rel_diff_db=np.array([[-5.0]]),
            diagonal_inflation=np.zeros(1),
        )
        with pytest.raises(ValueError):
            summarize_gap(d)
