"""
Test Suite for the radar sensor model: NCV dynamics, grid geometry,
point spread function, frame synthesis, likelihoods and frame dumps.
"""

import math
from decimal import Decimal, localcontext

import numpy as np
import pandas as pd
import pytest
from scipy import integrate, stats

from src.core.labels import Label, LabeledState
from src.glmb import ParticleCloud
from src.sensor import (
    DynamicsParams,
    EchoModel,
    NcvTransition,
    RadarFrame,
    RadarGrid,
    RadarLikelihood,
    SensorGeometryError,
    amplitude_from_snr,
    cell_log_likelihood_ratio,
    drift,
    dump_frame_binary,
    dump_frame_csv,
    frame_log_likelihood,
    joint_log_likelihood_batch,
    load_frame_binary,
    log_i0,
    measurement_coordinates,
    noiseless_frame,
    process_noise,
    propagate,
    propagate_points,
    psf,
    separable_frame_log_likelihood,
    separable_log_likelihood_batch,
    snr_from_amplitude,
    synthesize_frame,
    template,
    transition_log_density,
    transition_matrix,
)

L1, L2 = Label(1, 0), Label(1, 1)
BEARING0 = 0.5
CENTER = (10, 2, 5)


@pytest.fixture
def grid():
    """21 range x 5 azimuth x 11 Doppler cells, R=5 m, B=1 deg, D=1 m/s"""
    return RadarGrid.uniform(1000.0, 21, 5.0, BEARING0, 5, math.radians(1.0), -5.0, 11, 1.0)


def state_at(r, b, d, amplitude=3.0, label=L1):
    """State with range r, bearing b and Doppler d (radial velocity -d)"""
    return LabeledState(
        [r * math.cos(b), -d * math.cos(b), r * math.sin(b), -d * math.sin(b), amplitude], label
    )


def centered(grid, label=L1, amplitude=3.0, dr=0.0, dd=0.0):
    r, b, d = grid.centroid(CENTER)
    return state_at(r + dr, b, d + dd, amplitude, label)


def decimal_log_i0(x: float) -> float:
    """log of sum_k (x^2/4)^k / (k!)^2 in 60-digit decimal arithmetic"""
    with localcontext() as ctx:
        ctx.prec = 60
        y = (Decimal(x) / 2) ** 2
        term = total = Decimal(1)
        k = 0
        while True:
            k += 1
            term = term * y / (k * k)
            total += term
            if k > x and term < total * Decimal("1e-58"):
                return float(total.ln())


class TestDynamics:
    """Test NCV propagation with the amplitude random walk"""

    def test_transition_matrix_structure(self):
        """F is block diagonal with [[1, T], [0, 1]] blocks and unit amplitude"""
        F = transition_matrix(2.0)
        expected = np.eye(5)
        expected[0, 1] = expected[2, 3] = 2.0
        np.testing.assert_array_equal(F, expected)

    def test_process_noise_blocks(self):
        """Q1 for T_s = 2 is [[8/3, 2], [2, 2]]"""
        Q = process_noise(DynamicsParams(T_s=2.0, q=1.0, a_zeta=0.5))
        np.testing.assert_allclose(Q[:2, :2], [[8 / 3, 2.0], [2.0, 2.0]])
        np.testing.assert_allclose(Q[2:4, 2:4], [[8 / 3, 2.0], [2.0, 2.0]])
        assert Q[4, 4] == pytest.approx(1.0)
        assert np.count_nonzero(Q[:2, 2:]) == 0

    def test_zero_noise_is_pure_drift(self, rng):
        """q = 0 and a_zeta = 0 move the position by T_s times the velocity"""
        params = DynamicsParams(T_s=2.0, q=0.0, a_zeta=0.0)
        out = propagate(LabeledState([0, 10, 0, 0, 5], L1), params, rng)
        np.testing.assert_allclose(out.kinematic, [20, 10, 0, 0, 5])
        assert out.label == L1

    def test_empirical_covariance(self, rng):
        """10^5 propagations of one state match Q within 5%"""
        params = DynamicsParams(T_s=2.0, q=3.0, a_zeta=1.0)
        x0 = np.array([1000.0, -10.0, 1000.0, -10.0, 100.0])
        samples = propagate_points(np.tile(x0, (100_000, 1)), params, rng)
        cov = np.cov(samples, rowvar=False)
        Q = process_noise(params)
        nonzero = Q != 0
        np.testing.assert_allclose(cov[nonzero], Q[nonzero], rtol=0.05)
        assert np.all(np.abs(cov[~nonzero]) < 0.2)
        np.testing.assert_allclose(samples.mean(axis=0), transition_matrix(2.0) @ x0, atol=0.1)

    def test_amplitude_clamped_at_zero(self, rng):
        """A zero amplitude never goes negative"""
        params = DynamicsParams(T_s=1.0, q=1.0, a_zeta=4.0)
        out = propagate_points(np.tile([1000.0, 0, 0, 0, 0.0], (5000, 1)), params, rng)
        assert out[:, 4].min() >= 0.0
        assert np.mean(out[:, 4] == 0.0) > 0.4

    def test_drift_steps(self):
        """Three drift steps equal three single steps"""
        x = np.array([[0.0, 1.0, 5.0, -2.0, 1.0]])
        stepped = drift(drift(drift(x, 2.0), 2.0), 2.0)
        np.testing.assert_allclose(drift(x, 2.0, steps=3), stepped)

    def test_log_density_peaks_at_drift(self):
        """The kernel density is largest at F x"""
        params = DynamicsParams(T_s=1.0, q=1.0, a_zeta=1.0)
        x = np.array([[100.0, 1.0, 50.0, 0.0, 3.0]])
        mean = drift(x, 1.0)
        at_mean = transition_log_density(mean, x, params)[0]
        off = transition_log_density(mean + [1.0, 0, 0, 0, 0], x, params)[0]
        assert at_mean > off

    def test_ncv_transition_keeps_weights(self, rng):
        """NcvTransition moves particles and keeps their weights"""
        cloud = ParticleCloud(np.tile([100.0, 1.0, 0.0, 0.0, 2.0], (4, 1)), [0.1, 0.2, 0.3, 0.4])
        out = NcvTransition(DynamicsParams(T_s=1.0, q=0.0, a_zeta=0.0)).propagate(cloud, L1, rng)
        assert isinstance(out, ParticleCloud)
        np.testing.assert_allclose(out.weights, cloud.weights)
        np.testing.assert_allclose(out.points[:, 0], 101.0)

    @pytest.mark.parametrize("field", ["T_s", "q", "a_zeta"])
    def test_negative_parameters_rejected(self, field):
        """Negative dynamics parameters fail validation"""
        values = {"T_s": 1.0, "q": 1.0, "a_zeta": 1.0, field: -1.0}
        with pytest.raises(ValueError):
            DynamicsParams(**values)


class TestRadarGrid:
    """Test grid construction and coverage"""

    def test_uniform_shape(self, grid):
        """uniform() lays out the requested number of cells"""
        assert grid.shape == (21, 5, 11)
        assert grid.n_cells == 21 * 5 * 11
        assert grid.centroid(CENTER) == pytest.approx((1050.0, BEARING0 + 2 * math.radians(1.0), 0.0))

    def test_non_uniform_spacing_rejected(self):
        """Centroid spacing must equal the resolution"""
        with pytest.raises(SensorGeometryError):
            RadarGrid([0.0, 5.0, 11.0], [0.0], [0.0], 5.0, 1.0, 1.0, 1.0)

    @pytest.mark.parametrize("noise", [0.0, -1.0])
    def test_noise_power_must_be_positive(self, noise):
        """sigma_w^2 <= 0 is invalid"""
        with pytest.raises(SensorGeometryError):
            RadarGrid([0.0], [0.0], [0.0], 5.0, 1.0, 1.0, noise)

    def test_covering_contains_points(self):
        """A covering grid holds every point with a margin"""
        points = np.array([[1000.0, -10.0, 1250.0, -10.0, 3.0], [1250.0, -10.0, 1000.0, -10.0, 3.0]])
        grid = RadarGrid.covering(points, 5.0, math.radians(1.0), 1.0)
        assert np.all(grid.in_coverage(points))
        assert not grid.in_coverage(np.array([[10.0, 0.0, 10.0, 0.0, 1.0]]))[0]

    def test_covering_rejects_origin(self):
        """A state at the radar origin has no bearing"""
        with pytest.raises(SensorGeometryError):
            RadarGrid.covering(np.zeros((1, 5)), 5.0, 0.1, 1.0)

    def test_measurement_coordinates(self):
        """Range, bearing and Doppler of an inbound target"""
        r, b, d = measurement_coordinates(np.array([[3.0, -3.0, 4.0, -4.0, 1.0]]))
        assert r[0] == pytest.approx(5.0)
        assert b[0] == pytest.approx(math.atan2(4.0, 3.0))
        assert d[0] == pytest.approx(5.0)

    def test_doppler_undefined_at_origin(self):
        """Doppler is nan at r = 0"""
        _, _, d = measurement_coordinates(np.zeros((1, 5)))
        assert np.isnan(d[0])


class TestEchoAndFrame:
    """Test echo model, frames and SNR conversion"""

    @pytest.mark.parametrize("snr_db,expected", [(0.0, math.sqrt(2.0)), (7.0, 3.16603)])
    def test_amplitude_from_snr(self, snr_db, expected):
        """A_bar = sqrt(2 sigma_w^2 10^(snr/10))"""
        assert amplitude_from_snr(snr_db, 1.0) == pytest.approx(expected, abs=1e-5)

    def test_snr_inverse(self):
        """10 log10(A_bar^2 / 2) recovers the SNR"""
        assert snr_from_amplitude(amplitude_from_snr(7.0, 1.0), 1.0) == pytest.approx(7.0, abs=1e-12)

    def test_snr_requires_positive_noise(self):
        """sigma_w^2 must be > 0"""
        with pytest.raises(SensorGeometryError):
            amplitude_from_snr(7.0, 0.0)

    def test_negative_amplitude_rejected(self):
        """A_bar must be >= 0"""
        with pytest.raises(SensorGeometryError):
            EchoModel(-1.0)

    def test_other_fluctuation_models_rejected(self):
        """Only Swerling 0 is modelled"""
        with pytest.raises(SensorGeometryError):
            EchoModel(1.0, swerling="swerling1")

    @pytest.mark.parametrize(
        "powers",
        [np.zeros((2, 2)), -np.ones((2, 2, 2)), np.full((1, 1, 1), np.inf)],
    )
    def test_invalid_frames_rejected(self, powers):
        """Frames are 3-D, finite and non-negative"""
        with pytest.raises(SensorGeometryError):
            RadarFrame(powers)

    def test_frame_summaries(self):
        """mean_power and peak_power"""
        frame = RadarFrame(np.arange(8, dtype=float).reshape(2, 2, 2))
        assert frame.mean_power() == pytest.approx(3.5)
        assert frame.peak_power() == 7.0


class TestPsfAndTemplate:
    """Test the point spread function and target templates"""

    def test_psf_at_centroid(self, grid):
        """psf = 1 at the cell centroid"""
        assert psf(centered(grid), CENTER, grid) == pytest.approx(1.0)

    def test_psf_range_offset(self, grid):
        """5 m range offset with R = 5 gives exp(-2.5)"""
        value = psf(centered(grid, dr=5.0), CENTER, grid)
        assert value == pytest.approx(math.exp(-2.5), rel=1e-9)
        assert value == pytest.approx(0.082085, abs=1e-6)

    def test_psf_range_and_doppler_offset(self, grid):
        """(5 m, 0, 1 m/s) offsets give exp(-3)"""
        value = psf(centered(grid, dr=5.0, dd=1.0), CENTER, grid)
        assert value == pytest.approx(0.049787, abs=1e-6)

    def test_psf_at_origin_raises(self, grid):
        """Bearing and Doppler are undefined at the origin"""
        with pytest.raises(SensorGeometryError):
            psf(LabeledState(np.zeros(5), L1), CENTER, grid)

    def test_template_range_extent(self, grid):
        """Along range only offsets -5, 0, +5 m pass the 1e-2 threshold"""
        cells = template(centered(grid), grid).cell_set()
        along_range = {c[0] for c in cells if c[1] == CENTER[1] and c[2] == CENTER[2]}
        assert along_range == {9, 10, 11}

    def test_template_doppler_extent(self, grid):
        """Along Doppler offsets up to 3 m/s pass with D = 1"""
        cells = template(centered(grid), grid).cell_set()
        along_doppler = {c[2] for c in cells if c[0] == CENTER[0] and c[1] == CENTER[1]}
        assert along_doppler == set(range(2, 9))

    def test_template_values_match_psf(self, grid):
        """Template values are psf evaluations above the threshold"""
        state = centered(grid, dr=1.5, dd=0.3)
        tmpl = template(state, grid)
        for cell, value in zip(tmpl.cells, tmpl.values):
            assert value == pytest.approx(psf(state, tuple(cell), grid), rel=1e-12)
            assert value >= 1e-2

    def test_unit_threshold_keeps_nearest_cell(self, grid):
        """Threshold 1 leaves exactly the nearest cell"""
        tmpl = template(centered(grid, dr=1.0), grid, threshold=1.0)
        assert tmpl.cell_set() == {CENTER}

    def test_out_of_coverage_template(self, grid):
        """A target outside the grid has an empty template"""
        tmpl = template(state_at(500.0, BEARING0, 0.0), grid)
        assert not tmpl.in_coverage
        assert tmpl.cells.shape == (0, 3)

    def test_separated_targets_disjoint(self, grid):
        """Targets 80 m apart do not share cells"""
        b = grid.centroid(CENTER)[1]
        first = template(state_at(1010.0, b, 0.0), grid).cell_set()
        second = template(state_at(1090.0, b, 0.0, label=L2), grid).cell_set()
        assert first and second
        assert not first & second


class TestSynthesizeFrame:
    """Test Swerling-0 frame synthesis"""

    def test_same_seed_same_frame(self, grid):
        """Synthesis is a pure function of the generator state"""
        truth = [centered(grid)]
        a = synthesize_frame(truth, grid, np.random.default_rng(3))
        b = synthesize_frame(truth, grid, np.random.default_rng(3))
        np.testing.assert_array_equal(a.powers, b.powers)

    def test_noise_only_is_exponential(self):
        """Noise-only powers pass a KS test against Exp(mean 2 sigma_w^2) at alpha = 0.01"""
        grid = RadarGrid.uniform(1000.0, 100, 5.0, 0.0, 10, 0.1, -50.0, 100, 1.0)
        frame = synthesize_frame([], grid, np.random.default_rng(11))
        powers = frame.powers.reshape(-1)
        assert powers.size == 100_000
        assert powers.mean() == pytest.approx(2.0, abs=0.05)
        assert stats.kstest(powers, stats.expon(scale=2.0).cdf).pvalue > 0.01

    def test_noise_scales_with_sigma(self):
        """Mean noise power is 2 sigma_w^2"""
        grid = RadarGrid.uniform(1000.0, 100, 5.0, 0.0, 10, 0.1, -50.0, 100, 1.0, noise_power=3.0)
        frame = synthesize_frame([], grid, np.random.default_rng(12))
        assert frame.mean_power() == pytest.approx(6.0, abs=0.15)

    def test_noiseless_single_target(self, grid):
        """With vanishing noise the center cell holds A_bar^2"""
        quiet = RadarGrid.uniform(1000.0, 21, 5.0, BEARING0, 5, math.radians(1.0), -5.0, 11, 1.0, 1e-14)
        frame = synthesize_frame([centered(quiet)], quiet, np.random.default_rng(0), EchoModel(3.0))
        assert frame.powers[CENTER] == pytest.approx(9.0, rel=1e-5)

    def test_noiseless_coincident_targets_interfere(self):
        """Two coincident echoes superpose within [0, 4 A_bar^2]"""
        quiet = RadarGrid.uniform(1000.0, 21, 5.0, BEARING0, 5, math.radians(1.0), -5.0, 11, 1.0, 1e-14)
        truth = [centered(quiet, L1), centered(quiet, L2)]
        for seed in range(20):
            frame = synthesize_frame(truth, quiet, np.random.default_rng(seed), EchoModel(3.0))
            assert -1e-9 <= frame.powers[CENTER] <= 36.0 + 1e-6

    def test_target_cell_mean_power(self, grid):
        """Center-cell power has mean 2 sigma_w^2 + A_bar^2"""
        rng = np.random.default_rng(21)
        truth = [centered(grid)]
        samples = np.array([synthesize_frame(truth, grid, rng).powers[CENTER] for _ in range(2000)])
        # variance of |A + w|^2 is 4 sigma^4 + 4 sigma^2 A^2 = 40
        assert samples.mean() == pytest.approx(11.0, abs=5 * math.sqrt(40.0 / 2000))

    def test_target_cell_mean_power_at_7db(self, grid):
        """At 7 dB the center-cell mean is 2 + 2 * 10^0.7 within 3 standard errors"""
        amplitude = amplitude_from_snr(7.0, 1.0)
        rng = np.random.default_rng(7)
        truth = [centered(grid, amplitude=amplitude)]
        samples = np.array([synthesize_frame(truth, grid, rng).powers[CENTER] for _ in range(4000)])
        standard_error = samples.std(ddof=1) / math.sqrt(samples.size)
        assert abs(samples.mean() - (2.0 + 2.0 * 10**0.7)) < 3 * standard_error

    def test_out_of_coverage_target_ignored(self, grid):
        """A target outside the grid contributes nothing"""
        far = state_at(5000.0, BEARING0, 0.0)
        a = synthesize_frame([far], grid, np.random.default_rng(4))
        rng = np.random.default_rng(4)
        rng.uniform(0.0, 2.0 * math.pi, size=1)
        b = synthesize_frame([], grid, rng)
        np.testing.assert_allclose(a.powers, b.powers)


class TestNoiselessFrame:
    """Ideal power maps without noise or phase"""

    def test_center_cell_holds_amplitude_squared(self, grid):
        """psf = 1 at the centroid, so the cell holds A^2"""
        frame = noiseless_frame([centered(grid)], grid)
        assert frame.powers[CENTER] == pytest.approx(9.0)
        assert frame.peak_power() == pytest.approx(9.0)

    def test_template_cells_only(self, grid):
        """(A psf)^2 on the template, zero everywhere else"""
        state = centered(grid, dr=1.5, dd=0.25)
        tmpl = template(state, grid)
        frame = noiseless_frame([state], grid)
        np.testing.assert_allclose(frame.powers[tuple(tmpl.cells.T)], (3.0 * tmpl.values) ** 2)
        assert frame.powers.sum() == pytest.approx(float(np.sum((3.0 * tmpl.values) ** 2)))

    def test_echo_model_overrides_amplitude(self, grid):
        """EchoModel.A_bar replaces the state amplitude"""
        frame = noiseless_frame([centered(grid, amplitude=3.0)], grid, EchoModel(2.0))
        assert frame.powers[CENTER] == pytest.approx(4.0)

    def test_objects_add_in_power(self, grid):
        """Overlapping objects sum their powers, with no interference term"""
        a, b = centered(grid, L1), centered(grid, L2, dr=5.0)
        both = noiseless_frame([a, b], grid)
        np.testing.assert_allclose(both.powers, noiseless_frame([a], grid).powers + noiseless_frame([b], grid).powers)

    def test_empty_and_out_of_coverage(self, grid):
        """No object in coverage gives an all-zero map"""
        assert noiseless_frame([], grid).peak_power() == 0.0
        assert noiseless_frame([state_at(5000.0, BEARING0, 0.0)], grid).peak_power() == 0.0

    def test_matches_vanishing_noise_synthesis(self):
        """A single object with sigma_w^2 -> 0 synthesizes the same map"""
        quiet = RadarGrid.uniform(1000.0, 21, 5.0, BEARING0, 5, math.radians(1.0), -5.0, 11, 1.0, 1e-14)
        truth = [centered(quiet, dr=2.0)]
        noisy = synthesize_frame(truth, quiet, np.random.default_rng(5), EchoModel(3.0))
        np.testing.assert_allclose(noisy.powers, noiseless_frame(truth, quiet, EchoModel(3.0)).powers, atol=1e-5)

    def test_binary_dump_keeps_map(self, grid, tmp_path):
        """The map survives the binary frame dump unchanged"""
        frame = noiseless_frame([centered(grid)], grid)
        dump_frame_binary(frame, tmp_path / "ideal.bin")
        np.testing.assert_array_equal(load_frame_binary(tmp_path / "ideal.bin").powers, frame.powers)


class TestCellLikelihood:
    """Test log I0 and the per-cell likelihood ratio"""

    @pytest.mark.parametrize("x", [0.0, 0.5, 5.0, 19.9, 20.1, 200.0])
    def test_log_i0_against_quadrature(self, x):
        """log I0 agrees with x + log((1/pi) int_0^pi exp(x (cos t - 1)) dt)"""
        integral, _ = integrate.quad(lambda t: math.exp(x * (math.cos(t) - 1.0)), 0.0, math.pi, limit=200)
        expected = x + math.log(integral / math.pi)
        assert float(log_i0(x)) == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_log_i0_against_decimal_reference(self):
        """50 log-spaced arguments in [1e-6, 1e4] within 1e-9 relative of a 60-digit series"""
        xs = np.logspace(-6, 4, 50)
        values = log_i0(xs)
        for x, value in zip(xs, values):
            assert value == pytest.approx(decimal_log_i0(float(x)), rel=1e-9)

    def test_zero_expected_power_is_neutral(self):
        """z_hat = 0 gives a ratio of 1"""
        assert cell_log_likelihood_ratio(7.3, 0.0, 1.0) == 0.0

    def test_zero_power(self):
        """z = 0, z_hat = 4 gives -2"""
        assert cell_log_likelihood_ratio(0.0, 4.0, 1.0) == pytest.approx(-2.0)

    def test_strong_return(self):
        """z = 400, z_hat = 100 gives -50 + log I0(200) > 0"""
        value = cell_log_likelihood_ratio(400.0, 100.0, 1.0)
        assert value == pytest.approx(-50.0 + float(log_i0(200.0)), rel=1e-12)
        assert math.isfinite(value) and value > 0

    def test_monotone_in_power(self):
        """Increasing z increases the ratio for fixed z_hat > 0"""
        values = cell_log_likelihood_ratio(np.linspace(0.0, 50.0, 101), 9.0, 1.0)
        assert np.all(np.diff(values) > 0)

    def test_scalar_returns_float(self):
        """Scalar inputs give a plain float"""
        assert isinstance(cell_log_likelihood_ratio(1.0, 1.0, 1.0), float)


class TestFrameLikelihood:
    """Test separable and joint frame likelihoods"""

    def test_empty_set_is_zero(self, grid, rng):
        """log g(z | {}) = 0"""
        frame = synthesize_frame([], grid, rng)
        assert frame_log_likelihood(frame, [], grid) == 0.0

    def test_center_cell_value(self, grid):
        """z = A_bar^2 at the only template cell gives -A^2/2 + log I0(A^2)"""
        powers = np.zeros(grid.shape)
        powers[CENTER] = 9.0
        value = separable_frame_log_likelihood(
            RadarFrame(powers), centered(grid), grid, EchoModel(3.0), threshold=1.0
        )
        assert value == pytest.approx(-4.5 + float(log_i0(9.0)), rel=1e-9)

    def test_out_of_coverage_is_zero(self, grid, rng):
        """An empty template contributes nothing"""
        frame = synthesize_frame([], grid, rng)
        assert separable_frame_log_likelihood(frame, state_at(5000.0, BEARING0, 0.0), grid) == 0.0

    def test_single_target_matches_separable(self, grid, rng):
        """One target: joint and separable forms agree"""
        state = centered(grid, dr=1.0)
        frame = synthesize_frame([state], grid, rng)
        assert frame_log_likelihood(frame, [state], grid) == pytest.approx(
            separable_frame_log_likelihood(frame, state, grid), abs=1e-12
        )

    def test_disjoint_pair_is_sum(self, grid, rng):
        """Disjoint templates: the joint ratio is the sum of single ratios"""
        b = grid.centroid(CENTER)[1]
        pair = [state_at(1010.0, b, 0.0, label=L1), state_at(1090.0, b, 0.0, label=L2)]
        frame = synthesize_frame(pair, grid, rng)
        expected = sum(separable_frame_log_likelihood(frame, s, grid) for s in pair)
        assert frame_log_likelihood(frame, pair, grid) == pytest.approx(expected, abs=1e-12)

    def test_overlapping_pair_uses_union(self, grid, rng):
        """Overlapping templates: in-phase sum over the template union"""
        pair = [centered(grid, L1), centered(grid, L2, dd=1.0, amplitude=2.0)]
        frame = synthesize_frame(pair, grid, rng)

        z_hat_amp = {}
        for state in pair:
            tmpl = template(state, grid)
            for cell, value in zip(tmpl.cells, tmpl.values):
                key = tuple(int(i) for i in cell)
                z_hat_amp[key] = z_hat_amp.get(key, 0.0) + state.amplitude * value
        expected = sum(
            cell_log_likelihood_ratio(frame.powers[cell], amp**2, grid.noise_power)
            for cell, amp in z_hat_amp.items()
        )

        joint = frame_log_likelihood(frame, pair, grid)
        separable = sum(separable_frame_log_likelihood(frame, s, grid) for s in pair)
        assert joint == pytest.approx(expected, rel=1e-9)
        assert joint != pytest.approx(separable, rel=1e-6)

    def test_permutation_invariant(self, grid, rng):
        """Reordering objects in a joint sample leaves the ratio unchanged"""
        a, b = centered(grid, L1), centered(grid, L2, dr=2.0, dd=0.5)
        frame = synthesize_frame([a, b], grid, rng)
        forward = joint_log_likelihood_batch(frame, np.stack([a.kinematic, b.kinematic])[None], grid)
        backward = joint_log_likelihood_batch(frame, np.stack([b.kinematic, a.kinematic])[None], grid)
        assert forward[0] == pytest.approx(backward[0], rel=1e-12)

    def test_batch_without_objects(self, grid, rng):
        """n = 0 objects gives zeros for every sample"""
        frame = synthesize_frame([], grid, rng)
        np.testing.assert_array_equal(joint_log_likelihood_batch(frame, np.zeros((4, 0, 5)), grid), 0.0)

    def test_batch_matches_single_evaluations(self, grid, rng):
        """Vectorized separable evaluation agrees with per-state calls"""
        states = [centered(grid, dr=dr) for dr in (-3.0, 0.0, 2.5)]
        frame = synthesize_frame(states[:1], grid, rng)
        batch = separable_log_likelihood_batch(frame, np.stack([s.kinematic for s in states]), grid)
        single = [separable_frame_log_likelihood(frame, s, grid) for s in states]
        np.testing.assert_allclose(batch, single, rtol=1e-12, atol=1e-12)


class TestRadarLikelihood:
    """Test the filter-facing likelihood wrapper"""

    def test_shape_mismatch(self, grid):
        """Frame and grid shapes must agree"""
        with pytest.raises(SensorGeometryError):
            RadarLikelihood(RadarFrame(np.zeros((2, 2, 2))), grid)

    def test_forms_agree_with_functions(self, grid, rng):
        """Callable and log_gamma delegate to the batch evaluators"""
        state = centered(grid)
        frame = synthesize_frame([state], grid, rng)
        lik = RadarLikelihood(frame, grid)
        points = state.kinematic[None, :]
        np.testing.assert_allclose(lik.log_gamma(points, L1), separable_log_likelihood_batch(frame, points, grid))
        np.testing.assert_allclose(
            lik((L1,), points[:, None, :]), joint_log_likelihood_batch(frame, points[:, None, :], grid)
        )
        np.testing.assert_allclose(lik.separable().evaluate(points, L1), lik.log_gamma(points, L1))

    def test_fixed_amplitude(self, grid, rng):
        """A fixed amplitude overrides the state's own"""
        frame = synthesize_frame([centered(grid)], grid, rng)
        lik = RadarLikelihood(frame, grid, amplitude=3.0)
        low = centered(grid, amplitude=0.5).kinematic[None, :]
        high = centered(grid, amplitude=3.0).kinematic[None, :]
        np.testing.assert_allclose(lik.log_gamma(low, L1), lik.log_gamma(high, L1))


class TestFrameIO:
    """Test binary and CSV frame dumps"""

    def test_binary_layout(self, tmp_path):
        """Header of three int32 dims then float64 powers in C order"""
        powers = np.arange(24, dtype=float).reshape(2, 3, 4)
        path = dump_frame_binary(RadarFrame(powers), tmp_path / "frame.bin")
        raw = path.read_bytes()
        assert len(raw) == 12 + 8 * 24
        np.testing.assert_array_equal(np.frombuffer(raw[:12], dtype="<i4"), [2, 3, 4])
        np.testing.assert_array_equal(np.frombuffer(raw[12:], dtype="<f8"), np.arange(24))
        np.testing.assert_array_equal(load_frame_binary(path).powers, powers)

    def test_truncated_binary_rejected(self, tmp_path):
        """Data length must match the header"""
        path = dump_frame_binary(RadarFrame(np.ones((2, 2, 2))), tmp_path / "frame.bin")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(SensorGeometryError):
            load_frame_binary(path)

    def test_short_header_rejected(self, tmp_path):
        """Fewer than 12 bytes cannot hold the header"""
        path = tmp_path / "frame.bin"
        path.write_bytes(b"\x01\x00")
        with pytest.raises(SensorGeometryError):
            load_frame_binary(path)

    def test_csv_lists_every_cell(self, tmp_path):
        """One row per cell with its indices and power"""
        powers = np.arange(8, dtype=float).reshape(2, 2, 2)
        path = dump_frame_csv(RadarFrame(powers), tmp_path / "frame.csv")
        table = pd.read_csv(path)
        assert list(table.columns) == ["range_idx", "azimuth_idx", "doppler_idx", "power"]
        assert len(table) == 8
        row = table[(table.range_idx == 1) & (table.azimuth_idx == 0) & (table.doppler_idx == 1)]
        assert row.power.iloc[0] == 5.0
