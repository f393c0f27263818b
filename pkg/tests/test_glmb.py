"""
Test Suite for single-object densities, delta-GLMB / LMB densities and
their statistics.
"""

import numpy as np
import pytest

from src.core.labels import EMPTY_LABEL_SET, Label, LabelSet
from src.glmb import (
    DegeneratePosteriorError,
    DensityError,
    DGlmbComponent,
    DGlmbDensity,
    DiscreteGridDensity,
    EnumerationLimitError,
    LmbDensity,
    LmbTrack,
    ParticleCloud,
    cardinality,
    expected_cardinality,
    from_log_weights,
    lmb_to_dglmb,
    lmb_weight,
    mix,
    normalize,
    phd,
    truncate,
    unlabeled_phd,
)

L1, L2, L3 = Label(0, 0), Label(0, 1), Label(0, 2)
GRID = np.array([[0.0], [1.0]])


def grid_density(masses=(0.5, 0.5)):
    return DiscreteGridDensity(GRID, masses)


def component(labels, weight, masses=(0.5, 0.5)):
    return DGlmbComponent(LabelSet(labels), weight, {l: grid_density(masses) for l in labels})


@pytest.fixture
def four_sets():
    """{(empty,.25), ({l1},.25), ({l2},.25), ({l1,l2},.25)}"""
    return DGlmbDensity(
        [component([], 0.25), component([L1], 0.25), component([L2], 0.25), component([L1, L2], 0.25)]
    )


def random_dglmb(rng, n_labels=3):
    labels = LabelSet(Label(0, i) for i in range(n_labels))
    sets = list(labels.subsets())
    weights = rng.dirichlet(np.ones(len(sets)))
    return DGlmbDensity(
        DGlmbComponent(s, float(w), {l: grid_density(rng.dirichlet([1.0, 1.0])) for l in s})
        for s, w in zip(sets, weights / weights.sum())
    )


class TestSingleObjectDensities:
    """Particle clouds and grid densities"""

    def test_weights_must_sum_to_one(self):
        """Unnormalized weights are rejected unless normalize=True"""
        with pytest.raises(DensityError):
            ParticleCloud([[0.0], [1.0]], [0.5, 0.6])
        cloud = ParticleCloud([[0.0], [1.0]], [1.0, 3.0], normalize=True)
        np.testing.assert_allclose(cloud.weights, [0.25, 0.75])

    def test_negative_weight(self):
        """Weights are non-negative"""
        with pytest.raises(DensityError):
            ParticleCloud([[0.0], [1.0]], [1.5, -0.5])

    def test_default_weights_uniform(self):
        """No weights means uniform"""
        cloud = ParticleCloud(np.zeros((4, 5)))
        assert cloud.is_uniform()
        assert cloud.dim == 5

    def test_reweight_log(self):
        """p = (0.5, 0.5), gamma = (2, 1) gives (2/3, 1/3) and eta = 1.5"""
        post, log_eta = grid_density().reweight_log(np.log([2.0, 1.0]))
        np.testing.assert_allclose(post.masses, [2 / 3, 1 / 3])
        assert np.exp(log_eta) == pytest.approx(1.5)

    def test_reweight_to_zero(self):
        """Zero likelihood everywhere yields no posterior"""
        post, log_eta = grid_density().reweight_log(np.array([-np.inf, -np.inf]))
        assert post is None
        assert log_eta == -np.inf

    def test_mix_grid_exact(self):
        """Grid densities on one grid are summed cell by cell"""
        mixed = mix([grid_density((1.0, 0.0)), grid_density((0.0, 1.0))], [3.0, 1.0])
        assert isinstance(mixed, DiscreteGridDensity)
        np.testing.assert_allclose(mixed.masses, [0.75, 0.25])

    def test_mix_clouds_concatenate(self):
        """Clouds are concatenated with scaled weights"""
        a = ParticleCloud([[0.0], [1.0]])
        b = ParticleCloud([[5.0]])
        mixed = mix([a, b], [0.5, 0.5])
        assert mixed.size == 3
        np.testing.assert_allclose(mixed.weights, [0.25, 0.25, 0.5])

    def test_mix_zero_weights(self):
        """All-zero mixture weights are degenerate"""
        with pytest.raises(DegeneratePosteriorError):
            mix([grid_density()], [0.0])


class TestDGlmbDensity:
    """Container invariants"""

    def test_keys_match_label_set(self):
        """densities.keys must equal the label set"""
        with pytest.raises(DensityError):
            DGlmbComponent(LabelSet([L1]), 1.0, {L2: grid_density()})

    def test_negative_weight(self):
        """Weights are >= 0"""
        with pytest.raises(DensityError):
            component([L1], -0.1)

    def test_weights_sum_to_one(self):
        """Unnormalized densities are rejected by default"""
        with pytest.raises(DensityError):
            DGlmbDensity([component([], 0.5), component([L1], 0.4)])

    def test_duplicate_label_sets(self):
        """One component per label set"""
        with pytest.raises(DensityError):
            DGlmbDensity([component([L1], 0.5), component([L1], 0.5)])

    def test_lookup_and_labels(self, four_sets):
        """component() finds by label set, labels() is the union"""
        assert four_sets.component(LabelSet([L1, L2])).weight == 0.25
        assert four_sets.component(LabelSet([L3])) is None
        assert four_sets.labels() == LabelSet([L1, L2])


class TestCardinality:
    """rho(n)"""

    def test_empty(self):
        """Only the empty set: rho(0) = 1"""
        rho = cardinality(DGlmbDensity([component([], 1.0)]))
        np.testing.assert_allclose(rho.masses, [1.0])

    def test_four_sets(self, four_sets):
        """Uniform over subsets of two labels: [0.25, 0.5, 0.25]"""
        rho = cardinality(four_sets)
        np.testing.assert_allclose(rho.masses, [0.25, 0.5, 0.25])
        assert rho.mean() == pytest.approx(1.0)
        assert rho.variance() == pytest.approx(0.5)
        assert rho.map_estimate() == 1
        assert rho[5] == 0.0

    def test_map_ties_lowest(self):
        """Ties resolve to the smaller cardinality"""
        d = DGlmbDensity([component([], 0.5), component([L1], 0.5)])
        assert cardinality(d).map_estimate() == 0

    def test_lmb_matches(self):
        """LMB with r = 0.5, 0.5 gives the same rho"""
        lmb = LmbDensity({L1: LmbTrack(0.5, grid_density()), L2: LmbTrack(0.5, grid_density())})
        np.testing.assert_allclose(cardinality(lmb_to_dglmb(lmb)).masses, [0.25, 0.5, 0.25])

    def test_poisson_binomial(self, rng):
        """LMB cardinality equals the convolution of Bernoulli pmfs"""
        r = rng.uniform(0.05, 0.95, size=4)
        lmb = LmbDensity({Label(1, i): LmbTrack(float(p), grid_density()) for i, p in enumerate(r)})
        expected = np.array([1.0])
        for p in r:
            expected = np.convolve(expected, [1 - p, p])
        np.testing.assert_allclose(cardinality(lmb_to_dglmb(lmb)).masses, expected, atol=1e-10)


class TestPhd:
    """Labeled PHD"""

    def test_single_component(self):
        """{l1} with weight 1: v = p, mass 1"""
        d = DGlmbDensity([component([L1], 1.0, (0.2, 0.8))])
        v = phd(d)
        assert v.mass(L1) == pytest.approx(1.0)
        np.testing.assert_allclose(v.intensity(L1), [0.2, 0.8])

    def test_four_sets_mass(self, four_sets):
        """mass(l1) = 0.25 + 0.25"""
        assert phd(four_sets).mass(L1) == pytest.approx(0.5)

    def test_empty_density(self):
        """No labels, no mass"""
        v = phd(DGlmbDensity([component([], 1.0)]))
        assert v.total_mass() == 0.0
        assert v.mass(L1) == 0.0

    def test_intensity_is_weighted_mixture(self):
        """v(., l) = sum of w p over sets containing l"""
        d = DGlmbDensity([component([L1], 0.6, (1.0, 0.0)), component([L1, L2], 0.4, (0.0, 1.0))])
        np.testing.assert_allclose(phd(d).intensity(L1), [0.6, 0.4])

    def test_first_moment_identity(self, rng):
        """Total PHD mass equals expected cardinality"""
        for _ in range(10):
            d = random_dglmb(rng)
            assert phd(d).total_mass() == pytest.approx(expected_cardinality(d), abs=1e-6)

    def test_unlabeled(self, four_sets):
        """Summing over labels"""
        total, density = unlabeled_phd(four_sets)
        assert total == pytest.approx(1.0)
        np.testing.assert_allclose(density.weights, [0.5, 0.5])
        assert unlabeled_phd(DGlmbDensity([component([], 1.0)])) == (0.0, None)


class TestLmb:
    """LMB weights and expansion"""

    def test_no_tracks(self):
        """Empty products"""
        assert lmb_weight(LmbDensity({}), EMPTY_LABEL_SET) == 1.0
        d = lmb_to_dglmb(LmbDensity({}))
        assert len(d) == 1
        assert d.components[0].label_set == EMPTY_LABEL_SET

    def test_symmetric(self):
        """r = (0.5, 0.5), L = {l1} -> 0.25"""
        lmb = LmbDensity({L1: LmbTrack(0.5, grid_density()), L2: LmbTrack(0.5, grid_density())})
        assert lmb_weight(lmb, LabelSet([L1])) == pytest.approx(0.25)
        assert all(c.weight == pytest.approx(0.25) for c in lmb_to_dglmb(lmb))

    def test_three_births(self):
        """Three births with r = 0.01: P(none) = 0.99^3"""
        lmb = LmbDensity({Label(1, i): LmbTrack(0.01, grid_density()) for i in range(3)})
        assert lmb_weight(lmb, EMPTY_LABEL_SET) == pytest.approx(0.970299, abs=1e-12)

    def test_unknown_label(self):
        """Labels outside the tracks weigh 0"""
        lmb = LmbDensity({L1: LmbTrack(0.5, grid_density())})
        assert lmb_weight(lmb, LabelSet([L2])) == 0.0

    def test_certain_track(self):
        """r = 1: sets omitting the track weigh exactly 0"""
        lmb = LmbDensity({L1: LmbTrack(1.0, grid_density()), L2: LmbTrack(0.3, grid_density())})
        assert lmb_weight(lmb, LabelSet([L2])) == 0.0
        assert lmb_weight(lmb, LabelSet([L1])) == pytest.approx(0.7)

    def test_random_tracks_normalized(self, rng):
        """Expansion of three random tracks sums to 1"""
        lmb = LmbDensity({Label(0, i): LmbTrack(float(rng.uniform()), grid_density()) for i in range(3)})
        d = lmb_to_dglmb(lmb)
        assert len(d) == 8
        assert d.total_weight == pytest.approx(1.0, abs=1e-9)

    def test_cap(self):
        """Too many tracks refuses to enumerate"""
        lmb = LmbDensity({Label(0, i): LmbTrack(0.5, grid_density()) for i in range(4)})
        with pytest.raises(EnumerationLimitError):
            lmb_to_dglmb(lmb, max_tracks=3)

    def test_existence_range(self):
        """r outside [0, 1] is rejected"""
        with pytest.raises(DensityError):
            LmbTrack(1.5, grid_density())


class TestNormalizeTruncate:
    """Normalization and truncation"""

    def unnormalized(self, *weights):
        labels = [[], [L1], [L2], [L1, L2]]
        return DGlmbDensity([component(l, w) for l, w in zip(labels, weights)], require_normalized=False)

    def test_normalize(self):
        """(2, 2) -> (0.5, 0.5); (1, 0) -> (1, 0)"""
        np.testing.assert_allclose(normalize(self.unnormalized(2.0, 2.0)).weights, [0.5, 0.5])
        np.testing.assert_allclose(normalize(self.unnormalized(1.0, 0.0)).weights, [1.0, 0.0])

    def test_normalize_degenerate(self):
        """(0, 0) has no normalization"""
        with pytest.raises(DegeneratePosteriorError):
            normalize(self.unnormalized(0.0, 0.0))

    def test_from_log_weights(self):
        """-inf entries are dropped, the rest normalized"""
        d = from_log_weights(
            [
                (EMPTY_LABEL_SET, np.log(1.0), {}),
                (LabelSet([L1]), np.log(3.0), {L1: grid_density()}),
                (LabelSet([L2]), -np.inf, {L2: grid_density()}),
            ]
        )
        np.testing.assert_allclose(d.weights, [0.25, 0.75])

    def test_from_log_weights_degenerate(self):
        """All -inf is degenerate"""
        with pytest.raises(DegeneratePosteriorError):
            from_log_weights([(EMPTY_LABEL_SET, -np.inf, {})])

    def test_keep_heaviest(self):
        """(0.7, 0.2, 0.1) capped at 2 -> (7/9, 2/9)"""
        d = DGlmbDensity([component([], 0.7), component([L1], 0.2), component([L2], 0.1)])
        out = truncate(d, 2)
        np.testing.assert_allclose(sorted(out.weights, reverse=True), [7 / 9, 2 / 9])

    def test_cap_above_count(self, four_sets):
        """A large cap keeps everything"""
        out = truncate(four_sets, 10)
        assert len(out) == 4
        np.testing.assert_allclose(out.weights, four_sets.weights)

    def test_tie_break(self, four_sets):
        """Equal weights: the canonically first set survives"""
        out = truncate(four_sets, 1)
        assert out.components[0].label_set == EMPTY_LABEL_SET
        assert out.components[0].weight == 1.0

    def test_min_weight_keeps_top(self):
        """A threshold above every weight still keeps the heaviest"""
        d = DGlmbDensity([component([], 0.6), component([L1], 0.4)])
        out = truncate(d, 5, min_weight=0.9)
        assert len(out) == 1
        assert out.components[0].label_set == EMPTY_LABEL_SET

    def test_idempotent(self, rng):
        """Truncating twice changes nothing"""
        d = random_dglmb(rng)
        once = truncate(d, 3, min_weight=0.01)
        twice = truncate(once, 3, min_weight=0.01)
        assert [c.label_set for c in once] == [c.label_set for c in twice]
        np.testing.assert_allclose(once.weights, twice.weights)

    def test_bad_cap(self, four_sets):
        """max_components >= 1"""
        with pytest.raises(DensityError):
            truncate(four_sets, 0)
