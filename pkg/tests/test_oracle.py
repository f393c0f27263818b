"""
Test Suite for the exhaustive set-integral oracle and the selftest suite.
"""

import math

import numpy as np
import pytest

from src.core.labels import Label, LabelSet
from src.glmb import DGlmbComponent, DGlmbDensity, DiscreteGridDensity, ParticleCloud
from src.oracle import (
    MAX_ORACLE_LABELS,
    MAX_ORACLE_POINTS,
    DiscreteInstance,
    OracleLimitError,
    OracleNormalizationError,
    cardinality,
    default_label_space,
    enumerate_sets,
    exact_bayes,
    from_dglmb,
    kld,
    phd,
    random_grid,
    random_grid_dglmb,
    random_instance,
    set_integral,
)
from src.oracle.selftest import MOMENT_TOLERANCE, POINTWISE_TOLERANCE, SelfTestReport, run_selftest

L1, L2 = Label(0, 0), Label(0, 1)
GRID = np.array([[0.0], [1.0]])


def flat_instance():
    """Uniform over the 9 labeled sets of 2 labels on 2 points"""
    space = default_label_space(2)
    keys = list(enumerate_sets(space, 2))
    return DiscreteInstance(space, GRID, {k: 1 / len(keys) for k in keys})


class TestEnumeration:
    """Labeled-set enumeration"""

    @pytest.mark.parametrize("n_labels,n_points,count", [(0, 3, 1), (1, 3, 4), (2, 3, 16), (3, 2, 27)])
    def test_count(self, n_labels, n_points, count):
        """sum over n of C(labels, n) points^n"""
        assert len(list(enumerate_sets(default_label_space(n_labels), n_points))) == count

    def test_canonical_keys(self):
        """Each set appears once, labels sorted"""
        keys = list(enumerate_sets(default_label_space(2), 2))
        assert len(keys) == len(set(keys))
        for key in keys:
            labels = [label for label, _ in key]
            assert labels == sorted(labels)


class TestDiscreteInstance:
    """Construction rules"""

    def test_label_cap(self):
        """More labels than the cap"""
        with pytest.raises(OracleLimitError):
            DiscreteInstance(default_label_space(MAX_ORACLE_LABELS + 1), GRID, {(): 1.0})

    def test_point_cap(self):
        """More grid points than the cap"""
        grid = np.arange(MAX_ORACLE_POINTS + 1, dtype=float)
        with pytest.raises(OracleLimitError):
            DiscreteInstance(default_label_space(1), grid, {(): 1.0})

    def test_normalization(self):
        """Masses must sum to 1"""
        with pytest.raises(OracleNormalizationError):
            DiscreteInstance(default_label_space(1), GRID, {(): 0.5})

    def test_non_canonical_key(self):
        """Keys list labels in canonical order"""
        with pytest.raises(OracleNormalizationError):
            DiscreteInstance(default_label_space(2), GRID, {((L2, 0), (L1, 0)): 1.0})

    def test_unknown_label(self):
        """Labels come from the label space"""
        with pytest.raises(OracleNormalizationError):
            DiscreteInstance(default_label_space(1), GRID, {((L2, 0),): 1.0})

    def test_points(self):
        """points() returns the (n, d) kinematics of a set"""
        inst = flat_instance()
        np.testing.assert_array_equal(inst.points(((L1, 1), (L2, 0))), [[1.0], [0.0]])


class TestSetIntegral:
    """Set integrals and statistics"""

    def test_total(self):
        """The integral of 1 is the total mass"""
        assert set_integral(lambda key, x: 1.0, flat_instance()) == pytest.approx(1.0)

    def test_expected_size(self):
        """Integral of |X| is the mean cardinality"""
        inst = flat_instance()
        assert set_integral(lambda key, x: len(key), inst) == pytest.approx(cardinality(inst).mean())

    def test_cardinality_and_phd(self):
        """rho = (1, 4, 4)/9, v(x, l) = 3/9 at each point"""
        inst = flat_instance()
        np.testing.assert_allclose(cardinality(inst).masses, [1 / 9, 4 / 9, 4 / 9])
        for label in inst.label_space:
            np.testing.assert_allclose(phd(inst)[label], [3 / 9, 3 / 9])


class TestExactBayes:
    """Brute-force posterior"""

    def test_flat_likelihood(self):
        """Uninformative likelihood returns the prior"""
        inst = flat_instance()
        post = exact_bayes(inst, lambda labels, x: np.zeros(x.shape[0]))
        for key in inst.masses:
            assert post.mass(key) == pytest.approx(inst.mass(key))

    def test_count_likelihood(self):
        """g = 2^|X| favours larger sets"""
        inst = flat_instance()
        post = exact_bayes(inst, lambda labels, x: np.full(x.shape[0], len(labels) * math.log(2.0)))
        np.testing.assert_allclose(cardinality(post).masses, np.array([1, 8, 16]) / 25)

    def test_zero_normalizer(self):
        """g = 0 everywhere"""
        with pytest.raises(OracleNormalizationError):
            exact_bayes(flat_instance(), lambda labels, x: np.full(x.shape[0], -np.inf))


class TestKld:
    """Kullback-Leibler divergence"""

    def test_self(self, rng):
        """D(p || p) = 0"""
        inst = random_instance(rng)
        assert kld(inst, inst) == pytest.approx(0.0, abs=1e-15)

    def test_positive(self, rng):
        """Two different instances on one space"""
        grid = random_grid(rng, 3)
        a, b = random_instance(rng, grid=grid), random_instance(rng, grid=grid)
        assert kld(a, b) > 0

    def test_support_failure(self):
        """Mass of p where q has none"""
        space = default_label_space(1)
        p = DiscreteInstance(space, GRID, {(): 0.5, ((L1, 0),): 0.5})
        q = DiscreteInstance(space, GRID, {(): 1.0})
        assert kld(p, q) == math.inf
        assert kld(q, p) == pytest.approx(math.log(2.0))

    def test_space_mismatch(self, rng):
        """Instances on different grids"""
        with pytest.raises(OracleLimitError):
            kld(random_instance(rng, n_points=2), random_instance(rng, n_points=3))


class TestFromDglmb:
    """Expansion of grid delta-GLMBs"""

    def test_product_masses(self):
        """w(L) prod p(x_l, l)"""
        d = DGlmbDensity(
            [
                DGlmbComponent(LabelSet(), 0.5, {}),
                DGlmbComponent(
                    LabelSet([L1, L2]),
                    0.5,
                    {L1: DiscreteGridDensity(GRID, [0.25, 0.75]), L2: DiscreteGridDensity(GRID, [1.0, 0.0])},
                ),
            ]
        )
        inst = from_dglmb(d, GRID)
        assert inst.mass(()) == 0.5
        assert inst.mass(((L1, 1), (L2, 0))) == pytest.approx(0.375)
        assert inst.mass(((L1, 1), (L2, 1))) == 0.0

    def test_particles_rejected(self):
        """Only grid densities on the oracle grid expand"""
        d = DGlmbDensity([DGlmbComponent(LabelSet([L1]), 1.0, {L1: ParticleCloud([[0.0]])})])
        with pytest.raises(OracleLimitError):
            from_dglmb(d, GRID)

    def test_random_dglmb_normalized(self, rng):
        """Generated densities expand to normalized instances"""
        d, grid = random_grid_dglmb(rng, n_labels=3, n_points=2, n_components=5)
        assert len(d) == 5
        assert from_dglmb(d, grid, default_label_space(3)).total_mass() == pytest.approx(1.0)


class TestSelfTest:
    """The property suite behind the selftest command"""

    def test_all_checks_pass(self):
        """Every algebraic property holds on random instances"""
        report = run_selftest(seed=7, instances=3, perturbations=20)
        assert isinstance(report, SelfTestReport)
        assert [c.name for c in report.checks] == [
            "separable_conjugacy",
            "marginal_product_preservation",
            "mixture_preservation",
            "generic_update",
            "prediction_algebra",
        ]
        assert report.passed, [c.detail for c in report.checks if not c.passed]

    def test_deterministic(self):
        """Same seed, same errors"""
        a = run_selftest(seed=3, instances=2, perturbations=5)
        b = run_selftest(seed=3, instances=2, perturbations=5)
        assert [c.max_error for c in a.checks] == [c.max_error for c in b.checks]

    def test_tolerances(self):
        """Pointwise checks at 1e-12, moment checks at 1e-10"""
        assert POINTWISE_TOLERANCE == 1e-12
        assert MOMENT_TOLERANCE == 1e-10

    def test_default_scale(self):
        """20 instances per check up to 3 labels, 200 KLD rivals per instance"""
        report = run_selftest(seed=0)
        assert report.passed, [c.detail for c in report.checks if not c.passed]
        assert all(c.instances == 20 for c in report.checks)
        marginal = next(c for c in report.checks if c.name == "marginal_product_preservation")
        assert "in 4000" in marginal.detail
        for check in report.checks:
            limit = MOMENT_TOLERANCE if check.name.endswith("preservation") else POINTWISE_TOLERANCE
            assert check.max_error <= limit
