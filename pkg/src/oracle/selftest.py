"""
Oracle-backed property suite behind the `selftest` command.

Every check draws small random grid instances, runs the production code
path and compares it with exhaustive enumeration over all labeled sets.
"""

import logging
import math
from functools import partial
from typing import Callable, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.approx.joint import decompose, marginal_product_approx
from src.approx.mixture import MixtureTerm, mixture_marginal_approx
from src.approx.separable import SeparableLikelihood, separable_update
from src.core.labels import Label, LabelSet
from src.filter.models import BirthModel, FilterState, GridTransition, SurvivalModel
from src.filter.predict import predict
from src.filter.update import generic_update
from src.glmb.densities import mix
from src.glmb.dglmb import DGlmbComponent, DGlmbDensity, cardinality as glmb_cardinality
from src.oracle.generators import (
    default_label_space,
    random_grid,
    random_grid_density,
    random_grid_dglmb,
    random_instance,
)
from src.oracle.instance import (
    DiscreteInstance,
    cardinality,
    exact_bayes,
    from_dglmb,
    kld,
    phd,
)

logger = logging.getLogger(__name__)

POINTWISE_TOLERANCE = 1e-12
MOMENT_TOLERANCE = 1e-10
WEIGHT_SUM_TOLERANCE = 1e-9
KLD_SLACK = 1e-12
MAX_LABELS = 3
MAX_POINTS = 5


class CheckResult(BaseModel):
    name: str
    passed: bool
    instances: int = 0
    max_error: float = 0.0
    detail: str = ""


class SelfTestReport(BaseModel):
    seed: int
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def _mass_error(a: DiscreteInstance, b: DiscreteInstance) -> float:
    keys = set(a.masses) | set(b.masses)
    return max((abs(a.mass(k) - b.mass(k)) for k in keys), default=0.0)


def _cardinality_error(a, b) -> float:
    n = max(a.n_max, b.n_max)
    return max(abs(a[i] - b[i]) for i in range(n + 1))


def _phd_error(a: Dict[Label, np.ndarray], b: Dict[Label, np.ndarray]) -> float:
    return max((float(np.max(np.abs(a[label] - b[label]))) for label in a), default=0.0)


def _random_size(rng: np.random.Generator) -> Tuple[int, int]:
    """(n_labels, n_points) with 1..MAX_LABELS labels on 2..MAX_POINTS grid points"""
    return int(rng.integers(1, MAX_LABELS + 1)), int(rng.integers(2, MAX_POINTS + 1))


def _sine_log_gamma(rng: np.random.Generator, labels: LabelSet):
    """Separable log-likelihood with a different random shape per label"""
    shape = {label: rng.uniform(0.2, 1.5, size=2) for label in labels}

    def log_gamma(points: np.ndarray, label: Label) -> np.ndarray:
        a, f = shape[label]
        return a * np.sin(f * points[:, 0])

    return log_gamma


def _coupled_log_likelihood(rng: np.random.Generator) -> Callable:
    """Non-separable: depends on the sum of every object's first coordinate"""
    centre, scale = rng.normal(scale=5.0), rng.uniform(10.0, 20.0)

    def log_likelihood(labels, points: np.ndarray) -> np.ndarray:
        total = points[:, :, 0].sum(axis=1) if points.shape[1] else np.zeros(points.shape[0])
        return -0.5 * ((total - centre) / scale) ** 2 - 0.1 * points.shape[1]

    return log_likelihood


def check_separable_conjugacy(rng: np.random.Generator, instances: int) -> CheckResult:
    worst = 0.0
    for _ in range(instances):
        n_labels, n_points = _random_size(rng)
        prior, grid = random_grid_dglmb(rng, n_labels=n_labels, n_points=n_points)
        space = default_label_space(n_labels)
        likelihood = SeparableLikelihood(_sine_log_gamma(rng, space))
        posterior = from_dglmb(separable_update(prior, likelihood), grid, space)
        exact = exact_bayes(from_dglmb(prior, grid, space), likelihood)
        worst = max(worst, _mass_error(posterior, exact))
    return CheckResult(
        name="separable_conjugacy",
        passed=worst <= POINTWISE_TOLERANCE,
        instances=instances,
        max_error=worst,
        detail=f"max |posterior - Bayes| = {worst:.3g}",
    )


def _perturb(d: DGlmbDensity, rng: np.random.Generator, grid: np.ndarray) -> DGlmbDensity:
    """Blend one per-label density with noise, keeping the weights"""
    candidates = [i for i, c in enumerate(d.components) if c.label_set]
    target = candidates[rng.integers(len(candidates))]
    components = []
    for i, c in enumerate(d.components):
        if i == target:
            label = c.label_set[rng.integers(len(c.label_set))]
            densities = dict(c.densities)
            blend = float(rng.uniform(0.05, 0.5))
            densities[label] = mix([densities[label], random_grid_density(rng, grid)], [1.0 - blend, blend])
            c = DGlmbComponent(c.label_set, c.weight, densities)
        components.append(c)
    return DGlmbDensity(components)


def check_marginal_product(
    rng: np.random.Generator, instances: int, perturbations: int = 1
) -> CheckResult:
    worst, kld_violations = 0.0, 0
    for _ in range(instances):
        n_labels, n_points = _random_size(rng)
        pi = random_instance(rng, n_labels=n_labels, n_points=n_points)
        approx = marginal_product_approx(decompose(pi))
        expanded = from_dglmb(approx, pi.grid, pi.label_space)
        worst = max(
            worst,
            _cardinality_error(cardinality(pi), cardinality(expanded)),
            _phd_error(phd(pi), phd(expanded)),
        )
        best = kld(pi, expanded)
        for _ in range(perturbations):
            perturbed = from_dglmb(_perturb(approx, rng, pi.grid), pi.grid, pi.label_space)
            if best > kld(pi, perturbed) + KLD_SLACK:
                kld_violations += 1
    return CheckResult(
        name="marginal_product_preservation",
        passed=worst <= MOMENT_TOLERANCE and kld_violations == 0,
        instances=instances,
        max_error=worst,
        detail=(
            f"max moment error {worst:.3g}, "
            f"{kld_violations} KLD violation(s) in {instances * perturbations}"
        ),
    )


def check_mixture(rng: np.random.Generator, instances: int) -> CheckResult:
    worst = 0.0
    for _ in range(instances):
        n_labels, n_points = _random_size(rng)
        grid = random_grid(rng, n_points)
        parts = [random_instance(rng, n_labels=n_labels, grid=grid) for _ in range(2)]
        beta = float(rng.uniform(0.1, 0.9))
        betas = [beta, 1.0 - beta]
        keys = set(parts[0].masses) | set(parts[1].masses)
        pi = DiscreteInstance(
            parts[0].label_space,
            grid,
            {k: math.fsum(b * p.mass(k) for b, p in zip(betas, parts)) for k in keys},
        )

        terms = []
        for c, (b, part) in enumerate(zip(betas, parts)):
            joint = decompose(part)
            terms.append(
                MixtureTerm(c, {L: b * w for L, w in joint.existence_weights.items()}, joint.joints)
            )
        mixture = mixture_marginal_approx(terms)
        merged = mixture_marginal_approx(terms, merge=True)
        expanded = from_dglmb(merged, pi.grid, pi.label_space)
        worst = max(
            worst,
            _cardinality_error(cardinality(pi), glmb_cardinality(mixture)),
            _cardinality_error(cardinality(pi), cardinality(expanded)),
            _phd_error(phd(pi), phd(expanded)),
        )
    return CheckResult(
        name="mixture_preservation",
        passed=worst <= MOMENT_TOLERANCE,
        instances=instances,
        max_error=worst,
        detail=f"max moment error {worst:.3g}",
    )


def check_generic_update(rng: np.random.Generator, instances: int) -> CheckResult:
    worst = 0.0
    for _ in range(instances):
        n_labels, n_points = _random_size(rng)
        prior, grid = random_grid_dglmb(rng, n_labels=n_labels, n_points=n_points)
        space = default_label_space(n_labels)
        log_likelihood = _coupled_log_likelihood(rng)

        state = FilterState(prior, 0, frozenset(space))
        updated = generic_update(state, log_likelihood, exhaustive=True)
        exact = exact_bayes(from_dglmb(prior, grid, space), log_likelihood)
        reference = marginal_product_approx(decompose(exact))
        weight_error = max(
            abs((updated.density.component(c.label_set) or c.with_weight(0.0)).weight - c.weight)
            for c in reference.components
        )
        worst = max(
            worst,
            weight_error,
            _mass_error(from_dglmb(updated.density, grid, space), from_dglmb(reference, grid, space)),
        )
    return CheckResult(
        name="generic_update",
        passed=worst <= POINTWISE_TOLERANCE,
        instances=instances,
        max_error=worst,
        detail=f"max |filter - approximated Bayes| = {worst:.3g}",
    )


def _survivor_weights(prior: DGlmbDensity, p_s: float, space: LabelSet) -> Dict[LabelSet, float]:
    """w_S(L) by direct enumeration over every prior component J containing L"""
    return {
        L: math.fsum(
            c.weight * p_s ** len(L) * (1.0 - p_s) ** (len(c.label_set) - len(L))
            for c in prior.components
            if L.issubset(c.label_set)
        )
        for L in space.subsets()
    }


def check_prediction(rng: np.random.Generator, instances: int) -> CheckResult:
    worst, sum_error = 0.0, 0.0
    for _ in range(instances):
        n_points = int(rng.integers(2, MAX_POINTS + 1))
        prior, grid = random_grid_dglmb(rng, n_labels=2, n_points=n_points)
        space = default_label_space(2)
        n = grid.shape[0]
        matrix = rng.dirichlet(np.ones(n), size=n)
        p_s = float(rng.uniform(0.5, 0.99))
        r_b = float(rng.uniform(0.05, 0.5))
        newborn = Label(1, 0)
        birth_density = random_grid_density(rng, grid)

        state = FilterState(prior, 0, frozenset(space))
        survival = SurvivalModel(p_s, GridTransition(grid, matrix))
        birth = BirthModel({newborn: (r_b, birth_density)})
        predicted = predict(state, survival, birth, exhaustive=True)

        expected = {newborn: r_b * birth_density.masses}
        for label in space:
            v = np.zeros(n)
            for c in prior.components:
                if label in c.label_set:
                    v += c.weight * c.densities[label].masses
            expected[label] = p_s * (v @ matrix)

        survivors: Dict[LabelSet, float] = {}
        for c in predicted.density.components:
            L = LabelSet(label for label in c.label_set if label in space)
            survivors[L] = survivors.get(L, 0.0) + c.weight
        survivor_error = max(
            abs(survivors.get(L, 0.0) - w) for L, w in _survivor_weights(prior, p_s, space).items()
        )

        full_space = space.union([newborn])
        got = phd(from_dglmb(predicted.density, grid, full_space))
        prior_mean = glmb_cardinality(prior).mean()
        worst = max(
            worst,
            survivor_error,
            _phd_error(expected, got),
            abs(glmb_cardinality(predicted.density).mean() - (p_s * prior_mean + r_b)),
        )
        sum_error = max(sum_error, abs(predicted.density.total_weight - 1.0))
    return CheckResult(
        name="prediction_algebra",
        passed=worst <= POINTWISE_TOLERANCE and sum_error <= WEIGHT_SUM_TOLERANCE,
        instances=instances,
        max_error=max(worst, sum_error),
        detail=f"max survivor weight / PHD error {worst:.3g}, total weight error {sum_error:.3g}",
    )


def run_selftest(seed: int = 0, instances: int = 20, perturbations: int = 200) -> SelfTestReport:
    """
    Run every check on `instances` random instances each.

    Args:
        perturbations: same-weight rivals compared by KLD per instance
    """
    checks = (
        check_separable_conjugacy,
        partial(check_marginal_product, perturbations=perturbations),
        check_mixture,
        check_generic_update,
        check_prediction,
    )
    report = SelfTestReport(seed=seed)
    for i, check in enumerate(checks):
        rng = np.random.default_rng([seed, i])
        result = check(rng, instances)
        report.checks.append(result)
        logger.debug(f"{result.name}: max error {result.max_error:.3g}")
    logger.info(
        f"Selftest {'passed' if report.passed else 'FAILED'} "
        f"({sum(c.passed for c in report.checks)}/{len(report.checks)} checks)"
    )
    return report
