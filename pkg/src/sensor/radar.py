"""
Radar track-before-detect sensor: range / azimuth / Doppler cell grid,
point spread function, Swerling-0 frame synthesis and the power-frame
likelihood ratio.

Per cell the received power z = |sum_x A(x) h(x) + w|^2 with complex noise
of variance 2 sigma_w^2, so z / sigma_w^2 is non-central chi-squared with
2 degrees of freedom. The likelihood ratio of a cell against noise only is

    l(z | X) = exp(-z_hat / (2 sigma_w^2)) I0(sqrt(z z_hat) / sigma_w^2)

with z_hat the noiseless in-phase power of the objects in X. Cells outside
every template have ratio 1.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import i0e

from src.core.labels import AMPLITUDE_INDEX, Label, LabeledState
from src.approx.separable import SeparableLikelihood

logger = logging.getLogger(__name__)

DEFAULT_PSF_THRESHOLD = 1e-2
SPACING_TOLERANCE = 1e-9
LOG_I0_SERIES_TERMS = 12


class SensorGeometryError(Exception):
    """Raised for invalid grids or states with undefined radar coordinates"""
    pass


# =======================
# Geometry
# =======================


def measurement_coordinates(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Range r, bearing b (rad) and Doppler d of (..., 5) states.

    d = -(v_x p_x + v_y p_y) / r is nan where r = 0.
    """
    points = np.asarray(points, dtype=float)
    px, vx, py, vy = points[..., 0], points[..., 1], points[..., 2], points[..., 3]
    r = np.hypot(px, py)
    b = np.arctan2(py, px)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(r > 0, -(vx * px + vy * py) / r, np.nan)
    return r, b, d


@dataclass(frozen=True, eq=False)
class RadarGrid:
    """Uniform cell centroids per axis, resolutions R (m), B (rad), D (m/s) and noise sigma_w^2"""

    range_centroids: np.ndarray
    azimuth_centroids: np.ndarray
    doppler_centroids: np.ndarray
    range_resolution: float
    azimuth_resolution: float
    doppler_resolution: float
    noise_power: float

    def __post_init__(self):
        if not self.noise_power > 0:
            raise SensorGeometryError(f"noise power must be > 0, got {self.noise_power}")
        for name, centroids, resolution in (
            ("range", self.range_centroids, self.range_resolution),
            ("azimuth", self.azimuth_centroids, self.azimuth_resolution),
            ("doppler", self.doppler_centroids, self.doppler_resolution),
        ):
            centroids = np.array(centroids, dtype=float).reshape(-1)
            if not resolution > 0:
                raise SensorGeometryError(f"{name} resolution must be > 0, got {resolution}")
            if centroids.size == 0:
                raise SensorGeometryError(f"{name} axis has no cells")
            spacing = np.diff(centroids)
            if np.any(np.abs(spacing - resolution) > SPACING_TOLERANCE * max(1.0, resolution)):
                raise SensorGeometryError(
                    f"{name} centroids must be increasing with spacing equal to the resolution"
                )
            centroids.setflags(write=False)
            object.__setattr__(self, f"{name}_centroids", centroids)
            object.__setattr__(self, f"{name}_resolution", float(resolution))

    @classmethod
    def uniform(
        cls,
        range_start: float,
        n_range: int,
        range_resolution: float,
        azimuth_start: float,
        n_azimuth: int,
        azimuth_resolution: float,
        doppler_start: float,
        n_doppler: int,
        doppler_resolution: float,
        noise_power: float = 1.0,
    ) -> "RadarGrid":
        return cls(
            range_start + range_resolution * np.arange(n_range),
            azimuth_start + azimuth_resolution * np.arange(n_azimuth),
            doppler_start + doppler_resolution * np.arange(n_doppler),
            range_resolution,
            azimuth_resolution,
            doppler_resolution,
            noise_power,
        )

    @classmethod
    def covering(
        cls,
        points: np.ndarray,
        range_resolution: float,
        azimuth_resolution: float,
        doppler_resolution: float,
        noise_power: float = 1.0,
        margin: float = 0.2,
        min_margin_cells: int = 5,
    ) -> "RadarGrid":
        """
        Grid spanning the radar coordinates of `points` (M, 5) with a
        relative margin on each side, never less than min_margin_cells cells.
        """
        r, b, d = measurement_coordinates(np.atleast_2d(points))
        if np.any(r <= 0):
            raise SensorGeometryError("cannot cover a state at the radar origin")
        axes = []
        for values, resolution in ((r, range_resolution), (b, azimuth_resolution), (d, doppler_resolution)):
            lo, hi = float(np.min(values)), float(np.max(values))
            pad = max(margin * (hi - lo), min_margin_cells * resolution)
            start = lo - pad
            n = int(math.ceil((hi + pad - start) / resolution)) + 1
            axes.append((start, n, resolution))
        (rs, rn, rr), (bs, bn, br), (ds, dn, dr) = axes
        return cls.uniform(rs, rn, rr, bs, bn, br, ds, dn, dr, noise_power)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.range_centroids.size, self.azimuth_centroids.size, self.doppler_centroids.size)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    def axes(self) -> List[Tuple[np.ndarray, float]]:
        return [
            (self.range_centroids, self.range_resolution),
            (self.azimuth_centroids, self.azimuth_resolution),
            (self.doppler_centroids, self.doppler_resolution),
        ]

    def centroid(self, cell: Sequence[int]) -> Tuple[float, float, float]:
        i, j, k = cell
        return (
            float(self.range_centroids[i]),
            float(self.azimuth_centroids[j]),
            float(self.doppler_centroids[k]),
        )

    def in_coverage(self, points: np.ndarray) -> np.ndarray:
        """Inside [first - res/2, last + res/2] on every axis (and r > 0)"""
        coords = measurement_coordinates(points)
        inside = coords[0] > 0
        for values, (centroids, resolution) in zip(coords, self.axes()):
            with np.errstate(invalid="ignore"):
                inside &= (values >= centroids[0] - resolution / 2) & (values <= centroids[-1] + resolution / 2)
        return inside


@dataclass(frozen=True)
class EchoModel:
    """Swerling-0 echo: constant modulus A_bar, uniform phase per frame"""

    A_bar: float
    swerling: str = "swerling0"

    def __post_init__(self):
        if self.A_bar < 0:
            raise SensorGeometryError(f"A_bar must be >= 0, got {self.A_bar}")
        if self.swerling != "swerling0":
            raise SensorGeometryError(f"unsupported fluctuation model {self.swerling!r}")


@dataclass(frozen=True, eq=False)
class RadarFrame:
    """Received power per (range, azimuth, doppler) cell"""

    powers: np.ndarray

    def __post_init__(self):
        powers = np.array(self.powers, dtype=float)
        if powers.ndim != 3:
            raise SensorGeometryError(f"frame must be 3-D, got shape {powers.shape}")
        if np.any(powers < 0) or not np.all(np.isfinite(powers)):
            raise SensorGeometryError("frame powers must be finite and >= 0")
        powers.setflags(write=False)
        object.__setattr__(self, "powers", powers)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.powers.shape

    def mean_power(self) -> float:
        return float(self.powers.mean())

    def peak_power(self) -> float:
        return float(self.powers.max())


def amplitude_from_snr(snr_db: float, sigma_w_sq: float) -> float:
    """A_bar with 10 log10(A_bar^2 / (2 sigma_w^2)) = snr_db"""
    if not sigma_w_sq > 0:
        raise SensorGeometryError(f"noise power must be > 0, got {sigma_w_sq}")
    return math.sqrt(2.0 * sigma_w_sq * 10.0 ** (snr_db / 10.0))


def snr_from_amplitude(amplitude: float, sigma_w_sq: float) -> float:
    return 10.0 * math.log10(amplitude**2 / (2.0 * sigma_w_sq))


# =======================
# Point spread function and templates
# =======================


def psf(state: LabeledState, cell: Sequence[int], grid: RadarGrid) -> float:
    """exp(-(r_i - r)^2 / 2R - (d_i - d)^2 / 2D - (b_i - b)^2 / 2B)"""
    r, b, d = (float(v) for v in measurement_coordinates(state.kinematic))
    if r <= 0:
        raise SensorGeometryError(f"{state.label} is at the radar origin; bearing and Doppler undefined")
    r_i, b_i, d_i = grid.centroid(cell)
    return math.exp(
        -((r_i - r) ** 2) / (2 * grid.range_resolution)
        - ((d_i - d) ** 2) / (2 * grid.doppler_resolution)
        - ((b_i - b) ** 2) / (2 * grid.azimuth_resolution)
    )


class TemplateWindows(NamedTuple):
    """Per-sample cell boxes: axis indices (N, W_a), masked psf (N, Wr, Wb, Wd), template mask, coverage"""

    indices: Tuple[np.ndarray, np.ndarray, np.ndarray]
    psf: np.ndarray
    mask: np.ndarray
    in_coverage: np.ndarray


def template_windows(points: np.ndarray, grid: RadarGrid, threshold: float = DEFAULT_PSF_THRESHOLD) -> TemplateWindows:
    """
    Vectorized templates for (N, 5) states.

    Each state gets a box of cells around its nearest cell large enough to
    hold every cell with psf >= threshold; the mask marks the template
    proper (those cells plus the nearest one). Out-of-coverage states get an
    empty mask.
    """
    if not 0 < threshold <= 1:
        raise SensorGeometryError(f"psf threshold must be in (0, 1], got {threshold}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    coords = measurement_coordinates(points)
    in_cov = grid.in_coverage(points)
    log_inv = -math.log(threshold)

    indices, exponents, nearest_pos = [], [], []
    for values, (centroids, resolution) in zip(coords, grid.axes()):
        values = np.where(in_cov, values, centroids[0])
        n_axis = centroids.size
        half = int(math.ceil(math.sqrt(2 * resolution * log_inv) / resolution)) + 1
        width = min(2 * half + 1, n_axis)
        nearest = np.clip(np.rint((values - centroids[0]) / resolution).astype(int), 0, n_axis - 1)
        start = np.clip(nearest - half, 0, n_axis - width)
        idx = start[:, None] + np.arange(width)
        indices.append(idx)
        exponents.append((centroids[idx] - values[:, None]) ** 2 / (2 * resolution))
        nearest_pos.append(nearest - start)

    e_r, e_b, e_d = exponents
    values = np.exp(-(e_r[:, :, None, None] + e_b[:, None, :, None] + e_d[:, None, None, :]))
    mask = values >= threshold
    mask[np.arange(n), nearest_pos[0], nearest_pos[1], nearest_pos[2]] = True
    mask &= in_cov[:, None, None, None]
    return TemplateWindows(tuple(indices), np.where(mask, values, 0.0), mask, in_cov)


@dataclass(frozen=True, eq=False)
class Template:
    """Cells C(x) (K, 3) in C order with their psf values"""

    cells: np.ndarray
    values: np.ndarray
    in_coverage: bool

    def cell_set(self):
        return {tuple(int(i) for i in cell) for cell in self.cells}


def template(state: LabeledState, grid: RadarGrid, threshold: float = DEFAULT_PSF_THRESHOLD) -> Template:
    win = template_windows(state.kinematic[None, :], grid, threshold)
    if not win.in_coverage[0]:
        return Template(np.zeros((0, 3), dtype=int), np.zeros(0), False)
    local = np.argwhere(win.mask[0])
    cells = np.stack([win.indices[a][0][local[:, a]] for a in range(3)], axis=1)
    return Template(cells, win.psf[0][tuple(local.T)], True)


# =======================
# Frame synthesis
# =======================


def synthesize_frame(
    truth: Sequence[LabeledState],
    grid: RadarGrid,
    rng: np.random.Generator,
    echo: Optional[EchoModel] = None,
    threshold: float = DEFAULT_PSF_THRESHOLD,
) -> RadarFrame:
    """
    One power frame: Swerling-0 echoes with an independent uniform phase per
    object, plus circular complex noise (real and imaginary parts each
    N(0, sigma_w^2)).

    The echo modulus is echo.A_bar when given, else each state's amplitude.
    """
    ordered = sorted(truth, key=lambda s: s.label)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=len(ordered))
    field = np.zeros(grid.shape, dtype=complex)
    for state, theta in zip(ordered, phases):
        tmpl = template(state, grid, threshold)
        if not tmpl.in_coverage:
            logger.warning(
                f"Target {state.label} outside grid coverage, no echo synthesized",
                extra={"label": repr(state.label)},
            )
            continue
        amplitude = echo.A_bar if echo is not None else state.amplitude
        field[tuple(tmpl.cells.T)] += amplitude * np.exp(1j * theta) * tmpl.values

    sigma = math.sqrt(grid.noise_power)
    noise = sigma * (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    return RadarFrame(np.abs(field + noise) ** 2)


def noiseless_frame(
    truth: Sequence[LabeledState],
    grid: RadarGrid,
    echo: Optional[EchoModel] = None,
    threshold: float = DEFAULT_PSF_THRESHOLD,
) -> RadarFrame:
    """Ideal power map: sum over objects of (A_bar psf)^2 on each template, no noise"""
    powers = np.zeros(grid.shape)
    for state in truth:
        tmpl = template(state, grid, threshold)
        if not tmpl.in_coverage:
            continue
        amplitude = echo.A_bar if echo is not None else state.amplitude
        powers[tuple(tmpl.cells.T)] += (amplitude * tmpl.values) ** 2
    return RadarFrame(powers)


# =======================
# Likelihood
# =======================


def log_i0(x):
    """
    log I0(x): power series through log1p below 1 (where log i0e(x) + x
    cancels), the exponentially scaled Bessel function above.
    """
    x = np.abs(np.asarray(x, dtype=float))
    y = np.minimum(x, 1.0) ** 2 / 4.0
    term = np.ones_like(y)
    series = np.zeros_like(y)
    for k in range(1, LOG_I0_SERIES_TERMS + 1):
        term = term * y / (k * k)
        series = series + term
    return np.where(x < 1.0, np.log1p(series), np.log(i0e(x)) + x)


def cell_log_likelihood_ratio(z, z_hat, sigma_w_sq: float):
    """log of exp(-z_hat / (2 sigma_w^2)) I0(sqrt(z z_hat) / sigma_w^2)"""
    z = np.asarray(z, dtype=float)
    z_hat = np.asarray(z_hat, dtype=float)
    out = -z_hat / (2.0 * sigma_w_sq) + log_i0(np.sqrt(z * z_hat) / sigma_w_sq)
    return float(out) if out.ndim == 0 else out


def _gather(frame: RadarFrame, win: TemplateWindows) -> np.ndarray:
    ir, ib, id_ = win.indices
    return frame.powers[ir[:, :, None, None], ib[:, None, :, None], id_[:, None, None, :]]


def _amplitudes(points: np.ndarray, amplitude: Optional[float]) -> np.ndarray:
    if amplitude is not None:
        return np.full(points.shape[0], float(amplitude))
    return points[:, AMPLITUDE_INDEX]


def separable_log_likelihood_batch(
    frame: RadarFrame,
    points: np.ndarray,
    grid: RadarGrid,
    threshold: float = DEFAULT_PSF_THRESHOLD,
    amplitude: Optional[float] = None,
) -> np.ndarray:
    """log gamma_z for (N, 5) single-object states: sum over own template"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    win = template_windows(points, grid, threshold)
    a = _amplitudes(points, amplitude)
    z_hat = (a[:, None, None, None] * win.psf) ** 2
    llr = cell_log_likelihood_ratio(_gather(frame, win), z_hat, grid.noise_power)
    return np.where(win.mask, llr, 0.0).sum(axis=(1, 2, 3))


def _boxes_overlap(a: TemplateWindows, b: TemplateWindows) -> np.ndarray:
    overlap = a.in_coverage & b.in_coverage
    for ia, ib in zip(a.indices, b.indices):
        overlap &= (ia[:, 0] <= ib[:, -1]) & (ib[:, 0] <= ia[:, -1])
    return overlap


def joint_log_likelihood_batch(
    frame: RadarFrame,
    points: np.ndarray,
    grid: RadarGrid,
    threshold: float = DEFAULT_PSF_THRESHOLD,
    amplitude: Optional[float] = None,
) -> np.ndarray:
    """
    Multi-object log-likelihood ratio for (N, n, 5) joint samples.

    z_hat is the in-phase superposition sum_x A h(x) over the union of the
    templates. Samples whose template boxes do not touch reduce to the sum of
    the single-object terms; the others are evaluated on the exact union.
    """
    points = np.asarray(points, dtype=float)
    n_samples, n_objects = points.shape[0], points.shape[1]
    if n_objects == 0:
        return np.zeros(n_samples)

    windows = [template_windows(points[:, t, :], grid, threshold) for t in range(n_objects)]
    amps = [_amplitudes(points[:, t, :], amplitude) for t in range(n_objects)]
    total = np.zeros(n_samples)
    for win, a in zip(windows, amps):
        z_hat = (a[:, None, None, None] * win.psf) ** 2
        llr = cell_log_likelihood_ratio(_gather(frame, win), z_hat, grid.noise_power)
        total += np.where(win.mask, llr, 0.0).sum(axis=(1, 2, 3))
    if n_objects == 1:
        return total

    overlapping = np.zeros(n_samples, dtype=bool)
    for t in range(n_objects):
        for u in range(t + 1, n_objects):
            overlapping |= _boxes_overlap(windows[t], windows[u])
    rows = np.flatnonzero(overlapping)
    if rows.size:
        total[rows] = _union_log_likelihood(frame, grid, windows, amps, rows)
    return total


def _union_log_likelihood(frame, grid, windows, amps, rows) -> np.ndarray:
    """Exact sum of cell ratios over the union of templates for the given samples"""
    _, nb, nd = grid.shape
    n_cells = grid.n_cells
    ids, contributions = [], []
    for win, a in zip(windows, amps):
        ir, ib, id_ = (idx[rows] for idx in win.indices)
        cell = (ir[:, :, None, None] * nb + ib[:, None, :, None]) * nd + id_[:, None, None, :]
        mask = win.mask[rows]
        sample = np.broadcast_to(np.arange(rows.size)[:, None, None, None], mask.shape)
        ids.append((sample * n_cells + cell)[mask])
        contributions.append((a[rows][:, None, None, None] * win.psf[rows])[mask])

    ids = np.concatenate(ids)
    contributions = np.concatenate(contributions)
    unique, inverse = np.unique(ids, return_inverse=True)
    amplitude = np.bincount(inverse, weights=contributions, minlength=unique.size)
    z = frame.powers.reshape(-1)[unique % n_cells]
    llr = cell_log_likelihood_ratio(z, amplitude**2, grid.noise_power)
    return np.bincount(unique // n_cells, weights=np.atleast_1d(llr), minlength=rows.size)


def frame_log_likelihood(
    frame: RadarFrame,
    states: Sequence[LabeledState],
    grid: RadarGrid,
    echo: Optional[EchoModel] = None,
    threshold: float = DEFAULT_PSF_THRESHOLD,
) -> float:
    """log g(z | X) relative to noise only; 0 for X empty"""
    states = sorted(states, key=lambda s: s.label)
    if not states:
        return 0.0
    points = np.stack([s.kinematic for s in states])[None, :, :]
    amplitude = echo.A_bar if echo is not None else None
    return float(joint_log_likelihood_batch(frame, points, grid, threshold, amplitude)[0])


def separable_frame_log_likelihood(
    frame: RadarFrame,
    state: LabeledState,
    grid: RadarGrid,
    echo: Optional[EchoModel] = None,
    threshold: float = DEFAULT_PSF_THRESHOLD,
) -> float:
    """log gamma_z(x, l): the state's own template only"""
    amplitude = echo.A_bar if echo is not None else None
    return float(separable_log_likelihood_batch(frame, state.kinematic[None, :], grid, threshold, amplitude)[0])


class RadarLikelihood:
    """
    One frame's likelihood in both forms the filter consumes: the
    multi-object callable (labels, points[N, n, 5]) -> [N] and the
    per-object log gamma of the separable approximation.
    """

    def __init__(
        self,
        frame: RadarFrame,
        grid: RadarGrid,
        threshold: float = DEFAULT_PSF_THRESHOLD,
        amplitude: Optional[float] = None,
    ):
        if frame.shape != grid.shape:
            raise SensorGeometryError(f"frame shape {frame.shape} does not match grid {grid.shape}")
        self.frame = frame
        self.grid = grid
        self.threshold = threshold
        self.amplitude = amplitude

    def __call__(self, labels: Tuple[Label, ...], points: np.ndarray) -> np.ndarray:
        return joint_log_likelihood_batch(self.frame, points, self.grid, self.threshold, self.amplitude)

    def log_gamma(self, points: np.ndarray, label: Label) -> np.ndarray:
        return separable_log_likelihood_batch(self.frame, points, self.grid, self.threshold, self.amplitude)

    def separable(self) -> SeparableLikelihood:
        return SeparableLikelihood(self.log_gamma)
