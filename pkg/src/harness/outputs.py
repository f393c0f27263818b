"""
Result tables (CSV, 9 significant digits) and SVG figures.

CSV files are the interface of record; figures can be regenerated from them
with plot_outputs.
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src.sensor.frame_io import dump_frame_binary, load_frame_binary  # noqa: E402
from src.sensor.radar import RadarFrame, RadarGrid  # noqa: E402

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"
SVG_METADATA = {"Date": None}

OSPA_COLUMNS = ["time", "mean_ospa", "se_ospa"]
CARDINALITY_COLUMNS = ["time", "true_n", "mean_est_n", "se_est_n"]
TRACK_COLUMNS = ["trial", "time", "label_birth", "label_index", "px", "py", "vx", "vy", "amp"]
TRUTH_COLUMNS = ["time", "label_birth", "label_index", "px", "py", "vx", "vy", "amp"]
FRAME_COLUMNS = ["trial", "time", "mean_power", "peak_power", "n_cells", "n_components", "expected_cardinality"]
TRIAL_COLUMNS = ["trial", "failed", "error"]


def _write(table: pd.DataFrame, path: Path) -> Path:
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"✓ Wrote {path}")
    return path


def _state_row(kinematic, label):
    px, vx, py, vy, amp = (float(v) for v in kinematic)
    return [label.birth_time, label.index, px, py, vx, vy, amp]


def write_outputs(mc, out_dir: Union[str, Path]) -> None:
    """ospa.csv, cardinality.csv, tracks.csv plus truth / frame / trial side tables"""
    out = Path(out_dir)
    agg = mc.aggregate
    _write(agg[OSPA_COLUMNS], out / "ospa.csv")
    _write(agg[CARDINALITY_COLUMNS], out / "cardinality.csv")

    tracks, frames = [], []
    for result in mc.trials:
        for step in result.steps:
            for estimate in step.estimates:
                tracks.append([result.trial, step.time] + _state_row(estimate.kinematic_mean, estimate.label))
            frames.append(
                [result.trial, step.time, step.mean_power, step.peak_power, step.n_cells,
                 step.n_components, step.expected_cardinality]
            )
    _write(pd.DataFrame(tracks, columns=TRACK_COLUMNS), out / "tracks.csv")
    _write(pd.DataFrame(frames, columns=FRAME_COLUMNS), out / "frames.csv")

    # Truth is scripted, identical in every trial.
    reference = next((r for r in mc.trials if r.steps), None)
    truth = []
    if reference is not None:
        for step in reference.steps:
            truth.extend([step.time] + _state_row(s.kinematic, s.label) for s in step.truth)
    _write(pd.DataFrame(truth, columns=TRUTH_COLUMNS), out / "truth.csv")

    trials = [[r.trial, int(r.failed), r.error or ""] for r in mc.trials]
    _write(pd.DataFrame(trials, columns=TRIAL_COLUMNS), out / "trials.csv")


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.info(f"✓ Wrote {path}")


def plot_outputs(in_dir: Union[str, Path]) -> None:
    """Cardinality and OSPA versus time, the x/y tracks of the first trial, and the power maps if dumped"""
    base = Path(in_dir)
    cardinality = pd.read_csv(base / "cardinality.csv")
    ospa = pd.read_csv(base / "ospa.csv")

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.step(cardinality["time"], cardinality["true_n"], where="mid", color="k", label="True")
    ax.errorbar(
        cardinality["time"], cardinality["mean_est_n"], yerr=cardinality["se_est_n"],
        fmt="o-", markersize=3, color="tab:blue", label="Estimated",
    )
    ax.set_xlabel("Time step")
    ax.set_ylabel("Number of targets")
    ax.legend()
    _save(fig, base / "cardinality.svg")

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(ospa["time"], ospa["mean_ospa"], color="tab:red")
    ax.fill_between(
        ospa["time"], ospa["mean_ospa"] - ospa["se_ospa"], ospa["mean_ospa"] + ospa["se_ospa"],
        color="tab:red", alpha=0.2,
    )
    ax.set_xlabel("Time step")
    ax.set_ylabel("OSPA (m)")
    _save(fig, base / "ospa.svg")
    plot_power_maps(base)

    tracks_path, truth_path = base / "tracks.csv", base / "truth.csv"
    if not (tracks_path.exists() and truth_path.exists()):
        return
    tracks = pd.read_csv(tracks_path)
    truth = pd.read_csv(truth_path)
    fig, ax = plt.subplots(figsize=(6, 6))
    for _, group in truth.groupby(["label_birth", "label_index"]):
        ax.plot(group["px"], group["py"], color="k", linewidth=1)
    if not tracks.empty:
        first = tracks[tracks["trial"] == tracks["trial"].min()]
        ax.scatter(first["px"], first["py"], s=6, color="tab:blue", label="Estimates")
        ax.legend()
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal", adjustable="datalim")
    _save(fig, base / "tracks.svg")


AXIS_NAMES = ("range", "azimuth", "doppler")
AXIS_LABELS = {"range": "Range (m)", "azimuth": "Azimuth (deg)", "doppler": "Doppler (m/s)"}
POWER_MAP_AXES_COLUMNS = ["axis", "index", "centroid"]
# (title, horizontal axis, vertical axis); the remaining axis is held at the peak cell
POWER_MAP_SLICES = (
    ("Range-Azimuth", 0, 1),
    ("Range-Doppler", 0, 2),
    ("Azimuth-Doppler", 1, 2),
)


def write_power_maps(
    noisy: RadarFrame, noiseless: RadarFrame, grid: RadarGrid, time: int, out_dir: Union[str, Path]
) -> Path:
    """Binary dumps of one noisy and one noiseless frame, plus the cell centroids of every axis"""
    out = Path(out_dir)
    stem = f"power_map_t{time:04d}"
    dump_frame_binary(noisy, out / f"{stem}_noisy.bin")
    dump_frame_binary(noiseless, out / f"{stem}_noiseless.bin")
    rows = [
        [name, i, float(c)]
        for name, (centroids, _) in zip(AXIS_NAMES, grid.axes())
        for i, c in enumerate(centroids)
    ]
    return _write(pd.DataFrame(rows, columns=POWER_MAP_AXES_COLUMNS), out / "power_map_axes.csv")


def _axis_values(axes: pd.DataFrame, shape) -> List[np.ndarray]:
    values = []
    for a, name in enumerate(AXIS_NAMES):
        column = axes[axes["axis"] == name].sort_values("index")["centroid"].to_numpy(dtype=float)
        if column.size != shape[a]:
            column = np.arange(shape[a], dtype=float)
        elif name == "azimuth":
            column = np.degrees(column)
        values.append(column)
    return values


def _extent(values: np.ndarray) -> Tuple[float, float]:
    half = 0.5 * (float(values[1] - values[0]) if values.size > 1 else 1.0)
    return float(values[0]) - half, float(values[-1]) + half


def _power_slice(powers: np.ndarray, peak: Tuple[int, int, int], horizontal: int, vertical: int) -> np.ndarray:
    index = list(peak)
    index[horizontal] = index[vertical] = slice(None)
    plane = powers[tuple(index)]
    # rows of the image run along the vertical axis
    return plane.T if horizontal < vertical else plane


def plot_power_maps(in_dir: Union[str, Path]) -> Optional[Path]:
    """
    Range-azimuth, range-Doppler and azimuth-Doppler slices through the
    strongest noiseless cell: noisy frame on the left, noiseless on the right.
    """
    base = Path(in_dir)
    dumps = sorted(base.glob("power_map_t*_noisy.bin"))
    if not dumps:
        return None
    noisy_path = dumps[-1]
    noisy = load_frame_binary(noisy_path)
    noiseless = load_frame_binary(noisy_path.with_name(noisy_path.name.replace("_noisy", "_noiseless")))
    axes_path = base / "power_map_axes.csv"
    axes = pd.read_csv(axes_path) if axes_path.exists() else pd.DataFrame(columns=POWER_MAP_AXES_COLUMNS)
    values = _axis_values(axes, noisy.shape)

    reference = noiseless.powers if noiseless.peak_power() > 0 else noisy.powers
    peak = tuple(int(i) for i in np.unravel_index(np.argmax(reference), reference.shape))
    time = noisy_path.stem.split("_")[2].lstrip("t").lstrip("0") or "0"

    fig, axs = plt.subplots(len(POWER_MAP_SLICES), 2, figsize=(10, 11), squeeze=False)
    for row, (title, horizontal, vertical) in enumerate(POWER_MAP_SLICES):
        for col, (kind, frame) in enumerate((("Noisy", noisy), ("Noiseless", noiseless))):
            ax = axs[row][col]
            image = ax.imshow(
                _power_slice(frame.powers, peak, horizontal, vertical),
                origin="lower",
                aspect="auto",
                extent=_extent(values[horizontal]) + _extent(values[vertical]),
                interpolation="nearest",
            )
            fig.colorbar(image, ax=ax)
            ax.set_title(f"{title}, {kind.lower()} (k={time})")
            ax.set_xlabel(AXIS_LABELS[AXIS_NAMES[horizontal]])
            ax.set_ylabel(AXIS_LABELS[AXIS_NAMES[vertical]])
    fig.tight_layout()
    path = base / "power_maps.svg"
    _save(fig, path)
    return path
