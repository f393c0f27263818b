"""
Frame dumps.

Binary layout: three little-endian int32 dimensions (range, azimuth,
Doppler) followed by the powers as little-endian float64 in C order.
The CSV variant lists one cell per row for inspection.
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from src.sensor.radar import RadarFrame, SensorGeometryError

logger = logging.getLogger(__name__)

HEADER_DTYPE = np.dtype("<i4")
POWER_DTYPE = np.dtype("<f8")

PathLike = Union[str, Path]


def dump_frame_binary(frame: RadarFrame, path: PathLike) -> Path:
    path = Path(path)
    with open(path, "wb") as f:
        f.write(np.asarray(frame.shape, dtype=HEADER_DTYPE).tobytes())
        f.write(np.ascontiguousarray(frame.powers, dtype=POWER_DTYPE).tobytes(order="C"))
    return path


def load_frame_binary(path: PathLike) -> RadarFrame:
    raw = Path(path).read_bytes()
    header_size = 3 * HEADER_DTYPE.itemsize
    if len(raw) < header_size:
        raise SensorGeometryError(f"{path}: truncated frame header")
    shape = tuple(int(v) for v in np.frombuffer(raw[:header_size], dtype=HEADER_DTYPE))
    expected = int(np.prod(shape)) * POWER_DTYPE.itemsize
    if len(raw) - header_size != expected:
        raise SensorGeometryError(
            f"{path}: {len(raw) - header_size} data bytes for shape {shape}, expected {expected}"
        )
    powers = np.frombuffer(raw[header_size:], dtype=POWER_DTYPE).reshape(shape)
    return RadarFrame(powers)


def dump_frame_csv(frame: RadarFrame, path: PathLike) -> Path:
    path = Path(path)
    ir, ib, id_ = np.indices(frame.shape).reshape(3, -1)
    table = pd.DataFrame(
        {
            "range_idx": ir,
            "azimuth_idx": ib,
            "doppler_idx": id_,
            "power": frame.powers.reshape(-1),
        }
    )
    table.to_csv(path, index=False, float_format="%.9g")
    return path
