"""
Pydantic schemas for scenario files.

Keys mirror the usual symbols: T_s, q, a_zeta for the dynamics, R / B / D
for the resolutions (B in degrees in the file), Q_B for the birth
covariance, r_B, p_S.
"""

import math
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from src.filter.models import FilterParams, TruncationCaps
from src.metrics.ospa import OspaParams
from src.sensor.dynamics import DynamicsParams
from src.sensor.radar import DEFAULT_PSF_THRESHOLD, amplitude_from_snr


class DynamicsSpec(BaseModel):
    """NCV + amplitude random walk"""
    T_s: float = Field(..., gt=0, description="Sampling time (s)")
    q: float = Field(..., ge=0, description="Process-noise power spectral density (m^2/s^3)")
    a_zeta: float = Field(..., ge=0, description="Amplitude fluctuation (1/s)")

    def to_params(self) -> DynamicsParams:
        return DynamicsParams(T_s=self.T_s, q=self.q, a_zeta=self.a_zeta)


class GridSpec(BaseModel):
    """Radar cell resolutions and extents"""
    R: float = Field(..., gt=0, description="Range resolution (m)")
    B: float = Field(..., gt=0, description="Azimuth resolution (degrees)")
    D: float = Field(..., gt=0, description="Doppler resolution (m/s)")
    noise_power: float = Field(default=1.0, gt=0, description="sigma_w^2")
    margin: float = Field(default=0.2, ge=0, description="Relative margin around the truth")
    min_margin_cells: int = Field(default=5, ge=0)
    psf_threshold: float = Field(default=DEFAULT_PSF_THRESHOLD, gt=0, le=1, description="epsilon of C(x)")

    @property
    def B_rad(self) -> float:
        return math.radians(self.B)


class BirthPointSpec(BaseModel):
    """One LMB birth component, spawned every step"""
    name: str = Field(..., min_length=1)
    mean: List[float] = Field(..., min_length=4, max_length=4, description="[p_x, v_x, p_y, v_y]")
    Q_B: List[float] = Field(..., min_length=4, max_length=4, description="Diagonal birth covariance")
    r_B: float = Field(default=0.01, ge=0.0, le=1.0, description="Birth existence probability")
    amplitude_std: float = Field(default=1.0, ge=0.0, description="Std of the birth amplitude prior")

    @field_validator("Q_B")
    @classmethod
    def positive_variances(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("birth variances must be > 0")
        return v


class TruthTargetSpec(BaseModel):
    """Scripted truth: noise-free drift from `initial`, alive on [birth, death)"""
    name: str = Field(..., min_length=1)
    birth: int = Field(..., ge=0, description="Birth step")
    death: int = Field(..., ge=0, description="Death step (exclusive)")
    initial: List[float] = Field(..., min_length=4, max_length=4, description="[p_x, v_x, p_y, v_y] at birth")
    birth_point: Optional[str] = Field(default=None, description="Birth component it appears from")


class FilterSpec(BaseModel):
    n_particles: int = Field(default=1000, ge=1, description="Particles per target")
    max_components: int = Field(default=100, ge=1)
    min_weight: float = Field(default=1e-5, ge=0.0, lt=1.0)


class MonteCarloSpec(BaseModel):
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    power_map_time: int = Field(default=19, ge=1, description="Step of the trial-0 frame kept as power maps")


class OspaSpec(BaseModel):
    c: float = Field(default=50.0, gt=0, description="Cut-off (m)")
    p: float = Field(default=1.0, ge=1)


class ScenarioConfig(BaseModel):
    """Complete experiment description"""
    name: str = Field(..., min_length=1)
    description: str = Field(default="")
    n_steps: int = Field(..., ge=1, description="Observed steps 1..n_steps")
    snr_db: float = Field(..., description="10 log10(A_bar^2 / (2 sigma_w^2))")
    p_S: float = Field(default=0.99, ge=0.0, le=1.0, description="Survival probability")
    mode: Literal["separable", "generic"] = Field(default="generic")
    dynamics: DynamicsSpec
    grid: GridSpec
    births: List[BirthPointSpec] = Field(..., min_length=1, max_length=3)
    truth: List[TruthTargetSpec] = Field(default_factory=list)
    filter: FilterSpec = Field(default_factory=FilterSpec)
    monte_carlo: MonteCarloSpec = Field(default_factory=MonteCarloSpec)
    ospa: OspaSpec = Field(default_factory=OspaSpec)

    @model_validator(mode="after")
    def check_names(self):
        births = [b.name for b in self.births]
        if len(births) != len(set(births)):
            raise ValueError("duplicate birth point names")
        names = [t.name for t in self.truth]
        if len(names) != len(set(names)):
            raise ValueError("duplicate truth target names")
        for target in self.truth:
            if target.birth_point is not None and target.birth_point not in births:
                raise ValueError(f"truth target {target.name} refers to unknown birth point {target.birth_point}")
        return self

    @property
    def amplitude(self) -> float:
        return amplitude_from_snr(self.snr_db, self.grid.noise_power)

    def dynamics_params(self) -> DynamicsParams:
        return self.dynamics.to_params()

    def filter_params(self) -> FilterParams:
        caps = TruncationCaps(max_components=self.filter.max_components, min_weight=self.filter.min_weight)
        return FilterParams(n_particles=self.filter.n_particles, caps=caps)

    def ospa_params(self) -> OspaParams:
        return OspaParams(c=self.ospa.c, p=self.ospa.p)
