"""Request and response models for the HTTP service.

Boundary units are human-scale (us, um, uK, MHz, nm); the core works in SI.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

SweepCell = float | str | None


class HealthOut(BaseModel):
    status: str
    service: str
    version: str


class SeriesOut(BaseModel):
    delta0: float
    delta2: float


class LevelsOut(BaseModel):
    source: str
    levels: dict[str, float]
    ionization_limit_cm1: float
    rydberg_constant_cm1: float
    series: dict[str, SeriesOut]
    excitation_wavelengths_nm: dict[str, float]


class TransitionOut(BaseModel):
    lower: str
    upper: str
    delta_e_cm1: float
    wavelength_nm: float


class CaseSchemeOut(BaseModel):
    case_id: int
    e_level: str
    f_level: str
    n1: int
    n2: int
    lambda1_nm: float
    lambda2_nm: float
    lambda3_nm: float
    lambda4_nm: float
    lambda5_nm: float


class AngleRowOut(BaseModel):
    case_id: int
    ratio: float
    feasible: bool
    theta1_rad: float | None
    theta2_rad: float | None
    closure_residual_rel: float
    published_ratio: float | None = None
    published_theta1_rad: float | None = None
    published_theta2_rad: float | None = None
    delta_ratio: float | None = None
    delta_theta1_rad: float | None = None
    delta_theta2_rad: float | None = None


class AnglesOut(BaseModel):
    n1: int
    n2: int
    lambda5_nm: float | None
    lambda_out_nm: float | None
    rows: list[AngleRowOut]
    any_infeasible: bool


class RouterChannelOut(BaseModel):
    index: int
    azimuth_rad: float
    retrieval_dir: tuple[float, float, float]
    output_dir: tuple[float, float, float]
    closure_residual_rel: float


class RouterOut(BaseModel):
    case_id: int
    n_channels: int
    theta1_rad: float
    theta2_rad: float
    phase_offset_rad: float
    channels: list[RouterChannelOut]


class PlanOut(BaseModel):
    case_id: int
    k_rad_per_m: float
    k_r_rad_per_m: float
    ratio: float
    omega_r_mhz: float  # effective Rabi frequency / 2 pi
    t_s_us: float
    t_prime_us: float
    t_pi_us: float
    min_storage_us: float
    matching_residual: float
    ac_stark_mhz: float
    warnings: list[str]


class SimulateIn(BaseModel):
    model_config = {"extra": "forbid"}

    sweep: Literal["storage", "duration"] = "storage"
    case: int = Field(default=7, ge=1, le=7)
    n1: int = Field(default=65, ge=10)
    n2: int = Field(default=70, ge=10)
    protocol: bool = True
    retrieval: Literal["matched", "wrong"] = "matched"

    atom_count: int = Field(default=10000, ge=1)
    repetitions: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1, le=64)

    temperature_uk: float = Field(default=66.9, ge=0)
    cloud_sigma_z_um: float = Field(default=10.0, ge=0)
    cloud_sigma_xy_um: float = Field(default=4.3, ge=0)
    gravity_m_s2: float = 0.0

    omega3_mhz: float = Field(default=28.0, ge=0)
    omega4_mhz: float = Field(default=21.0, ge=0)
    detuning_mhz: float = Field(default=335.0, gt=0)
    rabi_mhz: float | None = Field(default=None, gt=0)

    ts_min_us: float = Field(default=0.5, ge=0)
    ts_max_us: float = Field(default=8.0, ge=0)
    ts_points: int = Field(default=20, ge=1)
    ts_us: float = Field(default=7.0, ge=0)
    tr_min_us: float = Field(default=0.0, ge=0)
    tr_max_us: float = Field(default=1.2, ge=0)
    tr_points: int = Field(default=25, ge=1)

    tau_r1_us: float | None = Field(default=None, gt=0)
    tau_r2_us: float | None = Field(default=None, gt=0)
    scatter_probability: float = Field(default=0.0, ge=0, lt=1)
    extra_dephasing_rate_hz: float = Field(default=0.0, ge=0)


class SimulateOut(BaseModel):
    sweep: str
    case_id: int
    seed: int
    atom_count: int
    repetitions: int
    columns: list[str]
    rows: list[list[SweepCell]]


class FitIn(BaseModel):
    model_config = {"extra": "forbid"}

    model: Literal["gaussian", "exponential", "rabi"]
    # Rows of (t, y) or (t, y, sigma); the time unit is the caller's and is
    # inherited by the fitted time constant.
    points: list[list[float]] = Field(min_length=2)


class FitOut(BaseModel):
    model: str
    params: dict[str, float | None]
    stderr: dict[str, float | None]
    rss: float
    converged: bool
    iterations: int
    degenerate: bool
