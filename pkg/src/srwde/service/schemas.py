"""Request/response models of the lab service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..experiments import ExperimentConfig, RunResult, WeightSpec

__all__ = [
    "WeightSpec",
    "ExperimentConfig",
    "RunResult",
    "SimulateRequest",
    "ProfileResponse",
    "CoupledProfileResponse",
    "RhoRequest",
    "DistributionResponse",
    "FunctionPayload",
    "MetricRequest",
    "MetricResponse",
    "BandRequest",
    "BandResponse",
]


class SimulateRequest(BaseModel):
    weight: WeightSpec = Field(default_factory=WeightSpec)
    N: int = 100
    x: float = 1.0
    theta: float = 0.5
    iota: int = -1
    seed: int = 0
    replicate: int = 0
    backend: str = "walk"  # walk | eta | coupled


class ProfileResponse(BaseModel):
    lo: int
    hi: int
    ell_minus: list[int]
    ell_plus: list[int]
    chi: int
    T: int
    I_minus: int
    I_plus: int
    meta: dict


class CoupledProfileResponse(ProfileResponse):
    zeta: list[float]
    matched: list[bool]
    n_threshold: int


class RhoRequest(BaseModel):
    weight: WeightSpec = Field(default_factory=WeightSpec)
    which: str = "rho_minus"  # rho_minus | rho_zero | nstep
    n: int = 0  # chain length for which = nstep
    tail_tol: float = 1e-12


class DistributionResponse(BaseModel):
    offset: float
    min_index: int
    probs: list[float]
    mean: float
    variance: float


class FunctionPayload(BaseModel):
    """A step function (breakpoints/values/left_value) or a polyline (us/rs)."""

    breakpoints: list[float] | None = None
    values: list[float] | None = None
    left_value: float = 0.0
    us: list[float] | None = None
    rs: list[float] | None = None


class MetricRequest(BaseModel):
    f: FunctionPayload
    g: FunctionPayload
    which: str = "m1"  # m1 | m1_whole | j1 | uniform
    interval: tuple[float, float] | None = None
    tol: float = 1e-6


class MetricResponse(BaseModel):
    lower: float
    upper: float
    tolerance: float


class BandRequest(BaseModel):
    weight: WeightSpec = Field(default_factory=WeightSpec)
    x: float = 1.0
    theta: float = 0.5
    seed: int = 0


class BandResponse(BaseModel):
    delta1: float
    delta2: float
    center: float
