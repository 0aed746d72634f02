import math
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

SONIC_SPEED = math.sqrt(2.0)
PARITY_TOLERANCE = 1e-12

Parity = Literal["even", "odd", "none"]


def _frozen_array(value) -> np.ndarray:
    arr = np.array(value, dtype=float)
    arr.setflags(write=False)
    return arr


def reflect_values(values: np.ndarray) -> np.ndarray:
    """Samples of f(-x). The x = -L sample is its own mirror image."""
    out = np.empty_like(values)
    out[0] = values[0]
    out[1:] = values[1:][::-1]
    return out


def project_parity(values, parity: Parity) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if parity == "none":
        return values.copy()
    sign = 1.0 if parity == "even" else -1.0
    return 0.5 * (values + sign * reflect_values(values))


# ─── Grids and sampled functions ─────────────────────────────────────────────

class Grid(BaseModel):
    half_length: float = Field(gt=0)
    n_points: int

    class Config:
        frozen = True
        json_schema_extra = {"example": {"half_length": 40.0, "n_points": 640}}

    @field_validator("n_points")
    @classmethod
    def even_and_large_enough(cls, v: int) -> int:
        if v < 4 or v % 2:
            raise ValueError("n_points must be an even integer >= 4")
        return v

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return -self.half_length + self.dx * np.arange(self.n_points)

    @property
    def center_index(self) -> int:
        return self.n_points // 2

    @property
    def points_per_unit(self) -> float:
        return 1.0 / self.dx

    @property
    def is_lattice_commensurate(self) -> bool:
        m = self.points_per_unit
        return abs(m - round(m)) < 1e-9 and abs(self.half_length - round(self.half_length)) < 1e-9

    def resolves(self, omega: float) -> bool:
        return self.dx <= math.pi / (8.0 * abs(omega)) * (1.0 + 1e-12)

    def doubled_domain(self) -> "Grid":
        return Grid(half_length=2.0 * self.half_length, n_points=2 * self.n_points)

    def refined(self) -> "Grid":
        return Grid(half_length=self.half_length, n_points=2 * self.n_points)


class GridFunction(BaseModel):
    grid: Grid
    values: np.ndarray
    parity: Parity = "none"
    decay_rate: float = Field(default=0.0, ge=0)

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("values", mode="before")
    @classmethod
    def as_frozen_array(cls, v):
        return _frozen_array(v)

    @model_validator(mode="after")
    def check_shape_and_parity(self) -> "GridFunction":
        if self.values.shape != (self.grid.n_points,):
            raise ValueError("values must have one sample per grid point")
        if self.parity != "none" and np.all(np.isfinite(self.values)):
            scale = max(float(np.max(np.abs(self.values))), 1e-300)
            if self.parity_defect() > PARITY_TOLERANCE * scale:
                raise ValueError(f"values are not {self.parity} within tolerance")
        return self

    def reflect(self) -> np.ndarray:
        return reflect_values(self.values)

    def parity_defect(self) -> float:
        if self.parity == "none":
            return 0.0
        sign = 1.0 if self.parity == "even" else -1.0
        diff = self.values[1:] - sign * self.reflect()[1:]
        return float(np.max(np.abs(diff))) if diff.size else 0.0

    def with_values(self, values, parity: Optional[Parity] = None) -> "GridFunction":
        """Same grid, new samples projected onto the parity class."""
        parity = parity or self.parity
        return GridFunction(grid=self.grid, values=project_parity(values, parity), parity=parity,
                            decay_rate=self.decay_rate)


class TwoField(BaseModel):
    f1: GridFunction
    f2: GridFunction

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @model_validator(mode="after")
    def same_grid_and_class(self) -> "TwoField":
        if self.f1.grid != self.f2.grid:
            raise ValueError("both components must live on the same grid")
        if self.f1.parity != "even" or self.f2.parity != "odd":
            raise ValueError("TwoField components must be (even, odd)")
        return self

    @property
    def grid(self) -> Grid:
        return self.f1.grid

    @classmethod
    def from_arrays(cls, grid: Grid, v1, v2) -> "TwoField":
        return cls(f1=GridFunction(grid=grid, values=project_parity(v1, "even"), parity="even"),
                   f2=GridFunction(grid=grid, values=project_parity(v2, "odd"), parity="odd"))

    @classmethod
    def zeros(cls, grid: Grid) -> "TwoField":
        z = np.zeros(grid.n_points)
        return cls.from_arrays(grid, z, z)

    def arrays(self):
        return self.f1.values, self.f2.values


# ─── Model parameters and lattice state ──────────────────────────────────────

class ModelParams(BaseModel):
    c: float
    mu: float

    class Config:
        frozen = True
        json_schema_extra = {"example": {"c": 1.45, "mu": 0.01}}

    @field_validator("c")
    @classmethod
    def supersonic(cls, v: float) -> float:
        if not math.isfinite(v) or abs(v) <= SONIC_SPEED:
            raise ValueError(f"|c| must exceed the speed of sound {SONIC_SPEED:.6f}")
        return v

    @field_validator("mu")
    @classmethod
    def mass_ratio(cls, v: float) -> float:
        # mu = 0 is the monatomic limit
        if not (0.0 <= v < 1.0):
            raise ValueError("mu must lie in [0, 1)")
        return v

    @property
    def c0(self) -> float:
        return SONIC_SPEED


class LatticeState(BaseModel):
    y: np.ndarray
    ydot: np.ndarray
    mu: float = Field(gt=0, lt=1)
    t: float = 0.0

    class Config:
        arbitrary_types_allowed = True

    @field_validator("y", "ydot", mode="before")
    @classmethod
    def as_array(cls, v):
        return np.array(v, dtype=float)

    @model_validator(mode="after")
    def same_length(self) -> "LatticeState":
        if self.y.shape != self.ydot.shape or self.y.ndim != 1:
            raise ValueError("positions and velocities must be 1-d arrays of equal length")
        return self

    @property
    def masses(self) -> np.ndarray:
        j = np.arange(self.y.size)
        return np.where(j % 2 == 1, 1.0, self.mu)


# ─── Solver results ──────────────────────────────────────────────────────────

class SolitaryWave(BaseModel):
    c: float
    profile: GridFunction
    measured_decay: float
    decay_fit_r2: float
    residual_norm: float
    iterations: int = 0
    method: str = "petviashvili"

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class RefinedCore(BaseModel):
    base: SolitaryWave
    xi: TwoField
    mu: float
    residual_first_component: float
    residual_second_component: float
    newton_steps: int = 0

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @property
    def grid(self) -> Grid:
        return self.xi.grid

    @property
    def sigma(self) -> TwoField:
        """σ_{c,μ} = σ_c e1 + μ ξ_μ."""
        x1, x2 = self.xi.arrays()
        return TwoField.from_arrays(self.grid, self.base.profile.values + self.mu * x1, self.mu * x2)


class DispersionData(BaseModel):
    mu: float
    c: float
    omega_mu: float
    upsilon_mu: float
    tau_mu: float
    lambda_plus_at_omega: float
    omega_tilde: float
    det_residual: float = 0.0

    class Config:
        frozen = True


class PeriodicWave(BaseModel):
    mu: float
    c: float
    a: float
    omega_a: float
    omega_mu: float
    coeffs1: np.ndarray      # cosine coefficients of φ1, modes 1..K
    coeffs2: np.ndarray      # sine coefficients of φ2, modes 1..K
    n_modes: int
    newton_steps: int = 0
    residual: float = 0.0

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("coeffs1", "coeffs2", mode="before")
    @classmethod
    def as_frozen(cls, v):
        return _frozen_array(v)

    @property
    def xi(self) -> float:
        return self.omega_a - self.omega_mu


class JostData(BaseModel):
    mu: float
    c: float
    omega: float
    parity: Literal[0, 1]
    x_half: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    r_inf: float
    phi_inf: float
    zeta: GridFunction
    dzeta: GridFunction

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class GammaData(BaseModel):
    gamma: GridFunction
    omega: float
    theta_inf: float
    amplitude: float                 # ϱ before renormalization
    neumann_terms_used: int
    correction_norm: float
    contraction_ratio: float
    fit_residual: float
    fit_window: List[float]
    adjoint_residual: float = 0.0

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @property
    def tail_coefficients(self):
        """(α, β) of the renormalized tail α sin ωx + β cos ωx."""
        phase = self.omega * self.theta_inf
        return math.cos(phase), math.sin(phase)


class KappaData(BaseModel):
    kappa: float
    comparator: float
    sin_term: float


class McInterval(BaseModel):
    lo: float
    hi: float
    midpoint: float
    phase_mid: float


class LightContext(BaseModel):
    """Everything the light-equation solvers need at one (c, μ)."""
    params: ModelParams
    dispersion: DispersionData
    core: RefinedCore
    jost_even: JostData
    jost_odd: JostData
    gamma: GammaData
    kappa: KappaData
    chi: GridFunction

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @property
    def grid(self) -> Grid:
        return self.core.grid

    @property
    def omega(self) -> float:
        return self.dispersion.omega_mu

    @property
    def tau(self) -> float:
        return self.dispersion.tau_mu


class NanopteronSolution(BaseModel):
    params: ModelParams
    core: RefinedCore
    eta: TwoField
    a: float
    wave: PeriodicWave
    kappa: float
    b_star: float
    residual_full: float
    iterates: int
    history: List[Dict[str, float]] = []

    class Config:
        arbitrary_types_allowed = True


# ─── Run configuration and reports ───────────────────────────────────────────

class SimConfig(BaseModel):
    n_particles: int
    dt: float = Field(gt=0)
    t_end: float = Field(gt=0)
    mu: float = Field(gt=0, lt=1)
    c: float
    stride: int = Field(default=10, ge=1)
    sponge_fraction: float = Field(default=0.05, ge=0, lt=0.5)
    center: Optional[int] = None

    class Config:
        json_schema_extra = {
            "example": {"n_particles": 400, "dt": 1e-4, "t_end": 34.5, "mu": 0.01, "c": 1.45}
        }

    @field_validator("n_particles")
    @classmethod
    def even_count(cls, v: int) -> int:
        if v < 8 or v % 2:
            raise ValueError("n_particles must be an even integer >= 8")
        return v

    @model_validator(mode="after")
    def resolves_light_mass(self) -> "SimConfig":
        if self.dt > 0.1 * math.sqrt(self.mu):
            raise ValueError("dt must not exceed 0.1*sqrt(mu)")
        return self


class Trajectory(BaseModel):
    """Sampled summary of one velocity-Verlet run."""
    config: SimConfig
    initial: LatticeState
    final: LatticeState
    times: np.ndarray
    energy: np.ndarray
    momentum: np.ndarray
    probe_index: int
    probe: np.ndarray           # ẏ at the probe site, one sample per stride
    snapshot_times: np.ndarray
    snapshots: np.ndarray       # positions, one row per snapshot
    steps: int

    class Config:
        arbitrary_types_allowed = True

    @property
    def energy_drift(self) -> float:
        """max |H(t) - H(0)| / |H(0)| per unit time."""
        e0 = float(self.energy[0])
        span = max(float(self.times[-1] - self.times[0]), 1e-300)
        return float(np.max(np.abs(self.energy - e0))) / max(abs(e0), 1e-300) / span


CommandName = Literal["solitary", "dispersion", "periodic", "jost", "kappa-scan", "mc-scan", "nanopteron",
                      "simulate", "verify-all"]


class RunConfig(BaseModel):
    command: CommandName
    params: Dict[str, object] = {}


class CheckReport(BaseModel):
    check_id: int
    title: str
    status: Literal["pass", "fail", "error"]
    measured: Dict[str, object] = {}
    target: str = ""
    runtime: float = 0.0
    detail: Optional[str] = None
