import math
from enum import Enum
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Allowed range of the imaginary shift for the families with a shift
GAMMA_MIN = -math.pi / 4
GAMMA_MAX = math.pi / 4


class ComplexScalar(BaseModel):
    """Complex number with finite real and imaginary parts"""
    model_config = ConfigDict(frozen=True)

    re: float
    im: float

    @field_validator('re', 'im')
    @classmethod
    def validate_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError('Complex components must be finite')
        return v

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexScalar":
        z = complex(z)
        return cls(re=z.real, im=z.imag)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


class FamilyKind(str, Enum):
    I = "I"
    II = "II"
    III = "III"


class Sign(str, Enum):
    """Sign choice of the exponential family: F = +1 (upper) or F = -1 (lower)"""
    upper = "upper"
    lower = "lower"


class FamilySolution(BaseModel):
    """
    One solved (F, G) pair of the potential algebra

    I:   F = tanh(x - c - i*gamma),  G = b sech(x - c - i*gamma)
    II:  F = coth(x - c - i*gamma),  G = b cosech(x - c - i*gamma)
    III: F = +-1,                    G = b exp(-+x)
    """
    model_config = ConfigDict(frozen=True)

    kind: FamilyKind
    b_R: float = Field(default=0.0, description="Real part of the coupling b")
    b_I: float = Field(default=0.0, description="Imaginary part of the coupling b")
    c: float = Field(default=0.0, description="Real shift")
    gamma: float = Field(default=0.0, description="Imaginary shift (radians)")
    sign: Sign = Field(default=Sign.upper, description="Exponential family sign")
    allow_any_gamma: bool = Field(
        default=False,
        description="Skip the [-pi/4, pi/4) range check on gamma (exploration only)",
    )

    @model_validator(mode='before')
    @classmethod
    def normalize_exponential_family(cls, data):
        # The exponential family has neither a real nor an imaginary shift
        if isinstance(data, dict) and data.get('kind') == FamilyKind.III:
            data = dict(data)
            data['c'] = 0.0
            data['gamma'] = 0.0
        return data

    @field_validator('b_R', 'b_I', 'c', 'gamma')
    @classmethod
    def validate_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError('Family parameters must be finite')
        return v

    @model_validator(mode='after')
    def validate_gamma_range(self):
        if self.allow_any_gamma or self.kind == FamilyKind.III:
            return self
        if not (GAMMA_MIN <= self.gamma < GAMMA_MAX):
            raise ValueError(
                f'gamma must lie in [-pi/4, pi/4), got {self.gamma}; '
                'set allow_any_gamma to explore outside this range'
            )
        return self

    @property
    def b(self) -> complex:
        return complex(self.b_R, self.b_I)

    @property
    def shift(self) -> complex:
        """Complex shift c + i*gamma, so that xi = x - shift"""
        return complex(self.c, self.gamma)


class AlgebraState(BaseModel):
    """Basis state |k m> of the lowest-weight ladder, n = m - k"""
    model_config = ConfigDict(frozen=True)

    k: float = Field(..., gt=0, description="Lowest weight")
    m: float = Field(..., description="Weight")

    @model_validator(mode='after')
    def validate_ladder_position(self):
        n = self.m - self.k
        if n < -1e-9 or abs(n - round(n)) > 1e-9:
            raise ValueError(
                f'm - k must be a nonnegative integer, got m={self.m}, k={self.k}'
            )
        return self

    @property
    def n(self) -> int:
        return int(round(self.m - self.k))


class GridFunction(BaseModel):
    """Complex samples of a function on the uniform grid x0 + j*dx"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x0: float
    dx: float = Field(..., gt=0)
    values: np.ndarray

    @field_validator('values', mode='before')
    @classmethod
    def validate_values(cls, v):
        arr = np.asarray(v, dtype=complex)
        if arr.ndim != 1:
            raise ValueError('Grid function values must be one-dimensional')
        if arr.size < 5:
            raise ValueError(f'Grid function needs at least 5 samples, got {arr.size}')
        return arr

    @classmethod
    def on_grid(cls, xs: np.ndarray, values: np.ndarray) -> "GridFunction":
        xs = np.asarray(xs, dtype=float)
        if xs.size < 2:
            raise ValueError('Grid must have at least two nodes')
        dx = float(xs[1] - xs[0])
        if not np.allclose(np.diff(xs), dx, rtol=1e-9, atol=1e-12):
            raise ValueError('Grid must be uniformly spaced')
        return cls(x0=float(xs[0]), dx=dx, values=values)

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.size)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(x0=self.x0, dx=self.dx, values=values)


class ScarfParams(BaseModel):
    """(A, B) of the PT-symmetric Scarf II potential"""
    model_config = ConfigDict(frozen=True)

    A: float = Field(..., description="Well depth parameter, A + 1/2 > 0")
    B: float = Field(..., gt=0, description="Imaginary-coupling parameter")

    @field_validator('A')
    @classmethod
    def validate_A(cls, v):
        if not v + 0.5 > 0:
            raise ValueError(f'A + 1/2 must be positive, got A={v}')
        return v


class SeriesLabel(str, Enum):
    series_A = "series_A"
    series_B = "series_B"


class AlgebraMap(BaseModel):
    """One of the two algebras realizing the Scarf II potential: (m, b_I)"""
    model_config = ConfigDict(frozen=True)

    m: float = Field(..., gt=0)
    b_I: float
    series_label: SeriesLabel


class TransparentParams(BaseModel):
    """
    Parameters of the complex transparent well 2*eps_R / cosh^2[sqrt(-eps_R)(y + b) + i*rho]

    `a` is optional; when omitted it is derived from rho through
    rho = (1/2) arctan(2 sqrt(-eps_R) / a).
    """
    model_config = ConfigDict(frozen=True)

    eps_R: float = Field(..., lt=0, description="Bound-state energy")
    b_shift: float = Field(default=0.0, description="Real coordinate shift b")
    rho: float = Field(..., description="Imaginary shift")
    a: Optional[float] = Field(default=None, description="Nonzero real constant fixing rho")

    @field_validator('rho')
    @classmethod
    def validate_rho(cls, v):
        # cosh(u + i*rho) has a real zero exactly when rho = pi(2n+1)/2
        if abs(math.cos(v)) < 1e-12:
            raise ValueError(f'rho must differ from an odd multiple of pi/2, got {v}')
        return v

    @model_validator(mode='before')
    @classmethod
    def derive_a(cls, data):
        if not isinstance(data, dict) or data.get('a') is not None:
            return data
        try:
            eps_R = float(data['eps_R'])
            rho = float(data['rho'])
        except (KeyError, TypeError, ValueError):
            return data
        t = math.tan(2.0 * rho)
        # rho = 0 is the real well, a -> infinity
        if eps_R < 0 and abs(t) > 1e-15:
            data = dict(data)
            data['a'] = 2.0 * math.sqrt(-eps_R) / t
        return data

    @model_validator(mode='after')
    def validate_a(self):
        root = 2.0 * math.sqrt(-self.eps_R)
        if self.a is None:
            return self
        if self.a == 0:
            raise ValueError('a must be nonzero')
        expected = 0.5 * math.atan(root / self.a)
        # rho is fixed only up to sign and the period of arctan
        if not any(
            abs(math.remainder(s * self.rho - expected, math.pi / 2)) < 1e-9
            for s in (1.0, -1.0)
        ):
            raise ValueError(
                f'rho={self.rho} is inconsistent with a={self.a}: '
                f'expected +-{expected}'
            )
        return self

    @property
    def c(self) -> float:
        return -2.0 * math.sqrt(-self.eps_R) * self.b_shift

    @property
    def gamma(self) -> float:
        return -2.0 * self.rho


class Discretization(BaseModel):
    """Uniform Dirichlet grid with interior nodes x_min + j*dx, j = 1..n_points"""
    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    n_points: int = Field(..., ge=50)
    boundary: Literal["dirichlet"] = "dirichlet"
    stencil: Literal[3, 5] = Field(default=3, description="Second-difference stencil width")

    @model_validator(mode='after')
    def validate_interval(self):
        if not self.x_min < self.x_max:
            raise ValueError(f'x_min must be below x_max, got [{self.x_min}, {self.x_max}]')
        return self

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(1, self.n_points + 1)

    def refined(self) -> "Discretization":
        """Same interval with dx halved"""
        return self.model_copy(update={'n_points': 2 * self.n_points + 1})

    def refined_to(self, max_dx: float) -> "Discretization":
        """Halve dx until it is at most max_dx; nodes of self stay nodes"""
        if max_dx <= 0:
            raise ValueError(f'max_dx must be positive, got {max_dx}')
        grid = self
        while grid.dx > max_dx:
            grid = grid.refined()
        return grid


class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True)

    e_tol: float = Field(default=1e-3, gt=0, description="Energy matching window")
    im_tol: float = Field(default=1e-6, gt=0, description="Max |Im| of a matched eigenvalue")
    crossing_tol: float = Field(default=1e-3, gt=0, description="Quasi-degeneracy threshold")
    crossing_im_tol: float = Field(
        default=1e-3, gt=0, description="Max |Im| of an eigenvalue matched to coincident levels",
    )
    residual_tol: float = Field(default=1e-5, gt=0, description="Schrodinger residual bound")
    pt_tol: float = Field(default=1e-10, gt=0, description="PT-symmetry violation bound")


class SpectrumMatch(BaseModel):
    analytic: float
    numeric: ComplexScalar
    gap: float
    label: Optional[str] = None
    crossing: bool = Field(default=False, description="Matched through a coincident-level cluster")


class UnmatchedLevel(BaseModel):
    analytic: float
    label: Optional[str] = None
    reason: Literal["no_eigenvalue", "crossing_collapse"] = "no_eigenvalue"


class SpectrumReport(BaseModel):
    """Outcome of matching analytic levels against numeric eigenvalues"""
    matches: List[SpectrumMatch] = Field(default_factory=list)
    unmatched_analytic: List[UnmatchedLevel] = Field(default_factory=list)
    spurious_numeric: List[ComplexScalar] = Field(default_factory=list)
    max_imag: float = 0.0
    crossing_imag: float = 0.0

    @property
    def max_gap(self) -> float:
        return max((m.gap for m in self.matches), default=0.0)

    @property
    def crossing_matches(self) -> List[SpectrumMatch]:
        return [m for m in self.matches if m.crossing]

    @property
    def all_matched(self) -> bool:
        return not any(u.reason == "no_eigenvalue" for u in self.unmatched_analytic)


class LevelRecord(BaseModel):
    """One analytic bound state: its series, index, weight and energy"""
    series: str
    n: int = Field(..., ge=0)
    m: float
    energy: float
    coincident: bool = False


class CheckResult(BaseModel):
    """Named pass/fail verification outcome"""
    model_config = ConfigDict(populate_by_name=True)

    name: str
    passed: bool = Field(..., alias="pass")
    detail: str = ""


class ModelName(str, Enum):
    family = "family"
    scarf = "scarf"
    gpt = "gpt"
    ptII = "ptII"
    transparent = "transparent"
    morse = "morse"


class CommandName(str, Enum):
    potential = "potential"
    spectrum = "spectrum"
    wavefunction = "wavefunction"
    verify = "verify"
    crossing_scan = "crossing-scan"
    algebra_check = "algebra-check"


class ModelParams(BaseModel):
    """Raw parameter map; which fields are required depends on the model"""
    kind: Optional[FamilyKind] = None
    b_R: float = 0.0
    b_I: float = 0.0
    c: float = 0.0
    gamma: float = 0.0
    m: Optional[float] = None
    n: int = Field(default=0, ge=0)
    sign: Sign = Sign.upper
    A: Optional[float] = None
    B: Optional[float] = None
    B_R: Optional[float] = None
    B_I: float = 0.0
    eps_R: Optional[float] = None
    b_shift: float = 0.0
    rho: Optional[float] = None
    a: Optional[float] = None
    series: Optional[SeriesLabel] = None
    allow_any_gamma: bool = False


class GridOverride(BaseModel):
    x_min: Optional[float] = None
    x_max: Optional[float] = None
    n_points: Optional[int] = Field(default=None, ge=50)
    stencil: Optional[Literal[3, 5]] = None


class RunConfig(BaseModel):
    """Validated command-line invocation"""
    command: CommandName
    model: ModelName = ModelName.scarf
    params: ModelParams = Field(default_factory=ModelParams)
    grid: GridOverride = Field(default_factory=GridOverride)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    seed: int = 0
    cap: float = Field(default=1e6, gt=0, description="Modulus cap applied to the Morse wall")
    B_from: Optional[float] = None
    B_to: Optional[float] = None
    steps: int = Field(default=61, ge=2)

    @model_validator(mode='after')
    def validate_scan(self):
        if self.command == CommandName.crossing_scan:
            if self.params.A is None or self.B_from is None or self.B_to is None:
                raise ValueError('crossing-scan requires --A, --B_from and --B_to')
            if not 0 < self.B_from < self.B_to:
                raise ValueError(
                    f'crossing-scan needs 0 < B_from < B_to, got {self.B_from}, {self.B_to}'
                )
        return self


class CrossingPair(BaseModel):
    """Quasi-degenerate pair of levels from the two Scarf II series"""
    nA: int
    nB: int
    gap: float
    defect: float


class CrossingRow(BaseModel):
    """One B value of a crossing scan: the closest inter-series pair"""
    B: float
    nA: Optional[int] = None
    nB: Optional[int] = None
    energy_A: Optional[float] = None
    energy_B: Optional[float] = None
    gap: Optional[float] = None
    defect: Optional[float] = None


class TransparentReduction(BaseModel):
    """Transparent well rewritten as a scaled shifted sech^2(x/2) Hamiltonian"""
    c: float
    gamma: float
    scale: float
    reduced_energy: float
    bound_state_energy: float
