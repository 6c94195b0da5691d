"""
Model catalog used by the command line: turns a validated RunConfig into the
potential, analytic levels, closed-form states and default grid of one model.
"""
import logging
import math
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from models import (
    Discretization,
    FamilyKind,
    FamilySolution,
    GridFunction,
    GridOverride,
    LevelRecord,
    ModelName,
    ModelParams,
    RunConfig,
    ScarfParams,
    SeriesLabel,
    Sign,
    TransparentParams,
)
from services.algebra_core import pole_distance, pole_resolved_dx
from services.analytic_models import AnalyticModels, analytic_models, flag_coincident
from utils.errors import NotABoundStateError

logger = logging.getLogger(__name__)

# Reduced-variable half width of the transparent-well grid; sech(x/2) ~ e^-20 there
TRANSPARENT_HALF_WIDTH = 40.0

# Spacing of residual grids away from complex poles
RESIDUAL_DX = 0.01


class ModelCase(BaseModel):
    """Everything the CLI needs to evaluate and verify one model instance"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: ModelName
    potential: Callable[[np.ndarray], np.ndarray]
    levels: List[LevelRecord]
    grid: Discretization
    expected_pt: bool
    wavefunction: Callable[[str, int, np.ndarray], GridFunction]
    family: Optional[FamilySolution] = None
    m: Optional[float] = None
    wall: Optional[float] = Field(default=None, description="Pole location closing a half-line grid")
    pole_distance: float = Field(default=math.inf, description="Distance of the nearest complex pole from the grid axis")
    key: Dict[str, Any] = Field(default_factory=dict)
    notes: Dict[str, Any] = Field(default_factory=dict)
    domain: str = Field(default="full_line", description="Domain the default grid discretizes")
    domains: Dict[str, Tuple[Callable[[np.ndarray], np.ndarray], Discretization]] = Field(
        default_factory=dict, description="Potential and grid of every domain whose bound states are counted",
    )

    def discretization(self, override: GridOverride) -> Discretization:
        """Default grid with the user's overrides applied (and re-validated)"""
        merged = self.grid.model_dump()
        merged.update(override.model_dump(exclude_none=True))
        return Discretization(**merged)

    def smooth_nodes(self, d: Discretization) -> np.ndarray:
        """Grid nodes at least one unit away from a pole wall"""
        nodes = d.nodes
        if self.wall is None:
            return nodes
        return nodes[nodes >= self.wall + 1.0]

    def residual_nodes(self, d: Discretization, base_dx: float = RESIDUAL_DX) -> np.ndarray:
        """Smooth nodes of d refined until the nearest complex pole is resolved"""
        refined = d.refined_to(pole_resolved_dx(self.pole_distance, base_dx))
        if refined is not d:
            logger.info(
                f"Residual grid refined to n={refined.n_points} (dx={refined.dx:.3g}) "
                f"for a pole at distance {self.pole_distance:.3g}"
            )
        return self.smooth_nodes(refined)

    @property
    def energies(self) -> List[float]:
        return [level.energy for level in self.levels]

    @property
    def labels(self) -> List[str]:
        return [f"{level.series}[n={level.n}]" for level in self.levels]


class ModelCatalog:
    """Builds ModelCase instances for every supported model"""

    def __init__(self, models: AnalyticModels = analytic_models):
        self.models = models
        self.algebra = models.algebra
        self._builders = {
            ModelName.family: self._family,
            ModelName.scarf: self._scarf,
            ModelName.gpt: self._gpt,
            ModelName.ptII: self._ptII,
            ModelName.transparent: self._transparent,
            ModelName.morse: self._morse,
        }

    def build(self, config: RunConfig) -> ModelCase:
        """
        Args:
            config: Validated run configuration

        Returns:
            ModelCase for config.model

        Raises:
            ValueError: If a parameter the model needs is missing or invalid
        """
        case = self._builders[config.model](config.params, config)
        logger.info(
            f"Model {config.model.value}: {len(case.levels)} analytic level(s), "
            f"default grid [{case.grid.x_min}, {case.grid.x_max}] n={case.grid.n_points}"
        )
        return case

    @staticmethod
    def _require(params: ModelParams, model: str, *names: str) -> None:
        missing = [name for name in names if getattr(params, name) is None]
        if missing:
            flags = ", ".join(f"--{name}" for name in missing)
            raise ValueError(f"model '{model}' requires {flags}")

    @staticmethod
    def _key(config: RunConfig) -> Dict[str, Any]:
        return {
            "model": config.model.value,
            "params": config.params.model_dump(mode="json"),
            "cap": config.cap,
        }

    @staticmethod
    def _pick(series: Dict[str, Callable[[int, np.ndarray], GridFunction]]):
        def wavefunction(label: str, n: int, xs: np.ndarray) -> GridFunction:
            if label not in series:
                raise NotABoundStateError(f"This model has no {label} states")
            return series[label](n, xs)
        return wavefunction

    def _family(self, p: ModelParams, config: RunConfig) -> ModelCase:
        self._require(p, "family", "kind", "m")
        fam = FamilySolution(
            kind=p.kind, b_R=p.b_R, b_I=p.b_I, c=p.c, gamma=p.gamma,
            sign=p.sign, allow_any_gamma=p.allow_any_gamma,
        )
        algebras = {SeriesLabel.series_A.value: (p.m, fam)}
        companion = self.algebra.companion_solution(fam, p.m)
        if companion is not None:
            algebras[SeriesLabel.series_B.value] = companion

        levels = [
            LevelRecord(series=label, n=n, m=m, energy=self.algebra.energy(m, n))
            for label, (m, f) in algebras.items()
            for n in range(self.algebra.bound_state_count(m))
            if not self.algebra.decay_violations(f, m, n)
        ]

        if fam.kind == FamilyKind.III:
            grid = Discretization(x_min=-4.0, x_max=30.0, n_points=2000, stencil=5)
            if fam.sign == Sign.lower:
                grid = Discretization(x_min=-30.0, x_max=4.0, n_points=2000, stencil=5)
        elif fam.kind == FamilyKind.II and fam.gamma == 0:
            # Dirichlet wall at the pole
            grid = Discretization(x_min=fam.c, x_max=fam.c + 30.0, n_points=2000, stencil=5)
        else:
            grid = Discretization(x_min=fam.c - 25.0, x_max=fam.c + 25.0, n_points=2000, stencil=5)

        return ModelCase(
            model=ModelName.family,
            potential=self.algebra.potential_fn(fam, p.m),
            levels=flag_coincident(levels, 1e-12),
            grid=grid,
            expected_pt=self.algebra.expected_pt_symmetric(fam),
            wavefunction=self._pick({
                label: (lambda n, xs, m=m, f=f: self.algebra.closed_form_state(f, m, n, xs))
                for label, (m, f) in algebras.items()
            }),
            family=fam,
            m=p.m,
            wall=fam.c if fam.kind == FamilyKind.II and fam.gamma == 0 else None,
            pole_distance=pole_distance(fam),
            key=self._key(config),
        )

    def _scarf(self, p: ModelParams, config: RunConfig) -> ModelCase:
        self._require(p, "scarf", "A", "B")
        params = ScarfParams(A=p.A, B=p.B)
        maps = {
            algebra_map.series_label.value: algebra_map
            for algebra_map in self.models.scarf_algebra_maps(params)
        }
        return ModelCase(
            model=ModelName.scarf,
            potential=lambda xs: self.models.scarf_potential(params, xs),
            levels=self.models.scarf_levels(params),
            grid=Discretization(x_min=-20.0, x_max=20.0, n_points=2000, stencil=5),
            expected_pt=True,
            wavefunction=self._pick({
                label: (lambda n, xs, a=a: self.models.scarf_wavefunction(a, n, xs))
                for label, a in maps.items()
            }),
            family=self.models.scarf_family(maps[SeriesLabel.series_A.value]),
            m=maps[SeriesLabel.series_A.value].m,
            pole_distance=pole_distance(self.models.scarf_family(maps[SeriesLabel.series_A.value])),
            key=self._key(config),
            notes={"series": self.models.scarf_spectrum(params)},
        )

    def _gpt(self, p: ModelParams, config: RunConfig) -> ModelCase:
        self._require(p, "gpt", "A", "B")
        A, B, c, gamma = p.A, p.B, p.c, p.gamma
        half_line = Discretization(x_min=c, x_max=c + 30.0, n_points=2000, stencil=5)
        full_line = Discretization(x_min=c - 25.0, x_max=c + 25.0, n_points=2000, stencil=5)
        grid = half_line if gamma == 0 else full_line
        # The half-line problem is the unshifted potential with a wall at its pole
        domains = {"half_line": (lambda xs: self.models.gpt_potential(A, B, c, 0.0, xs), half_line)}
        if gamma != 0:
            domains["full_line"] = (lambda xs: self.models.gpt_potential(A, B, c, gamma, xs), full_line)
        _, m_A, fam_A = self.models.gpt_series(A, B, gamma, c)[0]
        return ModelCase(
            model=ModelName.gpt,
            potential=lambda xs: self.models.gpt_potential(A, B, c, gamma, xs),
            levels=self.models.gpt_levels(A, B, gamma, c),
            grid=grid,
            expected_pt=c == 0,
            wavefunction=self._pick({
                label.value: (lambda n, xs, s=label: self.models.gpt_wavefunction(A, B, c, gamma, s, n, xs))
                for label in SeriesLabel
            }),
            family=fam_A,
            m=m_A,
            wall=c if gamma == 0 else None,
            pole_distance=pole_distance(fam_A),
            domain="half_line" if gamma == 0 else "full_line",
            key=self._key(config),
            notes={"bound_state_counts": self.models.gpt_bound_counts(A, B, gamma, c)},
            domains=domains,
        )

    def _ptII(self, p: ModelParams, config: RunConfig) -> ModelCase:
        self._require(p, "ptII", "A", "B")
        A, B, gamma = p.A, p.B, p.gamma
        levels = [
            level.model_copy(update={"energy": 4.0 * level.energy})
            for level in self.models.gpt_levels(A, B, gamma)
        ]
        if gamma == 0:
            grid = Discretization(x_min=0.0, x_max=15.0, n_points=1200, stencil=5)
        else:
            grid = Discretization(x_min=-12.0, x_max=12.0, n_points=1200, stencil=5)
        return ModelCase(
            model=ModelName.ptII,
            potential=self.models.map_to_ptII(A, B, gamma),
            levels=levels,
            grid=grid,
            wall=0.0 if gamma == 0 else None,
            pole_distance=math.inf if gamma == 0 else abs(math.remainder(gamma, math.pi)) / 2.0,
            expected_pt=True,
            wavefunction=self._pick({
                label.value: (lambda n, ts, s=label: self.models.ptII_wavefunction(A, B, gamma, s, n, ts))
                for label in SeriesLabel
            }),
            key=self._key(config),
        )

    def _transparent(self, p: ModelParams, config: RunConfig) -> ModelCase:
        self._require(p, "transparent", "eps_R", "rho")
        tp = TransparentParams(eps_R=p.eps_R, b_shift=p.b_shift, rho=p.rho, a=p.a)
        reduction = self.models.transparent_hamiltonian(tp)
        half_width = TRANSPARENT_HALF_WIDTH / (2.0 * math.sqrt(-tp.eps_R))

        def ground(n: int, ys: np.ndarray) -> GridFunction:
            if n != 0:
                raise NotABoundStateError(f"The transparent well has a single bound state, got n={n}")
            return self.models.transparent_wavefunction(tp, ys)

        return ModelCase(
            model=ModelName.transparent,
            potential=lambda ys: self.models.transparent_potential(tp, ys),
            levels=[LevelRecord(
                series=SeriesLabel.series_B.value, n=0, m=1.0, energy=reduction.bound_state_energy,
            )],
            grid=Discretization(
                x_min=-tp.b_shift - half_width, x_max=-tp.b_shift + half_width,
                n_points=2000, stencil=5,
            ),
            expected_pt=tp.b_shift == 0,
            wavefunction=self._pick({SeriesLabel.series_B.value: ground}),
            # cosh vanishes at y = -b + i(pi/2 + k pi - rho) / sqrt(-eps_R)
            pole_distance=abs(math.remainder(tp.rho - 0.5 * math.pi, math.pi)) / math.sqrt(-tp.eps_R),
            key=self._key(config),
            notes={"reduction": reduction.model_dump(), "a": tp.a},
        )

    def _morse(self, p: ModelParams, config: RunConfig) -> ModelCase:
        self._require(p, "morse", "A", "B_R")
        potential, energies = self.models.morse_complexified(p.A, p.B_R, p.B_I, cap=config.cap)
        m = p.A + 0.5
        return ModelCase(
            model=ModelName.morse,
            potential=potential,
            levels=[
                LevelRecord(series=SeriesLabel.series_A.value, n=n, m=m, energy=energy)
                for n, energy in enumerate(energies)
            ],
            grid=Discretization(x_min=-4.0, x_max=30.0, n_points=3000, stencil=5),
            expected_pt=False,
            wavefunction=self._pick({
                SeriesLabel.series_A.value: lambda n, xs: self.models.morse_wavefunction(p.A, p.B_R, p.B_I, n, xs),
            }),
            family=self.models.morse_family(p.B_R, p.B_I),
            m=m,
            key=self._key(config),
        )


model_catalog = ModelCatalog()
