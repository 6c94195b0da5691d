"""
Worked models built on the potential algebra: PT-symmetric Scarf II with its
two algebras, the complexified generalized Poschl-Teller potential with its
Poschl-Teller II image and transparent limit, and the complexified Morse
potential.
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from models import (
    AlgebraMap,
    CrossingPair,
    CrossingRow,
    FamilyKind,
    FamilySolution,
    GridFunction,
    LevelRecord,
    ScarfParams,
    SeriesLabel,
    Sign,
    TransparentParams,
    TransparentReduction,
)
from services.algebra_core import PotentialAlgebra, algebra_service, collinearity_defect, normalize
from utils.errors import NonNormalizableError, NotABoundStateError
from utils.special_functions import safe_cosech_coth, safe_sech_tanh

logger = logging.getLogger(__name__)

PotentialFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_CROSSING_GRID = np.linspace(-20.0, 20.0, 4001)


class AnalyticModels:
    """Closed-form spectra, potentials and states of the worked models"""

    def __init__(self, algebra: PotentialAlgebra = algebra_service):
        self.algebra = algebra

    # ------------------------------------------------------------------
    # PT-symmetric Scarf II
    # ------------------------------------------------------------------

    def scarf_algebra_maps(self, p: ScarfParams) -> Tuple[AlgebraMap, AlgebraMap]:
        """
        The two algebras reproducing the Scarf II potential

        Returns:
            (series_A map with (m, b_I) = (A + 1/2, -B),
             series_B map with (m, b_I) = (B, -A - 1/2))
        """
        maps = (
            AlgebraMap(m=p.A + 0.5, b_I=-p.B, series_label=SeriesLabel.series_A),
            AlgebraMap(m=p.B, b_I=-(p.A + 0.5), series_label=SeriesLabel.series_B),
        )
        for algebra_map in maps:
            r_depth, r_coupling = self.scarf_constraint_residuals(p, algebra_map)
            logger.debug(
                f"{algebra_map.series_label.value}: constraint residuals {r_depth:.2e}, {r_coupling:.2e}"
            )
        return maps

    @staticmethod
    def scarf_constraint_residuals(p: ScarfParams, algebra_map: AlgebraMap) -> Tuple[float, float]:
        """Residuals of b_I^2 + m^2 - 1/4 = B^2 + A(A+1) and -2 m b_I = B(2A+1)"""
        m, b_I = algebra_map.m, algebra_map.b_I
        depth = abs(b_I**2 + m**2 - 0.25 - (p.B**2 + p.A * (p.A + 1.0)))
        coupling = abs(-2.0 * m * b_I - p.B * (2.0 * p.A + 1.0))
        return depth, coupling

    @staticmethod
    def scarf_family(algebra_map: AlgebraMap) -> FamilySolution:
        return FamilySolution(kind=FamilyKind.I, b_R=0.0, b_I=algebra_map.b_I)

    @staticmethod
    def scarf_potential(p: ScarfParams, x):
        """-[B^2 + A(A+1)] sech^2 x + i B(2A+1) sech x tanh x"""
        sech, tanh = safe_sech_tanh(np.asarray(x, dtype=float))
        values = -(p.B**2 + p.A * (p.A + 1.0)) * sech**2 + 1j * p.B * (2.0 * p.A + 1.0) * sech * tanh
        return complex(values) if np.ndim(x) == 0 else values

    def scarf_wavefunction(self, algebra_map: AlgebraMap, n: int, xs: np.ndarray) -> GridFunction:
        """
        Bound state n of one Scarf II algebra:
        (sech x)^(m-1/2) exp[i b_I gd x] P_n^(-b_I-m, b_I-m)(i sinh x)

        Raises:
            NotABoundStateError: If n >= m - 1/2
        """
        if self.algebra.bound_state_count(algebra_map.m) <= n:
            raise NotABoundStateError(
                f"n={n} exceeds the {algebra_map.series_label.value} ladder (m={algebra_map.m})"
            )
        return self.algebra.closed_form_state(self.scarf_family(algebra_map), algebra_map.m, n, xs)

    def scarf_spectrum(self, p: ScarfParams) -> Dict[str, List[float]]:
        """Energies of both series: -(A - n)^2, n < A and -(B - n - 1/2)^2, n < B - 1/2"""
        spectrum = {}
        for algebra_map in self.scarf_algebra_maps(p):
            count = self.algebra.bound_state_count(algebra_map.m)
            spectrum[algebra_map.series_label.value] = [
                self.algebra.energy(algebra_map.m, n) for n in range(count)
            ]
        return spectrum

    def scarf_levels(self, p: ScarfParams, tol: float = 1e-12) -> List[LevelRecord]:
        """Union of both series, sorted by energy, with coincident levels flagged"""
        levels = []
        for algebra_map in self.scarf_algebra_maps(p):
            for n in range(self.algebra.bound_state_count(algebra_map.m)):
                levels.append(LevelRecord(
                    series=algebra_map.series_label.value,
                    n=n,
                    m=algebra_map.m,
                    energy=self.algebra.energy(algebra_map.m, n),
                ))
        return flag_coincident(levels, tol)

    def detect_crossing(
        self,
        p: ScarfParams,
        tol: float = 1e-3,
        xs: Optional[np.ndarray] = None,
    ) -> List[CrossingPair]:
        """
        Inter-series level pairs closer than `tol`, with the collinearity
        defect of their closed-form wavefunctions
        """
        if tol <= 0:
            raise ValueError(f"Crossing tolerance must be positive, got {tol}")
        grid = DEFAULT_CROSSING_GRID if xs is None else np.asarray(xs, dtype=float)
        map_A, map_B = self.scarf_algebra_maps(p)
        spectrum = self.scarf_spectrum(p)

        pairs = []
        for nA, energy_A in enumerate(spectrum[SeriesLabel.series_A.value]):
            for nB, energy_B in enumerate(spectrum[SeriesLabel.series_B.value]):
                gap = abs(energy_A - energy_B)
                if gap < tol:
                    defect = collinearity_defect(
                        self.scarf_wavefunction(map_A, nA, grid).values,
                        self.scarf_wavefunction(map_B, nB, grid).values,
                    )
                    pairs.append(CrossingPair(nA=nA, nB=nB, gap=gap, defect=defect))
        if pairs:
            logger.info(f"Scarf II A={p.A}, B={p.B}: {len(pairs)} quasi-degenerate pair(s)")
        return pairs

    def crossing_scan(
        self,
        A: float,
        B_from: float,
        B_to: float,
        steps: int,
        xs: Optional[np.ndarray] = None,
    ) -> List[CrossingRow]:
        """Closest inter-series pair and its wavefunction defect for each B"""
        grid = DEFAULT_CROSSING_GRID if xs is None else np.asarray(xs, dtype=float)
        rows = []
        for B in np.linspace(B_from, B_to, steps):
            p = ScarfParams(A=A, B=float(B))
            spectrum = self.scarf_spectrum(p)
            candidates = [
                (abs(eA - eB), nA, nB, eA, eB)
                for nA, eA in enumerate(spectrum[SeriesLabel.series_A.value])
                for nB, eB in enumerate(spectrum[SeriesLabel.series_B.value])
            ]
            if not candidates:
                rows.append(CrossingRow(B=float(B)))
                continue
            gap, nA, nB, eA, eB = min(candidates)
            map_A, map_B = self.scarf_algebra_maps(p)
            defect = collinearity_defect(
                self.scarf_wavefunction(map_A, nA, grid).values,
                self.scarf_wavefunction(map_B, nB, grid).values,
            )
            rows.append(CrossingRow(
                B=float(B), nA=nA, nB=nB, energy_A=eA, energy_B=eB, gap=gap, defect=defect,
            ))
        logger.info(f"Crossing scan A={A}: {len(rows)} rows over B in [{B_from}, {B_to}]")
        return rows

    # ------------------------------------------------------------------
    # Complexified generalized Poschl-Teller, Poschl-Teller II, transparent well
    # ------------------------------------------------------------------

    @staticmethod
    def gpt_potential(A: float, B: float, c: float, gamma: float, x):
        """[B^2 + A(A+1)] cosech^2(x-c-i gamma) - B(2A+1) cosech coth (x-c-i gamma)"""
        xs = np.asarray(x, dtype=float)
        cosech, coth = safe_cosech_coth(xs - complex(c, gamma))
        values = (B**2 + A * (A + 1.0)) * cosech**2 - B * (2.0 * A + 1.0) * cosech * coth
        return complex(values) if np.ndim(x) == 0 else values

    @staticmethod
    def gpt_series(A: float, B: float, gamma: float, c: float = 0.0) -> List[Tuple[SeriesLabel, float, FamilySolution]]:
        """
        The two family-II algebras of the generalized Poschl-Teller potential:
        (m, b) = (A + 1/2, B) and (B, A + 1/2)
        """
        def family(b: float) -> FamilySolution:
            return FamilySolution(kind=FamilyKind.II, b_R=b, c=c, gamma=gamma, allow_any_gamma=True)

        return [
            (SeriesLabel.series_A, A + 0.5, family(B)),
            (SeriesLabel.series_B, B, family(A + 0.5)),
        ]

    def gpt_levels(
        self,
        A: float,
        B: float,
        gamma: float,
        c: float = 0.0,
        half_line: Optional[bool] = None,
    ) -> List[LevelRecord]:
        """
        Admissible bound states of both series

        The half-line rules (state vanishing at x = c) apply by default
        only at gamma = 0, where the potential is singular.
        """
        if half_line is None:
            half_line = gamma == 0
        levels = []
        for label, m, fam in self.gpt_series(A, B, gamma, c):
            for n in range(self.algebra.bound_state_count(m)):
                if not self.algebra.decay_violations(fam, m, n, half_line=half_line):
                    levels.append(LevelRecord(series=label.value, n=n, m=m, energy=self.algebra.energy(m, n)))
        return flag_coincident(levels, 1e-12)

    def gpt_bound_counts(self, A: float, B: float, gamma: float = 0.0, c: float = 0.0) -> Dict[str, int]:
        """
        Number of analytic levels on the half line x > c (the unshifted,
        singular potential) and on the full line (the potential shifted by
        gamma, or any nonzero shift when gamma = 0)
        """
        return {
            "half_line": len(self.gpt_levels(A, B, 0.0, c, half_line=True)),
            "full_line": len(self.gpt_levels(A, B, gamma, c, half_line=False)),
        }

    def gpt_wavefunction(
        self,
        A: float,
        B: float,
        c: float,
        gamma: float,
        series: SeriesLabel,
        n: int,
        xs: np.ndarray,
        half_line: Optional[bool] = None,
    ) -> GridFunction:
        """
        Raises:
            NonNormalizableError: If the state is not admissible on its domain
        """
        for label, m, fam in self.gpt_series(A, B, gamma, c):
            if label == series:
                violations = self.algebra.decay_violations(fam, m, n, half_line=half_line)
                if violations:
                    raise NonNormalizableError(violations)
                return self.algebra.closed_form_state(fam, m, n, xs, check=False)
        raise ValueError(f"Unknown series {series}")

    @staticmethod
    def map_to_ptII(A: float, B: float, gamma: float) -> PotentialFn:
        """
        Poschl-Teller II image under t = x/2:
        V(t) = (B-A)(B-A-1)/sinh^2(t - i eps) - (A+B)(A+B+1)/cosh^2(t - i eps),
        eps = gamma/2. Energies carry over as E_t = 4 E_x.
        """
        eps = gamma / 2.0
        repulsive = (B - A) * (B - A - 1.0)
        attractive = (A + B) * (A + B + 1.0)

        def potential(ts):
            tt = np.asarray(ts, dtype=float) - 1j * eps
            sech, _ = safe_sech_tanh(tt)
            if repulsive == 0:
                return -attractive * sech**2
            cosech, _ = safe_cosech_coth(tt)
            return repulsive * cosech**2 - attractive * sech**2

        return potential

    def ptII_wavefunction(
        self,
        A: float,
        B: float,
        gamma: float,
        series: SeriesLabel,
        n: int,
        ts: np.ndarray,
    ) -> GridFunction:
        """Generalized Poschl-Teller state carried to the t = x/2 frame"""
        ts = np.asarray(ts, dtype=float)
        state = self.gpt_wavefunction(A, B, 0.0, gamma, series, n, 2.0 * ts)
        return GridFunction.on_grid(ts, normalize(state.values, float(ts[1] - ts[0])))

    def transparent_hamiltonian(self, tp: TransparentParams) -> TransparentReduction:
        """
        Identify the transparent well with -4 eps_R [-d^2/dx^2 - (1/2) sech^2((x-c-i gamma)/2)],
        c = -2 sqrt(-eps_R) b, gamma = -2 rho. The reduced Hamiltonian (A = 0)
        has the single level -1/4.
        """
        # B = A + 1 cancels the cosech^2 singularity, so full-line counting holds for every gamma
        levels = self.gpt_levels(0.0, 1.0, tp.gamma, half_line=False)
        reduced_energy = levels[0].energy
        scale = -4.0 * tp.eps_R
        return TransparentReduction(
            c=tp.c,
            gamma=tp.gamma,
            scale=scale,
            reduced_energy=reduced_energy,
            bound_state_energy=scale * reduced_energy,
        )

    @staticmethod
    def reduced_transparent_potential(c: float, gamma: float, A: float = 0.0) -> PotentialFn:
        """-(1/2)(A+1)(2A+1) sech^2((x - c - i gamma)/2), the B = A + 1 generalized Poschl-Teller well"""
        depth = 0.5 * (A + 1.0) * (2.0 * A + 1.0)

        def potential(xs):
            sech, _ = safe_sech_tanh((np.asarray(xs, dtype=float) - complex(c, gamma)) / 2.0)
            return -depth * sech**2

        return potential

    @staticmethod
    def transparent_potential(tp: TransparentParams, y):
        """2 eps_R / cosh^2[sqrt(-eps_R)(y + b) + i rho]"""
        arg = math.sqrt(-tp.eps_R) * (np.asarray(y, dtype=float) + tp.b_shift) + 1j * tp.rho
        sech, _ = safe_sech_tanh(arg)
        values = 2.0 * tp.eps_R * sech**2
        return complex(values) if np.ndim(y) == 0 else values

    @staticmethod
    def transparent_wavefunction(tp: TransparentParams, ys: np.ndarray) -> GridFunction:
        """
        The single bound state sech[sqrt(-eps_R)(y + b) + i rho], i.e. the
        series-B ground state of the reduced well at x = 2 sqrt(-eps_R) y
        """
        ys = np.asarray(ys, dtype=float)
        sech, _ = safe_sech_tanh(math.sqrt(-tp.eps_R) * (ys + tp.b_shift) + 1j * tp.rho)
        return GridFunction.on_grid(ys, normalize(sech, float(ys[1] - ys[0])))

    # ------------------------------------------------------------------
    # Complexified Morse
    # ------------------------------------------------------------------

    @staticmethod
    def _check_morse(A: float, B_R: float) -> None:
        if not A > 0:
            raise ValueError(f"Morse parameter A must be positive, got {A}")
        if not B_R > 0:
            raise ValueError(f"Morse parameter B_R must be positive, got {B_R}")

    @staticmethod
    def morse_family(B_R: float, B_I: float) -> FamilySolution:
        return FamilySolution(kind=FamilyKind.III, b_R=B_R, b_I=B_I, sign=Sign.upper)

    def morse_complexified(
        self,
        A: float,
        B_R: float,
        B_I: float,
        cap: Optional[float] = None,
    ) -> Tuple[PotentialFn, List[float]]:
        """
        (B_R + i B_I)^2 e^-2x - (B_R + i B_I)(2A+1) e^-x and its spectrum
        -(A - n)^2, n < A, independent of B_I. Not PT-symmetric.

        `cap` clamps |V| (phase preserved) so that grids reaching far into
        the exponential wall stay finite.
        """
        self._check_morse(A, B_R)
        b = complex(B_R, B_I)

        def potential(xs):
            xs = np.asarray(xs, dtype=float)
            e1 = np.exp(-xs)
            values = b * b * e1 * e1 - b * (2.0 * A + 1.0) * e1
            if cap is not None:
                modulus = np.abs(values)
                over = modulus > cap
                if np.any(over):
                    logger.warning(
                        f"Morse potential clamped at |V| = {cap:g} on {int(np.sum(over))} node(s)"
                    )
                    values = np.where(over, values / np.where(over, modulus, 1.0) * cap, values)
            return values

        m = A + 0.5
        levels = [self.algebra.energy(m, n) for n in range(self.algebra.bound_state_count(m))]
        return potential, levels

    def morse_wavefunction(self, A: float, B_R: float, B_I: float, n: int, xs: np.ndarray) -> GridFunction:
        self._check_morse(A, B_R)
        return self.algebra.closed_form_state(self.morse_family(B_R, B_I), A + 0.5, n, xs)


def flag_coincident(levels: List[LevelRecord], tol: float) -> List[LevelRecord]:
    levels = sorted(levels, key=lambda level: (level.energy, level.series, level.n))
    flagged = []
    for i, level in enumerate(levels):
        coincident = any(
            other.series != level.series and abs(other.energy - level.energy) <= tol
            for j, other in enumerate(levels)
            if j != i
        )
        flagged.append(level.model_copy(update={'coincident': coincident}))
    return flagged


analytic_models = AnalyticModels()
