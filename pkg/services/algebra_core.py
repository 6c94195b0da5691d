"""
sl(2,C) potential algebra: the three (F, G) families, their potentials V_m,
reduced ladder and Casimir operators on grid functions, analytic energies
and closed-form bound states.

All operators act on the fixed-m sector, i.e. on e^{i m phi} states with the
phi dependence stripped (i d/dphi -> -m):

    A+(m) = +d/dx + (-m - 1/2) F + G      raises m -> m + 1
    A-(m) = -d/dx + (-m + 1/2) F + G      lowers m -> m - 1
    C(m)  = d^2/dx^2 - V_m - 1/4          reduced Casimir
"""
import logging
import math
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from models import AlgebraState, CheckResult, FamilyKind, FamilySolution, GridFunction, Sign
from utils.errors import (
    NonNormalizableError,
    NotABoundStateError,
    PoleError,
)
from utils.finite_difference import (
    INTERIOR_MARGIN,
    first_derivative,
    interior,
    require_points,
    second_derivative,
)
from utils.special_functions import (
    gudermannian_path,
    jacobi_poly,
    laguerre_poly,
    log_cosh_path,
    log_sinh_path,
    safe_cosech_coth,
    safe_sech_tanh,
)

logger = logging.getLogger(__name__)

# Family II with gamma = 0 is singular at x = c
POLE_RADIUS = 1e-8

# Bound-state condition n < m - 1/2 is applied with this slack
BOUND_SLACK = 1e-9

# Closer poles are resolved as if they sat at this distance
POLE_DISTANCE_FLOOR = 0.05

# Spacing of the operator-identity grid away from complex poles
IDENTITY_DX = 0.005

Direction = Literal["raise", "lower"]
PotentialFn = Callable[[np.ndarray], np.ndarray]


def normalize(values: np.ndarray, dx: float) -> np.ndarray:
    """
    Scale to unit trapezoid L2 norm and rotate the largest-modulus sample
    onto the positive real axis.
    """
    v = np.asarray(values, dtype=complex)
    norm = math.sqrt(trapezoid(np.abs(v) ** 2, dx=dx))
    if norm == 0 or not math.isfinite(norm):
        raise ValueError("Cannot normalize a zero or non-finite grid function")
    v = v / norm
    peak = v[np.argmax(np.abs(v))]
    return v * (abs(peak) / peak)


def collinearity_defect(first: np.ndarray, second: np.ndarray) -> float:
    """1 - |<a, b>| / (|a| |b|) with the plain (unweighted) inner product"""
    a = np.asarray(first, dtype=complex)
    b = np.asarray(second, dtype=complex)
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    if denom == 0:
        raise ValueError("Collinearity of a zero vector is undefined")
    return float(max(0.0, 1.0 - abs(np.vdot(a, b)) / denom))


def pole_distance(fam: FamilySolution) -> float:
    """
    Distance from the real axis to the nearest complex pole of F and G

    Family I has poles at x = c + i(gamma + pi/2 + k pi), family II at
    x = c + i(gamma + k pi). The real pole of family II at gamma = 0 is kept
    off every grid by a wall, so it does not count; family III is entire.
    """
    if fam.kind == FamilyKind.III or (fam.kind == FamilyKind.II and fam.gamma == 0):
        return math.inf
    shift = fam.gamma + (0.5 * math.pi if fam.kind == FamilyKind.I else 0.0)
    return abs(math.remainder(shift, math.pi))


def pole_resolved_dx(distance: float, base: float) -> float:
    """
    Grid spacing that resolves a pole at `distance` from the real axis

    Fourth-order differences of a function with a pole at distance d err
    like dx^4 / d^6, so the spacing shrinks as d^1.5 below unit distance.
    """
    if distance < POLE_DISTANCE_FLOOR:
        logger.warning(
            f"Complex pole at distance {distance:.3g} from the real axis; "
            f"grid spacing capped at the value for {POLE_DISTANCE_FLOOR:g}"
        )
        distance = POLE_DISTANCE_FLOOR
    return base * min(1.0, distance) ** 1.5


def _relative_gap(lhs: np.ndarray, rhs: np.ndarray, scale: np.ndarray, margin: int) -> float:
    top = np.max(np.abs(interior(scale, margin)))
    return float(np.max(np.abs(interior(lhs - rhs, margin))) / top)


class PotentialAlgebra:
    """Operations of the sl(2,C) potential algebra on the real line"""

    def __init__(self, pole_radius: float = POLE_RADIUS):
        self.pole_radius = pole_radius

    # ------------------------------------------------------------------
    # Families and potentials
    # ------------------------------------------------------------------

    def _xi(self, fam: FamilySolution, x) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        if fam.kind == FamilyKind.II and fam.gamma == 0:
            close = np.abs(xs - fam.c) < self.pole_radius
            if np.any(close):
                where = float(np.atleast_1d(xs)[np.flatnonzero(np.atleast_1d(close))[0]])
                raise PoleError(
                    f"Family II with gamma = 0 is singular at x = c = {fam.c}; "
                    f"got x = {where}",
                    location=complex(where),
                )
        return xs - fam.shift

    def _fg_with_derivatives(self, fam: FamilySolution, x):
        """F, G, F', G' as complex arrays"""
        if fam.kind == FamilyKind.I:
            sech, tanh = safe_sech_tanh(self._xi(fam, x))
            return tanh, fam.b * sech, sech**2, -fam.b * sech * tanh
        if fam.kind == FamilyKind.II:
            cosech, coth = safe_cosech_coth(self._xi(fam, x))
            return coth, fam.b * cosech, -(cosech**2), -fam.b * cosech * coth

        xs = np.asarray(x, dtype=float)
        s = 1.0 if fam.sign == Sign.upper else -1.0
        expo = fam.b * np.exp(-s * xs)
        ones = np.full(xs.shape, s, dtype=complex)
        return ones, expo, np.zeros(xs.shape, dtype=complex), -s * expo

    def eval_FG(self, fam: FamilySolution, x) -> Tuple[np.ndarray, np.ndarray]:
        """
        Evaluate the family functions F and G

        Args:
            fam: Family solution
            x: Real point or grid

        Returns:
            Tuple (F(x), G(x))

        Raises:
            PoleError: Family II with gamma = 0 evaluated at x = c
        """
        F, G, _, _ = self._fg_with_derivatives(fam, x)
        return _scalar_or_array(F, x), _scalar_or_array(G, x)

    def ode_residual(
        self,
        fam: FamilySolution,
        xs: np.ndarray,
        mode: Literal["analytic", "fd"] = "analytic",
    ) -> Tuple[float, float]:
        """
        Residuals of F' = 1 - F^2 and G' = -F G on a grid

        Args:
            fam: Family solution
            xs: Uniform grid
            mode: 'analytic' uses closed-form derivatives, 'fd' the
                fourth-order stencil (edges excluded)

        Returns:
            Tuple (max |F' - 1 + F^2|, max |G' + F G|)
        """
        xs = np.asarray(xs, dtype=float)
        F, G, dF, dG = self._fg_with_derivatives(fam, xs)
        if mode == "fd":
            dx = float(xs[1] - xs[0])
            dF = first_derivative(F, dx)
            dG = first_derivative(G, dx)
            F, G, dF, dG = (interior(v) for v in (F, G, dF, dG))
        r_f = float(np.max(np.abs(dF - 1.0 + F**2)))
        r_g = float(np.max(np.abs(dG + F * G)))
        return r_f, r_g

    def potential(self, fam: FamilySolution, m: float, x):
        """V_m = (1/4 - m^2) F' + 2m G' + G^2"""
        _, G, dF, dG = self._fg_with_derivatives(fam, x)
        values = (0.25 - m * m) * dF + 2.0 * m * dG + G**2
        return _scalar_or_array(values, x)

    def potential_fn(self, fam: FamilySolution, m: float) -> PotentialFn:
        return lambda xs: np.asarray(self.potential(fam, m, np.asarray(xs, dtype=float)), dtype=complex)

    def potential_cartesian(self, fam: FamilySolution, m: float, x) -> Tuple[np.ndarray, np.ndarray]:
        """
        Real and imaginary parts of V_m from the separated closed forms

        These are written out term by term in cosh 2(x-c), cos 2gamma
        combinations and are checked against potential().
        """
        xs = np.asarray(x, dtype=float)
        bR, bI, g = fam.b_R, fam.b_I, fam.gamma

        if fam.kind == FamilyKind.III:
            s = 1.0 if fam.sign == Sign.upper else -1.0
            e1 = np.exp(-s * xs)
            e2 = np.exp(-2.0 * s * xs)
            re = (bR**2 - bI**2) * e2 - s * 2.0 * m * bR * e1
            im = bI * (2.0 * bR * e2 - s * 2.0 * m * e1)
            return _real_scalar_or_array(re, x), _real_scalar_or_array(im, x)

        self._xi(fam, xs)
        u = xs - fam.c
        ch2, sh2 = np.cosh(2.0 * u), np.sinh(2.0 * u)
        ch, sh = np.cosh(u), np.sinh(u)
        c2g, s2g = math.cos(2.0 * g), math.sin(2.0 * g)
        cg, sg = math.cos(g), math.sin(g)

        if fam.kind == FamilyKind.I:
            coeff = bR**2 - bI**2 - m**2 + 0.25
            denom = ch2 + c2g
            if np.any(np.abs(denom) < 1e-300):
                raise PoleError("Family I potential evaluated at a pole")
            pref = 2.0 / denom**2
            re = pref * (
                coeff * (1.0 + ch2 * c2g)
                - 2.0 * bR * bI * sh2 * s2g
                - 2.0 * m * (
                    bR * sh * cg * (ch2 - c2g + 2.0)
                    - bI * ch * sg * (ch2 - c2g - 2.0)
                )
            )
            im = pref * (
                coeff * sh2 * s2g
                + 2.0 * bR * bI * (1.0 + ch2 * c2g)
                - 2.0 * m * (
                    bR * ch * sg * (ch2 - c2g - 2.0)
                    + bI * sh * cg * (ch2 - c2g + 2.0)
                )
            )
        else:
            coeff = bR**2 - bI**2 + m**2 - 0.25
            denom = ch2 - c2g
            if np.any(np.abs(denom) < 1e-300):
                raise PoleError("Family II potential evaluated at a pole")
            pref = 2.0 / denom**2
            re = pref * (
                coeff * (-1.0 + ch2 * c2g)
                - 2.0 * bR * bI * sh2 * s2g
                - 2.0 * m * (
                    bR * ch * cg * (ch2 + c2g - 2.0)
                    - bI * sh * sg * (ch2 + c2g + 2.0)
                )
            )
            im = pref * (
                coeff * sh2 * s2g
                + 2.0 * bR * bI * (-1.0 + ch2 * c2g)
                - 2.0 * m * (
                    bR * sh * sg * (ch2 + c2g + 2.0)
                    + bI * ch * cg * (ch2 + c2g - 2.0)
                )
            )
        return _real_scalar_or_array(re, x), _real_scalar_or_array(im, x)

    @staticmethod
    def expected_pt_symmetric(fam: FamilySolution) -> bool:
        """
        Analytic PT classification of V_m for real m

        I needs c = 0 and b imaginary, II needs c = 0 and b real; the
        exponential family is never PT-symmetric for b != 0.
        """
        if fam.kind == FamilyKind.I:
            return fam.c == 0 and fam.b_R == 0
        if fam.kind == FamilyKind.II:
            return fam.c == 0 and fam.b_I == 0
        return fam.b == 0

    def pt_symmetry_check(self, potential: PotentialFn, xs: np.ndarray) -> float:
        """max |conj V(-x) - V(x)| over the grid"""
        xs = np.asarray(xs, dtype=float)
        forward = np.asarray(potential(xs), dtype=complex)
        mirrored = np.asarray(potential(-xs), dtype=complex)
        return float(np.max(np.abs(np.conj(mirrored) - forward)))

    # ------------------------------------------------------------------
    # Spectrum bookkeeping
    # ------------------------------------------------------------------

    @staticmethod
    def energy(m: float, n: int) -> float:
        """E = -(m - n - 1/2)^2 for a bound state n < m - 1/2"""
        if int(n) != n or n < 0:
            raise ValueError(f"n must be a nonnegative integer, got {n}")
        if not n < m - 0.5 - BOUND_SLACK:
            raise NotABoundStateError(f"n={n} is not a bound state of V_m with m={m} (needs n < m - 1/2)")
        return -((m - n - 0.5) ** 2)

    @staticmethod
    def bound_state_count(m: float) -> int:
        """Number of integers n >= 0 with n < m - 1/2"""
        return max(0, math.ceil(m - 0.5 - BOUND_SLACK))

    def decay_violations(
        self,
        fam: FamilySolution,
        m: float,
        n: int,
        half_line: Optional[bool] = None,
    ) -> List[str]:
        """
        Every normalizability condition the state (m, n) of `fam` breaks

        `half_line` defaults to True exactly for family II with gamma = 0,
        where the state must also vanish at the singular point x = c.
        """
        if half_line is None:
            half_line = fam.kind == FamilyKind.II and fam.gamma == 0
        violations = []
        if not n < m - 0.5 - BOUND_SLACK:
            violations.append(f"n < m - 1/2 fails (n={n}, m={m})")
        if fam.kind == FamilyKind.II and half_line and not fam.b_R + 0.5 - m > 0:
            violations.append(
                f"half-line state must vanish at x = c: Re b + 1/2 - m = {fam.b_R + 0.5 - m} <= 0"
            )
        if fam.kind == FamilyKind.III:
            if fam.sign == Sign.upper and not fam.b_R > 0:
                violations.append(f"upper exponential family needs Re b > 0, got {fam.b_R}")
            if fam.sign == Sign.lower and not fam.b_R < 0:
                violations.append(f"lower exponential family needs Re b < 0, got {fam.b_R}")
        return violations

    def companion_solution(self, fam: FamilySolution, m: float) -> Optional[Tuple[float, FamilySolution]]:
        """
        Second weight/coupling pair giving the same V_m, when it is real

        Family I: (m', b') = (i b, -i m), real when b is imaginary.
        Family II: (m', b') = (b, m), real when b is real.
        """
        if fam.kind == FamilyKind.I and abs(fam.b_R) < 1e-12:
            m_other = -fam.b_I
            if m_other > 0:
                return m_other, fam.model_copy(update={'b_R': 0.0, 'b_I': -m})
        if fam.kind == FamilyKind.II and abs(fam.b_I) < 1e-12 and fam.b_R > 0:
            return fam.b_R, fam.model_copy(update={'b_R': m, 'b_I': 0.0})
        return None

    # ------------------------------------------------------------------
    # States
    # ------------------------------------------------------------------

    def _annihilated_log(self, fam: FamilySolution, k: float, xs: np.ndarray) -> np.ndarray:
        """log of the solution of psi' = [(1/2 - k) F + G] psi"""
        if fam.kind == FamilyKind.I:
            xi = self._xi(fam, xs)
            return (0.5 - k) * log_cosh_path(xi) + fam.b * gudermannian_path(xs - fam.c, -fam.gamma)
        if fam.kind == FamilyKind.II:
            xi = self._xi(fam, xs)
            log_tanh_half = log_sinh_path(xi / 2.0) - log_cosh_path(xi / 2.0)
            return (0.5 - k) * log_sinh_path(xi) + fam.b * log_tanh_half
        if fam.sign == Sign.upper:
            return (0.5 - k) * xs - fam.b * np.exp(-xs)
        return -(0.5 - k) * xs + fam.b * np.exp(xs)

    def _require_normalizable(self, fam: FamilySolution, m: float, n: int) -> None:
        violations = self.decay_violations(fam, m, n)
        if violations:
            raise NonNormalizableError(violations)

    def ground_state(self, fam: FamilySolution, k: float, xs: np.ndarray) -> GridFunction:
        """
        Lowest-weight state psi_kk, annihilated by A-(k)

        Args:
            fam: Family solution
            k: Lowest weight
            xs: Uniform real grid

        Returns:
            Unit-norm GridFunction with fixed global phase

        Raises:
            NonNormalizableError: If psi_kk does not decay on its domain
        """
        self._require_normalizable(fam, k, 0)
        xs = np.asarray(xs, dtype=float)
        return self._from_log(xs, self._annihilated_log(fam, k, xs))

    def closed_form_state(
        self,
        fam: FamilySolution,
        m: float,
        n: int,
        xs: np.ndarray,
        check: bool = True,
    ) -> GridFunction:
        """
        Analytic bound state n of V_m (energy -(m - n - 1/2)^2)

        I:   (cosh xi)^(1/2-m) exp(b gd xi) P_n^(ib-m, -ib-m)(i sinh xi)
        II:  (sinh xi)^(1/2-m) tanh(xi/2)^b P_n^(b-m, -b-m)(cosh xi)
        III: exp((1/2-m+n)x - b e^-x) L_n^(2m-2n-1)(2b e^-x), mirrored for
             the lower sign

        `check=False` skips the normalizability guard (used to inspect the
        first non-normalizable index).
        """
        if check:
            self._require_normalizable(fam, m, n)
        xs = np.asarray(xs, dtype=float)

        if fam.kind == FamilyKind.III:
            s = 1.0 if fam.sign == Sign.upper else -1.0
            b = fam.b * s
            t = s * xs
            log_values = (0.5 - m + n) * t - b * np.exp(-t)
            poly = laguerre_poly(n, 2.0 * m - 2.0 * n - 1.0, 2.0 * b * np.exp(-t))
            return self._from_log(xs, log_values, poly)

        xi = self._xi(fam, xs)
        log_values = self._annihilated_log(fam, m, xs)
        if n == 0:
            return self._from_log(xs, log_values)
        if fam.kind == FamilyKind.I:
            ib = 1j * fam.b
            poly = jacobi_poly(n, ib - m, -ib - m, 1j * np.sinh(xi))
        else:
            poly = jacobi_poly(n, fam.b - m, -fam.b - m, np.cosh(xi))
        return self._from_log(xs, log_values, poly)

    @staticmethod
    def _from_log(xs: np.ndarray, log_values: np.ndarray, factor=None) -> GridFunction:
        log_values = np.asarray(log_values, dtype=complex)
        values = np.exp(log_values - np.max(log_values.real))
        if factor is not None:
            values = values * factor
        dx = float(xs[1] - xs[0])
        return GridFunction.on_grid(xs, normalize(values, dx))

    # ------------------------------------------------------------------
    # Operators
    # ------------------------------------------------------------------

    def apply_ladder(
        self,
        fam: FamilySolution,
        m: float,
        direction: Direction,
        psi: GridFunction,
    ) -> GridFunction:
        """
        Apply A+(m) (raise) or A-(m) (lower) with fourth-order derivatives

        Raises:
            GridTooShortError: If psi has fewer than 5 samples
        """
        xs = psi.xs
        F, G = self.eval_FG(fam, xs)
        d = first_derivative(psi.values, psi.dx)
        if direction == "raise":
            out = d + ((-m - 0.5) * F + G) * psi.values
        elif direction == "lower":
            out = -d + ((-m + 0.5) * F + G) * psi.values
        else:
            raise ValueError(f"direction must be 'raise' or 'lower', got {direction!r}")
        return psi.with_values(out)

    def casimir_apply(self, fam: FamilySolution, m: float, psi: GridFunction) -> GridFunction:
        """Reduced Casimir psi'' + (m^2 - 1/4)F'psi - 2m G'psi - G^2 psi - psi/4"""
        require_points(psi.values.size, 6, "Casimir stencil")
        potential = self.potential(fam, m, psi.xs)
        d2 = second_derivative(psi.values, psi.dx)
        return psi.with_values(d2 - potential * psi.values - 0.25 * psi.values)

    def ladder_chain(self, fam: FamilySolution, state: AlgebraState, xs: np.ndarray) -> GridFunction:
        """psi_km built from psi_kk by repeated raising, renormalized at each step"""
        self._require_normalizable(fam, state.m, state.n)
        psi = self.ground_state(fam, state.k, xs)
        for step in range(state.n):
            raised = self.apply_ladder(fam, state.k + step, "raise", psi)
            psi = raised.with_values(normalize(raised.values, raised.dx))
        logger.debug(f"Ladder chain reached m={state.m} after {state.n} raising steps")
        return psi

    def ladder_factor(
        self,
        fam: FamilySolution,
        m: float,
        psi_m: GridFunction,
        psi_next: GridFunction,
    ) -> complex:
        """Least-squares alpha in A+(m) psi_m ~= alpha psi_{m+1} over interior nodes"""
        raised = interior(self.apply_ladder(fam, m, "raise", psi_m).values)
        target = interior(psi_next.values)
        return complex(np.vdot(target, raised) / np.vdot(target, target))

    def ladder_check(
        self,
        fam: FamilySolution,
        state: AlgebraState,
        xs: np.ndarray,
        tol: float = 1e-8,
    ) -> Tuple[complex, CheckResult]:
        """
        Raise the closed-form psi_km to m + 1 and compare with psi_k,m+1

        Returns:
            (alpha_km, check that A+(m) psi_km is collinear with psi_k,m+1)

        Raises:
            NonNormalizableError: If either state is not admissible
        """
        psi_m = self.closed_form_state(fam, state.m, state.n, xs)
        psi_next = self.closed_form_state(fam, state.m + 1.0, state.n + 1, xs)
        alpha = self.ladder_factor(fam, state.m, psi_m, psi_next)
        defect = collinearity_defect(
            interior(self.apply_ladder(fam, state.m, "raise", psi_m).values),
            interior(psi_next.values),
        )
        return alpha, CheckResult(
            name=f"ladder_collinear[k={state.k:g},m={state.m:g}]",
            passed=bool(defect < tol),
            detail=f"alpha = {alpha:.6g}, collinearity defect {defect:.3e}",
        )

    # ------------------------------------------------------------------
    # Operator identities
    # ------------------------------------------------------------------

    def _default_test_grid(self, fam: FamilySolution) -> np.ndarray:
        """[center - 4, center + 4] with spacing tied to the nearest complex pole"""
        center = fam.c
        if fam.kind == FamilyKind.II and fam.gamma == 0:
            center = fam.c + 5.0
        dx = pole_resolved_dx(pole_distance(fam), IDENTITY_DX)
        return center + np.linspace(-4.0, 4.0, int(math.ceil(8.0 / dx)) + 1)

    @staticmethod
    def random_test_function(rng: np.random.Generator, xs: np.ndarray) -> np.ndarray:
        """Gaussian-windowed sum of three low-frequency complex cosines"""
        center = 0.5 * (xs[0] + xs[-1]) + rng.uniform(-0.5, 0.5)
        width = rng.uniform(0.7, 1.0)
        envelope = np.exp(-((xs - center) ** 2) / (2.0 * width**2))
        waves = sum(
            complex(rng.normal(), rng.normal()) * np.cos(rng.uniform(0.0, 2.0) * xs + rng.uniform(0, 2 * np.pi))
            for _ in range(3)
        )
        return envelope * waves

    def operator_identity_suite(
        self,
        fam: FamilySolution,
        m: float,
        rng: np.random.Generator,
        count: int = 20,
        xs: Optional[np.ndarray] = None,
        tol: float = 1e-6,
    ) -> List[CheckResult]:
        """
        Commutator and Casimir identities on random smooth test functions

        Checks, as operators on the fixed-m sector:
            A+(m-1)A-(m) - A-(m+1)A+(m) = -2m
            m^2 - m - A+(m-1)A-(m) = m^2 + m - A-(m+1)A+(m) = C(m)
        """
        grid = self._default_test_grid(fam) if xs is None else np.asarray(xs, dtype=float)
        margin = 2 * INTERIOR_MARGIN
        worst = {"commutator": 0.0, "casimir_forms": 0.0, "casimir_direct": 0.0}

        for _ in range(count):
            values = self.random_test_function(rng, grid)
            psi = GridFunction.on_grid(grid, values)
            down_up = self.apply_ladder(
                fam, m - 1, "raise", self.apply_ladder(fam, m, "lower", psi)
            ).values
            up_down = self.apply_ladder(
                fam, m + 1, "lower", self.apply_ladder(fam, m, "raise", psi)
            ).values

            commutator = down_up - up_down
            form_lower = (m * m - m) * values - down_up
            form_upper = (m * m + m) * values - up_down
            direct = self.casimir_apply(fam, m, psi).values

            worst["commutator"] = max(
                worst["commutator"], _relative_gap(commutator, -2.0 * m * values, values, margin)
            )
            worst["casimir_forms"] = max(
                worst["casimir_forms"], _relative_gap(form_lower, form_upper, form_lower, margin)
            )
            worst["casimir_direct"] = max(
                worst["casimir_direct"], _relative_gap(form_lower, direct, form_lower, margin)
            )

        results = [
            CheckResult(
                name=f"{name}[{fam.kind.value}]",
                passed=bool(gap < tol),
                detail=f"max relative deviation {gap:.3e} over {count} test functions (tol {tol:g})",
            )
            for name, gap in worst.items()
        ]
        logger.info(
            f"Operator identities for family {fam.kind.value} at m={m}: "
            f"{sum(r.passed for r in results)}/{len(results)} passed"
        )
        return results

    def casimir_eigen_check(
        self,
        fam: FamilySolution,
        state: AlgebraState,
        xs: np.ndarray,
        tol: float = 1e-6,
    ) -> CheckResult:
        """C(m) psi_km = k(k-1) psi_km on the closed-form state"""
        psi = self.closed_form_state(fam, state.m, state.n, xs)
        applied = self.casimir_apply(fam, state.m, psi).values
        expected = state.k * (state.k - 1.0) * psi.values
        gap = _relative_gap(applied, expected, psi.values, INTERIOR_MARGIN)
        return CheckResult(
            name=f"casimir_eigenvalue[k={state.k:g},m={state.m:g}]",
            passed=bool(gap < tol),
            detail=f"max |C psi - k(k-1) psi| / max|psi| = {gap:.3e}",
        )


def _scalar_or_array(values, original):
    if np.ndim(original) == 0:
        return complex(np.asarray(values).reshape(()))
    return values


def _real_scalar_or_array(values, original):
    if np.ndim(original) == 0:
        return float(np.asarray(values).reshape(()))
    return np.asarray(values, dtype=float)


algebra_service = PotentialAlgebra()
