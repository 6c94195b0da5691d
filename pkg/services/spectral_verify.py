"""
Finite-difference verification of analytic spectra.

The Hamiltonian -d^2/dx^2 + V(x) with complex V is discretized on the
interior nodes of a Dirichlet grid, diagonalized densely with LAPACK's
general eigensolver and compared level by level with closed-form energies.
"""
import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.integrate import trapezoid
from scipy.sparse import diags

from models import (
    ComplexScalar,
    Discretization,
    GridFunction,
    SpectrumMatch,
    SpectrumReport,
    Tolerances,
    UnmatchedLevel,
)
from services.algebra_core import collinearity_defect
from utils.cache import SpectrumCache, spectrum_cache
from utils.errors import ConvergenceError, NonFinitePotentialError
from utils.finite_difference import INTERIOR_MARGIN, interior, second_derivative

logger = logging.getLogger(__name__)

PotentialFn = Callable[[np.ndarray], np.ndarray]

# Second-difference coefficients of -psi'' (divided by dx^2)
STENCILS = {
    3: ([-1.0, 2.0, -1.0], [-1, 0, 1]),
    5: ([1.0 / 12, -16.0 / 12, 30.0 / 12, -16.0 / 12, 1.0 / 12], [-2, -1, 0, 1, 2]),
}

BACKWARD_ERROR_LIMIT = 1e-10

# Gap reductions are not meaningful once both gaps sit at this level
CONVERGENCE_FLOOR = 1e-6


def kinetic_matrix(n_points: int, dx: float, stencil: int = 3):
    """Sparse -d^2/dx^2 on n_points interior nodes with Dirichlet ends omitted"""
    if stencil not in STENCILS:
        raise ValueError(f"stencil must be 3 or 5, got {stencil}")
    if dx <= 0:
        raise ValueError(f"dx must be positive, got {dx}")
    coefficients, offsets = STENCILS[stencil]
    return diags(
        [c / dx**2 for c in coefficients],
        offsets,
        shape=(n_points, n_points),
        dtype=complex,
    )


class SpectralVerifier:
    """Dense non-Hermitian eigensolution and spectrum matching"""

    def __init__(self, cache: SpectrumCache = spectrum_cache):
        self.cache = cache

    def build_hamiltonian(self, potential: PotentialFn, d: Discretization) -> np.ndarray:
        """
        Dense complex matrix of -d^2/dx^2 + V on the interior nodes

        Args:
            potential: Vectorized complex potential
            d: Grid and stencil

        Returns:
            n_points x n_points complex array (complex symmetric)

        Raises:
            NonFinitePotentialError: If V is inf/nan on any node
        """
        nodes = d.nodes
        values = np.broadcast_to(np.asarray(potential(nodes), dtype=complex), nodes.shape)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise NonFinitePotentialError(bad.tolist(), nodes[bad].tolist())

        hamiltonian = kinetic_matrix(d.n_points, d.dx, d.stencil) + diags(values, 0)
        logger.debug(
            f"Hamiltonian assembled: n={d.n_points}, dx={d.dx:.4g}, stencil={d.stencil}"
        )
        return hamiltonian.toarray()

    def eigen_nonhermitian(
        self,
        M: np.ndarray,
        vectors: bool = False,
        check: Optional[Sequence[int]] = None,
    ) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """
        All eigenvalues of a general complex matrix, sorted by (Re, Im)

        Args:
            M: Square matrix with finite entries
            vectors: Also return right eigenvectors (columns)
            check: Eigenpair indices (after sorting) whose backward error is
                verified; all of them when omitted

        Returns:
            (eigenvalues, eigenvectors or None)

        Raises:
            ConvergenceError: If LAPACK fails or an eigenpair misses the
                backward-error bound
        """
        M = np.asarray(M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"Matrix must be square, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("Matrix has non-finite entries")

        start = time.perf_counter()
        try:
            if vectors:
                w, v = linalg.eig(M, check_finite=False)
            else:
                w, v = linalg.eigvals(M, check_finite=False), None
        except linalg.LinAlgError as exc:
            logger.error(f"Eigensolver failed on {M.shape[0]}x{M.shape[0]} matrix: {exc}")
            raise ConvergenceError(f"Eigensolver did not converge: {exc}") from exc

        bad = np.flatnonzero(~np.isfinite(w))
        if bad.size:
            raise ConvergenceError(f"Eigenvalue {int(bad[0])} is not finite", index=int(bad[0]))

        order = np.lexsort((w.imag, w.real))
        w = w[order]
        if v is not None:
            v = v[:, order]
            self._check_backward_error(M, w, v, check)

        logger.info(
            f"Eigensolve finished: n={M.shape[0]}, vectors={vectors}, "
            f"{time.perf_counter() - start:.2f}s"
        )
        return w, v

    @staticmethod
    def _check_backward_error(
        M: np.ndarray,
        w: np.ndarray,
        v: np.ndarray,
        check: Optional[Sequence[int]],
    ) -> None:
        indices = np.arange(w.size) if check is None else np.asarray(check, dtype=int)
        if indices.size == 0:
            return
        norm_M = np.linalg.norm(M, 1)
        if norm_M == 0:
            return
        cols = v[:, indices]
        residual = np.linalg.norm(M @ cols - cols * w[indices], axis=0)
        errors = residual / (norm_M * np.linalg.norm(cols, axis=0))
        worst = int(np.argmax(errors))
        if errors[worst] > BACKWARD_ERROR_LIMIT:
            index = int(indices[worst])
            raise ConvergenceError(
                f"Eigenpair {index} has backward error {errors[worst]:.2e}", index=index
            )

    @staticmethod
    def trace_gap(M: np.ndarray, eigenvalues: np.ndarray) -> float:
        """|trace M - sum(eigenvalues)| relative to sum |eigenvalues|"""
        trace = np.trace(np.asarray(M, dtype=complex))
        scale = max(float(np.sum(np.abs(eigenvalues))), 1.0)
        return float(abs(trace - np.sum(eigenvalues)) / scale)

    @staticmethod
    def non_hermiticity(M: np.ndarray) -> float:
        """||M - M^H|| in the infinity norm"""
        M = np.asarray(M, dtype=complex)
        return float(np.max(np.sum(np.abs(M - M.conj().T), axis=1)))

    def match_spectrum(
        self,
        numeric: Sequence[complex],
        analytic: Sequence[float],
        e_tol: float = 1e-3,
        im_tol: float = 1e-6,
        labels: Optional[Sequence[str]] = None,
        crossing_tol: float = 1e-3,
        crossing_im_tol: float = 1e-3,
    ) -> SpectrumReport:
        """
        Pair analytic levels with numeric eigenvalues

        Pairs are taken globally in order of increasing |Re lambda - E| among
        eigenvalues with |Im| <= im_tol and |Re - E| <= e_tol; each eigenvalue
        is used at most once.

        Analytic levels within `crossing_tol` of each other form a coincident
        group. The discretized operator splits such a level into a complex
        pair whose imaginary parts scale like the square root of the
        discretization error, so a group left without a match is paired with
        the closest eigenvalue having |Im| <= crossing_im_tol; the rest of
        that cluster is consumed. Its other members, like any unmatched level
        coinciding with a matched one, are reported as a crossing collapse.

        Unused near-real eigenvalues with Re < -e_tol are spurious; those
        above belong to the discretized continuum. `max_imag` covers the
        ordinary matches and `crossing_imag` the cluster matches.
        """
        if min(e_tol, im_tol, crossing_tol, crossing_im_tol) <= 0:
            raise ValueError(
                f"Tolerances must be positive, got e_tol={e_tol}, im_tol={im_tol}, "
                f"crossing_tol={crossing_tol}, crossing_im_tol={crossing_im_tol}"
            )
        numeric = np.asarray(numeric, dtype=complex)
        analytic = [float(e) for e in analytic]
        if labels is not None and len(labels) != len(analytic):
            raise ValueError("labels must have one entry per analytic level")

        near_real = np.abs(numeric.imag) <= im_tol
        candidates = sorted(
            (abs(numeric[j].real - energy), i, j)
            for i, energy in enumerate(analytic)
            for j in np.flatnonzero(near_real & (np.abs(numeric.real - energy) <= e_tol))
        )
        assigned: Dict[int, int] = {}
        used = set()
        for gap, i, j in candidates:
            if i in assigned or j in used:
                continue
            assigned[i] = int(j)
            used.add(int(j))

        def coincident(i):
            return [k for k, energy in enumerate(analytic) if abs(energy - analytic[i]) <= crossing_tol]

        crossing = set()
        for i, energy in enumerate(analytic):
            group = coincident(i)
            if len(group) < 2 or any(k in assigned for k in group):
                continue
            cluster = [
                int(j) for j in np.flatnonzero(
                    (np.abs(numeric.imag) <= crossing_im_tol) & (np.abs(numeric.real - energy) <= e_tol)
                )
                if int(j) not in used
            ]
            if not cluster:
                continue
            nearest = min(cluster, key=lambda j: abs(numeric[j] - energy))
            assigned[i] = nearest
            crossing.add(i)
            used.update(cluster)
            logger.info(
                f"Coincident levels at {energy:.6g} matched to a cluster of {len(cluster)} eigenvalue(s)"
            )

        def label(i):
            return None if labels is None else labels[i]

        matches, unmatched = [], []
        for i, energy in enumerate(analytic):
            if i in assigned:
                value = numeric[assigned[i]]
                matches.append(SpectrumMatch(
                    analytic=energy,
                    numeric=ComplexScalar.from_complex(value),
                    gap=abs(value - energy),
                    label=label(i),
                    crossing=i in crossing,
                ))
                logger.debug(f"Level {energy:.6g} matched to {value:.8g}")
                continue
            collapsed = any(k in assigned for k in coincident(i) if k != i)
            reason = "crossing_collapse" if collapsed else "no_eigenvalue"
            unmatched.append(UnmatchedLevel(analytic=energy, label=label(i), reason=reason))
            logger.warning(f"Level {energy:.6g} unmatched ({reason})")

        spurious = sorted(
            (numeric[j] for j in np.flatnonzero(near_real & (numeric.real < -e_tol)) if int(j) not in used),
            key=lambda z: (z.real, z.imag),
        )
        if spurious:
            logger.warning(f"{len(spurious)} spurious near-real eigenvalue(s) below -{e_tol:g}")

        return SpectrumReport(
            matches=matches,
            unmatched_analytic=unmatched,
            spurious_numeric=[ComplexScalar.from_complex(z) for z in spurious],
            max_imag=max((abs(m.numeric.im) for m in matches if not m.crossing), default=0.0),
            crossing_imag=max((abs(m.numeric.im) for m in matches if m.crossing), default=0.0),
        )

    @staticmethod
    def count_bound_states(eigenvalues: Sequence[complex], e_tol: float, im_tol: float) -> int:
        """Near-real eigenvalues with Re < -e_tol"""
        w = np.asarray(eigenvalues, dtype=complex)
        return int(np.sum((np.abs(w.imag) <= im_tol) & (w.real < -e_tol)))

    @staticmethod
    def norm_integral(psi: GridFunction) -> float:
        return float(trapezoid(np.abs(psi.values) ** 2, dx=psi.dx))

    @staticmethod
    def schrodinger_residual(potential: PotentialFn, psi: GridFunction, E: float) -> float:
        """
        max |-psi'' + V psi - E psi| / max|psi| over interior nodes

        Raises:
            GridTooShortError: If psi has fewer than 6 samples
        """
        d2 = second_derivative(psi.values, psi.dx)
        V = np.asarray(potential(psi.xs), dtype=complex)
        residual = -d2 + (V - E) * psi.values
        scale = float(np.max(np.abs(psi.values)))
        if scale == 0:
            raise ValueError("Wavefunction vanishes identically")
        return float(np.max(np.abs(interior(residual, INTERIOR_MARGIN))) / scale)

    def solve_spectrum(
        self,
        potential: PotentialFn,
        d: Discretization,
        key: Optional[dict] = None,
        vectors: bool = False,
    ) -> Tuple[np.ndarray, Optional[np.ndarray], Dict[str, float]]:
        """
        Build and diagonalize the Hamiltonian, reusing cached results

        The matrix itself is discarded after the solve; only its trace gap
        and non-Hermiticity are kept.

        Args:
            potential: Vectorized complex potential
            d: Grid and stencil
            key: Model parameters identifying the potential; results are
                cached only when given
            vectors: Also compute eigenvectors

        Returns:
            (eigenvalues, eigenvectors or None,
             {"trace_gap": ..., "non_hermiticity": ...})
        """
        cache_key = None
        if key is not None:
            cache_key = self.cache.generate_key(
                "spectrum", {"model": key, "grid": d.model_dump(), "vectors": vectors}
            )
            cached = self.cache.get(cache_key)
            if cached is not None:
                logger.debug(f"Spectrum cache hit for {key}")
                return cached

        M = self.build_hamiltonian(potential, d)
        w, v = self.eigen_nonhermitian(M, vectors=vectors)
        matrix_diagnostics = {
            "trace_gap": self.trace_gap(M, w),
            "non_hermiticity": self.non_hermiticity(M),
        }
        result = (w, v, matrix_diagnostics)
        if cache_key is not None:
            self.cache.set(cache_key, result)
            logger.debug(f"Spectrum cache stats: {self.cache.stats()}")
        return result

    def verify_levels(
        self,
        potential: PotentialFn,
        analytic: Sequence[float],
        d: Discretization,
        tolerances: Tolerances = Tolerances(),
        labels: Optional[Sequence[str]] = None,
        key: Optional[dict] = None,
    ) -> Tuple[SpectrumReport, Dict[str, Any]]:
        """
        Full pipeline: discretize, diagonalize, match, and collect diagnostics

        When coincident levels were matched through a cluster, the spectrum is
        solved again with eigenvectors and the cluster near each such level is
        split by eigenvector collinearity.

        Returns:
            (report, diagnostics with non_hermiticity, trace_gap,
             numeric_bound_states and, for coincident levels,
             crossing_clusters: {energy label: number of eigenspace clusters})
        """
        w, _, diagnostics = self.solve_spectrum(potential, d, key=key)
        report = self.match_spectrum(
            w, analytic, tolerances.e_tol, tolerances.im_tol, labels,
            crossing_tol=tolerances.crossing_tol, crossing_im_tol=tolerances.crossing_im_tol,
        )
        diagnostics = {
            **diagnostics,
            "numeric_bound_states": self.count_bound_states(
                w, tolerances.e_tol, tolerances.crossing_im_tol
            ),
        }
        if report.crossing_matches:
            w_v, v, _ = self.solve_spectrum(potential, d, key=key, vectors=True)
            diagnostics["crossing_clusters"] = {
                f"{match.analytic:.6g}": len(self.eigenspace_clusters(w_v, v, match.analytic, tolerances.e_tol))
                for match in report.crossing_matches
            }
        logger.info(
            f"Matched {len(report.matches)}/{len(analytic)} levels, "
            f"max gap {report.max_gap:.2e}, max |Im| {report.max_imag:.2e}"
        )
        return report, diagnostics

    @staticmethod
    def eigenspace_clusters(
        eigenvalues: np.ndarray,
        vectors: np.ndarray,
        center: complex,
        window: float,
        collinear_tol: float = 1e-2,
    ) -> List[List[complex]]:
        """
        Group eigenvalues within `window` of `center` by eigenvector collinearity

        A single cluster means the numeric eigenvectors near `center` span one
        direction, i.e. no two-dimensional eigenspace.
        """
        clusters: List[Tuple[np.ndarray, List[complex]]] = []
        for j in np.flatnonzero(np.abs(np.asarray(eigenvalues) - center) <= window):
            vector = vectors[:, j]
            for representative, members in clusters:
                if collinearity_defect(representative, vector) < collinear_tol:
                    members.append(complex(eigenvalues[j]))
                    break
            else:
                clusters.append((vector, [complex(eigenvalues[j])]))
        return [members for _, members in clusters]

    def convergence_study(
        self,
        potential: PotentialFn,
        analytic: Sequence[float],
        d: Discretization,
        levels: int = 2,
        halvings: int = 1,
        tolerances: Tolerances = Tolerances(),
    ) -> Dict[str, list]:
        """
        Max gap of the lowest `levels` analytic energies under repeated
        halving of dx

        Returns:
            {"dx": [...], "max_gap": [...], "ratios": [...], "converged": bool}
        """
        targets = sorted(float(e) for e in analytic)[:levels]
        dxs, gaps = [], []
        grid = d
        for _ in range(halvings + 1):
            w, _, _ = self.solve_spectrum(potential, grid)
            report = self.match_spectrum(w, targets, tolerances.e_tol, tolerances.im_tol)
            if not report.all_matched:
                raise ConvergenceError(
                    f"Grid with n={grid.n_points} misses analytic levels "
                    f"{[u.analytic for u in report.unmatched_analytic]}"
                )
            dxs.append(grid.dx)
            gaps.append(report.max_gap)
            grid = grid.refined()

        ratios = [coarse / fine if fine > 0 else float("inf") for coarse, fine in zip(gaps, gaps[1:])]
        converged = all(
            ratio >= 3.0 or fine < CONVERGENCE_FLOOR
            for ratio, fine in zip(ratios, gaps[1:])
        )
        logger.info(f"Convergence study: gaps {gaps}, ratios {ratios}")
        return {"dx": dxs, "max_gap": gaps, "ratios": ratios, "converged": converged}


spectral_verifier = SpectralVerifier()
