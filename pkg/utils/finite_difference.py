"""
Fourth-order finite-difference derivatives on uniform grids.

Interior nodes use central stencils; the first two and last two nodes use
one-sided fourth-order stencils so the output has the input's length.
Residual checks should still skip the edge nodes (see `INTERIOR_MARGIN`).
"""
import logging

import numpy as np

from utils.errors import GridTooShortError

logger = logging.getLogger(__name__)

# Nodes at each edge excluded from residual assertions
INTERIOR_MARGIN = 2

_D1_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D1_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_D1_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0

_D2_CENTRAL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_D2_EDGE0 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
_D2_EDGE1 = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0


def require_points(count: int, needed: int, what: str = "stencil") -> None:
    """Raise GridTooShortError if a grid has fewer than `needed` nodes"""
    if count < needed:
        raise GridTooShortError(f"{what} needs at least {needed} grid points, got {count}")


def first_derivative(values: np.ndarray, dx: float) -> np.ndarray:
    """
    Fourth-order first derivative of uniformly sampled values

    Args:
        values: Samples (real or complex), at least 5 of them
        dx: Grid spacing

    Returns:
        Array of derivative samples with the same length
    """
    f = np.asarray(values, dtype=complex)
    require_points(f.size, 5, "first-derivative stencil")

    out = np.empty_like(f)
    out[2:-2] = (
        _D1_CENTRAL[0] * f[:-4]
        + _D1_CENTRAL[1] * f[1:-3]
        + _D1_CENTRAL[3] * f[3:-1]
        + _D1_CENTRAL[4] * f[4:]
    )
    out[0] = _D1_EDGE0 @ f[:5]
    out[1] = _D1_EDGE1 @ f[:5]
    # Backward stencils are the forward ones mirrored with a sign flip
    out[-1] = -(_D1_EDGE0 @ f[::-1][:5])
    out[-2] = -(_D1_EDGE1 @ f[::-1][:5])
    return out / dx


def second_derivative(values: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order second derivative; needs at least 6 samples"""
    f = np.asarray(values, dtype=complex)
    require_points(f.size, 6, "second-derivative stencil")

    out = np.empty_like(f)
    out[2:-2] = (
        _D2_CENTRAL[0] * f[:-4]
        + _D2_CENTRAL[1] * f[1:-3]
        + _D2_CENTRAL[2] * f[2:-2]
        + _D2_CENTRAL[3] * f[3:-1]
        + _D2_CENTRAL[4] * f[4:]
    )
    out[0] = _D2_EDGE0 @ f[:6]
    out[1] = _D2_EDGE1 @ f[:6]
    out[-1] = _D2_EDGE0 @ f[::-1][:6]
    out[-2] = _D2_EDGE1 @ f[::-1][:6]
    return out / dx**2


def interior(values: np.ndarray, margin: int = INTERIOR_MARGIN) -> np.ndarray:
    """Drop `margin` nodes from each edge"""
    return np.asarray(values)[margin:-margin]
