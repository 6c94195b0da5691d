"""
Complex special functions used by the closed-form solutions.

All functions accept Python scalars or numpy arrays and return the same
shape. Jacobi and Laguerre polynomials use the standard hypergeometric
normalization, P_n^(a,b)(1) = (a+1)_n / n! and L_n^(a)(0) = (a+1)_n / n!,
with complex parameters allowed.
"""
import logging
from typing import Tuple, Union

import numpy as np

from utils.errors import DegenerateRecurrenceError, NonFiniteValueError, PoleError

logger = logging.getLogger(__name__)

ArrayLike = Union[complex, float, np.ndarray]

# |sinh z| (or |cosh z|) below this scale is treated as a pole hit
POLE_GUARD = 1e-300

_DENOMINATOR_GUARD = 1e-14


def _finite_or_raise(values: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(values)):
        bad = np.flatnonzero(~np.isfinite(np.atleast_1d(values)))
        raise NonFiniteValueError(f"{name} produced non-finite output at index {bad[:5].tolist()}")


def _shape_like(values: np.ndarray, original: ArrayLike):
    if np.ndim(original) == 0:
        return complex(values.reshape(()))
    return values


def jacobi_poly(n: int, alpha: complex, beta: complex, z: ArrayLike) -> ArrayLike:
    """
    Jacobi polynomial P_n^(alpha, beta)(z) by forward three-term recurrence

    Args:
        n: Degree (n >= 0)
        alpha: First parameter (complex allowed)
        beta: Second parameter (complex allowed)
        z: Argument (scalar or array, complex allowed)

    Returns:
        P_n evaluated at z, same shape as z

    Raises:
        ValueError: If n is negative or not an integer
        DegenerateRecurrenceError: If a recurrence denominator vanishes
    """
    if int(n) != n or n < 0:
        raise ValueError(f"Jacobi degree must be a nonnegative integer, got {n}")
    n = int(n)
    a = complex(alpha)
    b = complex(beta)
    zz = np.asarray(z, dtype=complex)

    p_prev = np.ones_like(zz)
    if n == 0:
        return _shape_like(p_prev, z)

    p_curr = ((a + b + 2.0) * zz + (a - b)) / 2.0
    s = a + b
    for k in range(2, n + 1):
        denom = 2.0 * k * (k + s) * (2.0 * k + s - 2.0)
        if abs(denom) < _DENOMINATOR_GUARD:
            raise DegenerateRecurrenceError(
                f"Jacobi recurrence denominator vanishes at degree {k} "
                f"(alpha+beta = {s})"
            )
        c1 = (2.0 * k + s - 1.0) * ((2.0 * k + s) * (2.0 * k + s - 2.0) * zz + a * a - b * b)
        c2 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + s)
        p_prev, p_curr = p_curr, (c1 * p_curr - c2 * p_prev) / denom

    _finite_or_raise(p_curr, "jacobi_poly")
    return _shape_like(p_curr, z)


def laguerre_poly(n: int, alpha: complex, z: ArrayLike) -> ArrayLike:
    """Generalized Laguerre polynomial L_n^(alpha)(z) by three-term recurrence"""
    if int(n) != n or n < 0:
        raise ValueError(f"Laguerre degree must be a nonnegative integer, got {n}")
    n = int(n)
    a = complex(alpha)
    zz = np.asarray(z, dtype=complex)

    l_prev = np.ones_like(zz)
    if n == 0:
        return _shape_like(l_prev, z)
    l_curr = 1.0 + a - zz
    for k in range(2, n + 1):
        l_prev, l_curr = l_curr, ((2.0 * k - 1.0 + a - zz) * l_curr - (k - 1.0 + a) * l_prev) / k

    _finite_or_raise(l_curr, "laguerre_poly")
    return _shape_like(l_curr, z)


def gudermannian(z: ArrayLike) -> ArrayLike:
    """
    Gudermannian gd(z) = arctan(sinh z)

    Evaluated as 2*arctan(tanh(z/2)), which coincides with the principal
    arctan(sinh z) on the strip |Im z| < pi/2 and does not overflow for
    large |Re z|. gd(0) = 0 and gd is odd.
    """
    zz = np.asarray(z, dtype=complex)
    values = 2.0 * np.arctan(np.tanh(zz / 2.0))
    _finite_or_raise(values, "gudermannian")
    return _shape_like(values, z)


def gudermannian_path(xs: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """
    gd(x + i*shift) along an increasing real grid, continuous in x

    The principal branch jumps by pi in its real part when the path
    crosses a branch cut (only possible for |shift| >= pi/2); those jumps
    are unwrapped so that the result stays an antiderivative of sech.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(gudermannian(xs + 1j * shift), dtype=complex)
    if values.size < 2:
        return values
    real = np.unwrap(values.real, period=np.pi)
    return real + 1j * values.imag


def safe_cosech_coth(z: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """
    (cosech z, coth z) without overflow for large |Re z|

    Uses 1 - exp(-2w) = -expm1(-2w) on the half-plane Re w >= 0 and
    oddness for the other half, so relative accuracy holds near the origin.

    Raises:
        PoleError: If |sinh z| falls below the pole guard
    """
    zz = np.asarray(z, dtype=complex)
    flip = zz.real < 0
    w = np.where(flip, -zz, zz)
    denom = -np.expm1(-2.0 * w)  # = 2 exp(-w) sinh(w)
    if np.any(np.abs(denom) < 2.0 * POLE_GUARD):
        where = np.atleast_1d(zz)[np.flatnonzero(np.abs(np.atleast_1d(denom)) < 2.0 * POLE_GUARD)[0]]
        raise PoleError(f"cosech/coth pole at z = {where}", location=complex(where))
    cosech = 2.0 * np.exp(-w) / denom
    coth = (2.0 - denom) / denom
    cosech = np.where(flip, -cosech, cosech)
    coth = np.where(flip, -coth, coth)
    _finite_or_raise(cosech, "cosech")
    _finite_or_raise(coth, "coth")
    return _shape_like(cosech, z), _shape_like(coth, z)


def safe_sech_tanh(z: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """(sech z, tanh z) without overflow for large |Re z|"""
    zz = np.asarray(z, dtype=complex)
    flip = zz.real < 0
    w = np.where(flip, -zz, zz)
    e2 = np.exp(-2.0 * w)
    denom = 1.0 + e2  # = 2 exp(-w) cosh(w)
    if np.any(np.abs(denom) < 2.0 * POLE_GUARD):
        where = np.atleast_1d(zz)[np.flatnonzero(np.abs(np.atleast_1d(denom)) < 2.0 * POLE_GUARD)[0]]
        raise PoleError(f"sech/tanh pole at z = {where}", location=complex(where))
    sech = 2.0 * np.exp(-w) / denom
    tanh = -np.expm1(-2.0 * w) / denom
    tanh = np.where(flip, -tanh, tanh)
    _finite_or_raise(sech, "sech")
    _finite_or_raise(tanh, "tanh")
    return _shape_like(sech, z), _shape_like(tanh, z)


def _continuous_imag(values: np.ndarray) -> np.ndarray:
    if values.size < 2:
        return values
    return values.real + 1j * np.unwrap(values.imag)


def log_cosh_path(z: np.ndarray) -> np.ndarray:
    """
    log cosh(z) along a grid path, overflow-free and continuous

    Uses cosh z = exp(w) (1 + exp(-2w)) / 2 with w = +-z, Re w >= 0.
    """
    zz = np.asarray(z, dtype=complex)
    w = np.where(zz.real < 0, -zz, zz)
    tail = np.exp(-2.0 * w)
    if np.any(np.abs(1.0 + tail) < 2.0 * POLE_GUARD):
        raise PoleError("log cosh evaluated at a zero of cosh")
    values = np.atleast_1d(w + np.log1p(tail) - np.log(2.0))
    _finite_or_raise(values, "log_cosh_path")
    return _continuous_imag(values)


def log_sinh_path(z: np.ndarray) -> np.ndarray:
    """log sinh(z) along a grid path, overflow-free and continuous"""
    zz = np.asarray(z, dtype=complex)
    flip = zz.real < 0
    w = np.where(flip, -zz, zz)
    factor = -np.expm1(-2.0 * w)
    if np.any(np.abs(factor) < 2.0 * POLE_GUARD):
        raise PoleError("log sinh evaluated at a zero of sinh")
    # sinh(-w) = exp(i*pi) sinh(w)
    values = np.atleast_1d(w + np.log(factor) - np.log(2.0) + np.where(flip, 1j * np.pi, 0.0))
    _finite_or_raise(values, "log_sinh_path")
    return _continuous_imag(values)
