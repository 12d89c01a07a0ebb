import math
from typing import Union, Sequence, Iterable
import numpy as np
from typing_extensions import Protocol
from ptchain import LOGGER, TOL_MATCH


class Predicate(Protocol):
    def __call__(self, x: float) -> bool:
        ...


def principal_sqrt(value: Union[float, complex]) -> complex:
    """The principal square root of a real or complex number.

    Note:
        A negative real with a negative zero imaginary part would land on the lower side of
        the branch cut. Reals are treated as having ``+0j`` so ``sqrt(-x) = +i sqrt(x)``.

    Args:
        value: The number to take the root of.

    Returns:
        The root with ``Re >= 0``.
    """
    value = complex(value)
    if value.imag == 0:
        value = complex(value.real, 0.0)
    return complex(np.sqrt(value))


def real_if_close(value: complex) -> Union[float, complex]:
    """Drop an exactly zero imaginary part."""
    value = complex(value)
    if value.imag == 0:
        return value.real
    return value


def interior_grid(grid_size: int) -> np.ndarray:
    """The open uniform grid ``k_m = m pi / (grid_size + 1)`` for ``m = 1..grid_size``.

    Raises:
        ValueError: If there are fewer than two points.
    """
    if grid_size < 2:
        raise ValueError(f"grid_size must be >= 2, got: `{grid_size}`")
    return np.arange(1, grid_size + 1) * math.pi / (grid_size + 1)


def scan_grid(grid_size: int) -> np.ndarray:
    """The interior grid together with the special momenta ``0``, ``pi / 2`` and ``pi``, sorted."""
    return np.unique(np.concatenate([interior_grid(grid_size), [0.0, math.pi / 2, math.pi]]))


def bisect_predicate(predicate: Predicate, good: float, bad: float, tol: float) -> float:
    """Find where a predicate flips between two points.

    ``good`` may lie on either side of ``bad``. The predicate is only evaluated strictly between them.

    Args:
        predicate: The test, assumed true at ``good`` and false at ``bad``.
        good: A point where the predicate holds.
        bad: A point where it does not.
        tol: The distance between the final bracket ends.

    Raises:
        ValueError: If ``tol`` is not positive.

    Note:
        A ``tol`` below the float spacing of the bracket stops at adjacent floats.

    Returns:
        The point of the final bracket where the predicate holds.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got: `{tol}`")
    steps = 0
    while abs(bad - good) > tol:
        mid = 0.5 * (good + bad)
        if mid == good or mid == bad:
            break
        if predicate(mid):
            good = mid
        else:
            bad = mid
        steps += 1
    LOGGER.debug("Bisection converged to %.12g after %d steps", good, steps)
    return good


def sort_complex(values: Iterable[complex]) -> np.ndarray:
    """Sort complex numbers by real part and then imaginary part."""
    values = np.asarray(list(values), dtype=complex).ravel()
    order = np.lexsort((values.imag, values.real))
    return values[order]


def match_spectra(first: Sequence[complex], second: Sequence[complex]) -> float:
    """Compare two multisets of complex numbers.

    Both are sorted and each value of the first is paired with the nearest unused value of
    the second.

    Args:
        first: One multiset.
        second: The other multiset.

    Raises:
        ValueError: If the multisets have different sizes.

    Returns:
        The worst distance between paired values, ``0`` for empty inputs.
    """
    first = sort_complex(first)
    second = sort_complex(second)
    if len(first) != len(second):
        raise ValueError(f"Spectra must have the same size, got: `{len(first)}` and `{len(second)}`")
    if len(first) == 0:
        return 0.0
    used = np.zeros(len(second), dtype=bool)
    worst = 0.0
    for value in first:
        distance = np.abs(second - value)
        distance[used] = np.inf
        idx = int(np.argmin(distance))
        used[idx] = True
        worst = max(worst, float(distance[idx]))
    return worst


def spectra_match(first: Sequence[complex], second: Sequence[complex], tol: float = TOL_MATCH) -> bool:
    return match_spectra(first, second) <= tol


def conjugation_residual(eigenvalues: Sequence[complex]) -> float:
    """How far a multiset is from being closed under complex conjugation."""
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    return match_spectra(eigenvalues, np.conj(eigenvalues))
