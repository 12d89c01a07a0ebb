import math
from typing import List, Dict, Optional
from ptchain import (
    ChainParams,
    CounterpartSolution,
    RootChoice,
    SignClass,
    SpecialMomentum,
    LOGGER,
)
from ptchain.dispersion import branch_energies
from ptchain.critical import gap_at_special_k
from ptchain.utils import interior_grid


NO_ROOT = "eta > eta_c"
NEGATIVE_FIELD = "h_prime radicand is negative"
ROOT_TOL = 1e-12


def _squared_roots(params: ChainParams) -> Optional[List[float]]:
    """Solve ``J1^2 x^2 - (J1^2 + J2^2 - eta^2) x + J2^2 = 0`` for ``x = a^2``.

    Note:
        Real positive roots exist iff ``eta <= min(|J1 + J2|, |J1 - J2|)``. A discriminant that is
        negative only by rounding is read as the double root of the uniform chain.

    Returns:
        ``[x1, x2]`` with ``x1 >= x2 > 0`` or ``None`` when there is no positive real root.
    """
    j1_sq = params.j1 ** 2
    j2_sq = params.j2 ** 2
    s = j1_sq + j2_sq - params.eta ** 2
    disc = s * s - 4 * j1_sq * j2_sq
    if s <= 0 or disc < -ROOT_TOL * s * s:
        return None
    if disc <= 0:
        x = s / (2 * j1_sq)
        return [x, x]
    x1 = (s + math.sqrt(disc)) / (2 * j1_sq)
    # Vieta, x1 x2 = J2^2 / J1^2
    x2 = j2_sq / (j1_sq * x1)
    return [x1, x2]


def _roots_by_choice(params: ChainParams) -> Optional[Dict[RootChoice, float]]:
    squared = _squared_roots(params)
    if squared is None:
        return None
    a1, a2 = math.sqrt(squared[0]), math.sqrt(squared[1])
    return {RootChoice.A1: a1, RootChoice.A2: a2, RootChoice.MINUS_A1: -a1, RootChoice.MINUS_A2: -a2}


def _check_dimerized(params: ChainParams) -> None:
    if params.j1 == 0 or params.j2 == 0:
        raise ValueError(f"Renormalization needs non-zero exchanges, got: `{params.j1}` and `{params.j2}`")


def counterpart_from_root(params: ChainParams, a: float) -> CounterpartSolution:
    """Build the Hermitian chain that belongs to one renormalization factor.

    The exchanges become ``(a J1, J2 / a)`` and the anisotropies ``(a gamma1, gamma2 / a)`` which
    keeps ``J1 gamma2 + J2 gamma1`` and ``gamma1 gamma2`` fixed. The field absorbs the change of
    ``gamma1^2 + gamma2^2``.

    Args:
        params: The original chain parameters.
        a: The renormalization factor.

    Returns:
        The counterpart. It is not valid when the new field would be imaginary.
    """
    g1 = a * params.gamma1
    g2 = params.gamma2 / a
    sign_class = SignClass.FERRO_PRESERVING if a > 0 else SignClass.FERRO_FLIPPING
    budget = params.h ** 2 + params.gamma1 ** 2 + params.gamma2 ** 2
    radicand = budget - g1 ** 2 - g2 ** 2
    if radicand < -ROOT_TOL * max(budget, 1.0):
        LOGGER.warning("No counterpart field for a = %g, h'^2 = %g", a, radicand)
        return CounterpartSolution(a, a * params.j1, params.j2 / a, g1, g2, None, sign_class, False, NEGATIVE_FIELD)
    h_prime = math.sqrt(max(radicand, 0.0))
    return CounterpartSolution(a, a * params.j1, params.j2 / a, g1, g2, h_prime, sign_class, True)


def renormalization_roots(params: ChainParams) -> List[CounterpartSolution]:
    """All counterparts from the real roots of the renormalization quartic.

    Matching ``μ`` for every momentum with ``J1' = a J1`` and ``J2' = J2 / a`` gives
    ``J1^2 a^4 - (J1^2 + J2^2 - eta^2) a^2 + J2^2 = 0``. It is solved as a quadratic in ``a^2``.

    Note:
        The two positive roots are related by one step along the chain, ``J1'(a1) = J2'(a2)``.
        When ``J1 J2 < 0`` the partner of ``a1`` is ``-a2`` instead.

    Args:
        params: The chain parameters.

    Raises:
        ValueError: If ``J1`` or ``J2`` is zero.

    Returns:
        The counterparts for ``a1, a2, -a1, -a2`` in that order, only ``a1, -a1`` at a double
        root and an empty list when ``eta > eta_c``.
    """
    _check_dimerized(params)
    roots = _roots_by_choice(params)
    if roots is None:
        return []
    choices = list(RootChoice)
    if roots[RootChoice.A1] == roots[RootChoice.A2]:
        choices = [RootChoice.A1, RootChoice.MINUS_A1]
    return [counterpart_from_root(params, roots[choice]) for choice in choices]


def _invalid(reason: str) -> CounterpartSolution:
    return CounterpartSolution(None, None, None, None, None, None, None, False, reason)


def _counterpart(params: ChainParams, root_choice: RootChoice) -> CounterpartSolution:
    _check_dimerized(params)
    roots = _roots_by_choice(params)
    if roots is None:
        LOGGER.info("No real renormalization root for eta = %g", params.eta)
        return _invalid(NO_ROOT)
    return counterpart_from_root(params, roots[root_choice])


def isotropic_counterpart(params: ChainParams, root_choice: RootChoice = RootChoice.A1) -> CounterpartSolution:
    """The Hermitian chain with the same dispersion as an isotropic chain.

    Args:
        params: The chain parameters.
        root_choice: Which root of the quartic to use.

    Raises:
        ValueError: If the chain is anisotropic or an exchange is zero.

    Returns:
        The counterpart with ``h' = h``, not valid when ``eta > eta_c``.
    """
    if not params.is_isotropic:
        raise ValueError(
            f"The isotropic counterpart needs gamma1 = gamma2 = 0, got: `{params.gamma1}` and `{params.gamma2}`"
        )
    return _counterpart(params, root_choice)


def anisotropic_counterpart(params: ChainParams, root_choice: RootChoice = RootChoice.A1) -> CounterpartSolution:
    """The Hermitian chain with the same dispersion, anisotropy included.

    Args:
        params: The chain parameters.
        root_choice: Which root of the quartic to use.

    Raises:
        ValueError: If an exchange is zero.

    Returns:
        The counterpart, not valid when ``eta > eta_c`` or when ``h'^2`` is negative.
    """
    return _counterpart(params, root_choice)


def verify_spectrum_equality(original: ChainParams, counterpart: CounterpartSolution, grid_size: int = 1000) -> float:
    """The largest difference between the branches of a chain and of its counterpart.

    Both branches are compared on the open grid. The signed gaps at ``k = 0`` and
    ``k = pi / 2`` are compared as well, the original at ``h`` and the counterpart at ``h'``,
    which makes equal critical behavior part of the check.

    Args:
        original: The original chain parameters.
        counterpart: A valid counterpart of it.
        grid_size: Number of interior grid points.

    Raises:
        ValueError: If the counterpart is not valid.

    Returns:
        The worst absolute deviation.
    """
    mapped = counterpart.as_params(original.n_sites)
    worst = 0.0
    for k in interior_grid(grid_size):
        minus, plus = branch_energies(original, k)
        minus_prime, plus_prime = branch_energies(mapped, k)
        worst = max(worst, abs(minus - minus_prime), abs(plus - plus_prime))
    for which in SpecialMomentum:
        worst = max(worst, abs(gap_at_special_k(original, which) - gap_at_special_k(mapped, which)))
    LOGGER.debug("Counterpart with a = %g deviates by %.3g", counterpart.a, worst)
    return float(worst)
