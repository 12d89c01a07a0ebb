import math
from typing import List, Tuple, Optional, Sequence, Union
import numpy as np
from scipy.optimize import brentq, minimize_scalar
from ptchain import (
    ChainParams,
    Momentum,
    Mechanism,
    MinimumKind,
    EtaThreshold,
    ForbiddenInterval,
    RealityReport,
    LOGGER,
    TOL_MARGIN,
    TOL_INTERVAL,
    TOL_TOUCH,
    DEFAULT_GRID,
    validate_params,
)
from ptchain.dispersion import lambda_k, mu_k, nu_k, branch_energies
from ptchain.utils import scan_grid, bisect_predicate


MIN_SCAN_GRID = 64


def inner_radicand(params: ChainParams, k: Momentum) -> Union[float, np.ndarray]:
    """``λμ - ν``, the branches touch where it vanishes and split into a complex pair where it is negative."""
    return lambda_k(params, k) * mu_k(params, k) - nu_k(params, k)


def reality_margin(params: ChainParams, k: Momentum) -> Union[float, np.ndarray]:
    """A dimensionless measure of how far the branches at ``k`` are from turning complex.

    The spectrum at ``k`` is real iff both ``λμ - ν >= 0`` and ``λ + μ - 2 sqrt(λμ - ν) >= 0``.
    Each left hand side is divided by a bound on its size, ``λM + ν`` and ``λ + M`` with
    ``M = (|J1| + |J2|)^2 + eta^2``, and the margin is the smaller of the two ratios.

    Args:
        params: The chain parameters.
        k: The momentum, a float or an array of them.

    Returns:
        The margin, negative exactly where a branch is complex.
    """
    lam = lambda_k(params, k)
    mu = mu_k(params, k)
    nu = nu_k(params, k)
    scale = (abs(params.j1) + abs(params.j2)) ** 2 + params.eta ** 2
    inner = lam * mu - nu
    inner_scale = lam * scale + nu
    sum_scale = lam + scale
    with np.errstate(divide="ignore", invalid="ignore"):
        first = np.where(inner_scale > 0, inner / inner_scale, 0.0)
        second = np.where(sum_scale > 0, (lam + mu - 2 * np.sqrt(np.maximum(inner, 0.0))) / sum_scale, 0.0)
    margin = np.minimum(first, second)
    if np.ndim(margin) == 0:
        return float(margin)
    return margin


def breaking_mechanism(params: ChainParams, k: Momentum, tol: float = TOL_MARGIN) -> Mechanism:
    """Which reality condition fails at ``k``.

    Note:
        ``λ + μ < 0`` forces ``μ < 0`` and with it ``λμ - ν <= 0`` so ``SUM_NEGATIVE`` is the
        stronger of the two failures and is reported whenever it holds.

    Args:
        params: The chain parameters.
        k: The momentum.
        tol: The margin below which the spectrum counts as complex.

    Returns:
        The failing condition, ``NONE`` when both branches are real.
    """
    if reality_margin(params, k) >= -tol:
        return Mechanism.NONE
    if lambda_k(params, k) + mu_k(params, k) < 0:
        return Mechanism.SUM_NEGATIVE
    return Mechanism.INNER_ROOT_NEGATIVE


def eta_critical_isotropic(params: ChainParams) -> EtaThreshold:
    """The closed form threshold of an isotropic chain.

    ``μ`` is smallest at ``k = 0`` when ``J1 J2 < 0`` and at ``k = pi / 2`` otherwise, so every
    branch is real iff ``eta`` stays below ``min(|J1 + J2|, |J1 - J2|)``.

    Args:
        params: The chain parameters, ``eta`` and ``h`` are ignored.

    Raises:
        ValueError: If the chain is anisotropic.

    Returns:
        The threshold, which combination sets it and where the breaking starts.
    """
    if not params.is_isotropic:
        raise ValueError(
            f"The closed form threshold needs gamma1 = gamma2 = 0, got: `{params.gamma1}` and `{params.gamma2}`"
        )
    total = abs(params.j1 + params.j2)
    diff = abs(params.j1 - params.j2)
    if total < diff:
        return EtaThreshold(total, MinimumKind.SUM, 0.0)
    return EtaThreshold(diff, MinimumKind.DIFF, math.pi / 2)


def _refine_minima(
    params: ChainParams, ks: np.ndarray, margins: np.ndarray, tol: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Search between grid points around every real local minimum of the margin.

    Points where the search finds a complex spectrum are merged into the scan.
    """
    extra_k = []
    extra_margin = []
    for i in range(1, len(ks) - 1):
        m = margins[i]
        if m < -tol or m > margins[i - 1] or m > margins[i + 1]:
            continue
        if m == margins[i - 1] and m == margins[i + 1]:
            continue
        result = minimize_scalar(
            lambda k: reality_margin(params, k),
            bounds=(ks[i - 1], ks[i + 1]),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if result.fun < -tol:
            LOGGER.debug("Refinement found a complex point at k = %.12g between grid points", result.x)
            extra_k.append(result.x)
            extra_margin.append(result.fun)
    if not extra_k:
        return ks, margins
    ks = np.concatenate([ks, extra_k])
    margins = np.concatenate([margins, extra_margin])
    order = np.argsort(ks, kind="stable")
    return ks[order], margins[order]


def _scan(params: ChainParams, grid_size: int, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    if grid_size < MIN_SCAN_GRID:
        raise ValueError(f"grid_size must be >= {MIN_SCAN_GRID}, got: `{grid_size}`")
    ks = scan_grid(grid_size)
    margins = reality_margin(params, ks)
    return _refine_minima(params, ks, margins, tol)


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Maximal runs of ``True`` as inclusive ``(start, end)`` index pairs."""
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        if not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def classify_reality(params: ChainParams, grid_size: int = DEFAULT_GRID, tol: float = TOL_MARGIN) -> RealityReport:
    """Find every range of momenta where the spectrum is complex.

    The margin is scanned on the open grid plus ``0``, ``pi / 2`` and ``pi``, and local minima
    are refined between grid points. Each maximal run of complex points becomes a forbidden
    interval whose ends are bisected down to ``TOL_INTERVAL``. A run that reaches the zone
    edge ends exactly at ``0`` or ``pi``.

    Args:
        params: The chain parameters.
        grid_size: Number of interior grid points.
        tol: The margin below which the spectrum counts as complex.

    Raises:
        ValueError: If ``grid_size < 64`` or the parameters are invalid.

    Returns:
        The reality report. Its mechanism is the one of the lowest interval.
    """
    validate_params(params)
    ks, margins = _scan(params, grid_size, tol)
    broken = margins < -tol

    def is_real(k: float) -> bool:
        return reality_margin(params, k) >= -tol

    intervals = []
    last = len(ks) - 1
    for start, end in _runs(broken):
        k_lo = 0.0 if start == 0 else bisect_predicate(is_real, ks[start - 1], ks[start], TOL_INTERVAL)
        k_hi = math.pi if end == last else bisect_predicate(is_real, ks[end + 1], ks[end], TOL_INTERVAL)
        run = ks[start : end + 1]
        if np.any(lambda_k(params, run) + mu_k(params, run) < 0):
            mechanism = Mechanism.SUM_NEGATIVE
        else:
            mechanism = Mechanism.INNER_ROOT_NEGATIVE
        LOGGER.debug("Forbidden interval (%.10g, %.10g) from %s", k_lo, k_hi, mechanism.value)
        intervals.append(ForbiddenInterval(float(k_lo), float(k_hi), mechanism))
    mechanism = intervals[0].mechanism if intervals else Mechanism.NONE
    return RealityReport(params, not intervals, intervals, mechanism, grid_size)


def is_fully_real(params: ChainParams, grid_size: int = DEFAULT_GRID, tol: float = TOL_MARGIN) -> bool:
    """The same verdict as ``classify_reality(...).fully_real`` without locating the intervals."""
    _, margins = _scan(params, grid_size, tol)
    return bool(np.all(margins >= -tol))


def eta_critical_numeric(
    params: ChainParams, eta_max: Optional[float] = None, tol: float = TOL_INTERVAL, grid_size: int = DEFAULT_GRID
) -> float:
    """The largest imaginary field that keeps the whole band real, found by bisection.

    Every other parameter, ``h`` included, is held fixed. For isotropic chains this reproduces
    :py:func:`eta_critical_isotropic` and it is never larger than that closed form.

    Args:
        params: The chain parameters, ``eta`` is ignored.
        eta_max: The upper end of the bracket. Defaults to ``|J1| + |J2| + 1`` where ``μ`` is
            negative at every momentum.
        tol: The width of the final bracket.
        grid_size: Number of interior grid points in each scan.

    Raises:
        ValueError: If ``eta_max`` or ``tol`` are not positive or the spectrum is already
            complex at ``eta = 0``.

    Returns:
        The threshold within ``tol``.
    """
    if eta_max is None:
        eta_max = abs(params.j1) + abs(params.j2) + 1.0
    if eta_max <= 0:
        raise ValueError(f"eta_max must be positive, got: `{eta_max}`")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got: `{tol}`")
    validate_params(params._replace(eta=0.0))

    def real_at(eta: float) -> bool:
        return is_fully_real(params._replace(eta=eta), grid_size)

    if not real_at(0.0):
        raise ValueError(f"Spectrum is complex at eta = 0, the reality tolerance is too tight for: `{params}`")
    if real_at(eta_max):
        LOGGER.warning("Spectrum is still real at eta_max = %g, returning it as the threshold", eta_max)
        return float(eta_max)
    return float(bisect_predicate(real_at, 0.0, eta_max, tol))


def branch_touch_points(params: ChainParams, grid_size: int = DEFAULT_GRID, tol: float = TOL_TOUCH) -> List[float]:
    """Momenta where the two branches coincide.

    ``Λ+^2 - Λ-^2 = 4 sqrt(λμ - ν)`` so the branches touch exactly at the zeros of the inner
    radicand. Local minima of its magnitude on the scan grid are refined, with a root finder
    where it changes sign and a bounded minimization where it does not, and kept when
    ``|Λ+ - Λ-|`` is below ``tol`` there. Exceptional points at the ends of forbidden
    intervals are found this way as well as tangential touches at ``k*``.

    Args:
        params: The chain parameters.
        grid_size: Number of interior grid points.
        tol: The largest branch splitting that counts as touching.

    Raises:
        ValueError: If ``grid_size < 64``.

    Returns:
        The sorted touching momenta.
    """
    if grid_size < MIN_SCAN_GRID:
        raise ValueError(f"grid_size must be >= {MIN_SCAN_GRID}, got: `{grid_size}`")
    ks = scan_grid(grid_size)
    inner = inner_radicand(params, ks)
    size = np.abs(inner)
    last = len(ks) - 1

    def radicand(k: float) -> float:
        return float(inner_radicand(params, k))

    found = []
    for i in range(len(ks)):
        left = size[i - 1] if i > 0 else np.inf
        right = size[i + 1] if i < last else np.inf
        if size[i] > left or size[i] > right or (size[i] == left and size[i] == right):
            continue
        if inner[i] == 0:
            k = ks[i]
        elif i > 0 and inner[i - 1] * inner[i] < 0:
            k = brentq(radicand, ks[i - 1], ks[i], xtol=1e-15)
        elif i < last and inner[i] * inner[i + 1] < 0:
            k = brentq(radicand, ks[i], ks[i + 1], xtol=1e-15)
        else:
            sign = 1.0 if inner[i] > 0 else -1.0
            result = minimize_scalar(
                lambda x: sign * radicand(x),
                bounds=(ks[max(i - 1, 0)], ks[min(i + 1, last)]),
                method="bounded",
                options={"xatol": 1e-12},
            )
            k = result.x if abs(result.fun) < size[i] else ks[i]
        minus, plus = branch_energies(params, k)
        if abs(plus - minus) < tol:
            found.append(float(k))
    points = []
    for k in sorted(found):
        if not points or k - points[-1] > 1e-7:
            points.append(k)
    return points


def monotonicity_violations(
    params: ChainParams, etas: Sequence[float], grid_size: int = DEFAULT_GRID
) -> List[float]:
    """Imaginary fields where a spectrum that was complex at a smaller field is real again.

    Args:
        params: The chain parameters, ``eta`` is replaced by each value of ``etas``.
        etas: The fields to scan, in any order.
        grid_size: Number of interior grid points in each scan.

    Returns:
        The fields, in increasing order, where reality comes back.
    """
    violations = []
    broken_seen = False
    for eta in sorted(etas):
        real = is_fully_real(params._replace(eta=eta), grid_size)
        if not real:
            broken_seen = True
        elif broken_seen:
            violations.append(float(eta))
    if violations:
        LOGGER.warning("Reality is restored at %d larger fields, first at eta = %g", len(violations), violations[0])
    return violations
