import math
from typing import List, Tuple, Optional, Union
import numpy as np
from ptchain import (
    ChainParams,
    SpecialMomentum,
    CriticalFields,
    PhasePoint,
    Reality,
    Order,
    LOGGER,
    DEFAULT_GRID,
    validate_params,
)
from ptchain.reality import classify_reality
from ptchain.utils import principal_sqrt, real_if_close


Sweep = Tuple[float, float, int]


def special_radicands(params: ChainParams, which: SpecialMomentum) -> Tuple[float, float]:
    """``(λ, μ)`` written as perfect squares at the momenta where ``ν`` vanishes.

    Raises:
        ValueError: If ``which`` is not a special momentum.
    """
    if which is SpecialMomentum.K0:
        lam = params.h ** 2 + (params.gamma1 - params.gamma2) ** 2
        mu = (params.j1 + params.j2) ** 2 - params.eta ** 2
        return lam, mu
    if which is SpecialMomentum.KPI2:
        lam = params.h ** 2 + (params.gamma1 + params.gamma2) ** 2
        mu = (params.j1 - params.j2) ** 2 - params.eta ** 2
        return lam, mu
    raise ValueError(f"Unknown special momentum, got: `{which}`")


def gap_at_special_k(params: ChainParams, which: SpecialMomentum) -> Union[float, complex]:
    """The signed acoustic gap at a momentum where ``ν`` vanishes.

    At ``k = 0`` and ``k = pi / 2`` the acoustic branch is ``sqrt(λ) - sqrt(μ)``. It changes sign
    at the critical fields.

    Args:
        params: The chain parameters.
        which: The special momentum.

    Raises:
        ValueError: If ``which`` is not a special momentum.

    Returns:
        ``sqrt(h^2 + (gamma1 - gamma2)^2) - sqrt((J1 + J2)^2 - eta^2)`` at ``k = 0`` and
        ``sqrt(h^2 + (gamma1 + gamma2)^2) - sqrt((J1 - J2)^2 - eta^2)`` at ``k = pi / 2``. The value
        is complex when the second radicand is negative.
    """
    lam, mu = special_radicands(params, which)
    return real_if_close(principal_sqrt(lam) - principal_sqrt(mu))


def _field(radicand: float) -> Optional[float]:
    if radicand < 0:
        return None
    return math.sqrt(radicand)


def critical_fields(params: ChainParams) -> CriticalFields:
    """The fields where the acoustic gap closes.

    Args:
        params: The chain parameters, ``h`` is ignored.

    Returns:
        ``h_c1`` closing the gap at ``k = 0`` and ``h_c2`` closing it at ``k = pi / 2``. A field
        is ``None`` when its radicand is negative and ``0`` when it is exactly zero.
    """
    h_c1 = _field((params.j1 + params.j2) ** 2 - params.eta ** 2 - (params.gamma1 - params.gamma2) ** 2)
    h_c2 = _field((params.j1 - params.j2) ** 2 - params.eta ** 2 - (params.gamma1 + params.gamma2) ** 2)
    return CriticalFields(h_c1, h_c2)


def classify_phase(params: ChainParams, grid_size: int = DEFAULT_GRID) -> PhasePoint:
    """Classify one point by band reality and by position relative to the critical window.

    The chain is ordered for fields strictly between the two critical fields, whichever of them
    is smaller. When a critical field does not exist the order is undefined.

    Args:
        params: The chain parameters.
        grid_size: Number of interior grid points in the reality scan.

    Returns:
        The phase point.
    """
    validate_params(params)
    report = classify_reality(params, grid_size)
    reality = Reality.REAL if report.fully_real else Reality.BROKEN
    fields = critical_fields(params)
    low = high = None
    if fields.h_c1 is None or fields.h_c2 is None:
        LOGGER.debug(
            "Order is undefined at h = %g, eta = %g: h_c1 = %s, h_c2 = %s", params.h, params.eta, fields.h_c1, fields.h_c2
        )
        order = Order.UNDEFINED
    else:
        low, high = sorted((fields.h_c1, fields.h_c2))
        order = Order.ORDERED if low < params.h < high else Order.DISORDERED
    return PhasePoint(
        params.h, params.eta, reality, order, low, high, fields.h_c1, fields.h_c2, params.is_isotropic
    )


def sweep_values(sweep: Sweep, name: str) -> np.ndarray:
    """Expand a ``(start, stop, num)`` triple into evenly spaced values.

    Raises:
        ValueError: If fewer than two steps are requested or the range is reversed.
    """
    start, stop, num = sweep
    if int(num) != num or num < 2:
        raise ValueError(f"The {name} sweep needs at least 2 steps, got: `{num}`")
    if stop < start:
        raise ValueError(f"The {name} sweep is empty, got: `({start}, {stop})`")
    return np.linspace(start, stop, int(num))


def phase_diagram(
    params: ChainParams, h_range: Sweep, eta_range: Sweep, grid_size: int = DEFAULT_GRID
) -> List[PhasePoint]:
    """Classify every point of a rectangular ``(h, eta)`` grid.

    Args:
        params: The template, its ``h`` and ``eta`` are replaced by the sweep values.
        h_range: ``(start, stop, num)`` for the field.
        eta_range: ``(start, stop, num)`` for the imaginary field.
        grid_size: Number of interior grid points in each reality scan.

    Raises:
        ValueError: If a sweep is invalid or reaches negative values.

    Returns:
        The points with ``h`` as the outer and ``eta`` as the inner loop.
    """
    hs = sweep_values(h_range, "h")
    etas = sweep_values(eta_range, "eta")
    points = []
    for h in hs:
        for eta in etas:
            points.append(classify_phase(params._replace(h=float(h), eta=float(eta)), grid_size))
    undefined = sum(p.order is Order.UNDEFINED for p in points)
    if undefined:
        LOGGER.warning("Order is undefined at %d of %d phase points", undefined, len(points))
    LOGGER.debug("Classified %d phase points", len(points))
    return points
