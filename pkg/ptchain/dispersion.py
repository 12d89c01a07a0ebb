import math
from typing import Tuple, Union
import numpy as np
from ptchain import ChainParams, Momentum, BandSample, BandSpectrum, LOGGER, TOL_REALITY, DEFAULT_GRID
from ptchain.utils import principal_sqrt, real_if_close, interior_grid


def lambda_k(params: ChainParams, k: Momentum) -> float:
    """The field and anisotropy part of the dispersion.

    Args:
        params: The chain parameters.
        k: The momentum, a float or an array of them.

    Returns:
        ``h^2 + gamma1^2 + gamma2^2 - 2 gamma1 gamma2 cos 2k``, never negative.
    """
    g1, g2 = params.gamma1, params.gamma2
    return params.h ** 2 + g1 ** 2 + g2 ** 2 - 2 * g1 * g2 * np.cos(2 * k)


def mu_k(params: ChainParams, k: Momentum) -> float:
    """The exchange part of the dispersion, lowered by the imaginary field.

    Args:
        params: The chain parameters.
        k: The momentum, a float or an array of them.

    Returns:
        ``J1^2 + J2^2 + 2 J1 J2 cos 2k - eta^2``. This is negative when ``eta`` is large.
    """
    j1, j2 = params.j1, params.j2
    return j1 ** 2 + j2 ** 2 + 2 * j1 * j2 * np.cos(2 * k) - params.eta ** 2


def nu_k(params: ChainParams, k: Momentum, printed_form: bool = False) -> float:
    """The mixing between exchange and anisotropy.

    Note:
        Diagonalizing the Bogoliubov block gives ``(J1 gamma2 + J2 gamma1)^2 sin^2 2k``, which is
        never negative and symmetric under ``k -> pi - k``. The form with a single power of
        ``sin 2k`` changes sign at ``pi / 2`` and is only available through ``printed_form`` for
        comparison, nothing else in the package uses it.

    Args:
        params: The chain parameters.
        k: The momentum, a float or an array of them.
        printed_form: Use ``sin 2k`` instead of ``sin^2 2k``.

    Returns:
        The value of ``ν`` at ``k``.
    """
    coupling = (params.j1 * params.gamma2 + params.j2 * params.gamma1) ** 2
    s = np.sin(2 * k)
    if printed_form:
        return coupling * s
    return coupling * s * s


def squared_branches(params: ChainParams, k: Momentum) -> Tuple[complex, complex]:
    """The squares ``(Λ-^2, Λ+^2)`` of the two branches.

    Note:
        ``Λ+^2 Λ-^2 = (λ - μ)^2 + 4ν`` so the smaller square is recovered from the larger one
        instead of by a cancelling subtraction.
    """
    lam = float(lambda_k(params, k))
    mu = float(mu_k(params, k))
    nu = float(nu_k(params, k))
    root = principal_sqrt(lam * mu - nu)
    plus = lam + mu + 2 * root
    minus = lam + mu - 2 * root
    product = (lam - mu) ** 2 + 4 * nu
    if abs(plus) >= abs(minus):
        if plus != 0:
            minus = product / plus
    else:
        plus = product / minus
    return minus, plus


def branch_energies(params: ChainParams, k: Momentum) -> Tuple[complex, complex]:
    """Evaluate both excitation branches at one momentum.

    ``Λ± = sqrt(λ + μ ± 2 sqrt(λμ - ν))`` with principal square roots everywhere, so a real
    branch is never negative. The branches are labeled by the sign in front of the inner root,
    not by their size.

    Args:
        params: The chain parameters.
        k: The momentum.

    Returns:
        The acoustic branch ``Λ-`` and the optical branch ``Λ+``.
    """
    minus, plus = squared_branches(params, k)
    return principal_sqrt(minus), principal_sqrt(plus)


def isotropic_branch_energies(params: ChainParams, k: Momentum) -> Tuple[complex, complex]:
    """The branches ``h ∓ sqrt(μ)`` of a chain without anisotropy.

    Unlike :py:func:`branch_energies` the acoustic branch keeps its sign and becomes negative
    when the field drops below ``sqrt(μ)``. The two forms agree up to that sign.

    Args:
        params: The chain parameters.
        k: The momentum.

    Raises:
        ValueError: If either anisotropy is non-zero.

    Returns:
        ``(h - sqrt(μ), h + sqrt(μ))``.
    """
    if not params.is_isotropic:
        raise ValueError(
            f"Isotropic branches need gamma1 = gamma2 = 0, got: `{params.gamma1}` and `{params.gamma2}`"
        )
    root = principal_sqrt(mu_k(params, k))
    return params.h - root, params.h + root


def band_sample(params: ChainParams, k: Momentum, tol: float = TOL_REALITY) -> BandSample:
    minus, plus = branch_energies(params, k)
    is_real = abs(minus.imag) <= tol and abs(plus.imag) <= tol
    return BandSample(float(k), minus, plus, is_real)


def band_spectrum(params: ChainParams, grid_size: int = DEFAULT_GRID, tol: float = TOL_REALITY) -> BandSpectrum:
    """Sample both branches on the open grid ``k_m = m pi / (grid_size + 1)``.

    Args:
        params: The chain parameters.
        grid_size: The number of momenta.
        tol: The largest imaginary part a real sample may have.

    Raises:
        ValueError: If ``grid_size < 2``.

    Returns:
        The samples in increasing ``k``.
    """
    ks = interior_grid(grid_size)
    samples = [band_sample(params, k, tol) for k in ks]
    LOGGER.debug("Sampled %d momenta, %d complex", grid_size, sum(not s.is_real for s in samples))
    return BandSpectrum(params, samples, grid_size)


def ground_state_energy_density(params: ChainParams, quadrature_points: int = 64) -> Union[float, complex]:
    """The ground state energy per two-site cell in the thermodynamic limit.

    Computes ``-(1 / 2pi) ∫_0^pi (Λ+ + Λ-) dk`` with Gauss-Legendre quadrature on each half of the
    zone, the isotropic branches have a kink at ``pi / 2``.

    Args:
        params: The chain parameters.
        quadrature_points: Nodes per half zone.

    Raises:
        ValueError: If fewer than 16 nodes are requested.

    Returns:
        The energy per cell. It is complex if any branch value on the nodes is complex.
    """
    if quadrature_points < 16:
        raise ValueError(f"quadrature_points must be >= 16, got: `{quadrature_points}`")
    nodes, weights = np.polynomial.legendre.leggauss(quadrature_points)
    half = math.pi / 4
    total = 0j
    complex_seen = False
    for center in (math.pi / 4, 3 * math.pi / 4):
        for node, weight in zip(nodes, weights):
            minus, plus = branch_energies(params, center + half * node)
            complex_seen = complex_seen or minus.imag != 0 or plus.imag != 0
            total += half * weight * (minus + plus)
    energy = -total / (2 * math.pi)
    if complex_seen:
        return energy
    return real_if_close(energy)
