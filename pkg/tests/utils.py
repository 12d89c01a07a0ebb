import math
import random
from typing import Optional
import numpy as np
from ptchain import ChainParams
from ptchain.reality import reality_margin
from ptchain.utils import interior_grid


FIG1_I = ChainParams(j1=2.0, j2=0.4, h=1.0, eta=1.0)
FIG1_II = ChainParams(j1=1.6, j2=0.8, h=1.0, eta=1.0)
FIG1_III = ChainParams(j1=1.4, j2=-0.6, h=1.0, eta=1.0)
FIG2_SOLID = ChainParams(j1=1.1, j2=0.1, gamma1=2.4, gamma2=-0.8, h=0.2, eta=1.0)
FIG2_DOTTED = ChainParams(j1=1.1, j2=0.1, gamma1=2.4, gamma2=-0.8, h=1.5, eta=1.0)


def random_coupling(low: float = 0.1, high: float = 2.0, signed: bool = True) -> float:
    value = random.uniform(low, high)
    if signed and random.random() < 0.5:
        return -value
    return value


def random_momentum() -> float:
    return random.uniform(0.01, math.pi - 0.01)


def random_params(
    isotropic: bool = False, hermitian: bool = False, eta: Optional[float] = None, n_sites: int = 8
) -> ChainParams:
    gamma1 = 0.0 if isotropic else random_coupling(0.0, 1.5)
    gamma2 = 0.0 if isotropic else random_coupling(0.0, 1.5)
    if eta is None:
        eta = 0.0 if hermitian else random.uniform(0.0, 2.0)
    return ChainParams(
        j1=random_coupling(),
        j2=random_coupling(),
        gamma1=gamma1,
        gamma2=gamma2,
        h=random.uniform(0.0, 2.0),
        eta=eta,
        n_sites=n_sites,
    )


def random_real_isotropic(fraction: float = 0.9) -> ChainParams:
    """An isotropic chain with ``eta`` below ``fraction`` of its threshold."""
    while True:
        params = random_params(isotropic=True, eta=0.0)
        eta_c = min(abs(params.j1 + params.j2), abs(params.j1 - params.j2))
        if eta_c > 0.05:
            return params._replace(eta=random.uniform(0.0, fraction * eta_c))


def min_margin(params: ChainParams, grid_size: int = 1000) -> float:
    return float(np.min(reality_margin(params, interior_grid(grid_size))))
