import math
from typing import List, Tuple, Optional
import numpy as np
import scipy.linalg
import scipy.sparse
from ptchain import (
    ChainParams,
    Boundary,
    SpecialMomentum,
    ManyBodyMatrix,
    EDResult,
    BogoliubovBlock,
    LOGGER,
    TOL_IMAG_ED,
    MAX_ED_SITES,
    validate_params,
)
from ptchain.dispersion import branch_energies
from ptchain.critical import special_radicands
from ptchain.utils import principal_sqrt, sort_complex, bisect_predicate


IDENTITY = scipy.sparse.identity(2, dtype=complex, format="csr")
SIGMA_X = scipy.sparse.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex))
SIGMA_Y = scipy.sparse.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex))
SIGMA_Z = scipy.sparse.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex))
MAX_BISECTION_SITES = 12
PAIR_TOL = 1e-10


def check_sites(n_sites: int, max_sites: int = MAX_ED_SITES) -> int:
    """Make sure a chain can be built.

    Raises:
        ValueError: If ``n_sites`` is odd, below ``4`` or above ``max_sites``.
    """
    if n_sites % 2 != 0 or n_sites < 4 or n_sites > max_sites:
        raise ValueError(f"n_sites must be even and between 4 and {max_sites}, got: `{n_sites}`")
    return n_sites


def bond_couplings(params: ChainParams, site: int) -> Tuple[float, float]:
    """The ``(J, gamma)`` of the bond between ``site`` and the next site.

    Bonds that start on an even site are intra-cell bonds.
    """
    if site % 2 == 0:
        return params.j1, params.gamma1
    return params.j2, params.gamma2


def chain_bonds(n_sites: int, boundary: Boundary) -> List[Tuple[int, int]]:
    bonds = [(i, i + 1) for i in range(n_sites - 1)]
    if boundary is Boundary.PERIODIC:
        bonds.append((n_sites - 1, 0))
    return bonds


def site_operator(op: scipy.sparse.csr_matrix, site: int, n_sites: int) -> scipy.sparse.csr_matrix:
    """Embed a single site operator, site ``0`` is the leftmost Kronecker factor."""
    left = scipy.sparse.identity(2 ** site, dtype=complex, format="csr")
    right = scipy.sparse.identity(2 ** (n_sites - site - 1), dtype=complex, format="csr")
    return scipy.sparse.kron(scipy.sparse.kron(left, op, format="csr"), right, format="csr")


def build_hamiltonian(params: ChainParams, boundary: Boundary = Boundary.PERIODIC) -> ManyBodyMatrix:
    """Assemble the spin Hamiltonian from Pauli operators.

    The bond between sites ``j`` and ``j + 1`` is ``(J + gamma) / 2 XX + (J - gamma) / 2 YY`` with the
    intra-cell couplings on even ``j``. Site ``j`` feels ``-h / 2 Z`` and ``i eta / 2 (-1)^(j + 1) Z``,
    so the first site of every cell gets ``-i eta / 2``.

    Args:
        params: The chain parameters, ``n_sites`` sets the size.
        boundary: Whether the last site couples back to the first through an inter-cell bond.

    Raises:
        ValueError: If the size or the parameters are invalid.

    Returns:
        The sparse many-body matrix.
    """
    validate_params(params)
    n_sites = check_sites(params.n_sites)
    xs = [site_operator(SIGMA_X, j, n_sites) for j in range(n_sites)]
    ys = [site_operator(SIGMA_Y, j, n_sites) for j in range(n_sites)]
    zs = [site_operator(SIGMA_Z, j, n_sites) for j in range(n_sites)]
    dim = 2 ** n_sites
    ham = scipy.sparse.csr_matrix((dim, dim), dtype=complex)
    for i, j in chain_bonds(n_sites, boundary):
        coupling, gamma = bond_couplings(params, i)
        ham = ham + 0.5 * (coupling + gamma) * (xs[i] @ xs[j]) + 0.5 * (coupling - gamma) * (ys[i] @ ys[j])
    for j in range(n_sites):
        ham = ham + (-0.5 * params.h + 0.5j * params.eta * (-1) ** (j + 1)) * zs[j]
    LOGGER.debug("Built a %d x %d matrix with %d entries", dim, dim, ham.nnz)
    return ManyBodyMatrix(n_sites, ham.tocsr(), boundary, params)


def parity_signs(n_sites: int) -> np.ndarray:
    """The diagonal of ``S``, ``(-1)^(number of down spins)`` for every basis state."""
    index = np.arange(2 ** n_sites)
    count = np.zeros_like(index)
    for bit in range(n_sites):
        count += (index >> bit) & 1
    return 1 - 2 * (count % 2)


def parity_operator(n_sites: int) -> scipy.sparse.csr_matrix:
    """The operator ``S``, the product of ``Z`` over all sites."""
    return scipy.sparse.diags(parity_signs(n_sites).astype(complex), format="csr")


def reflection_permutation(n_sites: int) -> np.ndarray:
    """The basis permutation that maps site ``j`` to site ``N - 1 - j``."""
    index = np.arange(2 ** n_sites)
    reflected = np.zeros_like(index)
    for bit in range(n_sites):
        reflected |= ((index >> bit) & 1) << (n_sites - 1 - bit)
    return reflected


def _max_entry(matrix: scipy.sparse.spmatrix) -> float:
    if matrix.nnz == 0:
        return 0.0
    return float(abs(matrix).max())


def hermiticity_residual(matrix: ManyBodyMatrix) -> float:
    """The largest entry of ``M - M^+``."""
    return _max_entry(matrix.entries - matrix.entries.conj().T)


def parity_residual(matrix: ManyBodyMatrix) -> float:
    """The largest entry of ``[M, S]``."""
    parity = parity_operator(matrix.n_sites)
    return _max_entry(matrix.entries @ parity - parity @ matrix.entries)


def pt_residual(matrix: ManyBodyMatrix) -> float:
    """The largest entry of ``P conj(M) P - M`` with ``P`` the reflection of the chain."""
    perm = reflection_permutation(matrix.n_sites)
    reflected = matrix.entries.conj()[perm][:, perm]
    return _max_entry(reflected.tocsr() - matrix.entries)


def _eigvals(block: np.ndarray, label: str) -> np.ndarray:
    try:
        return scipy.linalg.eigvals(block)
    except scipy.linalg.LinAlgError:
        LOGGER.error("Eigensolver did not converge on the %s block of size %d", label, block.shape[0])
        raise


def complex_spectrum(matrix: ManyBodyMatrix, tol: float = TOL_IMAG_ED) -> EDResult:
    """Every eigenvalue of the many-body matrix, split by parity.

    ``S`` is diagonal in the spin basis, so each sector is an index subset and is solved
    on its own with a dense general eigensolver.

    Args:
        matrix: The many-body matrix.
        tol: The largest ``|Im E|`` of a spectrum that counts as real.

    Raises:
        scipy.linalg.LinAlgError: If the eigensolver does not converge.

    Returns:
        The spectrum, even sector first.
    """
    signs = parity_signs(matrix.n_sites)
    sectors = []
    for sign, label in ((1, "even"), (-1, "odd")):
        index = np.flatnonzero(signs == sign)
        block = matrix.entries[index][:, index].toarray()
        sectors.append(_eigvals(block, label))
    eigenvalues = np.concatenate(sectors)
    max_imag = float(np.max(np.abs(eigenvalues.imag)))
    trace = complex(matrix.entries.diagonal().sum())
    LOGGER.debug("Solved %d eigenvalues, largest imaginary part %.3g", len(eigenvalues), max_imag)
    return EDResult(eigenvalues, sectors[0], sectors[1], max_imag < tol, max_imag, trace)


def occupation_energies(modes: np.ndarray, parity: Optional[int] = None) -> np.ndarray:
    """``sum_m eps_m (n_m - 1/2)`` over every occupation pattern of the modes.

    Args:
        modes: The quasiparticle energies.
        parity: Keep only patterns with this number of occupied modes modulo 2.

    Returns:
        The many-body energies.
    """
    modes = np.asarray(modes, dtype=complex)
    n_modes = len(modes)
    patterns = (np.arange(2 ** n_modes)[:, None] >> np.arange(n_modes)) & 1
    energies = (patterns - 0.5) @ modes
    if parity is None:
        return energies
    return energies[patterns.sum(axis=1) % 2 == parity]


def sector_modes(params: ChainParams, n_sites: int, odd: bool) -> np.ndarray:
    """Quasiparticle energies of one parity sector of the closed chain.

    The even sector has antiperiodic fermions, ``q = pi (2m + 1) / L``, and the odd sector
    periodic ones, ``q = 2 pi m / L``, with ``L = N / 2`` cells and ``k = q / 2``. A pair
    ``(q, -q)`` gives four modes ``Λ+, Λ-, Λ+, Λ-``. At ``q = 0`` and ``q = pi`` the momentum is its
    own partner and gives two modes ``sqrt(λ) ± sqrt(μ)`` that keep their signs.

    Args:
        params: The chain parameters.
        n_sites: The chain length.
        odd: Build the odd sector.

    Returns:
        The ``n_sites`` mode energies.
    """
    cells = n_sites // 2
    modes = []
    for m in range(cells):
        # q = pi * step / cells
        step = 2 * m if odd else 2 * m + 1
        if step == 0 or step == cells:
            which = SpecialMomentum.K0 if step == 0 else SpecialMomentum.KPI2
            lam, mu = special_radicands(params, which)
            root_lam, root_mu = principal_sqrt(lam), principal_sqrt(mu)
            modes.extend([root_lam + root_mu, root_lam - root_mu])
        elif step < cells:
            minus, plus = branch_energies(params, math.pi * step / (2 * cells))
            modes.extend([plus, minus, plus, minus])
    return np.array(modes, dtype=complex)


def bdg_matrix(params: ChainParams, n_sites: int) -> np.ndarray:
    """The ``2N x 2N`` real space Bogoliubov-de Gennes matrix of the open chain.

    In the basis ``(c, c^+)`` it reads ``[[A, B], [-B, -A]]`` with hopping and on-site terms in
    ``A`` and the antisymmetric pairing in ``B``.
    """
    a = np.zeros((n_sites, n_sites), dtype=complex)
    b = np.zeros((n_sites, n_sites), dtype=complex)
    for j in range(n_sites):
        a[j, j] = params.h + 1j * params.eta * (-1) ** j
    for j in range(n_sites - 1):
        coupling, gamma = bond_couplings(params, j)
        a[j, j + 1] = a[j + 1, j] = coupling
        b[j, j + 1] = gamma
        b[j + 1, j] = -gamma
    return np.block([[a, b], [-b, -a]])


def positive_half(eigenvalues: np.ndarray, tol: float = PAIR_TOL) -> np.ndarray:
    """Pick one member of every ``±eps`` pair, the larger one by real and then imaginary part."""
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    real_key = np.where(np.abs(eigenvalues.real) > tol, eigenvalues.real, 0.0)
    imag_key = np.where(np.abs(eigenvalues.imag) > tol, eigenvalues.imag, 0.0)
    order = np.lexsort((imag_key, real_key))
    return eigenvalues[order][len(eigenvalues) // 2 :]


def free_fermion_assembly(
    params: ChainParams, n_sites: Optional[int] = None, boundary: Boundary = Boundary.PERIODIC
) -> np.ndarray:
    """The many-body spectrum built from single particle energies.

    For the closed chain each parity sector gets its own momentum grid and keeps the occupation
    patterns of its own parity. The open chain has no boundary bond to twist, so every pattern
    of the modes of :py:func:`bdg_matrix` is kept.

    Args:
        params: The chain parameters.
        n_sites: The chain length, defaults to ``params.n_sites``.
        boundary: How the chain is closed.

    Raises:
        ValueError: If the size is invalid.

    Returns:
        All ``2^N`` energies sorted by real and then imaginary part.
    """
    n_sites = check_sites(params.n_sites if n_sites is None else n_sites)
    if boundary is Boundary.PERIODIC:
        even = occupation_energies(sector_modes(params, n_sites, odd=False), parity=0)
        odd = occupation_energies(sector_modes(params, n_sites, odd=True), parity=1)
        return sort_complex(np.concatenate([even, odd]))
    if boundary is Boundary.OPEN:
        modes = positive_half(_eigvals(bdg_matrix(params, n_sites), "Bogoliubov-de Gennes"))
        return sort_complex(occupation_energies(modes))
    raise ValueError(f"Unknown boundary condition, got: `{boundary}`")


def bogoliubov_block(params: ChainParams, k: float) -> BogoliubovBlock:
    """The single particle block at one momentum.

    The basis is ``(a_q, b_q, a_-q^+, b_-q^+)`` with ``q = 2k``, ``a`` on the first and ``b`` on the
    second site of a cell. Its eigenvalues are ``±Λ-`` and ``±Λ+``. The right eigenvectors are
    orthogonal only without the imaginary field.

    Args:
        params: The chain parameters.
        k: The momentum.

    Returns:
        The block, its eigenvalues and the deviation of its eigenvectors from orthonormality.
    """
    q = 2 * k
    phase = np.exp(-1j * q)
    f = params.j1 + params.j2 * phase
    f_bar = params.j1 + params.j2 * np.conj(phase)
    g = params.gamma1 - params.gamma2 * phase
    g_bar = params.gamma1 - params.gamma2 * np.conj(phase)
    e_a = params.h + 1j * params.eta
    e_b = params.h - 1j * params.eta
    matrix = np.array(
        [[e_a, f, 0, g], [f_bar, e_b, -g_bar, 0], [0, -g, -e_a, -f], [g_bar, 0, -f_bar, -e_b]], dtype=complex
    )
    if params.is_hermitian:
        values, vectors = scipy.linalg.eigh(matrix)
    else:
        values, vectors = scipy.linalg.eig(matrix)
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    gram = vectors.conj().T @ vectors
    deviation = float(np.linalg.norm(gram - np.eye(4)))
    return BogoliubovBlock(float(k), matrix, sort_complex(values), deviation)


def reality_threshold_ed(
    params: ChainParams,
    n_sites: Optional[int] = None,
    eta_max: Optional[float] = None,
    tol: float = 1e-6,
    boundary: Boundary = Boundary.PERIODIC,
) -> float:
    """The largest imaginary field with a real many-body spectrum, found by bisection.

    Args:
        params: The chain parameters, ``eta`` is ignored.
        n_sites: The chain length, defaults to ``params.n_sites``.
        eta_max: The upper end of the bracket, defaults to ``|J1| + |J2| + 1``.
        tol: The width of the final bracket.
        boundary: How the chain is closed.

    Raises:
        ValueError: If the chain is longer than 12 sites or the bracket is degenerate.

    Returns:
        The threshold within ``tol``.
    """
    n_sites = check_sites(params.n_sites if n_sites is None else n_sites, MAX_BISECTION_SITES)
    if eta_max is None:
        eta_max = abs(params.j1) + abs(params.j2) + 1.0
    if eta_max <= 0:
        raise ValueError(f"eta_max must be positive, got: `{eta_max}`")
    template = params._replace(n_sites=n_sites)

    def real_at(eta: float) -> bool:
        return complex_spectrum(build_hamiltonian(template._replace(eta=eta), boundary)).fully_real

    if not real_at(0.0):
        raise ValueError(f"Many-body spectrum is complex at eta = 0 for: `{template}`")
    if real_at(eta_max):
        LOGGER.warning("Many-body spectrum is still real at eta_max = %g", eta_max)
        return float(eta_max)
    return float(bisect_predicate(real_at, 0.0, eta_max, tol))


def finite_size_eta_threshold(params: ChainParams, n_sites: Optional[int] = None) -> float:
    """The exact threshold of a closed isotropic chain of ``N`` sites.

    The union of both sector grids is ``k = pi m / N``, and a mode turns complex once ``eta``
    exceeds ``|J1 + J2 e^(-2ik)|`` there.

    Args:
        params: The chain parameters.
        n_sites: The chain length, defaults to ``params.n_sites``.

    Raises:
        ValueError: If the chain is anisotropic or the size is invalid.

    Returns:
        The smallest ``sqrt(J1^2 + J2^2 + 2 J1 J2 cos 2k)`` on the grid.
    """
    if not params.is_isotropic:
        raise ValueError(
            f"The finite size threshold needs gamma1 = gamma2 = 0, got: `{params.gamma1}` and `{params.gamma2}`"
        )
    n_sites = check_sites(params.n_sites if n_sites is None else n_sites)
    ks = math.pi * np.arange(n_sites) / n_sites
    hopping = params.j1 ** 2 + params.j2 ** 2 + 2 * params.j1 * params.j2 * np.cos(2 * ks)
    return float(np.sqrt(np.maximum(hopping, 0.0)).min())
