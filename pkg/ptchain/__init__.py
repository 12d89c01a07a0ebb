__version__ = "0.1.0"

import logging
from enum import Enum
from typing import NamedTuple, List, Optional, Tuple, Any


LOGGER = logging.getLogger("ptchain")


TOL_REALITY = 1e-9  #: Absolute bound on ``|Im Λ|`` for a band value to count as real (energy units)
TOL_MARGIN = 1e-12  #: Bound on the dimensionless reality margin, see :py:func:`~ptchain.reality.reality_margin`
TOL_INTERVAL = 1e-8  #: Resolution in ``k`` of forbidden interval endpoints
TOL_TOUCH = 1e-6  #: Largest ``|Λ+ - Λ-|`` still treated as a touching point of the branches
TOL_IMAG_ED = 1e-8  #: Largest ``|Im E|`` of a many-body eigenvalue still treated as real
TOL_MATCH = 1e-8  #: Per eigenvalue tolerance when two spectra are compared as multisets
DEFAULT_GRID = 1024  #: Default number of interior momenta in band scans
MAX_ED_SITES = 14  #: Largest chain that is ever built as a dense matrix

Momentum = float  #: Momentum per two-site cell in radians, the dispersion variable ``k``. Usually in ``(0, pi)``.


class ChainParams(NamedTuple):
    """The parameters of the dimerized XY chain in an imaginary staggered field.

    Bonds alternate between ``(j1, gamma1)`` and ``(j2, gamma2)``. The first site of every
    two-site cell feels the field ``h`` plus ``-i eta``, the second ``h`` plus ``+i eta``.

    Note:
        ``n_sites`` is only used by operations on finite chains (exact diagonalization and
        the free fermion assembly). Dispersion level functions ignore it.

    Args:
        j1: Exchange on the intra-cell bond.
        j2: Exchange on the inter-cell bond.
        gamma1: Anisotropy on the intra-cell bond.
        gamma2: Anisotropy on the inter-cell bond.
        h: The real transverse field, ``h >= 0``.
        eta: The strength of the imaginary staggered field, ``eta >= 0``.
        n_sites: Number of spins, even and at least ``4``.
    """

    j1: float
    j2: float
    gamma1: float = 0.0
    gamma2: float = 0.0
    h: float = 0.0
    eta: float = 0.0
    n_sites: int = 8

    @property
    def is_isotropic(self) -> bool:
        return self.gamma1 == 0 and self.gamma2 == 0

    @property
    def is_hermitian(self) -> bool:
        return self.eta == 0


class Boundary(Enum):
    """How the last spin of a finite chain is connected to the first."""

    PERIODIC = "periodic"
    OPEN = "open"

    @classmethod
    def from_string(cls, value: str) -> "Boundary":
        """Parse a string into a boundary condition.

        Args:
            value: The string to dispatch on.

        Raises:
            ValueError: If the string is not a known boundary condition.

        Returns:
            The Boundary member.
        """
        value = value.lower().strip()
        if value in ("periodic", "pbc"):
            return cls.PERIODIC
        if value in ("open", "obc"):
            return cls.OPEN
        raise ValueError(f"Unknown boundary condition, got: `{value}`")


class Mechanism(Enum):
    """Which of the two reality conditions fails at a momentum.

    ``INNER_ROOT_NEGATIVE`` is ``λμ - ν < 0`` and ``SUM_NEGATIVE`` is ``λ + μ < 0``. The second one
    can only hold where the first one already does.
    """

    NONE = "none"
    INNER_ROOT_NEGATIVE = "inner_root_negative"
    SUM_NEGATIVE = "sum_negative"


class MinimumKind(Enum):
    """Which combination of the exchanges sets the isotropic threshold."""

    SUM = "sum"  #: ``|J1 + J2|``, reached at ``k* = 0``
    DIFF = "diff"  #: ``|J1 - J2|``, reached at ``k* = pi / 2``


class SpecialMomentum(Enum):
    """The momenta where ``ν`` vanishes and the acoustic gap has a closed form."""

    K0 = 0.0
    KPI2 = 1.5707963267948966


class Reality(Enum):
    REAL = "real"
    BROKEN = "broken"


class Order(Enum):
    ORDERED = "ordered"
    DISORDERED = "disordered"
    UNDEFINED = "undefined"


class SignClass(Enum):
    """Whether a renormalization root keeps the sign of the exchanges."""

    FERRO_PRESERVING = "ferro_preserving"
    FERRO_FLIPPING = "ferro_flipping"


class RootChoice(Enum):
    """One of the four real roots of the renormalization quartic.

    ``A1`` is the larger positive root and ``A2`` the smaller one.
    """

    A1 = "a1"
    A2 = "a2"
    MINUS_A1 = "-a1"
    MINUS_A2 = "-a2"

    @classmethod
    def from_string(cls, value: str) -> "RootChoice":
        """Parse a root name like ``a1`` or ``-a2``.

        Args:
            value: The string to dispatch on.

        Raises:
            ValueError: If the string does not name one of the roots.

        Returns:
            The RootChoice member.
        """
        value = value.lower().strip().replace("_", "")
        for member in cls:
            if member.value == value:
                return member
        if value in ("minusa1", "-1"):
            return cls.MINUS_A1
        if value in ("minusa2", "-2"):
            return cls.MINUS_A2
        raise ValueError(f"Unknown root choice, got: `{value}`")


class BandSample(NamedTuple):
    """Both branches at a single momentum.

    Args:
        k: The momentum.
        lambda_minus: The acoustic branch ``Λ-(k)``.
        lambda_plus: The optical branch ``Λ+(k)``.
        is_real: Both branches have an imaginary part below ``TOL_REALITY``.
    """

    k: float
    lambda_minus: complex
    lambda_plus: complex
    is_real: bool


class BandSpectrum(NamedTuple):
    """The branches sampled on the open uniform grid ``k_m = m pi / (grid_size + 1)``."""

    params: ChainParams
    samples: List[BandSample]
    grid_size: int


class ForbiddenInterval(NamedTuple):
    """A maximal range of momenta where at least one branch is complex.

    Args:
        k_lo: Start of the range, ``0`` when it touches the zone edge.
        k_hi: End of the range, ``pi`` when it touches the zone edge.
        mechanism: The reality condition that fails inside the range.
    """

    k_lo: float
    k_hi: float
    mechanism: Mechanism


class RealityReport(NamedTuple):
    """Classification of the whole band as fully real or spontaneously broken.

    Args:
        params: The parameters that were scanned.
        fully_real: True iff ``forbidden_intervals`` is empty.
        forbidden_intervals: Ranges of momenta with complex energies, sorted by ``k_lo``.
        mechanism: The mechanism of the first forbidden interval, ``NONE`` when fully real.
        grid_size: Number of uniform grid points used in the scan.
    """

    params: ChainParams
    fully_real: bool
    forbidden_intervals: List[ForbiddenInterval]
    mechanism: Mechanism
    grid_size: int


class EtaThreshold(NamedTuple):
    """The isotropic threshold on the imaginary field.

    Args:
        eta_c: ``min(|J1 + J2|, |J1 - J2|)``.
        which_min: Which of the two combinations attains the minimum.
        k_star: The momentum where the breaking starts, ``0`` or ``pi / 2``.
    """

    eta_c: float
    which_min: MinimumKind
    k_star: float


class CriticalFields(NamedTuple):
    """The fields that close the acoustic gap at ``k = 0`` and ``k = pi / 2``.

    A field is ``None`` when its radicand is negative.
    """

    h_c1: Optional[float]
    h_c2: Optional[float]


class PhasePoint(NamedTuple):
    """One point of the ``(h, eta)`` phase diagram.

    Args:
        h: The transverse field.
        eta: The imaginary field.
        reality: Whether the whole band is real.
        order: ``ORDERED`` inside the window between the two critical fields.
        h_c_low: The smaller critical field when both are defined.
        h_c_high: The larger critical field when both are defined.
        h_c1: The field closing the gap at ``k = 0``, ``None`` if undefined.
        h_c2: The field closing the gap at ``k = pi / 2``, ``None`` if undefined.
        isotropic_class: The chain is isotropic, the transition then has no order parameter.
    """

    h: float
    eta: float
    reality: Reality
    order: Order
    h_c_low: Optional[float]
    h_c_high: Optional[float]
    h_c1: Optional[float]
    h_c2: Optional[float]
    isotropic_class: bool


class CounterpartSolution(NamedTuple):
    """A Hermitian chain with the same dispersion, built from one renormalization root.

    Note:
        The exchanges scale as ``(a J1, J2 / a)`` and the anisotropies as ``(a gamma1, gamma2 / a)``,
        which keeps both ``J1 J2`` and ``J1 gamma2 + J2 gamma1`` fixed. The counterpart has no
        imaginary field.

    Args:
        a: The renormalization factor, ``None`` when no real root exists.
        j1_prime: The renormalized intra-cell exchange.
        j2_prime: The renormalized inter-cell exchange.
        gamma1_prime: The renormalized intra-cell anisotropy.
        gamma2_prime: The renormalized inter-cell anisotropy.
        h_prime: The remapped field, ``None`` when its radicand is negative.
        sign_class: Whether the root keeps or flips the sign of the exchanges.
        valid: The counterpart exists.
        reason: Why the counterpart does not exist, ``None`` when valid.
    """

    a: Optional[float]
    j1_prime: Optional[float]
    j2_prime: Optional[float]
    gamma1_prime: Optional[float]
    gamma2_prime: Optional[float]
    h_prime: Optional[float]
    sign_class: Optional[SignClass]
    valid: bool
    reason: Optional[str] = None

    def as_params(self, n_sites: int = 8) -> ChainParams:
        """The counterpart as a Hermitian parameter set.

        Raises:
            ValueError: If the counterpart is not valid.
        """
        if not self.valid:
            raise ValueError(f"Counterpart is not valid, reason: `{self.reason}`")
        return ChainParams(
            j1=self.j1_prime,
            j2=self.j2_prime,
            gamma1=self.gamma1_prime,
            gamma2=self.gamma2_prime,
            h=self.h_prime,
            eta=0.0,
            n_sites=n_sites,
        )


class ManyBodyMatrix(NamedTuple):
    """The ``2^N`` dimensional matrix of the spin Hamiltonian.

    Note:
        Site ``0`` is the leftmost Kronecker factor and the basis state ``|1>`` of a site is spin
        down, so the parity ``S`` of a basis state is ``(-1)^(number of set bits)``.

    Args:
        n_sites: Number of spins.
        entries: The matrix as a ``scipy.sparse`` CSR matrix of complex entries.
        boundary: How the chain is closed.
        params: The parameters the matrix was built from.
    """

    n_sites: int
    entries: Any
    boundary: Boundary
    params: ChainParams

    @property
    def dimension(self) -> int:
        return 2 ** self.n_sites


class EDResult(NamedTuple):
    """All many-body eigenvalues split by the eigenvalue of ``S``.

    Args:
        eigenvalues: Every eigenvalue, even sector first.
        even_sector: Eigenvalues with ``S = +1``.
        odd_sector: Eigenvalues with ``S = -1``.
        fully_real: ``max_imag`` is below the tolerance used.
        max_imag: The largest ``|Im E|``.
        trace: The trace of the matrix the spectrum came from.
    """

    eigenvalues: Any
    even_sector: Any
    odd_sector: Any
    fully_real: bool
    max_imag: float
    trace: complex


class BogoliubovBlock(NamedTuple):
    """The single particle block at one momentum in the basis ``(a_k, b_k, a_-k^+, b_-k^+)``.

    Args:
        k: The momentum.
        matrix: The ``4 x 4`` complex block.
        eigenvalues: Its four eigenvalues, ``±Λ-`` and ``±Λ+``.
        gram_deviation: Frobenius norm of ``G - I`` where ``G`` is the Gram matrix of the
            normalized right eigenvectors. Zero exactly when the modes are orthogonal.
    """

    k: float
    matrix: Any
    eigenvalues: Any
    gram_deviation: float


class Command(Enum):
    BANDS = "bands"
    REALITY = "reality"
    ETA_C = "eta-c"
    CRITICAL_FIELDS = "critical-fields"
    PHASE_DIAGRAM = "phase-diagram"
    COUNTERPART = "counterpart"
    ED_CHECK = "ed-check"

    @classmethod
    def from_string(cls, value: str) -> "Command":
        """Parse a sub-command name, dashes and underscores are interchangeable.

        Raises:
            ValueError: If the string is not a known command.
        """
        value = value.lower().strip().replace("_", "-")
        for member in cls:
            if member.value == value:
                return member
        raise ValueError(f"Unknown command, got: `{value}`")


class OutputFormat(Enum):
    JSON = "json"
    CSV = "csv"

    @classmethod
    def from_string(cls, value: str) -> "OutputFormat":
        """Parse an output format.

        Raises:
            ValueError: If the string is not a known format.
        """
        value = value.lower().strip()
        if value == "json":
            return cls.JSON
        if value == "csv":
            return cls.CSV
        raise ValueError(f"Unknown output format, got: `{value}`")


class RunConfig(NamedTuple):
    """Everything a command line run depends on, echoed in every report.

    Args:
        command: The sub-command.
        params: The chain parameters after presets, config file and flags are merged.
        grid_size: Number of interior momenta in scans.
        output_format: JSON or CSV.
        output_path: Where to write, ``None`` for stdout.
        preset: The name of the preset the parameters started from.
        h_range: ``(start, stop, num)`` of the field sweep.
        eta_range: ``(start, stop, num)`` of the imaginary field sweep.
        root: ``a1``, ``a2``, ``-a1``, ``-a2`` or ``all``.
        boundary: Boundary condition of exact diagonalization.
        eta_max: Upper end of threshold bisections.
        tol: Width of threshold bisections.
        max_sites: Largest chain exact diagonalization may build.
        units_eta: Divide band energies by ``eta``.
    """

    command: Command
    params: ChainParams
    grid_size: int = DEFAULT_GRID
    output_format: OutputFormat = OutputFormat.JSON
    output_path: Optional[str] = None
    preset: Optional[str] = None
    h_range: Optional[Tuple[float, float, int]] = None
    eta_range: Optional[Tuple[float, float, int]] = None
    root: str = "a1"
    boundary: Boundary = Boundary.PERIODIC
    eta_max: Optional[float] = None
    tol: float = TOL_INTERVAL
    max_sites: int = 12
    units_eta: bool = False


def validate_params(params: ChainParams) -> ChainParams:
    """Check the sign conventions on the fields.

    Args:
        params: The parameters to check.

    Raises:
        ValueError: If ``h`` or ``eta`` are negative.

    Returns:
        The parameters, unchanged.
    """
    if params.h < 0:
        raise ValueError(f"The transverse field must be non-negative, got: `{params.h}`")
    if params.eta < 0:
        raise ValueError(f"The imaginary field must be non-negative, got: `{params.eta}`")
    return params


from ptchain.dispersion import (
    lambda_k,
    mu_k,
    nu_k,
    branch_energies,
    isotropic_branch_energies,
    band_spectrum,
    ground_state_energy_density,
)
from ptchain.reality import (
    reality_margin,
    breaking_mechanism,
    eta_critical_isotropic,
    classify_reality,
    eta_critical_numeric,
    branch_touch_points,
    monotonicity_violations,
)
from ptchain.critical import (
    gap_at_special_k,
    critical_fields,
    classify_phase,
    phase_diagram,
)
from ptchain.counterpart import (
    renormalization_roots,
    isotropic_counterpart,
    anisotropic_counterpart,
    verify_spectrum_equality,
)
from ptchain.exact import (
    build_hamiltonian,
    complex_spectrum,
    free_fermion_assembly,
    bogoliubov_block,
    reality_threshold_ed,
    finite_size_eta_threshold,
)
