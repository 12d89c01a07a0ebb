import sys
import csv
import json
import logging
import argparse
from typing import Any, Dict, List, Optional, Sequence, TextIO
import numpy as np
import scipy.linalg
from ptchain import (
    __version__,
    ChainParams,
    Boundary,
    Command,
    OutputFormat,
    RootChoice,
    RunConfig,
    SpecialMomentum,
    CounterpartSolution,
    LOGGER,
    TOL_REALITY,
    TOL_MARGIN,
    TOL_INTERVAL,
    TOL_TOUCH,
    TOL_IMAG_ED,
    TOL_MATCH,
    DEFAULT_GRID,
)
from ptchain.dispersion import band_spectrum, ground_state_energy_density
from ptchain.reality import classify_reality, eta_critical_isotropic, eta_critical_numeric, branch_touch_points
from ptchain.critical import critical_fields, gap_at_special_k, phase_diagram
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
    hermiticity_residual,
    parity_residual,
    pt_residual,
)
from ptchain.utils import match_spectra, conjugation_residual


EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

PARAM_FIELDS = ("j1", "j2", "gamma1", "gamma2", "h", "eta", "n_sites")
DEFAULT_PARAMS = ChainParams(j1=1.0, j2=0.5, gamma1=0.0, gamma2=0.0, h=1.0, eta=0.0, n_sites=8)
PRESETS = {
    "fig1-i": ChainParams(j1=2.0, j2=0.4, h=1.0, eta=1.0),
    "fig1-ii": ChainParams(j1=1.6, j2=0.8, h=1.0, eta=1.0),
    "fig1-iii": ChainParams(j1=1.4, j2=-0.6, h=1.0, eta=1.0),
    "fig2-solid": ChainParams(j1=1.1, j2=0.1, gamma1=2.4, gamma2=-0.8, h=0.2, eta=1.0),
    "fig2-dotted": ChainParams(j1=1.1, j2=0.1, gamma1=2.4, gamma2=-0.8, h=1.5, eta=1.0),
}
CSV_COMMANDS = (Command.BANDS, Command.PHASE_DIAGRAM)

SCHEMAS = {
    Command.BANDS: {
        "k": "momentum per two-site cell in radians, on the open grid m pi / (grid + 1)",
        "lambda_minus": "acoustic branch, principal square root, {re, im}",
        "lambda_plus": "optical branch, principal square root, {re, im}",
        "is_real": "both branches have |Im| <= tol_reality",
        "fully_real": "every sample is real",
        "energy_unit": "'eta' when energies are divided by eta, else 'absolute'",
        "ground_state_energy_per_cell": "-(1/2pi) integral of the branch sum over (0, pi), {re, im}",
    },
    Command.REALITY: {
        "fully_real": "no momentum has a complex branch",
        "mechanism": "failing condition of the lowest forbidden interval",
        "forbidden_intervals": "list of {k_lo, k_hi, mechanism}",
        "touch_points": "momenta where the two branches coincide",
    },
    Command.ETA_C: {
        "eta_c": "min(|J1 + J2|, |J1 - J2|), null for anisotropic chains",
        "which_min": "SUM or DIFF, the combination that sets eta_c",
        "k_star": "momentum where breaking starts",
        "eta_c_numeric": "bisected threshold with h and the anisotropies held fixed",
    },
    Command.CRITICAL_FIELDS: {
        "h_c1": "field closing the acoustic gap at k = 0, null if the radicand is negative",
        "h_c2": "field closing the acoustic gap at k = pi / 2, null if the radicand is negative",
        "gap_k0": "signed acoustic gap at k = 0 for the given h, {re, im}",
        "gap_kpi2": "signed acoustic gap at k = pi / 2 for the given h, {re, im}",
    },
    Command.PHASE_DIAGRAM: {
        "h": "transverse field",
        "eta": "imaginary field",
        "reality": "REAL or BROKEN",
        "order": "ORDERED, DISORDERED or UNDEFINED",
        "h_c1": "critical field at k = 0, null if undefined",
        "h_c2": "critical field at k = pi / 2, null if undefined",
        "isotropic_class": "no anisotropy, the transition has no order parameter",
    },
    Command.COUNTERPART: {
        "root": "which root of the renormalization quartic",
        "a": "renormalization factor",
        "j1_prime": "a J1",
        "j2_prime": "J2 / a",
        "gamma1_prime": "a gamma1",
        "gamma2_prime": "gamma2 / a",
        "h_prime": "field of the counterpart, null if its square is negative",
        "sign_class": "FERRO_PRESERVING for a > 0, FERRO_FLIPPING for a < 0",
        "valid": "the counterpart exists",
        "reason": "why it does not exist",
        "max_deviation": "largest branch difference on a 1000 point grid",
    },
    Command.ED_CHECK: {
        "dimension": "2^n_sites",
        "fully_real": "largest |Im E| below tol_imag_ed",
        "max_imag": "largest |Im E|",
        "assembly_residual": "worst distance between exact and free fermion spectra",
        "conjugation_residual": "distance of the spectrum from its complex conjugate",
        "pt_residual": "largest entry of P conj(M) P - M",
        "parity_residual": "largest entry of [M, S]",
        "hermiticity_residual": "largest entry of M - M^+, null when eta != 0",
        "trace_residual": "|sum of eigenvalues - trace|",
        "passed": "every check is within its tolerance",
    },
}


def fmt(value: float) -> str:
    return "%.17g" % value


def complex_json(value: complex) -> Dict[str, float]:
    value = complex(value)
    return {"re": float(value.real), "im": float(value.imag)}


def optional_json(value: Optional[float]) -> Optional[float]:
    return None if value is None else float(value)


def create_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("chain parameters")
    group.add_argument("--j1", type=float, help="intra-cell exchange")
    group.add_argument("--j2", type=float, help="inter-cell exchange")
    group.add_argument("--gamma1", type=float, help="intra-cell anisotropy")
    group.add_argument("--gamma2", type=float, help="inter-cell anisotropy")
    group.add_argument("--h", type=float, help="transverse field, >= 0")
    group.add_argument("--eta", type=float, help="imaginary staggered field, >= 0")
    group.add_argument("--n-sites", dest="n_sites", type=int, help="chain length for finite chains")
    group.add_argument("--preset", choices=sorted(PRESETS), help="start from the parameters of a figure")
    group.add_argument("--config", help="key=value file, flags given on the command line win")
    output = common.add_argument_group("output")
    output.add_argument("--grid", type=int, help=f"interior momenta in scans (default {DEFAULT_GRID})")
    output.add_argument("--format", choices=[f.value for f in OutputFormat], default="json")
    output.add_argument("--out", help="output file, stdout when missing")
    output.add_argument("--log-level", default="warning", help="logging level, logs go to stderr")

    parser = argparse.ArgumentParser(
        prog="ptchain",
        description="Bands, PT breaking thresholds, critical fields and Hermitian counterparts of a dimerized "
        "XY chain in an imaginary staggered field.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    bands = commands.add_parser(
        Command.BANDS.value,
        parents=[common],
        help="sample both branches",
        description="Columns: k, re_minus, im_minus, re_plus, im_plus, is_real.",
    )
    bands.add_argument("--units-eta", action="store_true", help="divide energies by eta")

    commands.add_parser(Command.REALITY.value, parents=[common], help="forbidden momentum intervals")

    eta_c = commands.add_parser(Command.ETA_C.value, parents=[common], help="threshold of the imaginary field")
    eta_c.add_argument("--eta-max", type=float, help="upper end of the bisection")
    eta_c.add_argument("--tol", type=float, default=TOL_INTERVAL, help="width of the bisection")

    commands.add_parser(Command.CRITICAL_FIELDS.value, parents=[common], help="fields closing the acoustic gap")

    phase = commands.add_parser(
        Command.PHASE_DIAGRAM.value,
        parents=[common],
        help="sweep (h, eta)",
        description="Columns: h, eta, reality, order, h_c1, h_c2.",
    )
    phase.add_argument("--h-range", nargs=3, type=float, metavar=("START", "STOP", "NUM"), required=True)
    phase.add_argument("--eta-range", nargs=3, type=float, metavar=("START", "STOP", "NUM"), required=True)

    counterpart = commands.add_parser(Command.COUNTERPART.value, parents=[common], help="Hermitian counterpart")
    counterpart.add_argument(
        "--root", default="a1", choices=[r.value for r in RootChoice] + ["all"], help="root of the quartic"
    )

    ed = commands.add_parser(Command.ED_CHECK.value, parents=[common], help="exact diagonalization cross check")
    ed.add_argument("--boundary", default="periodic", choices=[b.value for b in Boundary])
    ed.add_argument("--max-sites", type=int, default=12, help="largest chain to diagonalize")
    return parser


def read_config_file(path: str) -> Dict[str, str]:
    """Read ``key=value`` lines, ``#`` starts a comment.

    Raises:
        ValueError: If a line has no ``=`` or names an unknown key.
    """
    values = {}
    with open(path) as f:
        for number, line in enumerate(f, 1):
            line = line.split("#", maxsplit=1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"Config line {number} is not key=value, got: `{line}`")
            key, value = (part.strip() for part in line.split("=", maxsplit=1))
            key = key.replace("-", "_")
            if key not in PARAM_FIELDS + ("grid",):
                raise ValueError(f"Unknown config key, got: `{key}`")
            values[key] = value
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, preset, config file and flags, later sources win.

    Raises:
        ValueError: If a value is malformed or CSV is asked of a command without a table.
    """
    command = Command.from_string(args.command)
    merged: Dict[str, Any] = DEFAULT_PARAMS._asdict()
    merged["grid"] = DEFAULT_GRID
    if args.preset is not None:
        merged.update(PRESETS[args.preset]._asdict())
    from_file = read_config_file(args.config) if args.config else {}
    for key, value in from_file.items():
        merged[key] = int(value) if key in ("n_sites", "grid") else float(value)
    for key in PARAM_FIELDS + ("grid",):
        value = getattr(args, key, None)
        if value is None:
            continue
        if key in from_file:
            LOGGER.info("Flag --%s=%s overrides %s=%s from the config file", key, value, key, from_file[key])
        merged[key] = value
    grid_size = merged.pop("grid")
    params = ChainParams(**merged)
    output_format = OutputFormat.from_string(args.format)
    if output_format is OutputFormat.CSV and command not in CSV_COMMANDS:
        raise ValueError(f"CSV output is only available for bands and phase-diagram, got: `{command.value}`")
    h_range = getattr(args, "h_range", None)
    eta_range = getattr(args, "eta_range", None)
    return RunConfig(
        command=command,
        params=params,
        grid_size=grid_size,
        output_format=output_format,
        output_path=args.out,
        preset=args.preset,
        h_range=None if h_range is None else (h_range[0], h_range[1], int(h_range[2])),
        eta_range=None if eta_range is None else (eta_range[0], eta_range[1], int(eta_range[2])),
        root=getattr(args, "root", "a1"),
        boundary=Boundary.from_string(getattr(args, "boundary", "periodic")),
        eta_max=getattr(args, "eta_max", None),
        tol=getattr(args, "tol", TOL_INTERVAL),
        max_sites=getattr(args, "max_sites", 12),
        units_eta=getattr(args, "units_eta", False),
    )


def config_json(config: RunConfig) -> Dict[str, Any]:
    echo = {
        "command": config.command.value,
        "params": config.params._asdict(),
        "grid_size": config.grid_size,
        "format": config.output_format.value,
        "preset": config.preset,
    }
    if config.command is Command.BANDS:
        echo["units_eta"] = config.units_eta
    if config.command is Command.ETA_C:
        echo["eta_max"] = config.eta_max
        echo["tol"] = config.tol
    if config.command is Command.PHASE_DIAGRAM:
        echo["h_range"] = list(config.h_range)
        echo["eta_range"] = list(config.eta_range)
    if config.command is Command.COUNTERPART:
        echo["root"] = config.root
    if config.command is Command.ED_CHECK:
        echo["boundary"] = config.boundary.value
        echo["max_sites"] = config.max_sites
    return echo


class Report(object):
    """The pieces of one run: JSON results, an optional table and the exit code."""

    def __init__(self) -> None:
        self.results: Dict[str, Any] = {}
        self.reasons: Dict[str, str] = {}
        self.checks: Dict[str, bool] = {}
        self.header: List[str] = []
        self.rows: List[List[str]] = []
        self.exit_code = EXIT_OK


def cmd_bands(config: RunConfig) -> Report:
    report = Report()
    spectrum = band_spectrum(config.params, config.grid_size)
    in_eta_units = config.units_eta and config.params.eta != 0
    if config.units_eta and not in_eta_units:
        LOGGER.warning("Energies can not be given in units of eta = 0, they stay absolute")
    scale = config.params.eta if in_eta_units else 1.0
    samples = []
    report.header = ["k", "re_minus", "im_minus", "re_plus", "im_plus", "is_real"]
    for sample in spectrum.samples:
        minus = sample.lambda_minus / scale
        plus = sample.lambda_plus / scale
        samples.append(
            {
                "k": sample.k,
                "lambda_minus": complex_json(minus),
                "lambda_plus": complex_json(plus),
                "is_real": sample.is_real,
            }
        )
        report.rows.append(
            [fmt(sample.k), fmt(minus.real), fmt(minus.imag), fmt(plus.real), fmt(plus.imag), str(sample.is_real).lower()]
        )
    report.results = {
        "samples": samples,
        "fully_real": all(s.is_real for s in spectrum.samples),
        "energy_unit": "eta" if in_eta_units else "absolute",
        "ground_state_energy_per_cell": complex_json(ground_state_energy_density(config.params) / scale),
    }
    return report


def cmd_reality(config: RunConfig) -> Report:
    report = Report()
    reality = classify_reality(config.params, config.grid_size)
    report.results = {
        "fully_real": reality.fully_real,
        "mechanism": reality.mechanism.name,
        "forbidden_intervals": [
            {"k_lo": i.k_lo, "k_hi": i.k_hi, "mechanism": i.mechanism.name} for i in reality.forbidden_intervals
        ],
        "touch_points": branch_touch_points(config.params, config.grid_size),
    }
    return report


def cmd_eta_c(config: RunConfig) -> Report:
    report = Report()
    params = config.params
    if params.is_isotropic:
        threshold = eta_critical_isotropic(params)
        report.results.update(
            {"eta_c": threshold.eta_c, "which_min": threshold.which_min.name, "k_star": threshold.k_star}
        )
    else:
        report.results.update({"eta_c": None, "which_min": None, "k_star": None})
        reason = "closed form only holds for gamma1 = gamma2 = 0"
        report.reasons.update({"eta_c": reason, "which_min": reason, "k_star": reason})
    report.results["eta_c_numeric"] = eta_critical_numeric(params, config.eta_max, config.tol, config.grid_size)
    return report


def cmd_critical_fields(config: RunConfig) -> Report:
    report = Report()
    fields = critical_fields(config.params)
    report.results = {
        "h_c1": optional_json(fields.h_c1),
        "h_c2": optional_json(fields.h_c2),
        "gap_k0": complex_json(gap_at_special_k(config.params, SpecialMomentum.K0)),
        "gap_kpi2": complex_json(gap_at_special_k(config.params, SpecialMomentum.KPI2)),
    }
    if fields.h_c1 is None:
        report.reasons["h_c1"] = "(J1 + J2)^2 - eta^2 - (gamma1 - gamma2)^2 < 0"
    if fields.h_c2 is None:
        report.reasons["h_c2"] = "(J1 - J2)^2 - eta^2 - (gamma1 + gamma2)^2 < 0"
    return report


def cmd_phase_diagram(config: RunConfig) -> Report:
    report = Report()
    points = phase_diagram(config.params, config.h_range, config.eta_range, config.grid_size)
    report.header = ["h", "eta", "reality", "order", "h_c1", "h_c2"]
    rows = []
    for point in points:
        rows.append(
            {
                "h": point.h,
                "eta": point.eta,
                "reality": point.reality.name,
                "order": point.order.name,
                "h_c1": optional_json(point.h_c1),
                "h_c2": optional_json(point.h_c2),
                "isotropic_class": point.isotropic_class,
            }
        )
        report.rows.append(
            [
                fmt(point.h),
                fmt(point.eta),
                point.reality.name,
                point.order.name,
                "" if point.h_c1 is None else fmt(point.h_c1),
                "" if point.h_c2 is None else fmt(point.h_c2),
            ]
        )
    report.results = {"points": rows}
    if any(p.h_c1 is None or p.h_c2 is None for p in points):
        report.reasons["h_c1"] = report.reasons["h_c2"] = "null where the radicand is negative"
    return report


def solution_json(original: ChainParams, root: str, solution: CounterpartSolution) -> Dict[str, Any]:
    values = {
        "root": root,
        "a": optional_json(solution.a),
        "j1_prime": optional_json(solution.j1_prime),
        "j2_prime": optional_json(solution.j2_prime),
        "gamma1_prime": optional_json(solution.gamma1_prime),
        "gamma2_prime": optional_json(solution.gamma2_prime),
        "h_prime": optional_json(solution.h_prime),
        "sign_class": None if solution.sign_class is None else solution.sign_class.name,
        "valid": solution.valid,
        "reason": solution.reason,
        "max_deviation": None,
    }
    if solution.valid:
        values["max_deviation"] = verify_spectrum_equality(original, solution, 1000)
    return values


def cmd_counterpart(config: RunConfig) -> Report:
    report = Report()
    params = config.params
    build = isotropic_counterpart if params.is_isotropic else anisotropic_counterpart
    if config.root == "all":
        solutions = renormalization_roots(params)
        if len(solutions) == 4:
            names = [r.value for r in RootChoice]
        else:
            names = [RootChoice.A1.value, RootChoice.MINUS_A1.value]
        if not solutions:
            solutions, names = [build(params, RootChoice.A1)], ["all"]
        entries = [solution_json(params, name, s) for name, s in zip(names, solutions)]
        report.results = {"solutions": entries}
    else:
        choice = RootChoice.from_string(config.root)
        entries = [solution_json(params, choice.value, build(params, choice))]
        report.results = dict(entries[0])
    for entry in entries:
        if not entry["valid"]:
            report.reasons[entry["root"]] = entry["reason"]
    return report


def cmd_ed_check(config: RunConfig) -> Report:
    report = Report()
    params = config.params
    if params.n_sites > config.max_sites:
        raise ValueError(f"n_sites is above --max-sites {config.max_sites}, got: `{params.n_sites}`")
    matrix = build_hamiltonian(params, config.boundary)
    spectrum = complex_spectrum(matrix)
    assembly = free_fermion_assembly(params, boundary=config.boundary)
    trace_tol = 1e-8 * matrix.dimension
    results = {
        "dimension": matrix.dimension,
        "fully_real": spectrum.fully_real,
        "max_imag": spectrum.max_imag,
        "assembly_residual": match_spectra(spectrum.eigenvalues, assembly),
        "conjugation_residual": conjugation_residual(spectrum.eigenvalues),
        "pt_residual": pt_residual(matrix),
        "parity_residual": parity_residual(matrix),
        "hermiticity_residual": hermiticity_residual(matrix) if params.is_hermitian else None,
        "trace_residual": abs(complex(np.sum(spectrum.eigenvalues)) - spectrum.trace),
    }
    if not params.is_hermitian:
        report.reasons["hermiticity_residual"] = "eta != 0"
    report.checks = {
        "assembly": results["assembly_residual"] <= TOL_MATCH,
        "conjugation": results["conjugation_residual"] <= TOL_MATCH,
        "pt": results["pt_residual"] <= 1e-12,
        "parity": results["parity_residual"] <= 1e-12,
        "hermiticity": results["hermiticity_residual"] is None or results["hermiticity_residual"] <= 1e-14,
        "trace": results["trace_residual"] <= trace_tol,
    }
    results["passed"] = all(report.checks.values())
    report.results = results
    if not results["passed"]:
        failed = [name for name, ok in report.checks.items() if not ok]
        LOGGER.error("Exact diagonalization checks failed: %s", ", ".join(failed))
        report.exit_code = EXIT_VIOLATION
    return report


COMMANDS = {
    Command.BANDS: cmd_bands,
    Command.REALITY: cmd_reality,
    Command.ETA_C: cmd_eta_c,
    Command.CRITICAL_FIELDS: cmd_critical_fields,
    Command.PHASE_DIAGRAM: cmd_phase_diagram,
    Command.COUNTERPART: cmd_counterpart,
    Command.ED_CHECK: cmd_ed_check,
}


def tolerances() -> Dict[str, float]:
    return {
        "tol_reality": TOL_REALITY,
        "tol_margin": TOL_MARGIN,
        "tol_interval": TOL_INTERVAL,
        "tol_touch": TOL_TOUCH,
        "tol_imag_ed": TOL_IMAG_ED,
        "tol_match": TOL_MATCH,
    }


def write_report(config: RunConfig, report: Report, handle: TextIO) -> None:
    if config.output_format is OutputFormat.CSV:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(report.header)
        writer.writerows(report.rows)
        return
    document = {
        "config": config_json(config),
        "results": report.results,
        "diagnostics": {
            "tolerances": tolerances(),
            "reasons": report.reasons,
            "checks": report.checks,
            "schema": SCHEMAS[config.command],
            "version": __version__,
        },
    }
    json.dump(document, handle, indent=2, allow_nan=False)
    handle.write("\n")


def run(config: RunConfig, stdout: Optional[TextIO] = None) -> int:
    """Execute one configured command and write its report.

    Returns:
        The exit code, ``1`` when an invariant check failed.
    """
    report = COMMANDS[config.command](config)
    if config.output_path is None:
        write_report(config, report, sys.stdout if stdout is None else stdout)
    else:
        with open(config.output_path, "w", newline="") as f:
            write_report(config, report, f)
    return report.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = resolve_config(args)
        return run(config)
    except scipy.linalg.LinAlgError as e:
        LOGGER.error("%s", e)
        print(f"ptchain: eigensolver failed: {e}", file=sys.stderr)
        return EXIT_VIOLATION
    except (ValueError, OSError) as e:
        LOGGER.error("%s", e)
        print(f"ptchain: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
