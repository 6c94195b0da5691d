"""
Command-line front end for sl(2,C) potential algebras.

    python main.py spectrum --model scarf --A 2 --B 1.8
    python main.py verify --model morse --A 2.5 --B_R 2 --B_I 1 --output morse.json
    python main.py crossing-scan --A 2 --B_from 1.2 --B_to 1.8 --steps 61 --format csv

Exit codes: 0 all checks pass, 1 usage/config error, 2 verification
failure, 3 numerical non-convergence.
"""
import argparse
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from models import (
    AlgebraState,
    CommandName,
    Discretization,
    GridOverride,
    ModelName,
    ModelParams,
    RunConfig,
    ScarfParams,
    SeriesLabel,
    Sign,
    FamilyKind,
    Tolerances,
)
from services.algebra_core import algebra_service
from services.analytic_models import analytic_models
from services.model_cases import ModelCase, model_catalog
from services.spectral_verify import spectral_verifier
from utils.checks import CheckRecorder
from utils.errors import (
    ConvergenceError,
    NonNormalizableError,
    NotABoundStateError,
    PoleError,
    VerificationFailure,
)
from utils.output_writer import render_csv, render_json, resolve_output, write_atomic

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2
EXIT_CONVERGENCE = 3

# Agreement of the separated real/imaginary closed forms with V_m
CARTESIAN_TOL = 1e-10
ODE_TOL = 1e-10
TRACE_TOL = 1e-8
# Spacing of the Casimir and ladder grids away from complex poles
CASIMIR_DX = 0.005

MODEL_HELP = """\
models and their parameters:
  family       --kind I|II|III --m M [--b_R --b_I --c --gamma --sign upper|lower]
               V = (1/4 - m^2) F' + 2m G' + G^2, b = b_R + i b_I.
               I: F = tanh(x-c-i gamma), G = b sech(...); II: coth/cosech;
               III: F = +-1, G = b exp(-+x). gamma in [-pi/4, pi/4) unless
               --allow-any-gamma. Bound states n < m - 1/2, E = -(m-n-1/2)^2;
               II at gamma = 0 lives on x > c and needs Re b + 1/2 - m > 0;
               III needs Re b > 0 (upper) or Re b < 0 (lower).
  scarf        --A A --B B     A + 1/2 > 0, B > 0.
               V = -[B^2 + A(A+1)] sech^2 x + i B(2A+1) sech x tanh x.
               Levels -(A-n)^2, n < A (series_A) and -(B-n-1/2)^2,
               n < B - 1/2 (series_B).
  gpt          --A A --B B [--c --gamma]   generalized Poschl-Teller
               V = [B^2 + A(A+1)] cosech^2 z - B(2A+1) cosech z coth z,
               z = x - c - i gamma; half line x > c at gamma = 0, full
               line otherwise.
  ptII         --A A --B B [--gamma]       image under t = x/2:
               V = (B-A)(B-A-1)/sinh^2(t - i gamma/2)
                   - (A+B)(A+B+1)/cosh^2(t - i gamma/2); energies times 4.
  transparent  --eps_R E --rho R [--b_shift --a]   E < 0, cos(R) != 0.
               V = 2E / cosh^2[sqrt(-E)(y + b_shift) + i R]; single level E.
  morse        --A A --B_R BR [--B_I BI --cap C]   A > 0, BR > 0.
               V = b^2 e^-2x - b(2A+1) e^-x, b = BR + i BI; levels
               -(A-n)^2, n < A, for every BI.

csv columns per command:
  potential      x, re_V, im_V
  spectrum       series, n, m, energy, coincident
  wavefunction   x, re_psi, im_psi, abs2
  verify         label, analytic, numeric_re, numeric_im, gap, status
  crossing-scan  B, nA, nB, energy_A, energy_B, gap, defect
  algebra-check  name, pass, detail
"""


class UsageError(ValueError):
    """Bad command line"""


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = CliParser(add_help=False, allow_abbrev=False)
    model = common.add_argument_group("model")
    model.add_argument("--model", choices=[m.value for m in ModelName], default=ModelName.scarf.value)
    model.add_argument("--kind", choices=[k.value for k in FamilyKind])
    model.add_argument("--sign", choices=[s.value for s in Sign])
    model.add_argument("--series", choices=[s.value for s in SeriesLabel])
    for name in ("b_R", "b_I", "c", "gamma", "m", "A", "B", "B_R", "B_I", "eps_R", "b_shift", "rho", "a"):
        model.add_argument(f"--{name}", type=float)
    model.add_argument("--n", type=int, help="Level index for wavefunction")
    model.add_argument("--cap", type=float, default=1e6, help="Morse |V| clamp (default 1e6)")
    model.add_argument("--allow-any-gamma", action="store_true")

    grid = common.add_argument_group("grid and tolerances")
    grid.add_argument("--x-min", type=float)
    grid.add_argument("--x-max", type=float)
    grid.add_argument("--n-points", type=int)
    grid.add_argument("--stencil", type=int, choices=[3, 5])
    grid.add_argument("--e-tol", type=float)
    grid.add_argument("--im-tol", type=float)
    grid.add_argument("--crossing-tol", type=float, help="Coincidence threshold for analytic levels")
    grid.add_argument("--crossing-im-tol", type=float, help="Max |Im| of an eigenvalue matched to coincident levels")

    out = common.add_argument_group("output")
    out.add_argument("--output", help="Artifact path (relative paths go under SL2C_OUTPUT_DIR); stdout if omitted")
    out.add_argument("--format", choices=["json", "csv"], default="json")
    out.add_argument("--log-level", default=os.getenv("SL2C_LOG_LEVEL", "INFO"))

    parser = CliParser(
        prog="main.py",
        description="Potential algebras of complex potentials: spectra, states and numerical verification",
        epilog=MODEL_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    shared = dict(parents=[common], epilog=MODEL_HELP, formatter_class=argparse.RawDescriptionHelpFormatter, allow_abbrev=False)
    sub.add_parser("potential", help="Export x, Re V, Im V", **shared)
    sub.add_parser("spectrum", help="Analytic levels of both series", **shared)
    sub.add_parser("wavefunction", help="Closed-form bound state", **shared)
    verify = sub.add_parser("verify", help="Finite-difference verification suite", **shared)
    verify.add_argument("--seed", type=int, default=0)
    scan = sub.add_parser("crossing-scan", help="Scarf II level crossings over B", **shared)
    scan.add_argument("--B_from", type=float, required=True)
    scan.add_argument("--B_to", type=float, required=True)
    scan.add_argument("--steps", type=int, default=61)
    algebra = sub.add_parser("algebra-check", help="Commutator and Casimir identities", **shared)
    algebra.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Raises:
        ValidationError: If any parameter breaks a model precondition
    """
    param_names = [
        "kind", "b_R", "b_I", "c", "gamma", "m", "n", "sign", "A", "B",
        "B_R", "B_I", "eps_R", "b_shift", "rho", "a", "series",
    ]
    params = {name: getattr(args, name) for name in param_names if getattr(args, name) is not None}
    params["allow_any_gamma"] = args.allow_any_gamma
    grid = {
        name: getattr(args, name)
        for name in ("x_min", "x_max", "n_points", "stencil")
        if getattr(args, name) is not None
    }
    tolerances = {
        name: getattr(args, name)
        for name in ("e_tol", "im_tol", "crossing_tol", "crossing_im_tol")
        if getattr(args, name) is not None
    }
    return RunConfig(
        command=args.command,
        model=args.model,
        params=ModelParams(**params),
        grid=GridOverride(**grid),
        tolerances=Tolerances(**tolerances),
        output=args.output,
        format=args.format,
        seed=getattr(args, "seed", 0),
        cap=args.cap,
        B_from=getattr(args, "B_from", None),
        B_to=getattr(args, "B_to", None),
        steps=getattr(args, "steps", 61),
    )


Table = Tuple[List[str], List[Sequence[Any]]]


def _potential(config: RunConfig, recorder: CheckRecorder) -> Tuple[Dict[str, Any], Table]:
    case = model_catalog.build(config)
    d = case.discretization(config.grid)
    xs = d.nodes
    values = np.asarray(case.potential(xs), dtype=complex)
    results = {"grid": d, "x": xs, "re_V": values.real, "im_V": values.imag}
    return results, (["x", "re_V", "im_V"], list(zip(xs, values.real, values.imag)))


def _spectrum(config: RunConfig, recorder: CheckRecorder) -> Tuple[Dict[str, Any], Table]:
    case = model_catalog.build(config)
    results: Dict[str, Any] = {label.value: [] for label in SeriesLabel}
    for level in sorted(case.levels, key=lambda lv: (lv.series, lv.n)):
        results.setdefault(level.series, []).append(level.energy)
    results["levels"] = case.levels
    if case.model == ModelName.scarf:
        results["crossings"] = analytic_models.detect_crossing(
            ScarfParams(A=config.params.A, B=config.params.B), tol=config.tolerances.crossing_tol,
        )
    if case.notes:
        results["notes"] = case.notes
    rows = [(lv.series, lv.n, lv.m, lv.energy, lv.coincident) for lv in case.levels]
    return results, (["series", "n", "m", "energy", "coincident"], rows)


def _level(case: ModelCase, series: str, n: int):
    for level in case.levels:
        if level.series == series and level.n == n:
            return level
    raise ValueError(f"{series} n={n} is not an admissible bound state of model '{case.model.value}'")


def _wavefunction(config: RunConfig, recorder: CheckRecorder) -> Tuple[Dict[str, Any], Table]:
    case = model_catalog.build(config)
    d = case.discretization(config.grid)
    series = config.params.series.value if config.params.series else (
        case.levels[0].series if case.levels else SeriesLabel.series_A.value
    )
    level = _level(case, series, config.params.n)
    psi = case.wavefunction(series, level.n, d.nodes)

    norm = spectral_verifier.norm_integral(psi)
    recorder.check_below("unit_norm", abs(norm - 1.0), 1e-6, "|norm - 1|")
    residual = spectral_verifier.schrodinger_residual(
        case.potential, case.wavefunction(series, level.n, case.residual_nodes(d)), level.energy
    )
    recorder.check_below(f"residual[{series}[n={level.n}]]", residual, config.tolerances.residual_tol, "residual")

    values = psi.values
    abs2 = np.abs(values) ** 2
    results = {
        "series": series, "n": level.n, "energy": level.energy, "norm": norm, "residual": residual,
        "x": psi.xs, "re_psi": values.real, "im_psi": values.imag, "abs2": abs2,
    }
    return results, (["x", "re_psi", "im_psi", "abs2"], list(zip(psi.xs, values.real, values.imag, abs2)))


def _algebra_checks(case: ModelCase, xs: np.ndarray, recorder: CheckRecorder) -> None:
    fam, m = case.family, case.m
    r_f, r_g = algebra_service.ode_residual(fam, xs)
    recorder.check_below("ode_residual", max(r_f, r_g), ODE_TOL, "max residual")
    re, im = algebra_service.potential_cartesian(fam, m, xs)
    direct = np.asarray(algebra_service.potential(fam, m, xs), dtype=complex)
    scale = max(1.0, float(np.max(np.abs(direct))))
    gap = float(np.max(np.abs(re + 1j * im - direct))) / scale
    recorder.check_below("cartesian_form", gap, CARTESIAN_TOL, "relative gap")


def _domain_counts(case: ModelCase, d: Discretization, verified: int, tol: Tolerances) -> Dict[str, int]:
    """Numeric bound states per domain; the verified domain reuses its own count"""
    counts = {}
    for name, (potential, grid) in case.domains.items():
        if name == case.domain and grid == d:
            counts[name] = verified
            continue
        w, _, _ = spectral_verifier.solve_spectrum(potential, grid, key={**case.key, "domain": name})
        counts[name] = spectral_verifier.count_bound_states(w, tol.e_tol, tol.crossing_im_tol)
    logger.info(f"Numeric bound states per domain: {counts}")
    return counts


def _verify(config: RunConfig, recorder: CheckRecorder) -> Tuple[Dict[str, Any], Table]:
    case = model_catalog.build(config)
    d = case.discretization(config.grid)
    tol = config.tolerances

    report, diagnostics = spectral_verifier.verify_levels(
        case.potential, case.energies, d, tol, labels=case.labels, key=case.key,
    )
    recorder.record(
        "spectrum_matched", report.all_matched,
        f"{len(report.matches)}/{len(case.levels)} matched, max gap {report.max_gap:.3e}",
    )
    recorder.record(
        "max_imag", report.max_imag <= tol.im_tol,
        f"max |Im| = {report.max_imag:.3e} (limit {tol.im_tol:g})",
    )
    recorder.check_below("trace_sanity", diagnostics["trace_gap"], TRACE_TOL, "relative trace gap")
    for energy, clusters in diagnostics.get("crossing_clusters", {}).items():
        recorder.record(
            f"crossing_eigenspace[E={energy}]", clusters == 1,
            f"{clusters} eigenvector cluster(s) near the coincident level",
        )

    residual_nodes = case.residual_nodes(d)
    residuals = {}
    for level, label in zip(case.levels, case.labels):
        psi = case.wavefunction(level.series, level.n, residual_nodes)
        residuals[label] = spectral_verifier.schrodinger_residual(case.potential, psi, level.energy)
        recorder.check_below(f"residual[{label}]", residuals[label], tol.residual_tol, "residual")

    try:
        violation = algebra_service.pt_symmetry_check(case.potential, d.nodes)
    except PoleError as exc:
        violation = float("inf")
        logger.warning(f"PT check hit a pole: {exc}")
    measured = violation < tol.pt_tol
    recorder.record(
        "pt_classification", measured == case.expected_pt,
        f"expected {'symmetric' if case.expected_pt else 'not symmetric'}, violation {violation:.3e}",
    )

    if case.family is not None:
        _algebra_checks(case, case.smooth_nodes(d), recorder)

    results = {
        "grid": d,
        "report": report,
        "diagnostics": diagnostics,
        "residuals": residuals,
        "pt": {"expected": case.expected_pt, "symmetric": measured, "violation": min(violation, 1e308)},
    }
    if case.notes:
        results["notes"] = case.notes
    if case.domains:
        results["bound_state_counts"] = {
            "analytic": case.notes.get("bound_state_counts", {}),
            "numeric": _domain_counts(case, d, diagnostics["numeric_bound_states"], tol),
        }

    rows = []
    matched = {m.label: m for m in report.matches}
    for level, label in zip(case.levels, case.labels):
        if label in matched:
            match = matched[label]
            rows.append((label, level.energy, match.numeric.re, match.numeric.im, match.gap, "matched"))
        else:
            reason = next(u.reason for u in report.unmatched_analytic if u.label == label)
            rows.append((label, level.energy, None, None, None, reason))
    return results, (["label", "analytic", "numeric_re", "numeric_im", "gap", "status"], rows)


def _crossing_scan(config: RunConfig, recorder: CheckRecorder) -> Tuple[Dict[str, Any], Table]:
    rows = analytic_models.crossing_scan(config.params.A, config.B_from, config.B_to, config.steps)
    with_gap = [row for row in rows if row.gap is not None]
    results: Dict[str, Any] = {"A": config.params.A, "rows": rows}
    if with_gap:
        results["minimum"] = min(with_gap, key=lambda row: row.gap)
    columns = ["B", "nA", "nB", "energy_A", "energy_B", "gap", "defect"]
    return results, (columns, [[getattr(row, c) for c in columns] for row in rows])


def _algebra_check(config: RunConfig, recorder: CheckRecorder) -> Tuple[Dict[str, Any], Table]:
    case = model_catalog.build(config)
    if case.family is None:
        raise ValueError(f"algebra-check needs a model built on a family solution, not '{case.model.value}'")
    rng = np.random.default_rng(config.seed)
    recorder.extend(algebra_service.operator_identity_suite(case.family, case.m, rng))

    xs = case.residual_nodes(case.discretization(config.grid), CASIMIR_DX)
    ladder_factors = []
    for level in case.levels:
        if level.m != case.m:
            continue
        state = AlgebraState(k=level.m - level.n, m=level.m)
        result = algebra_service.casimir_eigen_check(case.family, state, xs)
        recorder.record(result.name, result.passed, result.detail)
        try:
            alpha, collinear = algebra_service.ladder_check(case.family, state, xs)
        except (NonNormalizableError, NotABoundStateError) as exc:
            logger.info(f"No ladder partner for k={state.k:g}, m={state.m:g}: {exc}")
            continue
        recorder.record(collinear.name, collinear.passed, collinear.detail)
        ladder_factors.append({"k": state.k, "m": state.m, "alpha": alpha})

    results = {"family": case.family, "m": case.m, "seed": config.seed, "ladder_factors": ladder_factors}
    rows = [(r.name, r.passed, r.detail) for r in recorder.results]
    return results, (["name", "pass", "detail"], rows)


COMMANDS: Dict[CommandName, Callable[[RunConfig, CheckRecorder], Tuple[Dict[str, Any], Table]]] = {
    CommandName.potential: _potential,
    CommandName.spectrum: _spectrum,
    CommandName.wavefunction: _wavefunction,
    CommandName.verify: _verify,
    CommandName.crossing_scan: _crossing_scan,
    CommandName.algebra_check: _algebra_check,
}


def run(config: RunConfig) -> int:
    """
    Execute one command and write its artifact

    Returns:
        EXIT_OK when every recorded check passes

    Raises:
        VerificationFailure: If any check failed (after the artifact is written)
    """
    recorder = CheckRecorder()
    results, (columns, rows) = COMMANDS[config.command](config, recorder)

    if config.format == "csv":
        text = render_csv(columns, rows)
    else:
        text = render_json({
            "command": config.command.value,
            "params": {
                "model": config.model.value,
                **config.params.model_dump(mode="json", exclude_none=True),
            },
            "results": results,
            "checks": [r.model_dump(by_alias=True) for r in recorder.results],
        })

    target = resolve_output(config.output)
    if target is None:
        sys.stdout.write(text)
    else:
        write_atomic(text, target)

    summary = recorder.get_summary()
    logger.info(f"{config.command.value}: {summary['passed']}/{summary['total']} checks passed")
    recorder.raise_on_failure()
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    try:
        return run(config_from_args(args))
    except VerificationFailure as exc:
        logger.error(f"Verification failed: {exc}")
        return EXIT_VERIFICATION
    except ConvergenceError as exc:
        logger.error(f"Numerical non-convergence: {exc}")
        return EXIT_CONVERGENCE
    except (ValidationError, ValueError) as exc:
        logger.error(f"Invalid configuration: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
