"""Command-line drivers.

Each ``cmd_*`` function takes parsed arguments and a :class:`RunConfig`,
writes its report once, and returns an :class:`ExitCode`. :func:`run` maps
library exceptions to exit codes.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from entanglement.constructions import (
    ContinuityRow,
    asymptotic_gap_table,
    dense_entangled_neighbor,
    energy_bounded_continuity_table,
    example1_scan,
    example1_state,
    truncation_convergence_table,
)
from entanglement.measures import Diagnostics, MeasureReport, entropy_of_entanglement, von_neumann_entropy
from entanglement.optimize import continuity_sweep, entanglement_of_formation, relative_entropy_of_entanglement
from entanglement.space import BipartiteSpace, EnergyBudget, gibbs_state, harmonic_space
from entanglement.states import DensityOperator, PureState, as_density, basis_state, bell_state
from shared.config import settings
from shared.constants import (
    BuiltinState,
    CertificateTag,
    ContinuityMode,
    ExitCode,
    MeasureKind,
    OutputFormat,
)
from shared.errors import (
    BudgetViolationError,
    ConstructionFailedError,
    EntanglementError,
    MeasureDispatchError,
    ResourceLimitError,
    handle_error,
)
from shared.logger import get_logger

from .reports import RunConfig, emit, load_run_config, render_json, render_table
from .statefile import State, load_state, save_state

logger = get_logger(__name__)

EXAMPLE1_COLUMNS = ("k", "delta_k", "E_bits", "trace_distance", "mean_energy")
CONTINUITY_COLUMNS = ("index", "trace_distance", "gap_bits", "fannes_bound_bits")
TRUNCATION_COLUMNS = ("cutoff", "retained_weight", "trace_distance", "E_bits")

DEFAULT_SCALES = (0.2, 0.1, 0.05, 0.02, 0.01, 0.0)
MONOTONE_FROM_K = 4  # delta_k <= 1/2 from here on

EXIT_CODES = (
    (ResourceLimitError, ExitCode.CAP_EXCEEDED),
    (MeasureDispatchError, ExitCode.DISPATCH_MISUSE),
    (BudgetViolationError, ExitCode.BUDGET_VIOLATION),
    (ConstructionFailedError, ExitCode.CONSTRUCTION_FAILED),
)


# States


def builtin_state(kind: BuiltinState, space: BipartiteSpace, config: RunConfig, k: Optional[int] = None) -> State:
    """Named state on ``space``; example1 defaults to the largest k the cutoff holds."""
    if kind is BuiltinState.GROUND:
        return basis_state(space, 0, 0)
    if kind is BuiltinState.BELL:
        return bell_state(space)
    if kind is BuiltinState.GIBBS:
        return gibbs_state(space, config.beta)
    return example1_state(k if k is not None else min(space.dims) - 1, space)


def resolve_state(
    args: argparse.Namespace,
    config: RunConfig,
    default: BuiltinState,
) -> Tuple[State, BipartiteSpace]:
    """State from ``--state`` (dims from the file) or a builtin on the configured space."""
    if getattr(args, "state", None):
        loaded = load_state(args.state)
        if config.levels_a is not None or config.levels_b is not None:
            space = config.space()
            space.check_dimension(loaded.state.dim)
        else:
            space = harmonic_space(*loaded.dims)
        return loaded.state, space
    space = config.space()
    kind = BuiltinState(args.builtin) if getattr(args, "builtin", None) else default
    return builtin_state(kind, space, config, getattr(args, "k", None)), space


def _require_pure(state: State, purpose: str) -> PureState:
    if isinstance(state, PureState):
        return state
    if state.is_pure():
        return state.dominant_vector()
    raise MeasureDispatchError(
        f"{purpose} is defined for pure states only; use EF or ER for mixed states",
        {"purity": state.purity()},
    )


# demo-example1


def cmd_demo_example1(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    """Analytic example1 table plus its monotonicity checks."""
    reports = example1_scan(args.kmin, args.kmax)
    rows = [
        (r.k, r.delta_k, r.entanglement_bits, r.trace_distance_to_ground, r.mean_energy)
        for r in reports
    ]
    emit(render_table(EXAMPLE1_COLUMNS, rows, config, "demo-example1"), config.out)

    tail = [r for r in reports if r.k >= MONOTONE_FROM_K]
    checks = {
        "trace_distance decreasing": all(
            b.trace_distance_to_ground < a.trace_distance_to_ground for a, b in zip(reports, reports[1:])
        ),
        "E decreasing": all(b.entanglement_bits < a.entanglement_bits for a, b in zip(tail, tail[1:])),
        "energy increasing": all(b.mean_energy > a.mean_energy for a, b in zip(tail, tail[1:])),
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        logger.error(f"Monotonicity checks failed: {failed}")
        return ExitCode.VERIFICATION_FAILED
    return ExitCode.SUCCESS


# demo-neighbor


def reverify_certificate(sigma: State, rho: DensityOperator, certificate, space: BipartiteSpace) -> Dict[str, bool]:
    """Distance, energy and block witness recomputed with plain numpy."""
    difference = as_density(sigma).matrix - rho.matrix
    distance = float(np.abs(np.linalg.eigvalsh(difference)).sum())
    energy = float(np.real(np.trace(space.hamiltonian() @ rho.matrix)))
    levels = (certificate.k, certificate.k + 1)
    indices = [space.index(i, j) for i in levels for j in levels]
    block = rho.matrix[np.ix_(indices, indices)].reshape(2, 2, 2, 2)
    witness = float(np.linalg.eigvalsh(np.einsum("ijkl->kjil", block).reshape(4, 4))[0])
    return {
        "trace_distance": distance < certificate.eps,
        "energy": energy < certificate.budget,
        "npt": witness < -certificate.tol,
    }


def cmd_demo_neighbor(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    """Entangled neighbour certificate, re-verified before it is written."""
    sigma, space = resolve_state(args, config, BuiltinState.GROUND)
    rho, certificate = dense_entangled_neighbor(
        sigma,
        space,
        eps=config.eps,
        budget=EnergyBudget(config.budget),
        tol=config.npt_tol,
        k_start=args.k_start,
    )
    checks = reverify_certificate(sigma, rho, certificate, space)
    if not all(checks.values()):
        logger.error(f"Certificate failed independent verification: {checks}")
        return ExitCode.VERIFICATION_FAILED
    emit(render_json(certificate.model_dump(mode="json"), config, "demo-neighbor"), config.out)
    return ExitCode.SUCCESS


# measure


def measure_state(state: State, space: BipartiteSpace, which: MeasureKind, config: RunConfig) -> MeasureReport:
    """Dispatch one measure; E needs a pure state."""
    if which is MeasureKind.S:
        return MeasureReport(
            measure=which.value,
            value=von_neumann_entropy(as_density(state)),
            diagnostics=Diagnostics(certificate=CertificateTag.EXACT),
        )
    if which is MeasureKind.E:
        return MeasureReport(
            measure=which.value,
            value=entropy_of_entanglement(_require_pure(state, "E"), space),
            diagnostics=Diagnostics(certificate=CertificateTag.EXACT),
        )
    if which is MeasureKind.EF:
        return entanglement_of_formation(
            state, space, restarts=config.restarts, max_iter=config.max_iter, seed=config.seed, sweeps=config.sweeps
        )
    return relative_entropy_of_entanglement(
        state, space, tol=config.tol, max_iter=config.max_iter, restarts=config.restarts, seed=config.seed
    )


def cmd_measure(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    """One measure of a state file or builtin state."""
    state, space = resolve_state(args, config, BuiltinState.BELL)
    report = measure_state(state, space, MeasureKind(args.which), config)
    emit(render_json(report.model_dump(mode="json"), config, "measure"), config.out)
    return ExitCode.SUCCESS


# continuity


def _continuity_rows(args: argparse.Namespace, config: RunConfig) -> List[ContinuityRow]:
    mode = ContinuityMode(args.mode)
    state, space = resolve_state(args, config, BuiltinState.BELL)
    scales = args.scales or DEFAULT_SCALES
    budget = EnergyBudget(config.budget)

    if mode is ContinuityMode.PROP3:
        return energy_bounded_continuity_table(_require_pure(state, mode.value), space, budget, scales)
    if mode is ContinuityMode.PROP4:
        return asymptotic_gap_table(_require_pure(state, mode.value), space, args.copies or 6).rows

    measure = MeasureKind.EF if mode in (ContinuityMode.PROP6, ContinuityMode.PROP7) else MeasureKind.ER
    per_copy = mode in (ContinuityMode.PROP7, ContinuityMode.PROP9)
    copies = (args.copies or 2) if per_copy else 1
    cap = min(settings.OPTIMIZATION_CAP**copies, settings.TENSOR_POWER_CAP) if per_copy else None
    return continuity_sweep(
        state,
        space,
        scales,
        budget,
        measure=measure,
        copies=copies,
        tol=config.tol,
        max_iter=config.max_iter,
        restarts=config.restarts,
        seed=config.seed,
        cap=cap,
    )


def cmd_continuity(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    """Gap-against-distance table for the chosen continuity mode."""
    rows = [
        (r.index, r.trace_distance, r.gap_bits, r.fannes_bound_bits)
        for r in _continuity_rows(args, config)
    ]
    emit(render_table(CONTINUITY_COLUMNS, rows, config, f"continuity {args.mode}"), config.out)
    return ExitCode.SUCCESS


# truncation


def cmd_truncation(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    """Cutoff-convergence table of a pure state."""
    state, space = resolve_state(args, config, BuiltinState.EXAMPLE1)
    cutoffs = args.cutoffs or list(range(2, min(space.dims) + 1))
    table = truncation_convergence_table(_require_pure(state, "truncation"), space, cutoffs)
    rows = [(r.cutoff, r.retained_weight, r.trace_distance, r.entanglement_bits) for r in table]
    emit(render_table(TRUNCATION_COLUMNS, rows, config, "truncation"), config.out)
    return ExitCode.SUCCESS


# save-state


def cmd_save_state(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    """Write a builtin state to ``--out``."""
    if config.out is None:
        logger.error("save-state needs --out")
        return ExitCode.IO_ERROR
    space = config.space()
    state = builtin_state(BuiltinState(args.builtin), space, config, args.k)
    save_state(config.out, state, space)
    return ExitCode.SUCCESS


# Parser and dispatch


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cutoff", type=int, nargs=2, metavar=("D_A", "D_B"), help="Local cutoff dimensions")
    common.add_argument("--beta", type=float, help="Inverse temperature of the Gibbs state")
    common.add_argument("--budget", type=float, help="Mean-energy budget M (strict)")
    common.add_argument("--eps", type=float, help="Trace-distance radius")
    common.add_argument("--tol", type=float, help="Optimiser gap tolerance in bits")
    common.add_argument("--npt-tol", type=float, help="Threshold on the NPT witness")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--restarts", type=int, help="Random restarts")
    common.add_argument("--max-iter", type=int, help="Iteration cap")
    common.add_argument("--sweeps", type=int, help="Annealing sweeps")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], help="Table format")
    common.add_argument("--out", type=Path, help="Output file (stdout when omitted)")
    common.add_argument("--config", help="JSON run configuration (overrides ENTCUT_CONFIG)")
    common.add_argument(
        "--no-metadata", dest="metadata", action="store_const", const=False, help="Omit run metadata from JSON"
    )
    common.add_argument("--debug", action="store_true", help="Enable debug logging")
    return common


def _state_options(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--state", help="JSON state file")
    source.add_argument("--builtin", choices=[b.value for b in BuiltinState], help="Builtin state")
    parser.add_argument("--k", type=int, help="Index of the example1 state")


def build_parser() -> argparse.ArgumentParser:
    """Parse command line arguments.

    Returns:
        argparse.ArgumentParser: Parser with one subcommand per driver
    """
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="entcut", description="Entanglement of energy-truncated bipartite systems"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("demo-example1", parents=[common], help="Example-1 sequence table")
    p.add_argument("--kmin", type=int, default=16)
    p.add_argument("--kmax", type=int, default=4096)
    p.set_defaults(handler=cmd_demo_example1)

    p = commands.add_parser("demo-neighbor", parents=[common], help="Certified entangled neighbour")
    _state_options(p)
    p.add_argument("--k-start", type=int, help="First block index of the scan")
    p.set_defaults(handler=cmd_demo_neighbor)

    p = commands.add_parser("measure", parents=[common], help="Evaluate S, E, EF or ER")
    _state_options(p)
    p.add_argument("--which", required=True, choices=[m.value for m in MeasureKind])
    p.set_defaults(handler=cmd_measure)

    p = commands.add_parser("continuity", parents=[common], help="Distance versus measure-gap table")
    _state_options(p)
    p.add_argument("--mode", required=True, choices=[m.value for m in ContinuityMode])
    p.add_argument("--scales", type=float, nargs="+", help="Perturbation strengths")
    p.add_argument("--copies", type=int, help="Copies (largest n for prop4)")
    p.set_defaults(handler=cmd_continuity)

    p = commands.add_parser("truncation", parents=[common], help="Entanglement versus cutoff")
    _state_options(p)
    p.add_argument("--cutoffs", type=int, nargs="+")
    p.set_defaults(handler=cmd_truncation)

    p = commands.add_parser("save-state", parents=[common], help="Write a builtin state file")
    p.add_argument("--builtin", required=True, choices=[b.value for b in BuiltinState])
    p.add_argument("--k", type=int, help="Index of the example1 state")
    p.set_defaults(handler=cmd_save_state)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "cutoff": tuple(args.cutoff) if args.cutoff else None,
        "beta": args.beta,
        "budget": args.budget,
        "eps": args.eps,
        "tol": args.tol,
        "npt_tol": args.npt_tol,
        "seed": args.seed,
        "restarts": args.restarts,
        "max_iter": args.max_iter,
        "sweeps": args.sweeps,
        "format": args.format,
        "out": args.out,
        "metadata": args.metadata,
    }
    return load_run_config(overrides, path=args.config)


def exit_code_for(error: Exception) -> ExitCode:
    """Most specific exit code for ``error``."""
    for kind, code in EXIT_CODES:
        if isinstance(error, kind):
            return code
    return ExitCode.IO_ERROR


def _enable_debug() -> None:
    for name in list(logging.root.manager.loggerDict):
        log = logging.getLogger(name)
        if log.handlers:
            log.setLevel(logging.DEBUG)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    if args.debug:
        _enable_debug()
    try:
        config = _config_from_args(args)
        logger.info(f"Running {args.command}")
        return int(args.handler(args, config))
    except (EntanglementError, OSError) as e:
        sys.stderr.write(json.dumps(handle_error(e), default=str) + "\n")
        return int(exit_code_for(e))
