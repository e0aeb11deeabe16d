"""Numerical constants and enumerations.

This module defines constant values and enumerations used throughout entcut.
"""

from enum import Enum, IntEnum

# State validation
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9  # eigenvalues in [-PSD_TOL, 0) are numerical noise
NORM_TOL = 1e-12
NORM_INPUT_TOL = 1e-6  # larger deviations are rejected, smaller ones renormalised
SUPPORT_TOL = 1e-12  # eigenvalues at or below this are outside the support

# State files
FILE_HERMITIAN_TOL = 1e-8
FILE_TRACE_TOL = 1e-8

# Matrix functions
LOG_DERIVATIVE_MIN_EIGENVALUE = 1e-10
DIVIDED_DIFFERENCE_RTOL = 1e-8

# Optimisation defaults
FLOOR_WEIGHT = 1e-9
LMO_MAX_SWEEPS = 200
LMO_RTOL = 1e-13
LINE_SEARCH_STEPS = 60
CORRECTIVE_STEPS = 10
ANNEALING_DECAY = 0.95
ANNEALING_SWEEPS = 20
ANNEALING_STEP = 0.6
ANNEALING_TEMPERATURE = 1e-2
GIVENS_PROPOSALS = 6
POLISH_ITERATIONS = 300
POLISH_GRADIENT_TOL = 1e-9
ENTROPY_LOG_FLOOR = 1e-300

# Fannes inequality window: 0 <= t <= 1/e
FANNES_T_MAX = 0.36787944117144233


class CertificateTag(str, Enum):
    """How much a reported value can be trusted."""
    EXACT = "exact"
    UPPER_BOUND = "upper-bound"
    UPPER_BOUND_HEURISTIC_LMO = "upper-bound(heuristic-LMO)"
    HEURISTIC = "heuristic"


class MeasureKind(str, Enum):
    """Quantities the ``measure`` command can evaluate."""
    S = "S"
    E = "E"
    EF = "EF"
    ER = "ER"


class ContinuityMode(str, Enum):
    """Continuity demonstrations exposed by the ``continuity`` command."""
    PROP3 = "prop3"  # entropy of entanglement inside an energy budget
    PROP4 = "prop4"  # per-copy entropy of entanglement
    PROP6 = "prop6"  # entanglement of formation
    PROP7 = "prop7"  # per-copy entanglement of formation
    PROP8 = "prop8"  # relative entropy of entanglement
    PROP9 = "prop9"  # per-copy relative entropy of entanglement


class NeighborBranch(str, Enum):
    """Construction used for a dense entangled neighbour."""
    TAIL_BLOCK = "tail-block"
    UNIFORM_MIXTURE = "uniform-mixture"
    DIAMETER = "diameter"


class BuiltinState(str, Enum):
    """States the CLI can build without a state file."""
    GROUND = "ground"
    BELL = "bell"
    GIBBS = "gibbs"
    EXAMPLE1 = "example1"


class OutputFormat(str, Enum):
    """Report serialisation formats."""
    CSV = "csv"
    JSON = "json"


class ExitCode(IntEnum):
    """Process exit codes of the command line."""
    SUCCESS = 0
    VERIFICATION_FAILED = 1
    IO_ERROR = 2
    CONSTRUCTION_FAILED = 3
    BUDGET_VIOLATION = 4
    DISPATCH_MISUSE = 5
    CAP_EXCEEDED = 6
