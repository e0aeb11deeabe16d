"""JSON state files.

A file holds ``{"dims": [d_a, d_b], "matrix": [[[re, im], ...], ...]}`` over the
composite index ``i = a * d_b + b``, or ``"vector": [[re, im], ...]`` for a
pure state. Floats are written with Python's shortest round-trip repr, so a
saved matrix loads back bit for bit.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from entanglement.space import BipartiteSpace
from entanglement.states import DensityOperator, PureState
from shared.constants import FILE_HERMITIAN_TOL, FILE_TRACE_TOL, NORM_TOL
from shared.errors import InvalidStateError, StateFileError
from shared.logger import get_logger

logger = get_logger(__name__)

State = Union[DensityOperator, PureState]


@dataclass(frozen=True, eq=False)
class LoadedState:
    dims: Tuple[int, int]
    state: State

    @property
    def is_pure(self) -> bool:
        return isinstance(self.state, PureState)


def _complex_array(entries: Any, shape: Tuple[int, ...], what: str) -> np.ndarray:
    try:
        pairs = np.asarray(entries, dtype=float)
    except (TypeError, ValueError) as e:
        raise StateFileError(f"{what} entries must be [re, im] number pairs", {"detail": str(e)})
    if pairs.shape != shape + (2,):
        raise StateFileError(
            f"{what} has the wrong shape", {"expected": list(shape) + [2], "found": list(pairs.shape)}
        )
    return pairs[..., 0] + 1j * pairs[..., 1]


def _pairs(values: np.ndarray) -> list:
    return np.stack([values.real, values.imag], axis=-1).tolist()


def parse_state(payload: Dict[str, Any]) -> LoadedState:
    """Validate a decoded state document.

    Raises:
        StateFileError: On missing keys, bad shapes, non-Hermitian matrices
            or a trace (norm) away from one by more than 1e-8
    """
    dims = payload.get("dims")
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(d, int) and d >= 2 for d in dims)):
        raise StateFileError("'dims' must be a pair of integers >= 2", {"dims": dims})
    d_a, d_b = dims
    dim = d_a * d_b

    if "vector" in payload:
        v = _complex_array(payload["vector"], (dim,), "vector")
        norm2 = float(np.vdot(v, v).real)
        if abs(norm2 - 1.0) > FILE_TRACE_TOL:
            raise StateFileError("State vector is not normalised (|psi|^2 != 1)", {"norm_squared": norm2})
        if abs(norm2 - 1.0) > NORM_TOL:
            v = v / np.sqrt(norm2)
        return LoadedState((d_a, d_b), PureState(v))

    if "matrix" not in payload:
        raise StateFileError("State file needs a 'matrix' or a 'vector' entry")
    m = _complex_array(payload["matrix"], (dim, dim), "matrix")
    deviation = float(np.max(np.abs(m - m.conj().T)))
    if deviation > FILE_HERMITIAN_TOL:
        raise StateFileError("Matrix is not Hermitian", {"max_deviation": deviation})
    m = (m + m.conj().T) / 2
    trace = float(np.real(np.trace(m)))
    if abs(trace - 1.0) > FILE_TRACE_TOL:
        raise StateFileError("Matrix trace is not one", {"trace": trace})
    if abs(trace - 1.0) > NORM_TOL:
        m = m / trace
    try:
        return LoadedState((d_a, d_b), DensityOperator(m))
    except InvalidStateError as e:
        raise StateFileError(f"Matrix is not a density operator: {e.message}", e.context)


def load_state(path: Union[str, Path]) -> LoadedState:
    """Read and validate a state file."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except OSError as e:
        raise StateFileError(f"Cannot read state file: {e.strerror}", {"path": str(path)})
    except json.JSONDecodeError as e:
        raise StateFileError("State file is not valid JSON", {"path": str(path), "detail": str(e)})
    if not isinstance(payload, dict):
        raise StateFileError("State file must hold a JSON object", {"path": str(path)})
    loaded = parse_state(payload)
    logger.info(f"Loaded {'pure' if loaded.is_pure else 'mixed'} state of dims {loaded.dims} from {path}")
    return loaded


def dump_state(state: State, space: BipartiteSpace) -> Dict[str, Any]:
    """JSON document of ``state``: a vector for pure states, a matrix otherwise."""
    space.check_dimension(state.dim)
    document: Dict[str, Any] = {"dims": [space.d_a, space.d_b]}
    if isinstance(state, PureState):
        document["vector"] = _pairs(state.amplitudes)
    else:
        document["matrix"] = _pairs(state.matrix)
    return document


def save_state(path: Union[str, Path], state: State, space: BipartiteSpace) -> Path:
    """Write ``state`` to ``path``, creating parent directories."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(dump_state(state, space)))
    except OSError as e:
        raise StateFileError(f"Cannot write state file: {e.strerror}", {"path": str(path)})
    logger.info(f"Saved state of dims {space.dims} to {path}")
    return path
