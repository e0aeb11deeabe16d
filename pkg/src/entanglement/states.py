"""State algebra on a truncated bipartite space.

Density operators and pure states are immutable values over the composite
index ``i = a * d_b + b``. Partial trace, partial transpose and the tensor-power
regrouping are all defined against that convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import unitary_group

from shared.config import settings
from shared.constants import (
    HERMITIAN_TOL,
    NORM_INPUT_TOL,
    NORM_TOL,
    PSD_TOL,
    SUPPORT_TOL,
    TRACE_TOL,
)
from shared.errors import InvalidArgumentError, InvalidStateError, ResourceLimitError
from shared.logger import get_logger

from .space import BipartiteSpace, SpectrumSpec

logger = get_logger(__name__)

MatrixLike = Union["DensityOperator", "PureState", np.ndarray]


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Trace-one positive Hermitian matrix on a composite space."""
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError("Density operator must be a square matrix", {"shape": m.shape})
        deviation = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if deviation > HERMITIAN_TOL:
            raise InvalidStateError("Matrix is not Hermitian", {"max_deviation": deviation})
        m = (m + m.conj().T) / 2
        trace = float(np.real(np.trace(m)))
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidStateError("Trace differs from one", {"trace": trace})
        object.__setattr__(self, "matrix", _readonly(m))
        smallest = float(self.spectrum[0])
        if smallest < -PSD_TOL:
            raise InvalidStateError("Matrix has a negative eigenvalue", {"min_eigenvalue": smallest})

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Ascending eigenvalues."""
        if np.count_nonzero(self.matrix - np.diag(np.diag(self.matrix))) == 0:
            return _readonly(np.sort(np.real(np.diag(self.matrix))))
        return _readonly(np.linalg.eigvalsh(self.matrix))

    def purity(self) -> float:
        """tr[rho^2]."""
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def is_pure(self, tol: float = 1e-10) -> bool:
        """Purity within ``tol`` of one."""
        return abs(self.purity() - 1.0) <= tol

    def dominant_vector(self) -> PureState:
        """Eigenvector of the largest eigenvalue; the state itself when pure."""
        _, vectors = np.linalg.eigh(self.matrix)
        return PureState(vectors[:, -1])


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector on a composite space."""
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.amplitudes, dtype=complex).ravel()
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_INPUT_TOL:
            raise InvalidStateError("State vector is not normalised", {"norm": norm})
        if abs(norm - 1.0) > NORM_TOL:
            v = v / norm
        object.__setattr__(self, "amplitudes", _readonly(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> DensityOperator:
        """Projector |psi><psi|."""
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))

    def amplitude_matrix(self, space: BipartiteSpace) -> np.ndarray:
        """Amplitudes as the d_a x d_b coefficient matrix."""
        space.check_dimension(self.dim)
        return self.amplitudes.reshape(space.d_a, space.d_b)

    def overlap(self, other: PureState) -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """psi = sum_n sqrt(p_n) basis_a[:, n] (x) basis_b[:, n]."""
    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    def rank(self, tol: float = SUPPORT_TOL) -> int:
        """Number of Schmidt coefficients above ``tol``."""
        return int(np.count_nonzero(self.coefficients > tol))

    def reconstruct(self) -> np.ndarray:
        """Composite amplitude vector rebuilt from the Schmidt form."""
        scaled = self.basis_a * np.sqrt(self.coefficients)
        return (scaled @ self.basis_b.T).ravel()


@dataclass(frozen=True, eq=False)
class TensorPower:
    """n-fold power regrouped as A_1..A_n | B_1..B_n.

    Each party's multi-level basis is ordered by increasing total energy, so
    ``space`` carries nondecreasing spectra; ``order_a`` and ``order_b`` map new
    local indices to lexicographic multi-indices.
    """
    state: Union[DensityOperator, PureState]
    space: BipartiteSpace
    copies: int
    order_a: np.ndarray = field(repr=False)
    order_b: np.ndarray = field(repr=False)


def as_matrix(x: MatrixLike) -> np.ndarray:
    """Dense matrix of a state or array; pure states become projectors."""
    if isinstance(x, DensityOperator):
        return x.matrix
    if isinstance(x, PureState):
        return np.outer(x.amplitudes, x.amplitudes.conj())
    return np.asarray(x, dtype=complex)


def as_density(x: Union[DensityOperator, PureState]) -> DensityOperator:
    """Density operator of either state kind."""
    return x.density() if isinstance(x, PureState) else x


def basis_state(space: BipartiteSpace, a: int, b: int) -> PureState:
    """Product basis vector |a, b>."""
    v = np.zeros(space.dim, dtype=complex)
    v[space.index(a, b)] = 1.0
    return PureState(v)


def product_state(psi_a: np.ndarray, psi_b: np.ndarray) -> PureState:
    """psi_a (x) psi_b with each factor normalised first."""
    a = np.asarray(psi_a, dtype=complex)
    b = np.asarray(psi_b, dtype=complex)
    return PureState(np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b)))


def phi_plus(space: BipartiteSpace, k: int) -> PureState:
    """(|k,k> + |k+1,k+1>)/sqrt(2)."""
    v = np.zeros(space.dim, dtype=complex)
    v[space.index(k, k)] = v[space.index(k + 1, k + 1)] = 1 / np.sqrt(2)
    return PureState(v)


def bell_state(space: BipartiteSpace) -> PureState:
    """(|0,0> + |1,1>)/sqrt(2)."""
    return phi_plus(space, 0)


def mix(
    states: Sequence[Union[DensityOperator, PureState]],
    weights: Sequence[float],
) -> DensityOperator:
    """Convex combination sum_i w_i rho_i."""
    w = np.asarray(weights, dtype=float)
    if len(states) != len(w) or np.any(w < 0) or abs(w.sum() - 1.0) > TRACE_TOL:
        raise InvalidArgumentError("Mixture weights must form a distribution", {"weights": w.tolist()})
    return DensityOperator(sum(wi * as_matrix(s) for wi, s in zip(w, states)))


def apply_unitary(state: Union[DensityOperator, PureState], unitary: np.ndarray):
    """U psi for pure states, U rho U^dagger otherwise."""
    if isinstance(state, PureState):
        return PureState(unitary @ state.amplitudes)
    return DensityOperator(unitary @ state.matrix @ unitary.conj().T)


def schmidt_decompose(psi: PureState, space: BipartiteSpace) -> SchmidtForm:
    """Schmidt coefficients (squared, nonincreasing) and local bases of psi."""
    norm = float(np.linalg.norm(psi.amplitudes))
    if abs(norm - 1.0) > NORM_INPUT_TOL:
        raise InvalidStateError("State vector is not normalised", {"norm": norm})
    u, s, vh = np.linalg.svd(psi.amplitude_matrix(space), full_matrices=False)
    return SchmidtForm(coefficients=s**2, basis_a=u, basis_b=vh.T)


def _check(rho: MatrixLike, space: BipartiteSpace) -> np.ndarray:
    m = as_matrix(rho)
    space.check_dimension(m.shape[0])
    return m


def partial_trace_b(rho: Union[DensityOperator, PureState], space: BipartiteSpace) -> DensityOperator:
    """Reduced state on A."""
    m = _check(rho, space).reshape(space.d_a, space.d_b, space.d_a, space.d_b)
    return DensityOperator(np.einsum("ajbj->ab", m))


def partial_trace_a(rho: Union[DensityOperator, PureState], space: BipartiteSpace) -> DensityOperator:
    """Reduced state on B."""
    m = _check(rho, space).reshape(space.d_a, space.d_b, space.d_a, space.d_b)
    return DensityOperator(np.einsum("jajb->ab", m))


def partial_transpose_a(rho: MatrixLike, space: BipartiteSpace) -> np.ndarray:
    """Entry ((a,b),(a',b')) moves to ((a',b),(a,b')); the result may be non-PSD."""
    m = _check(rho, space).reshape(space.d_a, space.d_b, space.d_a, space.d_b)
    return m.transpose(2, 1, 0, 3).reshape(space.dim, space.dim)


def is_npt(rho: MatrixLike, space: BipartiteSpace, tol: float) -> tuple[bool, float]:
    """Peres-Horodecki test.

    Returns:
        (npt, witness): ``npt`` is True when the smallest eigenvalue of the
        partial transpose is below ``-tol``; ``witness`` is that eigenvalue.
    """
    if not tol > 0:
        raise InvalidArgumentError("NPT tolerance must be positive", {"tol": tol})
    witness = float(np.linalg.eigvalsh(partial_transpose_a(rho, space))[0])
    return witness < -tol, witness


def trace_norm_distance(x: MatrixLike, y: MatrixLike) -> float:
    """||x - y||_1 as the sum of absolute eigenvalues of the difference."""
    mx, my = as_matrix(x), as_matrix(y)
    if mx.shape != my.shape:
        raise InvalidArgumentError("Dimension mismatch", {"shapes": (mx.shape, my.shape)})
    diff = mx - my
    return float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


def pure_trace_distance(psi: PureState, phi: PureState) -> float:
    """2 sqrt(1 - |<psi|phi>|^2), without materialising density matrices."""
    if psi.dim != phi.dim:
        raise InvalidArgumentError("Dimension mismatch", {"dims": (psi.dim, phi.dim)})
    infidelity = 1.0 - abs(psi.overlap(phi)) ** 2
    if infidelity <= 4 * np.finfo(float).eps:
        return 0.0
    return 2.0 * float(np.sqrt(infidelity))


def cutoff_mask(space: BipartiteSpace, cutoff: int) -> np.ndarray:
    """Composite indices with both local levels below ``cutoff`` (the range of pi_k)."""
    a = np.arange(space.d_a)[:, None] < cutoff
    b = np.arange(space.d_b)[None, :] < cutoff
    return (a & b).ravel()


def project_to_cutoff(rho: MatrixLike, space: BipartiteSpace, cutoff: int) -> np.ndarray:
    """Unnormalised pi_k rho pi_k."""
    m = _check(rho, space).copy()
    outside = ~cutoff_mask(space, cutoff)
    m[outside, :] = 0
    m[:, outside] = 0
    return m


def restrict_to_block(
    rho: MatrixLike,
    space: BipartiteSpace,
    levels: Sequence[int],
) -> tuple[np.ndarray, BipartiteSpace]:
    """Unnormalised compression of rho onto span{|i,j> : i, j in levels}."""
    indices = [space.index(a, b) for a in levels for b in levels]
    m = _check(rho, space)
    block_space = BipartiteSpace(
        SpectrumSpec(tuple(space.spec_a.levels[a] for a in levels)),
        SpectrumSpec(tuple(space.spec_b.levels[b] for b in levels)),
    )
    return m[np.ix_(indices, indices)], block_space


def _power_party(spec: SpectrumSpec, copies: int) -> tuple[SpectrumSpec, np.ndarray]:
    energies = reduce(np.add.outer, [spec.as_array()] * copies).ravel()
    order = np.argsort(energies, kind="stable")
    return SpectrumSpec(tuple(energies[order])), order


def _power_layout(space: BipartiteSpace, copies: int):
    spec_a, order_a = _power_party(space.spec_a, copies)
    spec_b, order_b = _power_party(space.spec_b, copies)
    power_space = BipartiteSpace(spec_a, spec_b)
    perm = (order_a[:, None] * power_space.d_b + order_b[None, :]).ravel()
    return power_space, order_a, order_b, perm


def _check_copies(copies: int) -> None:
    if copies < 1:
        raise InvalidArgumentError("Number of copies must be at least 1", {"copies": copies})


def tensor_power(
    rho: Union[DensityOperator, PureState],
    space: BipartiteSpace,
    copies: int,
    cap: Optional[int] = None,
) -> TensorPower:
    """rho^{(x) n} on the A^n | B^n bipartition.

    Args:
        rho: State on ``space``
        space: Single-copy space
        copies: Number of copies n
        cap: Largest composite dimension allowed (defaults to TENSOR_POWER_CAP)

    Returns:
        TensorPower: Regrouped power with its space
    """
    _check_copies(copies)
    cap = cap or settings.TENSOR_POWER_CAP
    if space.dim**copies > cap:
        raise ResourceLimitError(
            f"Tensor power exceeds TENSOR_POWER_CAP={cap}",
            {"dimension": space.dim**copies, "cap": cap, "copies": copies},
        )
    m = _check(rho, space)
    power_space, order_a, order_b, perm = _power_layout(space, copies)
    full = reduce(np.kron, [m] * copies)
    axes = full.reshape((space.d_a, space.d_b) * (2 * copies))
    rows_a = list(range(0, 2 * copies, 2))
    rows_b = list(range(1, 2 * copies, 2))
    order = rows_a + rows_b + [2 * copies + i for i in rows_a] + [2 * copies + i for i in rows_b]
    grouped = axes.transpose(order).reshape(power_space.dim, power_space.dim)
    logger.debug(f"Tensor power n={copies} of dims {space.dims} -> {power_space.dims}")
    return TensorPower(
        state=DensityOperator(grouped[np.ix_(perm, perm)]),
        space=power_space,
        copies=copies,
        order_a=order_a,
        order_b=order_b,
    )


def tensor_power_pure(
    psi: PureState,
    space: BipartiteSpace,
    copies: int,
    cap: Optional[int] = None,
) -> TensorPower:
    """Vector path of :func:`tensor_power`, capped by PURE_POWER_CAP."""
    _check_copies(copies)
    cap = cap or settings.PURE_POWER_CAP
    if space.dim**copies > cap:
        raise ResourceLimitError(
            f"Tensor power exceeds PURE_POWER_CAP={cap}",
            {"dimension": space.dim**copies, "cap": cap, "copies": copies},
        )
    space.check_dimension(psi.dim)
    power_space, order_a, order_b, perm = _power_layout(space, copies)
    full = reduce(np.kron, [psi.amplitudes] * copies)
    axes = full.reshape((space.d_a, space.d_b) * copies)
    grouped = axes.transpose(list(range(0, 2 * copies, 2)) + list(range(1, 2 * copies, 2))).ravel()
    return TensorPower(
        state=PureState(grouped[perm]),
        space=power_space,
        copies=copies,
        order_a=order_a,
        order_b=order_b,
    )


# Random states


def random_unit_vector(dimension: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector from complex Gaussian entries."""
    z = rng.normal(size=dimension) + 1j * rng.normal(size=dimension)
    return z / np.linalg.norm(z)


def random_pure_state(space: BipartiteSpace, rng: np.random.Generator) -> PureState:
    """Haar-random pure state on the composite space."""
    return PureState(random_unit_vector(space.dim, rng))


def random_product_state(space: BipartiteSpace, rng: np.random.Generator) -> PureState:
    """Product of independent Haar-random local vectors."""
    return product_state(random_unit_vector(space.d_a, rng), random_unit_vector(space.d_b, rng))


def random_density(
    space: BipartiteSpace,
    rng: np.random.Generator,
    rank: Optional[int] = None,
) -> DensityOperator:
    """Ginibre-distributed state; full rank unless ``rank`` is given."""
    rank = rank or space.dim
    g = rng.normal(size=(space.dim, rank)) + 1j * rng.normal(size=(space.dim, rank))
    m = g @ g.conj().T
    return DensityOperator(m / np.real(np.trace(m)))


def random_separable(space: BipartiteSpace, rng: np.random.Generator, terms: int) -> DensityOperator:
    """Explicit mixture of ``terms`` random product states."""
    weights = rng.dirichlet(np.ones(terms))
    return mix([random_product_state(space, rng) for _ in range(terms)], weights)


def random_local_unitary(space: BipartiteSpace, rng: np.random.Generator) -> np.ndarray:
    """U_A (x) U_B with Haar-random factors."""
    u_a = unitary_group.rvs(space.d_a, random_state=rng)
    u_b = unitary_group.rvs(space.d_b, random_state=rng)
    return np.kron(u_a, u_b)
