"""Entropy functionals, bounds and the matrix-logarithm derivative.

Public entropies are in bits. Free energies are in natural units (energy units
of the spectrum) with the entropy converted to nats at the boundary.
"""

from __future__ import annotations

import math
from typing import Any, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.special import entr, xlogy

from shared.constants import (
    DIVIDED_DIFFERENCE_RTOL,
    FANNES_T_MAX,
    LOG_DERIVATIVE_MIN_EIGENVALUE,
    PSD_TOL,
    SUPPORT_TOL,
    CertificateTag,
)
from shared.errors import (
    IllConditionedError,
    InvalidArgumentError,
    InvalidStateError,
    OutOfDomainError,
)
from shared.logger import get_logger

from .space import BipartiteSpace, mean_energy, partition_function
from .states import (
    DensityOperator,
    MatrixLike,
    PureState,
    as_matrix,
    partial_trace_b,
    schmidt_decompose,
)

logger = get_logger(__name__)

LN2 = math.log(2.0)


class Diagnostics(BaseModel):
    """Solver diagnostics attached to a measure value."""
    certificate: CertificateTag
    iterations: int = 0
    gap: Optional[float] = None
    seed: Optional[int] = None
    restarts: Optional[int] = None
    history: List[float] = Field(default_factory=list)
    monotone: Optional[bool] = None  # set by iterative solvers whose objective must not increase
    notes: List[str] = Field(default_factory=list)

    @field_validator("gap")
    @classmethod
    def _gap_nonnegative(cls, gap: Optional[float]) -> Optional[float]:
        if gap is not None and gap < 0:
            raise ValueError("gap must be nonnegative")
        return gap


class MeasureReport(BaseModel):
    """Value in bits plus diagnostics.

    ``witness`` holds the optimiser's final object (separable state or
    decomposition) and is excluded from serialisation.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    measure: str
    value: float
    diagnostics: Diagnostics
    witness: Optional[Any] = Field(default=None, exclude=True)

    @field_validator("value")
    @classmethod
    def _value_nonnegative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("entanglement values are nonnegative")
        return value


def _clamped_spectrum(rho: MatrixLike) -> np.ndarray:
    if isinstance(rho, DensityOperator):
        eigenvalues = np.array(rho.spectrum)
    else:
        m = as_matrix(rho)
        eigenvalues = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if eigenvalues.size and eigenvalues[0] < -PSD_TOL:
        raise InvalidStateError(
            "Negative eigenvalue beyond numerical tolerance",
            {"min_eigenvalue": float(eigenvalues[0])},
        )
    return np.clip(eigenvalues, 0.0, None)


def shannon_entropy(probabilities) -> float:
    """-sum p log2 p with 0 log 0 = 0."""
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    return float(entr(p).sum() / LN2)


def binary_entropy(x: float) -> float:
    """H2(x) in bits."""
    return shannon_entropy([x, 1.0 - x])


def entropy_nats(rho: MatrixLike) -> float:
    """von Neumann entropy in nats."""
    return float(entr(_clamped_spectrum(rho)).sum())


def von_neumann_entropy(rho: MatrixLike) -> float:
    """S(rho) = -tr[rho log2 rho] in bits."""
    return entropy_nats(rho) / LN2


def _pure_argument(psi: Union[PureState, DensityOperator]) -> PureState:
    if isinstance(psi, PureState):
        return psi
    if not psi.is_pure():
        raise InvalidArgumentError(
            "Entropy of entanglement needs a pure state; use E_F or E_R for mixed states",
            {"purity": psi.purity()},
        )
    return psi.dominant_vector()


def entanglement_entropy_via_marginal(psi: Union[PureState, DensityOperator], space: BipartiteSpace) -> float:
    """E = S(tr_B |psi><psi|)."""
    return von_neumann_entropy(partial_trace_b(_pure_argument(psi), space))


def entropy_of_entanglement(
    psi: Union[PureState, DensityOperator],
    space: BipartiteSpace,
    method: Literal["schmidt", "marginal"] = "schmidt",
) -> float:
    """Entropy of entanglement of a pure state in bits.

    Args:
        psi: Pure state (a density operator is accepted when it is pure)
        space: Space the state lives on
        method: ``schmidt`` uses the squared Schmidt coefficients,
            ``marginal`` the spectrum of the reduced state

    Returns:
        float: E(psi) in bits
    """
    psi = _pure_argument(psi)
    if method == "marginal":
        return entanglement_entropy_via_marginal(psi, space)
    return shannon_entropy(schmidt_decompose(psi, space).coefficients)


def relative_entropy_nats(rho: MatrixLike, sigma: MatrixLike) -> float:
    """tr[rho (ln rho - ln sigma)]; +inf when supp(rho) is not inside supp(sigma)."""
    m_rho, m_sigma = as_matrix(rho), as_matrix(sigma)
    if m_rho.shape != m_sigma.shape:
        raise InvalidArgumentError("Dimension mismatch", {"shapes": (m_rho.shape, m_sigma.shape)})
    lam = _clamped_spectrum(m_rho)
    mu, v = np.linalg.eigh((m_sigma + m_sigma.conj().T) / 2)
    if mu[0] < -PSD_TOL:
        raise InvalidStateError("Negative eigenvalue beyond numerical tolerance", {"min_eigenvalue": float(mu[0])})
    weights = np.real(np.einsum("ij,ik,kj->j", v.conj(), m_rho, v))
    support = mu > SUPPORT_TOL
    if weights[~support].sum() > SUPPORT_TOL:
        return math.inf
    value = float(xlogy(lam, lam).sum() - (weights[support] * np.log(mu[support])).sum())
    return max(value, 0.0)


def relative_entropy(rho: MatrixLike, sigma: MatrixLike) -> float:
    """S(rho || sigma) in bits, possibly +inf."""
    return relative_entropy_nats(rho, sigma) / LN2


def fannes_bound(t: float, d: int) -> float:
    """t log2 d - t log2 t, valid for trace distance 0 <= t <= 1/e.

    Raises:
        OutOfDomainError: If ``t`` lies outside the window; sample pairs with
            distance at most 1/e instead.
    """
    if d < 2:
        raise InvalidArgumentError("Fannes bound needs dimension at least 2", {"d": d})
    if not 0.0 <= t <= FANNES_T_MAX:
        raise OutOfDomainError(
            "Fannes bound is only valid for 0 <= t <= 1/e; restrict the sampler to that window",
            {"t": t, "t_max": FANNES_T_MAX},
        )
    return t * math.log2(d) - float(xlogy(t, t)) / LN2


def gibbs_free_energy(space: BipartiteSpace, beta: float) -> float:
    """F(sigma_beta) = -ln tr[e^{-beta H}] / beta."""
    return -math.log(partition_function(space, beta)) / beta


def free_energy(omega: Union[DensityOperator, PureState], beta: float, space: BipartiteSpace) -> float:
    """F(omega) = tr[omega H] - S_nats(omega)/beta."""
    if not beta > 0:
        raise InvalidArgumentError("Inverse temperature must be positive", {"beta": beta})
    return mean_energy(space, omega) - entropy_nats(as_matrix(omega)) / beta


def log_derivative_action(
    rho: MatrixLike,
    direction: np.ndarray,
    min_eigenvalue: float = LOG_DERIVATIVE_MIN_EIGENVALUE,
) -> np.ndarray:
    """Frechet derivative of ln at rho applied to ``direction``.

    Daleckii-Krein form: in rho's eigenbasis the action is the Hadamard product
    of the direction with the first divided differences of ln.

    Raises:
        IllConditionedError: If the smallest eigenvalue of rho is not above
            ``min_eigenvalue``; mix in a small multiple of the identity first.
    """
    m = as_matrix(rho)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w[0] <= min_eigenvalue:
        raise IllConditionedError(
            "Log-derivative requested at a near-singular state; floor-mix with the maximally mixed state",
            {"min_eigenvalue": float(w[0]), "threshold": min_eigenvalue},
        )
    wi, wj = w[:, None], w[None, :]
    diff = wi - wj
    close = np.abs(diff) <= DIVIDED_DIFFERENCE_RTOL * np.maximum(wi, wj)
    safe = np.where(close, 1.0, diff)
    divided = np.where(close, 2.0 / (wi + wj), np.log1p(safe / wj) / safe)
    rotated = v.conj().T @ np.asarray(direction, dtype=complex) @ v
    return v @ (divided * rotated) @ v.conj().T
