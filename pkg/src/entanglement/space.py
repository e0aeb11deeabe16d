"""Truncated bipartite Hilbert spaces.

Every space is a finite cutoff of a pair of local energy ladders. The composite
basis index is ``i = a * d_b + b`` for local levels ``(a, b)``; the Hamiltonian
``H = H_A (x) 1 + 1 (x) H_B`` is diagonal in that basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np

from shared.errors import InvalidArgumentError
from shared.logger import get_logger

if TYPE_CHECKING:
    from .states import DensityOperator, PureState

logger = get_logger(__name__)


@dataclass(frozen=True)
class SpectrumSpec:
    """Local energy ladder eps(0) <= eps(1) <= ... of one subsystem."""
    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        levels = tuple(float(e) for e in self.levels)
        if not levels:
            raise InvalidArgumentError("Spectrum needs at least one level")
        if not all(math.isfinite(e) for e in levels):
            raise InvalidArgumentError("Spectrum levels must be finite", {"levels": levels})
        if levels[0] < 0:
            raise InvalidArgumentError("Ground energy must be nonnegative", {"ground": levels[0]})
        if any(b < a for a, b in zip(levels, levels[1:])):
            raise InvalidArgumentError("Spectrum levels must be nondecreasing", {"levels": levels})
        object.__setattr__(self, "levels", levels)

    @classmethod
    def harmonic(cls, dimension: int) -> SpectrumSpec:
        """Ladder eps(n) = n truncated to ``dimension`` levels."""
        return cls(tuple(float(n) for n in range(dimension)))

    @property
    def dimension(self) -> int:
        return len(self.levels)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)

    def boltzmann_weights(self, beta: float) -> np.ndarray:
        """Unnormalised e^{-beta eps(n)}, shifted by the ground energy for stability."""
        energies = self.as_array()
        return np.exp(-beta * (energies - energies[0]))

    def partition_function(self, beta: float) -> float:
        """tr[e^{-beta H}] on the truncation."""
        _check_beta(beta)
        return float(np.exp(-beta * self.levels[0]) * self.boltzmann_weights(beta).sum())

    def gibbs_populations(self, beta: float) -> np.ndarray:
        """Normalised Boltzmann weights of the local levels."""
        _check_beta(beta)
        weights = self.boltzmann_weights(beta)
        return weights / weights.sum()


@dataclass(frozen=True)
class BipartiteSpace:
    """Truncated tensor-product space of subsystems A and B."""
    spec_a: SpectrumSpec
    spec_b: SpectrumSpec

    @property
    def d_a(self) -> int:
        return self.spec_a.dimension

    @property
    def d_b(self) -> int:
        return self.spec_b.dimension

    @property
    def dim(self) -> int:
        return self.d_a * self.d_b

    @property
    def dims(self) -> tuple[int, int]:
        return (self.d_a, self.d_b)

    def index(self, a: int, b: int) -> int:
        """Composite index a * d_b + b."""
        if not (0 <= a < self.d_a and 0 <= b < self.d_b):
            raise InvalidArgumentError(
                "Local level outside the truncation", {"level": (a, b), "dims": self.dims}
            )
        return a * self.d_b + b

    def hamiltonian_diagonal(self) -> np.ndarray:
        """Diagonal of H in composite order, entry (a, b) = eps_A(a) + eps_B(b)."""
        return np.add.outer(self.spec_a.as_array(), self.spec_b.as_array()).ravel()

    def hamiltonian(self) -> np.ndarray:
        """H_A (x) I + I (x) H_B as a dense diagonal matrix."""
        return np.diag(self.hamiltonian_diagonal())

    def check_dimension(self, dim: int) -> None:
        """Raise InvalidArgumentError unless ``dim`` equals the composite dimension."""
        if dim != self.dim:
            raise InvalidArgumentError(
                "State dimension does not match the space",
                {"state_dim": dim, "space_dim": self.dim, "dims": self.dims},
            )


@dataclass(frozen=True)
class EnergyBudget:
    """Mean-energy bound M of the set S_M = {rho : tr[rho H] < M}."""
    M: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.M) and self.M > 0):
            raise InvalidArgumentError("Energy budget must be positive", {"M": self.M})

    def admits(self, energy: float) -> bool:
        """Strict test energy < M."""
        return energy < self.M


def _check_beta(beta: float) -> None:
    if not beta > 0:
        raise InvalidArgumentError("Inverse temperature must be positive", {"beta": beta})


def space_from_levels(levels_a: Sequence[float], levels_b: Sequence[float]) -> BipartiteSpace:
    """Space with explicit nondecreasing local spectra."""
    return BipartiteSpace(SpectrumSpec(tuple(levels_a)), SpectrumSpec(tuple(levels_b)))


def harmonic_space(d_a: int, d_b: int) -> BipartiteSpace:
    """Space with the ladder eps(n) = n on both sides.

    Args:
        d_a: Cutoff dimension of A, at least 2
        d_b: Cutoff dimension of B, at least 2

    Returns:
        BipartiteSpace: The truncated space
    """
    if d_a < 2 or d_b < 2:
        raise InvalidArgumentError("Cutoff dimensions must be at least 2", {"dims": (d_a, d_b)})
    return BipartiteSpace(SpectrumSpec.harmonic(d_a), SpectrumSpec.harmonic(d_b))


def partition_function(space: BipartiteSpace, beta: float) -> float:
    """tr[e^{-beta H}] of the composite truncation; it factorises over A and B."""
    return space.spec_a.partition_function(beta) * space.spec_b.partition_function(beta)


def gibbs_state(space: BipartiteSpace, beta: float) -> DensityOperator:
    """Thermal state e^{-beta H} / tr[e^{-beta H}] on the truncation.

    The result is diagonal in the product basis and equals Gibbs(A) (x) Gibbs(B).
    """
    from .states import DensityOperator

    _check_beta(beta)
    populations = np.outer(
        space.spec_a.gibbs_populations(beta), space.spec_b.gibbs_populations(beta)
    ).ravel()
    populations /= populations.sum()
    logger.debug(f"Gibbs state at beta={beta} on dims {space.dims}")
    return DensityOperator(np.diag(populations.astype(complex)))


def mean_energy(space: BipartiteSpace, rho: Union[DensityOperator, PureState]) -> float:
    """tr[rho H]; pure states are evaluated from their amplitudes."""
    diagonal = space.hamiltonian_diagonal()
    amplitudes = getattr(rho, "amplitudes", None)
    if amplitudes is not None:
        space.check_dimension(amplitudes.shape[0])
        populations = np.abs(amplitudes) ** 2
    else:
        space.check_dimension(rho.dim)
        populations = np.real(np.diag(rho.matrix))
    return float(populations @ diagonal)


def in_energy_budget(
    space: BipartiteSpace,
    rho: Union[DensityOperator, PureState],
    budget: EnergyBudget,
) -> bool:
    """Strict membership tr[rho H] < M."""
    return budget.admits(mean_energy(space, rho))
