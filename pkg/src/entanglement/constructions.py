"""Explicit state families and sequence harnesses.

Covers the infinite-entanglement example sequence, the dense infinite-entropy
tail weights, dense entangled neighbours inside an energy budget, and the
per-copy and energy-bounded continuity tables built on the entropy of
entanglement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel
from scipy.special import xlogy

from shared.config import settings
from shared.constants import FANNES_T_MAX, SUPPORT_TOL, NeighborBranch
from shared.errors import (
    BudgetViolationError,
    ConstructionFailedError,
    InvalidArgumentError,
)
from shared.logger import get_logger

from .measures import LN2, entropy_of_entanglement, fannes_bound, shannon_entropy
from .space import BipartiteSpace, EnergyBudget, harmonic_space, mean_energy
from .states import (
    DensityOperator,
    PureState,
    SchmidtForm,
    TensorPower,
    as_density,
    basis_state,
    bell_state,
    cutoff_mask,
    partial_transpose_a,
    phi_plus,
    project_to_cutoff,
    pure_trace_distance,
    restrict_to_block,
    schmidt_decompose,
    tensor_power_pure,
    trace_norm_distance,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class ContinuityRow:
    """One row of a distance-versus-gap table (also the CSV row of ``continuity``)."""
    index: int
    trace_distance: float
    gap_bits: float
    fannes_bound_bits: Optional[float] = None


def _fannes_or_none(t: float, d: int) -> Optional[float]:
    return fannes_bound(t, d) if 0.0 <= t <= FANNES_T_MAX else None


# Example 1: finite entanglement gap at vanishing distance


class Example1Report(BaseModel):
    k: int
    delta_k: float
    entanglement_bits: float
    trace_distance_to_ground: float
    mean_energy: float


def example1_delta(k: int) -> float:
    """delta_k = 1/log2(k)."""
    if k < 2:
        raise InvalidArgumentError("Example sequence starts at k = 2", {"k": k})
    return 1.0 / math.log2(k)


def example1_state(k: int, space: BipartiteSpace) -> PureState:
    """psi_k = sqrt(1-delta) |0,0> + sqrt(delta/k) sum_{n=1..k} |n,n>."""
    delta = example1_delta(k)
    if k > min(space.d_a, space.d_b) - 1:
        raise InvalidArgumentError(
            "k exceeds the local cutoff", {"k": k, "dims": space.dims}
        )
    v = np.zeros(space.dim, dtype=complex)
    v[space.index(0, 0)] = math.sqrt(1.0 - delta)
    for n in range(1, k + 1):
        v[space.index(n, n)] = math.sqrt(delta / k)
    return PureState(v)


def example1_analytic(k: int) -> Example1Report:
    """Closed forms for psi_k under the ladder eps(n) = n; no matrices involved."""
    delta = example1_delta(k)
    entanglement = -float(xlogy(1.0 - delta, 1.0 - delta)) / LN2 + delta * (math.log2(k) - math.log2(delta))
    return Example1Report(
        k=k,
        delta_k=delta,
        entanglement_bits=entanglement,
        trace_distance_to_ground=2.0 * math.sqrt(delta),
        mean_energy=delta * (k + 1),
    )


def example1_matrix_report(k: int, space: Optional[BipartiteSpace] = None) -> Example1Report:
    """Same quantities as :func:`example1_analytic`, evaluated on materialised vectors."""
    space = space or harmonic_space(k + 1, k + 1)
    psi = example1_state(k, space)
    return Example1Report(
        k=k,
        delta_k=example1_delta(k),
        entanglement_bits=entropy_of_entanglement(psi, space),
        trace_distance_to_ground=pure_trace_distance(psi, basis_state(space, 0, 0)),
        mean_energy=mean_energy(space, psi),
    )


def example1_scan(kmin: int, kmax: int) -> List[Example1Report]:
    """Analytic reports for k = kmin, 2 kmin, 4 kmin, ... up to kmax."""
    if kmin < 2 or kmax < kmin:
        raise InvalidArgumentError("Need 2 <= kmin <= kmax", {"kmin": kmin, "kmax": kmax})
    reports = []
    k = kmin
    while k <= kmax:
        reports.append(example1_analytic(k))
        k *= 2
    return reports


# Dense infinite-entropy perturbations


@dataclass(frozen=True, eq=False)
class TailWeights:
    """q(n) = (p(n) + c(n)) / delta over n = 1..cutoff."""
    base: np.ndarray
    k: int
    cutoff: int
    weights: np.ndarray
    delta: float

    @property
    def unnormalized(self) -> np.ndarray:
        return self.weights * self.delta


def prop2_weights(
    p: Sequence[float],
    k: int,
    cutoff: int,
    tail_scale: float = 1.0,
) -> TailWeights:
    """Tail-augmented distribution with c(1) = 0 and c(n) = 1/(k n log2(n)^2).

    Args:
        p: Base probabilities p(1), p(2), ... (at most ``cutoff`` entries)
        k: Sequence index; the tail shrinks like 1/k
        cutoff: Truncation N >= 4
        tail_scale: Multiplier on the tail; 0 gives the degenerate case q = p

    Returns:
        TailWeights: Normalised weights over n = 1..N
    """
    base = np.asarray(p, dtype=float).ravel()
    if k < 1 or cutoff < 4:
        raise InvalidArgumentError("Need k >= 1 and cutoff >= 4", {"k": k, "cutoff": cutoff})
    if base.size == 0 or base.size > cutoff or np.any(base < 0) or base.sum() > 1.0 + 1e-12:
        raise InvalidArgumentError(
            "Base weights must be a nonnegative sub-distribution within the cutoff",
            {"size": int(base.size), "sum": float(base.sum()) if base.size else 0.0},
        )
    padded = np.zeros(cutoff)
    padded[: base.size] = base
    n = np.arange(2, cutoff + 1, dtype=float)
    tail = np.zeros(cutoff)
    tail[1:] = tail_scale / (k * n * np.log2(n) ** 2)
    unnormalized = padded + tail
    delta = float(unnormalized.sum())
    if delta <= 0:
        raise InvalidArgumentError("Weights vanish identically", {"k": k})
    return TailWeights(base=padded, k=k, cutoff=cutoff, weights=unnormalized / delta, delta=delta)


def prop2_entropy_growth(
    p: Sequence[float],
    k: int,
    cutoffs: Sequence[int],
    tail_scale: float = 1.0,
) -> List[Tuple[int, float]]:
    """Entropy (bits) of the normalised tail weights at each cutoff."""
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise InvalidArgumentError("Cutoffs must be increasing", {"cutoffs": list(cutoffs)})
    growth = []
    for cutoff in cutoffs:
        entropy = shannon_entropy(prop2_weights(p, k, cutoff, tail_scale).weights)
        logger.debug(f"Tail entropy at N={cutoff}: {entropy:.6f} bits")
        growth.append((cutoff, entropy))
    return growth


# Dense entangled neighbours inside an energy budget


class NeighborCertificate(BaseModel):
    k: int
    branch: NeighborBranch
    mixing_weight: float
    theta: Optional[float] = None
    block_levels: Tuple[int, int]
    trace_distance: float
    mean_energy: float
    npt_witness: float
    eps: float
    budget: float
    tol: float


def block_npt_witness(rho: Union[DensityOperator, np.ndarray], space: BipartiteSpace, k: int) -> float:
    """Smallest partial-transpose eigenvalue of rho compressed onto levels {k, k+1}^2."""
    block, block_space = restrict_to_block(rho, space, (k, k + 1))
    return float(np.linalg.eigvalsh(partial_transpose_a(block, block_space))[0])


@dataclass
class _NeighborScan:
    sigma: DensityOperator
    space: BipartiteSpace
    eps: float
    budget: EnergyBudget
    tol: float
    hamiltonian: np.ndarray
    log: List[Dict[str, Any]] = field(default_factory=list)

    def energy(self, m: np.ndarray) -> float:
        return float(np.real(np.diag(m)) @ self.hamiltonian)

    def attempt(
        self,
        m: np.ndarray,
        k: int,
        branch: NeighborBranch,
        weight: float,
        theta: Optional[float] = None,
    ) -> Optional[Tuple[DensityOperator, NeighborCertificate]]:
        """Log a candidate; certify it when every acceptance test passes."""
        distance = trace_norm_distance(self.sigma, m)
        energy = self.energy(m)
        witness = block_npt_witness(m, self.space, k)
        accepted = distance < self.eps and self.budget.admits(energy) and witness < -self.tol
        self.log.append({
            "k": k,
            "branch": branch.value,
            "mixing_weight": weight,
            "theta": theta,
            "trace_distance": distance,
            "mean_energy": energy,
            "npt_witness": witness,
            "accepted": accepted,
        })
        if not accepted:
            return None
        certificate = NeighborCertificate(
            k=k,
            branch=branch,
            mixing_weight=weight,
            theta=theta,
            block_levels=(k, k + 1),
            trace_distance=distance,
            mean_energy=energy,
            npt_witness=witness,
            eps=self.eps,
            budget=self.budget.M,
            tol=self.tol,
        )
        return DensityOperator(m), certificate

    def pair_energy(self, k: int, theta: float) -> float:
        """Mean energy of cos(theta)|k,k> + sin(theta)|k+1,k+1>."""
        spec_a, spec_b = self.space.spec_a.levels, self.space.spec_b.levels
        return (
            math.cos(theta) ** 2 * (spec_a[k] + spec_b[k])
            + math.sin(theta) ** 2 * (spec_a[k + 1] + spec_b[k + 1])
        )

    def tail_block(self, k: int, theta_steps: int):
        """rho = pi_k sigma pi_k + (1 - lambda_k)|phi_k><phi_k| for the largest admissible theta."""
        projected = project_to_cutoff(self.sigma, self.space, k)
        lam = float(np.real(np.trace(projected)))
        released = self.energy(self.sigma.matrix) - self.energy(projected)
        for j in range(theta_steps, 0, -1):
            theta = (math.pi / 4) * j / theta_steps
            if released < (1.0 - lam) * self.pair_energy(k, theta):
                continue
            phi = np.zeros(self.space.dim, dtype=complex)
            phi[self.space.index(k, k)] = math.cos(theta)
            phi[self.space.index(k + 1, k + 1)] = math.sin(theta)
            m = projected + (1.0 - lam) * np.outer(phi, phi.conj())
            result = self.attempt(m, k, NeighborBranch.TAIL_BLOCK, 1.0 - lam, theta)
            if result is not None:
                return result
        return None

    def uniform_mixture(self, k: int):
        """rho = (1 - w) sigma + w |phi_k^+><phi_k^+| with w = min(1/k, eps/4), budget permitting."""
        target = phi_plus(self.space, k).density().matrix
        energy_sigma = self.energy(self.sigma.matrix)
        energy_target = self.energy(target)
        weight = min(1.0 / k, self.eps / 4)
        if not self.budget.admits((1 - weight) * energy_sigma + weight * energy_target):
            weight = 0.5 * (self.budget.M - energy_sigma) / (energy_target - energy_sigma)
        m = (1 - weight) * self.sigma.matrix + weight * target
        return self.attempt(m, k, NeighborBranch.UNIFORM_MIXTURE, weight)


def _scan_order(eps: float, k_max: int, k_start: Optional[int]) -> List[int]:
    k0 = k_start if k_start is not None else min(math.ceil(4.0 / eps), k_max)
    k0 = max(1, min(k0, k_max))
    return list(range(k0, k_max + 1)) + list(range(k0 - 1, 0, -1))


def dense_entangled_neighbor(
    sigma: Union[DensityOperator, PureState],
    space: BipartiteSpace,
    eps: float,
    budget: EnergyBudget,
    tol: float,
    k_start: Optional[int] = None,
    theta_steps: Optional[int] = None,
) -> Tuple[DensityOperator, NeighborCertificate]:
    """Entangled rho with ||sigma - rho||_1 < eps and tr[H rho] < M.

    Blocks L_k = span{|i,j> : i, j in {k, k+1}} are scanned from
    k0 = min(ceil(4/eps), k_max) upward, then downward. At each k the
    tail-block construction is tried when lambda_k = tr[pi_k sigma] < 1, then
    the uniform mixture with phi_k^+. For eps > 2 the Bell state on levels
    {0, 1} is tried first.

    Args:
        sigma: State inside the budget
        space: Space large enough to host at least the block L_1
        eps: Trace-distance radius
        budget: Energy budget M (strict)
        tol: Certificate threshold; the block witness must be below -tol
        k_start: Overrides k0
        theta_steps: Angles tried per tail block (defaults to NEIGHBOR_THETA_STEPS)

    Returns:
        The neighbour and its certificate.

    Raises:
        BudgetViolationError: If sigma is not strictly inside the budget
        ConstructionFailedError: If no candidate satisfies all three conditions
    """
    sigma = as_density(sigma)
    space.check_dimension(sigma.dim)
    if not eps > 0 or not tol > 0:
        raise InvalidArgumentError("eps and tol must be positive", {"eps": eps, "tol": tol})
    scan = _NeighborScan(sigma, space, eps, budget, tol, space.hamiltonian_diagonal())
    energy_sigma = scan.energy(sigma.matrix)
    if not budget.admits(energy_sigma):
        raise BudgetViolationError(
            "State outside S_M", {"mean_energy": energy_sigma, "M": budget.M}
        )
    theta_steps = theta_steps or settings.NEIGHBOR_THETA_STEPS

    if eps > 2:
        result = scan.attempt(bell_state(space).density().matrix, 0, NeighborBranch.DIAMETER, 1.0)
        if result is not None:
            return result

    k_max = min(space.d_a, space.d_b) - 2
    if k_max < 1:
        raise ConstructionFailedError(
            "Truncation too small to host an unused 2x2 block", scan.log, {"dims": space.dims}
        )
    for k in _scan_order(eps, k_max, k_start):
        lam = float(np.real(project_to_cutoff(sigma, space, k).trace()))
        result = None
        if lam < 1.0 - SUPPORT_TOL:
            result = scan.tail_block(k, theta_steps)
        if result is None:
            result = scan.uniform_mixture(k)
        if result is not None:
            certificate = result[1]
            logger.info(
                f"Neighbour found at k={k} via {certificate.branch.value}: "
                f"distance={certificate.trace_distance:.3g}, energy={certificate.mean_energy:.6g}, "
                f"witness={certificate.npt_witness:.3g}"
            )
            return result
    raise ConstructionFailedError(
        "No entangled neighbour within the truncation", scan.log, {"eps": eps, "M": budget.M}
    )


def verify_neighbor(
    sigma: Union[DensityOperator, PureState],
    rho: DensityOperator,
    certificate: NeighborCertificate,
    space: BipartiteSpace,
) -> bool:
    """Recheck a certificate from scratch with the state and space modules."""
    distance = trace_norm_distance(as_density(sigma), rho)
    energy = mean_energy(space, rho)
    witness = block_npt_witness(rho, space, certificate.k)
    return (
        distance < certificate.eps
        and energy < certificate.budget
        and witness < -certificate.tol
    )


# Continuity harnesses for the entropy of entanglement


def _with_weights(schmidt: SchmidtForm, weights: np.ndarray) -> PureState:
    return PureState(SchmidtForm(weights, schmidt.basis_a, schmidt.basis_b).reconstruct())


def energy_bounded_continuity_table(
    sigma: PureState,
    space: BipartiteSpace,
    budget: EnergyBudget,
    scales: Sequence[float],
    target: Optional[Sequence[float]] = None,
) -> List[ContinuityRow]:
    """|E(sigma_s) - E(sigma)| against ||sigma_s - sigma||_1 inside a fixed budget.

    sigma_s keeps sigma's Schmidt bases and moves its Schmidt weights towards
    ``target`` (default: all weight on the largest coefficient) by ``s``.
    """
    schmidt = schmidt_decompose(sigma, space)
    p = schmidt.coefficients
    goal = np.zeros_like(p) if target is None else np.asarray(target, dtype=float)
    if target is None:
        goal[0] = 1.0
    d_eff = max(2, p.size)
    reference = entropy_of_entanglement(sigma, space)
    if not budget.admits(mean_energy(space, sigma)):
        raise BudgetViolationError("Reference state outside S_M", {"M": budget.M})
    rows = []
    for index, s in enumerate(scales):
        perturbed = _with_weights(schmidt, (1 - s) * p + s * goal)
        energy = mean_energy(space, perturbed)
        if not budget.admits(energy):
            raise BudgetViolationError(
                "Perturbed state leaves S_M", {"scale": s, "mean_energy": energy, "M": budget.M}
            )
        t = pure_trace_distance(sigma, perturbed)
        rows.append(ContinuityRow(
            index=index,
            trace_distance=t,
            gap_bits=abs(entropy_of_entanglement(perturbed, space) - reference),
            fannes_bound_bits=_fannes_or_none(t, d_eff),
        ))
    return rows


Schedule = Callable[[int, TensorPower], PureState]


def exact_schedule(copies: int, power: TensorPower) -> PureState:
    """The power itself, so every gap is zero."""
    return power.state


def schmidt_weight_schedule(scale: float = 1.0, exponent: float = 2.0) -> Schedule:
    """Adds scale/n^exponent to the largest Schmidt weight of sigma^{(x) n}, renormalised."""
    def schedule(copies: int, power: TensorPower) -> PureState:
        schmidt = schmidt_decompose(power.state, power.space)
        weights = schmidt.coefficients.copy()
        weights[0] += scale / copies**exponent
        return _with_weights(schmidt, weights / weights.sum())
    return schedule


@dataclass(frozen=True)
class GapTable:
    rows: List[ContinuityRow]
    converging: bool


def asymptotic_gap_table(
    sigma: PureState,
    space: BipartiteSpace,
    n_max: int,
    schedule: Optional[Schedule] = None,
) -> GapTable:
    """Per-copy gaps |E(sigma^{(x) n}) - E(sigma_n)|/n for n = 1..n_max.

    sigma is first mapped onto its Schmidt support (local isometries leave E
    unchanged), so the effective local dimension is its Schmidt rank.
    """
    schedule = schedule or schmidt_weight_schedule()
    schmidt = schmidt_decompose(sigma, space)
    rank = schmidt.rank()
    if rank > 4:
        raise InvalidArgumentError("Schmidt rank must be at most 4", {"rank": rank})
    d_eff = max(rank, 2)
    local_space = harmonic_space(d_eff, d_eff)
    local = np.zeros(local_space.dim, dtype=complex)
    for n in range(d_eff):
        local[local_space.index(n, n)] = math.sqrt(schmidt.coefficients[n]) if n < schmidt.coefficients.size else 0.0
    local_state = PureState(local)

    rows = []
    for copies in range(1, n_max + 1):
        power = tensor_power_pure(local_state, local_space, copies)
        perturbed = schedule(copies, power)
        t = pure_trace_distance(power.state, perturbed)
        gap = abs(
            entropy_of_entanglement(power.state, power.space)
            - entropy_of_entanglement(perturbed, power.space)
        ) / copies
        fannes = _fannes_or_none(t, d_eff**copies)
        rows.append(ContinuityRow(
            index=copies,
            trace_distance=t,
            gap_bits=gap,
            fannes_bound_bits=None if fannes is None else fannes / copies,
        ))
        logger.debug(f"n={copies}: distance={t:.4g}, per-copy gap={gap:.4g}")
    distances = [row.trace_distance for row in rows]
    converging = all(b <= a + 1e-15 for a, b in zip(distances, distances[1:])) and (
        distances[-1] < distances[0] or distances[-1] == 0.0
    )
    if not converging:
        logger.warning("Perturbation schedule does not bring sigma_n closer to sigma^n")
    return GapTable(rows=rows, converging=converging)


# Truncation programme


@dataclass(frozen=True)
class TruncationRow:
    cutoff: int
    retained_weight: float
    trace_distance: float
    entanglement_bits: float


def truncation_convergence_table(
    psi: PureState,
    space: BipartiteSpace,
    cutoffs: Sequence[int],
) -> List[TruncationRow]:
    """Entanglement of the renormalised projections pi_k psi for each cutoff k."""
    rows = []
    for cutoff in cutoffs:
        kept = np.where(cutoff_mask(space, cutoff), psi.amplitudes, 0.0)
        weight = float(np.vdot(kept, kept).real)
        if weight <= SUPPORT_TOL:
            raise InvalidArgumentError("Projection onto the cutoff vanishes", {"cutoff": cutoff})
        truncated = PureState(kept / math.sqrt(weight))
        rows.append(TruncationRow(
            cutoff=cutoff,
            retained_weight=weight,
            trace_distance=pure_trace_distance(psi, truncated),
            entanglement_bits=entropy_of_entanglement(truncated, space),
        ))
    return rows
