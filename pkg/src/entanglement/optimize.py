"""Variational entanglement measures for mixed states.

Relative entropy of entanglement is minimised over explicit separable mixtures
by a pairwise Frank-Wolfe method whose linear-minimisation oracle returns a
product pure state. Entanglement of formation is minimised over ensemble
decompositions, parametrised by a unitary acting on the eigen-ensemble.
Both report upper bounds; every stochastic choice derives from the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.linalg import expm
from scipy.special import xlogy
from scipy.stats import unitary_group

from shared.config import settings
from shared.constants import (
    ANNEALING_DECAY,
    ANNEALING_STEP,
    ANNEALING_SWEEPS,
    ANNEALING_TEMPERATURE,
    CORRECTIVE_STEPS,
    ENTROPY_LOG_FLOOR,
    FLOOR_WEIGHT,
    GIVENS_PROPOSALS,
    LINE_SEARCH_STEPS,
    LMO_MAX_SWEEPS,
    LMO_RTOL,
    POLISH_GRADIENT_TOL,
    POLISH_ITERATIONS,
    SUPPORT_TOL,
    CertificateTag,
    MeasureKind,
)
from shared.errors import InvalidArgumentError, ResourceLimitError
from shared.logger import get_logger

from .constructions import ContinuityRow
from .measures import (
    LN2,
    Diagnostics,
    MeasureReport,
    binary_entropy,
    entropy_of_entanglement,
    log_derivative_action,
    relative_entropy_nats,
)
from .space import BipartiteSpace, EnergyBudget, mean_energy
from .states import (
    DensityOperator,
    PureState,
    as_density,
    mix,
    product_state,
    tensor_power,
    trace_norm_distance,
)

logger = get_logger(__name__)

StateLike = Union[DensityOperator, PureState]


def _check_cap(space: BipartiteSpace, cap: Optional[int]) -> None:
    cap = cap or settings.OPTIMIZATION_CAP
    if space.dim > cap:
        raise ResourceLimitError(
            f"Composite dimension exceeds OPTIMIZATION_CAP={cap}",
            {"dimension": space.dim, "cap": cap},
        )


def derive_seeds(seed: int, count: int) -> List[np.random.SeedSequence]:
    """Per-task seeds: the ``count`` children of SeedSequence(seed)."""
    return np.random.SeedSequence(seed).spawn(count)


# Linear-minimisation oracle over product states


@dataclass(frozen=True, eq=False)
class ProductMinimum:
    state: PureState
    value: float
    psi_a: np.ndarray
    psi_b: np.ndarray
    restart: int
    history: tuple[float, ...] = ()  # objective after each sweep of the winning restart


def _ground_vector(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    w, v = np.linalg.eigh((matrix + matrix.conj().T) / 2)
    return float(w[0]), v[:, 0]


def _alternate(g4: np.ndarray, psi_a: np.ndarray) -> tuple[np.ndarray, np.ndarray, float, List[float]]:
    """Exact block updates: best psi_b for fixed psi_a, then best psi_a for that psi_b."""
    value = math.inf
    psi_b = None
    history: List[float] = []
    for _ in range(LMO_MAX_SWEEPS):
        _, psi_b = _ground_vector(np.einsum("x,xbyc,y->bc", psi_a.conj(), g4, psi_a))
        new, psi_a = _ground_vector(np.einsum("b,xbyc,c->xy", psi_b.conj(), g4, psi_b))
        history.append(new)
        if value - new <= LMO_RTOL * max(1.0, abs(new)):
            value = min(value, new)
            break
        value = new
    return psi_a, psi_b, value, history


def lmo_product_state(
    G: np.ndarray,
    space: BipartiteSpace,
    restarts: int = 4,
    seed: int = 0,
) -> ProductMinimum:
    """Approximately minimise <a,b|G|a,b> over product unit vectors.

    Restart 0 starts from the product basis state with the smallest diagonal
    entry; restarts 1..n from seeded random vectors. The lowest value wins,
    ties going to the lower restart index.
    """
    g = np.asarray(G, dtype=complex)
    space.check_dimension(g.shape[0])
    g4 = ((g + g.conj().T) / 2).reshape(space.d_a, space.d_b, space.d_a, space.d_b)

    starts = []
    best_index = int(np.argmin(np.real(np.diag(g))))
    start = np.zeros(space.d_a, dtype=complex)
    start[best_index // space.d_b] = 1.0
    starts.append(start)
    for child in derive_seeds(seed, restarts):
        rng = np.random.default_rng(child)
        z = rng.normal(size=space.d_a) + 1j * rng.normal(size=space.d_a)
        starts.append(z / np.linalg.norm(z))

    best: Optional[ProductMinimum] = None
    for restart, psi_a in enumerate(starts):
        a, b, value, history = _alternate(g4, psi_a)
        if best is None or value < best.value:
            best = ProductMinimum(product_state(a, b), value, a, b, restart, tuple(history))
    logger.debug(f"LMO value {best.value:.6g} from restart {best.restart}")
    return best


# Relative entropy of entanglement


@dataclass(eq=False)
class SeparableIterate:
    """Convex weights over stored product vectors, floor-mixed with I/d."""
    atoms: np.ndarray  # one product vector per row
    weights: np.ndarray
    floor_weight: float

    @classmethod
    def maximally_mixed(cls, space: BipartiteSpace, floor_weight: float) -> SeparableIterate:
        """I/d written as the uniform mixture of product basis states."""
        return cls(np.eye(space.dim, dtype=complex), np.full(space.dim, 1.0 / space.dim), floor_weight)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def core(self) -> np.ndarray:
        return (self.atoms.T * self.weights) @ self.atoms.conj()

    def assembled(self) -> np.ndarray:
        """(1 - floor) core + floor I/d, the matrix the objective sees."""
        f = self.floor_weight
        return (1 - f) * self.core() + f * np.eye(self.dim) / self.dim

    def density(self) -> DensityOperator:
        return DensityOperator(self.assembled())

    def add_atom(self, vector: np.ndarray) -> int:
        """Index of ``vector`` among the atoms, appending it with zero weight if new."""
        overlaps = np.abs(self.atoms.conj() @ vector) ** 2
        if overlaps.size and overlaps.max() > 1 - 1e-12:
            return int(np.argmax(overlaps))
        self.atoms = np.vstack([self.atoms, vector[None, :]])
        self.weights = np.append(self.weights, 0.0)
        return len(self.weights) - 1

    def prune(self) -> None:
        """Drop atoms whose weight has fallen to zero."""
        keep = self.weights > 1e-15
        self.atoms, self.weights = self.atoms[keep], self.weights[keep]
        self.weights = self.weights / self.weights.sum()


class _RelativeEntropyObjective:
    """rho -> S(sigma || rho) in nats with its Frechet gradient."""

    def __init__(self, sigma: np.ndarray, floor_weight: float) -> None:
        self.sigma = sigma
        self.scale = 1 - floor_weight
        self.min_eigenvalue = floor_weight / (2 * sigma.shape[0])

    def value(self, rho: np.ndarray) -> float:
        return relative_entropy_nats(self.sigma, rho)

    def gradient(self, rho: np.ndarray) -> np.ndarray:
        """Gradient of S(sigma || rho) in rho, scaled by the non-floor share."""
        g = -self.scale * log_derivative_action(rho, self.sigma, self.min_eigenvalue)
        return (g + g.conj().T) / 2

    def slope(self, rho: np.ndarray, direction: np.ndarray) -> float:
        """Directional derivative of the objective at ``rho``."""
        return float(np.real(np.vdot(self.gradient(rho), direction)))

    def line_search(self, rho: np.ndarray, direction: np.ndarray, gamma_max: float) -> float:
        """Exact step on the convex restriction by bisection on its derivative."""
        if gamma_max <= 0 or self.slope(rho, direction) >= 0:
            return 0.0
        if self.slope(rho + gamma_max * direction, direction) <= 0:
            return gamma_max
        lo, hi = 0.0, gamma_max
        for _ in range(LINE_SEARCH_STEPS):
            mid = (lo + hi) / 2
            if self.slope(rho + mid * direction, direction) < 0:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


def _pairwise_step(
    objective: _RelativeEntropyObjective,
    iterate: SeparableIterate,
    toward: int,
    away: int,
) -> None:
    if toward == away:
        return
    x_s, x_v = iterate.atoms[toward], iterate.atoms[away]
    direction = (1 - iterate.floor_weight) * (
        np.outer(x_s, x_s.conj()) - np.outer(x_v, x_v.conj())
    )
    gamma = objective.line_search(iterate.assembled(), direction, float(iterate.weights[away]))
    iterate.weights[toward] += gamma
    iterate.weights[away] -= gamma
    iterate.weights[away] = max(iterate.weights[away], 0.0)


def _atom_values(iterate: SeparableIterate, g: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("ij,jk,ik->i", iterate.atoms.conj(), g, iterate.atoms))


def relative_entropy_of_entanglement(
    sigma: StateLike,
    space: BipartiteSpace,
    tol: float = 1e-4,
    max_iter: int = 300,
    restarts: int = 4,
    seed: int = 0,
    floor_weight: float = FLOOR_WEIGHT,
    corrective_steps: int = CORRECTIVE_STEPS,
    cap: Optional[int] = None,
) -> MeasureReport:
    """E_R(sigma) = min over separable rho of S(sigma || rho), in bits.

    Args:
        sigma: State to evaluate
        space: Its space (composite dimension at most the optimisation cap)
        tol: Stop once the Frank-Wolfe gap (bits) is below this
        max_iter: Outer iterations (one LMO call each)
        restarts: Random restarts per LMO call
        seed: Master seed
        floor_weight: Weight of I/d mixed into every iterate
        corrective_steps: Local pairwise steps on the active set per iteration
        cap: Overrides OPTIMIZATION_CAP

    Returns:
        MeasureReport: Upper bound with the final separable iterate as witness
    """
    _check_cap(space, cap)
    sigma = as_density(sigma)
    space.check_dimension(sigma.dim)
    objective = _RelativeEntropyObjective(sigma.matrix, floor_weight)
    iterate = SeparableIterate.maximally_mixed(space, floor_weight)
    notes = [f"iterates floor-mixed with weight {floor_weight:g} of the maximally mixed state"]
    history = [objective.value(iterate.assembled())]
    gap = math.inf
    iterations = 0
    monotone = True

    for iterations in range(1, max_iter + 1):
        rho = iterate.assembled()
        g = objective.gradient(rho)
        child_seed = int(np.random.SeedSequence([seed, iterations]).generate_state(1)[0])
        lmo = lmo_product_state(g, space, restarts, child_seed)
        values = _atom_values(iterate, g)
        gap = max(float(iterate.weights @ values) - lmo.value, 0.0)
        if gap / LN2 <= tol:
            break
        toward = iterate.add_atom(lmo.state.amplitudes)
        values = _atom_values(iterate, g)
        away = int(np.argmax(np.where(iterate.weights > 0, values, -np.inf)))
        _pairwise_step(objective, iterate, toward, away)
        for _ in range(corrective_steps):
            values = _atom_values(iterate, objective.gradient(iterate.assembled()))
            active = iterate.weights > 0
            toward = int(np.argmin(np.where(active, values, np.inf)))
            away = int(np.argmax(np.where(active, values, -np.inf)))
            if values[away] - values[toward] <= 1e-14:
                break
            _pairwise_step(objective, iterate, toward, away)
        iterate.prune()
        current = objective.value(iterate.assembled())
        if current > history[-1] + 1e-12:
            logger.warning(f"Objective increased at iteration {iterations}: {history[-1]:.12g} -> {current:.12g}")
            notes.append(f"non-monotone step at iteration {iterations}")
            monotone = False
        history.append(current)
        logger.debug(f"FW iteration {iterations}: value={current / LN2:.8f} bits, gap={gap / LN2:.3g}")
    else:
        logger.warning(f"Frank-Wolfe stopped at max_iter={max_iter} with gap {gap / LN2:.3g} bits")
        notes.append("max_iter reached before the gap tolerance")

    value = min(history) / LN2
    logger.info(f"E_R upper bound {value:.6f} bits after {iterations} iterations")
    return MeasureReport(
        measure=MeasureKind.ER.value,
        value=value,
        diagnostics=Diagnostics(
            certificate=CertificateTag.UPPER_BOUND_HEURISTIC_LMO,
            iterations=iterations,
            gap=gap / LN2 if math.isfinite(gap) else None,
            seed=seed,
            restarts=restarts,
            history=[h / LN2 for h in history],
            monotone=monotone,
            notes=notes,
        ),
        witness=iterate,
    )


# Entanglement of formation


@dataclass(frozen=True, eq=False)
class Decomposition:
    """sigma = sum_i p_i |psi_i><psi_i| obtained as w = U v from the eigen-ensemble."""
    weights: np.ndarray
    vectors: np.ndarray  # one unit vector per row (zero rows for empty members)
    isometry: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """sum_i p_i |psi_i><psi_i|."""
        return (self.vectors.T * self.weights) @ self.vectors.conj()


class _FormationObjective:
    """Average entanglement sum_i p_i E(psi_i) of the ensemble w = W[:, :r] v (nats)."""

    def __init__(self, sigma: DensityOperator, space: BipartiteSpace) -> None:
        w, v = np.linalg.eigh(sigma.matrix)
        keep = w > SUPPORT_TOL
        self.rank = int(keep.sum())
        self.ensemble = (v[:, keep] * np.sqrt(w[keep])).T  # rank x D
        self.space = space

    def members(self, unitary: np.ndarray) -> np.ndarray:
        """Unnormalised ensemble vectors W v, one per row."""
        return unitary[:, : self.rank] @ self.ensemble

    def contributions(self, members: np.ndarray) -> np.ndarray:
        blocks = members.reshape(-1, self.space.d_a, self.space.d_b)
        s2 = np.linalg.svd(blocks, compute_uv=False) ** 2
        p = s2.sum(axis=1)
        return xlogy(p, p) - xlogy(s2, s2).sum(axis=1)

    def value(self, unitary: np.ndarray) -> float:
        return float(self.contributions(self.members(unitary)).sum())

    def gradient(self, unitary: np.ndarray) -> np.ndarray:
        """Euclidean gradient with respect to conj(W); zero in columns >= rank."""
        members = self.members(unitary)
        d_a, d_b = self.space.d_a, self.space.d_b
        rows = np.zeros_like(members)
        for i, w in enumerate(members):
            p = float(np.vdot(w, w).real)
            if p <= ENTROPY_LOG_FLOOR:
                continue
            block = w.reshape(d_a, d_b)
            lam, u = np.linalg.eigh(block @ block.conj().T)
            log_tau = (u * np.log(np.clip(lam, ENTROPY_LOG_FLOOR, None))) @ u.conj().T
            rows[i] = (math.log(p) * block - log_tau @ block).ravel()
        grad = np.zeros_like(unitary)
        grad[:, : self.rank] = rows @ self.ensemble.conj().T
        return grad

    def decomposition(self, unitary: np.ndarray) -> Decomposition:
        """Normalised ensemble for ``unitary``, empty members zeroed."""
        members = self.members(unitary)
        p = np.real(np.einsum("ij,ij->i", members.conj(), members))
        norms = np.sqrt(np.where(p > 0, p, 1.0))
        return Decomposition(weights=p, vectors=members / norms[:, None], isometry=unitary[:, : self.rank])


def _givens(unitary: np.ndarray, i: int, k: int, theta: float, phi: float) -> np.ndarray:
    rotated = unitary.copy()
    c, s = math.cos(theta), math.sin(theta)
    phase = complex(math.cos(phi), math.sin(phi))
    rotated[i] = c * unitary[i] - phase * s * unitary[k]
    rotated[k] = phase.conjugate() * s * unitary[i] + c * unitary[k]
    return rotated


def _anneal(
    objective: _FormationObjective,
    unitary: np.ndarray,
    rng: np.random.Generator,
    sweeps: int,
) -> tuple[np.ndarray, float]:
    """Randomized Givens rotations with a geometric step and temperature schedule."""
    contributions = objective.contributions(objective.members(unitary))
    current = float(contributions.sum())
    best, best_value = unitary, current
    pairs = list(combinations(range(unitary.shape[0]), 2))
    for sweep in range(sweeps):
        step = ANNEALING_STEP * ANNEALING_DECAY**sweep
        temperature = ANNEALING_TEMPERATURE * ANNEALING_DECAY**sweep
        for index in rng.permutation(len(pairs)):
            i, k = pairs[index]
            for _ in range(GIVENS_PROPOSALS):
                proposal = _givens(unitary, i, k, rng.normal(0.0, step), rng.uniform(0.0, 2 * math.pi))
                changed = objective.contributions(objective.members(proposal[[i, k]]))
                delta = float(changed.sum() - contributions[i] - contributions[k])
                if delta < 0 or rng.random() < math.exp(-delta / temperature):
                    unitary = proposal
                    contributions[i], contributions[k] = changed
                    current += delta
                    if current < best_value:
                        best, best_value = unitary, current
    return best, objective.value(best)


def _polish(
    objective: _FormationObjective,
    unitary: np.ndarray,
    max_iter: int,
) -> tuple[np.ndarray, float, int]:
    """Riemannian steepest descent on the unitary group with Armijo backtracking."""
    value = objective.value(unitary)
    eta = 0.5
    iterations = 0
    for iterations in range(1, max_iter + 1):
        b = objective.gradient(unitary) @ unitary.conj().T
        skew = b - b.conj().T
        norm2 = float(np.real(np.vdot(skew, skew)))
        if math.sqrt(norm2) < POLISH_GRADIENT_TOL:
            break
        eta = min(2 * eta, 10.0)
        while eta > 1e-12:
            candidate = expm(-eta * skew) @ unitary
            candidate_value = objective.value(candidate)
            if candidate_value <= value - 1e-4 * eta * norm2:
                break
            eta /= 2
        else:
            break
        if value - candidate_value < 1e-15:
            unitary, value = candidate, min(value, candidate_value)
            break
        unitary, value = candidate, candidate_value
    return unitary, value, iterations


def entanglement_of_formation(
    sigma: StateLike,
    space: BipartiteSpace,
    ensemble_size: Optional[int] = None,
    restarts: int = 4,
    max_iter: int = POLISH_ITERATIONS,
    seed: int = 0,
    sweeps: int = ANNEALING_SWEEPS,
    cap: Optional[int] = None,
) -> MeasureReport:
    """E_F(sigma) = inf over decompositions of sum_i p_i E(psi_i), in bits.

    Every decomposition with m members is w_i = sum_j U_ij sqrt(l_j) e_j for
    an m x rank isometry U on the eigen-ensemble (l_j, e_j). Each restart
    anneals U by Givens rotations and then polishes it by gradient descent.

    Args:
        sigma: State to evaluate
        space: Its space (composite dimension at most the optimisation cap)
        ensemble_size: Members m, at least rank(sigma); defaults to 2 rank
        restarts: Independent starts; restart 0 is the eigen-ensemble itself
        max_iter: Polish iterations per restart
        seed: Master seed
        sweeps: Annealing sweeps per restart
        cap: Overrides OPTIMIZATION_CAP

    Returns:
        MeasureReport: Upper bound with the best Decomposition as witness
    """
    _check_cap(space, cap)
    sigma = as_density(sigma)
    space.check_dimension(sigma.dim)
    objective = _FormationObjective(sigma, space)
    rank = objective.rank

    if rank == 1:
        value = entropy_of_entanglement(sigma.dominant_vector(), space)
        return MeasureReport(
            measure=MeasureKind.EF.value,
            value=value,
            diagnostics=Diagnostics(certificate=CertificateTag.EXACT, seed=seed, notes=["pure state"]),
            witness=Decomposition(np.ones(1), sigma.dominant_vector().amplitudes[None, :], np.ones((1, 1))),
        )

    members = ensemble_size if ensemble_size is not None else 2 * rank
    if members < rank:
        raise InvalidArgumentError(
            "Ensemble size must be at least the rank", {"ensemble_size": members, "rank": rank}
        )

    best_unitary, best_value, best_restart, total_iterations = None, math.inf, 0, 0
    for restart, child in enumerate(derive_seeds(seed, max(restarts, 1))):
        rng = np.random.default_rng(child)
        start = np.eye(members, dtype=complex) if restart == 0 else unitary_group.rvs(members, random_state=rng)
        annealed, annealed_value = _anneal(objective, start, rng, sweeps)
        polished, value, iterations = _polish(objective, annealed, max_iter)
        total_iterations += iterations
        logger.debug(
            f"E_F restart {restart}: annealed {annealed_value / LN2:.6f}, polished {value / LN2:.6f} bits"
        )
        if value < best_value:
            best_unitary, best_value, best_restart = polished, value, restart

    value = max(best_value, 0.0) / LN2
    logger.info(f"E_F upper bound {value:.6f} bits (best restart {best_restart})")
    return MeasureReport(
        measure=MeasureKind.EF.value,
        value=value,
        diagnostics=Diagnostics(
            certificate=CertificateTag.UPPER_BOUND,
            iterations=total_iterations,
            seed=seed,
            restarts=restarts,
            notes=[f"ensemble size {members}", f"best restart {best_restart}"],
        ),
        witness=objective.decomposition(best_unitary),
    )


# Two-qubit oracle


def concurrence_2q(rho: StateLike, space: BipartiteSpace) -> float:
    """Wootters concurrence from the spin-flipped spectrum."""
    if space.dims != (2, 2):
        raise InvalidArgumentError("Concurrence oracle needs two qubits", {"dims": space.dims})
    m = as_density(rho).matrix
    sigma_y = np.array([[0, -1j], [1j, 0]])
    flip = np.kron(sigma_y, sigma_y)
    r = m @ flip @ m.conj() @ flip
    roots = np.sqrt(np.abs(np.sort(np.real(np.linalg.eigvals(r)))))[::-1]
    return max(0.0, float(roots[0] - roots[1] - roots[2] - roots[3]))


def concurrence_oracle_2q(rho: StateLike, space: BipartiteSpace) -> float:
    """Closed-form two-qubit E_F = H2((1 + sqrt(1 - C^2))/2) in bits."""
    c = concurrence_2q(rho, space)
    return binary_entropy((1 + math.sqrt(max(0.0, 1 - c * c))) / 2)


# Continuity sweeps


def _measure_value(
    measure: MeasureKind,
    state: DensityOperator,
    space: BipartiteSpace,
    tol: float,
    max_iter: int,
    restarts: int,
    seed: int,
    cap: Optional[int],
) -> float:
    if measure is MeasureKind.ER:
        return relative_entropy_of_entanglement(
            state, space, tol=tol, max_iter=max_iter, restarts=restarts, seed=seed, cap=cap
        ).value
    if measure is MeasureKind.EF:
        return entanglement_of_formation(
            state, space, restarts=restarts, max_iter=max_iter, seed=seed, cap=cap
        ).value
    raise InvalidArgumentError("Continuity sweeps support ER and EF", {"measure": measure.value})


def continuity_sweep(
    sigma: StateLike,
    space: BipartiteSpace,
    scales: Sequence[float],
    budget: EnergyBudget,
    measure: MeasureKind = MeasureKind.ER,
    copies: int = 1,
    perturbation: Optional[StateLike] = None,
    tol: float = 1e-4,
    max_iter: int = 300,
    restarts: int = 4,
    seed: int = 0,
    cap: Optional[int] = None,
) -> List[ContinuityRow]:
    """Per-copy measure gaps between sigma and (1 - s) sigma + s tau.

    tau defaults to the maximally mixed state. All runs share ``seed`` so
    heuristic noise is paired between the reference and the perturbed state.
    """
    sigma = as_density(sigma)
    tau = as_density(perturbation) if perturbation is not None else DensityOperator(np.eye(space.dim) / space.dim)

    def power(state: DensityOperator):
        if copies == 1:
            return state, space
        tp = tensor_power(state, space, copies)
        return tp.state, tp.space

    reference, power_space = power(sigma)
    reference_value = _measure_value(measure, reference, power_space, tol, max_iter, restarts, seed, cap)
    rows = []
    for index, s in enumerate(scales):
        perturbed = mix([sigma, tau], [1 - s, s])
        energy = mean_energy(space, perturbed)
        if not budget.admits(energy):
            raise InvalidArgumentError(
                "Perturbed state leaves the energy budget", {"scale": s, "mean_energy": energy, "M": budget.M}
            )
        state, _ = power(perturbed)
        value = _measure_value(measure, state, power_space, tol, max_iter, restarts, seed, cap)
        rows.append(ContinuityRow(
            index=index,
            trace_distance=trace_norm_distance(reference, state),
            gap_bits=abs(value - reference_value) / copies,
        ))
        logger.debug(f"{measure.value} sweep s={s}: gap={rows[-1].gap_bits:.4g}")
    return rows


def er_continuity_sweep(
    sigma: StateLike,
    space: BipartiteSpace,
    scales: Sequence[float],
    budget: EnergyBudget,
    copies: int = 1,
    **kwargs,
) -> List[ContinuityRow]:
    """E_R modulus-of-continuity table inside an energy budget."""
    return continuity_sweep(sigma, space, scales, budget, MeasureKind.ER, copies, **kwargs)
