# app/services/finite_qm.py
"""
Bipartite finite-dimensional quantum mechanics: partial trace, local unitaries,
projective measurements on side 2 and an audit of the no-signalling theorem.

All functions are pure; inputs are never mutated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.core.errors import AuditFailure, InvalidInputError
from app.models.audit import AuditReport
from app.models.operators import (
    VALIDATION_TOL,
    BipartiteDensityOperator,
    ComplexOperator,
    ObservableDecomposition,
)

log = logging.getLogger(__name__)

# Branches with probability below this are returned without a collapsed state
PROBABILITY_FLOOR = 1e-14
# Deviation allowed by the theorem checks
THEOREM_TOL = 1e-12


@dataclass(frozen=True)
class MeasurementOutcome:
    """One outcome of a nonselective measurement; state is None below the floor."""

    eigenvalue: float
    probability: float
    state: Optional[BipartiteDensityOperator]

    @property
    def is_null(self) -> bool:
        return self.state is None


# ---------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------
def _blocks(m: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    d1, d2 = dims
    if m.shape != (d1 * d2, d1 * d2):
        raise InvalidInputError(f"matrix shape {m.shape} inconsistent with dims {dims}")
    return m.reshape(d1, d2, d1, d2)


def partial_trace_second(rho: BipartiteDensityOperator) -> ComplexOperator:
    """rho_1 = Tr_2 rho_12 as a (d1 x d1) operator."""
    reduced = np.einsum("ijkj->ik", _blocks(rho.entries, rho.dims))
    return ComplexOperator.single(reduced)


def apply_local_unitary(rho: BipartiteDensityOperator, u: ComplexOperator) -> BipartiteDensityOperator:
    """(I (x) u) rho (I (x) u)^dagger for a unitary u acting on side 2."""
    d1, d2 = rho.dims
    if u.dim != d2:
        raise InvalidInputError(f"unitary acts on dimension {u.dim}, side 2 has dimension {d2}")
    if not u.is_unitary(VALIDATION_TOL):
        raise InvalidInputError("operator applied on side 2 is not unitary")
    big = np.kron(np.eye(d1), u.entries)
    out = big @ rho.entries @ big.conj().T
    return BipartiteDensityOperator.from_matrix(out, rho.dims)


def _check_side(b: ObservableDecomposition, dim: int, side: int) -> None:
    if b.dim != dim:
        raise InvalidInputError(f"observable on dimension {b.dim} does not match side {side} dimension {dim}")


def measure_nonselective(
    rho: BipartiteDensityOperator,
    b: ObservableDecomposition,
) -> list[MeasurementOutcome]:
    """
    Measure B = sum_j b_j Q_j on side 2.

    p_j = Tr[(I (x) Q_j) rho], collapsed state (I (x) Q_j) rho (I (x) Q_j) / p_j.
    Outcomes with p_j below PROBABILITY_FLOOR carry state=None.
    """
    d1, d2 = rho.dims
    _check_side(b, d2, 2)
    eye = np.eye(d1)
    outcomes: list[MeasurementOutcome] = []
    for b_j, q in zip(b.eigenvalues, b.projectors):
        proj = np.kron(eye, q.entries)
        unnorm = proj @ rho.entries @ proj
        unnorm = 0.5 * (unnorm + unnorm.conj().T)
        p = float(np.real(np.trace(unnorm)))
        if p < PROBABILITY_FLOOR:
            log.debug("outcome b=%g has probability %.3e below floor", b_j, p)
            outcomes.append(MeasurementOutcome(eigenvalue=b_j, probability=max(p, 0.0), state=None))
            continue
        outcomes.append(
            MeasurementOutcome(
                eigenvalue=b_j,
                probability=p,
                state=BipartiteDensityOperator.from_matrix(unnorm / p, rho.dims),
            )
        )
    return outcomes


def marginal_distribution(rho: BipartiteDensityOperator, a: ObservableDecomposition) -> np.ndarray:
    """Pr(A = a_r) = Tr[(P_r (x) I) rho] for every eigenvalue of A on side 1."""
    d1, _ = rho.dims
    _check_side(a, d1, 1)
    reduced = partial_trace_second(rho).entries
    probs = np.array([np.real(np.trace(p.entries @ reduced)) for p in a.projectors])
    # Rounding can leave -1e-17 entries
    return np.clip(probs, 0.0, None)


def remixed_state(outcomes: list[MeasurementOutcome], dims: tuple[int, int]) -> BipartiteDensityOperator:
    """sum_j p_j rho_j over non-null outcomes."""
    d = dims[0] * dims[1]
    total = np.zeros((d, d), dtype=complex)
    for o in outcomes:
        if o.state is not None:
            total += o.probability * o.state.entries
    # Null branches carry < 1e-14 each, renormalise them away
    total /= np.real(np.trace(total))
    return BipartiteDensityOperator.from_matrix(total, dims)


# ---------------------------------------------------------------------
# Random generators
# ---------------------------------------------------------------------
def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """QR of a complex Gaussian matrix with the R-diagonal phases removed."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_density(dims: tuple[int, int], rng: np.random.Generator, pure: bool) -> BipartiteDensityOperator:
    """
    Pure state from a normalised complex Gaussian vector, or a rank-k mixture
    of such states with Dirichlet(1, ..., 1) weights.
    """
    d = dims[0] * dims[1]

    def ket() -> np.ndarray:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        return v / np.linalg.norm(v)

    if pure:
        return BipartiteDensityOperator.from_ket(ket(), dims)

    k = int(rng.integers(2, d + 1))
    weights = rng.dirichlet(np.ones(k))
    rho = np.zeros((d, d), dtype=complex)
    for w in weights:
        v = ket()
        rho += w * np.outer(v, v.conj())
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.real(np.trace(rho))
    return BipartiteDensityOperator.from_matrix(rho, dims)


def random_observable(dim: int, rng: np.random.Generator) -> ObservableDecomposition:
    basis = random_unitary(dim, rng)
    # Sorted distinct eigenvalues, spaced at least 0.1 apart
    eig = np.cumsum(0.1 + rng.random(dim))
    return ObservableDecomposition.from_basis(basis, eigenvalues=eig)


# ---------------------------------------------------------------------
# Audit
# ---------------------------------------------------------------------
def _trial_deviations(
    rho: BipartiteDensityOperator,
    a: ObservableDecomposition,
    b: ObservableDecomposition,
    u: ComplexOperator,
) -> tuple[float, float, float]:
    reduced = partial_trace_second(rho).entries
    unitary_dev = float(np.max(np.abs(partial_trace_second(apply_local_unitary(rho, u)).entries - reduced)))

    outcomes = measure_nonselective(rho, b)
    direct = marginal_distribution(rho, a)
    mixed = np.zeros_like(direct)
    for o in outcomes:
        if o.state is not None:
            mixed += o.probability * marginal_distribution(o.state, a)
    marginal_dev = float(np.max(np.abs(mixed - direct)))

    remix = partial_trace_second(remixed_state(outcomes, rho.dims)).entries
    remix_dev = float(np.max(np.abs(remix - reduced)))
    return unitary_dev, marginal_dev, remix_dev


def no_signaling_audit(
    trials: int,
    dims: tuple[int, int],
    rng_seed: int,
    *,
    tolerance: float = THEOREM_TOL,
    raise_on_failure: bool = False,
) -> AuditReport:
    """
    Random-trial check that nothing done on side 2 changes side-1 statistics.

    Trial i uses default_rng([rng_seed, i]), so any failing trial can be
    replayed alone. Even trials draw pure states, odd trials mixtures.
    """
    if trials < 1:
        raise InvalidInputError(f"trials must be >= 1, got {trials}")
    d1, d2 = (int(x) for x in dims)
    if d1 < 2 or d2 < 2:
        raise InvalidInputError(f"dims must be >= 2 on both sides, got {dims}")

    log.info("no-signalling audit: %d trials, dims=(%d,%d), seed=%d", trials, d1, d2, rng_seed)
    worst = [0.0, 0.0, 0.0]
    failures: list[int] = []
    for i in range(trials):
        rng = np.random.default_rng([rng_seed, i])
        rho = random_density((d1, d2), rng, pure=(i % 2 == 0))
        a = random_observable(d1, rng)
        b = random_observable(d2, rng)
        u = ComplexOperator.single(random_unitary(d2, rng))
        try:
            devs = _trial_deviations(rho, a, b, u)
        except InvalidInputError as exc:
            log.warning("trial %d (seed [%d, %d]) broke an invariant: %s", i, rng_seed, i, exc.detail)
            failures.append(i)
            continue
        worst = [max(w, x) for w, x in zip(worst, devs)]
        if max(devs) >= tolerance:
            log.warning("trial %d (seed [%d, %d]) deviation %.3e", i, rng_seed, i, max(devs))
            failures.append(i)

    report = AuditReport(
        trials=trials,
        dims=(d1, d2),
        seed=rng_seed,
        tolerance=tolerance,
        max_deviation=max(worst),
        max_unitary_deviation=worst[0],
        max_marginal_deviation=worst[1],
        max_remix_deviation=worst[2],
        failures=failures,
    )
    log.info("audit done: max deviation %.3e, %d failures", report.max_deviation, len(failures))
    if failures and raise_on_failure:
        raise AuditFailure(
            f"no-signalling audit failed in trials {failures} (seed {rng_seed})",
            report=report,
        )
    return report
