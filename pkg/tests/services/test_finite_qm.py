import numpy as np
from numpy.testing import assert_allclose
import pytest

from app.core.errors import AuditFailure, InvalidInputError
from app.models.operators import BipartiteDensityOperator, ComplexOperator, ObservableDecomposition
from app.services.finite_qm import (
    apply_local_unitary,
    marginal_distribution,
    measure_nonselective,
    no_signaling_audit,
    partial_trace_second,
    random_unitary,
    remixed_state,
)

BELL = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def bell_state():
    return BipartiteDensityOperator.from_ket(BELL, (2, 2))


# ---------------------------------------------------------------------
# Operator validation
# ---------------------------------------------------------------------
def test_density_operator_rejects_negative_eigenvalue():
    with pytest.raises(InvalidInputError, match="not positive"):
        BipartiteDensityOperator.from_matrix(np.diag([1.5, -0.5, 0.0, 0.0]), (2, 2))


def test_density_operator_rejects_wrong_trace():
    with pytest.raises(InvalidInputError, match="trace"):
        BipartiteDensityOperator.from_matrix(np.eye(4) / 2.0, (2, 2))


def test_operator_shape_must_match_dims():
    with pytest.raises(InvalidInputError):
        ComplexOperator(entries=np.eye(4), dims=(2, 3))


def test_entries_are_read_only():
    rho = bell_state()
    with pytest.raises(ValueError):
        rho.entries[0, 0] = 1.0


def test_degenerate_observable_rejected():
    with pytest.raises(InvalidInputError, match="distinct"):
        ObservableDecomposition.from_basis(np.eye(2), eigenvalues=[1.0, 1.0])


def test_observable_from_hermitian_matrix():
    obs = ObservableDecomposition.from_hermitian(PAULI_X)
    assert obs.eigenvalues == pytest.approx((-1.0, 1.0))
    total = sum(a * p.entries for a, p in zip(obs.eigenvalues, obs.projectors))
    assert_allclose(total, PAULI_X, atol=1e-12)


# ---------------------------------------------------------------------
# Partial trace, unitaries, measurements
# ---------------------------------------------------------------------
def test_partial_trace_of_bell_state_is_maximally_mixed():
    reduced = partial_trace_second(bell_state())
    assert reduced.dims == (2, 1)
    assert_allclose(reduced.entries, np.eye(2) / 2.0, atol=1e-12)


def test_partial_trace_of_product_state_returns_first_factor():
    rho_a = np.array([[0.7, 0.2], [0.2, 0.3]])
    rho_b = np.diag([0.1, 0.5, 0.4])
    rho = BipartiteDensityOperator.product(rho_a, rho_b)
    assert_allclose(partial_trace_second(rho).entries, rho_a, atol=1e-12)


def test_local_unitary_leaves_reduced_state_alone():
    rng = np.random.default_rng(1)
    u = ComplexOperator.single(random_unitary(2, rng))
    rho = bell_state()
    after = apply_local_unitary(rho, u)
    assert_allclose(partial_trace_second(after).entries, partial_trace_second(rho).entries, atol=1e-14)


def test_local_unitary_checks():
    rho = bell_state()
    with pytest.raises(InvalidInputError, match="not unitary"):
        apply_local_unitary(rho, ComplexOperator.single(2.0 * np.eye(2)))
    with pytest.raises(InvalidInputError, match="dimension"):
        apply_local_unitary(rho, ComplexOperator.single(np.eye(3)))


def test_measurement_on_bell_state():
    outcomes = measure_nonselective(bell_state(), ObservableDecomposition.computational(2))
    assert [o.probability for o in outcomes] == pytest.approx([0.5, 0.5])
    # Collapse on side 2 fixes side 1 as well
    first = partial_trace_second(outcomes[0].state).entries
    assert_allclose(first, np.diag([1.0, 0.0]), atol=1e-12)

    remix = remixed_state(outcomes, (2, 2))
    assert_allclose(partial_trace_second(remix).entries, np.eye(2) / 2.0, atol=1e-12)


def test_zero_probability_outcome_has_no_state():
    rho = BipartiteDensityOperator.from_ket(np.array([1.0, 0.0, 0.0, 0.0]), (2, 2))
    outcomes = measure_nonselective(rho, ObservableDecomposition.computational(2))
    assert not outcomes[0].is_null
    assert outcomes[1].is_null
    assert outcomes[1].probability == 0.0


def test_marginal_distribution_sums_to_one():
    rng = np.random.default_rng(5)
    basis = random_unitary(3, rng)
    obs = ObservableDecomposition.from_basis(basis, eigenvalues=[0.0, 1.0, 2.0])
    rho = BipartiteDensityOperator.product(np.diag([0.2, 0.3, 0.5]), np.diag([0.5, 0.5]))
    probs = marginal_distribution(rho, obs)
    assert probs.sum() == pytest.approx(1.0)
    assert np.all(probs >= 0)


def test_observable_on_wrong_side_dimension():
    with pytest.raises(InvalidInputError):
        measure_nonselective(bell_state(), ObservableDecomposition.computational(3))


# ---------------------------------------------------------------------
# Audit
# ---------------------------------------------------------------------
def test_audit_passes_on_qubit_pairs():
    report = no_signaling_audit(100, (2, 2), 20240101)
    assert report.passed
    assert report.failures == []
    assert report.max_deviation < 1e-12
    assert report.trials == 100


def test_audit_is_reproducible():
    a = no_signaling_audit(6, (3, 2), 99)
    b = no_signaling_audit(6, (3, 2), 99)
    assert a == b


@pytest.mark.parametrize("trials, dims", [(0, (2, 2)), (5, (1, 2)), (5, (2, 1))])
def test_audit_rejects_bad_arguments(trials, dims):
    with pytest.raises(InvalidInputError):
        no_signaling_audit(trials, dims, 1)


def test_audit_failure_carries_report():
    # A tolerance below rounding noise makes every trial fail
    with pytest.raises(AuditFailure) as exc_info:
        no_signaling_audit(4, (3, 3), 11, tolerance=1e-300, raise_on_failure=True)
    report = exc_info.value.report
    assert report.failures
    assert not report.passed
    assert "seed 11" in exc_info.value.detail


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 4)])
def test_audit_passes_over_a_thousand_trials(dims):
    report = no_signaling_audit(1000, dims, 7)
    assert report.passed
    assert report.max_unitary_deviation < 1e-12
    assert report.max_marginal_deviation < 1e-12
