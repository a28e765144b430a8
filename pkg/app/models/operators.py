# app/models/operators.py
"""
Finite-dimensional operator types for the bipartite no-signalling checks.

These carry numpy arrays, so they are frozen dataclasses rather than pydantic
models. Arrays are copied and made read-only at construction; invariants are
checked in __post_init__ and violations raise InvalidInputError.

Convention: a bipartite operator on H1 (x) H2 has dims (d1, d2) and entries of
shape (d1*d2, d1*d2) in the big-endian (numpy.kron) ordering. A single-party
operator uses dims (d, 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la

from app.core.errors import InvalidInputError

VALIDATION_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ComplexOperator:
    """Square complex matrix together with its tensor-factor dimensions."""

    entries: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self) -> None:
        d1, d2 = (int(x) for x in self.dims)
        if d1 < 1 or d2 < 1:
            raise InvalidInputError(f"dims must be positive, got {self.dims}")
        entries = _frozen(self.entries)
        dim = d1 * d2
        if entries.shape != (dim, dim):
            raise InvalidInputError(
                f"entries shape {entries.shape} does not match dims {self.dims} (D={dim})"
            )
        if not np.all(np.isfinite(entries)):
            raise InvalidInputError("operator entries must be finite")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dims", (d1, d2))

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    @classmethod
    def single(cls, matrix: np.ndarray) -> "ComplexOperator":
        """Operator on a single factor (dims = (d, 1))."""
        m = np.asarray(matrix)
        return cls(entries=m, dims=(m.shape[0], 1))

    def dagger(self) -> "ComplexOperator":
        return ComplexOperator(entries=self.entries.conj().T, dims=self.dims)

    def is_hermitian(self, tol: float = VALIDATION_TOL) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0) <= tol)

    def is_unitary(self, tol: float = VALIDATION_TOL) -> bool:
        eye = np.eye(self.dim)
        return bool(np.max(np.abs(self.entries.conj().T @ self.entries - eye)) <= tol)


@dataclass(frozen=True)
class BipartiteDensityOperator:
    """Statistical operator rho_12: Hermitian, unit trace, positive."""

    op: ComplexOperator
    hermiticity_tol: float = VALIDATION_TOL
    trace_tol: float = VALIDATION_TOL
    positivity_tol: float = VALIDATION_TOL

    def __post_init__(self) -> None:
        m = self.op.entries
        herm_dev = float(np.max(np.abs(m - m.conj().T)))
        if herm_dev > self.hermiticity_tol:
            raise InvalidInputError(f"density operator not Hermitian (deviation {herm_dev:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > self.trace_tol:
            raise InvalidInputError(f"density operator trace {tr.real:.15g} != 1")
        # Hermitian part only, anti-Hermitian residue is below tolerance here
        min_eig = float(la.eigvalsh(0.5 * (m + m.conj().T))[0])
        if min_eig < -self.positivity_tol:
            raise InvalidInputError(f"density operator not positive (min eigenvalue {min_eig:.3e})")

    @property
    def dims(self) -> tuple[int, int]:
        return self.op.dims

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, dims: tuple[int, int], **tols: float) -> "BipartiteDensityOperator":
        return cls(op=ComplexOperator(entries=matrix, dims=dims), **tols)

    @classmethod
    def from_ket(cls, ket: np.ndarray, dims: tuple[int, int], **tols: float) -> "BipartiteDensityOperator":
        """Pure state |psi><psi| from a (not necessarily normalised) vector."""
        v = np.asarray(ket, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise InvalidInputError("zero vector is not a state")
        v = v / nrm
        return cls.from_matrix(np.outer(v, v.conj()), dims, **tols)

    @classmethod
    def product(cls, rho_a: np.ndarray, rho_b: np.ndarray, **tols: float) -> "BipartiteDensityOperator":
        rho_a = np.asarray(rho_a, dtype=complex)
        rho_b = np.asarray(rho_b, dtype=complex)
        return cls.from_matrix(np.kron(rho_a, rho_b), (rho_a.shape[0], rho_b.shape[0]), **tols)


@dataclass(frozen=True)
class ObservableDecomposition:
    """
    Spectral decomposition A = sum_i a_i P_i of a nondegenerate observable.

    Projectors are rank one, idempotent, mutually orthogonal and resolve the
    identity. Degenerate spectra are rejected.
    """

    eigenvalues: tuple[float, ...]
    projectors: tuple[ComplexOperator, ...]
    tol: float = field(default=VALIDATION_TOL)

    def __post_init__(self) -> None:
        eig = tuple(float(a) for a in self.eigenvalues)
        projs = tuple(self.projectors)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "projectors", projs)

        if not projs:
            raise InvalidInputError("decomposition needs at least one projector")
        if len(eig) != len(projs):
            raise InvalidInputError("one eigenvalue per projector is required")
        if len(set(eig)) != len(eig) or any(
            abs(a - b) <= self.tol for i, a in enumerate(eig) for b in eig[i + 1 :]
        ):
            raise InvalidInputError(f"eigenvalues must be pairwise distinct, got {eig}")

        dim = projs[0].dim
        if any(p.dim != dim for p in projs):
            raise InvalidInputError("projectors act on different dimensions")
        if len(projs) != dim:
            raise InvalidInputError(
                f"nondegenerate observable on dimension {dim} needs {dim} rank-one projectors, got {len(projs)}"
            )

        total = np.zeros((dim, dim), dtype=complex)
        for i, p in enumerate(projs):
            m = p.entries
            if np.max(np.abs(m @ m - m)) > self.tol or np.max(np.abs(m - m.conj().T)) > self.tol:
                raise InvalidInputError(f"projector {i} is not an orthogonal projector")
            if abs(np.trace(m) - 1.0) > self.tol:
                raise InvalidInputError(f"projector {i} is not rank one")
            for j in range(i + 1, len(projs)):
                if np.max(np.abs(m @ projs[j].entries)) > self.tol:
                    raise InvalidInputError(f"projectors {i} and {j} are not orthogonal")
            total += m
        if np.max(np.abs(total - np.eye(dim))) > self.tol:
            raise InvalidInputError("projectors do not resolve the identity")

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    @classmethod
    def from_basis(cls, basis: np.ndarray, eigenvalues: Sequence[float], **kw: float) -> "ObservableDecomposition":
        """Projectors onto the columns of an orthonormal `basis`."""
        b = np.asarray(basis, dtype=complex)
        projs = tuple(ComplexOperator.single(np.outer(b[:, k], b[:, k].conj())) for k in range(b.shape[1]))
        return cls(eigenvalues=tuple(eigenvalues), projectors=projs, **kw)

    @classmethod
    def computational(cls, dim: int) -> "ObservableDecomposition":
        return cls.from_basis(np.eye(dim), eigenvalues=range(dim))

    @classmethod
    def from_hermitian(cls, matrix: np.ndarray, **kw: float) -> "ObservableDecomposition":
        m = np.asarray(matrix, dtype=complex)
        if np.max(np.abs(m - m.conj().T)) > kw.get("tol", VALIDATION_TOL):
            raise InvalidInputError("observable must be Hermitian")
        vals, vecs = la.eigh(m)
        return cls.from_basis(vecs, eigenvalues=vals, **kw)
