"""Vectorized operators, superoperators, and Liouvillian assembly.

An operator O on a d-dimensional space becomes a d^2 vector by stacking its
columns: component n + (m-1)d holds O_{nm}.  In that representation the map
X -> A X B is the matrix kron(B^T, A), the "sandwich" superoperator, and the
Lindblad generator

    d rho/dt = -i [H, rho] + sum_j Gamma_j (2 J_j rho J_j^dag
               - J_j^dag J_j rho - rho J_j^dag J_j)

assembles from a handful of Kronecker products.  :func:`liouvillian_oracle`
rebuilds the same matrix from the elementwise formula with explicit loops and
shares no code with :func:`build_liouvillian`; it exists so the two can be
checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .hilbert import (
    LayoutMismatchError,
    Operator,
    SpaceLayout,
    _to_csr,
    _to_dense,
    identity_operator,
)

__all__ = [
    "SUPER_DENSE_LIMIT",
    "VectorizedOperator",
    "SuperOperator",
    "LindbladModel",
    "vectorize",
    "devectorize",
    "super_sandwich",
    "hamiltonian_super",
    "dissipator_super",
    "build_liouvillian",
    "liouvillian_oracle",
]

# Superoperators with more than this many rows default to sparse storage.
SUPER_DENSE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class VectorizedOperator:
    """Column-stacked form of an operator: component n+(m-1)d is element (n, m)."""

    layout: SpaceLayout
    components: np.ndarray = field(repr=False)

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=complex).ravel()
        d = self.layout.total_dim
        if comps.shape != (d * d,):
            raise ValueError(
                f"vectorized operator has {comps.size} components, expected {d * d}"
            )
        object.__setattr__(self, "components", comps)


def vectorize(op: Operator) -> VectorizedOperator:
    """Stack the columns of an operator into a d^2 vector."""
    return VectorizedOperator(op.layout, op.to_dense().ravel(order="F"))


def devectorize(vec: VectorizedOperator) -> Operator:
    """Inverse of :func:`vectorize`."""
    d = vec.layout.total_dim
    return Operator(vec.layout, vec.components.reshape((d, d), order="F"))


def _default_super_storage(n: int) -> str:
    return "sparse" if n > SUPER_DENSE_LIMIT else "dense"


class SuperOperator:
    """A d^2 x d^2 matrix acting on vectorized operators."""

    __slots__ = ("layout", "_matrix", "storage")

    __array_ufunc__ = None

    def __init__(self, layout: SpaceLayout, matrix, storage: str | None = None):
        n = layout.total_dim ** 2
        if not sp.issparse(matrix):
            matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (n, n):
            raise ValueError(
                f"superoperator shape {matrix.shape} does not match d^2 = {n}"
            )
        if storage is None:
            storage = _default_super_storage(n)
        if storage == "dense":
            mat = _to_dense(matrix)
        elif storage == "sparse":
            mat = _to_csr(matrix)
        else:
            raise ValueError(f"storage must be 'dense' or 'sparse', got {storage!r}")
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "_matrix", mat)
        object.__setattr__(self, "storage", storage)

    def __setattr__(self, name, value):
        raise AttributeError("SuperOperator is immutable")

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self) -> int:
        """Superspace dimension d^2."""
        return self.layout.total_dim ** 2

    def to_dense(self) -> np.ndarray:
        if self.storage == "dense":
            return self._matrix.copy()
        return _to_dense(self._matrix)

    def to_sparse(self) -> sp.csr_array:
        if self.storage == "sparse":
            return self._matrix.copy()
        return _to_csr(self._matrix)

    def with_storage(self, storage: str) -> "SuperOperator":
        if storage == self.storage:
            return self
        return SuperOperator(self.layout, self._matrix, storage=storage)

    def apply(self, vec) -> np.ndarray:
        """Matrix-vector product on a vectorized operator (or raw array)."""
        if isinstance(vec, VectorizedOperator):
            if vec.layout != self.layout:
                raise LayoutMismatchError("vector and superoperator layouts differ")
            vec = vec.components
        return self._matrix @ np.asarray(vec, dtype=complex)

    def norm_inf(self) -> float:
        """Matrix infinity norm (max absolute row sum)."""
        if self.storage == "sparse":
            row_sums = np.abs(self._matrix).sum(axis=1)
            return float(np.max(row_sums)) if self.dim else 0.0
        return float(np.abs(self._matrix).sum(axis=1).max())

    def _binary(self, other: "SuperOperator", combine):
        if not isinstance(other, SuperOperator):
            return NotImplemented
        if self.layout != other.layout:
            raise LayoutMismatchError("superoperators live on different layouts")
        if self.storage == "sparse" and other.storage == "sparse":
            return SuperOperator(
                self.layout, combine(self._matrix, other._matrix), storage="sparse"
            )
        return SuperOperator(
            self.layout, combine(self.to_dense(), other.to_dense()), storage="dense"
        )

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __mul__(self, other):
        if np.isscalar(other):
            return SuperOperator(self.layout, self._matrix * complex(other), storage=self.storage)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return SuperOperator(self.layout, -self._matrix, storage=self.storage)

    def __repr__(self) -> str:
        return f"SuperOperator({self.layout!r}, dim={self.dim}, storage={self.storage!r})"


class LindbladModel:
    """A Hamiltonian plus a list of (rate, jump operator) dissipation channels.

    All operators must share one layout; the Hamiltonian must be Hermitian
    (defect below 1e-12 relative to its largest element) and every rate
    strictly positive.  The dissipator list may be empty (purely coherent
    evolution).
    """

    __slots__ = ("hamiltonian", "dissipators")

    def __init__(
        self,
        hamiltonian: Operator,
        dissipators: Iterable[tuple[float, Operator]] = (),
    ):
        dissipators = tuple((float(rate), jump) for rate, jump in dissipators)
        if not hamiltonian.is_hermitian(tol=1e-12):
            raise ValueError("hamiltonian is not Hermitian (defect above 1e-12)")
        layout = hamiltonian.layout
        for rate, jump in dissipators:
            if rate <= 0:
                raise ValueError(f"dissipation rate must be > 0, got {rate}")
            if jump.layout != layout:
                raise LayoutMismatchError("jump operator layout differs from hamiltonian")
        object.__setattr__(self, "hamiltonian", hamiltonian)
        object.__setattr__(self, "dissipators", dissipators)

    def __setattr__(self, name, value):
        raise AttributeError("LindbladModel is immutable")

    @property
    def layout(self) -> SpaceLayout:
        return self.hamiltonian.layout

    def __repr__(self) -> str:
        return (
            f"LindbladModel({self.layout!r}, dissipators={len(self.dissipators)})"
        )


def _sandwich_matrix(a: Operator, b: Operator) -> sp.csr_array:
    # Kronecker products and sums are assembled sparsely regardless of the
    # requested storage; for structured operators this avoids a cascade of
    # dense d^2 x d^2 intermediates.  Coercion happens once, at the end.
    return sp.kron(b.to_sparse().T, a.to_sparse(), format="csr")


def super_sandwich(a: Operator, b: Operator, storage: str | None = None) -> SuperOperator:
    """Superoperator representing X -> A X B, i.e. kron(B^T, A)."""
    if a.layout != b.layout:
        raise LayoutMismatchError("sandwich operands live on different layouts")
    return SuperOperator(a.layout, _sandwich_matrix(a, b), storage=storage)


def hamiltonian_super(h: Operator, storage: str | None = None) -> SuperOperator:
    """Superoperator for the coherent part rho -> -i [H, rho].

    Equals -i kron(I, H) + i kron(H^T, I): left-multiplication minus
    right-multiplication in the sandwich representation.
    """
    if not h.is_hermitian(tol=1e-10):
        raise ValueError("hamiltonian is not Hermitian (defect above 1e-10)")
    eye = identity_operator(h.layout, storage="sparse")
    mat = -1j * _sandwich_matrix(h, eye) + 1j * _sandwich_matrix(eye, h)
    return SuperOperator(h.layout, mat, storage=storage)


def dissipator_super(jump: Operator, rate: float, storage: str | None = None) -> SuperOperator:
    """Superoperator for rho -> Gamma (2 J rho J^dag - J^dag J rho - rho J^dag J)."""
    rate = float(rate)
    if rate <= 0:
        raise ValueError(f"dissipation rate must be > 0, got {rate}")
    eye = identity_operator(jump.layout, storage="sparse")
    jdag_j = (jump.dag() * jump).with_storage("sparse")
    mat = rate * (
        2.0 * _sandwich_matrix(jump, jump.dag())
        - _sandwich_matrix(jdag_j, eye)
        - _sandwich_matrix(eye, jdag_j)
    )
    return SuperOperator(jump.layout, mat, storage=storage)


def build_liouvillian(model: LindbladModel, storage: str | None = None) -> SuperOperator:
    """Assemble the full Lindblad generator of a model in superspace."""
    mat = hamiltonian_super(model.hamiltonian, storage="sparse").matrix
    for rate, jump in model.dissipators:
        mat = mat + dissipator_super(jump, rate, storage="sparse").matrix
    return SuperOperator(model.layout, mat, storage=storage)


def liouvillian_oracle(model: LindbladModel) -> SuperOperator:
    """Reference Liouvillian from the elementwise formula, by explicit loops.

    Row n+(m-1)d, column k+(l-1)d holds

        -i H_{nk} delta_{ml} + i H_{lm} delta_{kn}
        + sum_j Gamma_j [ 2 J_{nk} J*_{ml} - (J^dag J)_{nk} delta_{ml}
                          - delta_{kn} (J^dag J)_{lm} ]

    Dense output, quadratically slower than :func:`build_liouvillian`; meant
    for small dimensions as an independent cross-check.
    """
    d = model.layout.total_dim
    h = model.hamiltonian.to_dense()
    channels = [
        (rate, jump.to_dense(), jump.to_dense().conj().T @ jump.to_dense())
        for rate, jump in model.dissipators
    ]
    out = np.zeros((d * d, d * d), dtype=complex)
    for n in range(1, d + 1):
        for m in range(1, d + 1):
            row = (n - 1) + (m - 1) * d
            for k in range(1, d + 1):
                for l in range(1, d + 1):
                    col = (k - 1) + (l - 1) * d
                    val = 0.0 + 0.0j
                    if m == l:
                        val += -1j * h[n - 1, k - 1]
                    if k == n:
                        val += 1j * h[l - 1, m - 1]
                    for rate, jmat, jdj in channels:
                        val += 2.0 * rate * jmat[n - 1, k - 1] * np.conj(jmat[m - 1, l - 1])
                        if m == l:
                            val -= rate * jdj[n - 1, k - 1]
                        if k == n:
                            val -= rate * jdj[l - 1, m - 1]
                    out[row, col] = val
    return SuperOperator(model.layout, out, storage="dense")
