"""Steady states of Lindblad generators by three independent routes.

Every valid generator annihilates some density matrix; the routines here
recover it either from the eigenvector of the (largest-real-part, i.e. zero)
eigenvalue -- densely or by shift-inverted Arnoldi iteration targeting 0 --
or by replacing one row of the generator with the trace-normalization
condition and solving the resulting linear system by LU factorization.

All routes share one normalization pipeline: the raw vector is divided by its
trace (which also fixes the arbitrary eigenvector phase, forcing the trace to
the real value 1), the anti-Hermitian rounding noise is projected out, and
the trace is renormalized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .hilbert import Operator
from .superspace import SuperOperator

__all__ = [
    "CapacityError",
    "ConvergenceError",
    "DegeneracyError",
    "SteadyStateResult",
    "SpectrumResult",
    "GapReport",
    "steady_dense",
    "steady_sparse",
    "steady_linsolve",
    "spectrum",
    "check_uniqueness",
]

# Real parts closer than this are treated as ties when sorting eigenvalues.
_TIE_TOL = 1e-12


class CapacityError(RuntimeError):
    """Problem too large for the requested dense method."""


class DegeneracyError(RuntimeError):
    """The steady state is not unique (or numerically indistinguishable from it)."""


class ConvergenceError(RuntimeError):
    """An iterative eigensolver or propagator failed to converge."""


@dataclass(frozen=True)
class SteadyStateResult:
    """A steady density matrix plus solver diagnostics.

    ``residual`` is the infinity norm of L applied to the normalized state;
    ``trace_before_normalization`` is the raw trace of the solver output
    (close to 1 for the linear-solve route, arbitrary for eigenvector routes);
    ``eigenvalue`` is the computed leading eigenvalue where the route
    provides one.
    """

    rho: Operator
    residual: float
    method: str
    trace_before_normalization: complex
    eigenvalue: complex | None = None


@dataclass(frozen=True)
class SpectrumResult:
    """Leading eigenvalues sorted by descending real part."""

    eigenvalues: np.ndarray
    count_requested: int


@dataclass(frozen=True)
class GapReport:
    """The two largest-real-part eigenvalues and the uniqueness verdict."""

    lambda0: complex
    lambda1: complex | None
    unique: bool


def _descending_order(values: np.ndarray) -> list[int]:
    """Indices sorting by descending real part; ties (real parts within
    _TIE_TOL of their neighbour) are broken by descending imaginary part,
    then input order."""
    order = sorted(range(len(values)), key=lambda i: -values[i].real)
    out: list[int] = []
    i = 0
    while i < len(order):
        j = i + 1
        while (
            j < len(order)
            and values[order[j - 1]].real - values[order[j]].real <= _TIE_TOL
        ):
            j += 1
        out.extend(sorted(order[i:j], key=lambda idx: -values[idx].imag))
        i = j
    return out


def _finalize(
    liouv: SuperOperator, raw: np.ndarray, method: str, eigenvalue: complex | None
) -> SteadyStateResult:
    layout = liouv.layout
    d = layout.total_dim
    rho = raw.reshape((d, d), order="F")
    trace_raw = complex(np.trace(rho))
    scale = np.linalg.norm(raw)
    if abs(trace_raw) < 1e-8 * max(scale, np.finfo(float).tiny):
        raise DegeneracyError(
            "solver returned a (numerically) traceless kernel vector; "
            "the steady state is not unique"
        )
    rho = rho / trace_raw
    rho = (rho + rho.conj().T) / 2.0
    rho = rho / np.trace(rho).real
    residual = float(np.abs(liouv.apply(rho.ravel(order="F"))).max())
    return SteadyStateResult(
        rho=Operator(layout, rho),
        residual=residual,
        method=method,
        trace_before_normalization=trace_raw,
        eigenvalue=eigenvalue,
    )


def steady_dense(
    liouv: SuperOperator, max_dim: int = 10_000, gap_tol: float = 1e-8
) -> SteadyStateResult:
    """Steady state from the full eigendecomposition of the generator.

    Eigenvalues are sorted by descending real part and the leading
    eigenvector is normalized into a density matrix.  Guarded against
    superspace dimensions above ``max_dim``.
    """
    n = liouv.dim
    if n > max_dim:
        raise CapacityError(
            f"superspace dimension {n} exceeds the dense guard {max_dim}; "
            "use steady_sparse instead"
        )
    values, vectors = np.linalg.eig(liouv.to_dense())
    order = _descending_order(values)
    lam0 = complex(values[order[0]])
    if n > 1:
        lam1 = complex(values[order[1]])
        if lam0.real - lam1.real < gap_tol:
            raise DegeneracyError(
                f"leading eigenvalues {lam0:.3e} and {lam1:.3e} are degenerate "
                f"within gap tolerance {gap_tol:g}"
            )
    return _finalize(liouv, vectors[:, order[0]], "dense-eig", lam0)


def _arpack_params(n: int, k: int) -> dict:
    # deterministic start vector; restart dimension min(40, n) unless k forces more
    return {
        "v0": np.ones(n) / np.sqrt(n),
        "tol": 1e-12,
        "maxiter": 10 * n,
        "ncv": min(n, max(k + 2, min(40, n))),
    }


def steady_sparse(liouv: SuperOperator, gap_tol: float = 1e-8) -> SteadyStateResult:
    """Steady state from a shift-inverted Arnoldi iteration targeting 0.

    The target eigenvalue of a valid generator is exactly 0, the largest
    real part in the spectrum, so inverting around a tiny shift converges to
    the same eigenvector as a largest-real-part iteration but much faster.
    Two eigenvalues are requested; a second one inside the gap tolerance
    means the kernel is degenerate.
    """
    n = liouv.dim
    if n < 5:
        # too small for ARPACK; the dense route is exact here
        values, vectors = np.linalg.eig(liouv.to_dense())
        order = np.argsort(np.abs(values))
        if n > 1 and abs(values[order[1]]) < gap_tol:
            raise DegeneracyError("second eigenvalue lies within the gap tolerance of 0")
        lam0 = complex(values[order[0]])
        return _finalize(liouv, vectors[:, order[0]], "sparse-eig", lam0)

    matrix = liouv.to_sparse().tocsc()
    scale = max(1.0, liouv.norm_inf())
    params = _arpack_params(n, 2)
    last_error: Exception | None = None
    for sigma in (1e-10 * scale, 1e-7 * scale, 1e-4 * scale):
        try:
            values, vectors = spla.eigs(matrix, k=2, sigma=sigma, which="LM", **params)
            break
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"shift-inverted Arnoldi did not converge within {params['maxiter']} "
                f"iterations: {exc}"
            ) from exc
        except RuntimeError as exc:  # singular shifted factorization; nudge sigma
            last_error = exc
    else:
        raise ConvergenceError(
            f"could not factorize the shifted generator: {last_error}"
        ) from last_error

    order = np.argsort(np.abs(values))
    if abs(values[order[1]]) < gap_tol:
        raise DegeneracyError(
            f"two eigenvalues within {gap_tol:g} of zero "
            f"({values[order[0]]:.3e}, {values[order[1]]:.3e}); degenerate kernel"
        )
    vec = vectors[:, order[0]]
    # Rayleigh quotient: more accurate than the back-transformed ARPACK value
    lam0 = complex((vec.conj() @ (matrix @ vec)) / (vec.conj() @ vec))
    return _finalize(liouv, vec, "sparse-eig", lam0)


def _sparse_condition_estimate(lu, matrix) -> float:
    """Rough infinity-norm condition estimate from the LU factors."""
    n = matrix.shape[0]
    x = np.ones(n, dtype=complex) / np.sqrt(n)
    est = 0.0
    for _ in range(6):
        y = lu.solve(x)
        z = lu.solve(y, trans="H")
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return np.inf
        est = np.sqrt(nz)
        x = z / nz
    norm_a = float(np.max(np.abs(matrix).sum(axis=1)))
    return norm_a * est


def steady_linsolve(
    liouv: SuperOperator,
    l: int = 1,
    gamma: float = 1.0,
    cond_limit: float = 1e14,
) -> SteadyStateResult:
    """Steady state from the row-replacement linear system.

    Row l+(l-1)d of the generator (the evolution equation of the diagonal
    element rho_ll) is overwritten with gamma times the vectorized identity,
    turning the normalization condition into one equation of the system; the
    right-hand side is gamma at that row and zero elsewhere.  The solve uses
    an LU factorization, so the trace of the solution is 1 by construction.
    A condition estimate above ``cond_limit`` signals a degenerate steady
    state, for which the replaced system is singular.
    """
    layout = liouv.layout
    d = layout.total_dim
    if not 1 <= l <= d:
        raise ValueError(f"row selector l={l} out of range [1, {d}]")
    gamma = float(gamma)
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    n = d * d
    s = (l - 1) * (d + 1)  # 0-based superindex of rho_ll
    diag_cols = np.arange(d) * (d + 1)
    rhs = np.zeros(n, dtype=complex)
    rhs[s] = gamma

    if liouv.storage == "sparse":
        replaced = liouv.to_sparse().tolil()
        replaced[s, :] = 0.0
        replaced[s, diag_cols] = gamma
        replaced = replaced.tocsc()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", spla.MatrixRankWarning)
                lu = spla.splu(replaced)
            cond = _sparse_condition_estimate(lu, replaced)
            if not np.isfinite(cond) or cond > cond_limit:
                raise DegeneracyError(
                    f"replaced generator is ill-conditioned (estimate {cond:.2e}); "
                    "degenerate steady states"
                )
            solution = lu.solve(rhs)
        except RuntimeError as exc:
            raise DegeneracyError(
                f"replaced generator is singular ({exc}); degenerate steady states"
            ) from exc
    else:
        replaced = liouv.to_dense()
        replaced[s, :] = 0.0
        replaced[s, diag_cols] = gamma
        anorm = float(np.abs(replaced).sum(axis=0).max())
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lu, piv = scipy.linalg.lu_factor(replaced)
        rcond, info = scipy.linalg.lapack.zgecon(lu, anorm)
        if info != 0 or rcond == 0.0 or 1.0 / max(rcond, np.finfo(float).tiny) > cond_limit:
            raise DegeneracyError(
                f"replaced generator is ill-conditioned (rcond {rcond:.2e}); "
                "degenerate steady states"
            )
        solution = scipy.linalg.lu_solve((lu, piv), rhs)

    return _finalize(liouv, solution, "linsolve", None)


def spectrum(liouv: SuperOperator, k: int, method: str | None = None) -> SpectrumResult:
    """The k eigenvalues of largest real part, sorted descending.

    Ties in the real part are broken by descending imaginary part, then by
    input order.  The sparse route uses an Arnoldi largest-real-part
    iteration; the dense route diagonalizes fully and truncates.
    """
    n = liouv.dim
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    if method is None:
        method = "dense" if liouv.storage == "dense" else "sparse"
    if method == "sparse" and k >= n - 1:
        method = "dense"  # ARPACK requires k < n - 1

    if method == "dense":
        values = np.linalg.eigvals(liouv.to_dense())
    elif method == "sparse":
        params = _arpack_params(n, k)
        try:
            values = spla.eigs(
                liouv.to_sparse().tocsr(), k=k, which="LR",
                return_eigenvectors=False, **params,
            )
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"Arnoldi largest-real-part iteration did not converge: {exc}"
            ) from exc
    else:
        raise ValueError(f"method must be 'dense' or 'sparse', got {method!r}")

    order = _descending_order(values)[:k]
    return SpectrumResult(eigenvalues=values[order], count_requested=k)


def check_uniqueness(
    liouv: SuperOperator, gap_tol: float = 1e-8, method: str | None = None
) -> GapReport:
    """Verify the kernel is one-dimensional via the two leading eigenvalues.

    Unique means the largest real part vanishes within ``gap_tol`` while the
    second-largest stays below ``-gap_tol``.
    """
    if liouv.dim == 1:
        lam0 = complex(liouv.to_dense()[0, 0])
        return GapReport(lam0, None, abs(lam0.real) < gap_tol)
    lead = spectrum(liouv, 2, method=method).eigenvalues
    lam0, lam1 = complex(lead[0]), complex(lead[1])
    unique = abs(lam0.real) < gap_tol and lam1.real < -gap_tol
    return GapReport(lam0, lam1, unique)
