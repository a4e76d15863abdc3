"""Dense complex linear-algebra kernel.

Every other module works with plain ``numpy`` arrays of ``complex128``;
this module owns the shared primitives (generalized Hermitian
eigensolves, matrix exponentials, pivoted solves, Gram-weighted norms)
and the tolerance record that callers may override.

All operations are pure functions of their inputs. Dense storage only:
the laboratory targets desk-scale problems (n up to a few hundred).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg.lapack import get_lapack_funcs

from .errors import DefinitenessError, MatrixRangeError, NumericalError, SingularMatrixError

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "as_square_matrix",
    "as_vector",
    "is_hermitian",
    "hermitian_part",
    "skew_part",
    "require_hpd",
    "cholesky_factor",
    "hermitian_geig",
    "matrix_exponential",
    "solve_linear",
    "weighted_operator_norm",
    "gram_norm",
]


@dataclass(frozen=True)
class Tolerances:
    """Central tolerance record; all defaults overridable per call."""

    hermitian_rel: float = 1e-12      # max-norm Hermitian symmetry slack
    geig_orth: float = 1e-10          # rhs-orthonormality of eigenvectors
    expm_norm_cap: float = 1e7        # refuse exp(tM) beyond this ||tM||
    solve_residual: float = 1e-10     # relative residual target of solves
    singular_pivot: float = 1e-14     # U-diagonal ratio flagging singularity
    pairing_rel: float = 1e-10        # operator/form pairing agreement
    assembly_rel: float = 1e-12       # assembled-form reproduction check


DEFAULT_TOL = Tolerances()


def as_square_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and return ``m`` as a finite square complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains nonfinite entries")
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains nonfinite entries")
    return a


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2.0


def skew_part(m: np.ndarray) -> np.ndarray:
    """Hermitian matrix K with m = Herm(m) + i*K."""
    return (m - m.conj().T) / 2.0j


def is_hermitian(m: np.ndarray, rel: float = DEFAULT_TOL.hermitian_rel) -> bool:
    m = np.asarray(m, dtype=complex)
    scale = np.abs(m).max() if m.size else 0.0
    if scale == 0.0:
        return True
    return np.abs(m - m.conj().T).max() <= rel * scale


def require_hpd(m, name: str = "matrix", tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Check that ``m`` is Hermitian positive definite; return it validated.

    Raises :class:`DefinitenessError` carrying the 1-based pivot index at
    which the Cholesky factorization fails.
    """
    a = as_square_matrix(m, name)
    if not is_hermitian(a, tol.hermitian_rel):
        raise DefinitenessError(f"{name} is not Hermitian to tolerance")
    (potrf,) = get_lapack_funcs(("potrf",), (a,))
    _, info = potrf(a, lower=1)
    if info > 0:
        raise DefinitenessError(
            f"{name} is not positive definite (pivot {info})", pivot=int(info)
        )
    if info < 0:
        raise NumericalError(f"LAPACK potrf failed on {name} (info={info})")
    return a


def cholesky_factor(gram, name: str = "gram", tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Lower-triangular L with gram = L L^H, validated HPD."""
    a = require_hpd(gram, name, tol)
    return sla.cholesky(hermitian_part(a), lower=True)


def hermitian_geig(lhs, rhs, tol: Tolerances = DEFAULT_TOL):
    """All eigenpairs of the Hermitian pencil lhs x = lam rhs x.

    ``rhs`` must be Hermitian positive definite. Eigenvalues are real and
    returned ascending; eigenvectors (as columns) are rhs-orthonormal,
    x_i^H rhs x_j = delta_ij. Solved by Cholesky reduction rhs = L L^H
    followed by a standard Hermitian eigensolve.

    Returns ``(eigenvalues, eigenvectors)``.
    """
    a = as_square_matrix(lhs, "lhs")
    b = as_square_matrix(rhs, "rhs")
    if a.shape != b.shape:
        raise ValueError(f"pencil shapes differ: {a.shape} vs {b.shape}")
    if not is_hermitian(a, tol.hermitian_rel):
        raise DefinitenessError("pencil lhs is not Hermitian to tolerance")
    require_hpd(b, "pencil rhs", tol)
    w, v = sla.eigh(hermitian_part(a), hermitian_part(b))
    return w, v


def matrix_exponential(m, t: float = 1.0, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """exp(t*m) by scaling-and-squaring with diagonal Pade approximants.

    Refuses arguments with ||t*m||_1 beyond ``tol.expm_norm_cap``: far out
    there squaring error swamps every digit and the result is meaningless.
    """
    a = as_square_matrix(m, "matrix")
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    ta = t * a
    norm1 = np.abs(ta).sum(axis=0).max() if ta.size else 0.0
    if norm1 > tol.expm_norm_cap:
        raise MatrixRangeError(
            f"||t*M||_1 = {norm1:.3e} exceeds the supported range {tol.expm_norm_cap:.1e}"
        )
    out = sla.expm(ta)
    if not np.all(np.isfinite(out)):
        raise MatrixRangeError("matrix exponential overflowed")
    return out


def _condition_estimate(lu: np.ndarray) -> float:
    d = np.abs(np.diag(lu))
    big = d.max() if d.size else 0.0
    small = d.min() if d.size else 0.0
    return np.inf if small == 0.0 else float(big / small)


def solve_linear(m, rhs, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Solve m x = rhs by LU with partial pivoting.

    Accepts a vector or a matrix of right-hand sides. Raises
    :class:`SingularMatrixError` (with a cheap condition estimate from the
    U-diagonal) when the factorization is singular to tolerance.
    """
    a = as_square_matrix(m, "matrix")
    b = np.asarray(rhs, dtype=complex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a)
    d = np.abs(np.diag(lu))
    if d.size and d.min() <= tol.singular_pivot * d.max():
        raise SingularMatrixError(
            "matrix is singular to working tolerance",
            cond_estimate=_condition_estimate(lu),
        )
    return sla.lu_solve((lu, piv), b)


def gram_norm(v, gram) -> float:
    """Norm ||v|| induced by the HPD Gram matrix, sqrt(v^H G v)."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    q = (v.conj() @ np.asarray(gram, dtype=complex) @ v).real
    return float(np.sqrt(max(q, 0.0)))


def weighted_operator_norm(op, gram, tol: Tolerances = DEFAULT_TOL) -> float:
    """Operator norm of ``op`` in the Gram-weighted metric.

    Equals the largest singular value of C op C^{-1} where gram = C^H C
    (Cholesky similarity).
    """
    a = as_square_matrix(op, "operator")
    low = cholesky_factor(gram, "gram", tol)
    c = low.conj().T  # gram = c^H c
    sim = c @ sla.solve_triangular(low, a.conj().T, lower=True).conj().T
    return float(np.linalg.norm(sim, 2))
