"""Small dense matrix algebra used throughout the package.

Kronecker product/sum, vec/unvec (column-stacking order), matrix exponential,
Cholesky factorization, and spectral decomposition restricted to real
diagonalizable matrices.  All functions are pure and operate on
``numpy.ndarray`` values of modest size (the model dimension is small).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError

__all__ = [
    "Spectrum",
    "kron",
    "kron_sum",
    "vec",
    "unvec",
    "expm",
    "cholesky",
    "spectrum",
]


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product A ⊗ B (block (i, j) equals a_ij * B)."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def kron_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker sum A ⊕ B = A ⊗ I_q + I_p ⊗ B for square A (p×p), B (q×q)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"kron_sum: A must be square, got shape {a.shape}")
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValidationError(f"kron_sum: B must be square, got shape {b.shape}")
    return np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b)


def vec(a: np.ndarray) -> np.ndarray:
    """Stack the columns of ``a`` into a 1-d vector (column-major order)."""
    return np.asarray(a).reshape(-1, order="F").copy()


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a length ``rows*cols`` vector into a
    matrix by filling columns first."""
    v = np.asarray(v).reshape(-1)
    if v.size != rows * cols:
        raise ValidationError(
            f"unvec: length {v.size} does not match {rows}x{cols}"
        )
    return v.reshape(rows, cols, order="F").copy()


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a square matrix.

    Uses scaling-and-squaring with Padé approximants; overflowing inputs
    raise :class:`NumericalError` rather than returning non-finite entries.
    """
    a = np.asarray(a, dtype=complex if np.iscomplexobj(a) else float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expm: input must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("expm: input has non-finite entries")
    out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise NumericalError("expm: result overflowed for the given norm")
    return out


def cholesky(s: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix.

    Parameters
    ----------
    s : array
        Matrix symmetric within ``tol`` (relative to its largest entry).

    Returns
    -------
    L lower triangular with positive diagonal such that L @ L.T == s.

    Raises
    ------
    ValidationError
        If ``s`` is not symmetric within tolerance.
    NumericalError
        If a pivot fails; the message names the failing leading minor.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValidationError(f"cholesky: input must be square, got shape {s.shape}")
    scale = max(np.abs(s).max(), 1.0)
    if np.abs(s - s.T).max() > tol * scale:
        raise ValidationError("cholesky: input is not symmetric within tolerance")
    try:
        return np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        # locate the first failing leading principal minor for the error message
        for k in range(1, s.shape[0] + 1):
            if np.linalg.det(s[:k, :k]) <= 0:
                raise NumericalError(
                    f"cholesky: leading minor of order {k} is not positive"
                ) from None
        raise NumericalError("cholesky: matrix is not positive definite") from None


@dataclass(frozen=True)
class Spectrum:
    """Real spectral decomposition A = P diag(eigenvalues) P^{-1}.

    ``eigenvalues`` are sorted ascending; ``modal_matrix`` columns are the
    matching eigenvectors and ``inverse_modal`` is its inverse.
    """

    eigenvalues: np.ndarray
    modal_matrix: np.ndarray
    inverse_modal: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.modal_matrix @ np.diag(self.eigenvalues) @ self.inverse_modal


def spectrum(a: np.ndarray, imag_tol: float = 1e-9) -> Spectrum:
    """Spectral decomposition of a real-diagonalizable matrix.

    Symmetric inputs (within 1e-10) use the symmetric eigensolver; otherwise
    the general solver runs with a post-hoc reality check: any eigenvalue
    with relative imaginary part above ``imag_tol`` is an error, as is a
    defective (non-diagonalizable) spectrum.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"spectrum: input must be square, got shape {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() <= 1e-10 * scale:
        w, p = np.linalg.eigh(a)
        order = np.argsort(w)
        w, p = w[order], p[:, order]
        return Spectrum(w, p, p.T.copy())
    w, p = np.linalg.eig(a)
    if np.abs(w.imag).max() > imag_tol * scale:
        raise ValidationError("spectrum: matrix has complex eigenvalues")
    w = w.real
    p = p.real
    # diagonalizability check: the eigenvector matrix must be well invertible
    cond = np.linalg.cond(p)
    if not np.isfinite(cond) or cond > 1e12:
        raise ValidationError("spectrum: matrix is defective (not diagonalizable)")
    order = np.argsort(w)
    w, p = w[order], p[:, order]
    p_inv = np.linalg.inv(p)
    residual = np.abs(p @ np.diag(w) @ p_inv - a).max()
    if residual > 1e-9 * scale:
        raise ValidationError("spectrum: reconstruction failed; matrix not diagonalizable")
    return Spectrum(w, p, p_inv)
