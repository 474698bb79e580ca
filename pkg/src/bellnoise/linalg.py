"""Small dense complex matrix kernel.

Matrices are plain ``numpy`` ``complex128`` arrays. The helpers here add the
shape and finiteness checks the rest of the package relies on, plus a cyclic
Jacobi eigenvalue solver for Hermitian matrices of size 2, 3 and 4. The solver
is batched: it accepts a stack ``(..., n, n)`` and diagonalizes every matrix
in the stack with the same sweep schedule, which is what makes the parameter
sweeps in :mod:`bellnoise.scenarios` cheap.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError, InvariantError, NotHermitianError

HERMITICITY_TOL = 1e-9
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
SUPPORTED_SIZES = (2, 3, 4)

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_matrix(m, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array, optionally checking its shape."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"expected a 2-D matrix, got shape {arr.shape}")
    if rows is not None and arr.shape[0] != rows:
        raise InvalidArgumentError(f"expected {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise InvalidArgumentError(f"expected {cols} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("matrix has non-finite entries")
    return arr


def kron(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 matrices; block ``(i, j)`` is ``a[i, j] * b``."""
    a = as_matrix(a, 2, 2)
    b = as_matrix(b, 2, 2)
    return np.kron(a, b)


def dagger(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return np.swapaxes(m, -1, -2).conj()


def trace(m, hermitian: bool = False) -> complex | float:
    """Matrix trace. With ``hermitian=True`` an imaginary residue up to 1e-12 is dropped."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"trace of non-square matrix {m.shape}")
    tr = complex(np.trace(m))
    if hermitian:
        if abs(tr.imag) > 1e-12:
            raise InvalidArgumentError(f"trace has imaginary part {tr.imag:.3e}")
        return tr.real
    return tr


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise InvalidArgumentError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def add(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"cannot add {a.shape} and {b.shape}")
    return a + b


def scale(c: complex, m) -> np.ndarray:
    return complex(c) * as_matrix(m)


def max_abs_diff(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def hermitian_part(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + dagger(m))


def _check_hermitian_stack(m: np.ndarray, tol: float) -> np.ndarray:
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise InvalidArgumentError(f"expected square matrices, got shape {m.shape}")
    if m.shape[-1] not in SUPPORTED_SIZES:
        raise InvalidArgumentError(f"unsupported matrix size {m.shape[-1]}")
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError("matrix has non-finite entries")
    if m.size:
        residual = float(np.max(np.abs(m - dagger(m))))
        if residual > tol:
            raise NotHermitianError(f"not hermitian: max |m - m^dagger| = {residual:.3e}")
    return hermitian_part(m)


def _jacobi_diagonal(a: np.ndarray, tol: float, max_sweeps: int) -> np.ndarray:
    """Run cyclic complex Jacobi sweeps on a stack ``(k, n, n)``; return the diagonals."""
    a = a.copy()
    k, n, _ = a.shape
    off_mask = ~np.eye(n, dtype=bool)
    scale_ = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2))))
    eye = np.broadcast_to(np.eye(n, dtype=complex), (k, n, n))
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, off_mask]) ** 2, axis=1))
        if np.all(off < tol * scale_):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                active = mag > 0.0
                safe = np.where(active, mag, 1.0)
                phase = np.where(active, apq / safe, 1.0)
                theta = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe)
                sgn = np.where(theta >= 0.0, 1.0, -1.0)
                t = np.where(active, sgn / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = D R: D rephases a[p, q] to be real, R is the real Jacobi rotation.
                g = eye.copy()
                g[:, p, p] = c
                g[:, p, q] = s
                g[:, q, p] = -s * phase.conj()
                g[:, q, q] = c * phase.conj()
                a = dagger(g) @ a @ g
    else:
        off = np.sqrt(np.sum(np.abs(a[:, off_mask]) ** 2, axis=1))
        if not np.all(off < tol * scale_):
            raise InvariantError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                f"(off-diagonal mass {float(off.max()):.3e})"
            )
    return np.real(np.diagonal(a, axis1=1, axis2=2)).copy()


def hermitian_eigenvalues(
    m,
    hermiticity_tol: float = HERMITICITY_TOL,
    *,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix (or a stack of them), sorted descending.

    Parameters
    ----------
    m : array_like, shape (..., n, n)
        Hermitian matrices with ``n`` in {2, 3, 4}.
    hermiticity_tol : float
        Largest tolerated entry of ``|m - m^dagger|``. The input is symmetrized
        before diagonalization.

    Returns
    -------
    numpy.ndarray, shape (..., n)
        Real eigenvalues, non-increasing along the last axis.

    Raises
    ------
    NotHermitianError
        If the input departs from Hermiticity by more than ``hermiticity_tol``.
    InvalidArgumentError
        For non-square input or an unsupported size.
    """
    arr = np.asarray(m, dtype=complex)
    herm = _check_hermitian_stack(arr, hermiticity_tol)
    batch = herm.shape[:-2]
    n = herm.shape[-1]
    flat = herm.reshape(-1, n, n)
    if flat.shape[0] == 0:
        return np.zeros(batch + (n,))
    vals = _jacobi_diagonal(flat, tol, max_sweeps)
    vals = -np.sort(-vals, axis=1)
    traces = np.real(np.trace(flat, axis1=1, axis2=2))
    residual = np.abs(vals.sum(axis=1) - traces)
    bound = 1e-10 * np.maximum(1.0, np.abs(traces))
    if np.any(residual > bound):
        raise InvariantError(f"eigenvalue sum differs from trace by {float(residual.max()):.3e}")
    return vals.reshape(batch + (n,))
