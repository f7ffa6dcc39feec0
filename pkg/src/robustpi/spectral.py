"""Dense real-matrix kernels: eigenvalues, singular values, Lyapunov solves.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. All functions
are pure; nothing here keeps state between calls.

Eigenvalues of general (non-symmetric) matrices come from a Householder
reduction to upper Hessenberg form followed by Francis double-shift QR
sweeps. The matrices handled by this package are at most 8x8, so the
textbook algorithm is more than adequate.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DefinitenessError, DimensionError, NumericError, StabilityError

__all__ = [
    "as_matrix",
    "as_square",
    "hessenberg",
    "eigvals",
    "eig_real_parts",
    "spectral_abscissa",
    "is_hurwitz",
    "spectral_norm",
    "min_singular_value",
    "sym_eigvals",
    "is_positive_definite",
    "condition_number",
    "symmetrize",
    "lyapunov_residual",
    "solve_lyapunov",
]

MAX_SWEEPS = 500
MAX_DIM = 64


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return `a` as a finite 2-D float array, raising on anything else."""
    m = np.array(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericError(f"{name} has non-finite entries")
    return m


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise DimensionError(f"{name} exceeds the supported dimension {MAX_DIM}")
    return m


def hessenberg(a) -> np.ndarray:
    """Orthogonally similar upper Hessenberg form of `a` (Householder)."""
    h = as_square(a).copy()
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x
        v[0] += math.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _hqr(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.

    Works in place on `a`. Deflation uses the classic small-subdiagonal test;
    exceptional shifts are taken after 10 and 20 stalled sweeps on the same
    eigenvalue.
    """
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = float(np.sum(np.abs(np.triu(a, -1))))
    nn = n - 1
    t = 0.0
    sweeps = 0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) + s == s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = z
                    wi[nn] = -z
                nn -= 2
                break

            if sweeps >= MAX_SWEEPS:
                raise NumericError(f"QR iteration did not converge in {MAX_SWEEPS} sweeps")
            if its in (10, 20):
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            sweeps += 1

            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0

            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k, j] + q * a[k + 1, j]
                    if k != nn - 1:
                        p += r * a[k + 2, j]
                        a[k + 2, j] -= p * z
                    a[k + 1, j] -= p * y
                    a[k, j] -= p * x
                mmin = nn if nn < k + 3 else k + 3
                for i in range(l, mmin + 1):
                    p = x * a[i, k] + y * a[i, k + 1]
                    if k != nn - 1:
                        p += z * a[i, k + 2]
                        a[i, k + 2] -= p * r
                    a[i, k + 1] -= p * q
                    a[i, k] -= p
    return wr + 1j * wi


def eigvals(a) -> np.ndarray:
    """All eigenvalues of a real square matrix as a complex array.

    Conjugate pairs appear adjacent; order is otherwise unspecified.
    """
    h = hessenberg(a)
    return _hqr(h)


def eig_real_parts(a) -> list[float]:
    """Real parts of the eigenvalues of `a`, sorted descending."""
    return sorted((float(z.real) for z in eigvals(a)), reverse=True)


def spectral_abscissa(a) -> float:
    return eig_real_parts(a)[0]


def is_hurwitz(a, margin: float = 0.0) -> bool:
    """True iff every eigenvalue has real part strictly below ``-margin``."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    return spectral_abscissa(a) < -margin


def _singular_values(a) -> np.ndarray:
    return np.linalg.svd(as_matrix(a), compute_uv=False)


def spectral_norm(a) -> float:
    """Largest singular value, i.e. the induced 2-norm."""
    return float(_singular_values(a)[0])


def min_singular_value(a) -> float:
    return float(_singular_values(as_square(a))[-1])


def symmetrize(a) -> np.ndarray:
    m = as_square(a)
    return 0.5 * (m + m.T)


def sym_eigvals(q) -> np.ndarray:
    """Ascending eigenvalues of the symmetric part of `q`."""
    return np.linalg.eigvalsh(symmetrize(q))


def is_positive_definite(q) -> bool:
    """Scale-aware test: every eigenvalue above ``1e-10 * (1 + lambda_max)``."""
    w = sym_eigvals(q)
    return bool(w[0] > 1e-10 * (1.0 + abs(w[-1])))


def condition_number(q) -> float:
    """lambda_max / lambda_min of a symmetric positive definite matrix."""
    w = sym_eigvals(q)
    if not w[0] > 1e-10 * (1.0 + abs(w[-1])):
        raise DefinitenessError(f"matrix is not positive definite (lambda_min={w[0]:.3e})")
    return float(w[-1] / w[0])


def lyapunov_residual(a, q, c) -> float:
    """2-norm of ``A^T Q + Q A + C``."""
    a = np.asarray(a, dtype=float)
    q = np.asarray(q, dtype=float)
    return spectral_norm(a.T @ q + q @ a + np.asarray(c, dtype=float))


def solve_lyapunov(a, c) -> np.ndarray:
    """Solve ``A^T Q + Q A + C = 0`` for symmetric Q.

    Parameters
    ----------
    a : (n, n) array_like
        Hurwitz matrix.
    c : (n, n) array_like
        Symmetric positive semidefinite right-hand side.

    Returns
    -------
    q : (n, n) ndarray
        The unique solution, symmetrized as ``(Q + Q^T) / 2``.

    Raises
    ------
    StabilityError
        If `a` is not Hurwitz, so the solution is not unique or not definite.
    """
    a = as_square(a, "A")
    c = as_square(c, "C")
    n = a.shape[0]
    if c.shape != a.shape:
        raise DimensionError(f"A is {a.shape} but C is {c.shape}")
    if not is_hurwitz(a):
        raise StabilityError("Lyapunov solve requires a Hurwitz matrix")
    eye = np.eye(n)
    # column-major vec: vec(A^T Q) = (I kron A^T) vec Q, vec(Q A) = (A^T kron I) vec Q
    lhs = np.kron(eye, a.T) + np.kron(a.T, eye)
    try:
        vec_q = np.linalg.solve(lhs, -c.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise StabilityError("vectorized Lyapunov system is singular") from exc
    q = vec_q.reshape(n, n, order="F")
    q = 0.5 * (q + q.T)
    if not np.all(np.isfinite(q)):
        raise NumericError("Lyapunov solution has non-finite entries")
    return q
