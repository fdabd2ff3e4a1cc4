"""Small dense complex linear algebra.

Every routine takes a 2-d ``numpy`` array and returns plain floats or new
arrays; nothing is mutated in place. Dimensions in this package are tiny
(a few dozen at most), so clarity is favoured over speed.

Radicands that are nonnegative in exact arithmetic but may dip below zero
through round-off are clamped to 0; each clamp is tallied in a process-wide
counter readable through :func:`clamp_counts`.
"""

from __future__ import annotations

import threading
from collections import Counter

import numpy as np

from .errors import NoConvergence, NonSquare, NotHermitian, NotPsd, UnsupportedOrder, WrongDimension

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10

_clamps: Counter = Counter()
_clamps_lock = threading.Lock()


def clamp_counts() -> dict[str, int]:
    """Snapshot of how often each named radicand was clamped at zero."""
    with _clamps_lock:
        return dict(_clamps)


def reset_clamp_counts() -> None:
    with _clamps_lock:
        _clamps.clear()


def clamp_nonneg(value: float, name: str) -> float:
    """Return ``max(value, 0)``, recording the event under ``name`` if clamped."""
    if value < 0.0:
        with _clamps_lock:
            _clamps[name] += 1
        return 0.0
    return value


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise WrongDimension(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise NonSquare(f"matrix of shape {m.shape} is not square")


def max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate that ``m`` is square and Hermitian relative to its largest entry.

    Returns the matrix as a complex array.
    """
    m = as_matrix(m)
    _require_square(m)
    dev = max_abs(m - m.conj().T)
    if dev > tol * max_abs(m):
        raise NotHermitian(f"max |M - M^dagger| = {dev:.3e} exceeds tolerance")
    return m


def herm_eigvals(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, in descending order."""
    m = check_hermitian(m, tol)
    n = m.shape[0]
    if n == 1:
        return np.array([m[0, 0].real])
    if n == 2:
        a, d = m[0, 0].real, m[1, 1].real
        half_gap = np.hypot(0.5 * (a - d), abs(m[0, 1]))
        mid = 0.5 * (a + d)
        return np.array([mid + half_gap, mid - half_gap])
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))[::-1]


def singular_values(m) -> np.ndarray:
    """Singular values of any rectangular matrix, in descending order.

    Returns ``min(rows, cols)`` values, i.e. the square roots of the
    eigenvalues of the smaller Gram matrix.
    """
    m = as_matrix(m)
    # LAPACK SVD instead of eig(M^dagger M): the Gram route loses half the
    # digits of small singular values.
    return np.linalg.svd(m, compute_uv=False)


def trace_norm(m) -> float:
    """Sum of singular values (Schatten-1 norm) of a square matrix."""
    m = as_matrix(m)
    _require_square(m)
    return float(singular_values(m).sum())


def sym_polys_from_traces(m, r: int) -> tuple[float, ...]:
    """Elementary symmetric polynomials of the eigenvalues, from power traces.

    Uses Newton's identities up to third order::

        s1 = Tr M
        2 s2 = (Tr M)^2 - Tr M^2
        6 s3 = (Tr M)^3 - 3 Tr M Tr M^2 + 2 Tr M^3
    """
    if r not in (1, 2, 3):
        raise UnsupportedOrder(f"order {r} not supported (1, 2 or 3)")
    m = check_hermitian(m)
    t1 = np.trace(m).real
    if r == 1:
        return (t1,)
    m2 = m @ m
    t2 = np.trace(m2).real
    s2 = 0.5 * (t1 * t1 - t2)
    if r == 2:
        return (t1, s2)
    t3 = np.trace(m2 @ m).real
    s3 = (t1**3 - 3.0 * t1 * t2 + 2.0 * t3) / 6.0
    return (t1, s2, s3)


def _gram(m: np.ndarray) -> np.ndarray:
    g = m.conj().T @ m
    return 0.5 * (g + g.conj().T)


def trace_norm_newton_2(m) -> float:
    """Trace norm of a 2x2 matrix as sqrt(s1 + 2 sqrt(s2)) of its Gram matrix."""
    m = as_matrix(m)
    if m.shape != (2, 2):
        raise WrongDimension(f"expected 2x2, got {m.shape}")
    s1, s2 = sym_polys_from_traces(_gram(m), 2)
    s2 = clamp_nonneg(s2, "s2")
    return float(np.sqrt(clamp_nonneg(s1 + 2.0 * np.sqrt(s2), "s1+2sqrt(s2)")))


def gram_sym_polys_3(m) -> tuple[float, float, float]:
    """Symmetric polynomials of the eigenvalues of ``M^dagger M`` for 3x3 ``M``.

    By Cauchy-Binet, ``s_k`` is the sum of squared moduli of the k x k minors
    of ``M``. Every term is nonnegative, so rank-deficient inputs give
    ``s2, s3`` near eps^2 rather than the eps-sized noise left by power traces.
    """
    m = as_matrix(m)
    if m.shape != (3, 3):
        raise WrongDimension(f"expected 3x3, got {m.shape}")
    s1 = float(np.sum(np.abs(m) ** 2))
    s2 = 0.0
    for r0, r1 in ((0, 1), (0, 2), (1, 2)):
        for c0, c1 in ((0, 1), (0, 2), (1, 2)):
            s2 += abs(m[r0, c0] * m[r1, c1] - m[r0, c1] * m[r1, c0]) ** 2
    det = (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )
    return s1, float(s2), float(abs(det) ** 2)


def trace_norm_newton_3(m, *, tol: float = 1e-13, max_iter: int = 200) -> float:
    """Trace norm of a 3x3 matrix from the nested-radical fixed point.

    Solves ``T = sqrt(s1 + 2 sqrt(s2 + 2 sqrt(s3) T))`` by iterating from
    ``sqrt(s1 + 2 sqrt(s2))``, which lies below the root; the map is
    increasing, so the iterates climb monotonically onto it. The ``s_k`` come
    from :func:`gram_sym_polys_3`: the fourth root in the radical would
    otherwise amplify power-trace round-off to ~1e-4 for rank-deficient input.

    Raises:
        NoConvergence: if ``|dT|`` is still above ``tol`` after ``max_iter``
            steps.
    """
    s1, s2, s3 = gram_sym_polys_3(m)
    root_s3 = np.sqrt(s3)

    t = np.sqrt(s1 + 2.0 * np.sqrt(s2))
    for _ in range(max_iter):
        inner = clamp_nonneg(s2 + 2.0 * root_s3 * t, "s2+2sqrt(s3)T")
        t_next = np.sqrt(s1 + 2.0 * np.sqrt(inner))
        if abs(t_next - t) < tol:
            return float(t_next)
        t = t_next
    raise NoConvergence(f"nested radical did not settle in {max_iter} iterations")


def matrix_sqrt_psd(m, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues down to ``-psd_tol`` (relative to the largest entry) are
    treated as zero.
    """
    m = check_hermitian(m)
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    floor = -psd_tol * max_abs(m)
    if w.size and w.min() < floor:
        raise NotPsd(f"minimum eigenvalue {w.min():.3e} below {floor:.1e}")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ v.conj().T
