"""Brute-force checks that do not rely on the closed-form bounds.

The optimizers search orthonormal bases of H_B (projective measurements)
with a multi-start compass search; they are meant to confirm numerically
that the analytic bounds are attained and never exceeded.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ProductState, WrongAccessibleDimension
from .sampling import as_generator
from .states import ConditionalBlocks, TripartitePureState, schmidt_coefficients, selective_projection

PAIRS = {2: ((0, 1),), 3: ((0, 1), (0, 2), (1, 2))}


@dataclass(frozen=True)
class OptimizationTrace:
    """Outcome of a maximization.

    ``history`` holds the running best value after each sweep of every
    restart, so it never decreases. ``best_point`` carries the optimizer's
    output in problem terms (a basis or an env vector).
    """

    best_value: float
    best_parameters: tuple[float, ...]
    iterations: int
    converged: bool
    history: tuple[float, ...] = ()
    best_point: np.ndarray | None = field(default=None, compare=False)
    extra: dict = field(default_factory=dict, compare=False)


def basis_from_angles(angles, d: int) -> np.ndarray:
    """Unitary whose columns form the measured basis.

    A product of complex Givens rotations, two angles (theta, phi) per pair
    of levels. Column phases are left out since rank-1 projectors ignore them.
    """
    u = np.eye(d, dtype=complex)
    for (i, j), (theta, phi) in zip(PAIRS[d], np.reshape(angles, (-1, 2))):
        c, s = math.cos(theta), math.sin(theta)
        e = cmath.exp(1j * phi)
        g = np.eye(d, dtype=complex)
        g[i, i] = g[j, j] = c
        g[i, j] = -s / e
        g[j, i] = s * e
        u = u @ g
    return u


def _diag_abs_sum_2(x: np.ndarray) -> Callable:
    a, b, c, d = complex(x[0, 0]), complex(x[0, 1]), complex(x[1, 0]), complex(x[1, 1])

    def f(angles):
        theta, phi = angles
        co, si = math.cos(theta), math.sin(theta)
        e = cmath.exp(1j * phi)
        # u1 = (co, e si), u2 = (-si / e, co); |e| = 1 so conj(e) = 1 / e
        u1 = co * co * a + co * si * e * b + si * co * c / e + si * si * d
        u2 = si * si * a - si * co * e * b - co * si * c / e + co * co * d
        return abs(u1) + abs(u2)

    return f


def _diag_abs_sum(x: np.ndarray) -> Callable:
    d = x.shape[0]
    if d == 2:
        return _diag_abs_sum_2(x)

    def f(angles):
        u = basis_from_angles(angles, d)
        return float(np.abs(np.einsum("ik,ij,jk->k", u.conj(), x, u)).sum())

    return f


def compass_search(
    f: Callable,
    n_params: int,
    stream,
    restarts: int = 16,
    budget: int = 2000,
    step0: float = math.pi / 4,
    tol: float = 1e-10,
    tiebreak: Callable | None = None,
    tie_tol: float = 1e-13,
) -> OptimizationTrace:
    """Maximize ``f`` by multi-start coordinate search with a halving step.

    Each restart starts from uniform random angles in ``[0, 2 pi)`` and runs
    at most ``budget`` sweeps; a restart converges once its step drops below
    ``tol``. The best restart wins.

    ``tiebreak`` is consulted only when a move leaves ``f`` unchanged to
    within ``tie_tol``, which lets the search walk off flat regions.
    """
    rng = as_generator(stream)

    def better(y, fy, x, fx):
        if fy > fx + tie_tol:
            return True
        return tiebreak is not None and fy >= fx - tie_tol and tiebreak(y) > tiebreak(x)

    best_x, best_f = None, -math.inf
    history: list[float] = []
    total_iters = 0
    any_converged = False
    for _ in range(restarts):
        x = list(rng.uniform(0.0, 2.0 * math.pi, n_params))
        fx = f(x)
        step = step0
        sweeps = 0
        while step >= tol and sweeps < budget:
            sweeps += 1
            moved = False
            for i in range(n_params):
                for sign in (1.0, -1.0):
                    y = list(x)
                    y[i] += sign * step
                    fy = f(y)
                    if better(y, fy, x, fx):
                        x, fx, moved = y, fy, True
                        break
            if not moved:
                step *= 0.5
            if fx > best_f:
                best_x, best_f = list(x), fx
            history.append(best_f)
        total_iters += sweeps
        any_converged |= step < tol
    return OptimizationTrace(
        best_value=float(best_f),
        best_parameters=tuple(float(v) for v in best_x),
        iterations=total_iters,
        converged=any_converged,
        history=tuple(history),
    )


def _diag_spread(x: np.ndarray) -> Callable:
    def g(angles):
        u = basis_from_angles(angles, x.shape[0])
        return float(np.sum(np.abs(np.einsum("ik,ij,jk->k", u.conj(), x, u)) ** 2))

    return g


def _projective_search(x: np.ndarray, scale: float, stream, plateau: bool = False, **kw) -> OptimizationTrace:
    d = x.shape[0]
    if d not in PAIRS:
        raise WrongAccessibleDimension(f"projective search supports d_B in (2, 3), got {d}")
    f = _diag_abs_sum(x)
    if plateau:
        kw.setdefault("tiebreak", _diag_spread(x))
    tr = compass_search(lambda a: scale * f(a), 2 * len(PAIRS[d]), stream, **kw)
    return OptimizationTrace(
        tr.best_value,
        tr.best_parameters,
        tr.iterations,
        tr.converged,
        tr.history,
        best_point=basis_from_angles(tr.best_parameters, d),
    )


def optimize_erasure_projective(state: TripartitePureState, budget: int = 2000, stream=0, **kw) -> OptimizationTrace:
    """Best average visibility over orthonormal-basis measurements of B.

    For outcome ``|u><u|`` the contribution is ``2 |<u|chi_B^dagger|u>|``.
    """
    chi = naive_conditional_blocks(state).chi_B
    return _projective_search(chi.conj().T, 2.0, stream, budget=budget, **kw)


def optimize_which_alternative_projective(
    state: TripartitePureState, budget: int = 2000, stream=0, **kw
) -> OptimizationTrace:
    """Best average predictability over orthonormal-basis measurements of B.

    Every basis in which all outcomes lean toward the same qubit alternative
    scores the same ``|p0 - p1|``; on that plateau ties are broken by the
    spread of the per-outcome values.
    """
    blocks = naive_conditional_blocks(state)
    return _projective_search(
        blocks.rho_B0 - blocks.rho_B1, 1.0, stream, plateau=True, budget=budget, **kw
    )


def naive_conditional_blocks(state: TripartitePureState) -> ConditionalBlocks:
    """Conditional blocks by literal index loops over the defining partial traces."""
    _, d_b, d_c = state.dims
    psi = state.tensor
    rho_b = [np.zeros((d_b, d_b), dtype=complex) for _ in range(2)]
    rho_c = [np.zeros((d_c, d_c), dtype=complex) for _ in range(2)]
    chi = np.zeros((d_b, d_b), dtype=complex)
    for b in range(d_b):
        for b2 in range(d_b):
            for c in range(d_c):
                for k in range(2):
                    rho_b[k][b, b2] += psi[k, b, c] * np.conj(psi[k, b2, c])
                chi[b, b2] += psi[0, b, c] * np.conj(psi[1, b2, c])
    for c in range(d_c):
        for c2 in range(d_c):
            for b in range(d_b):
                for k in range(2):
                    rho_c[k][c, c2] += psi[k, b, c] * np.conj(psi[k, b, c2])
    p0 = float(sum(abs(psi[0, b, c]) ** 2 for b in range(d_b) for c in range(d_c)))
    p1 = float(sum(abs(psi[1, b, c]) ** 2 for b in range(d_b) for c in range(d_c)))
    return ConditionalBlocks(rho_b[0], rho_b[1], chi, rho_c[0], rho_c[1], p0, p1)


def reachability_search(
    state: TripartitePureState, target, budget: int = 2000, stream=0, restarts: int = 8
) -> OptimizationTrace:
    """Search env vectors whose selective projection steers qubit A onto ``target``.

    Only the component of the env vector inside the two-dimensional support
    of the A:BC Schmidt decomposition affects the output direction, so the
    search runs over unit vectors ``w`` in that support, parameterized by two
    angles. ``extra`` reports the success probability of the best vector.

    Raises:
        ProductState: if A is not entangled with the environment.
    """
    target = np.asarray(target, dtype=complex).reshape(2)
    target = target / np.linalg.norm(target)
    if schmidt_coefficients(state)[1] <= 1e-10:
        raise ProductState("qubit is not entangled with the environment")
    psi = state.tensor.reshape(2, -1)
    _, _, vh = np.linalg.svd(psi, full_matrices=False)

    def env_vector(angles):
        theta, phi = angles
        w = np.array([math.cos(theta), cmath.exp(1j * phi) * math.sin(theta)])
        # qubit amplitudes are psi @ conj(e); choose conj(e) = vh^dagger w
        return np.conj(vh.conj().T @ w)

    def fidelity(angles):
        v = psi @ np.conj(env_vector(angles))
        n2 = np.vdot(v, v).real
        return abs(np.vdot(target, v)) ** 2 / n2 if n2 > 0 else 0.0

    tr = compass_search(fidelity, 2, stream, restarts=restarts, budget=budget)
    e = env_vector(tr.best_parameters)
    qubit, p_s = selective_projection(state, e)
    fid = float(abs(np.vdot(target, qubit)) ** 2)
    return OptimizationTrace(
        fid,
        tr.best_parameters,
        tr.iterations,
        tr.converged,
        tr.history,
        best_point=e,
        extra={"success_probability": p_s, "qubit": qubit},
    )
