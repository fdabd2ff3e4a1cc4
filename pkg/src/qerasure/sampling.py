"""Seeded random matrices, states and measurements.

Randomness flows from a :class:`SeededStream` ``(master_seed, stream_index)``.
Each stream maps to an independent counter-based Philox generator, so
parallel workers given distinct indices reproduce the same draws as a
sequential run. Functions accept either a stream descriptor (a fresh
generator is derived from it every call) or a live ``numpy`` Generator when
several draws must be chained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaln, gammaln

from .errors import DegenerateDraw, UnsupportedK
from .states import TripartitePureState

DEGENERATE_TRACE = 1e-100


@dataclass(frozen=True)
class SeededStream:
    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(seq))

    def child(self, index: int) -> "SeededStream":
        return SeededStream(self.master_seed, index)


def as_generator(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, SeededStream):
        return stream.generator()
    if isinstance(stream, (int, np.integer)):
        return SeededStream(int(stream)).generator()
    raise TypeError(f"cannot derive a generator from {type(stream).__name__}")


def _shape(size, *tail):
    if size is None:
        return tail
    if isinstance(size, (int, np.integer)):
        return (int(size), *tail)
    return (*size, *tail)


def ginibre(m: int, n: int, stream, size=None) -> np.ndarray:
    """``m x n`` matrix of i.i.d. standard complex Gaussians (E|z|^2 = 1).

    Gaussians come from the polar Box-Muller transform of two uniforms, with
    each real component of variance 1/2.
    """
    rng = as_generator(stream)
    shape = _shape(size, m, n)
    u1 = 1.0 - rng.random(shape)  # (0, 1]: keeps log finite
    u2 = rng.random(shape)
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def induced_density(n: int, m: int, stream, size=None) -> np.ndarray:
    """Random ``n x n`` density matrix from the induced (partial-trace) measure.

    Equivalent to tracing an ``m``-dimensional environment out of a uniformly
    random pure state on ``n*m`` dimensions. With ``size`` a batch of shape
    ``(*size, n, n)`` is returned.
    """
    rng = as_generator(stream)
    for attempt in range(2):
        mu = ginibre(m, n, rng, size)
        rho = np.conj(np.swapaxes(mu, -1, -2)) @ mu
        tr = np.trace(rho, axis1=-2, axis2=-1).real
        if np.all(tr >= DEGENERATE_TRACE):
            rho = rho / tr[..., None, None]
            return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    raise DegenerateDraw("Ginibre draw had vanishing trace twice")


def haar_pure(d: int, stream, size=None) -> np.ndarray:
    """Uniformly random unit vector(s) in C^d."""
    z = ginibre(d, 1, stream, size)[..., 0]
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def haar_su2(stream, size=None) -> np.ndarray:
    """Haar-random SU(2) matrices ``[[a, -b*], [b, a*]]`` with (a, b) uniform on S^3."""
    v = haar_pure(2, stream, size)
    a, b = v[..., 0], v[..., 1]
    return np.stack(
        [np.stack([a, -np.conj(b)], axis=-1), np.stack([b, np.conj(a)], axis=-1)], axis=-2
    )


def random_state(dims, stream) -> TripartitePureState:
    """Haar-random tripartite pure state with ``dims = (2, d_B, d_C)``."""
    dims = tuple(dims)
    return TripartitePureState(dims, haar_pure(int(np.prod(dims)), stream))


def random_density(d: int, stream, rank: int | None = None) -> np.ndarray:
    """Random density matrix; Hilbert-Schmidt measure unless ``rank`` is given."""
    return induced_density(d, rank or d, stream)


def random_pom(d: int, n_outcomes: int, stream) -> list[np.ndarray]:
    """Random ``n_outcomes``-element POM on C^d.

    Draws positive ``G_k`` and returns ``S^-1/2 G_k S^-1/2`` with
    ``S = sum_k G_k``.
    """
    rng = as_generator(stream)
    g = [a.conj().T @ a for a in ginibre(d, d, rng, n_outcomes)]
    w, v = np.linalg.eigh(sum(g))
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    elems = [s_inv_half @ gk @ s_inv_half for gk in g]
    return [0.5 * (e + e.conj().T) for e in elems]


def _log_pdf_norm(env_dim: int) -> float:
    return gammaln(2 * env_dim) - np.log(2.0) - gammaln(env_dim) - gammaln(env_dim - 1)


def _check_env_dim(env_dim: int) -> None:
    if env_dim < 2:
        raise UnsupportedK(f"eigenvalue density needs env_dim >= 2, got {env_dim}")


def eig_pdf_trace(env_dim: int, lam):
    """Density of one eigenvalue of a qubit state traced out of ``env_dim`` dimensions.

    ``Gamma(2K) / (2 Gamma(K) Gamma(K-1)) * (lam - lam^2)^(K-2) * (2 lam - 1)^2``
    with ``K = env_dim``. Matches :func:`induced_density` ``(2, env_dim)``.
    """
    _check_env_dim(env_dim)
    lam = np.asarray(lam, dtype=float)
    u = lam - lam * lam
    val = np.exp(_log_pdf_norm(env_dim)) * np.power(u, env_dim - 2) * (2 * lam - 1) ** 2
    return val if val.ndim else float(val)


def eig_cdf_trace(env_dim: int, lam):
    """Cumulative distribution of :func:`eig_pdf_trace`.

    Uses ``(2 lam - 1)^2 = 1 - 4 lam (1 - lam)`` to write the density as a
    difference of two symmetric Beta densities.
    """
    _check_env_dim(env_dim)
    k = env_dim
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, 1.0)
    log_c = _log_pdf_norm(k)
    a = np.exp(log_c + betaln(k - 1, k - 1)) * betainc(k - 1, k - 1, lam)
    b = 4.0 * np.exp(log_c + betaln(k, k)) * betainc(k, k, lam)
    out = a - b
    return out if out.ndim else float(out)
