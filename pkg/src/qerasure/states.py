"""Pure qubit+environment states and the operators derived from them.

A state lives on H_A (x) H_B (x) H_C with ``d_A = 2``. Amplitudes are stored
flat in (a, b, c) order with ``c`` varying fastest, so ``amps.reshape(2, d_B,
d_C)[a, b, c]`` is the coefficient of ``|a, b, c>``. B is the accessible part
of the environment, C the inaccessible part; ``d_C = 1`` is allowed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import EmptyKeepSet, InvalidState, NegligibleProbability, NotPsd, WrongDimension
from .linalg import check_hermitian, max_abs

NORM_TOL = 1e-10
P_FLOOR = 1e-14

SUBSYSTEMS = ("A", "B", "C")


@dataclass(frozen=True, eq=False)
class TripartitePureState:
    """Normalized pure state of qubit A and environment B (x) C.

    Attributes:
        dims: ``(2, d_B, d_C)``.
        amps: complex amplitudes, length ``2 * d_B * d_C``, c-fastest.
    """

    dims: tuple[int, int, int]
    amps: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or dims[0] != 2 or min(dims) < 1:
            raise InvalidState(f"dims must be (2, d_B >= 1, d_C >= 1), got {self.dims}")
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != dims[0] * dims[1] * dims[2]:
            raise InvalidState(f"{amps.size} amplitudes do not match dims {dims}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidState(f"state norm^2 = {norm2!r} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_tensor(cls, psi, normalize: bool = False) -> "TripartitePureState":
        """Build from a ``(2, d_B, d_C)`` amplitude array."""
        psi = np.asarray(psi, dtype=complex)
        if psi.ndim != 3:
            raise InvalidState(f"expected a 3-index tensor, got shape {psi.shape}")
        if normalize:
            psi = psi / np.linalg.norm(psi)
        return cls(psi.shape, psi.reshape(-1))

    @property
    def d_B(self) -> int:
        return self.dims[1]

    @property
    def d_C(self) -> int:
        return self.dims[2]

    @property
    def tensor(self) -> np.ndarray:
        """Amplitudes as a read-only ``(2, d_B, d_C)`` view."""
        return self.amps.reshape(self.dims)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())


class ConditionalBlocks(NamedTuple):
    """Unnormalized conditional operators of B and C given the qubit's basis state.

    ``rho_B0``/``rho_B1`` are the diagonal blocks of the AB state, ``chi_B``
    its upper off-diagonal block, ``rho_C0``/``rho_C1`` the C-side
    counterparts. Each ``rho_*k`` has trace ``p_k``.
    """

    rho_B0: np.ndarray
    rho_B1: np.ndarray
    chi_B: np.ndarray
    rho_C0: np.ndarray
    rho_C1: np.ndarray
    p0: float
    p1: float

    def rho_AB(self) -> np.ndarray:
        """Reassemble the AB density matrix from its blocks."""
        return np.block([[self.rho_B0, self.chi_B], [self.chi_B.conj().T, self.rho_B1]])


class BlochVector(NamedTuple):
    x: float
    y: float
    z: float

    def norm(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))


def check_density(rho, unnormalized: bool = False, tol: float = 1e-10) -> np.ndarray:
    """Validate a density matrix (Hermitian, PSD, unit trace unless ``unnormalized``)."""
    rho = check_hermitian(rho, tol)
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    scale = max(max_abs(rho), 1.0) if not unnormalized else max_abs(rho)
    if w.size and w.min() < -tol * scale:
        raise NotPsd(f"minimum eigenvalue {w.min():.3e} is negative")
    if not unnormalized and abs(np.trace(rho).real - 1.0) > tol:
        raise InvalidState(f"trace {np.trace(rho).real!r} is not 1")
    return rho


def _normalize_keep(keep) -> tuple[str, ...]:
    if isinstance(keep, str):
        keep = tuple(keep)
    keep = set(k.upper() for k in keep)
    if not keep:
        raise EmptyKeepSet("keep set is empty")
    unknown = keep - set(SUBSYSTEMS)
    if unknown:
        raise ValueError(f"unknown subsystems {sorted(unknown)}")
    return tuple(s for s in SUBSYSTEMS if s in keep)


def partial_trace(state: TripartitePureState, keep: Iterable[str] | str) -> np.ndarray:
    """Reduced density matrix on the subsystems in ``keep`` (e.g. ``"AB"``).

    Kept subsystems are ordered A, B, C regardless of how ``keep`` is given.
    """
    kept = _normalize_keep(keep)
    psi = state.tensor
    ket = "abc"
    bra = "".join(ch.upper() if s in kept else ch for ch, s in zip(ket, SUBSYSTEMS))
    out_ket = "".join(ch for ch, s in zip(ket, SUBSYSTEMS) if s in kept)
    out = out_ket + out_ket.upper()
    rho = np.einsum(f"{ket},{bra}->{out}", psi, psi.conj())
    dim = int(np.prod([state.dims[SUBSYSTEMS.index(s)] for s in kept]))
    return rho.reshape(dim, dim)


def conditional_blocks(state: TripartitePureState) -> ConditionalBlocks:
    psi = state.tensor
    m0, m1 = psi[0], psi[1]
    rho_B0 = m0 @ m0.conj().T
    rho_B1 = m1 @ m1.conj().T
    chi_B = m0 @ m1.conj().T
    rho_C0 = m0.T @ m0.conj()
    rho_C1 = m1.T @ m1.conj()
    p0 = float(np.vdot(m0, m0).real)
    p1 = float(np.vdot(m1, m1).real)
    return ConditionalBlocks(rho_B0, rho_B1, chi_B, rho_C0, rho_C1, p0, p1)


def bloch(rho) -> BlochVector:
    """Bloch vector with ``rho = (1 + x sx + y sy + z sz) / 2``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise WrongDimension(f"Bloch vector needs a 2x2 matrix, got {rho.shape}")
    off = rho[0, 1]
    return BlochVector(2.0 * off.real, -2.0 * off.imag, float((rho[0, 0] - rho[1, 1]).real))


def visibility(rho) -> float:
    r = bloch(rho)
    return float(np.hypot(r.x, r.y))


def predictability(rho) -> float:
    return abs(bloch(rho).z)


def qubit_density(bloch_vector) -> np.ndarray:
    x, y, z = bloch_vector
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def conditional_qubit(
    state: TripartitePureState, pom_element, p_floor: float = P_FLOOR, tol: float = 1e-10
) -> tuple[np.ndarray, float]:
    """Normalized qubit state and probability for one outcome measured on B.

    ``pom_element`` acts on H_B and is extended as ``pi (x) 1_C``.

    Raises:
        NegligibleProbability: when the outcome probability is at or below
            ``p_floor``; the probability is attached to the exception.
    """
    pi = check_hermitian(pom_element, tol)
    if pi.shape != (state.d_B, state.d_B):
        raise WrongDimension(f"element shape {pi.shape} does not act on d_B = {state.d_B}")
    w = np.linalg.eigvalsh(0.5 * (pi + pi.conj().T))
    if w.min() < -tol or w.max() > 1.0 + tol:
        raise NotPsd("POM element must satisfy 0 <= pi <= 1")
    psi = state.tensor
    rho_k = np.einsum("bd,adc,ebc->ae", pi, psi, psi.conj())
    p = float(np.trace(rho_k).real)
    if p <= p_floor:
        raise NegligibleProbability(p, p_floor)
    return rho_k / p, p


def selective_projection(
    state: TripartitePureState, env_vector, p_floor: float = P_FLOOR
) -> tuple[np.ndarray, float]:
    """Project the environment onto ``env_vector`` and return the qubit outcome.

    Returns the normalized qubit amplitudes and the success probability.
    """
    e = np.asarray(env_vector, dtype=complex).reshape(-1)
    if e.size != state.d_B * state.d_C:
        raise WrongDimension(f"env vector has {e.size} entries, expected {state.d_B * state.d_C}")
    if abs(np.vdot(e, e).real - 1.0) > NORM_TOL:
        raise InvalidState("env vector is not normalized")
    v = state.tensor.reshape(2, -1) @ e.conj()
    p_s = float(np.vdot(v, v).real)
    if p_s <= p_floor:
        raise NegligibleProbability(p_s, p_floor)
    return v / np.sqrt(p_s), min(p_s, 1.0)


def schmidt_coefficients(state: TripartitePureState) -> np.ndarray:
    """Schmidt coefficients across the A : BC cut (descending, two entries)."""
    return np.linalg.svd(state.tensor.reshape(2, -1), compute_uv=False)


# Reference states used by tests, the CLI corpus and the docs.


def basis_state(dims, a: int, b: int, c: int) -> TripartitePureState:
    psi = np.zeros(dims, dtype=complex)
    psi[a, b, c] = 1.0
    return TripartitePureState.from_tensor(psi)


def bell_ab(d_B: int = 2, d_C: int = 1) -> TripartitePureState:
    """(|00> + |11>)/sqrt2 on AB with C in |0>; extra levels left empty."""
    psi = np.zeros((2, d_B, d_C), dtype=complex)
    psi[0, 0, 0] = psi[1, 1, 0] = 1 / np.sqrt(2)
    return TripartitePureState.from_tensor(psi)


def ghz(d_B: int = 2, d_C: int = 2) -> TripartitePureState:
    """(|000> + |111>)/sqrt2."""
    psi = np.zeros((2, d_B, d_C), dtype=complex)
    psi[0, 0, 0] = psi[1, 1, 1] = 1 / np.sqrt(2)
    return TripartitePureState.from_tensor(psi)


def product_state(qubit, env) -> TripartitePureState:
    """``qubit (x) env`` where ``env`` is a ``(d_B, d_C)`` array of amplitudes."""
    qubit = np.asarray(qubit, dtype=complex)
    env = np.asarray(env, dtype=complex)
    if env.ndim == 1:
        env = env.reshape(-1, 1)
    return TripartitePureState.from_tensor(
        np.einsum("a,bc->abc", qubit / np.linalg.norm(qubit), env / np.linalg.norm(env))
    )


def embed(state: TripartitePureState, d_B: int, d_C: int) -> TripartitePureState:
    """Zero-pad a state into larger B and C spaces."""
    if d_B < state.d_B or d_C < state.d_C:
        raise WrongDimension("embedding target must not be smaller")
    psi = np.zeros((2, d_B, d_C), dtype=complex)
    psi[:, : state.d_B, : state.d_C] = state.tensor
    return TripartitePureState.from_tensor(psi)
