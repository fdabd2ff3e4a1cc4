"""Average visibility/predictability, sub-fidelity, and the optimal bounds.

``C_AB`` is the largest average visibility of qubit A that any measurement
on B alone can produce; ``D_AB`` is the largest average predictability.
Both are trace norms of blocks of the AB state. For ``d_B = 2`` the erasure
bound reduces to the sub-fidelity of the C-side conditional states; for
``d_B = 3`` it is the root of a nested radical.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidPom, WrongAccessibleDimension
from .linalg import (
    check_hermitian,
    clamp_nonneg,
    matrix_sqrt_psd,
    trace_norm,
    trace_norm_newton_3,
)
from .states import TripartitePureState, conditional_blocks, partial_trace, predictability, visibility

POM_TOL = 1e-10
# Tr(xy)^2 - Tr(xyxy) is a difference of nearly equal numbers; below this
# multiple of Tr(xy) * sqrt(Tr(x^2) Tr(y^2)) it is rounding noise (a rank-1
# argument gives exactly 0)
SUBFID_DISC_FLOOR = 16 * np.finfo(float).eps


class Pom:
    """Finite measurement on H_B: PSD elements summing to the identity."""

    def __init__(self, elements: Sequence, tol: float = POM_TOL):
        elems = [np.array(e, dtype=complex) for e in elements]
        if not elems:
            raise InvalidPom("a POM needs at least one element")
        d = elems[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for e in elems:
            if e.shape != (d, d):
                raise InvalidPom(f"element shape {e.shape} differs from ({d}, {d})")
            if np.max(np.abs(e - e.conj().T)) > tol:
                raise InvalidPom("POM element is not Hermitian")
            if np.linalg.eigvalsh(0.5 * (e + e.conj().T)).min() < -tol:
                raise InvalidPom("POM element is not positive semidefinite")
            total += e
        if np.max(np.abs(total - np.eye(d))) > tol:
            raise InvalidPom("POM elements do not sum to the identity")
        self.elements = tuple(elems)
        self.dim = d

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @classmethod
    def projective(cls, basis) -> "Pom":
        """Rank-1 projectors onto the columns of a unitary matrix."""
        basis = np.asarray(basis, dtype=complex)
        return cls([np.outer(basis[:, k], basis[:, k].conj()) for k in range(basis.shape[1])])

    @classmethod
    def trivial(cls, d: int) -> "Pom":
        return cls([np.eye(d)])


def _check_pom(state: TripartitePureState, pom) -> Pom:
    if not isinstance(pom, Pom):
        pom = Pom(pom)
    if pom.dim != state.d_B:
        raise InvalidPom(f"POM acts on dimension {pom.dim}, but d_B = {state.d_B}")
    return pom


def avg_visibility(state: TripartitePureState, pom) -> float:
    """Probability-weighted mean visibility of the conditional qubit states."""
    pom = _check_pom(state, pom)
    # Tr[((sx + i sy) (x) pi (x) 1) rho] = 2 Tr(pi chi^dagger)
    chi_dag = conditional_blocks(state).chi_B.conj().T
    return float(sum(2.0 * abs(np.trace(p @ chi_dag)) for p in pom))


def avg_predictability(state: TripartitePureState, pom) -> float:
    """Probability-weighted mean predictability of the conditional qubit states."""
    pom = _check_pom(state, pom)
    blocks = conditional_blocks(state)
    diff = blocks.rho_B0 - blocks.rho_B1
    return float(sum(abs(np.trace(p @ diff)) for p in pom))


def _pair(x, y):
    x = check_hermitian(x)
    y = check_hermitian(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} differ")
    return x, y


def sub_fidelity(x, y) -> float:
    """``Tr(xy) + sqrt2 * sqrt(Tr(xy)^2 - Tr(xyxy))``.

    Unnormalized arguments are accepted; the result is bilinear in the two
    arguments' scale.
    """
    x, y = _pair(x, y)
    xy = x @ y
    t = np.trace(xy).real
    t2 = np.trace(xy @ xy).real
    disc = t * t - t2
    scale = abs(t) * np.sqrt(abs(np.trace(x @ x).real * np.trace(y @ y).real))
    if abs(disc) <= SUBFID_DISC_FLOOR * scale:
        disc = 0.0
    return float(t + np.sqrt(2.0) * np.sqrt(clamp_nonneg(disc, "subfidelity")))


def uhlmann_fidelity(x, y) -> float:
    """``Tr sqrt(sqrt(x) y sqrt(x))``, the unsquared Uhlmann fidelity."""
    x, y = _pair(x, y)
    rx = matrix_sqrt_psd(x)
    inner = rx @ y @ rx
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    # eigenvalues at rounding level would contribute spurious square roots
    w = np.where(w > SUBFID_DISC_FLOOR * max(w.max(initial=0.0), 0.0), w, 0.0)
    return float(np.sqrt(w).sum())


def coherence_bound(state: TripartitePureState) -> float:
    """Erasure bound ``C_AB = 2 Tr|chi_B|`` for any ``d_B``."""
    return 2.0 * trace_norm(conditional_blocks(state).chi_B)


def coherence_bound_subfidelity(state: TripartitePureState) -> float:
    """Erasure bound for a qubit-sized B from the sub-fidelity of the C states."""
    if state.d_B != 2:
        raise WrongAccessibleDimension(f"sub-fidelity route needs d_B = 2, got {state.d_B}")
    blocks = conditional_blocks(state)
    e = sub_fidelity(blocks.rho_C0, blocks.rho_C1)
    return 2.0 * np.sqrt(clamp_nonneg(e, "E"))


def coherence_bound_dim3(state: TripartitePureState) -> float:
    """Erasure bound for a qutrit-sized B from the nested-radical fixed point."""
    if state.d_B != 3:
        raise WrongAccessibleDimension(f"nested-radical route needs d_B = 3, got {state.d_B}")
    return 2.0 * trace_norm_newton_3(conditional_blocks(state).chi_B)


def distinguishability_bound(state: TripartitePureState) -> float:
    """Which-alternative bound ``D_AB = Tr|rho_B0 - rho_B1|``."""
    blocks = conditional_blocks(state)
    return trace_norm(blocks.rho_B0 - blocks.rho_B1)


def distinguishability_bound_piecewise(state: TripartitePureState) -> float:
    """``D_AB`` for ``d_B = 2`` from traces of ``x = rho_B0 - rho_B1`` only.

    ``D^2 = 2 Tr(x^2) - Tr(x)^2`` when ``Tr(x^2) >= Tr(x)^2`` (eigenvalues of
    opposite sign), else ``Tr(x)^2``. The two branches meet at equality.
    """
    if state.d_B != 2:
        raise WrongAccessibleDimension(f"piecewise form needs d_B = 2, got {state.d_B}")
    blocks = conditional_blocks(state)
    x = blocks.rho_B0 - blocks.rho_B1
    t1 = np.trace(x).real
    t2 = np.trace(x @ x).real
    d2 = 2.0 * t2 - t1 * t1 if t2 >= t1 * t1 else t1 * t1
    return float(np.sqrt(clamp_nonneg(d2, "D^2")))


def _whole_environment(state: TripartitePureState) -> TripartitePureState:
    return TripartitePureState((2, state.d_B * state.d_C, 1), state.amps)


ROUTES = {2: ("subfidelity", coherence_bound_subfidelity), 3: ("nested-radical", coherence_bound_dim3)}


@dataclass(frozen=True)
class BoundReport:
    """Visibility/predictability with their B-only and whole-environment bounds.

    Values are clamped to [0, 1]; ``route_crosscheck_delta`` is the raw
    difference between the dimension-specific route and the general one.
    """

    V: float
    P: float
    C_AB: float
    D_AB: float
    C_full: float
    D_full: float
    route_used: str = "trace-norm"
    route_crosscheck_delta: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _clip01(v: float) -> float:
    return float(min(max(v, 0.0), 1.0))


def full_bounds(state: TripartitePureState) -> BoundReport:
    rho_A = partial_trace(state, "A")
    general = coherence_bound(state)
    route, delta = "trace-norm", 0.0
    if state.d_B in ROUTES:
        route, fn = ROUTES[state.d_B]
        delta = abs(fn(state) - general)
    whole = _whole_environment(state)
    return BoundReport(
        V=_clip01(visibility(rho_A)),
        P=_clip01(predictability(rho_A)),
        C_AB=_clip01(general),
        D_AB=_clip01(distinguishability_bound(state)),
        C_full=_clip01(coherence_bound(whole)),
        D_full=_clip01(distinguishability_bound(whole)),
        route_used=route,
        route_crosscheck_delta=float(delta),
    )
