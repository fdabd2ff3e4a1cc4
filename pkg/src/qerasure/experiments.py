"""Analytic averages and Monte Carlo sweeps over the inaccessible dimension.

Two conventions for the environment size appear here. ``dC`` is the
dimension of the inaccessible part C when B is a qubit; ``env_dim`` is the
total dimension traced away from qubit A, so ``env_dim = 2 * dC``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bounds import coherence_bound_subfidelity
from .errors import InsufficientPoints, NoConvergence
from .sampling import SeededStream, as_generator, ginibre, haar_pure, induced_density
from .states import TripartitePureState

CSV_COLUMNS = ("dC", "env_dim", "mean_C", "stderr", "band_low", "band_high", "n", "avg_V_analytic")

# Fixed chunk size keeps draws identical however the work is scheduled.
CHUNK = 4096


def avg_visibility_analytic(env_dim: int) -> float:
    """Mean visibility of a qubit traced out of a random pure state.

    ``pi / 4^K * Gamma(2K) / (K Gamma(K)^2)`` with ``K = env_dim``, evaluated
    in log space.
    """
    k = int(env_dim)
    if k < 1:
        raise ValueError(f"env_dim must be >= 1, got {env_dim}")
    log_v = math.fsum(
        [math.log(math.pi), -k * math.log(4.0), math.lgamma(2 * k), -math.log(k), -2.0 * math.lgamma(k)]
    )
    return math.exp(log_v)


def avg_coherence_k1_analytic() -> float:
    """Mean erasure bound for a random two-qubit state (no inaccessible part)."""
    return 9.0 * math.pi / 32.0


@dataclass(frozen=True)
class PointRecord:
    dC: int
    env_dim: int
    mean_C: float
    stderr: float
    band_low: float
    band_high: float
    n: int
    avg_V_analytic: float
    converged: bool = True


@dataclass(frozen=True)
class StatRecord:
    """Summary of a sampled scalar: mean, standard error and a percentile band."""

    mean: float
    stderr: float
    band_low: float
    band_high: float
    n: int


def summarize(values: np.ndarray, band=(0.25, 0.75)) -> StatRecord:
    values = np.asarray(values, dtype=float)
    n = values.size
    lo, hi = np.quantile(values, band)
    sd = values.std(ddof=1) if n > 1 else 0.0
    return StatRecord(float(values.mean()), float(sd / math.sqrt(n)), float(lo), float(hi), n)


def _chunks(total: int):
    done = 0
    while done < total:
        step = min(CHUNK, total - done)
        yield step
        done += step


def sample_coherence_fast(dC: int, samples: int, stream) -> np.ndarray:
    """Erasure-bound samples for random ``(2, 2, dC)`` states, batched.

    The C-side conditional states are ``rho_Ck = A_k^T A_k^*`` where the
    ``A_k`` are the two ``2 x dC`` halves of a normalized ``4 x dC`` Ginibre
    matrix. The sub-fidelity traces are taken through the 2x2 Gram matrix
    ``G = A_0 A_1^dagger``, using cyclicity:
    ``Tr(xy) = Tr(G G^dagger)`` and ``Tr(xyxy) = Tr((G G^dagger)^2)``.
    """
    rng = as_generator(stream)
    out = np.empty(samples)
    pos = 0
    for step in _chunks(samples):
        mu = ginibre(4, dC, rng, step).reshape(step, 2, 2, dC)
        mu /= np.sqrt(np.sum(np.abs(mu) ** 2, axis=(1, 2, 3)))[:, None, None, None]
        g = mu[:, 0] @ np.conj(np.swapaxes(mu[:, 1], -1, -2))
        ggd = g @ np.conj(np.swapaxes(g, -1, -2))
        t1 = np.trace(ggd, axis1=-2, axis2=-1).real
        t2 = np.trace(ggd @ ggd, axis1=-2, axis2=-1).real
        e = t1 + math.sqrt(2.0) * np.sqrt(np.clip(t1 * t1 - t2, 0.0, None))
        out[pos : pos + step] = 2.0 * np.sqrt(e)
        pos += step
    return out


def sample_coherence_tripartite(dC: int, samples: int, stream, state_factory=None) -> np.ndarray:
    """Erasure-bound samples via full tripartite states, one at a time.

    ``state_factory(rng)`` overrides the random state (used to pin inputs in
    tests).
    """
    rng = as_generator(stream)
    vals = np.empty(samples)
    for i in range(samples):
        if state_factory is None:
            state = TripartitePureState((2, 2, dC), haar_pure(4 * dC, rng))
        else:
            state = state_factory(rng)
        vals[i] = coherence_bound_subfidelity(state)
    return vals


def mc_avg_coherence(
    dC: int, samples: int, stream, band=(0.25, 0.75), path: str = "fast", state_factory=None
) -> PointRecord:
    """Monte Carlo mean of the erasure bound over random ``(2, 2, dC)`` states."""
    if dC < 1:
        raise ValueError(f"dC must be >= 1, got {dC}")
    if path == "fast" and state_factory is None:
        vals = sample_coherence_fast(dC, samples, stream)
    elif path in ("fast", "tripartite"):
        vals = sample_coherence_tripartite(dC, samples, stream, state_factory)
    else:
        raise ValueError(f"unknown sampling path {path!r}")
    s = summarize(vals, band)
    return PointRecord(
        dC=dC,
        env_dim=2 * dC,
        mean_C=s.mean,
        stderr=s.stderr,
        band_low=s.band_low,
        band_high=s.band_high,
        n=s.n,
        avg_V_analytic=avg_visibility_analytic(2 * dC),
    )


def sample_visibility(env_dim: int, samples: int, stream) -> np.ndarray:
    rng = as_generator(stream)
    parts = [2.0 * np.abs(induced_density(2, env_dim, rng, step)[:, 0, 1]) for step in _chunks(samples)]
    return np.concatenate(parts)


def mc_avg_visibility(env_dim: int, samples: int, stream, band=(0.25, 0.75)) -> StatRecord:
    """Monte Carlo mean visibility of a qubit traced out of ``env_dim`` dimensions."""
    if env_dim < 1:
        raise ValueError(f"env_dim must be >= 1, got {env_dim}")
    return summarize(sample_visibility(env_dim, samples, stream), band)


@dataclass(frozen=True)
class SweepConfig:
    dC_values: tuple[int, ...]
    samples_per_point: int = 10_000
    master_seed: int = 0
    percentile_band: tuple[float, float] = (0.25, 0.75)

    def __post_init__(self):
        dcs = tuple(int(d) for d in self.dC_values)
        if not dcs:
            raise ValueError("dC_values is empty")
        if any(d < 1 for d in dcs) or any(b <= a for a, b in zip(dcs, dcs[1:])):
            raise ValueError("dC_values must be positive and strictly increasing")
        if self.samples_per_point < 100:
            raise ValueError("samples_per_point must be >= 100")
        lo, hi = self.percentile_band
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"invalid percentile band {self.percentile_band}")
        object.__setattr__(self, "dC_values", dcs)
        object.__setattr__(self, "percentile_band", (float(lo), float(hi)))


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    points: tuple[PointRecord, ...]

    @property
    def failed(self) -> bool:
        return not all(p.converged for p in self.points)

    def to_dict(self) -> dict:
        return {"config": asdict(self.config), "points": [asdict(p) for p in self.points]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in self.points:
            w.writerow([_fmt(getattr(p, c)) for c in CSV_COLUMNS])
        return buf.getvalue()


def _fmt(v) -> str:
    # repr round-trips doubles exactly
    return repr(float(v)) if isinstance(v, float) else str(v)


def read_sweep_csv(text: str) -> list[dict]:
    """Parse sweep CSV text; the header must match :data:`CSV_COLUMNS` exactly."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(h.strip() for h in rows[0]) != CSV_COLUMNS:
        raise ValueError(f"CSV header must be {','.join(CSV_COLUMNS)}")
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ValueError(f"line {i}: expected {len(CSV_COLUMNS)} fields")
        rec = dict(zip(CSV_COLUMNS, row))
        out.append(
            {k: (int(v) if k in ("dC", "env_dim", "n") else float(v)) for k, v in rec.items()}
        )
    return out


def sweep(config: SweepConfig, threads: int = 1, progress: Callable[[str], None] | None = None) -> SweepResult:
    """Run ``mc_avg_coherence`` at every ``dC``; point ``i`` uses stream index ``i``.

    A point whose evaluation fails to converge is kept with NaN statistics and
    ``converged=False``; the rest of the sweep still runs.
    """
    root = SeededStream(config.master_seed)

    def run(item):
        idx, dc = item
        try:
            rec = mc_avg_coherence(dc, config.samples_per_point, root.child(idx), config.percentile_band)
        except NoConvergence:
            nan = float("nan")
            rec = PointRecord(dc, 2 * dc, nan, nan, nan, nan, 0, avg_visibility_analytic(2 * dc), False)
        if progress:
            progress(f"dC={dc}: mean_C={rec.mean_C:.6f} +/- {rec.stderr:.2e}")
        return rec

    items = list(enumerate(config.dC_values))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(run, items))
    else:
        points = [run(it) for it in items]
    return SweepResult(config, tuple(points))


@dataclass(frozen=True)
class FitResult:
    """Proportional fit ``mean_C ~ c * <V>(2 dC)``.

    ``k_range`` is the (min, max) inaccessible dimension dC covered.
    """

    c_hat: float
    c_stderr: float
    residuals: tuple[float, ...]
    k_range: tuple[int, int]
    intercept: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def fit_through_origin(x, y, stderr) -> tuple[float, float, np.ndarray]:
    """Weighted least squares for ``y = c x``; weights are ``1 / stderr^2``.

    Returns ``(c, stderr_of_c, residuals)``.
    """
    x, y, s = (np.asarray(v, dtype=float) for v in (x, y, stderr))
    if x.size < 3:
        raise InsufficientPoints(f"need at least 3 points, got {x.size}")
    if np.any(s <= 0):
        raise ValueError("stderr values must be positive")
    w = 1.0 / s**2
    sxx = np.sum(w * x * x)
    c = float(np.sum(w * x * y) / sxx)
    return c, float(1.0 / math.sqrt(sxx)), y - c * x


def fit_affine(x, y, stderr) -> tuple[float, float]:
    """Weighted ``y = a x + b``; diagnostics only. Returns ``(a, b)``."""
    x, y, s = (np.asarray(v, dtype=float) for v in (x, y, stderr))
    sw = 1.0 / s
    a, b = np.linalg.lstsq(np.column_stack([x * sw, sw]), y * sw, rcond=None)[0]
    return float(a), float(b)


def fit_points(points: Sequence, affine: bool = False) -> FitResult:
    """Fit proportionality from point records (objects or dicts with dC/mean_C/stderr)."""
    get = (lambda p, k: p[k]) if points and isinstance(points[0], dict) else getattr
    dcs = [int(get(p, "dC")) for p in points]
    x = [avg_visibility_analytic(2 * d) for d in dcs]
    y = [get(p, "mean_C") for p in points]
    s = [get(p, "stderr") for p in points]
    c, c_err, res = fit_through_origin(x, y, s)
    intercept = fit_affine(x, y, s)[1] if affine else None
    return FitResult(c, c_err, tuple(float(r) for r in res), (min(dcs), max(dcs)), intercept)


def fit_constant_c(
    config: SweepConfig, runner: Callable[[int, int, SeededStream], PointRecord] | None = None, threads: int = 1
) -> FitResult:
    """Estimate the asymptotic ratio between mean erasure bound and mean visibility.

    ``runner(dC, samples, stream)`` replaces the Monte Carlo point estimate.
    """
    if len(config.dC_values) < 3:
        raise InsufficientPoints(f"need at least 3 points, got {len(config.dC_values)}")
    if min(config.dC_values) < 10:
        raise ValueError("asymptotic fit needs every dC >= 10")
    if runner is None:
        points = sweep(config, threads=threads).points
    else:
        root = SeededStream(config.master_seed)
        points = [runner(d, config.samples_per_point, root.child(i)) for i, d in enumerate(config.dC_values)]
    return fit_points(points)
