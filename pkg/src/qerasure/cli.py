"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 unreadable/malformed input,
3 invariant violation, 4 numerical non-convergence, 5 insufficient data.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import bounds, experiments, oracle, sampling, states
from .errors import DimensionMismatch, ErasureError, InsufficientPoints, NotPsd

log = logging.getLogger("qerasure")

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_INVARIANT, EXIT_NOCONV, EXIT_DATA = 0, 1, 2, 3, 4, 5

NORM_STRICT = 1e-8
NORM_LENIENT = 1e-4
SLACK = 1e-9


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _complex_list(raw, what: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"{what}: entries must be [re, im] pairs") from exc
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise CliError(EXIT_PARSE, f"{what}: entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{path}: invalid JSON: {exc}") from exc


def load_state(path: str) -> states.TripartitePureState:
    """Read a state file ``{"dims": [2, dB, dC], "amps": [[re, im], ...]}``.

    Amplitudes are c-fastest. A norm off by at most 1e-4 is renormalized with
    a warning; anything further is rejected.
    """
    data = _load_json(path)
    if not isinstance(data, dict) or "dims" not in data or "amps" not in data:
        raise CliError(EXIT_PARSE, f"{path}: expected keys 'dims' and 'amps'")
    try:
        dims = [int(d) for d in data["dims"]]
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"{path}: dims must be integers") from exc
    amps = _complex_list(data["amps"], path)
    if len(dims) != 3 or dims[0] != 2 or min(dims) < 1:
        raise CliError(EXIT_PARSE, f"{path}: dims must be [2, d_B, d_C]")
    if amps.ndim != 1 or amps.size != dims[0] * dims[1] * dims[2]:
        raise CliError(EXIT_PARSE, f"{path}: {amps.size} amplitudes do not match dims {dims}")
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > NORM_LENIENT:
        raise CliError(EXIT_INVARIANT, f"{path}: invariant 'unit norm' violated (norm = {norm!r})")
    if abs(norm - 1.0) > NORM_STRICT:
        log.warning("%s: norm %r renormalized", path, norm)
    return states.TripartitePureState(tuple(dims), amps / norm)


def load_density(path: str) -> np.ndarray:
    """Read ``{"mat": [[[re, im], ...], ...]}`` (an optional ``dim`` is checked)."""
    data = _load_json(path)
    if not isinstance(data, dict) or "mat" not in data:
        raise CliError(EXIT_PARSE, f"{path}: expected key 'mat'")
    mat = _complex_list(data["mat"], path)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise CliError(EXIT_PARSE, f"{path}: 'mat' must be a square matrix")
    if "dim" in data and int(data["dim"]) != mat.shape[0]:
        raise CliError(EXIT_PARSE, f"{path}: 'dim' disagrees with 'mat'")
    return mat


def state_to_json(state: states.TripartitePureState) -> dict:
    return {"dims": list(state.dims), "amps": [[a.real, a.imag] for a in state.amps]}


def _emit(obj, out=None) -> None:
    text = json.dumps(obj, indent=2)
    (out or sys.stdout).write(text + "\n")


def _hierarchy_violations(r: bounds.BoundReport) -> list[str]:
    checks = {
        "V <= C_AB": r.V <= r.C_AB + SLACK,
        "C_AB <= C_full": r.C_AB <= r.C_full + SLACK,
        "P <= D_AB": r.P <= r.D_AB + SLACK,
        "D_AB <= D_full": r.D_AB <= r.D_full + SLACK,
        "route agreement": r.route_crosscheck_delta <= 1e-8,
    }
    return [name for name, ok in checks.items() if not ok]


def cmd_bound(args) -> int:
    state = load_state(args.state_file)
    report = bounds.full_bounds(state)
    bad = _hierarchy_violations(report)
    if bad:
        raise CliError(EXIT_INVARIANT, f"invariant violated: {', '.join(bad)}")
    _emit(report.to_dict())
    return EXIT_OK


def cmd_subfidelity(args) -> int:
    x, y = load_density(args.file_x), load_density(args.file_y)
    if x.shape != y.shape:
        raise CliError(EXIT_INVARIANT, f"dimension mismatch: {x.shape} vs {y.shape}")
    x, y = states.check_density(x), states.check_density(y)
    e = bounds.sub_fidelity(x, y)
    f = bounds.uhlmann_fidelity(x, y)
    if e > f * f + SLACK:
        raise CliError(EXIT_INVARIANT, f"invariant 'E <= F^2' violated: E={e!r}, F^2={f * f!r}")
    _emit({"E": e, "F": f, "F_squared": f * f})
    return EXIT_OK


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ERASURE_SEED")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise CliError(EXIT_PARSE, f"ERASURE_SEED={env!r} is not an integer") from exc
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from exc


def cmd_sweep(args) -> int:
    try:
        config = experiments.SweepConfig(
            tuple(args.dc_list), args.samples, _seed(args), (args.band_low, args.band_high)
        )
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    progress = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    result = experiments.sweep(config, threads=args.threads, progress=progress)
    text = result.to_csv() if args.out == "csv" else result.to_json() + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if result.failed:
        print("non-convergence in at least one point", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        if args.sweep_csv == "-":
            text = sys.stdin.read()
        else:
            with open(args.sweep_csv) as fh:
                text = fh.read()
        rows = experiments.read_sweep_csv(text)
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {args.sweep_csv}: {exc}") from exc
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"malformed sweep CSV: {exc}") from exc
    try:
        fit = experiments.fit_points(rows, affine=args.affine)
    except InsufficientPoints as exc:
        raise CliError(EXIT_DATA, str(exc)) from exc
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    out = {"c_hat": fit.c_hat, "c_stderr": fit.c_stderr, "residuals": list(fit.residuals)}
    out["k_range"] = list(fit.k_range)
    if fit.intercept is not None:
        out["intercept"] = fit.intercept
    _emit(out)
    return EXIT_OK


def builtin_corpus() -> dict[str, tuple[states.TripartitePureState, dict]]:
    """Hand-solved states and their expected bound values."""
    plus = np.array([1, 1]) / math.sqrt(2)
    env = np.array([[0.6, 0.0], [0.0, 0.8j]])
    return {
        "bell_ab": (states.bell_ab(), {"C_AB": 1.0, "D_AB": 1.0, "C_full": 1.0, "V": 0.0}),
        "ghz": (states.ghz(), {"C_AB": 0.0, "D_AB": 1.0, "C_full": 1.0, "D_full": 1.0}),
        "product_plus": (states.product_state(plus, env), {"V": 1.0, "P": 0.0, "C_AB": 1.0, "D_AB": 0.0}),
        "product_zero": (states.product_state([1, 0], env), {"V": 0.0, "P": 1.0, "C_AB": 0.0, "D_AB": 1.0}),
        "bell_in_qutrit": (states.bell_ab(3, 1), {"C_AB": 1.0, "D_AB": 1.0}),
        "ghz_in_qutrit": (states.ghz(3, 2), {"C_AB": 0.0, "D_AB": 1.0}),
        "bell_padded": (states.embed(states.bell_ab(), 2, 3), {"C_AB": 1.0, "D_AB": 1.0}),
    }


def run_builtin() -> tuple[int, float, float, list[str]]:
    failures, checks, max_delta, max_gap = [], 0, 0.0, 0.0
    for name, (state, expected) in builtin_corpus().items():
        rep = bounds.full_bounds(state).to_dict()
        for key, want in expected.items():
            checks += 1
            if abs(rep[key] - want) > 1e-12:
                failures.append(f"{name}: {key} = {rep[key]!r}, expected {want!r}")
        checks += 1
        max_delta = max(max_delta, rep["route_crosscheck_delta"])
        for v in _hierarchy_violations(bounds.BoundReport(**rep)):
            failures.append(f"{name}: {v}")
        if state.d_B in (2, 3):
            checks += 1
            tr = oracle.optimize_erasure_projective(state, stream=sampling.SeededStream(0))
            gap = bounds.coherence_bound(state) - tr.best_value
            max_gap = max(max_gap, gap)
            if gap > 1e-4 or gap < -SLACK:
                failures.append(f"{name}: erasure attainment gap {gap!r}")
    ghz = bounds.full_bounds(states.ghz())
    checks += 1
    if not ghz.C_full**2 + ghz.D_full**2 > 1.0:
        failures.append("ghz: expected C_full^2 + D_full^2 > 1 witness")
    return checks, max_delta, max_gap, failures


def run_random(n: int, seed: int, attain_n: int) -> tuple[int, dict, float, list[str]]:
    """Route agreement on ``n`` random states of each accessible dimension, then
    optimizer attainment on ``attain_n`` random (2, 2, 2) states."""
    failures, checks, max_gap = [], 0, 0.0
    deltas = {2: 0.0, 3: 0.0}
    tols = {2: 1e-9, 3: 1e-8}
    root = sampling.SeededStream(seed)
    rng = root.generator()
    for d_b, d_c_max in ((2, 8), (3, 4)):
        for i in range(n):
            d_c = int(rng.integers(1, d_c_max + 1))
            state = sampling.random_state((2, d_b, d_c), rng)
            delta = bounds.full_bounds(state).route_crosscheck_delta
            checks += 1
            deltas[d_b] = max(deltas[d_b], delta)
            if delta >= tols[d_b]:
                failures.append(f"random[{i}] dims {state.dims}: route delta {delta!r}")
    for i in range(attain_n):
        state = sampling.random_state((2, 2, 2), root.child(1 + 2 * i))
        for name, opt, bound in (
            ("erasure", oracle.optimize_erasure_projective, bounds.coherence_bound),
            ("which-alternative", oracle.optimize_which_alternative_projective, bounds.distinguishability_bound),
        ):
            checks += 1
            tr = opt(state, stream=root.child(2 + 2 * i))
            gap = bound(state) - tr.best_value
            max_gap = max(max_gap, gap)
            if gap > 1e-4 or gap < -SLACK:
                failures.append(f"attain[{i}] {name}: gap {gap!r}")
    return checks, deltas, max_gap, failures


def cmd_verify(args) -> int:
    if args.corpus == "builtin":
        checks, delta, gap, failures = run_builtin()
        delta_dim3 = None
    else:
        checks, deltas, gap, failures = run_random(args.n, _seed(args), args.attain_n)
        delta, delta_dim3 = deltas[2], deltas[3]
    out = {"checks_run": checks, "max_route_delta": delta, "max_attainment_gap": gap, "failures": failures}
    if delta_dim3 is not None:
        out["max_route_delta_dim3"] = delta_dim3
    _emit(out)
    return EXIT_VERIFY if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qerasure", description=__doc__.splitlines()[0])
    p.add_argument("--quiet", action="store_true", help="suppress progress and warnings")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="parallel workers")
    # same flags after the verb; SUPPRESS keeps the top-level value otherwise
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", parents=[common], help="bounds for a tripartite state file")
    b.add_argument("state_file")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("subfidelity", parents=[common], help="sub-fidelity and fidelity of two density matrices")
    s.add_argument("file_x")
    s.add_argument("file_y")
    s.set_defaults(func=cmd_subfidelity)

    w = sub.add_parser("sweep", parents=[common], help="Monte Carlo mean erasure bound versus dC")
    w.add_argument("--dc-list", type=_int_list, required=True)
    w.add_argument("--samples", type=int, default=10_000)
    w.add_argument("--seed", type=int, default=None)
    w.add_argument("--out", choices=("csv", "json"), default="csv")
    w.add_argument("--output", "-o", default=None, help="write here instead of stdout")
    w.add_argument("--band-low", type=float, default=0.25)
    w.add_argument("--band-high", type=float, default=0.75)
    w.set_defaults(func=cmd_sweep)

    f = sub.add_parser("fit", parents=[common], help="fit mean_C ~ c <V> to a sweep CSV ('-' for stdin)")
    f.add_argument("sweep_csv")
    f.add_argument("--affine", action="store_true", help="also report an affine intercept")
    f.set_defaults(func=cmd_fit)

    v = sub.add_parser("verify", parents=[common], help="route-equality and attainment checks")
    v.add_argument("--corpus", choices=("random", "builtin"), default="builtin")
    v.add_argument("--n", type=int, default=1000)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--attain-n", type=int, default=100, help="states for the optimizer sweep")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (DimensionMismatch, NotPsd) as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ErasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV


if __name__ == "__main__":
    sys.exit(main())
