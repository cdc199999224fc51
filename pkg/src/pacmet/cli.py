"""Command-line front end wiring families, solvers, and bounds into
reproducible experiments emitting CSV/JSON.

Numbers are printed with 12 significant digits and '.' decimals so repeated
runs with identical configs are byte-identical.  Output files are written to
a temporary sibling (rows streamed and flushed as computed) and atomically
renamed at the end, so the canonical path never holds a partial file.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bounds as bounds_mod
from . import jsonio, phase
from .errors import NoValidPairError, PacmetError, SolverDivergedError
from .families import Prior, Window
from .solver import (
    SolverConfig,
    smap_postprocess,
    solve_bayesian_sdp,
    solve_minimax_sdp,
)

CSV_COLUMNS = ["probe", "n", "delta", "eta", "one_minus_eta", "delta_star",
               "rate_fit", "rate_theory"]

_PROBES = {
    "ghz": lambda n, delta: phase.probe_ghz(n),
    "plus": lambda n, delta: phase.probe_plus_tensor(n),
    "hb": lambda n, delta: phase.probe_hb(n),
    "gauss": lambda n, delta: phase.probe_gaussian(n, delta),
    "opt": lambda n, delta: phase.optimal_probe(n, delta)[0],
}


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.12g}"
    return str(x)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PACMET_THREADS", "1")))
    except ValueError:
        return 1


class AtomicWriter:
    """Stream lines to <path>.tmp (flushed per line), atomically rename at close."""

    def __init__(self, path: str | None):
        self.path = path
        if path is None:
            self._fh = sys.stdout
            self._tmp = None
        else:
            directory = os.path.dirname(os.path.abspath(path)) or "."
            fd, self._tmp = tempfile.mkstemp(dir=directory, prefix=".pacmet-")
            self._fh = os.fdopen(fd, "w", encoding="utf-8", newline="\n")

    def line(self, text: str) -> None:
        self._fh.write(text + "\n")
        self._fh.flush()

    def close(self) -> None:
        if self._tmp is not None:
            self._fh.close()
            os.replace(self._tmp, self.path)

    def abort(self) -> None:
        if self._tmp is not None:
            self._fh.close()
            os.unlink(self._tmp)


def _parse_n_values(args) -> list[int]:
    if args.n_range:
        try:
            a, b, step = (int(x) for x in args.n_range.split(":"))
        except ValueError as exc:
            raise ValueError(f"--n-range must be a:b:step, got {args.n_range!r}") from exc
        if step <= 0 or b < a:
            raise ValueError(f"empty --n-range {args.n_range!r}")
        return list(range(a, b + 1, step))
    if args.n is not None:
        return [args.n]
    raise ValueError("one of --n or --n-range is required")


def _validate_delta(delta: float) -> float:
    if not 0.0 < delta < math.pi:
        raise ValueError(f"--delta must lie in (0, pi), got {delta}")
    return delta


def _warn_grid(n_grid: int) -> None:
    if n_grid & (n_grid - 1):
        print(f"warning: grid size {n_grid} is not a power of two",
              file=sys.stderr)


def cmd_phase_sweep(args) -> int:
    delta = _validate_delta(args.delta)
    probes = args.probe.split(",")
    for name in probes:
        if name not in _PROBES:
            raise ValueError(f"unknown probe {name!r}; choose from {sorted(_PROBES)}")
    n_values = _parse_n_values(args)

    def row(name: str, n: int) -> list[str]:
        probe = _PROBES[name](n, delta)
        eta = phase.covariant_success_probability(probe, delta)
        log_err = phase.covariant_log_error(probe, delta)
        delta_star = (phase.covariant_tolerance(probe, args.eta)
                      if args.eta is not None else None)
        return [name, str(n), fmt(delta), fmt(eta), fmt(math.exp(-log_err)),
                fmt(delta_star), "", ""]

    tasks = [(name, n) for name in probes for n in n_values]
    out = AtomicWriter(args.out)
    try:
        out.line(",".join(CSV_COLUMNS))
        workers = _workers()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = dict(zip(tasks, pool.map(lambda t: row(*t), tasks)))
            for task in tasks:
                out.line(",".join(rows[task]))
        else:
            for task in tasks:
                out.line(",".join(row(*task)))
    except BaseException:
        out.abort()
        raise
    out.close()
    return 0


def cmd_tolerance_sweep(args) -> int:
    delta = args.delta
    if args.eta is None:
        raise ValueError("--eta is required for tolerance-sweep")
    probes = args.probe.split(",")
    n_values = _parse_n_values(args)
    out = AtomicWriter(args.out)
    try:
        out.line(",".join(CSV_COLUMNS))
        for name in probes:
            if name not in _PROBES:
                raise ValueError(f"unknown probe {name!r}")
            for n in n_values:
                if name == "opt":
                    delta_star = phase.optimal_probe_tolerance(n, args.eta)
                    probe = phase.optimal_probe(n, min(delta_star, np.pi / 2 * 0.999))[0]
                else:
                    probe = _PROBES[name](n, delta if delta else 0.1)
                    delta_star = phase.covariant_tolerance(probe, args.eta)
                eta = phase.covariant_success_probability(probe, delta_star)
                out.line(",".join([name, str(n), fmt(delta_star), fmt(eta),
                                   fmt(1.0 - eta), fmt(delta_star), "", ""]))
    except BaseException:
        out.abort()
        raise
    out.close()
    return 0


def cmd_sdp(args) -> int:
    delta = _validate_delta(args.delta)
    fam = jsonio.family_from_json(jsonio.load_json(args.family))
    _warn_grid(fam.n_points)
    config = SolverConfig(tol=args.tol)
    window = Window(delta)
    report: dict = {"delta": delta, "minimax": bool(args.minimax)}
    if args.minimax:
        sol = solve_minimax_sdp(fam, window, tol=args.tol, config=config)
        report["eta_star"] = sol.eta_bar_star
        report["gap"] = sol.gap
        report["prior"] = [float(w) for w in sol.prior.weights]
        povm = sol.povm
        gap_ok = sol.gap <= 10 * args.tol
    else:
        sol = solve_bayesian_sdp(fam, Prior.uniform(fam.n_points), window,
                                 tol=args.tol, config=config)
        report["eta_star"] = sol.eta_star
        report["gap"] = sol.duality_gap
        povm = sol.povm
        gap_ok = sol.duality_gap <= args.tol
    if args.povm:
        with open(args.povm, "w", encoding="utf-8") as fh:
            json.dump(jsonio.povm_to_json(povm), fh)
        report["povm_path"] = args.povm
    _emit_json(report, args.out)
    return 0 if gap_ok else 2


def cmd_bounds(args) -> int:
    delta = _validate_delta(args.delta)
    fam = jsonio.family_from_json(jsonio.load_json(args.family))
    window = Window(delta)
    reports = []
    for fn in (bounds_mod.two_point_upper_bound,
               bounds_mod.fidelity_error_lower_bound,
               bounds_mod.chernoff_rate_bound):
        try:
            reports.append(fn(fam, window).to_dict())
        except NoValidPairError as exc:
            reports.append({"bound_name": fn.__name__, "error": str(exc)})
    if args.eta is not None:
        try:
            reports.append(bounds_mod.two_point_sample_complexity_bound(
                fam, window, args.eta).to_dict())
        except NoValidPairError as exc:
            reports.append({"bound_name": "two_point_sample_complexity",
                            "error": str(exc)})
    payload: dict = {"delta": delta, "bounds": reports}
    if args.exact:
        sol = solve_minimax_sdp(fam, window, tol=args.tol)
        payload["eta_exact"] = sol.eta_bar_star
        consistent = True
        for rep in reports:
            if rep.get("bound_name") == "two_point_upper" and "value" in rep:
                consistent &= sol.eta_bar_star <= rep["value"] + 1e-4
            if rep.get("bound_name") == "fidelity_error_lower" and "value" in rep:
                consistent &= 1.0 - sol.eta_bar_star >= rep["value"] - 1e-4
        payload["consistent"] = bool(consistent)
    _emit_json(payload, args.out)
    return 0


def cmd_rate_fit(args) -> int:
    delta = _validate_delta(args.delta)
    n_values = _parse_n_values(args)
    if len(n_values) < 3:
        raise ValueError("rate-fit needs at least three probe sizes")
    name = args.probe
    if name not in _PROBES:
        raise ValueError(f"unknown probe {name!r}")
    theory = {
        "opt": phase.parallel_rate_theory,
        "plus": phase.iid_rate_theory,
        "gauss": phase.gaussian_rate_theory,
    }.get(name, lambda d: 0.0)(delta)
    report = phase.empirical_rate(lambda n: _PROBES[name](n, delta), delta,
                                  n_values, probe_name=name, theory_rate=theory)
    deviation = (abs(report.fitted_rate - theory) / theory if theory else
                 abs(report.fitted_rate))
    payload = {
        "probe": name,
        "delta": delta,
        "n_list": report.n_list,
        "neg_log_error": [float(fmt(v)) for v in report.neg_log_error],
        "fitted_rate": float(fmt(report.fitted_rate)),
        "theory_rate": float(fmt(theory)),
        "relative_deviation": float(fmt(deviation)),
    }
    _emit_json(payload, args.out)
    return 0


def cmd_smap(args) -> int:
    delta = _validate_delta(args.delta)
    fam = jsonio.family_from_json(jsonio.load_json(args.family))
    povm_data = jsonio.load_json(args.povm)
    effects = [jsonio.matrix_from_json(m) for m in povm_data["effects"]]
    from .families import make_likelihood_table

    table = make_likelihood_table(fam, Prior.uniform(fam.n_points), effects)
    result = smap_postprocess(table, Window(delta))
    payload = {
        "delta": delta,
        "eta": float(fmt(result.value)),
        "strategy": {str(lbl): float(fmt(t))
                     for lbl, t in zip(table.labels, result.times)},
    }
    _emit_json(payload, args.out)
    return 0


def _emit_json(payload: dict, out_path: str | None) -> None:
    text = json.dumps(_rounded(payload), indent=2, sort_keys=True)
    writer = AtomicWriter(out_path)
    try:
        writer.line(text)
    except BaseException:
        writer.abort()
        raise
    writer.close()


def _rounded(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pacmet",
        description="Finite-sample quantum metrology experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_family=False):
        p.add_argument("--delta", type=float, required=False)
        p.add_argument("--eta", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--n-range", type=str, help="a:b:step")
        p.add_argument("--grid", type=int, default=256)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--probe", type=str, default="ghz,plus,hb,gauss,opt")
        p.add_argument("--family", type=str, required=need_family)
        p.add_argument("--povm", type=str)
        p.add_argument("--out", type=str)
        p.add_argument("--minimax", action="store_true")
        p.add_argument("--exact", action="store_true",
                       help="also run the exact solver and check bound ordering")
        p.add_argument("--seed", type=int, default=0)

    for name in ("phase-sweep", "tolerance-sweep", "sdp", "bounds",
                 "rate-fit", "smap"):
        common(sub.add_parser(name), need_family=name in ("sdp", "bounds", "smap"))
    return parser


_HANDLERS = {
    "phase-sweep": cmd_phase_sweep,
    "tolerance-sweep": cmd_tolerance_sweep,
    "sdp": cmd_sdp,
    "bounds": cmd_bounds,
    "rate-fit": cmd_rate_fit,
    "smap": cmd_smap,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("phase-sweep", "tolerance-sweep", "rate-fit", "sdp",
                        "bounds", "smap") and args.delta is None:
        if args.command == "tolerance-sweep":
            args.delta = 0.0
        else:
            parser.error(f"{args.command} requires --delta")
    try:
        return _HANDLERS[args.command](args)
    except SolverDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, PacmetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
