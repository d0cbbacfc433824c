"""Command-line surface: one command per invocation, JSON report out,
CSV trace where one exists, optional SVG rendering of the trace.

Exit codes: 0 on success (and verification pass), 2 when a verify command
completes but the verification fails, 1 on any error. Errors print one
machine-readable JSON object to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._version import __version__
from .bowen import bowen_pressure, check_chain, weighted_pressure
from .capacity import capacity_pressure
from .config import (
    COMMANDS,
    ExperimentConfig,
    json_ready,
    parse_config,
    svg_line_plot,
    write_csv,
    write_json,
    write_svg,
)
from .errors import PressureLabError, SchemaError
from .harness import (
    _embed_measure,
    _invariant_core,
    property_suite,
    verify_gibbs_bound,
    verify_unions,
    verify_variational,
)
from .measure import (
    exact_invariant_pressure,
    local_pressure,
    measure_pressure_mc,
    sample_orbit,
)
from .subsets import whole
from .transfer import MarkovMeasure, bernoulli_measure, equilibrium_measure, markov_measure

Trace = Optional[Tuple[Tuple[str, str], List[Sequence]]]


def run(command: str, cfg: ExperimentConfig) -> Tuple[Dict[str, object], Trace, bool]:
    """Execute one command; returns (report dict, optional trace, passed).

    The report is fully serializable; the trace is (header, rows) for the
    CSV emitter. ``passed`` is the verification outcome for verify commands
    and True for plain computations that complete.
    """
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    started = time.perf_counter()
    handler = _HANDLERS[command.split(" ", 1)[1] if command.startswith("verify") else command]
    results, trace, passed = handler(cfg)
    report = {
        "command": command,
        "version": __version__,
        "inputs": cfg.raw,
        "effective": {"seed": cfg.seed, "threads": cfg.threads},
        "results": results,
        "passed": passed,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    return report, trace, passed


def _scale_key(scale) -> str:
    return f"m={scale.m}"


def _cmd_exact(cfg: ExperimentConfig):
    sub, symbols, f_sub, spectral = _invariant_core(
        cfg.system, cfg.subset, cfg.potential
    )
    results = {
        "pressure": spectral,
        "core_symbols": list(symbols),
        "core_size": sub.alphabet_size,
    }
    return results, None, True


def _cmd_capacity(cfg: ExperimentConfig):
    results: Dict[str, object] = {}
    trace = None
    for scale in cfg.scales:
        est = capacity_pressure(
            cfg.system, cfg.subset, cfg.potential, scale, cfg.n_range,
            threads=cfg.threads,
        )
        results[_scale_key(scale)] = est
        if trace is None:
            filled = dict(est.p_n)
            for n in est.empty_n:
                filled[n] = float("-inf")
            rows = [(n, filled[n]) for n in sorted(filled)]
            trace = (("n", "log_partition_function"), rows)
    return results, trace, True


def _cmd_bowen(cfg: ExperimentConfig):
    return _critical_exponent_command(cfg, bowen_pressure)


def _cmd_weighted(cfg: ExperimentConfig):
    return _critical_exponent_command(cfg, weighted_pressure)


def _critical_exponent_command(cfg: ExperimentConfig, driver):
    results: Dict[str, object] = {}
    trace = None
    for scale in cfg.scales:
        ce = driver(
            cfg.system, cfg.subset, cfg.potential, scale, cfg.N, cfg.L, tol=cfg.tol
        )
        results[_scale_key(scale)] = ce
        if trace is None:
            rows = sorted(ce.history)
            trace = (("s", "cover_value"), rows)
    return results, trace, True


def _build_measure(cfg: ExperimentConfig) -> MarkovMeasure:
    spec = cfg.measure_spec
    if spec["kind"] == "bernoulli":
        return bernoulli_measure(spec["p"])
    if spec["kind"] == "markov":
        return markov_measure(spec["transition"], spec.get("initial"))
    sub, symbols, f_sub, _ = _invariant_core(cfg.system, cfg.subset, cfg.potential)
    mu = equilibrium_measure(sub, f_sub)
    return _embed_measure(mu, symbols, cfg.system.alphabet_size)


def _cmd_measure(cfg: ExperimentConfig):
    mu = _build_measure(cfg)
    results: Dict[str, object] = {"measure": mu}
    try:
        results["exact"] = {"value": exact_invariant_pressure(mu, cfg.potential)}
    except PressureLabError as e:
        results["exact"] = {"unavailable": type(e).__name__}
    trace = None
    for scale in cfg.scales:
        mc = measure_pressure_mc(
            mu, cfg.potential, scale, cfg.n_range, cfg.samples, cfg.seed,
            threads=cfg.threads,
        )
        results[_scale_key(scale)] = mc
        if trace is None:
            first_seed = int(
                np.random.SeedSequence(cfg.seed).generate_state(1, dtype=np.uint64)[0]
            )
            n_max = max(cfg.n_range) if len(cfg.n_range) > 2 else cfg.n_range[-1]
            orbit = sample_orbit(mu, n_max, scale, first_seed)
            tr = local_pressure(mu, cfg.potential, orbit, scale, cfg.n_range)
            trace = (("n", "local_pressure"), list(tr.values))
    return results, trace, True


def _cmd_chain(cfg: ExperimentConfig):
    results: Dict[str, object] = {}
    passed = True
    for scale in cfg.scales:
        rep = check_chain(
            cfg.system, cfg.subset, cfg.potential, cfg.s, cfg.delta, cfg.N,
            scale, cfg.L,
        )
        results[_scale_key(scale)] = rep
        passed = passed and rep["passed"]
    return results, None, passed


def _cmd_variational(cfg: ExperimentConfig):
    results: Dict[str, object] = {}
    passed = True
    for scale in cfg.scales:
        rep = verify_variational(
            cfg.system, cfg.subset, cfg.potential, scale, cfg.N, cfg.L,
            cfg.tol, measure_grid=cfg.measure_grid, seed=cfg.seed,
        )
        results[_scale_key(scale)] = rep
        passed = passed and rep.passed
    return results, None, passed


def _cmd_unions(cfg: ExperimentConfig):
    results: Dict[str, object] = {}
    passed = True
    for scale in cfg.scales:
        rep = verify_unions(
            cfg.system, list(cfg.subset.parts), cfg.potential, scale,
            cfg.N, cfg.L, tol=cfg.tol,
        )
        results[_scale_key(scale)] = rep
        passed = passed and rep.passed
    return results, None, passed


def _cmd_gibbs(cfg: ExperimentConfig):
    results: Dict[str, object] = {}
    passed = True
    trace = None
    for scale in cfg.scales:
        rep = verify_gibbs_bound(
            cfg.system, cfg.subset, cfg.potential, scale, cfg.N, cfg.L,
            betas=cfg.betas,
        )
        results[_scale_key(scale)] = rep
        passed = passed and rep.passed
        if trace is None:
            trace = (("n", "log_max_ratio"), list(rep.trace))
    return results, trace, passed


def _cmd_properties(cfg: ExperimentConfig):
    rep = property_suite(cfg.seed, cfg.trials)
    return {"properties": rep}, None, rep.passed


_HANDLERS = {
    "pressure exact": _cmd_exact,
    "pressure capacity": _cmd_capacity,
    "pressure bowen": _cmd_bowen,
    "pressure weighted": _cmd_weighted,
    "pressure measure": _cmd_measure,
    "chain": _cmd_chain,
    "variational": _cmd_variational,
    "unions": _cmd_unions,
    "gibbs": _cmd_gibbs,
    "properties": _cmd_properties,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pressurelab",
        description="Pressure computations and cross-validations on subshifts",
    )
    parser.add_argument("--version", action="version", version=__version__)
    groups = parser.add_subparsers(dest="group", required=True)
    p = groups.add_parser("pressure", help="compute one pressure notion")
    p.add_argument(
        "subcommand", choices=["exact", "capacity", "bowen", "weighted", "measure"]
    )
    v = groups.add_parser("verify", help="run one verification")
    v.add_argument(
        "subcommand", choices=["chain", "variational", "unions", "gibbs", "properties"]
    )
    for sub in (p, v):
        sub.add_argument("--config", required=True, help="path to a JSON config")
        sub.add_argument("--out", default=".", help="output directory")
        sub.add_argument("--seed", type=int, default=None, help="override config seed")
        sub.add_argument(
            "--threads", type=int, default=None, help="override config threads"
        )
        sub.add_argument(
            "--svg", action="store_true", help="also render the trace as an SVG plot"
        )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    command = f"{args.group} {args.subcommand}"
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
        cfg = parse_config(text, command)
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2 ** 64:
                raise SchemaError([("--seed", "must fit in an unsigned 64-bit integer")])
            cfg.seed = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise SchemaError([("--threads", "must be at least 1")])
            cfg.threads = args.threads
        report, trace, passed = run(command, cfg)
        os.makedirs(args.out, exist_ok=True)
        stem = command.replace(" ", "_")
        report_path = os.path.join(args.out, f"{stem}_report.json")
        write_json(report_path, report)
        emitted = [report_path]
        if trace is not None:
            header, rows = trace
            csv_path = os.path.join(args.out, f"{stem}_trace.csv")
            write_csv(csv_path, header, rows)
            emitted.append(csv_path)
            if args.svg:
                svg_path = os.path.join(args.out, f"{stem}_trace.svg")
                write_svg(
                    svg_path,
                    svg_line_plot(rows, title=command, xlabel=header[0], ylabel=header[1]),
                )
                emitted.append(svg_path)
        print(f"{command}: passed={passed} files={','.join(emitted)}")
        if command.startswith("verify") and not passed:
            return 2
        return 0
    except SchemaError as e:
        _emit_error(e, extra={"problems": [[p, m] for p, m in e.problems]})
        return 1
    except (PressureLabError, ValueError, OSError, RuntimeError) as e:
        _emit_error(e)
        return 1


def _emit_error(e: Exception, extra: Optional[Dict[str, object]] = None) -> None:
    record: Dict[str, object] = {"error": type(e).__name__, "message": str(e)}
    if extra:
        record.update(extra)
    print(json.dumps(json_ready(record), sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
