"""Config schema, JSON/CSV/SVG emission, and report serialization.

The config is a JSON object; the full field-by-field schema is documented
in the README. parse_config collects every violation it can find and raises
one SchemaError listing all of them, except that an inadmissible potential
key raises InadmissibleWord directly (the word is the error, not the
schema).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, is_dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ._version import __version__
from .bowen import CriticalExponent
from .capacity import CapacityEstimate
from .errors import InadmissibleWord, ScaleTooCoarse, SchemaError
from .harness import (
    AgreementReport,
    GibbsReport,
    PropertyReport,
    UnionReport,
    VariationalReport,
)
from .measure import LocalPressureTrace, MCPressureEstimate
from .subsets import SubsetSpec, finite_union, frequency_level, sub_sft, validate_spec, whole
from .symbolic import (
    LocallyConstantPotential,
    Scale,
    Subshift,
    Word,
    constant_potential,
    full_shift,
    potential_from_table,
)
from .transfer import MarkovMeasure, PressureValue

COMMANDS = (
    "pressure exact",
    "pressure capacity",
    "pressure bowen",
    "pressure weighted",
    "pressure measure",
    "verify chain",
    "verify variational",
    "verify unions",
    "verify gibbs",
    "verify properties",
)

_REQUIRED: Dict[str, Tuple[str, ...]] = {
    "pressure exact": ("system", "potential"),
    "pressure capacity": ("system", "potential", "scales", "n_range"),
    "pressure bowen": ("system", "potential", "scales", "N", "L"),
    "pressure weighted": ("system", "potential", "scales", "N", "L"),
    "pressure measure": ("system", "potential", "scales", "n_range", "measure"),
    "verify chain": ("system", "potential", "subset", "scales", "s", "delta", "N", "L"),
    "verify variational": ("system", "potential", "subset", "scales", "N", "L"),
    "verify unions": ("system", "potential", "subset", "scales", "N", "L"),
    "verify gibbs": ("system", "potential", "scales", "N", "L"),
    "verify properties": (),
}


@dataclass
class ExperimentConfig:
    system: Optional[Subshift]
    potential: Optional[LocallyConstantPotential]
    subset: SubsetSpec
    scales: Tuple[Scale, ...]
    n_range: Optional[Tuple[int, ...]]
    N: Optional[int]
    L: Optional[int]
    tol: float
    seed: int
    s: Optional[float]
    delta: Optional[float]
    samples: int
    measure_spec: Optional[Dict[str, object]]
    measure_grid: int
    trials: int
    betas: Tuple[float, ...]
    threads: int
    raw: Dict[str, object] = field(repr=False, default_factory=dict)


def parse_config(
    text: Union[str, Dict[str, object]], command: Optional[str] = None
) -> ExperimentConfig:
    """Parse and validate a JSON config, optionally against one command.

    Raises SchemaError carrying every (field path, message) pair found, or
    InadmissibleWord when a potential table key names a forbidden word.
    With ``command`` given, command-specific required fields and scale
    preconditions are enforced here rather than at run time.
    """
    if command is not None and command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    if isinstance(text, str):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError([("", f"config is not valid JSON: {e}")])
    else:
        data = text
    if not isinstance(data, dict):
        raise SchemaError([("", "config must be a JSON object")])

    problems: List[Tuple[str, str]] = []
    known = {
        "system", "potential", "subset", "scales", "scale", "n_range", "N",
        "L", "tol", "seed", "s", "delta", "samples", "measure",
        "measure_grid", "trials", "betas", "threads", "label",
    }
    for key in data:
        if key not in known:
            problems.append((key, "unknown field"))

    system = _parse_system(data.get("system"), problems)
    potential = _parse_potential(data.get("potential"), system, problems)
    subset = _parse_subset(data.get("subset"), system, problems)
    scales = _parse_scales(data, problems)
    n_range = _parse_n_range(data.get("n_range"), problems)

    N = _opt_int(data, "N", problems, minimum=1)
    L = _opt_int(data, "L", problems, minimum=1)
    tol = _opt_float(data, "tol", problems, default=1e-4, positive=True)
    seed = _opt_int(data, "seed", problems, minimum=0, default=0)
    s = _opt_float(data, "s", problems, default=None)
    delta = _opt_float(data, "delta", problems, default=None, positive=True)
    samples = _opt_int(data, "samples", problems, minimum=1, default=100)
    measure_grid = _opt_int(data, "measure_grid", problems, minimum=2, default=200)
    trials = _opt_int(data, "trials", problems, minimum=1, default=100)
    threads = _opt_int(data, "threads", problems, minimum=1, default=1)
    betas = _parse_betas(data.get("betas"), problems)
    measure_spec = _parse_measure(data.get("measure"), system, problems)

    if command is not None:
        present = {
            "system": system is not None,
            "potential": potential is not None,
            "subset": "subset" in data,
            "scales": scales is not None,
            "n_range": n_range is not None,
            "N": N is not None,
            "L": L is not None,
            "s": s is not None,
            "delta": delta is not None,
            "measure": measure_spec is not None,
        }
        for name in _REQUIRED[command]:
            if not present[name]:
                problems.append((name, f"required for `{command}`"))
        if command == "verify unions":
            if subset is not None and subset.kind != "finite_union":
                problems.append(
                    ("subset", "must be a finite_union of the components")
                )
        if command in ("pressure exact", "verify gibbs"):
            if subset is not None and subset.kind not in ("whole", "sub_sft"):
                problems.append(
                    ("subset", f"`{command}` needs an invariant target "
                     "(whole or sub_sft)")
                )
        if scales is not None and command == "pressure capacity":
            if any(sc.m < 1 for sc in scales):
                raise ScaleTooCoarse(
                    "separated-set counting is degenerate at m=0; "
                    "`pressure capacity` needs every scale m >= 1"
                )
        if scales is not None and command == "verify chain":
            if any(sc.m < 3 for sc in scales):
                raise ScaleTooCoarse(
                    "`verify chain` coarsens by 3 dyadic steps; needs m >= 3"
                )

    if problems:
        raise SchemaError(problems)
    return ExperimentConfig(
        system=system,
        potential=potential,
        subset=subset if subset is not None else whole(),
        scales=scales if scales is not None else (Scale(1),),
        n_range=n_range,
        N=N,
        L=L,
        tol=tol,
        seed=seed,
        s=s,
        delta=delta,
        samples=samples,
        measure_spec=measure_spec,
        measure_grid=measure_grid,
        trials=trials,
        betas=betas,
        threads=threads,
        raw=data,
    )


# ---------------------------------------------------------------------------
# field parsers


def _parse_system(node, problems) -> Optional[Subshift]:
    if node is None:
        return None
    if not isinstance(node, dict):
        problems.append(("system", "must be an object"))
        return None
    k = node.get("alphabet_size")
    if not isinstance(k, int) or k < 1:
        problems.append(("system.alphabet_size", "must be a positive integer"))
        return None
    allowed = node.get("allowed", "full")
    label = node.get("label", "")
    try:
        if allowed == "full":
            sft = full_shift(k, label=label or f"full-{k}-shift")
        elif isinstance(allowed, list) and all(
            isinstance(p, list) and len(p) == 2 for p in allowed
        ):
            rows = [[False] * k for _ in range(k)]
            for a, b in allowed:
                if not (isinstance(a, int) and isinstance(b, int) and 0 <= a < k and 0 <= b < k):
                    problems.append(
                        ("system.allowed", f"pair [{a}, {b}] outside alphabet")
                    )
                    return None
                rows[a][b] = True
            sft = Subshift(k, tuple(tuple(r) for r in rows), label=label)
        else:
            problems.append(
                ("system.allowed", 'must be "full" or a list of [from, to] pairs')
            )
            return None
    except ValueError as e:
        problems.append(("system.allowed", str(e)))
        return None
    return sft


def _word_from_key(key: str, alphabet_size: int) -> Word:
    if "," in key:
        parts = key.split(",")
    else:
        parts = list(key)
    try:
        word = tuple(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"key {key!r} is not a word (digits or comma-separated)")
    if not word:
        raise ValueError(f"key {key!r} is empty")
    if any(not 0 <= a < alphabet_size for a in word):
        raise ValueError(f"key {key!r} uses symbols outside the alphabet")
    return word


def _parse_potential(node, system, problems) -> Optional[LocallyConstantPotential]:
    if node is None:
        return None
    if system is None:
        problems.append(("potential", "needs a system to validate against"))
        return None
    if not isinstance(node, dict):
        problems.append(("potential", "must be an object"))
        return None
    if "constant" in node:
        c = node["constant"]
        if not isinstance(c, (int, float)):
            problems.append(("potential.constant", "must be a number"))
            return None
        return constant_potential(system, float(c))
    depth = node.get("depth")
    table_node = node.get("table")
    if not isinstance(depth, int) or depth < 1:
        problems.append(("potential.depth", "must be a positive integer"))
        return None
    if not isinstance(table_node, dict):
        problems.append(("potential.table", "must be an object of word -> value"))
        return None
    table: Dict[Word, float] = {}
    for key, value in table_node.items():
        try:
            word = _word_from_key(key, system.alphabet_size)
        except ValueError as e:
            problems.append((f"potential.table.{key}", str(e)))
            continue
        if len(word) != depth:
            problems.append(
                (f"potential.table.{key}", f"word length {len(word)} != depth {depth}")
            )
            continue
        if not system.is_admissible(word):
            raise InadmissibleWord(
                f"potential key {key!r} names a forbidden word of the system"
            )
        if not isinstance(value, (int, float)):
            problems.append((f"potential.table.{key}", "value must be a number"))
            continue
        table[word] = float(value)
    try:
        return potential_from_table(system, depth, table, label=node.get("label", ""))
    except ValueError as e:
        problems.append(("potential.table", str(e)))
        return None


def _parse_subset(node, system, problems) -> Optional[SubsetSpec]:
    if node is None:
        return None
    if not isinstance(node, dict):
        problems.append(("subset", "must be an object"))
        return None
    spec = _subset_from_node(node, problems, path="subset")
    if spec is not None and system is not None:
        try:
            validate_spec(spec, system)
        except ValueError as e:
            problems.append(("subset", str(e)))
            return None
    return spec


def _subset_from_node(node, problems, path) -> Optional[SubsetSpec]:
    kind = node.get("kind")
    label = node.get("label", "")
    if kind == "whole":
        return whole()
    if kind == "sub_sft":
        allowed = node.get("allowed")
        if not isinstance(allowed, list) or not allowed:
            problems.append((f"{path}.allowed", "must be a boolean matrix (0/1 rows)"))
            return None
        matrix = tuple(tuple(bool(x) for x in row) for row in allowed)
        if any(len(row) != len(matrix) for row in matrix):
            problems.append((f"{path}.allowed", "must be square"))
            return None
        return sub_sft(matrix, label=label)
    if kind == "finite_union":
        parts_node = node.get("parts")
        if not isinstance(parts_node, list) or len(parts_node) < 2:
            problems.append((f"{path}.parts", "must list at least two subsets"))
            return None
        parts = []
        for i, p in enumerate(parts_node):
            spec = _subset_from_node(p, problems, path=f"{path}.parts[{i}]")
            if spec is None:
                return None
            parts.append(spec)
        return finite_union(*parts, label=label)
    if kind == "frequency_level":
        symbol = node.get("symbol")
        target = node.get("target")
        window = node.get("window")
        if not isinstance(symbol, int):
            problems.append((f"{path}.symbol", "must be an integer symbol"))
            return None
        if not isinstance(target, (int, float)) or not 0 <= target <= 1:
            problems.append((f"{path}.target", "must be a frequency in [0, 1]"))
            return None
        if not isinstance(window, (int, float)) or window < 0:
            problems.append((f"{path}.window", "must be a nonnegative half-width"))
            return None
        return frequency_level(symbol, float(target), float(window), label=label)
    problems.append((f"{path}.kind", f"unknown subset kind {kind!r}"))
    return None


def _parse_scales(data, problems) -> Optional[Tuple[Scale, ...]]:
    node = data.get("scales", data.get("scale"))
    if node is None:
        return None
    if isinstance(node, int):
        node = [node]
    if not isinstance(node, list) or not node:
        problems.append(("scales", "must be an integer m or a nonempty list of m"))
        return None
    out = []
    for m in node:
        if not isinstance(m, int) or m < 0:
            problems.append(("scales", f"scale m={m!r} must be an integer >= 0"))
            return None
        out.append(Scale(m))
    return tuple(out)


def _parse_n_range(node, problems) -> Optional[Tuple[int, ...]]:
    if node is None:
        return None
    if (
        not isinstance(node, list)
        or len(node) < 2
        or any(not isinstance(x, int) for x in node)
    ):
        problems.append(("n_range", "must be [lo, hi] or an increasing integer list"))
        return None
    return tuple(node)


def _parse_betas(node, problems) -> Tuple[float, ...]:
    if node is None:
        return (0.05, 0.1)
    if not isinstance(node, list) or not node or any(
        not isinstance(b, (int, float)) or b <= 0 for b in node
    ):
        problems.append(("betas", "must be a nonempty list of positive numbers"))
        return (0.05, 0.1)
    return tuple(float(b) for b in node)


def _parse_measure(node, system, problems) -> Optional[Dict[str, object]]:
    if node is None:
        return None
    if not isinstance(node, dict):
        problems.append(("measure", "must be an object"))
        return None
    kind = node.get("kind")
    if kind == "equilibrium":
        return {"kind": "equilibrium"}
    if kind == "bernoulli":
        p = node.get("p")
        if not isinstance(p, list) or any(not isinstance(x, (int, float)) for x in p):
            problems.append(("measure.p", "must be a probability vector"))
            return None
        if any(x < 0 for x in p) or abs(sum(p) - 1.0) > 1e-9:
            problems.append(("measure.p", "entries must be >= 0 and sum to 1"))
            return None
        if system is not None and len(p) != system.alphabet_size:
            problems.append(("measure.p", "length must equal alphabet_size"))
            return None
        return {"kind": "bernoulli", "p": [float(x) for x in p]}
    if kind == "markov":
        T = node.get("transition")
        if not isinstance(T, list) or any(not isinstance(r, list) for r in T):
            problems.append(("measure.transition", "must be a row-stochastic matrix"))
            return None
        k = len(T)
        if any(len(r) != k for r in T) or (
            system is not None and k != system.alphabet_size
        ):
            problems.append(("measure.transition", "must be alphabet_size x alphabet_size"))
            return None
        for i, r in enumerate(T):
            if any(x < 0 for x in r) or abs(sum(r) - 1.0) > 1e-9:
                problems.append((f"measure.transition[{i}]", "row must be >= 0 and sum to 1"))
                return None
        out: Dict[str, object] = {
            "kind": "markov",
            "transition": [[float(x) for x in r] for r in T],
        }
        init = node.get("initial")
        if init is not None:
            if (
                not isinstance(init, list)
                or len(init) != k
                or any(not isinstance(x, (int, float)) or x < 0 for x in init)
                or abs(sum(init) - 1.0) > 1e-9
            ):
                problems.append(("measure.initial", "must be a probability vector"))
                return None
            out["initial"] = [float(x) for x in init]
        return out
    problems.append(("measure.kind", 'must be "bernoulli", "markov", or "equilibrium"'))
    return None


def _opt_int(data, key, problems, minimum=None, default=None):
    if key not in data:
        return default
    v = data[key]
    if not isinstance(v, int) or isinstance(v, bool):
        problems.append((key, "must be an integer"))
        return default
    if minimum is not None and v < minimum:
        problems.append((key, f"must be >= {minimum}"))
        return default
    return v


def _opt_float(data, key, problems, default=None, positive=False):
    if key not in data:
        return default
    v = data[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        problems.append((key, "must be a number"))
        return default
    if positive and v <= 0:
        problems.append((key, "must be positive"))
        return default
    return float(v)


# ---------------------------------------------------------------------------
# report serialization


def json_ready(obj):
    """Recursively convert report objects into JSON-safe structures.

    Non-finite floats become the strings "inf"/"-inf"/"nan" so emitted files
    stay strict JSON; bisection histories are dropped here because they are
    emitted as CSV traces instead.
    """
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, CriticalExponent):
        return {
            "midpoint": json_ready(obj.midpoint),
            "s_low": json_ready(obj.s_low),
            "s_high": json_ready(obj.s_high),
            "width": json_ready(obj.width),
            "value_at_low": json_ready(obj.value_at_low),
            "value_at_high": json_ready(obj.value_at_high),
            "threshold_value": json_ready(obj.threshold_value),
            "depth": obj.depth,
            "N": obj.N,
            "m": obj.scale.m,
            "method": obj.method,
            "probes": len(obj.history),
        }
    if isinstance(obj, CapacityEstimate):
        return {
            "slope": json_ready(obj.slope),
            "tail_max": json_ready(obj.tail_max),
            "window": list(obj.window),
            "m": obj.scale.m,
            "p_n": [[n, json_ready(v)] for n, v in obj.p_n],
            "empty_n": list(obj.empty_n),
        }
    if isinstance(obj, PressureValue):
        return {
            "value": json_ready(obj.value),
            "tolerance": json_ready(obj.tolerance),
            "method": obj.method,
        }
    if isinstance(obj, MCPressureEstimate):
        return {
            "mean": json_ready(obj.mean),
            "stderr": json_ready(obj.stderr),
            "samples": obj.samples,
            "excluded": obj.excluded,
            "seed": obj.seed,
            "per_orbit": [json_ready(v) for v in obj.per_orbit],
        }
    if isinstance(obj, LocalPressureTrace):
        return {
            "values": [[n, json_ready(v)] for n, v in obj.values],
            "liminf_estimate": json_ready(obj.liminf_estimate),
            "zero_measure_n": list(obj.zero_measure_n),
        }
    if isinstance(obj, GibbsReport):
        return {
            "pressure": json_ready(obj.pressure),
            "rows": [json_ready(r) for r in obj.rows],
            "control": json_ready(obj.control),
            "passed": obj.passed,
            "params": json_ready(obj.params),
        }
    if isinstance(obj, Scale):
        return obj.m
    if isinstance(obj, Subshift):
        return {
            "alphabet_size": obj.alphabet_size,
            "allowed": [[1 if x else 0 for x in row] for row in obj.allowed],
            "label": obj.label,
        }
    if isinstance(obj, MarkovMeasure):
        return {
            "label": obj.label,
            "initial": [json_ready(float(x)) for x in obj.initial],
            "transition": [
                [json_ready(float(x)) for x in row] for row in obj.transition
            ],
        }
    if isinstance(obj, SubsetSpec):
        out: Dict[str, object] = {"kind": obj.kind, "label": obj.label}
        if obj.allowed is not None:
            out["allowed"] = [[1 if x else 0 for x in row] for row in obj.allowed]
        if obj.parts:
            out["parts"] = [json_ready(p) for p in obj.parts]
        if obj.kind == "frequency_level":
            out.update(
                symbol=obj.symbol,
                target=json_ready(obj.target),
                window=json_ready(obj.window),
            )
        return out
    if is_dataclass(obj):
        skip = {"history", "trace", "raw"}
        return {
            name: json_ready(getattr(obj, name))
            for name in obj.__dataclass_fields__
            if name not in skip
        }
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return json_ready(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# atomic file emission


def _write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path: str, obj: Dict[str, object]) -> None:
    text = json.dumps(json_ready(obj), indent=2, sort_keys=True, allow_nan=False)
    _write_atomic(path, text + "\n")


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(v) for v in row) for row in rows)
    _write_atomic(path, "\n".join(lines) + "\n")


def svg_line_plot(
    rows: Sequence[Sequence[float]],
    title: str,
    xlabel: str,
    ylabel: str,
) -> str:
    """A minimal static polyline plot; finite points only."""
    pts = [(float(x), float(y)) for x, y in rows if math.isfinite(float(y))]
    W, H, ML, MB, MT, MR = 640, 400, 70, 50, 40, 20
    if len(pts) < 2:
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">'
            f'<text x="20" y="40">{title}: fewer than two finite points</text></svg>'
        )
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return ML + (x - x0) / (x1 - x0) * (W - ML - MR)

    def sy(y):
        return H - MB - (y - y0) / (y1 - y0) * (H - MB - MT)

    path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
    ticks = []
    for i in range(5):
        tx = x0 + (x1 - x0) * i / 4
        ty = y0 + (y1 - y0) * i / 4
        ticks.append(
            f'<text x="{sx(tx):.1f}" y="{H - MB + 18}" font-size="11" '
            f'text-anchor="middle">{tx:.4g}</text>'
        )
        ticks.append(
            f'<text x="{ML - 8}" y="{sy(ty) + 4:.1f}" font-size="11" '
            f'text-anchor="end">{ty:.4g}</text>'
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'font-family="sans-serif">'
        f'<rect width="{W}" height="{H}" fill="white"/>'
        f'<text x="{W // 2}" y="24" text-anchor="middle" font-size="14">{title}</text>'
        f'<line x1="{ML}" y1="{H - MB}" x2="{W - MR}" y2="{H - MB}" stroke="black"/>'
        f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{H - MB}" stroke="black"/>'
        f'<text x="{(ML + W - MR) // 2}" y="{H - 12}" text-anchor="middle" '
        f'font-size="12">{xlabel}</text>'
        f'<text x="16" y="{(MT + H - MB) // 2}" font-size="12" '
        f'transform="rotate(-90 16 {(MT + H - MB) // 2})" '
        f'text-anchor="middle">{ylabel}</text>'
        + "".join(ticks)
        + f'<polyline points="{path}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>'
        f"</svg>\n"
    )


def write_svg(path: str, svg_text: str) -> None:
    _write_atomic(path, svg_text)
