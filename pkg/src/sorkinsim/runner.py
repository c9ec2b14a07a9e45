"""Config-driven experiment runner and CLI.

Usage::

    sorkinsim run config.json --out results/ --format both
    sorkinsim sweep sweep.json --out results/
    sorkinsim validate config.json

A config is one JSON document. Complex numbers are ``[re, im]`` pairs.
Outputs: ``report.json``, ``screen.csv`` and ``summary.csv`` in the output
directory. Exit codes: 0 success, 1 config error, 2 numeric/domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import scenarios as sc
from .qlinalg import random_state, random_unitary, total_variation
from .recipes import ProbabilityRecipe, RecipeOutOfRange, apply_recipe, recipe_from_spec, validate_recipe
from .slits import SlitField, field_from_dft
from .sorkin import InterferenceReport, sum_rule_report

SCENARIOS = ("b2a", "a2b", "sum_rules", "contextuality")
FORMATS = ("json", "csv", "both")
CONFIG_NORM_TOL = 1e-9


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int
    recipe_kind: str = "born"
    epsilons: list[float] = field(default_factory=lambda: [0.0])
    is_sweep: bool = False
    alphas: np.ndarray | None = None
    n_slits: int = 3
    dim_a: int = 2
    blocks: list[list[int]] | None = None
    detector: int | None = None
    trials: int = 1
    output_path: str | None = None
    output_format: str = "json"
    raw: dict = field(default_factory=dict)

    def recipe(self, epsilon: float) -> ProbabilityRecipe:
        return recipe_from_spec(self.recipe_kind, epsilon)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _complex(value, name: str, errors: list[str]) -> complex | None:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    errors.append(f"{name}: expected a number or an [re, im] pair, got {value!r}")
    return None


def _complex_list(value, name: str, errors: list[str]) -> list[complex] | None:
    if not isinstance(value, list) or not value:
        errors.append(f"{name}: expected a non-empty list of [re, im] pairs")
        return None
    out = [_complex(v, f"{name}[{i}]", errors) for i, v in enumerate(value)]
    return None if any(v is None for v in out) else out


def _normalized(amps: list[complex], name: str, errors: list[str]) -> np.ndarray | None:
    a = np.array(amps, dtype=complex)
    norm = float(np.linalg.norm(a))
    if abs(norm - 1.0) > CONFIG_NORM_TOL:
        errors.append(f"{name}: state is not normalized (norm = {norm:.12g})")
        return None
    return a / norm


def _int(doc: dict, key: str, errors: list[str], default=None, minimum: int | None = None):
    if key not in doc:
        return default
    v = doc[key]
    if not isinstance(v, int) or isinstance(v, bool):
        errors.append(f"{key}: expected an integer, got {v!r}")
        return default
    if minimum is not None and v < minimum:
        errors.append(f"{key}: must be >= {minimum}, got {v}")
        return default
    return v


def _parse_recipe(doc: dict, errors: list[str]) -> tuple[str, list[float], bool]:
    rec = doc.get("recipe", {"kind": "born"})
    if not isinstance(rec, dict):
        errors.append("recipe: expected an object with 'kind' and optional 'epsilon'")
        return "born", [0.0], False
    kind = str(rec.get("kind", "born"))
    try:
        recipe_from_spec(kind, 0.0)
    except ValueError:
        errors.append(f"recipe.kind: unknown recipe {kind!r} (expected 'born' or 'sorkin3')")
    eps = rec.get("epsilon", 0.0)
    if not isinstance(eps, (int, float)) or isinstance(eps, bool) or not math.isfinite(eps):
        errors.append(f"recipe.epsilon: expected a finite number, got {eps!r}")
        eps = 0.0
    sweep = doc.get("sweep")
    if sweep is None:
        return kind, [float(eps)], False
    if not isinstance(sweep, dict):
        errors.append("sweep: expected an object with epsilon_min, epsilon_max, steps")
        return kind, [float(eps)], False
    missing = [k for k in ("epsilon_min", "epsilon_max", "steps") if k not in sweep]
    if missing:
        errors.extend(f"sweep.{k}: missing field" for k in missing)
        return kind, [float(eps)], True
    lo, hi, steps = sweep["epsilon_min"], sweep["epsilon_max"], sweep["steps"]
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
        errors.append(f"sweep.steps: expected a positive integer, got {steps!r}")
        return kind, [float(eps)], True
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (lo, hi)) or lo > hi:
        errors.append(f"sweep: need numeric epsilon_min <= epsilon_max, got {lo!r}, {hi!r}")
        return kind, [float(eps)], True
    grid = [float(lo)] if steps == 1 else [float(x) for x in np.linspace(lo, hi, steps)]
    return kind, grid, True


def parse_config(text: str | dict) -> ScenarioConfig:
    """Parse and validate a scenario config; raises ConfigError listing every problem."""
    if isinstance(text, dict):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"malformed JSON: {exc}"]) from None
    if not isinstance(doc, dict):
        raise ConfigError(["config must be a JSON object"])
    errors: list[str] = []

    scenario = doc.get("scenario")
    if scenario is None:
        errors.append("scenario: missing field")
    elif scenario not in SCENARIOS:
        errors.append(f"scenario: unknown scenario {scenario!r} (expected one of {', '.join(SCENARIOS)})")
    if "seed" not in doc:
        errors.append("seed: missing field")
    seed = _int(doc, "seed", errors, default=0)
    kind, epsilons, is_sweep = _parse_recipe(doc, errors)
    cfg = ScenarioConfig(scenario=scenario or "", seed=seed, recipe_kind=kind, epsilons=epsilons,
                         is_sweep=is_sweep, raw=doc)
    cfg.trials = _int(doc, "trials", errors, default=1, minimum=1)
    cfg.n_slits = _int(doc, "n_slits", errors, default=3, minimum=1)
    cfg.dim_a = _int(doc, "dim_a", errors, default=2, minimum=1)
    cfg.detector = _int(doc, "detector", errors, default=None, minimum=0)

    out = doc.get("output", {})
    if not isinstance(out, dict):
        errors.append("output: expected an object with 'path' and 'format'")
    else:
        cfg.output_path = out.get("path")
        cfg.output_format = out.get("format", "json")
        if cfg.output_format not in FORMATS:
            errors.append(f"output.format: expected one of {FORMATS}, got {cfg.output_format!r}")

    if scenario == "a2b":
        _parse_a2b(doc, cfg, errors)
    elif scenario in ("b2a", "sum_rules") and "alpha" in doc:
        amps = _complex_list(doc["alpha"], "alpha", errors)
        if amps is not None:
            if scenario == "b2a" and len(amps) < 2:
                errors.append("alpha: b2a needs at least two amplitudes (N >= 1)")
            cfg.alphas = _normalized(amps, "alpha", errors)
            cfg.n_slits = len(amps)
    elif scenario == "contextuality" and "blocks" in doc:
        blocks = doc["blocks"]
        ok = isinstance(blocks, list) and all(
            isinstance(b, list) and all(isinstance(i, int) for i in b) for b in blocks
        )
        if not ok or sorted(i for b in blocks for i in b) != list(range(cfg.n_slits)):
            errors.append(f"blocks: must partition range(n_slits={cfg.n_slits}) into disjoint lists")
        else:
            cfg.blocks = blocks
    if scenario == "sum_rules" and cfg.n_slits > 16:
        errors.append(f"n_slits: sum_rules supports at most 16 slits, got {cfg.n_slits}")

    if errors:
        raise ConfigError(errors)
    return cfg


def _parse_a2b(doc: dict, cfg: ScenarioConfig, errors: list[str]) -> None:
    keys = ("alpha", "beta", "gamma")
    if not any(k in doc for k in keys):
        return
    vals: dict[str, Any] = {}
    for k in keys:
        if k not in doc:
            errors.append(f"{k}: missing field")
        elif doc[k] == "auto":
            vals[k] = "auto"
        else:
            vals[k] = _complex(doc[k], k, errors)
    if len(vals) < 3 or any(v is None for v in vals.values()):
        return
    autos = [k for k, v in vals.items() if v == "auto"]
    if len(autos) > 1:
        errors.append("only one of alpha, beta, gamma may be 'auto'")
        return
    if autos:
        rest = sum(abs(v) ** 2 for v in vals.values() if v != "auto")
        if rest > 1.0 + CONFIG_NORM_TOL:
            errors.append(f"{autos[0]}: cannot complete state, other amplitudes have norm {math.sqrt(rest):.12g}")
            return
        vals[autos[0]] = complex(math.sqrt(max(0.0, 1.0 - rest)))
    cfg.alphas = _normalized([vals[k] for k in keys], "alpha/beta/gamma", errors)
    cfg.n_slits = 3


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    config: dict
    runs: list[dict]
    aggregate: dict
    duration_s: float = 0.0


def _cplx(a) -> Any:
    a = np.asarray(a)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_cplx(x) for x in a]


def _signaling_dict(rep: sc.SignalingReport, trial: int) -> dict:
    extra = {k: (np.asarray(v).tolist() if isinstance(v, np.ndarray) else v) for k, v in rep.extra.items()}
    if rep.scenario == "b2a":
        screen = (rep.extra["born_screen"], rep.bob_distributions[1])
    else:
        screen = rep.bob_distributions
    return {
        "kind": "signaling",
        "scenario": rep.scenario,
        "epsilon": rep.epsilon,
        "trial": trial,
        "contexts": list(rep.contexts),
        "bob_distributions": [np.asarray(d, dtype=float).tolist() for d in rep.bob_distributions],
        "alice_states": [_cplx(s) for s in rep.alice_states],
        "screen_context1": np.asarray(screen[0], dtype=float).tolist(),
        "screen_context2": np.asarray(screen[1], dtype=float).tolist(),
        "trace_distance_A": rep.trace_distance_A,
        "total_variation_B": rep.total_variation_B,
        "redistribution_satisfied": rep.redistribution_satisfied,
        "extra": extra,
    }


def _interference_dict(rep: InterferenceReport, fld: SlitField, recipe, epsilon: float, trial: int) -> dict:
    born = np.abs(fld.contrib.sum(axis=0)) ** 2
    deformed = apply_recipe(fld.contrib[None], recipe).probs
    return {
        "kind": "interference",
        "scenario": "sum_rules",
        "epsilon": epsilon,
        "trial": trial,
        "n_slits": rep.n_slits,
        "detectors": rep.detectors,
        "max_abs_by_order": rep.max_abs_by_order.tolist(),
        "vanishing_orders": rep.vanishing_orders(),
        "violated_orders": rep.violated_orders(),
        "terms": np.atleast_2d(rep.terms).tolist(),
        "screen_context1": born.tolist(),
        "screen_context2": deformed.tolist(),
        "trace_distance_A": None,
        "total_variation_B": total_variation(born, deformed),
    }


def _run_point(cfg: ScenarioConfig, epsilon: float) -> list[dict]:
    # Every sweep point replays the same seeded draws, so only epsilon varies.
    rng = np.random.default_rng(cfg.seed)
    recipe = cfg.recipe(epsilon)
    fixed = cfg.alphas is not None
    trials = 1 if fixed else cfg.trials
    out = []
    for t in range(trials):
        if cfg.scenario == "b2a":
            alphas = cfg.alphas if fixed else random_state(cfg.n_slits + 1, rng)
            out.append(_signaling_dict(sc.b2a_signaling(alphas, recipe), t))
        elif cfg.scenario == "a2b":
            abc = cfg.alphas if fixed else random_state(3, rng)
            out.append(_signaling_dict(sc.a2b_signaling(*abc, recipe), t))
        elif cfg.scenario == "sum_rules":
            src = cfg.alphas if fixed else random_state(cfg.n_slits, rng)
            fld = field_from_dft(src)
            rep = sum_rule_report(fld, recipe, cfg.detector)
            out.append(_interference_dict(rep, fld, recipe, epsilon, t))
        elif cfg.scenario == "contextuality":
            d_b = cfg.n_slits
            state = sc.BipartiteState.random(cfg.dim_a, d_b, rng)
            blocks = cfg.blocks or [list(range(d_b))[i:i + 3] for i in range(0, d_b, 3)]
            part = sc.PartitionSpec(tuple(tuple(b) for b in blocks))
            u1, u2 = random_unitary(cfg.dim_a, rng), random_unitary(cfg.dim_a, rng)
            mu = sc.contextuality_probe(state, part, u1, u2, recipe)
            out.append({
                "kind": "contextuality",
                "scenario": "contextuality",
                "epsilon": epsilon,
                "trial": t,
                "blocks": [list(b) for b in part.blocks],
                "mu": mu.tolist(),
                "max_abs_difference": float(np.max(np.abs(mu[:, 0] - mu[:, 1]))),
                "screen_context1": mu[:, 0].tolist(),
                "screen_context2": mu[:, 1].tolist(),
                "trace_distance_A": None,
                "total_variation_B": total_variation(mu[:, 0], mu[:, 1]),
            })
    return out


def _stats(values: list[float]) -> dict:
    vals = [v for v in values if v is not None]
    if not vals:
        return {"min": None, "max": None, "mean": None}
    return {"min": min(vals), "max": max(vals), "mean": float(np.mean(vals))}


def canonical_config(doc: dict) -> dict:
    """Config echo: the input tree after a canonical JSON round trip."""
    return json.loads(canonical_json(doc))


def run(cfg: ScenarioConfig, workers: int | None = None) -> RunReport:
    """Execute every (epsilon, trial) point of ``cfg``; deterministic given the seed."""
    start = time.perf_counter()
    n_workers = workers or min(8, len(cfg.epsilons))
    with ThreadPoolExecutor(max_workers=max(1, n_workers)) as pool:
        per_point = list(pool.map(lambda e: _run_point(cfg, e), cfg.epsilons))
    runs = [r for point in per_point for r in point]
    aggregate = {
        "n_runs": len(runs),
        "trace_distance_A": _stats([r.get("trace_distance_A") for r in runs]),
        "total_variation_B": _stats([r.get("total_variation_B") for r in runs]),
    }
    if cfg.scenario == "sum_rules":
        orders = np.max([r["max_abs_by_order"] for r in runs], axis=0)
        aggregate["max_abs_by_order"] = orders.tolist()
    if cfg.scenario == "contextuality":
        aggregate["max_abs_difference"] = max(r["max_abs_difference"] for r in runs)
    return RunReport(canonical_config(cfg.raw), runs, aggregate, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt_float(x: float) -> str:
    """Fixed 17-significant-digit float text (round-trips exactly)."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    if x == 0.0:
        return "0.0"
    return format(x, ".17g")


def canonical_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, fixed float format, numpy scalars unwrapped."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {canonical_json(v, indent, _level + 1)}"
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(canonical_json(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + canonical_json(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_dict(report: RunReport, include_timing: bool = False) -> dict:
    out = {"config": report.config, "runs": report.runs, "aggregate": report.aggregate}
    if include_timing:
        out["duration_s"] = report.duration_s
    return out


def screen_rows(report: RunReport) -> list[list]:
    rows = []
    for r in report.runs:
        for k, (p1, p2) in enumerate(zip(r["screen_context1"], r["screen_context2"])):
            rows.append([r["scenario"], r["epsilon"], k, p1, p2, r["trial"]])
    return rows


def summary_rows(report: RunReport) -> list[list]:
    """One row per epsilon; distances are maxima over trials."""
    by_eps: dict[float, list[dict]] = {}
    for r in report.runs:
        by_eps.setdefault(r["epsilon"], []).append(r)
    rows = []
    for eps, runs in by_eps.items():
        tda = [r["trace_distance_A"] for r in runs if r["trace_distance_A"] is not None]
        tvb = [r["total_variation_B"] for r in runs if r["total_variation_B"] is not None]
        rows.append([eps, max(tda) if tda else None, max(tvb) if tvb else None])
    return rows


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def emit(report: RunReport, out_dir: str | Path, fmt: str = "json") -> list[Path]:
    """Write ``report.json`` and/or ``screen.csv`` + ``summary.csv`` to ``out_dir``."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        p = out / "report.json"
        p.write_text(canonical_json(report_dict(report)) + "\n")
        written.append(p)
    if fmt in ("csv", "both"):
        p = out / "screen.csv"
        p.write_text(_csv_text(["scenario", "epsilon", "k", "prob_context1", "prob_context2", "trial"],
                               screen_rows(report)))
        written.append(p)
        p = out / "summary.csv"
        p.write_text(_csv_text(["epsilon", "trace_distance_A", "total_variation_B"], summary_rows(report)))
        written.append(p)
    return written


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _load(path: str, seed: int | None) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from None
    if seed is not None:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"malformed JSON: {exc}"]) from None
        if isinstance(doc, dict):
            doc["seed"] = seed
        return parse_config(doc)
    return parse_config(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sorkinsim", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run one scenario config"),
                        ("sweep", "run an epsilon sweep (config must contain 'sweep')"),
                        ("validate", "check a config and the recipe it selects")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name != "validate":
            p.add_argument("--out", default=None, help="output directory (default: config output.path or '.')")
            p.add_argument("--format", choices=FORMATS, default=None)
            p.add_argument("--workers", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args.config, args.seed)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 1

    if args.command == "validate":
        try:
            rep = validate_recipe(cfg.recipe(max(cfg.epsilons, key=abs)), trials=max(cfg.trials, 100),
                                  seed=cfg.seed, n_slits=max(3, min(cfg.n_slits, 8)))
        except (ValueError, ArithmeticError) as exc:
            print(f"numeric error [{cfg.scenario}]: {exc}", file=sys.stderr)
            return 2
        summary = {k: v for k, v in vars(rep).items() if k != "messages"}
        summary["passed"] = rep.passed
        print(canonical_json(summary))
        return 0 if rep.passed else 2

    if args.command == "sweep" and not cfg.is_sweep:
        print("config error: sweep: missing field (the sweep command needs a 'sweep' section)", file=sys.stderr)
        return 1
    try:
        report = run(cfg, workers=args.workers)
    except (RecipeOutOfRange, sc.DegenerateFringeError, ValueError, ArithmeticError) as exc:
        print(f"numeric error [{cfg.scenario}]: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out or cfg.output_path or "."
    fmt = args.format or cfg.output_format
    try:
        paths = emit(report, out_dir, fmt)
    except OSError as exc:
        print(f"config error: cannot write to {out_dir}: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    print(f"{cfg.scenario}: {len(report.runs)} run(s) in {report.duration_s:.3f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
