"""Command-line interface: single runs, parameter sweeps, stability scans,
and census re-analysis of stored Q-table dumps.

Configuration is a flat key-value YAML document whose keys mirror the
config field names exactly; every field can also be set by a command-line
flag. Flags win over the file, the file wins over defaults.

Each sweep job derives its RNG seed by hashing the base seed with the
job's axis values and run index, so the job set is reproducible and
independent of scheduling order or worker count. Result files are written
atomically (write-then-rename).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .analysis import aggregate, census_qtables
from .egt import full_scan, stability_scan
from .engine import MODES, SEEDED_JUDGE_MODES, SimConfig, run_simulation
from .game import PayoffParams
from .learning import LearnerParams

# flat config schema: name -> (parser, default)
CONFIG_FIELDS: dict = {
    "n_agents": (int, 10),
    "episodes": (int, 10_000),
    "encounters_per_episode": (int, 200),
    "b": (float, 5.0),
    "c": (float, 1.0),
    "chi": (float, 1e-3),
    "beta": (float, 1e-2),
    "gamma": (float, 0.99),
    "epsilon": (float, 0.1),
    "alpha": (float, 0.0),
    "seed_fraction": (float, 0.0),
    "mode": (str, "centralized"),
    "norm": (int, 9),
    "seeded_rule": (int, 5),
    "seeded_norm": (int, 9),
    "seeded_judge": (str, "excluded"),
    "rng_seed": (int, 0),
    "metric_window": (float, 0.5),
}

SWEEP_AXES = ("b", "seed_fraction", "alpha", "norm", "mode")


class ConfigError(Exception):
    def __init__(self, message: str, fields: dict | None = None):
        super().__init__(message)
        self.fields = fields or {}


def config_from_flat(flat: dict) -> SimConfig:
    """Build a validated SimConfig from a flat key-value mapping."""
    unknown = set(flat) - set(CONFIG_FIELDS)
    if unknown:
        raise ConfigError(
            f"unknown config fields: {sorted(unknown)}",
            fields={k: "unknown field" for k in sorted(unknown)},
        )
    values = {}
    errors = {}
    for name, (parse, default) in CONFIG_FIELDS.items():
        raw = flat.get(name, default)
        try:
            values[name] = parse(raw)
        except (TypeError, ValueError):
            errors[name] = f"expected {parse.__name__}, got {raw!r}"
    if errors:
        raise ConfigError("invalid config values", fields=errors)
    try:
        return SimConfig(
            episodes=values["episodes"],
            n_agents=values["n_agents"],
            encounters_per_episode=values["encounters_per_episode"],
            payoff=PayoffParams(b=values["b"], c=values["c"]),
            chi=values["chi"],
            learner=LearnerParams(
                beta=values["beta"],
                gamma=values["gamma"],
                epsilon=values["epsilon"],
                alpha=values["alpha"],
            ),
            seed_fraction=values["seed_fraction"],
            mode=values["mode"],
            norm=values["norm"],
            seeded_rule=values["seeded_rule"],
            seeded_norm=values["seeded_norm"],
            seeded_judge=values["seeded_judge"],
            rng_seed=values["rng_seed"],
            metric_window=values["metric_window"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_to_flat(config: SimConfig) -> dict:
    return {
        "n_agents": config.n_agents,
        "episodes": config.episodes,
        "encounters_per_episode": config.encounters_per_episode,
        "b": config.payoff.b,
        "c": config.payoff.c,
        "chi": config.chi,
        "beta": config.learner.beta,
        "gamma": config.learner.gamma,
        "epsilon": config.learner.epsilon,
        "alpha": config.learner.alpha,
        "seed_fraction": config.seed_fraction,
        "mode": config.mode,
        "norm": config.norm,
        "seeded_rule": config.seeded_rule,
        "seeded_norm": config.seeded_norm,
        "seeded_judge": config.seeded_judge,
        "rng_seed": config.rng_seed,
        "metric_window": config.metric_window,
    }


def derive_job_seed(base_seed: int, axis_values: dict, run_index: int) -> int:
    """Order-independent 64-bit seed for one sweep job."""
    key = "|".join(
        [str(int(base_seed))]
        + [f"{name}={axis_values[name]!r}" for name in sorted(axis_values)]
        + [f"run={int(run_index)}"]
    )
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass
class ExperimentSpec:
    """A sweep: cartesian product of axis values times runs_per_point."""

    base: SimConfig
    axes: dict = field(default_factory=dict)
    runs_per_point: int = 20

    def __post_init__(self) -> None:
        unknown = set(self.axes) - set(SWEEP_AXES)
        if unknown:
            raise ConfigError(f"unknown sweep axes: {sorted(unknown)}")
        if self.runs_per_point < 1:
            raise ConfigError(f"runs_per_point must be >= 1, got {self.runs_per_point}")

    def points(self) -> list[dict]:
        if not self.axes:
            return [{}]
        names = [a for a in SWEEP_AXES if a in self.axes]
        out = []
        for combo in itertools.product(*(self.axes[n] for n in names)):
            out.append(dict(zip(names, combo)))
        return out

    def jobs(self) -> list[dict]:
        """Flat config dicts for every (point, run) job, in canonical order."""
        base_flat = config_to_flat(self.base)
        jobs = []
        for point in self.points():
            for run_index in range(self.runs_per_point):
                flat = dict(base_flat)
                flat.update(point)
                flat["rng_seed"] = derive_job_seed(self.base.rng_seed, point, run_index)
                jobs.append({"point": point, "run_index": run_index, "config": flat})
        return jobs


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def episode_csv_text(result, thin: int = 1) -> str:
    """Per-episode CSV; ``thin`` keeps every Nth episode plus the final one."""
    decentralized = result.norm_census is not None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["episode", "mean_reward", "coop_level"]
    header += [f"rule_census_{k}" for k in range(16)]
    if decentralized:
        header += [f"norm_census_{k}" for k in range(16)]
    writer.writerow(header)
    n = len(result.coop_level)
    for ep in range(n):
        if thin > 1 and ep % thin != 0 and ep != n - 1:
            continue
        row = [ep, _fmt(float(result.mean_reward[ep])), _fmt(float(result.coop_level[ep]))]
        row += [int(x) for x in result.rule_census[ep]]
        if decentralized:
            row += [int(x) for x in result.norm_census[ep]]
        writer.writerow(row)
    return buf.getvalue()


def qtables_json_text(result) -> str:
    config = result.config
    agents = []
    for idx, q in enumerate(result.qtables):
        entry: dict = {"index": idx}
        if idx < config.n_seeded:
            entry["kind"] = "seeded"
            entry["rule"] = config.seeded_rule
            entry["norm"] = config.seeded_norm
        else:
            entry["kind"] = "learner"
            entry["q"] = [[float(v) for v in row] for row in q]
        agents.append(entry)
    doc = {
        "mode": config.mode,
        "config": config_to_flat(config),
        "agents": agents,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run_summary_dict(result) -> dict:
    """Summary of one run augmented with extracted final policies."""
    config = result.config
    summary = dict(result.summary)
    summary["config"] = config_to_flat(config)
    learner_tables = result.qtables[config.n_seeded :]
    if learner_tables and not summary.get("no_data"):
        census = census_qtables(learner_tables, config.decentralized)
        summary["dominant_rule"] = census.modal_rule()
        summary["dominant_norm"] = census.modal_norm()
        summary["unconverged_count"] = census.unconverged_count
    else:
        summary["dominant_rule"] = None
        summary["dominant_norm"] = None
        summary["unconverged_count"] = 0
    return summary


def execute_job(job: dict) -> dict:
    """Worker entry point: run one job, optionally writing its episode CSV."""
    config = config_from_flat(job["config"])
    result = run_simulation(config)
    summary = run_summary_dict(result)
    summary["point"] = job["point"]
    summary["run_index"] = job["run_index"]
    if job.get("episode_csv"):
        _atomic_write(Path(job["episode_csv"]), episode_csv_text(result, job.get("thin", 1)))
    if job.get("qtables_json"):
        _atomic_write(Path(job["qtables_json"]), qtables_json_text(result))
    return summary


def point_dir_name(point: dict) -> str:
    if not point:
        return "point"
    parts = []
    for name in SWEEP_AXES:
        if name in point:
            parts.append(f"{name}={format(point[name], 'g') if isinstance(point[name], float) else point[name]}")
    return "_".join(parts)


def sweep_csv_text(summaries: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["b", "seed_fraction", "alpha", "norm", "mode", "run_index",
         "coop_final", "dominant_rule", "dominant_norm"]
    )
    for s in summaries:
        cfg = s["config"]
        writer.writerow(
            [
                _fmt(cfg["b"]),
                _fmt(cfg["seed_fraction"]),
                _fmt(cfg["alpha"]),
                cfg["norm"],
                cfg["mode"],
                s["run_index"],
                _fmt(s["coop_final"]) if "coop_final" in s else "",
                s["dominant_rule"] if s["dominant_rule"] is not None else "",
                s["dominant_norm"] if s["dominant_norm"] is not None else "",
            ]
        )
    return buf.getvalue()


def stability_csv_text(verdicts) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["norm", "resident_rule", "resident_payoff", "worst_mutant",
         "worst_mutant_payoff", "stable", "strictly_stable", "converged",
         "resident_good_fraction"]
    )
    for v in verdicts:
        writer.writerow(
            [
                v.norm,
                v.resident_rule,
                _fmt(v.resident_payoff),
                v.worst_mutant,
                _fmt(v.worst_mutant_payoff),
                int(v.stable),
                int(v.strictly_stable),
                int(v.converged),
                _fmt(v.resident_good_fraction),
            ]
        )
    return buf.getvalue()


def census_csv_text(census) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    include_norms = census.norm_counts is not None
    header = ["code", "rule_count"] + (["norm_count"] if include_norms else [])
    writer.writerow(header)
    for code in range(16):
        row = [code, int(census.rule_counts[code])]
        if include_norms:
            row.append(int(census.norm_counts[code]))
        writer.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(p, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config file must be a mapping, got {type(doc).__name__}")
    return doc


def _flat_from_args(args, file_flat: dict) -> dict:
    flat = dict(file_flat)
    for name in CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            flat[name] = value
    return flat


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for name, (parse, _default) in CONFIG_FIELDS.items():
        flag = "--" + name.replace("_", "-")
        if name == "mode":
            parser.add_argument(flag, choices=MODES, default=None)
        elif name == "seeded_judge":
            parser.add_argument(flag, choices=SEEDED_JUDGE_MODES, default=None)
        else:
            parser.add_argument(flag, type=parse, default=None)
    parser.add_argument("--seed", dest="rng_seed_alias", type=int, default=None,
                        help="alias for --rng-seed")


def _resolve_seed_alias(args) -> None:
    if getattr(args, "rng_seed_alias", None) is not None:
        args.rng_seed = args.rng_seed_alias


def cmd_run(args) -> int:
    file_flat = _load_config_file(args.config)
    _resolve_seed_alias(args)
    flat = _flat_from_args(args, file_flat)
    config = config_from_flat(flat)

    out_dir = Path(args.out)
    result = run_simulation(config)
    summary = run_summary_dict(result)
    _atomic_write(out_dir / "episodes.csv", episode_csv_text(result, args.thin))
    _atomic_write(
        out_dir / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    if args.dump_qtables:
        _atomic_write(out_dir / "qtables.json", qtables_json_text(result))
    coop = summary.get("coop_final")
    print(f"run complete: episodes={config.episodes} coop_final={coop}")
    return 0


def _parse_axis(text: str, name: str):
    parse = float if name in ("b", "seed_fraction", "alpha") else (int if name == "norm" else str)
    values = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            values.append(parse(token))
        except ValueError:
            raise ConfigError(f"invalid value {token!r} for sweep axis {name}")
    if not values:
        raise ConfigError(f"sweep axis {name} has no values")
    return values


def cmd_sweep(args) -> int:
    file_doc = _load_config_file(args.config)
    allowed = {"base", "sweep", "runs_per_point", "out_dir"}
    unknown = set(file_doc) - allowed
    if unknown:
        raise ConfigError(
            f"unknown experiment fields: {sorted(unknown)}",
            fields={k: "unknown field" for k in sorted(unknown)},
        )
    base_flat = dict(file_doc.get("base", {}))
    axes = {k: list(v) for k, v in (file_doc.get("sweep") or {}).items()}
    runs_per_point = file_doc.get("runs_per_point", 20)

    _resolve_seed_alias(args)
    base_flat = _flat_from_args(args, base_flat)
    for axis in SWEEP_AXES:
        raw = getattr(args, f"sweep_{axis}", None)
        if raw is not None:
            axes[axis] = _parse_axis(raw, axis)
    if args.runs_per_point is not None:
        runs_per_point = args.runs_per_point

    spec = ExperimentSpec(
        base=config_from_flat(base_flat), axes=axes, runs_per_point=int(runs_per_point)
    )

    # flag wins over the file's out_dir, the file wins over the default
    out_dir = Path(args.out or file_doc.get("out_dir") or "results/sweep")
    jobs = spec.jobs()
    for job in jobs:
        pdir = out_dir / "points" / point_dir_name(job["point"])
        job["episode_csv"] = str(pdir / f"run{job['run_index']:03d}_episodes.csv")
        job["thin"] = args.thin
        if args.dump_qtables:
            job["qtables_json"] = str(pdir / f"run{job['run_index']:03d}_qtables.json")

    workers = max(1, args.workers)
    if workers == 1 or len(jobs) == 1:
        summaries = [execute_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(execute_job, jobs))

    # canonical order: point position in the cartesian product, then run index
    order = {
        (json.dumps(job["point"], sort_keys=True), job["run_index"]): pos
        for pos, job in enumerate(jobs)
    }
    summaries.sort(key=lambda s: order[(json.dumps(s["point"], sort_keys=True), s["run_index"])])

    _atomic_write(out_dir / "sweep.csv", sweep_csv_text(summaries))

    by_point: dict = {}
    for s in summaries:
        by_point.setdefault(json.dumps(s["point"], sort_keys=True), []).append(s)
    for key, runs in by_point.items():
        point = json.loads(key)
        if any(r.get("no_data") for r in runs):
            pdir = out_dir / "points" / point_dir_name(point)
            _atomic_write(
                pdir / "summary.json",
                json.dumps({"point": point, "no_data": True, "runs": runs},
                           indent=2, sort_keys=True) + "\n",
            )
            continue
        agg = aggregate(runs)
        doc = {
            "point": point,
            "n_runs": agg.n_runs,
            "coop_final_mean": agg.coop_final_mean,
            "coop_final_std": agg.coop_final_std,
            "coop_final_values": agg.coop_final_values,
            "pooled_rule_census": [int(x) for x in agg.pooled_census.rule_counts],
            "pooled_norm_census": (
                [int(x) for x in agg.pooled_census.norm_counts]
                if agg.pooled_census.norm_counts is not None
                else None
            ),
            "unconverged_count": agg.pooled_census.unconverged_count,
            "runs": runs,
        }
        pdir = out_dir / "points" / point_dir_name(point)
        _atomic_write(pdir / "summary.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")

    print(f"sweep complete: {len(jobs)} jobs over {len(by_point)} points -> {out_dir}")
    return 0


def cmd_stability(args) -> int:
    params = PayoffParams(b=args.b, c=args.c)
    if args.norm.lower() == "all":
        verdicts = full_scan(args.chi, params)
    else:
        norm = int(args.norm)
        if not 0 <= norm <= 15:
            raise ConfigError(f"norm must be in [0, 15] or 'all', got {args.norm}")
        verdicts = stability_scan(norm, args.chi, params)
    text = stability_csv_text(verdicts)
    if args.out:
        _atomic_write(Path(args.out), text)
        print(f"stability scan written: {args.out} ({len(verdicts)} rows)")
    else:
        sys.stdout.write(text)
    return 0


def cmd_census(args) -> int:
    import numpy as np

    tables = []
    decentralized = False
    for path in args.inputs:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        decentralized = decentralized or doc.get("mode") == "decentralized"
        for agent in doc["agents"]:
            if agent.get("kind") == "learner":
                tables.append(np.asarray(agent["q"], dtype=np.float64))
    if not tables:
        raise ConfigError("no learner Q-tables found in the given dumps")
    census = census_qtables(tables, decentralized)
    text = census_csv_text(census)
    if args.out:
        _atomic_write(Path(args.out), text)
        print(f"census written: {args.out} ({census.n_learners} learners, "
              f"{census.unconverged_count} with ties)")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repq",
        description="Reputation dynamics in the randomly matched Prisoner's Dilemma "
                    "with tabular Q-learning agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single simulation run")
    p_run.add_argument("--config", default=None, help="YAML config file")
    p_run.add_argument("--out", default="results/run", help="output directory")
    p_run.add_argument("--thin", type=int, default=1,
                       help="record every Nth episode (plus the final one)")
    p_run.add_argument("--dump-qtables", action="store_true")
    _add_config_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="execute a sweep over parameter axes")
    p_sweep.add_argument("--config", default=None, help="YAML experiment file")
    p_sweep.add_argument("--out", default=None,
                         help="output directory (default: the file's out_dir, else results/sweep)")
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p_sweep.add_argument("--thin", type=int, default=1)
    p_sweep.add_argument("--runs-per-point", type=int, default=None)
    p_sweep.add_argument("--dump-qtables", action="store_true")
    for axis in SWEEP_AXES:
        p_sweep.add_argument(f"--sweep-{axis.replace('_', '-')}", dest=f"sweep_{axis}",
                             default=None, help=f"comma-separated {axis} values")
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_stab = sub.add_parser("stability", help="analytical stability scan")
    p_stab.add_argument("--norm", default="9", help="norm code in [0,15] or 'all'")
    p_stab.add_argument("--chi", type=float, default=1e-3)
    p_stab.add_argument("--b", type=float, default=5.0)
    p_stab.add_argument("--c", type=float, default=1.0)
    p_stab.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    p_stab.set_defaults(func=cmd_stability)

    p_census = sub.add_parser("census", help="re-analyze stored Q-table dumps")
    p_census.add_argument("inputs", nargs="+", help="qtables.json files")
    p_census.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    p_census.set_defaults(func=cmd_census)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        report = {"error": "invalid configuration", "detail": str(exc), "fields": exc.fields}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 2
    except OSError as exc:
        report = {"error": "io failure", "detail": str(exc)}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
