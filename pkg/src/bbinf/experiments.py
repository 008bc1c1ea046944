"""Experiment harness: single runs, parameter sweeps, and result auditing.

A sweep takes its instance from raw CSV files or from the synthetic
generator, then runs the Cartesian product of the configured axes
(k, l, epsilon, lambda, trajectory prefix size) x algorithms x seeds.
Results land in a CSV with the fixed header

    run_id,algorithm,k,l,epsilon,lambda_m,seed,influence,eval_count,wall_time_ms

plus a summary JSON of per-cell means. Rows are emitted in a canonical sorted
order so repeated sweeps differ only in wall times. Visibility indexing is
cached per (trajectory prefix, lambda) since those are the only axes that
change the instance.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace

from .baselines import BASELINE_KINDS, run_baseline
from .domain import (BbinfError, CapExceededError, InfluenceInstance, IngestError,
                     Selection, check_selection)
from .influence import aggregated_influence
from .ingest import (IdAssigner, IngestConfig, SyntheticSpec, assemble_instance,
                     load_billboards, load_explicit_probs, load_tags,
                     load_trajectories, synthesize_raw)
from .solvers import (DEFAULT_CAP, SolveResult, StochasticParams,
                      exhaustive_search, orthant_greedy, stochastic_greedy)

CSV_HEADER = "run_id,algorithm,k,l,epsilon,lambda_m,seed,influence,eval_count,wall_time_ms"

K_GRID = [25, 50, 100, 150, 200]
L_GRID = [10, 20, 30, 40, 50]
EPSILON_GRID = [0.01, 0.05, 0.1, 0.15, 0.2]
LAMBDA_GRID = [25.0, 50.0, 75.0, 100.0, 125.0]

ALGORITHMS = ("exhaustive", "greedy-incremental", "greedy-lazy", "greedy-stochastic")


@dataclass(frozen=True)
class RunRecord:
    """One solver run, self-contained enough to re-verify."""

    run_id: str
    algorithm: str
    k: int
    l: int
    epsilon: float | None
    lambda_m: float
    seed: int | None
    influence: float
    eval_count: int
    wall_time_ms: int
    selected_slots: tuple[int, ...]
    selected_tags: tuple[int, ...]
    instance_digest: str

    def to_json(self) -> str:
        return json.dumps({
            "run_id": self.run_id, "algorithm": self.algorithm,
            "k": self.k, "l": self.l, "epsilon": self.epsilon,
            "lambda_m": self.lambda_m, "seed": self.seed,
            "influence": self.influence, "eval_count": self.eval_count,
            "wall_time_ms": self.wall_time_ms,
            "selected_slots": list(self.selected_slots),
            "selected_tags": list(self.selected_tags),
            "instance_digest": self.instance_digest,
        }, separators=(",", ":"))

    def csv_row(self) -> str:
        eps = "" if self.epsilon is None else repr(self.epsilon)
        seed = "" if self.seed is None else str(self.seed)
        return ",".join([self.run_id, self.algorithm, str(self.k), str(self.l),
                         eps, repr(self.lambda_m), seed, repr(self.influence),
                         str(self.eval_count), str(self.wall_time_ms)])


def record_from_json(line: str) -> RunRecord:
    obj = json.loads(line)
    return RunRecord(
        run_id=obj["run_id"], algorithm=obj["algorithm"],
        k=int(obj["k"]), l=int(obj["l"]),
        epsilon=None if obj.get("epsilon") is None else float(obj["epsilon"]),
        lambda_m=float(obj["lambda_m"]),
        seed=None if obj.get("seed") is None else int(obj["seed"]),
        influence=float(obj["influence"]), eval_count=int(obj["eval_count"]),
        wall_time_ms=int(obj["wall_time_ms"]),
        selected_slots=tuple(int(s) for s in obj["selected_slots"]),
        selected_tags=tuple(int(c) for c in obj["selected_tags"]),
        instance_digest=obj["instance_digest"],
    )


def parse_algorithm(name: str) -> str:
    if name in ALGORITHMS:
        return name
    if name.startswith("baseline:"):
        kind = name.split(":", 1)[1]
        if kind in BASELINE_KINDS:
            return name
    raise ValueError(f"unknown algorithm {name!r}; expected one of "
                     f"{ALGORITHMS} or baseline:<{'|'.join(BASELINE_KINDS)}>")


def run_algorithm(instance: InfluenceInstance, algorithm: str, k: int, l: int,
                  epsilon: float | None = None, seed: int | None = None,
                  cap: int = DEFAULT_CAP) -> SolveResult:
    """Dispatch one run; epsilon/seed are only read where meaningful."""
    algorithm = parse_algorithm(algorithm)
    if algorithm == "exhaustive":
        return exhaustive_search(instance, k, l, cap=cap)
    if algorithm == "greedy-incremental":
        return orthant_greedy(instance, k, l, mode="incremental")
    if algorithm == "greedy-lazy":
        return orthant_greedy(instance, k, l, mode="lazy")
    if algorithm == "greedy-stochastic":
        params = StochasticParams(epsilon if epsilon is not None else 0.1,
                                  seed if seed is not None else 0)
        return stochastic_greedy(instance, k, l, params)
    kind = algorithm.split(":", 1)[1]
    return run_baseline(instance, kind, k, l, seed if seed is not None else 0)


def _uses_epsilon(algorithm: str) -> bool:
    return algorithm == "greedy-stochastic"


def make_record(run_id, instance, algorithm, k, l, epsilon, seed,
                result: SolveResult) -> RunRecord:
    return RunRecord(
        run_id=run_id, algorithm=algorithm, k=k, l=l,
        epsilon=epsilon if _uses_epsilon(algorithm) else None,
        lambda_m=instance.lambda_m, seed=seed,
        influence=result.value, eval_count=result.eval_count,
        wall_time_ms=result.wall_time_ms,
        selected_slots=result.selection.slots,
        selected_tags=result.selection.tags,
        instance_digest=instance.digest,
    )


def verify_records(instance: InfluenceInstance, records, rel_tol: float = 1e-6):
    """Recheck each record against the instance.

    Returns (ok, reports); each report line names the record and either PASS
    or the reason it failed (digest mismatch, budget/id violation, influence
    delta beyond tolerance).
    """
    ok = True
    reports = []
    for rec in records:
        problems = []
        if rec.instance_digest != instance.digest:
            problems.append("instance digest mismatch")
        sel = Selection(rec.selected_slots, rec.selected_tags)
        problems.extend(check_selection(instance, sel))
        if len(rec.selected_slots) != rec.k:
            problems.append(f"{len(rec.selected_slots)} slots selected, budget k={rec.k}")
        if len(rec.selected_tags) != rec.l:
            problems.append(f"{len(rec.selected_tags)} tags selected, budget l={rec.l}")
        if not problems:
            value = aggregated_influence(instance, sel.slots, sel.tags)
            delta = abs(value - rec.influence)
            if delta > rel_tol * max(1.0, abs(rec.influence)):
                problems.append(f"influence mismatch: recorded {rec.influence!r}, "
                                f"recomputed {value!r}, delta {delta:.3e}")
        if problems:
            ok = False
            reports.append(f"FAIL {rec.run_id}: " + "; ".join(problems))
        else:
            reports.append(f"PASS {rec.run_id}")
    return ok, reports


# ---------------------------------------------------------------------------
# sweep configuration

@dataclass
class ExperimentConfig:
    """Parsed sweep configuration; see parse_config_text for the file keys."""

    source: str = "synthetic"
    algorithms: list[str] = field(default_factory=lambda: ["greedy-lazy"])
    k_values: list[int] = field(default_factory=lambda: [25])
    l_values: list[int] = field(default_factory=lambda: [10])
    epsilon_values: list[float] = field(default_factory=lambda: [0.1])
    lambda_values: list[float] = field(default_factory=lambda: [100.0])
    seeds: list[int] = field(default_factory=lambda: [0])
    trajectory_sizes: list[int] | None = None
    t1: int = 0
    t2: int = 191
    delta: int = 8
    cap: int = DEFAULT_CAP
    # files source
    trajectories_path: str | None = None
    billboards_path: str | None = None
    tags_path: str | None = None
    probs_path: str | None = None
    # synthetic source
    users: int | None = None
    billboards: int | None = None
    tags: int | None = None
    tuples: int | None = None
    gen_seed: int = 0
    tag_skew: float = 2.0
    geo_box: tuple[float, float, float, float] | None = None


def _parse_list(raw, conv):
    return [conv(tok.strip()) for tok in str(raw).split(",") if tok.strip() != ""]


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse the plain ``key = value`` sweep configuration format.

    Lists are comma separated. ``axes`` names parameters that should sweep
    their default grid when no explicit values are given (k, l, epsilon,
    lambda). Unknown keys are rejected.
    """
    kv = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise IngestError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        kv[key.strip()] = value.strip()

    cfg = ExperimentConfig()
    axes = set(_parse_list(kv.pop("axes", ""), str))
    bad = axes - {"k", "l", "epsilon", "lambda"}
    if bad:
        raise IngestError(f"config: unknown axes {sorted(bad)}")

    cfg.source = kv.pop("source", "synthetic")
    if cfg.source not in ("synthetic", "files"):
        raise IngestError(f"config: source must be 'synthetic' or 'files', "
                          f"got {cfg.source!r}")
    try:
        if "algorithms" in kv:
            cfg.algorithms = [parse_algorithm(a) for a in
                              _parse_list(kv.pop("algorithms"), str)]
        if "k" in kv:
            cfg.k_values = _parse_list(kv.pop("k"), int)
        elif "k" in axes:
            cfg.k_values = list(K_GRID)
        if "l" in kv:
            cfg.l_values = _parse_list(kv.pop("l"), int)
        elif "l" in axes:
            cfg.l_values = list(L_GRID)
        if "epsilon" in kv:
            cfg.epsilon_values = _parse_list(kv.pop("epsilon"), float)
        elif "epsilon" in axes:
            cfg.epsilon_values = list(EPSILON_GRID)
        if "lambda" in kv:
            cfg.lambda_values = _parse_list(kv.pop("lambda"), float)
        elif "lambda" in axes:
            cfg.lambda_values = list(LAMBDA_GRID)
        if "seeds" in kv:
            cfg.seeds = _parse_list(kv.pop("seeds"), int)
        if "trajectory_sizes" in kv:
            cfg.trajectory_sizes = _parse_list(kv.pop("trajectory_sizes"), int)
        for key, attr, conv in (("t1", "t1", int), ("t2", "t2", int),
                                ("delta", "delta", int), ("cap", "cap", int),
                                ("seed", "gen_seed", int),
                                ("tag_skew", "tag_skew", float),
                                ("tuples", "tuples", int)):
            if key in kv:
                setattr(cfg, attr, conv(kv.pop(key)))
        if "geo_box" in kv:
            box = _parse_list(kv.pop("geo_box"), float)
            if len(box) != 4:
                raise IngestError("config: geo_box needs 4 comma-separated numbers")
            cfg.geo_box = tuple(box)
        if cfg.source == "files":
            for key, attr in (("trajectories", "trajectories_path"),
                              ("billboards", "billboards_path"),
                              ("tags", "tags_path"), ("probs", "probs_path")):
                if key in kv:
                    setattr(cfg, attr, kv.pop(key))
            if not (cfg.trajectories_path and cfg.billboards_path and cfg.tags_path):
                raise IngestError("config: files source needs trajectories, "
                                  "billboards, and tags paths")
        else:
            for key, attr in (("users", "users"), ("billboards", "billboards"),
                              ("tags", "tags")):
                if key in kv:
                    setattr(cfg, attr, int(kv.pop(key)))
            if not (cfg.users and cfg.billboards and cfg.tags):
                raise IngestError("config: synthetic source needs users, "
                                  "billboards, and tags counts")
    except ValueError as e:
        raise IngestError(f"config: {e}") from e
    if kv:
        raise IngestError(f"config: unknown keys {sorted(kv)}")
    return cfg


# ---------------------------------------------------------------------------
# sweep execution

class _InstanceFactory:
    """Builds instances per (trajectory prefix, lambda), with caching."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        if cfg.source == "files":
            users = IdAssigner()
            self.tuples = load_trajectories(cfg.trajectories_path, users)
            self.billboards = load_billboards(cfg.billboards_path)
            self.tag_records = load_tags(cfg.tags_path)
            self.user_labels = tuple(users.labels)
            self.explicit = (load_explicit_probs(cfg.probs_path)
                             if cfg.probs_path else None)
            self.prob_mode = "explicit_file" if cfg.probs_path else "panel_size_base"
        else:
            spec = SyntheticSpec(
                n_users=cfg.users, n_billboards=cfg.billboards, n_tags=cfg.tags,
                n_tuples=cfg.tuples if cfg.tuples else 5 * cfg.users,
                seed=cfg.gen_seed, tag_skew=cfg.tag_skew,
                **({"geo_box": cfg.geo_box} if cfg.geo_box else {}))
            self.tuples, self.billboards, self.tag_records, self.user_labels = \
                synthesize_raw(spec, cfg.t1, cfg.t2)
            self.explicit = None
            self.prob_mode = "synthetic"
        self._cache: dict[tuple, InfluenceInstance] = {}

    def get(self, traj_size: int | None, lambda_m: float) -> InfluenceInstance:
        key = (traj_size, lambda_m)
        if key not in self._cache:
            tuples = self.tuples if traj_size is None else self.tuples[:traj_size]
            ic = IngestConfig(t1=self.cfg.t1, t2=self.cfg.t2, delta=self.cfg.delta,
                              lambda_m=lambda_m, prob_mode=self.prob_mode)
            self._cache[key] = assemble_instance(
                tuples, self.billboards, self.tag_records, ic,
                explicit_probs=self.explicit, user_labels=self.user_labels)
        return self._cache[key]


@dataclass
class SweepOutput:
    records: list[RunRecord]
    failures: list[tuple[str, dict, str]]  # (run_id, cell, message)
    summary: dict


def _cells(cfg: ExperimentConfig):
    traj_axis = cfg.trajectory_sizes if cfg.trajectory_sizes else [None]
    for traj, lam, k, l, eps, algo, seed in itertools.product(
            traj_axis, cfg.lambda_values, cfg.k_values, cfg.l_values,
            cfg.epsilon_values, cfg.algorithms, cfg.seeds):
        yield {"traj_size": traj, "lambda_m": lam, "k": k, "l": l,
               "epsilon": eps, "algorithm": algo, "seed": seed}


def _cell_sort_key(cell):
    return (cell["algorithm"], cell["traj_size"] if cell["traj_size"] is not None else -1,
            cell["lambda_m"], cell["k"], cell["l"], cell["epsilon"], cell["seed"])


def run_sweep(cfg: ExperimentConfig) -> SweepOutput:
    """Execute every cell; failures are collected, not fatal."""
    factory = _InstanceFactory(cfg)
    cells = sorted(_cells(cfg), key=_cell_sort_key)
    records: list[RunRecord] = []
    failures: list[tuple[str, dict, str]] = []
    for i, cell in enumerate(cells):
        run_id = f"r{i:05d}"
        try:
            inst = factory.get(cell["traj_size"], cell["lambda_m"])
            result = run_algorithm(inst, cell["algorithm"], cell["k"], cell["l"],
                                   epsilon=cell["epsilon"], seed=cell["seed"],
                                   cap=cfg.cap)
            records.append(make_record(run_id, inst, cell["algorithm"],
                                       cell["k"], cell["l"], cell["epsilon"],
                                       cell["seed"], result))
        except BbinfError as e:
            failures.append((run_id, cell, f"{type(e).__name__}: {e}"))
    summary = summarize(records, failures)
    return SweepOutput(records, failures, summary)


def summarize(records, failures=()):
    """Per-cell means over seeds, keyed by everything except the seed."""
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        key = (rec.algorithm, rec.k, rec.l, rec.epsilon, rec.lambda_m,
               rec.instance_digest)
        groups.setdefault(key, []).append(rec)
    cells = []
    for key in sorted(groups, key=lambda t: tuple(str(x) for x in t)):
        runs = groups[key]
        algorithm, k, l, eps, lam, digest = key
        cells.append({
            "algorithm": algorithm, "k": k, "l": l, "epsilon": eps,
            "lambda_m": lam, "instance_digest": digest, "runs": len(runs),
            "mean_influence": sum(r.influence for r in runs) / len(runs),
            "mean_eval_count": sum(r.eval_count for r in runs) / len(runs),
            "mean_wall_time_ms": sum(r.wall_time_ms for r in runs) / len(runs),
        })
    return {"cells": cells, "n_runs": len(records), "n_failures": len(failures)}


def write_results_csv(path, records):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(CSV_HEADER + "\n")
        for rec in records:
            f.write(rec.csv_row() + "\n")


def write_failures_csv(path, failures):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("run_id,algorithm,k,l,epsilon,lambda_m,seed,status\n")
        for run_id, cell, message in failures:
            f.write(",".join([run_id, cell["algorithm"], str(cell["k"]),
                              str(cell["l"]), repr(cell["epsilon"]),
                              repr(cell["lambda_m"]), str(cell["seed"]),
                              json.dumps(message)]) + "\n")
