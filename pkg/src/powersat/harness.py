"""Seeded Monte Carlo sweeps over (distribution, n) cells.

Trial j of cell c uses the generator seeded by derive_seed(master, c, j),
so every record can be reproduced on its own and a sweep gives the same
output for any number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .dist import DIVERGENT, DistSpec, limit_ratio, moment
from .genmodel import DegenerateParity, FormulaStats, sample_formula, stats, write_dimacs
from .rng import default_master_seed, derive_seed, stream
from .solver import decide
from .tspan import SubcriticalRatio, compute_params, search_contradictory_paths

CSV_VERSION = "powersat-sweep-csv v1"
CSV_COLUMNS = ("dist", "n", "seed", "Sn", "Tn", "Delta", "ratio", "verdict", "tspan", "gen_ms", "solve_ms")
TIMING_COLUMNS = ("gen_ms", "solve_ms")

WILSON_Z = 1.959963984540054


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Cell:
    index: int
    dist: DistSpec
    n: int
    k: int = 2


@dataclass
class SweepConfig:
    dists: list
    ns: list
    trials: int
    master_seed: int = field(default_factory=default_master_seed)
    csv_path: str | None = None
    json_path: str | None = None
    run_tspan: bool = False
    run_probes: bool = False
    emit_dimacs: str | None = None  # directory for per-trial DIMACS files
    workers: int = 1
    k: int = 2

    def __post_init__(self):
        self.dists = [d if isinstance(d, DistSpec) else DistSpec.parse(d) for d in self.dists]
        self.ns = [int(n) for n in self.ns]
        if not self.dists:
            raise ConfigError("distribution list is empty")
        if not self.ns:
            raise ConfigError("n list is empty")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @classmethod
    def from_json(cls, path_or_mapping) -> "SweepConfig":
        if isinstance(path_or_mapping, dict):
            raw = dict(path_or_mapping)
        else:
            with open(path_or_mapping) as fh:
                raw = json.load(fh)
        known = {"dists", "ns", "trials", "master_seed", "csv_path", "json_path",
                 "run_tspan", "run_probes", "emit_dimacs", "workers", "k"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"dists", "ns", "trials"} - set(raw)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        if "master_seed" not in raw:
            raw["master_seed"] = default_master_seed()
        return cls(**raw)

    def cells(self) -> list[Cell]:
        return [Cell(i, d, n, self.k) for i, (d, n) in
                enumerate((d, n) for d in self.dists for n in self.ns)]


@dataclass
class TrialRecord:
    dist: str
    n: int
    seed: int
    cell: int
    trial: int
    stats: FormulaStats | None
    verdict: str  # SAT, UNSAT, or the name of a generation error
    tspan_outcome: str | None = None
    gen_ms: int = 0
    solve_ms: int = 0

    def csv_row(self) -> list:
        s = self.stats
        return [self.dist, self.n, self.seed,
                "" if s is None else s.S_n, "" if s is None else s.T_n,
                "" if s is None else s.Delta, "" if s is None else repr(s.ratio),
                self.verdict, self.tspan_outcome or "", self.gen_ms, self.solve_ms]


def run_trial(config: SweepConfig, cell: Cell, trial_index: int) -> TrialRecord:
    seed = derive_seed(config.master_seed, cell.index, trial_index)
    rng = stream(seed)
    record = TrialRecord(str(cell.dist), cell.n, seed, cell.index, trial_index, None, "")
    t0 = time.perf_counter()
    try:
        f = sample_formula(cell.dist, cell.n, cell.k, rng)
    except DegenerateParity:
        record.verdict = "DegenerateParity"
        record.gen_ms = _ms(t0)
        return record
    record.gen_ms = _ms(t0)
    record.stats = stats(f)
    if config.emit_dimacs:
        os.makedirs(config.emit_dimacs, exist_ok=True)
        write_dimacs(f, os.path.join(config.emit_dimacs, f"cell{cell.index}_trial{trial_index}.cnf"))
    if cell.k != 2:
        record.verdict = "NotDecided"
        return record
    t0 = time.perf_counter()
    digest = decide(f)
    record.solve_ms = _ms(t0)
    record.verdict = digest.verdict
    if config.run_tspan:
        try:
            params = compute_params(cell.n, cell.dist.alpha, record.stats, override=cell.dist.alpha <= 2.0)
        except SubcriticalRatio:
            record.tspan_outcome = "Subcritical"
        else:
            record.tspan_outcome = search_contradictory_paths(f, params, rng).outcome
    return record


def _ms(t0: float) -> int:
    return int(round(1000.0 * (time.perf_counter() - t0)))


def _run_task(args):
    config, cell, trial = args
    return run_trial(config, cell, trial)


def run_records(config: SweepConfig) -> list[TrialRecord]:
    tasks = [(config, cell, j) for cell in config.cells() for j in range(config.trials)]
    if config.workers == 1:
        records = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            records = list(ex.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * config.workers))))
    records.sort(key=lambda r: (r.cell, r.trial))
    return records


def wilson_interval(successes: int, total: int, z: float = WILSON_Z) -> tuple[float, float]:
    if total == 0:
        return 0.0, 1.0
    p = successes / total
    denom = 1.0 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def summarize(config: SweepConfig, records: list[TrialRecord]) -> list[dict]:
    out = []
    for cell in config.cells():
        rows = [r for r in records if r.cell == cell.index]
        decided = [r for r in rows if r.verdict in ("SAT", "UNSAT")]
        sat = sum(r.verdict == "SAT" for r in decided)
        frac = sat / len(decided) if decided else math.nan
        lo, hi = wilson_interval(sat, len(decided))
        summary = {
            "cell": cell.index, "dist": str(cell.dist), "n": cell.n, "trials": len(rows),
            "decided": len(decided), "sat": sat, "sat_fraction": frac, "wilson95": [lo, hi],
            "failures": {v: sum(r.verdict == v for r in rows)
                         for v in sorted({r.verdict for r in rows} - {"SAT", "UNSAT"})},
        }
        if config.run_tspan:
            found = [r for r in decided if r.tspan_outcome == "Found"]
            summary["tspan_found"] = len(found)
            summary["tspan_found_not_unsat"] = sum(r.verdict != "UNSAT" for r in found)
        if config.run_probes:
            with_stats = [r for r in rows if r.stats is not None]
            ratios = [r.stats.ratio for r in with_stats]
            pair = [r.stats.T_n / r.n for r in with_stats]
            ref = limit_ratio(cell.dist)
            summary["probes"] = {
                "mean_ratio": sum(ratios) / len(ratios) if ratios else math.nan,
                "ratio_reference": None if ref is DIVERGENT else ref,
                "mean_pair_moment": sum(pair) / len(pair) if pair else math.nan,
                "pair_moment_reference": None if ref is DIVERGENT else _pair_reference(cell.dist),
            }
        out.append(summary)
    return out


def _pair_reference(dist: DistSpec) -> float:
    return (moment(dist, 2) - moment(dist, 1)) / 4.0


def records_to_csv(records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def strip_timing(csv_text: str) -> str:
    """The CSV with the timing columns removed, for reproducibility checks."""
    lines = csv_text.splitlines()
    header_at = next(i for i, line in enumerate(lines) if not line.startswith("#"))
    rows = list(csv.reader(lines[header_at:]))
    keep = [i for i, name in enumerate(rows[0]) if name not in TIMING_COLUMNS]
    body = [",".join(row[i] for i in keep) for row in rows]
    return "\n".join(lines[:header_at] + body) + "\n"


@dataclass
class SweepResult:
    records: list
    summary: list
    csv_text: str


def run_sweep(config: SweepConfig) -> SweepResult:
    records = run_records(config)
    summary = summarize(config, records)
    text = records_to_csv(records)
    if config.csv_path:
        with open(config.csv_path, "w", newline="") as fh:
            fh.write(text)
    if config.json_path:
        with open(config.json_path, "w") as fh:
            json.dump({"master_seed": config.master_seed, "cells": summary}, fh, indent=2)
            fh.write("\n")
    return SweepResult(records, summary, text)


def monotone_up_to_overlap(summary: list[dict]) -> bool:
    """SAT fraction nondecreasing along the list, allowing drops whose Wilson intervals overlap."""
    for i, a in enumerate(summary):
        for b in summary[i + 1:]:
            if b["sat_fraction"] < a["sat_fraction"] and b["wilson95"][1] < a["wilson95"][0]:
                return False
    return True
