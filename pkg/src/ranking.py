"""Benchmark generated variants and rank them by median runtime."""

import random
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from .config import RankingDefaults
from .errors import BuildFailure, RunFailure
from .models import BenchmarkDescriptor, BenchmarkPhase, GeneratedProject, RankingEntry, RankingReport
from .code_generator import load_variant


PathLike = Union[str, Path]
Clock = Callable[[], float]


def load_benchmark(path: PathLike) -> BenchmarkDescriptor:
    try:
        return BenchmarkDescriptor.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise RunFailure(f"benchmark descriptor {path} does not exist") from None
    except ValueError as e:
        raise RunFailure(f"invalid benchmark descriptor {path}: {e}") from None


def workload_values(bench: BenchmarkDescriptor, size: int) -> List[int]:
    """`size` values where roughly `duplication_rate` of them repeat an earlier one"""
    rng = random.Random(f"{bench.seed}:{size}")
    distinct = max(1, round(size * (1.0 - bench.duplication_rate)))
    return [rng.randrange(distinct) for _ in range(size)]


class Workload:
    """Runs the descriptor's phases against one wrapper class"""

    def __init__(self, container_type: type, bench: BenchmarkDescriptor):
        self.container_type = container_type
        self.bench = bench

        # access uses positional reads where the variant exposes them
        self.access_op = "nth" if hasattr(container_type, "nth") else "contains"

    def _require(self, phase: BenchmarkPhase) -> None:
        for op, count in (("insert", phase.insert), ("contains", phase.contains), ("remove", phase.remove)):
            if count and not hasattr(self.container_type, op):
                raise RunFailure(f"phase '{phase.name}' needs '{op}', which the variant does not expose")

    def run(self, values: Sequence[int]) -> None:
        size = len(values)
        container = self.container_type.new()
        for phase in self.bench.phases:
            self._require(phase)
            for i in range(int(phase.insert * size)):
                container.insert(values[i % size])
            for i in range(int(phase.contains * size)):
                container.contains(values[-1 - i % size])
            for i in range(int(phase.remove * size)):
                container.remove(values[i % size])
            if self.access_op == "nth":
                length = container.len() or 1
                for i in range(int(phase.access * size)):
                    container.nth(i % length)
            else:
                for i in range(int(phase.access * size)):
                    container.contains(values[i % size])


class Ranker:
    """Times every variant on every size and orders them by median at the largest size"""

    def __init__(self, bench: BenchmarkDescriptor, clock: Clock = time.perf_counter,
                 warmup_runs: int = RankingDefaults.WARMUP_RUNS, quiet: bool = True):
        self.bench = bench
        self.clock = clock
        self.warmup_runs = warmup_runs
        self.quiet = quiet

    def _log(self, message: str) -> None:
        if not self.quiet:
            print(message)

    def _load(self, project: GeneratedProject) -> type:
        try:
            module = load_variant(project)
            return getattr(module, project.plan.decl_name)
        except BuildFailure:
            raise
        except Exception as e:
            raise BuildFailure(f"cannot load variant {project.plan.implementation}: {e}") from e

    def time_variant(self, project: GeneratedProject) -> List[Tuple[int, int, float]]:
        """(size, repetition, seconds) rows; warm-up runs are not timed"""
        workload = Workload(self._load(project), self.bench)
        rows = []
        for size in sorted(self.bench.sizes):
            values = workload_values(self.bench, size)
            try:
                for _ in range(self.warmup_runs):
                    workload.run(values)
                for repetition in range(self.bench.repetitions):
                    start = self.clock()
                    workload.run(values)
                    rows.append((size, repetition, self.clock() - start))
            except RunFailure:
                raise
            except Exception as e:
                raise RunFailure(f"{project.plan.implementation} failed at size {size}: {e}") from e
        return rows

    def rank(self, projects: Sequence[GeneratedProject], out_dir: Optional[PathLike] = None) -> RankingReport:
        records = []
        excluded: Dict[str, str] = {}
        for project in sorted(projects, key=lambda p: p.plan.implementation):
            name = project.plan.implementation
            self._log(f"📋 Benchmarking {name}")
            try:
                rows = self.time_variant(project)
            except (BuildFailure, RunFailure) as e:
                excluded[name] = f"{type(e).__name__}: {e}"
                self._log(f"⚠️  {name} excluded: {e}")
                continue
            records.extend(
                {"implementation": name, "size": size, "repetition": rep, "seconds": secs}
                for size, rep, secs in rows
            )

        timings = pd.DataFrame(records, columns=["implementation", "size", "repetition", "seconds"])
        raw_path = None
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            raw_path = Path(out_dir) / RankingDefaults.RAW_TIMINGS_FILE
            timings.to_csv(raw_path, index=False)
            self._log(f"📄 Raw timings written to {raw_path}")

        entries, ordering = self.aggregate(timings)
        return RankingReport(
            workload=self.bench.workload,
            entries=tuple(entries),
            ordering=tuple(ordering),
            excluded=excluded,
            raw_timings_path=str(raw_path) if raw_path is not None else None,
        )

    def aggregate(self, timings: pd.DataFrame) -> Tuple[List[RankingEntry], List[str]]:
        """Median and standard deviation per (implementation, size), ordering at the largest size"""
        if timings.empty:
            return [], []
        stats = (
            timings.groupby(["implementation", "size"])["seconds"]
            .agg(["median", "std"])
            .fillna(0.0)
            .reset_index()
            .sort_values(["implementation", "size"])
        )
        entries = [
            RankingEntry(implementation=row.implementation, size=int(row.size),
                         median_secs=float(row.median), dispersion_secs=float(row.std))
            for row in stats.itertuples(index=False)
        ]
        largest = stats[stats["size"] == stats["size"].max()]
        ordered = largest.sort_values(["median", "implementation"])
        return entries, list(ordered["implementation"])


def rank(projects: Sequence[GeneratedProject], bench: BenchmarkDescriptor, out_dir: Optional[PathLike] = None,
         clock: Clock = time.perf_counter, quiet: bool = True) -> RankingReport:
    """Benchmark the variants sequentially; failing ones are excluded with a reason"""
    return Ranker(bench, clock, quiet=quiet).rank(projects, out_dir)
