import copy
from enum import IntEnum
from pathlib import Path
from typing import Any, Dict

from .models import RunConfig, RunMode


PROJECT_ROOT = Path(__file__).resolve().parent.parent


class Paths:
    """Shipped input locations"""
    CATALOGUE_DIR = PROJECT_ROOT / "catalogue"
    STACKS_DIR = PROJECT_ROOT / "catalogue" / "stacks"
    SPECS_DIR = PROJECT_ROOT / "specs"
    BENCHMARKS_DIR = PROJECT_ROOT / "benchmarks"
    DEMO_DIR = PROJECT_ROOT / "demo"
    CACHE_DIR = PROJECT_ROOT / ".selector_cache"
    INTERFACES_FILE = "interfaces.cts"
    CATALOGUE_SUFFIX = ".cts"
    SPEC_SUFFIX = ".prs"


class CheckDefaults:
    """Bounded-checking defaults; selection of the full catalogue stays well under the budget at k=3"""
    MODEL_SIZE = 3
    DOMAIN_SIZE = 4
    BUDGET_SECS = 30.0
    FUEL = 1_000_000


class ConformanceDefaults:
    CASES_PER_OP = 100
    SEED = 0
    MAX_SETUP_LENGTH = 24
    ELEMENT_RANGE = 32
    GENERATOR_VERSION = 1
    MAX_PRE_RETRIES = 20
    REPORT_FILE = "conformance_report.json"


class RankingDefaults:
    MIN_REPETITIONS = 3
    WARMUP_RUNS = 1
    RAW_TIMINGS_FILE = "raw_timings.csv"
    REPORT_FILE = "ranking_report.json"


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    PARSE_ERROR = 10
    TYPE_ERROR = 11
    CATALOGUE_ERROR = 12
    EMPTY_VALID_SET = 13
    BUILD_FAILURE = 14
    BENCH_FAILURE = 15
    CONFORMANCE_FAILURE = 16


# Base configuration shared by every mode
BASE_RUN_CONFIG: Dict[str, Any] = {
    "catalogue_paths": [str(Paths.CATALOGUE_DIR), str(Paths.STACKS_DIR)],
    "model_size": CheckDefaults.MODEL_SIZE,
    "domain_size": CheckDefaults.DOMAIN_SIZE,
    "budget_secs": CheckDefaults.BUDGET_SECS,
    "mode": RunMode.SELECT,
    "cache_dir": str(Paths.CACHE_DIR),
    "use_cache": True,
    "out_dir": "generated",
    "report_path": "selection_report.json",
    "seed": ConformanceDefaults.SEED,
    "quiet": False,
    "workers": 1,
}

# Mode-specific overrides
MODE_OVERRIDES: Dict[RunMode, Dict[str, Any]] = {
    RunMode.SELECT_GENERATE: {
        "out_dir": "generated",
    },
    RunMode.SELECT_GENERATE_RANK: {
        "out_dir": "generated",
        "bench_path": str(Paths.BENCHMARKS_DIR / "unique_elements.json"),
    },
}


def get_run_config(mode: RunMode = RunMode.SELECT, **overrides: Any) -> RunConfig:
    """Merge the base configuration with the mode override, then explicit overrides"""
    config = copy.deepcopy(BASE_RUN_CONFIG)
    config["mode"] = mode
    if mode in MODE_OVERRIDES:
        config.update(MODE_OVERRIDES[mode])
    # None means "not given on the command line"
    config.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**config)
