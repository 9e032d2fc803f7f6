import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .code_generator import MANIFEST_FILE, CodeGenerator, load_manifest
from .conformance import run_conformance
from .config import ConformanceDefaults, ExitCode, RankingDefaults, get_run_config
from .containers import IMPLEMENTATIONS
from .errors import (BuildFailure, CatalogueError, ParseErrorList, RunFailure, SourceUsesUndeclaredOp,
                     SpecParseError, SpecTypeError, TypeErrorList)
from .library_spec import load_catalogue, shared_spec_instances, validate_catalogue
from .models import (Catalogue, ConformanceReport, ContainerTypeDecl, GeneratedProject, RankingReport, RunConfig,
                     RunMode, SelectionReport, TypedSpec)
from .ranking import load_benchmark, rank
from .report_cache import ReportCache, cache_key, catalogue_files, write_atomic
from .selector import select
from .spec_parser import parse_spec
from .type_checker import typecheck


class SelectionPipeline:
    """Orchestrates loading, selection, generation and ranking for one run configuration"""

    def __init__(self, config: RunConfig, project_dir: Optional[str] = None):
        self.config = config
        self.project_dir = project_dir
        self.cache = ReportCache(config.cache_dir)
        self.cache_hit = False

    def _log(self, message: str) -> None:
        if not self.config.quiet:
            print(message)

    def load_catalogue(self) -> Catalogue:
        try:
            return load_catalogue(*self.config.catalogue_paths, quiet=self.config.quiet)
        except CatalogueError as e:
            print(f"❌ Error during catalogue loading: {e}")
            raise

    def spec_paths(self) -> List[Path]:
        """The given specification plus every one the project manifest names, each once"""
        paths = [Path(self.config.spec_path)] if self.config.spec_path else []
        if self.project_dir is not None:
            manifest = load_manifest(self.project_dir)
            paths += [Path(self.project_dir) / name for name in sorted(set(manifest.types.values()))]
        unique: Dict[Path, Path] = {}
        for path in paths:
            unique.setdefault(path.resolve(), path)
        return list(unique.values())

    def load_spec(self, catalogue: Catalogue, path: Path) -> Tuple[TypedSpec, bytes]:
        spec_bytes = path.read_bytes()
        try:
            self._log(f"📋 Reading property specification: {path}")
            spec = parse_spec(spec_bytes.decode("utf-8"), source=str(path))
            return typecheck(spec, catalogue.interfaces), spec_bytes
        except (ParseErrorList, TypeErrorList) as e:
            print(f"❌ Error during specification checking: {e}")
            raise

    def select(self, typed: TypedSpec, catalogue: Catalogue, spec_bytes: bytes) -> SelectionReport:
        """Selection report for one property file, from the cache when no input changed"""
        cfg = self.config.check_config()
        key = cache_key(spec_bytes, catalogue_files(self.config.catalogue_paths), cfg.model_size, cfg.domain_size)
        if self.config.use_cache:
            cached = self.cache.get(key)
            if cached is not None:
                self.cache_hit = True
                self._log("♻️  Inputs unchanged, using cached selection report")
                return cached.model_copy(update={"check_config": cfg})

        self.cache_hit = False
        report = select(typed, catalogue, cfg)
        for selection in report.selections:
            self._log(f"📋 {selection.decl}: candidates {', '.join(selection.syntactic_candidates) or '-'}")
            for candidate in selection.candidates:
                if candidate.valid:
                    self._log(f"✅ {candidate.container}")
                else:
                    self._log(f"⚠️  {candidate.container} rejected: {'; '.join(candidate.reasons)}")
        if self.config.use_cache and report.timed_out:
            self._log("⚠️  Some checks timed out; the report is not cached")
        elif self.config.use_cache:
            self.cache.put(key, report)
        return report

    def write_report(self, report, path: str) -> None:
        write_atomic(path, report.model_dump_json(indent=2))
        self._log(f"📄 Report written to {path}")

    def generate(self, decls: Sequence[ContainerTypeDecl], catalogue: Catalogue,
                 report: SelectionReport) -> Dict[str, List[GeneratedProject]]:
        """Variants under out_dir/<type>/<implementation>; other declared types keep their first valid choice"""
        generator = CodeGenerator(catalogue, quiet=self.config.quiet)
        projects: Dict[str, List[GeneratedProject]] = {}
        try:
            manifest = load_manifest(self.project_dir)
            declared = {decl.name: decl for decl in decls if decl.name in manifest.types}
            missing = sorted(set(manifest.types) - set(declared))
            if missing:
                raise BuildFailure(f"no specification declares {', '.join(missing)}")
            defaults = {name: catalogue.get(report.valid_for(name)[0]) for name in declared}
            for name, decl in declared.items():
                others = [(declared[other], defaults[other]) for other in declared if other != name]
                out_dir = Path(self.config.out_dir) / name
                projects[name] = list(generator.generate_all(self.project_dir, decl, report.valid_for(name),
                                                             out_dir, others))
        except (BuildFailure, SourceUsesUndeclaredOp) as e:
            print(f"❌ Error during code generation: {e}")
            raise
        return projects

    def rank(self, projects: Dict[str, List[GeneratedProject]]) -> Dict[str, RankingReport]:
        """One ranking per declared type, written next to its variants"""
        rankings: Dict[str, RankingReport] = {}
        try:
            bench = load_benchmark(self.config.bench_path)
            for name, variants in projects.items():
                out_dir = Path(self.config.out_dir) / name
                rankings[name] = rank(variants, bench, out_dir=out_dir, quiet=self.config.quiet)
                self.write_report(rankings[name], str(out_dir / RankingDefaults.REPORT_FILE))
                if rankings[name].ordering:
                    self._log(f"✅ Ranking of {name}: {' < '.join(rankings[name].ordering)}")
        except RunFailure as e:
            print(f"❌ Error during ranking: {e}")
            raise
        return rankings

    def run(self) -> Tuple[SelectionReport, Dict[str, RankingReport]]:
        """Run the configured mode and write its reports"""
        catalogue = self.load_catalogue()
        decls: List[ContainerTypeDecl] = []
        selections = []
        hits = []
        for path in self.spec_paths():
            typed, spec_bytes = self.load_spec(catalogue, path)
            decls.extend(typed.spec.types)
            selections.extend(self.select(typed, catalogue, spec_bytes).selections)
            hits.append(self.cache_hit)
        self.cache_hit = bool(hits) and all(hits)
        report = SelectionReport(check_config=self.config.check_config(), selections=tuple(selections))
        self.write_report(report, self.config.report_path)

        rankings: Dict[str, RankingReport] = {}
        if self.config.mode in (RunMode.SELECT_GENERATE, RunMode.SELECT_GENERATE_RANK):
            empty = [s.decl for s in report.selections if not s.valid]
            if empty:
                self._log(f"⚠️  Nothing generated: no valid implementation for {', '.join(empty)}")
                return report, rankings
            projects = self.generate(decls, catalogue, report)
            if self.config.mode == RunMode.SELECT_GENERATE_RANK:
                rankings = self.rank(projects)
        return report, rankings

    def conformance(self) -> ConformanceReport:
        catalogue = self.load_catalogue()
        impls = {name: cls for name, cls in IMPLEMENTATIONS.items() if name in catalogue.names()}
        report = run_conformance(catalogue, impls, seed=self.config.seed, quiet=self.config.quiet)
        self.write_report(report, self.config.report_path)
        return report

    def validate(self) -> Dict[str, list]:
        catalogue = self.load_catalogue()
        diagnostics = validate_catalogue(catalogue, self.config.model_size)
        for name, found in diagnostics.items():
            if found:
                for d in found:
                    print(f"⚠️  {name}.{d.op}: {d.kind.value} {d.detail}")
            else:
                self._log(f"✅ {name}")
        for group in shared_spec_instances(catalogue):
            self._log(f"📋 Shared specification: {', '.join(group.members)} on {', '.join(group.shared_interfaces)}")
        return diagnostics


# =======================================================#
# Command line

SUBCOMMAND_MODES = {
    "select": RunMode.SELECT,
    "generate": RunMode.SELECT_GENERATE,
    "rank": RunMode.SELECT_GENERATE_RANK,
}

DEFAULT_REPORTS = {
    "conformance": ConformanceDefaults.REPORT_FILE,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="run_selection.py",
                                     description="Select container implementations that satisfy a property specification.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--catalogue", action="append", help="Catalogue directory (repeatable).")
    common.add_argument("--model-size", "-k", type=int, help="Maximum model list length.")
    common.add_argument("--domain-size", type=int, help="Element domain size (default k+1).")
    common.add_argument("--budget-secs", type=float, help="Time budget per candidate.")
    common.add_argument("--cache-dir", help="Selection report cache directory.")
    common.add_argument("--no-cache", action="store_true", help="Always run selection.")
    common.add_argument("--seed", type=int, help="Random seed for conformance cases.")
    common.add_argument("--report", help="Where to write the report.")
    common.add_argument("--workers", type=int, help="Candidate checks run in parallel.")
    common.add_argument("--quiet", action="store_true", help="Only print errors.")

    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in ("select", "generate", "rank"):
        sub = subparsers.add_parser(name, parents=[common])
        sub.add_argument("--spec", help="Property specification (.prs).")
        sub.add_argument("--project", help="Project directory with containers.json.")
        sub.add_argument("--out", help="Output directory for generated variants.")
        sub.add_argument("--bench", help="Benchmark descriptor (JSON).")
        if name == "select":
            sub.add_argument("--mode", choices=[m.value for m in RunMode], help="Pipeline stages to run.")
    subparsers.add_parser("conformance", parents=[common])
    subparsers.add_parser("validate-catalogue", parents=[common])
    return parser


def _spec_from_project(project: str) -> str:
    """First specification file of the project; the pipeline reads the rest from the manifest"""
    files = sorted(set(load_manifest(project).types.values()))
    if not files:
        raise BuildFailure(f"{project}: {MANIFEST_FILE} declares no container types")
    return str(Path(project) / files[0])


def config_from_args(args: argparse.Namespace) -> RunConfig:
    mode = SUBCOMMAND_MODES.get(args.command, RunMode.SELECT)
    if getattr(args, "mode", None):
        mode = RunMode(args.mode)
    model_size = args.model_size
    domain_size = args.domain_size
    if domain_size is None and model_size is not None:
        domain_size = model_size + 1
    spec_path = getattr(args, "spec", None)
    project = getattr(args, "project", None)
    if spec_path is None and project is not None:
        spec_path = _spec_from_project(project)
    return get_run_config(
        mode,
        spec_path=spec_path,
        catalogue_paths=args.catalogue,
        model_size=model_size,
        domain_size=domain_size,
        budget_secs=args.budget_secs,
        cache_dir=args.cache_dir,
        use_cache=False if args.no_cache else None,
        bench_path=getattr(args, "bench", None),
        out_dir=getattr(args, "out", None),
        report_path=args.report or DEFAULT_REPORTS.get(args.command),
        seed=args.seed,
        quiet=True if args.quiet else None,
        workers=args.workers,
    )


def _dispatch(args: argparse.Namespace) -> ExitCode:
    config = config_from_args(args)
    project = getattr(args, "project", None)

    if args.command == "conformance":
        report = SelectionPipeline(config).conformance()
        if not report.passed:
            print(f"❌ Conformance failed: {len(report.failures)} failures, "
                  f"{len(report.generator_errors)} generator errors")
            return ExitCode.CONFORMANCE_FAILURE
        return ExitCode.OK

    if args.command == "validate-catalogue":
        diagnostics = SelectionPipeline(config).validate()
        return ExitCode.CATALOGUE_ERROR if any(diagnostics.values()) else ExitCode.OK

    if config.spec_path is None:
        print("❌ --spec (or --project) is required")
        return ExitCode.USAGE
    if config.mode != RunMode.SELECT and project is None:
        print("❌ --project is required to generate variants")
        return ExitCode.USAGE
    if config.mode == RunMode.SELECT_GENERATE_RANK and config.bench_path is None:
        print("❌ --bench is required to rank variants")
        return ExitCode.USAGE

    pipeline = SelectionPipeline(config, project)
    report, rankings = pipeline.run()
    empty = [s.decl for s in report.selections if not s.valid]
    if empty:
        print(f"❌ No valid implementation for {', '.join(empty)}")
        return ExitCode.EMPTY_VALID_SET
    if any(ranking.excluded for ranking in rankings.values()):
        return ExitCode.BENCH_FAILURE
    return ExitCode.OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit status"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return ExitCode.OK if e.code == 0 else ExitCode.USAGE

    try:
        return int(_dispatch(args))
    except (ParseErrorList, SpecParseError):
        return ExitCode.PARSE_ERROR
    except (TypeErrorList, SpecTypeError):
        return ExitCode.TYPE_ERROR
    except CatalogueError:
        return ExitCode.CATALOGUE_ERROR
    except (BuildFailure, SourceUsesUndeclaredOp):
        return ExitCode.BUILD_FAILURE
    except RunFailure:
        return ExitCode.BENCH_FAILURE
    except (FileNotFoundError, ValueError) as e:
        print(f"❌ Error: {e}")
        return ExitCode.USAGE


if __name__ == "__main__":
    sys.exit(main())
