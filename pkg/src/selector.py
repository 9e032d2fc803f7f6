"""Two-stage selection: interface filtering, then bounded counterexample search per property and operation."""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import UnknownInterface
from .library_spec import SpecSemantics
from .model_dsl import BuiltinRegistry, Evaluator, aux_assignments, enumerate_models
from .models import (Catalogue, CandidateResult, CheckConfig, ContainerSpec, ContainerTypeDecl,
                     CounterexampleTrace, DeclSelection, HoareSpec, Lambda, PropertyDef, ScalingPoint,
                     ScalingReport, SelectionReport, TypedSpec, Verdict, VerdictKind)
from .spec_parser import format_term
from .type_checker import free_names, refinement_conjuncts


INTERACTION = "<interaction>"


class BudgetExceeded(Exception):
    pass


class Deadline:
    def __init__(self, budget_secs: float, clock: Callable[[], float] = time.monotonic):
        self.clock = clock
        self.expires = clock() + budget_secs

    def check(self) -> None:
        if self.clock() > self.expires:
            raise BudgetExceeded()


def filter_syntactic(decl: ContainerTypeDecl, catalogue: Catalogue) -> List[ContainerSpec]:
    """Catalogue entries implementing every bound of `decl`, in catalogue order"""
    for bound in decl.bounds:
        if bound not in catalogue.interfaces:
            raise UnknownInterface(bound, f"type {decl.name}")
    required = set(decl.bounds)
    return [spec for spec in catalogue.containers if required <= set(spec.interfaces)]


def bound_operations(bounds: Iterable[str], catalogue: Catalogue) -> List[str]:
    """Operations of the given interfaces, in declaration order without repeats"""
    ops: Dict[str, None] = {}
    for name in bounds:
        for op in catalogue.interfaces[name].operations:
            ops[op.name] = None
    return list(ops)


class PropertyCheck:
    """A predicate on model lists, evaluated against one candidate's semantics"""

    def __init__(self, label: str, predicate: Any, semantics: SpecSemantics):
        self.label = label
        self.predicate = predicate
        self.semantics = semantics
        self.ev = semantics.ev

    def holds(self, xs: Tuple[int, ...]) -> bool:
        return self.ev.invoke(self.predicate, xs) is True

    def check_op(self, triple: HoareSpec, cfg: CheckConfig, deadline: Deadline) -> Verdict:
        """P(xs0) and pre(xs0, aux) imply P(xs) for xs the model operation's post-state"""
        k, m = cfg.model_size, cfg.domain_size
        semantics = self.semantics
        kinds = [a.kind.value for a in triple.aux_inputs]
        aux_space = list(aux_assignments(kinds, k, m))
        cases = 0
        satisfiable = False
        try:
            for xs0 in enumerate_models(k, m):
                cases += len(aux_space)
                deadline.check()
                if not semantics.invariant(xs0) or not self.holds(xs0):
                    continue
                for aux in aux_space:
                    if not semantics.pre(triple.op, xs0, aux):
                        continue
                    satisfiable = True
                    xs = semantics.post_state(triple.op, xs0, aux)
                    if not self.holds(xs):
                        trace = CounterexampleTrace(op=triple.op, property=self.label, xs0=xs0, aux=aux, xs=xs)
                        return Verdict(kind=VerdictKind.INVALID, property=self.label, op=triple.op,
                                       counterexample=trace, cases=cases)
        except BudgetExceeded:
            return Verdict(kind=VerdictKind.TIMEOUT, property=self.label, op=triple.op, cases=cases)
        kind = VerdictKind.VALID if satisfiable else VerdictKind.VACUOUS
        return Verdict(kind=kind, property=self.label, op=triple.op, cases=cases)

    def check_closed(self, cfg: CheckConfig, deadline: Deadline) -> Verdict:
        """The predicate must hold on every reachable model, i.e. every list satisfying the invariant"""
        cases = 0
        satisfiable = False
        try:
            for xs0 in enumerate_models(cfg.model_size, cfg.domain_size):
                cases += 1
                deadline.check()
                if not self.semantics.invariant(xs0):
                    continue
                satisfiable = True
                if not self.holds(xs0):
                    trace = CounterexampleTrace(op=INTERACTION, property=self.label, xs0=xs0, xs=xs0)
                    return Verdict(kind=VerdictKind.INVALID, property=self.label, op=INTERACTION,
                                   counterexample=trace, cases=cases)
        except BudgetExceeded:
            return Verdict(kind=VerdictKind.TIMEOUT, property=self.label, op=INTERACTION, cases=cases)
        kind = VerdictKind.VALID if satisfiable else VerdictKind.VACUOUS
        return Verdict(kind=kind, property=self.label, op=INTERACTION, cases=cases)


def _semantics(spec: ContainerSpec, cfg: CheckConfig, builtins: Optional[BuiltinRegistry]) -> SpecSemantics:
    return SpecSemantics(spec, Evaluator(range(cfg.domain_size), builtins))


def _property_values(properties: Sequence[PropertyDef], semantics: SpecSemantics,
                     catalogue: Catalogue) -> Dict[str, Any]:
    """Closures of every property; a bounded one also sees its interface's operations"""
    values: Dict[str, Any] = {}
    for prop in properties:
        ops = semantics.projections([prop.bound], catalogue) if prop.bound is not None else {}
        values[prop.name] = semantics.ev.run(prop.body, {**values, **ops})
    return values


def _property_check(prop: PropertyDef, spec: ContainerSpec, cfg: CheckConfig, catalogue: Optional[Catalogue],
                    builtins: Optional[BuiltinRegistry]) -> PropertyCheck:
    semantics = _semantics(spec, cfg, builtins)
    env: Dict[str, Any] = {}
    if prop.bound is not None:
        if catalogue is None or prop.bound not in catalogue.interfaces:
            raise UnknownInterface(prop.bound, f"property {prop.name}")
        env = semantics.projections([prop.bound], catalogue)
    return PropertyCheck(prop.name, semantics.ev.run(prop.body, env), semantics)


def check_property_on_op(prop: PropertyDef, triple: HoareSpec, spec: ContainerSpec, cfg: CheckConfig,
                         catalogue: Optional[Catalogue] = None,
                         builtins: Optional[BuiltinRegistry] = None) -> Verdict:
    """Search for xs0, aux with P(xs0), pre(xs0, aux) and not P(xs); Vacuous if P and pre never meet"""
    check = _property_check(prop, spec, cfg, catalogue, builtins)
    return check.check_op(triple, cfg, Deadline(cfg.budget_secs))


def check_interaction_property(prop: PropertyDef, spec: ContainerSpec, cfg: CheckConfig, catalogue: Catalogue,
                               builtins: Optional[BuiltinRegistry] = None) -> Verdict:
    """Closed check of a bounded property with the candidate's model operations substituted,
    then the same property as an invariant of every operation of the bound interface"""
    check = _property_check(prop, spec, cfg, catalogue, builtins)
    deadline = Deadline(cfg.budget_secs)
    verdict = check.check_closed(cfg, deadline)
    if not verdict.is_valid:
        return verdict
    cases = verdict.cases
    for op in bound_operations([prop.bound], catalogue):
        op_verdict = check.check_op(spec.triples[op], cfg, deadline)
        cases += op_verdict.cases
        if not op_verdict.is_valid:
            return op_verdict
    return verdict.model_copy(update={"cases": cases})


def check_candidate(typed: TypedSpec, decl: ContainerTypeDecl, spec: ContainerSpec, catalogue: Catalogue,
                    cfg: CheckConfig, builtins: Optional[BuiltinRegistry] = None) -> CandidateResult:
    """Every refinement conjunct against every operation of every bound interface"""
    semantics = _semantics(spec, cfg, builtins)
    ev = semantics.ev
    env = semantics.projections(decl.bounds, catalogue)
    properties = typed.spec.properties
    values = _property_values(properties, semantics, catalogue)
    bounded = {p.name for p in properties if p.bound is not None}
    ops = bound_operations(decl.bounds, catalogue)
    deadline = Deadline(cfg.budget_secs)

    verdicts: List[Verdict] = []
    for conjunct in refinement_conjuncts(decl):
        label = format_term(conjunct)
        predicate = ev.run(Lambda(param=decl.var, body=conjunct), {**env, **values})
        check = PropertyCheck(label, predicate, semantics)
        if free_names(conjunct) & bounded:
            verdicts.append(check.check_closed(cfg, deadline))
        for op in ops:
            verdicts.append(check.check_op(spec.triples[op], cfg, deadline))

    reasons = tuple(
        f"{v.property} on {v.op}: {v.kind.value}" for v in verdicts if not v.is_valid
    )
    return CandidateResult(
        container=spec.name,
        verdicts=tuple(verdicts),
        valid=not reasons,
        reasons=reasons,
        cases_enumerated=sum(v.cases for v in verdicts),
    )


def select_decl(typed: TypedSpec, decl: ContainerTypeDecl, catalogue: Catalogue, cfg: CheckConfig,
                builtins: Optional[BuiltinRegistry] = None) -> DeclSelection:
    candidates = filter_syntactic(decl, catalogue)

    def run(spec: ContainerSpec) -> CandidateResult:
        return check_candidate(typed, decl, spec, catalogue, cfg, builtins)

    if cfg.workers > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, candidates))
    else:
        results = [run(spec) for spec in candidates]

    return DeclSelection(
        decl=decl.name,
        bounds=decl.bounds,
        syntactic_candidates=tuple(spec.name for spec in candidates),
        candidates=tuple(results),
        valid=tuple(r.container for r in results if r.valid),
    )


def select(typed: TypedSpec, catalogue: Catalogue, cfg: CheckConfig,
           builtins: Optional[BuiltinRegistry] = None) -> SelectionReport:
    """Valid implementations for every container type declared in `typed`"""
    return SelectionReport(
        check_config=cfg,
        selections=tuple(select_decl(typed, decl, catalogue, cfg, builtins) for decl in typed.spec.types),
    )


# =======================================================#
# Scaling measurements

def replicate_catalogue(catalogue: Catalogue, names: Sequence[str], size: int) -> Catalogue:
    """Catalogue of `size` entries made by cycling through copies of the named containers"""
    specs = [catalogue.get(name) for name in names]
    containers = []
    for i in range(size):
        spec = specs[i % len(specs)]
        containers.append(spec.model_copy(update={"name": f"{spec.name}_{i}"}))
    return Catalogue(containers=tuple(containers), interfaces=catalogue.interfaces)


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float, float]:
    """Least-squares line through the points: (slope, intercept, r squared)"""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - residual / total if total > 0 else 1.0
    return float(slope), float(intercept), r_squared


def _timed_select(typed: TypedSpec, catalogue: Catalogue, cfg: CheckConfig, clock: Callable[[], float],
                  builtins: Optional[BuiltinRegistry]) -> Tuple[float, int]:
    start = clock()
    report = select(typed, catalogue, cfg, builtins)
    seconds = clock() - start
    cases = sum(c.cases_enumerated for s in report.selections for c in s.candidates)
    return seconds, cases


def _fitted(points: List[ScalingPoint], xs: Sequence[float], metric: str) -> ScalingReport:
    """`metric` is "seconds" or "cases"; the fit is a straight line through (xs, metric)"""
    ys = [p.seconds if metric == "seconds" else p.cases for p in points]
    if len(points) < 2:
        return ScalingReport(points=tuple(points))
    slope, intercept, r_squared = linear_fit(xs, ys)
    return ScalingReport(points=tuple(points), slope=slope, intercept=intercept, r_squared=r_squared)


def scaling_by_model_size(typed: TypedSpec, catalogue: Catalogue, model_sizes: Sequence[int],
                          metric: str = "seconds", clock: Callable[[], float] = time.perf_counter,
                          builtins: Optional[BuiltinRegistry] = None) -> ScalingReport:
    points = []
    for k in model_sizes:
        cfg = CheckConfig(model_size=k, domain_size=k + 1)
        seconds, cases = _timed_select(typed, catalogue, cfg, clock, builtins)
        points.append(ScalingPoint(model_size=k, library_size=len(catalogue.containers), seconds=seconds, cases=cases))
    return _fitted(points, list(model_sizes), metric)


def scaling_by_library_size(typed: TypedSpec, catalogue: Catalogue, library_sizes: Sequence[int],
                            model_size: int = 3, metric: str = "seconds",
                            clock: Callable[[], float] = time.perf_counter,
                            builtins: Optional[BuiltinRegistry] = None,
                            names: Optional[Sequence[str]] = None) -> ScalingReport:
    """Selection work against library size, made by duplicating `names` (default: the syntactic candidates)"""
    if names is None:
        names = sorted({spec.name for decl in typed.spec.types for spec in filter_syntactic(decl, catalogue)})
    cfg = CheckConfig(model_size=model_size, domain_size=model_size + 1)
    points = []
    for size in library_sizes:
        library = replicate_catalogue(catalogue, names, size)
        seconds, cases = _timed_select(typed, library, cfg, clock, builtins)
        points.append(ScalingPoint(model_size=model_size, library_size=size, seconds=seconds, cases=cases))
    return _fitted(points, list(library_sizes), metric)


def measure_scaling(typed: TypedSpec, catalogue: Catalogue, model_sizes: Sequence[int] = (1, 2, 3),
                    library_sizes: Sequence[int] = tuple(range(2, 9)), metric: str = "seconds",
                    clock: Callable[[], float] = time.perf_counter,
                    builtins: Optional[BuiltinRegistry] = None) -> Dict[str, ScalingReport]:
    return {
        "model_size": scaling_by_model_size(typed, catalogue, model_sizes, metric, clock, builtins),
        "library_size": scaling_by_library_size(typed, catalogue, library_sizes, 3, metric, clock, builtins),
    }
