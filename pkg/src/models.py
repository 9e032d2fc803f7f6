from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, PositiveInt, model_validator


class FrozenModel(BaseModel):
    """Immutable, hashable model"""
    model_config = ConfigDict(frozen=True)


# =======================================================#
# Property-language terms

class BoolLit(FrozenModel):
    kind: Literal["bool"] = "bool"
    value: bool


class Var(FrozenModel):
    kind: Literal["var"] = "var"
    name: str


class Lambda(FrozenModel):
    """Lambda abstraction; `bound` is the interface a container parameter must implement"""
    kind: Literal["lambda"] = "lambda"
    param: str
    body: "Term"
    bound: Optional[str] = None


class App(FrozenModel):
    kind: Literal["app"] = "app"
    fn: "Term"
    arg: "Term"


Term = Annotated[Union[BoolLit, Var, Lambda, App], Field(discriminator="kind")]

Lambda.model_rebuild()
App.model_rebuild()


def apply(fn: Any, *args: Any) -> App:
    """Build a left-nested application `fn a1 a2 ...`"""
    term = fn
    for arg in args:
        term = App(fn=term, arg=arg)
    return term


# =======================================================#
# Types

class BoolT(FrozenModel):
    kind: Literal["bool"] = "bool"

    def __str__(self) -> str:
        return "Bool"


class TypeVar(FrozenModel):
    kind: Literal["tvar"] = "tvar"
    name: str

    def __str__(self) -> str:
        return self.name


class Ground(FrozenModel):
    """A ground element type, e.g. Size"""
    kind: Literal["ground"] = "ground"
    name: str

    def __str__(self) -> str:
        return self.name


class Con(FrozenModel):
    kind: Literal["con"] = "con"
    elem: "SpecType"

    @model_validator(mode="after")
    def _first_order(self) -> "Con":
        if isinstance(self.elem, Arrow):
            raise ValueError("container elements cannot be functions")
        return self

    def __str__(self) -> str:
        return f"Con<{self.elem}>"


class PairT(FrozenModel):
    kind: Literal["pair"] = "pair"
    first: "SpecType"
    second: "SpecType"

    def __str__(self) -> str:
        return f"({self.first}, {self.second})"


class Arrow(FrozenModel):
    kind: Literal["arrow"] = "arrow"
    from_type: "SpecType"
    to_type: "SpecType"

    def __str__(self) -> str:
        left = f"({self.from_type})" if isinstance(self.from_type, Arrow) else str(self.from_type)
        return f"{left} -> {self.to_type}"


class BoundedForall(FrozenModel):
    """Type scheme; only ever appears at the outermost level of a built-in's type"""
    kind: Literal["forall"] = "forall"
    variables: Tuple[str, ...]
    bounds: Tuple[str, ...] = ()
    body: "SpecType"

    def __str__(self) -> str:
        bound = f" <: {', '.join(self.bounds)}" if self.bounds else ""
        return f"forall {' '.join(self.variables)}{bound}. {self.body}"


SpecType = Annotated[
    Union[BoolT, TypeVar, Ground, Con, PairT, Arrow, BoundedForall], Field(discriminator="kind")
]

Con.model_rebuild()
PairT.model_rebuild()
Arrow.model_rebuild()
BoundedForall.model_rebuild()

BOOL = BoolT()
SIZE = Ground(name="Size")


def arrow(*types: Any) -> Any:
    """Right-nested function type t1 -> t2 -> ... -> tn"""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Arrow(from_type=t, to_type=result)
    return result


# =======================================================#
# Property specifications

class Refinement(FrozenModel):
    conjuncts: Tuple[Term, ...] = Field(min_length=1)


class PropertyDef(FrozenModel):
    kind: Literal["property"] = "property"
    name: str
    bound: Optional[str] = None
    body: Term


class ContainerTypeDecl(FrozenModel):
    kind: Literal["type"] = "type"
    name: str
    elem_param: str
    var: str
    bounds: Tuple[str, ...] = ()
    refinement: Refinement

    @model_validator(mode="after")
    def _distinct_bounds(self) -> "ContainerTypeDecl":
        if len(set(self.bounds)) != len(self.bounds):
            raise ValueError(f"duplicate bounds in {self.name}")
        return self


Declaration = Annotated[Union[PropertyDef, ContainerTypeDecl], Field(discriminator="kind")]


class SpecFile(FrozenModel):
    declarations: Tuple[Declaration, ...] = ()

    @property
    def properties(self) -> List[PropertyDef]:
        return [d for d in self.declarations if isinstance(d, PropertyDef)]

    @property
    def types(self) -> List[ContainerTypeDecl]:
        return [d for d in self.declarations if isinstance(d, ContainerTypeDecl)]

    def get_property(self, name: str) -> Optional[PropertyDef]:
        for prop in self.properties:
            if prop.name == name:
                return prop
        return None

    def get_type(self, name: str) -> Optional[ContainerTypeDecl]:
        for decl in self.types:
            if decl.name == name:
                return decl
        return None


class TypedSpec(FrozenModel):
    """A type-checked specification with the inferred type of every property"""
    spec: SpecFile
    property_types: Dict[str, SpecType]


# =======================================================#
# Interfaces and library specifications

class OpShape(str, Enum):
    """Operation shapes an interface signature may use"""
    MUTATOR_ELEM_UNIT = "mutator(elem)->unit"
    OBSERVER_ELEM_BOOL = "observer(elem)->bool"
    OBSERVER_BOOL = "observer()->bool"
    OBSERVER_SIZE = "observer()->size"
    MUTATOR_ELEM_ELEM = "mutator(elem)->elem?"
    MUTATOR_UNIT = "mutator()->unit"
    OBSERVER_INDEX_ELEM = "observer(index)->elem?"
    OBSERVER_ELEM = "observer()->elem?"
    MUTATOR_ELEM = "mutator()->elem?"

    @property
    def is_mutator(self) -> bool:
        return self.value.startswith("mutator")

    @property
    def argument(self) -> Optional[str]:
        """'elem', 'index' or None"""
        inner = self.value[self.value.index("(") + 1:self.value.index(")")]
        return inner or None

    @property
    def result(self) -> str:
        return self.value.split("->")[1]

    @property
    def returns_value(self) -> bool:
        return self.result != "unit"


class AuxKind(str, Enum):
    ELEM = "elem"
    INDEX = "index"


class AuxInput(FrozenModel):
    name: str
    kind: AuxKind


class OperationSig(FrozenModel):
    name: str
    shape: OpShape


class InterfaceSig(FrozenModel):
    name: str
    operations: Tuple[OperationSig, ...]

    @model_validator(mode="after")
    def _unique_ops(self) -> "InterfaceSig":
        names = [op.name for op in self.operations]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate operation names in interface {self.name}")
        return self

    def op_names(self) -> List[str]:
        return [op.name for op in self.operations]

    def get(self, name: str) -> Optional[OperationSig]:
        for op in self.operations:
            if op.name == name:
                return op
        return None


class HoareSpec(FrozenModel):
    """{pre} op {xs = post_model_op xs0 aux}; pre ranges over xs0 and the aux inputs"""
    op: str
    shape: OpShape
    pre: Term
    post_model_op: str
    aux_inputs: Tuple[AuxInput, ...] = ()


class ContainerSpec(FrozenModel):
    name: str
    interfaces: Tuple[str, ...]
    triples: Dict[str, HoareSpec]
    invariant_pre: Term = BoolLit(value=True)
    model_ops: Dict[str, Term] = Field(default_factory=dict)


class OpClause(FrozenModel):
    """`op <name> pre <term> post <model-op>` as written in a .cts file"""
    name: str
    pre: Term
    post: str
    line: int = 0


class ContainerDeclaration(FrozenModel):
    """Unresolved container entry of a .cts file"""
    name: str
    interfaces: Tuple[str, ...]
    invariant: Term = BoolLit(value=True)
    ops: Tuple[OpClause, ...] = ()
    model_ops: Dict[str, Term] = Field(default_factory=dict)
    line: int = 0
    source: Optional[str] = None


class CatalogueFile(FrozenModel):
    interfaces: Tuple[InterfaceSig, ...] = ()
    containers: Tuple[ContainerDeclaration, ...] = ()


class Catalogue(FrozenModel):
    containers: Tuple[ContainerSpec, ...] = ()
    interfaces: Dict[str, InterfaceSig] = Field(default_factory=dict)

    def names(self) -> List[str]:
        return [c.name for c in self.containers]

    def get(self, name: str) -> Optional[ContainerSpec]:
        for container in self.containers:
            if container.name == name:
                return container
        return None

    def subset(self, names: List[str]) -> "Catalogue":
        """Catalogue restricted to the given containers"""
        return Catalogue(
            containers=tuple(c for c in self.containers if c.name in names),
            interfaces=self.interfaces,
        )


class DiagnosticKind(str, Enum):
    NON_PRESERVING = "NonPreserving"
    VACUOUS_PRE = "VacuousPre"
    NONDETERMINISTIC_MODEL_OP = "NondeterministicModelOp"
    PARTIAL_MODEL_OP = "PartialModelOp"


class Diagnostic(FrozenModel):
    kind: DiagnosticKind
    op: str
    detail: str = ""


class SharedSpecGroup(FrozenModel):
    """Implementations that agree on every interface they share"""
    members: Tuple[str, ...]
    shared_interfaces: Tuple[str, ...]
    member_only: Dict[str, Tuple[str, ...]] = Field(default_factory=dict)


# =======================================================#
# Selection

class CheckConfig(FrozenModel):
    model_size: NonNegativeInt = 3
    domain_size: PositiveInt = 4
    budget_secs: PositiveFloat = 30.0
    workers: PositiveInt = 1

    @model_validator(mode="after")
    def _domain_covers_witnesses(self) -> "CheckConfig":
        # k list elements plus one auxiliary element need k+1 distinct values
        if self.domain_size < self.model_size + 1:
            raise ValueError(
                f"domain size {self.domain_size} cannot represent every witness at model size {self.model_size}"
            )
        return self


class VerdictKind(str, Enum):
    VALID = "valid"
    INVALID = "invalid"
    VACUOUS = "vacuous"
    TIMEOUT = "timeout"


class CounterexampleTrace(FrozenModel):
    op: str
    property: str
    xs0: Tuple[int, ...]
    aux: Tuple[int, ...] = ()
    xs: Tuple[int, ...]


class Verdict(FrozenModel):
    kind: VerdictKind
    property: str
    op: str
    counterexample: Optional[CounterexampleTrace] = None
    cases: int = 0

    @property
    def is_valid(self) -> bool:
        return self.kind == VerdictKind.VALID


class CandidateResult(FrozenModel):
    container: str
    verdicts: Tuple[Verdict, ...] = ()
    valid: bool
    reasons: Tuple[str, ...] = ()
    cases_enumerated: int = 0


class DeclSelection(FrozenModel):
    decl: str
    bounds: Tuple[str, ...]
    syntactic_candidates: Tuple[str, ...]
    candidates: Tuple[CandidateResult, ...]
    valid: Tuple[str, ...]


class SelectionReport(FrozenModel):
    check_config: CheckConfig
    selections: Tuple[DeclSelection, ...] = ()

    def valid_for(self, decl_name: str) -> List[str]:
        for selection in self.selections:
            if selection.decl == decl_name:
                return list(selection.valid)
        raise KeyError(decl_name)

    def get_selection(self, decl_name: str) -> Optional[DeclSelection]:
        for selection in self.selections:
            if selection.decl == decl_name:
                return selection
        return None

    @property
    def timed_out(self) -> bool:
        """Whether any verdict depends on the time budget"""
        return any(
            verdict.kind == VerdictKind.TIMEOUT
            for selection in self.selections
            for candidate in selection.candidates
            for verdict in candidate.verdicts
        )


class ScalingPoint(FrozenModel):
    model_size: int
    library_size: int
    seconds: float
    cases: int


class ScalingReport(FrozenModel):
    points: Tuple[ScalingPoint, ...]
    slope: float = 0.0
    intercept: float = 0.0
    r_squared: float = 0.0


# =======================================================#
# Conformance

class SetupStep(FrozenModel):
    op: str
    arg: Optional[int] = None


class TestCase(FrozenModel):
    __test__ = False  # not a pytest class

    implementation: str
    op: str
    index: int
    seed: int
    setup: Tuple[SetupStep, ...] = ()
    aux: Tuple[int, ...] = ()
    generator_version: int


class FailureKind(str, Enum):
    SIMULATION = "simulation"
    INVARIANT_VIOLATION = "invariant_violation"
    EXCEPTION = "exception"


class CaseFailure(FrozenModel):
    case: TestCase
    kind: FailureKind
    expected: Any = None
    actual: Any = None
    detail: str = ""


class OpConformance(FrozenModel):
    implementation: str
    op: str
    cases_run: int
    failures: Tuple[CaseFailure, ...] = ()


class ConformanceReport(FrozenModel):
    seed: int
    cases_per_op: int
    results: Tuple[OpConformance, ...] = ()
    generator_errors: Tuple[str, ...] = ()

    @property
    def total_cases(self) -> int:
        return sum(r.cases_run for r in self.results)

    @property
    def failures(self) -> List[CaseFailure]:
        return [f for r in self.results for f in r.failures]

    @property
    def passed(self) -> bool:
        return not self.failures and not self.generator_errors


# =======================================================#
# Code generation and ranking

class ProjectManifest(FrozenModel):
    """Application sources plus the .prs file declaring each container type"""
    sources: Tuple[str, ...]
    types: Dict[str, str]


class TypeBinding(FrozenModel):
    """One declared container type resolved to an implementation"""
    decl_name: str
    implementation: str
    exposed_ops: Tuple[str, ...]


class GenerationPlan(FrozenModel):
    """The varied type is `decl_name`; `others` fix the remaining declared types of the project"""
    source_files: Tuple[str, ...]
    decl_name: str
    implementation: str
    exposed_ops: Tuple[str, ...]
    others: Tuple[TypeBinding, ...] = ()

    @property
    def bindings(self) -> Tuple[TypeBinding, ...]:
        varied = TypeBinding(decl_name=self.decl_name, implementation=self.implementation,
                             exposed_ops=self.exposed_ops)
        return (varied,) + self.others


class GeneratedProject(FrozenModel):
    plan: GenerationPlan
    out_dir: str
    files: Tuple[str, ...]
    wrapper_module: str


class BenchmarkPhase(FrozenModel):
    """Operation counts per phase, as multiples of the input size"""
    name: str
    insert: float = 0.0
    contains: float = 0.0
    remove: float = 0.0
    access: float = 0.0


class BenchmarkDescriptor(FrozenModel):
    workload: str
    phases: Tuple[BenchmarkPhase, ...] = Field(min_length=1)
    sizes: Tuple[PositiveInt, ...] = Field(min_length=1)
    duplication_rate: float = Field(default=0.0, ge=0.0, lt=1.0)
    repetitions: int = Field(default=3, ge=3)
    seed: int = 0


class RankingEntry(FrozenModel):
    implementation: str
    size: int
    median_secs: float
    dispersion_secs: float


class RankingReport(FrozenModel):
    workload: str
    entries: Tuple[RankingEntry, ...] = ()
    ordering: Tuple[str, ...] = ()
    excluded: Dict[str, str] = Field(default_factory=dict)
    # reserved for further metrics such as memory
    extra_metrics: Dict[str, Any] = Field(default_factory=dict)
    raw_timings_path: Optional[str] = None


# =======================================================#
# Run configuration

class RunMode(str, Enum):
    SELECT = "select"
    SELECT_GENERATE = "select+generate"
    SELECT_GENERATE_RANK = "select+generate+rank"


class RunConfig(BaseModel):
    spec_path: Optional[str] = None
    catalogue_paths: List[str]
    model_size: NonNegativeInt = 3
    domain_size: PositiveInt = 4
    budget_secs: PositiveFloat = 30.0
    mode: RunMode = RunMode.SELECT
    cache_dir: str
    use_cache: bool = True
    bench_path: Optional[str] = None
    out_dir: str = "generated"
    report_path: str = "selection_report.json"
    seed: int = 0
    quiet: bool = False
    workers: PositiveInt = 1

    def check_config(self) -> CheckConfig:
        return CheckConfig(
            model_size=self.model_size,
            domain_size=self.domain_size,
            budget_secs=self.budget_secs,
            workers=self.workers,
        )
