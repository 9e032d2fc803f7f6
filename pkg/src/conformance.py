"""Forward-simulation testing of the executable containers against their catalogue entries.

For a container ``c`` built by a random sequence of operations, every case checks
``abstract(op(c, aux)) == model_op(abstract(c), aux)``, packing returned values
into the model's (list, result) pair shape.
"""

import hashlib
import random
from typing import Any, Dict, List, Mapping, Optional, Tuple, Type

from .config import ConformanceDefaults
from .containers import IMPLEMENTATIONS, ContainerT
from .errors import GeneratorError, GeneratorVersionMismatch
from .library_spec import SpecSemantics
from .model_dsl import NULL, BuiltinRegistry, Evaluator, Pair, render_value
from .models import (CaseFailure, Catalogue, ConformanceReport, ContainerSpec, FailureKind, HoareSpec,
                     OpConformance, SetupStep, TestCase)


ImplementationMap = Mapping[str, Type[ContainerT]]


def case_seed(seed: int, implementation: str, op: str, index: int) -> int:
    """Stable per-case seed so any single case can be regenerated on its own"""
    digest = hashlib.sha256(f"{seed}:{implementation}:{op}:{index}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def setup_operations(spec: ContainerSpec) -> List[HoareSpec]:
    """Mutators used to build states: those taking an element, plus pop-like ones returning a value"""
    ops = []
    for triple in spec.triples.values():
        shape = triple.shape
        if shape.is_mutator and (shape.argument == "elem" or (shape.argument is None and shape.returns_value)):
            ops.append(triple)
    return ops


def to_model(value: Any) -> Any:
    """Model value of a result returned by an implementation"""
    if value is None:
        return NULL
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return value


class CaseGenerator:
    """Draws setup sequences and auxiliary inputs from a per-case random stream"""

    def __init__(self, spec: ContainerSpec, version: int = ConformanceDefaults.GENERATOR_VERSION):
        self.spec = spec
        self.version = version
        self.setup_ops = setup_operations(spec)

        # insert-like steps are drawn more often so states grow
        self.weights = [1 if t.shape.returns_value else 3 for t in self.setup_ops]

    def _element(self, rng: random.Random) -> int:
        return rng.randrange(ConformanceDefaults.ELEMENT_RANGE)

    def _step(self, triple: HoareSpec, rng: random.Random) -> SetupStep:
        if triple.shape.argument == "elem":
            return SetupStep(op=triple.op, arg=self._element(rng))
        return SetupStep(op=triple.op)

    def draw_setup(self, index: int, attempt: int, rng: random.Random) -> Tuple[SetupStep, ...]:
        if not self.setup_ops:
            return ()
        if attempt == 0 and index == 0:
            return ()
        if attempt == 0 and index == 1:
            inserts = [t for t in self.setup_ops if t.shape.argument == "elem"]
            preferred = next((t for t in inserts if t.op == "insert"), inserts[0] if inserts else None)
            return (self._step(preferred, rng),) if preferred is not None else ()
        length = rng.randint(0, ConformanceDefaults.MAX_SETUP_LENGTH)
        return tuple(self._step(rng.choices(self.setup_ops, self.weights)[0], rng) for _ in range(length))

    def draw_aux(self, triple: HoareSpec, setup: Tuple[SetupStep, ...], rng: random.Random) -> Tuple[int, ...]:
        aux = []
        for item in triple.aux_inputs:
            if item.kind.value == "elem":
                aux.append(self._element(rng))
            else:
                # one past the end and beyond are both exercised
                aux.append(rng.randrange(len(setup) + 2))
        return tuple(aux)


class ConformanceRunner:
    """Runs generated cases for every (implementation, operation) pair"""

    def __init__(self, catalogue: Catalogue, impls: Optional[ImplementationMap] = None,
                 cases_per_op: int = ConformanceDefaults.CASES_PER_OP, seed: int = ConformanceDefaults.SEED,
                 builtins: Optional[BuiltinRegistry] = None, quiet: bool = True):
        self.catalogue = catalogue
        self.impls = dict(IMPLEMENTATIONS if impls is None else impls)
        self.cases_per_op = cases_per_op
        self.seed = seed
        self.builtins = builtins
        self.quiet = quiet
        self._semantics: Dict[str, SpecSemantics] = {}

    def _log(self, message: str) -> None:
        if not self.quiet:
            print(message)

    def semantics(self, name: str) -> SpecSemantics:
        if name not in self._semantics:
            evaluator = Evaluator(range(ConformanceDefaults.ELEMENT_RANGE), self.builtins)
            self._semantics[name] = SpecSemantics(self.catalogue.get(name), evaluator)
        return self._semantics[name]

    # =======================================================#
    # Single cases

    def build(self, cls: Type[ContainerT], setup: Tuple[SetupStep, ...]) -> ContainerT:
        container = cls.new()
        for step in setup:
            method = getattr(container, step.op)
            if step.arg is None:
                method()
            else:
                method(step.arg)
        return container

    def generate_case(self, name: str, op: str, index: int) -> TestCase:
        """Regenerate case `index` of (name, op); GeneratorError if no attempt meets the precondition"""
        cls = self.impls[name]
        semantics = self.semantics(name)
        triple = semantics.spec.triples[op]
        generator = CaseGenerator(semantics.spec)
        seed = case_seed(self.seed, name, op, index)
        rng = random.Random(seed)
        for attempt in range(ConformanceDefaults.MAX_PRE_RETRIES):
            setup = generator.draw_setup(index, attempt, rng)
            aux = generator.draw_aux(triple, setup, rng)
            try:
                state = self.build(cls, setup).abstract()
            except Exception:
                # setup failures surface when the case is executed
                state = None
            if state is None or semantics.pre(op, state, aux):
                return TestCase(implementation=name, op=op, index=index, seed=seed, setup=setup, aux=aux,
                                generator_version=generator.version)
        raise GeneratorError(
            f"{name}.{op}: no state satisfying the precondition after "
            f"{ConformanceDefaults.MAX_PRE_RETRIES} attempts (case {index})"
        )

    def execute(self, case: TestCase) -> Optional[CaseFailure]:
        """None when the case passes"""
        cls = self.impls[case.implementation]
        semantics = self.semantics(case.implementation)
        triple = semantics.spec.triples[case.op]

        def failure(kind: FailureKind, detail: str, expected: Any = None, actual: Any = None) -> CaseFailure:
            return CaseFailure(case=case, kind=kind, expected=expected, actual=actual, detail=detail)

        try:
            container = self.build(cls, case.setup)
            before = container.abstract()
        except Exception as e:
            return failure(FailureKind.EXCEPTION, f"setup raised {type(e).__name__}: {e}")
        if not semantics.invariant(before):
            return failure(FailureKind.INVARIANT_VIOLATION, "state before the operation breaks the invariant",
                           actual=render_value(before))

        expected = semantics.post(case.op, before, case.aux)
        try:
            result = getattr(container, case.op)(*case.aux)
            after = container.abstract()
        except Exception as e:
            return failure(FailureKind.EXCEPTION, f"{case.op} raised {type(e).__name__}: {e}",
                           expected=render_value(expected))

        actual = Pair(after, to_model(result)) if triple.shape.returns_value else after
        if not semantics.invariant(after):
            return failure(FailureKind.INVARIANT_VIOLATION, "state after the operation breaks the invariant",
                           expected=render_value(expected), actual=render_value(actual))
        if actual != expected:
            return failure(FailureKind.SIMULATION, f"abstract({case.op}(c)) differs from {triple.post_model_op}",
                           expected=render_value(expected), actual=render_value(actual))
        return None

    # =======================================================#
    # Whole catalogue

    def run_op(self, name: str, op: str) -> OpConformance:
        failures = []
        for index in range(self.cases_per_op):
            failure = self.execute(self.generate_case(name, op, index))
            if failure is not None:
                failures.append(failure)
        return OpConformance(implementation=name, op=op, cases_run=self.cases_per_op, failures=tuple(failures))

    def run(self) -> ConformanceReport:
        results: List[OpConformance] = []
        generator_errors: List[str] = []
        for name in sorted(self.impls):
            spec = self.catalogue.get(name)
            if spec is None:
                generator_errors.append(f"{name}: no catalogue entry")
                self._log(f"⚠️  {name}: no catalogue entry, skipped")
                continue
            self._log(f"📋 Testing {name}")
            for op in sorted(spec.triples):
                if not callable(getattr(self.impls[name], op, None)):
                    generator_errors.append(f"{name}.{op}: implementation has no such operation")
                    continue
                try:
                    result = self.run_op(name, op)
                except GeneratorError as e:
                    generator_errors.append(str(e))
                    self._log(f"⚠️  {e}")
                    continue
                results.append(result)
                if result.failures:
                    self._log(f"❌ {name}.{op}: {len(result.failures)} of {result.cases_run} cases failed")
        report = ConformanceReport(seed=self.seed, cases_per_op=self.cases_per_op, results=tuple(results),
                                   generator_errors=tuple(generator_errors))
        if report.passed:
            self._log(f"✅ {report.total_cases} cases passed")
        return report


def run_conformance(catalogue: Catalogue, impls: Optional[ImplementationMap] = None,
                    cases_per_op: int = ConformanceDefaults.CASES_PER_OP, seed: int = ConformanceDefaults.SEED,
                    builtins: Optional[BuiltinRegistry] = None, quiet: bool = True) -> ConformanceReport:
    """Forward-simulation cases for every (implementation, operation); deterministic given `seed`"""
    return ConformanceRunner(catalogue, impls, cases_per_op, seed, builtins, quiet).run()


def replay(case: TestCase, catalogue: Catalogue, impls: Optional[ImplementationMap] = None,
           builtins: Optional[BuiltinRegistry] = None) -> Optional[CaseFailure]:
    """Re-execute one case; None means it passes"""
    if case.generator_version != ConformanceDefaults.GENERATOR_VERSION:
        raise GeneratorVersionMismatch(ConformanceDefaults.GENERATOR_VERSION, case.generator_version)
    return ConformanceRunner(catalogue, impls, builtins=builtins).execute(case)
