from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .config import CheckDefaults, Paths
from .errors import (EvaluationError, LoadError, LoadErrorList, ParseErrorList, SpecTypeError)
from .model_dsl import (BuiltinRegistry, Evaluator, Pair, aux_assignments, default_registry,
                        enumerate_models, host_function, render_value)
from .models import (AuxInput, AuxKind, BoolLit, Catalogue, CatalogueFile, ContainerDeclaration,
                     ContainerSpec, Diagnostic, DiagnosticKind, HoareSpec, InterfaceSig, SharedSpecGroup,
                     Var)
from .spec_parser import format_term, parse_catalogue_file
from .type_checker import INVARIANT_TYPE, MODEL_OP_TYPES, TypeChecker, pre_type


PathLike = Union[str, Path]


class CatalogueLoader:
    """Reads .cts files into a resolved, type-checked Catalogue"""

    def __init__(self, builtins: Optional[BuiltinRegistry] = None, quiet: bool = True):
        self.builtins = builtins or default_registry()
        self.quiet = quiet

        # auxiliary input names per shape argument
        self.aux_names = {
            "elem": "x",
            "index": "n",
        }

    def _log(self, message: str) -> None:
        if not self.quiet:
            print(message)

    def read_directory(self, path: PathLike) -> List[Tuple[str, CatalogueFile]]:
        """Parse interfaces.cts first, then every other .cts file in name order"""
        directory = Path(path)
        files = sorted(directory.glob(f"*{Paths.CATALOGUE_SUFFIX}"),
                       key=lambda p: (p.name != Paths.INTERFACES_FILE, p.name))
        parsed = []
        errors: List[LoadError] = []
        for file in files:
            try:
                text = file.read_text(encoding="utf-8")
                parsed.append((str(file), parse_catalogue_file(text, source=str(file))))
            except ParseErrorList as e:
                errors.extend(LoadError(str(err)) for err in e.errors)
        if errors:
            raise LoadErrorList(errors)
        return parsed

    def load(self, *paths: PathLike) -> Catalogue:
        errors: List[LoadError] = []
        parsed: List[Tuple[str, CatalogueFile]] = []
        for path in paths:
            self._log(f"📋 Reading catalogue directory: {path}")
            if not Path(path).is_dir():
                errors.append(LoadError(f"catalogue directory '{path}' does not exist"))
                continue
            try:
                parsed.extend(self.read_directory(path))
            except LoadErrorList as e:
                errors.extend(e.errors)
        if errors:
            raise LoadErrorList(errors)

        interfaces: Dict[str, InterfaceSig] = {}
        for source, file in parsed:
            for sig in file.interfaces:
                existing = interfaces.get(sig.name)
                if existing is not None and existing != sig:
                    errors.append(LoadError(f"interface '{sig.name}' redefined differently in {source}"))
                    continue
                interfaces[sig.name] = sig

        containers: Dict[str, ContainerSpec] = {}
        for source, file in parsed:
            for decl in file.containers:
                if decl.name in containers:
                    errors.append(LoadError(f"duplicate container name (again in {source})", decl.name))
                    continue
                try:
                    containers[decl.name] = self.resolve(decl, interfaces)
                except LoadErrorList as e:
                    errors.extend(e.errors)
        if errors:
            raise LoadErrorList(errors)

        catalogue = Catalogue(
            containers=tuple(containers[name] for name in sorted(containers)),
            interfaces=dict(sorted(interfaces.items())),
        )
        self._log(f"✅ Loaded {len(catalogue.containers)} container specifications "
                  f"and {len(catalogue.interfaces)} interfaces")
        return catalogue

    def resolve(self, decl: ContainerDeclaration, interfaces: Dict[str, InterfaceSig]) -> ContainerSpec:
        """Attach shapes to the op clauses and check completeness and types"""
        errors: List[LoadError] = []
        shapes = {}
        for name in decl.interfaces:
            sig = interfaces.get(name)
            if sig is None:
                errors.append(LoadError(f"implements unknown interface '{name}'", decl.name))
                continue
            for op in sig.operations:
                if op.name in shapes and shapes[op.name] != op.shape:
                    errors.append(LoadError(f"operation '{op.name}' has conflicting shapes", decl.name))
                shapes[op.name] = op.shape

        clauses = {op.name: op for op in decl.ops}
        for name in clauses:
            if name not in shapes:
                errors.append(LoadError(f"triple for '{name}', which no implemented interface declares", decl.name))
        for name in shapes:
            if name not in clauses:
                errors.append(LoadError(f"incomplete specification: no triple for '{name}'", decl.name))

        checker = TypeChecker(interfaces, self.builtins)
        for model_name, term in decl.model_ops.items():
            try:
                checker.infer_closed(term, where=f"{decl.name} model {model_name}")
            except SpecTypeError as e:
                errors.append(LoadError(str(e), decl.name))
        if not isinstance(decl.invariant, BoolLit):
            try:
                checker.check_against(decl.invariant, INVARIANT_TYPE, where=f"{decl.name} invariant")
            except SpecTypeError as e:
                errors.append(LoadError(str(e), decl.name))

        triples: Dict[str, HoareSpec] = {}
        for name, clause in clauses.items():
            shape = shapes.get(name)
            if shape is None:
                continue
            where = f"{decl.name}.{name}"
            if clause.post not in decl.model_ops and clause.post not in self.builtins:
                errors.append(LoadError(f"op '{name}' refers to unknown model operation '{clause.post}'", decl.name))
                continue
            try:
                if not isinstance(clause.pre, BoolLit):
                    checker.check_against(clause.pre, pre_type(shape), where=f"{where} pre")
                post = decl.model_ops.get(clause.post, Var(name=clause.post))
                checker.check_against(post, MODEL_OP_TYPES[shape], where=f"{where} post {clause.post}")
            except SpecTypeError as e:
                errors.append(LoadError(str(e), decl.name))
                continue
            aux = ()
            if shape.argument:
                aux = (AuxInput(name=self.aux_names[shape.argument], kind=AuxKind(shape.argument)),)
            triples[name] = HoareSpec(op=name, shape=shape, pre=clause.pre, post_model_op=clause.post,
                                      aux_inputs=aux)
        if errors:
            raise LoadErrorList(errors)
        return ContainerSpec(
            name=decl.name,
            interfaces=decl.interfaces,
            triples=dict(sorted(triples.items())),
            invariant_pre=decl.invariant,
            model_ops=decl.model_ops,
        )


def load_catalogue(*paths: PathLike, builtins: Optional[BuiltinRegistry] = None, quiet: bool = True) -> Catalogue:
    """Load and resolve every .cts file under the given directories"""
    return CatalogueLoader(builtins, quiet).load(*paths)


# =======================================================#
# Executable view of a specification

class SpecSemantics:
    """Evaluates one container's invariant, preconditions and model operations"""

    def __init__(self, spec: ContainerSpec, evaluator: Evaluator):
        self.spec = spec
        self.ev = evaluator
        self.local_ops = {name: evaluator.run(term) for name, term in spec.model_ops.items()}
        self._invariant = self._compile(spec.invariant_pre)
        self._pres = {name: self._compile(t.pre) for name, t in spec.triples.items()}
        self._posts = {name: self.model_op(t.post_model_op) for name, t in spec.triples.items()}

    def _compile(self, term) -> Any:
        if isinstance(term, BoolLit):
            return term.value
        return self.ev.run(term)

    def model_op(self, name: str) -> Any:
        if name in self.local_ops:
            return self.local_ops[name]
        return self.ev.run(Var(name=name))

    def invariant(self, xs: Tuple[int, ...]) -> bool:
        if isinstance(self._invariant, bool):
            return self._invariant
        return self.ev.invoke(self._invariant, xs) is True

    def pre(self, op: str, xs: Tuple[int, ...], aux: Sequence[int] = ()) -> bool:
        pre = self._pres[op]
        if isinstance(pre, bool):
            return pre
        return self.ev.invoke(pre, xs, *aux) is True

    def post(self, op: str, xs: Tuple[int, ...], aux: Sequence[int] = ()) -> Any:
        """Output of the model operation: a list, or a (list, result) Pair"""
        return self.ev.invoke(self._posts[op], xs, *aux)

    def post_state(self, op: str, xs: Tuple[int, ...], aux: Sequence[int] = ()) -> Tuple[int, ...]:
        result = self.post(op, xs, aux)
        return result.first if isinstance(result, Pair) else result

    def projection(self, op: str) -> Any:
        """The operation as seen from a bounded property: the value it yields"""
        triple = self.spec.triples[op]
        post = self._posts[op]
        ev = self.ev

        def project(xs, *aux):
            result = ev.call(post, xs, *aux)
            if triple.shape.returns_value:
                return result.second
            return result

        return host_function(op, 1 + len(triple.aux_inputs), project)

    def projections(self, interfaces: Iterable[str], catalogue: Catalogue) -> Dict[str, Any]:
        env = {}
        for name in interfaces:
            for op in catalogue.interfaces[name].operations:
                if op.name in self.spec.triples:
                    env[op.name] = self.projection(op.name)
        return env


# =======================================================#
# Validation

def validate_spec(spec: ContainerSpec, k: int = CheckDefaults.MODEL_SIZE, domain_size: Optional[int] = None,
                  builtins: Optional[BuiltinRegistry] = None) -> List[Diagnostic]:
    """Bounded checks of one specification: totality and determinism of model operations,
    preservation of the invariant and satisfiability of every precondition"""
    m = domain_size or k + 1
    semantics = SpecSemantics(spec, Evaluator(range(m), builtins))
    diagnostics: List[Diagnostic] = []
    for op, triple in spec.triples.items():
        kinds = [a.kind.value for a in triple.aux_inputs]
        satisfiable = False
        problem: Optional[Diagnostic] = None
        for xs0 in enumerate_models(k, m):
            if not semantics.invariant(xs0):
                continue
            for aux in aux_assignments(kinds, k, m):
                if not semantics.pre(op, xs0, aux):
                    continue
                satisfiable = True
                try:
                    first = semantics.post(op, xs0, aux)
                    second = semantics.post(op, xs0, aux)
                except EvaluationError as e:
                    problem = Diagnostic(kind=DiagnosticKind.PARTIAL_MODEL_OP, op=op,
                                         detail=f"xs0={list(xs0)} aux={list(aux)}: {e}")
                    break
                if first != second:
                    problem = Diagnostic(kind=DiagnosticKind.NONDETERMINISTIC_MODEL_OP, op=op,
                                         detail=f"xs0={list(xs0)} aux={list(aux)}")
                    break
                state = first.first if isinstance(first, Pair) else first
                if not semantics.invariant(state):
                    problem = Diagnostic(kind=DiagnosticKind.NON_PRESERVING, op=op,
                                         detail=f"xs0={list(xs0)} aux={list(aux)} xs={render_value(state)}")
                    break
            if problem is not None:
                break
        if problem is not None:
            diagnostics.append(problem)
        elif not satisfiable:
            diagnostics.append(Diagnostic(kind=DiagnosticKind.VACUOUS_PRE, op=op,
                                          detail=f"no state of length <= {k} satisfies the precondition"))
    return diagnostics


def validate_catalogue(catalogue: Catalogue, k: int = CheckDefaults.MODEL_SIZE,
                       builtins: Optional[BuiltinRegistry] = None) -> Dict[str, List[Diagnostic]]:
    return {spec.name: validate_spec(spec, k, builtins=builtins) for spec in catalogue.containers}


# =======================================================#
# Shared specifications

def _interface_signature(spec: ContainerSpec, catalogue: Catalogue, interface: str) -> Tuple:
    """What a container promises for one interface: its invariant plus the triples of its ops"""
    triples = []
    for op in catalogue.interfaces[interface].operations:
        triple = spec.triples[op.name]
        definition = spec.model_ops.get(triple.post_model_op)
        triples.append((triple.op, format_term(triple.pre), triple.post_model_op,
                        format_term(definition) if definition is not None else None))
    return format_term(spec.invariant_pre), tuple(triples)


def _agree(a: ContainerSpec, b: ContainerSpec, catalogue: Catalogue) -> bool:
    shared = set(a.interfaces) & set(b.interfaces)
    if not shared:
        return False
    return all(_interface_signature(a, catalogue, i) == _interface_signature(b, catalogue, i) for i in shared)


def shared_spec_instances(catalogue: Catalogue) -> List[SharedSpecGroup]:
    """Group implementations that share one specification on every interface they have in common"""
    names = catalogue.names()
    parent = {name: name for name in names}

    def find(name: str) -> str:
        while parent[name] != name:
            parent[name] = parent[parent[name]]
            name = parent[name]
        return name

    for i, a in enumerate(catalogue.containers):
        for b in catalogue.containers[i + 1:]:
            if _agree(a, b, catalogue):
                parent[find(b.name)] = find(a.name)

    groups: Dict[str, List[str]] = {}
    for name in names:
        groups.setdefault(find(name), []).append(name)

    result = []
    for members in groups.values():
        specs = [catalogue.get(name) for name in members]
        shared = set(specs[0].interfaces)
        for spec in specs[1:]:
            shared &= set(spec.interfaces)
        member_only = {
            spec.name: tuple(i for i in spec.interfaces if i not in shared)
            for spec in specs if set(spec.interfaces) - shared
        }
        result.append(SharedSpecGroup(
            members=tuple(members),
            shared_interfaces=tuple(i for i in specs[0].interfaces if i in shared),
            member_only=member_only,
        ))
    return sorted(result, key=lambda g: g.members)
