from typing import Dict, List, Mapping, Optional, Set, Tuple

from .errors import (OperationOutsideBound, PropertyBodyNotPredicate, SpecTypeError, TypeErrorList,
                     TypeMismatch, UnboundVariable, UnknownInterface)
from .model_dsl import BuiltinRegistry, default_registry
from .models import (App, Arrow, BOOL, BoolLit, BoolT, BoundedForall, Con, ContainerTypeDecl, Ground,
                     InterfaceSig, Lambda, OpShape, PairT, PropertyDef, SIZE, SpecFile, TypedSpec,
                     TypeVar, Var, arrow)


InterfaceRegistry = Mapping[str, InterfaceSig]

_ELEM = TypeVar(name="a")
_CON = Con(elem=_ELEM)


def _pair(t) -> PairT:
    return PairT(first=_CON, second=t)


# Type of an interface operation used inside a bounded property: the value it yields
VALUE_TYPES = {
    OpShape.MUTATOR_ELEM_UNIT: arrow(_CON, _ELEM, _CON),
    OpShape.OBSERVER_ELEM_BOOL: arrow(_CON, _ELEM, BOOL),
    OpShape.OBSERVER_BOOL: arrow(_CON, BOOL),
    OpShape.OBSERVER_SIZE: arrow(_CON, SIZE),
    OpShape.MUTATOR_ELEM_ELEM: arrow(_CON, _ELEM, _ELEM),
    OpShape.MUTATOR_UNIT: arrow(_CON, _CON),
    OpShape.OBSERVER_INDEX_ELEM: arrow(_CON, SIZE, _ELEM),
    OpShape.OBSERVER_ELEM: arrow(_CON, _ELEM),
    OpShape.MUTATOR_ELEM: arrow(_CON, _ELEM),
}

# Type a model operation must have to specify an operation of the given shape
MODEL_OP_TYPES = {
    OpShape.MUTATOR_ELEM_UNIT: arrow(_CON, _ELEM, _CON),
    OpShape.OBSERVER_ELEM_BOOL: arrow(_CON, _ELEM, _pair(BOOL)),
    OpShape.OBSERVER_BOOL: arrow(_CON, _pair(BOOL)),
    OpShape.OBSERVER_SIZE: arrow(_CON, _pair(SIZE)),
    OpShape.MUTATOR_ELEM_ELEM: arrow(_CON, _ELEM, _pair(_ELEM)),
    OpShape.MUTATOR_UNIT: arrow(_CON, _CON),
    OpShape.OBSERVER_INDEX_ELEM: arrow(_CON, SIZE, _pair(_ELEM)),
    OpShape.OBSERVER_ELEM: arrow(_CON, _pair(_ELEM)),
    OpShape.MUTATOR_ELEM: arrow(_CON, _pair(_ELEM)),
}

AUX_TYPES = {"elem": _ELEM, "index": SIZE}


def as_scheme(t) -> BoundedForall:
    return BoundedForall(variables=("a",), body=t)


def pre_type(shape: OpShape):
    """Precondition over xs0 and the operation's auxiliary input"""
    if shape.argument:
        return arrow(_CON, AUX_TYPES[shape.argument], BOOL)
    return arrow(_CON, BOOL)


INVARIANT_TYPE = arrow(_CON, BOOL)


class TypeChecker:
    """Unification-based inference; lambda parameters are monomorphic and built-in schemes are
    instantiated afresh at every use"""

    def __init__(self, interfaces: InterfaceRegistry, builtins: Optional[BuiltinRegistry] = None):
        self.interfaces = dict(interfaces)
        self.builtins = builtins or default_registry()
        self.substitution: Dict[str, object] = {}
        self.counter = 0
        self.where: Optional[str] = None
        self._element_vars: Set[str] = set()

    # -- substitution -----------------------------------------------------

    def fresh(self) -> TypeVar:
        self.counter += 1
        return TypeVar(name=f"t{self.counter}")

    def resolve(self, t):
        """Apply the current substitution throughout `t`"""
        if isinstance(t, TypeVar):
            if t.name in self.substitution:
                resolved = self.resolve(self.substitution[t.name])
                self.substitution[t.name] = resolved
                return resolved
            return t
        if isinstance(t, Con):
            elem = self.resolve(t.elem)
            if isinstance(elem, Arrow):
                raise TypeMismatch("an element type", elem, self.where,
                                   message=f"container elements cannot be functions: {elem}")
            return Con(elem=elem)
        if isinstance(t, PairT):
            return PairT(first=self.resolve(t.first), second=self.resolve(t.second))
        if isinstance(t, Arrow):
            return Arrow(from_type=self.resolve(t.from_type), to_type=self.resolve(t.to_type))
        return t

    def _occurs(self, name: str, t) -> bool:
        t = self.resolve(t)
        if isinstance(t, TypeVar):
            return t.name == name
        if isinstance(t, Con):
            return self._occurs(name, t.elem)
        if isinstance(t, PairT):
            return self._occurs(name, t.first) or self._occurs(name, t.second)
        if isinstance(t, Arrow):
            return self._occurs(name, t.from_type) or self._occurs(name, t.to_type)
        return False

    def _bind(self, var: TypeVar, t) -> None:
        if isinstance(t, TypeVar) and t.name == var.name:
            return
        if self._occurs(var.name, t):
            raise TypeMismatch(var, self.resolve(t), self.where,
                               message=f"infinite type: {var} occurs in {self.resolve(t)}")
        if isinstance(t, Arrow) and self._is_element_position(var):
            raise TypeMismatch("an element type", t, self.where, message=f"container elements cannot be functions: {t}")
        self.substitution[var.name] = t

    def _is_element_position(self, var: TypeVar) -> bool:
        return var.name in self._element_vars

    def unify(self, expected, actual) -> None:
        a = self.resolve(expected)
        b = self.resolve(actual)
        if isinstance(a, TypeVar):
            self._bind(a, b)
        elif isinstance(b, TypeVar):
            self._bind(b, a)
        elif isinstance(a, BoolT) and isinstance(b, BoolT):
            return
        elif isinstance(a, Ground) and isinstance(b, Ground) and a.name == b.name:
            return
        elif isinstance(a, Con) and isinstance(b, Con):
            self._mark_element(a.elem)
            self._mark_element(b.elem)
            self.unify(a.elem, b.elem)
        elif isinstance(a, PairT) and isinstance(b, PairT):
            self.unify(a.first, b.first)
            self.unify(a.second, b.second)
        elif isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(a.from_type, b.from_type)
            self.unify(a.to_type, b.to_type)
        else:
            raise TypeMismatch(a, b, self.where)

    def _mark_element(self, t) -> None:
        t = self.resolve(t)
        if isinstance(t, TypeVar):
            self._element_vars.add(t.name)
        elif isinstance(t, Arrow):
            raise TypeMismatch("an element type", t, self.where, message=f"container elements cannot be functions: {t}")

    def instantiate(self, scheme):
        if not isinstance(scheme, BoundedForall):
            return scheme
        mapping = {name: self.fresh() for name in scheme.variables}
        return self._rename(scheme.body, mapping)

    def _rename(self, t, mapping):
        if isinstance(t, TypeVar):
            return mapping.get(t.name, t)
        if isinstance(t, Con):
            return Con(elem=self._rename(t.elem, mapping))
        if isinstance(t, PairT):
            return PairT(first=self._rename(t.first, mapping), second=self._rename(t.second, mapping))
        if isinstance(t, Arrow):
            return Arrow(from_type=self._rename(t.from_type, mapping), to_type=self._rename(t.to_type, mapping))
        return t

    # -- inference --------------------------------------------------------

    def _unbound(self, name: str) -> SpecTypeError:
        for iface in sorted(self.interfaces):
            if self.interfaces[iface].get(name) is not None:
                return OperationOutsideBound(name, iface, self.where)
        return UnboundVariable(name, self.where)

    def bound_operations(self, interface: str) -> Dict[str, BoundedForall]:
        sig = self.interfaces.get(interface)
        if sig is None:
            raise UnknownInterface(interface, self.where)
        return {op.name: as_scheme(VALUE_TYPES[op.shape]) for op in sig.operations}

    def infer(self, term, env: Mapping[str, object]):
        if isinstance(term, BoolLit):
            return BOOL
        if isinstance(term, Var):
            if term.name in env:
                return self.instantiate(env[term.name])
            builtin = self.builtins.get(term.name)
            if builtin is None:
                raise self._unbound(term.name)
            return self.instantiate(builtin.scheme)
        if isinstance(term, Lambda):
            param_type = self.fresh()
            inner = dict(env)
            if term.bound is not None:
                inner.update(self.bound_operations(term.bound))
            inner[term.param] = param_type
            body_type = self.infer(term.body, inner)
            return Arrow(from_type=param_type, to_type=body_type)
        if isinstance(term, App):
            fn_type = self.infer(term.fn, env)
            arg_type = self.infer(term.arg, env)
            result = self.fresh()
            self.unify(fn_type, Arrow(from_type=arg_type, to_type=result))
            return result
        raise SpecTypeError(f"not a term: {term!r}", self.where)

    def infer_closed(self, term, env: Optional[Mapping[str, object]] = None, where: Optional[str] = None):
        """Infer and fully resolve the type of `term`"""
        self.where = where
        self._element_vars = set()
        return self.resolve(self.infer(term, env or {}))

    def check_against(self, term, expected, env: Optional[Mapping[str, object]] = None,
                      where: Optional[str] = None) -> None:
        actual = self.infer_closed(term, env, where)
        if not isinstance(expected, BoundedForall):
            expected = as_scheme(expected)
        self.unify(self.instantiate(expected), actual)

    # -- declarations -----------------------------------------------------

    def check_property(self, prop: PropertyDef, properties: Mapping[str, object]):
        """Type of a property body, normalized to Con<T> -> Bool"""
        self.where = f"property {prop.name}"
        self._element_vars = set()
        if prop.bound is not None and prop.bound not in self.interfaces:
            raise UnknownInterface(prop.bound, self.where)
        body_type = self.infer(prop.body, dict(properties))
        elem = self.fresh()
        expected = Arrow(from_type=Con(elem=elem), to_type=BOOL)
        try:
            self.unify(expected, body_type)
        except TypeMismatch:
            raise PropertyBodyNotPredicate(expected, self.resolve(body_type), self.where,
                                           message=f"body has type {self.resolve(body_type)}, not Con<t> -> Bool")
        elem_type = self.resolve(elem)
        if not isinstance(elem_type, TypeVar):
            raise PropertyBodyNotPredicate(
                expected, self.resolve(body_type), self.where,
                message=f"body only accepts Con<{elem_type}>, not every container")
        return arrow(Con(elem=TypeVar(name="T")), BOOL)

    def check_type_decl(self, decl: ContainerTypeDecl, properties: Mapping[str, PropertyDef],
                        property_types: Mapping[str, object]) -> List[SpecTypeError]:
        self.where = f"type {decl.name}"
        errors: List[SpecTypeError] = []
        env: Dict[str, object] = {}
        for bound in decl.bounds:
            if bound not in self.interfaces:
                errors.append(UnknownInterface(bound, self.where))
                continue
            env.update(self.bound_operations(bound))
        env.update({name: as_scheme(self._rename(t, {"T": _ELEM})) for name, t in property_types.items()})
        env[decl.var] = Con(elem=Ground(name=decl.elem_param))
        for conjunct in decl.refinement.conjuncts:
            self._element_vars = set()
            try:
                for name in sorted(_free_names(conjunct)):
                    prop = properties.get(name)
                    if prop is not None and prop.bound is not None and prop.bound not in decl.bounds:
                        raise OperationOutsideBound(name, prop.bound, self.where)
                    if prop is None and name not in env and name not in self.builtins:
                        raise self._unbound(name)
                self.unify(BOOL, self.infer(conjunct, env))
            except SpecTypeError as e:
                errors.append(e)
        return errors


def _free_names(term, bound: Tuple[str, ...] = ()) -> set:
    if isinstance(term, Var):
        return set() if term.name in bound else {term.name}
    if isinstance(term, Lambda):
        return _free_names(term.body, bound + (term.param,))
    if isinstance(term, App):
        return _free_names(term.fn, bound) | _free_names(term.arg, bound)
    return set()


def free_names(term) -> set:
    return _free_names(term)


def typecheck(spec: SpecFile, interfaces: InterfaceRegistry,
              builtins: Optional[BuiltinRegistry] = None) -> TypedSpec:
    """Assign every property the type Con<T> -> Bool and check every declaration's refinement"""
    errors: List[SpecTypeError] = []
    property_types: Dict[str, object] = {}
    properties: Dict[str, PropertyDef] = {}
    checker = TypeChecker(interfaces, builtins)
    for decl in spec.declarations:
        if isinstance(decl, PropertyDef):
            # earlier properties are in scope
            scope = {name: as_scheme(checker._rename(t, {"T": _ELEM})) for name, t in property_types.items()}
            try:
                property_types[decl.name] = checker.check_property(decl, scope)
                properties[decl.name] = decl
            except SpecTypeError as e:
                errors.append(e)
        else:
            errors.extend(checker.check_type_decl(decl, properties, property_types))
    if errors:
        raise TypeErrorList(errors)
    return TypedSpec(spec=spec, property_types=property_types)


def refinement_conjuncts(decl: ContainerTypeDecl) -> List:
    """Flatten nested `and` applications; each conjunct can be checked on its own"""
    flat: List = []
    for conjunct in decl.refinement.conjuncts:
        flat.extend(split_conjunction(conjunct))
    return flat


def split_conjunction(term) -> List:
    if (isinstance(term, App) and isinstance(term.fn, App) and isinstance(term.fn.fn, Var)
            and term.fn.fn.name == "and"):
        return split_conjunction(term.fn.arg) + split_conjunction(term.arg)
    return [term]
