"""The list model: values, model operations, built-in combinators and the evaluator.

Runtime values are plain Python objects:

- elements and sizes are ``int``
- booleans are ``bool``
- model lists are ``tuple`` of ints (always flat)
- ``Pair`` holds the (list, result) outputs of model operations
- ``NULL`` is the missing-element result of ``elem?`` operations
"""

from dataclasses import dataclass, field
from itertools import groupby, product
from typing import Any, Callable, Dict, Iterator, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from .config import CheckDefaults
from .errors import ArityError, EvaluationError, FuelExhausted, KindError
from .models import (App, Arrow, BOOL, BoolLit, BoundedForall, Con, Lambda, PairT, SIZE, TypeVar,
                     Var, arrow)


class _Null:
    __slots__ = ()

    def __repr__(self) -> str:
        return "null"


NULL = _Null()

ModelList = Tuple[int, ...]


@dataclass(frozen=True)
class Pair:
    first: Any
    second: Any


@dataclass(frozen=True)
class Closure:
    param: str
    body: Any
    env: Mapping[str, Any]


@dataclass(frozen=True)
class Partial:
    """A built-in applied to fewer arguments than its arity"""
    builtin: "Builtin"
    args: Tuple[Any, ...] = field(default=())


def render_value(value: Any) -> Any:
    """JSON-friendly rendering of a model value"""
    if value is NULL:
        return None
    if isinstance(value, Pair):
        return [render_value(value.first), render_value(value.second)]
    if isinstance(value, tuple):
        return list(value)
    return value


# =======================================================#
# Model operations

def model_insert_seq(xs: ModelList, x: int) -> ModelList:
    return xs + (x,)


def model_insert_sorted_unique(xs: ModelList, x: int) -> ModelList:
    return dedup_adjacent(sort_ascending(xs + (x,)))


def model_insert_sorted(xs: ModelList, x: int) -> ModelList:
    return sort_ascending(xs + (x,))


def model_contains(xs: ModelList, x: int) -> Pair:
    return Pair(xs, x in xs)


def model_remove(xs: ModelList, x: int) -> Pair:
    if x in xs:
        return Pair(remove_first(x, xs), x)
    return Pair(xs, NULL)


def model_first(xs: ModelList) -> Pair:
    return Pair(xs, xs[0] if xs else NULL)


def model_last(xs: ModelList) -> Pair:
    return Pair(xs, xs[-1] if xs else NULL)


def model_nth(xs: ModelList, n: int) -> Pair:
    return Pair(xs, xs[n] if 0 <= n < len(xs) else NULL)


def model_len(xs: ModelList) -> Pair:
    return Pair(xs, len(xs))


def model_is_empty(xs: ModelList) -> Pair:
    return Pair(xs, not xs)


def model_clear(xs: ModelList) -> ModelList:
    return ()


def model_push_lifo(xs: ModelList, x: int) -> ModelList:
    return xs + (x,)


def model_push_fifo(xs: ModelList, x: int) -> ModelList:
    return (x,) + xs


def model_pop(xs: ModelList) -> Pair:
    if not xs:
        return Pair(xs, NULL)
    return Pair(xs[:-1], xs[-1])


# List primitives

def sort_ascending(xs: ModelList) -> ModelList:
    return tuple(sorted(xs))


def dedup_adjacent(xs: ModelList) -> ModelList:
    return tuple(k for k, _ in groupby(xs))


def remove_first(x: int, xs: ModelList) -> ModelList:
    if x not in xs:
        return xs
    i = xs.index(x)
    return xs[:i] + xs[i + 1:]


def is_sorted_ascending(xs: ModelList) -> bool:
    return all(a <= b for a, b in zip(xs, xs[1:]))


def is_distinct(xs: ModelList) -> bool:
    return len(set(xs)) == len(xs)


# =======================================================#
# Built-in registry

class Builtin(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    arity: int
    scheme: Any
    evaluator: Callable[..., Any]


_a = TypeVar(name="a")
_b = TypeVar(name="b")
_CON_A = Con(elem=_a)


def _scheme(*types) -> BoundedForall:
    body = arrow(*types) if len(types) > 1 else types[0]
    used = []
    for name in ("a", "b"):
        if _mentions(body, name):
            used.append(name)
    return BoundedForall(variables=tuple(used), body=body)


def _mentions(t, name: str) -> bool:
    if isinstance(t, TypeVar):
        return t.name == name
    if isinstance(t, Con):
        return _mentions(t.elem, name)
    if isinstance(t, PairT):
        return _mentions(t.first, name) or _mentions(t.second, name)
    if isinstance(t, Arrow):
        return _mentions(t.from_type, name) or _mentions(t.to_type, name)
    return False


def _list(value: Any, where: str) -> ModelList:
    if not isinstance(value, tuple):
        raise KindError(f"{where}: expected a list, got {value!r}")
    return value


def _elem(value: Any, where: str) -> Any:
    if isinstance(value, (tuple, Pair, Closure, Partial)):
        raise KindError(f"{where}: expected an element, got {value!r}")
    return value


def _bool(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise KindError(f"{where}: expected a boolean, got {value!r}")
    return value


def _pair(value: Any, where: str) -> Pair:
    if not isinstance(value, Pair):
        raise KindError(f"{where}: expected a pair, got {value!r}")
    return value


def _flat(value: Any, where: str) -> int:
    # model lists hold elements only
    if value is NULL or isinstance(value, bool) or not isinstance(value, int):
        raise KindError(f"{where}: lists only hold elements, got {value!r}")
    return value


def _compare(op: Callable[[Any, Any], bool]) -> Callable[..., bool]:
    def compare(ev, a, b):
        if a is NULL or b is NULL:
            return False
        return op(_elem(a, "compare"), _elem(b, "compare"))
    return compare


def _equal(ev, a, b) -> bool:
    return a == b


def _default_builtins() -> Dict[str, Tuple[int, Any, Callable[..., Any]]]:
    con_a = _CON_A
    pair_con = lambda t: PairT(first=con_a, second=t)
    return {
        # combinators and predicates
        "for-all-elems": (2, _scheme(arrow(_a, BOOL), con_a, BOOL),
                          lambda ev, p, xs: all(_bool(ev.apply(p, x), "for-all-elems") for x in _list(xs, "for-all-elems"))),
        "for-all-consecutive-pairs": (2, _scheme(con_a, arrow(_a, _a, BOOL), BOOL),
                                      lambda ev, xs, rel: all(
                                          _bool(ev.apply(ev.apply(rel, a), b), "for-all-consecutive-pairs")
                                          for a, b in zip(_list(xs, "for-all-consecutive-pairs"), xs[1:]))),
        "forall": (1, _scheme(arrow(_a, BOOL), BOOL),
                   lambda ev, p: all(_bool(ev.apply(p, x), "forall") for x in ev.domain)),
        "unique-count?": (2, _scheme(_a, con_a, BOOL),
                          lambda ev, x, xs: _list(xs, "unique-count?").count(x) == 1),
        "leq?": (2, _scheme(_a, _a, BOOL), _compare(lambda a, b: a <= b)),
        "geq?": (2, _scheme(_a, _a, BOOL), _compare(lambda a, b: a >= b)),
        "equal?": (2, _scheme(_a, _a, BOOL), _equal),
        "and": (2, _scheme(BOOL, BOOL, BOOL), lambda ev, p, q: _bool(p, "and") and _bool(q, "and")),
        "or": (2, _scheme(BOOL, BOOL, BOOL), lambda ev, p, q: _bool(p, "or") or _bool(q, "or")),
        "not": (1, _scheme(BOOL, BOOL), lambda ev, p: not _bool(p, "not")),
        "sorted-ascending?": (1, _scheme(con_a, BOOL), lambda ev, xs: is_sorted_ascending(_list(xs, "sorted-ascending?"))),
        "distinct?": (1, _scheme(con_a, BOOL), lambda ev, xs: is_distinct(_list(xs, "distinct?"))),
        # list primitives
        "append": (2, _scheme(con_a, con_a, con_a), lambda ev, xs, ys: _list(xs, "append") + _list(ys, "append")),
        "sort-ascending": (1, _scheme(con_a, con_a), lambda ev, xs: sort_ascending(_list(xs, "sort-ascending"))),
        "dedup-adjacent": (1, _scheme(con_a, con_a), lambda ev, xs: dedup_adjacent(_list(xs, "dedup-adjacent"))),
        "member?": (2, _scheme(_a, con_a, BOOL), lambda ev, x, xs: x in _list(xs, "member?")),
        "remove-first": (2, _scheme(_a, con_a, con_a), lambda ev, x, xs: remove_first(x, _list(xs, "remove-first"))),
        "take": (2, _scheme(con_a, SIZE, con_a), lambda ev, xs, n: _list(xs, "take")[:max(n, 0)]),
        "last": (1, _scheme(con_a, _a), lambda ev, xs: _list(xs, "last")[-1] if xs else NULL),
        "head": (1, _scheme(con_a, _a), lambda ev, xs: _list(xs, "head")[0] if xs else NULL),
        "length": (1, _scheme(con_a, SIZE), lambda ev, xs: len(_list(xs, "length"))),
        "null?": (1, _scheme(con_a, BOOL), lambda ev, xs: not _list(xs, "null?")),
        "cons": (2, _scheme(_a, con_a, con_a), lambda ev, x, xs: (_flat(x, "cons"),) + _list(xs, "cons")),
        "list": (1, _scheme(_a, con_a), lambda ev, x: (_flat(x, "list"),)),
        "pair": (2, _scheme(_a, _b, PairT(first=_a, second=_b)), lambda ev, a, b: Pair(a, b)),
        "first-of": (1, _scheme(PairT(first=_a, second=_b), _a), lambda ev, p: _pair(p, "first-of").first),
        "second-of": (1, _scheme(PairT(first=_a, second=_b), _b), lambda ev, p: _pair(p, "second-of").second),
        "nth-or-null": (2, _scheme(con_a, SIZE, _a), lambda ev, xs, n: model_nth(_list(xs, "nth-or-null"), n).second),
        "if": (3, _scheme(BOOL, _a, _a, _a), lambda ev, c, t, e: t if _bool(c, "if") else e),
        "null": (0, _scheme(_a), lambda ev: NULL),
        # model operations
        "model-insert-seq": (2, _scheme(con_a, _a, con_a), lambda ev, xs, x: model_insert_seq(_list(xs, "model-insert-seq"), _flat(x, "model-insert-seq"))),
        "model-insert-sorted-unique": (2, _scheme(con_a, _a, con_a),
                                       lambda ev, xs, x: model_insert_sorted_unique(_list(xs, "model-insert-sorted-unique"), _flat(x, "model-insert-sorted-unique"))),
        "model-insert-sorted": (2, _scheme(con_a, _a, con_a),
                                lambda ev, xs, x: model_insert_sorted(_list(xs, "model-insert-sorted"), _flat(x, "model-insert-sorted"))),
        "model-contains": (2, _scheme(con_a, _a, pair_con(BOOL)), lambda ev, xs, x: model_contains(_list(xs, "model-contains"), x)),
        "model-remove": (2, _scheme(con_a, _a, pair_con(_a)), lambda ev, xs, x: model_remove(_list(xs, "model-remove"), x)),
        "model-first": (1, _scheme(con_a, pair_con(_a)), lambda ev, xs: model_first(_list(xs, "model-first"))),
        "model-last": (1, _scheme(con_a, pair_con(_a)), lambda ev, xs: model_last(_list(xs, "model-last"))),
        "model-nth": (2, _scheme(con_a, SIZE, pair_con(_a)), lambda ev, xs, n: model_nth(_list(xs, "model-nth"), n)),
        "model-len": (1, _scheme(con_a, pair_con(SIZE)), lambda ev, xs: model_len(_list(xs, "model-len"))),
        "model-is-empty": (1, _scheme(con_a, pair_con(BOOL)), lambda ev, xs: model_is_empty(_list(xs, "model-is-empty"))),
        "model-clear": (1, _scheme(con_a, con_a), lambda ev, xs: model_clear(_list(xs, "model-clear"))),
        "model-push-lifo": (2, _scheme(con_a, _a, con_a), lambda ev, xs, x: model_push_lifo(_list(xs, "model-push-lifo"), _flat(x, "model-push-lifo"))),
        "model-push-fifo": (2, _scheme(con_a, _a, con_a), lambda ev, xs, x: model_push_fifo(_list(xs, "model-push-fifo"), _flat(x, "model-push-fifo"))),
        "model-pop": (1, _scheme(con_a, pair_con(_a)), lambda ev, xs: model_pop(_list(xs, "model-pop"))),
    }


class BuiltinRegistry:
    """Name -> (arity, type scheme, evaluator) for every built-in"""

    def __init__(self):
        self.builtins: Dict[str, Builtin] = {}
        for name, (arity, scheme, evaluator) in _default_builtins().items():
            self.register(name, arity, scheme, evaluator)

    def register(self, name: str, arity: int, scheme: Any, evaluator: Callable[..., Any]) -> Builtin:
        builtin = Builtin(name=name, arity=arity, scheme=scheme, evaluator=evaluator)
        self.builtins[name] = builtin
        return builtin

    def get(self, name: str) -> Optional[Builtin]:
        return self.builtins.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self.builtins

    def __iter__(self) -> Iterator[str]:
        return iter(self.builtins)

    def types(self) -> Dict[str, Any]:
        return {name: b.scheme for name, b in self.builtins.items()}

    def model_operations(self) -> Dict[str, Builtin]:
        return {name: b for name, b in self.builtins.items() if name.startswith("model-")}


_default_registry: Optional[BuiltinRegistry] = None


def default_registry() -> BuiltinRegistry:
    global _default_registry
    if _default_registry is None:
        _default_registry = BuiltinRegistry()
    return _default_registry


def host_function(name: str, arity: int, fn: Callable[..., Any]) -> Partial:
    """Wrap a Python function of `arity` model values as an applicable value"""
    return Partial(Builtin(name=name, arity=arity, scheme=None, evaluator=lambda ev, *args: fn(*args)))


# =======================================================#
# Evaluation

class Evaluator:
    """Strict call-by-value evaluation with a step budget per top-level evaluation"""

    def __init__(self, domain: Sequence[int], builtins: Optional[BuiltinRegistry] = None,
                 fuel: int = CheckDefaults.FUEL):
        if not domain:
            raise EvaluationError("element domain must be nonempty")
        self.domain = tuple(domain)
        self.builtins = builtins or default_registry()
        self.budget = fuel
        self.fuel = fuel

    def _tick(self) -> None:
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted("evaluation step budget exhausted")

    def run(self, term, env: Optional[Mapping[str, Any]] = None) -> Any:
        self.fuel = self.budget
        return self.eval(term, env or {})

    def invoke(self, fn: Any, *args: Any) -> Any:
        self.fuel = self.budget
        return self.call(fn, *args)

    def eval(self, term, env: Mapping[str, Any]) -> Any:
        self._tick()
        if isinstance(term, BoolLit):
            return term.value
        if isinstance(term, Var):
            if term.name in env:
                return env[term.name]
            builtin = self.builtins.get(term.name)
            if builtin is None:
                raise EvaluationError(f"unbound name '{term.name}'")
            if builtin.arity == 0:
                return builtin.evaluator(self)
            return Partial(builtin)
        if isinstance(term, Lambda):
            return Closure(term.param, term.body, env)
        if isinstance(term, App):
            fn = self.eval(term.fn, env)
            arg = self.eval(term.arg, env)
            return self.apply(fn, arg)
        raise KindError(f"not a term: {term!r}")

    def apply(self, fn: Any, arg: Any) -> Any:
        self._tick()
        if isinstance(fn, Closure):
            return self.eval(fn.body, {**fn.env, fn.param: arg})
        if isinstance(fn, Partial):
            args = fn.args + (arg,)
            if len(args) > fn.builtin.arity:
                raise ArityError(f"{fn.builtin.name} takes {fn.builtin.arity} arguments")
            if len(args) == fn.builtin.arity:
                return fn.builtin.evaluator(self, *args)
            return Partial(fn.builtin, args)
        raise KindError(f"cannot apply {fn!r}")

    def call(self, fn: Any, *args: Any) -> Any:
        for arg in args:
            fn = self.apply(fn, arg)
        return fn


def evaluate(term, env: Optional[Mapping[str, Any]] = None, domain: Sequence[int] = tuple(range(CheckDefaults.DOMAIN_SIZE)),
             builtins: Optional[BuiltinRegistry] = None, fuel: int = CheckDefaults.FUEL) -> Any:
    """Denotation of `term` under `env`; `forall` ranges over `domain`"""
    return Evaluator(domain, builtins, fuel).run(term, env)


# =======================================================#
# Bounded model enumeration

def enumerate_models(max_length: int, domain_size: int) -> Iterator[ModelList]:
    """Every list of length <= max_length over 0..domain_size-1, shorter lists first, then lexicographic"""
    for length in range(max_length + 1):
        yield from product(range(domain_size), repeat=length)


def aux_assignments(kinds: Sequence[str], max_length: int, domain_size: int) -> Iterator[Tuple[int, ...]]:
    """Auxiliary inputs: elements range over the domain, indices over 0..max_length"""
    ranges = [range(domain_size) if kind == "elem" else range(max_length + 1) for kind in kinds]
    yield from product(*ranges)
