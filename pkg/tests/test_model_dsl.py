import pytest
from hypothesis import given, strategies as st
from src.errors import EvaluationError, FuelExhausted, KindError
from src.model_dsl import (NULL, BuiltinRegistry, Evaluator, Pair, aux_assignments, enumerate_models, evaluate,
                           host_function, model_contains, model_first, model_insert_seq,
                           model_insert_sorted_unique, model_pop, model_push_fifo, model_push_lifo, model_remove,
                           render_value)
from src.models import BOOL
from src.spec_parser import parse_term


model_lists = st.lists(st.integers(min_value=0, max_value=7), max_size=8).map(tuple)
elements = st.integers(min_value=0, max_value=7)


class TestModelOperations:
    """Test cases for the list model operations"""

    @given(model_lists, elements)
    def test_insert_sorted_unique_keeps_a_strict_order(self, xs, x):
        result = model_insert_sorted_unique(xs, x)
        assert list(result) == sorted(set(xs) | {x})

    @given(model_lists, elements)
    def test_lifo_pop_returns_last_push(self, xs, x):
        assert model_pop(model_push_lifo(xs, x)) == Pair(xs, x)

    @given(model_lists, elements)
    def test_fifo_push_goes_to_the_far_end(self, xs, x):
        pushed = model_push_fifo(xs, x)
        assert pushed[0] == x
        if xs:
            assert model_pop(pushed).second == xs[-1]

    @given(model_lists, elements)
    def test_observers_leave_the_list_unchanged(self, xs, x):
        assert model_contains(xs, x) == Pair(xs, x in xs)
        assert model_first(xs) == Pair(xs, xs[0] if xs else NULL)

    def test_insert_seq_appends_duplicates(self):
        assert model_insert_seq((2, 1), 2) == (2, 1, 2)

    def test_remove_first_occurrence_only(self):
        assert model_remove((1, 2, 1), 1) == Pair((2, 1), 1)
        assert model_remove((1, 2), 3) == Pair((1, 2), NULL)

    def test_pop_empty(self):
        assert model_pop(()) == Pair((), NULL)

    def test_render_value(self):
        assert render_value(Pair((1, 2), NULL)) == [[1, 2], None]


def _without_first(xs, x):
    for i, y in enumerate(xs):
        if y == x:
            return xs[:i] + xs[i + 1:]
    return xs


def _at(xs, n):
    return xs[n] if 0 <= n < len(xs) else NULL


# model-op name -> (argument kind or None, straightforward expected result)
NAIVE_MODEL_OPS = {
    "model-insert-seq": ("elem", lambda xs, x: tuple(list(xs) + [x])),
    "model-insert-sorted": ("elem", lambda xs, x: tuple(sorted(list(xs) + [x]))),
    "model-insert-sorted-unique": ("elem", lambda xs, x: tuple(sorted(set(xs) | {x}))),
    "model-contains": ("elem", lambda xs, x: Pair(xs, x in xs)),
    "model-remove": ("elem", lambda xs, x: Pair(_without_first(xs, x), x if x in xs else NULL)),
    "model-first": (None, lambda xs: Pair(xs, _at(xs, 0))),
    "model-last": (None, lambda xs: Pair(xs, _at(xs, len(xs) - 1))),
    "model-nth": ("index", lambda xs, n: Pair(xs, _at(xs, n))),
    "model-len": (None, lambda xs: Pair(xs, len(xs))),
    "model-is-empty": (None, lambda xs: Pair(xs, len(xs) == 0)),
    "model-clear": (None, lambda xs: ()),
    "model-push-lifo": ("elem", lambda xs, x: xs + (x,)),
    "model-push-fifo": ("elem", lambda xs, x: (x,) + xs),
    "model-pop": (None, lambda xs: Pair(xs[:-1], xs[-1]) if xs else Pair(xs, NULL)),
}


class TestModelOperationsAgainstNaive:
    """Test cases comparing every registered model operation with a direct definition"""

    def test_every_model_operation_has_a_naive_definition(self):
        assert set(BuiltinRegistry().model_operations()) == set(NAIVE_MODEL_OPS)

    @pytest.mark.parametrize("name", sorted(NAIVE_MODEL_OPS))
    def test_small_lists(self, name):
        """Test every list of length <= 4 over 0..4, with every element and index argument"""
        evaluator = Evaluator(range(5))
        op = evaluator.run(parse_term(name))
        kind, naive = NAIVE_MODEL_OPS[name]
        arguments = {None: [()], "elem": [(x,) for x in range(5)], "index": [(n,) for n in range(6)]}[kind]
        for xs in enumerate_models(4, 5):
            for args in arguments:
                assert evaluator.invoke(op, xs, *args) == naive(xs, *args), (name, xs, args)


class TestEvaluator:
    """Test cases for term evaluation"""

    def setup_method(self):
        self.evaluator = Evaluator(range(4))

    def test_predicate_on_list(self):
        ascending = parse_term("\\c -> (for-all-consecutive-pairs c leq?)")

        assert self.evaluator.invoke(self.evaluator.run(ascending), (0, 1, 1, 3)) is True
        assert self.evaluator.invoke(self.evaluator.run(ascending), (2, 1)) is False

    def test_unique_count(self):
        unique = self.evaluator.run(parse_term("\\c -> (for-all-elems (\\a -> (unique-count? a c)) c)"))

        assert self.evaluator.invoke(unique, (0, 1, 2)) is True
        assert self.evaluator.invoke(unique, (0, 1, 0)) is False
        assert self.evaluator.invoke(unique, ()) is True

    def test_forall_ranges_over_domain(self):
        """Test `forall` quantifies over exactly the element domain"""
        term = parse_term("forall \\x. (leq? x max)")
        assert evaluate(term, {"max": 3}, domain=range(4)) is True
        assert evaluate(term, {"max": 2}, domain=range(4)) is False

    def test_partial_application(self):
        value = evaluate(parse_term("model-insert-seq c"), {"c": (1,)})
        assert self.evaluator.invoke(value, 2) == (1, 2)

    def test_null_comparisons(self):
        assert evaluate(parse_term("leq? (head c) 0"), {"c": ()}) is False
        assert evaluate(parse_term("equal? (head c) (last c)"), {"c": ()}) is True

    def test_local_definition_by_lambda(self):
        insert_unique = "\\xs -> \\x -> (if (member? x xs) xs (append xs (list x)))"
        fn = evaluate(parse_term(insert_unique))

        assert self.evaluator.invoke(fn, (1, 2), 2) == (1, 2)
        assert self.evaluator.invoke(fn, (1, 2), 3) == (1, 2, 3)

    def test_host_function(self):
        double = host_function("double", 1, lambda x: 2 * x)
        assert evaluate(parse_term("f 3"), {"f": double}) == 6

    def test_kind_error_on_ill_typed_input(self):
        with pytest.raises(KindError):
            evaluate(parse_term("length true"))

    def test_applying_a_non_function(self):
        with pytest.raises(KindError):
            self.evaluator.call(self.evaluator.run(parse_term("not")), True, True)

    def test_unbound_name(self):
        with pytest.raises(EvaluationError):
            evaluate(parse_term("mystery"))

    def test_fuel_exhausted(self):
        """Test the step budget stops a diverging term"""
        omega = parse_term("(\\f -> (f f)) (\\f -> (f f))")
        with pytest.raises(FuelExhausted):
            evaluate(omega, fuel=200)

    def test_run_resets_fuel(self):
        evaluator = Evaluator(range(2), fuel=50)
        term = parse_term("length (append c c)")
        for _ in range(10):
            assert evaluator.run(term, {"c": (0, 1)}) == 4

    def test_empty_domain(self):
        with pytest.raises(EvaluationError):
            Evaluator(())


class TestBuiltinRegistry:

    def test_register_extra_builtin(self):
        registry = BuiltinRegistry()
        registry.register("always?", 1, None, lambda ev, c: True)

        assert "always?" in registry
        assert evaluate(parse_term("always? c"), {"c": ()}, builtins=registry) is True

    def test_model_operations(self):
        ops = BuiltinRegistry().model_operations()
        assert "model-insert-seq" in ops
        assert "append" not in ops

    def test_predicate_scheme(self):
        scheme = BuiltinRegistry().get("distinct?").scheme
        assert scheme.body.to_type == BOOL


class TestEnumeration:
    """Test cases for bounded model enumeration"""

    def test_shorter_lists_first_then_lexicographic(self):
        models = list(enumerate_models(2, 2))
        assert models == [(), (0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1)]

    @pytest.mark.parametrize("k,m", [(0, 1), (1, 3), (3, 4)])
    def test_model_count(self, k, m):
        assert len(list(enumerate_models(k, m))) == sum(m ** n for n in range(k + 1))

    def test_aux_assignments(self):
        """Test element inputs range over the domain and index inputs over 0..k"""
        assert list(aux_assignments(["elem"], 3, 2)) == [(0,), (1,)]
        assert list(aux_assignments(["index"], 2, 9)) == [(0,), (1,), (2,)]
        assert list(aux_assignments([], 3, 4)) == [()]
