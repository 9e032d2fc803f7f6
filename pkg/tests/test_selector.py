import itertools

import pytest
from src.config import Paths
from src.errors import UnknownInterface
from src.library_spec import SpecSemantics, load_catalogue
from src.model_dsl import Evaluator
from src.models import CheckConfig, VerdictKind
from src.selector import (INTERACTION, Deadline, PropertyCheck, bound_operations, check_candidate,
                          check_interaction_property, check_property_on_op, filter_syntactic, linear_fit,
                          measure_scaling, replicate_catalogue, scaling_by_library_size, scaling_by_model_size,
                          select)
from src.spec_parser import parse_spec
from src.type_checker import typecheck


CATALOGUE = load_catalogue(Paths.CATALOGUE_DIR, Paths.STACKS_DIR)
STANDARD = ["Vec", "LinkedList", "HashSet", "BTreeSet"]


def typed_spec(text):
    return typecheck(parse_spec(text), CATALOGUE.interfaces)


def shipped(name):
    return typed_spec((Paths.SPECS_DIR / name).read_text(encoding="utf-8"))


def valid_set(typed, catalogue=CATALOGUE, cfg=None):
    report = select(typed, catalogue, cfg or CheckConfig())
    return {decl: set(report.valid_for(decl)) for decl in (s.decl for s in report.selections)}


class TestFilterSyntactic:
    """Test cases for interface filtering"""

    def test_candidates_implement_every_bound(self):
        decl = shipped("ascending_indexable.prs").spec.get_type("AscendingIndexableCon")
        names = [spec.name for spec in filter_syntactic(decl, CATALOGUE)]

        assert "HashSet" not in names
        assert "Stack" not in names
        assert set(names) == {"BTreeSet", "LazySortedVec", "LazyUniqueVec", "LinkedList",
                              "SortedVec", "UniqueVec", "Vec"}

    def test_empty_bounds_keep_everything(self):
        decl = parse_spec("property p { \\c -> true } type A<T> = {c <: () | (p c)}").get_type("A")
        assert len(filter_syntactic(decl, CATALOGUE)) == len(CATALOGUE.containers)

    def test_unknown_bound(self):
        decl = parse_spec("property p { \\c -> true } type A<T> = {c <: HeapT | (p c)}").get_type("A")
        with pytest.raises(UnknownInterface):
            filter_syntactic(decl, CATALOGUE)

    def test_bound_operations_without_repeats(self):
        ops = bound_operations(["ContainerT", "StackT", "ContainerT"], CATALOGUE)
        assert ops == ["len", "contains", "is_empty", "insert", "clear", "remove", "push", "pop"]


class TestSelect:
    """Test cases for selection on the shipped specifications"""

    def test_unique(self):
        assert valid_set(shipped("unique.prs")) == {
            "UniqueCon": {"HashSet", "BTreeSet", "UniqueVec", "LazyUniqueVec"},
        }

    def test_ascending_indexable(self):
        assert valid_set(shipped("ascending_indexable.prs")) == {
            "AscendingIndexableCon": {"BTreeSet", "SortedVec", "LazySortedVec"},
        }

    def test_ascending_indexable_on_standard_containers(self):
        catalogue = CATALOGUE.subset(STANDARD)
        assert valid_set(shipped("ascending_indexable.prs"), catalogue) == {"AscendingIndexableCon": {"BTreeSet"}}

    def test_descending_has_no_implementation(self):
        assert valid_set(shipped("descending.prs")) == {"DescendingCon": set()}

    def test_stack(self):
        """Test the queue is rejected by the closed check of the bounded property"""
        report = select(shipped("stack.prs"), CATALOGUE, CheckConfig())
        selection = report.get_selection("StackCon")

        assert set(selection.syntactic_candidates) == {"Stack", "Queue"}
        assert selection.valid == ("Stack",)
        queue = next(c for c in selection.candidates if c.container == "Queue")
        assert queue.reasons[0].endswith(f"on {INTERACTION}: invalid")
        closed = next(v for v in queue.verdicts if v.op == INTERACTION)
        assert closed.counterexample.xs0 == (0,)

    def test_strictly_ascending(self):
        assert valid_set(shipped("strictly_ascending.prs")) == {"StrictlyAscendingCon": {"BTreeSet"}}

    def test_strictly_ascending_without_indexing(self):
        typed = typed_spec("""
            property unique { \\c -> (for-all-elems (\\a -> (unique-count? a c)) c) }
            property ascending { \\c -> (for-all-consecutive-pairs c leq?) }
            type S<T> = {c <: ContainerT | (unique c) and (ascending c)}
        """)
        assert valid_set(typed) == {"S": {"HashSet", "BTreeSet"}}

    def test_several_declarations(self):
        """Test each declaration is selected independently"""
        typed = typed_spec("""
            property unique { \\c -> (distinct? c) }
            property ascending { \\c -> (sorted-ascending? c) }
            type U<T> = {c <: ContainerT | (unique c)}
            type A<T> = {c <: (ContainerT, IndexableT) | (ascending c)}
        """)
        result = valid_set(typed, CATALOGUE.subset(STANDARD))
        assert result == {"U": {"HashSet", "BTreeSet"}, "A": {"BTreeSet"}}

    def test_parallel_workers_agree(self):
        typed = shipped("unique.prs")
        sequential = select(typed, CATALOGUE, CheckConfig())
        parallel = select(typed, CATALOGUE, CheckConfig(workers=4))
        assert sequential.selections == parallel.selections

    def test_candidate_reasons(self):
        typed = shipped("unique.prs")
        decl = typed.spec.get_type("UniqueCon")
        result = check_candidate(typed, decl, CATALOGUE.get("Vec"), CATALOGUE, CheckConfig())

        assert not result.valid
        assert "(unique c) on insert: invalid" in result.reasons
        assert result.cases_enumerated > 0


class TestCheckPropertyOnOp:
    """Test cases for single property/operation checks"""

    def setup_method(self):
        self.typed = typed_spec("""
            property ascending { \\c -> (for-all-consecutive-pairs c leq?) }
            property never { \\c -> false }
            property lifo { \\c <: StackT -> (forall \\x. pop (push c x) == x) }
        """)
        self.cfg = CheckConfig(model_size=3, domain_size=4)

    def _verdict(self, prop, container, op, cfg=None):
        spec = CATALOGUE.get(container)
        return check_property_on_op(self.typed.spec.get_property(prop), spec.triples[op], spec,
                                    cfg or self.cfg, CATALOGUE)

    def test_counterexample_is_the_first_witness(self):
        verdict = self._verdict("ascending", "Vec", "insert")

        assert verdict.kind == VerdictKind.INVALID
        trace = verdict.counterexample
        assert (trace.xs0, trace.aux, trace.xs) == ((1,), (0,), (1, 0))

    def test_valid(self):
        assert self._verdict("ascending", "SortedVec", "insert").kind == VerdictKind.VALID

    def test_observer_keeps_the_property(self):
        assert self._verdict("ascending", "Vec", "nth").kind == VerdictKind.VALID

    @pytest.mark.parametrize("op", ["len", "insert", "remove", "clear"])
    def test_unsatisfiable_property_is_vacuous(self, op):
        assert self._verdict("never", "Vec", op).kind == VerdictKind.VACUOUS

    def test_bounded_property_at_model_size_zero(self):
        cfg = CheckConfig(model_size=0, domain_size=1)
        prop = self.typed.spec.get_property("lifo")
        verdict = check_interaction_property(prop, CATALOGUE.get("Stack"), cfg, CATALOGUE)
        assert verdict.kind == VerdictKind.VALID

    def test_bounded_property_rejects_queue(self):
        prop = self.typed.spec.get_property("lifo")
        verdict = check_interaction_property(prop, CATALOGUE.get("Queue"), self.cfg, CATALOGUE)

        assert verdict.kind == VerdictKind.INVALID
        assert verdict.op == INTERACTION

    def test_monotone_in_model_size(self):
        """Test a rejection at some model size persists at every larger size"""
        prop = self.typed.spec.get_property("lifo")
        kinds = [
            check_interaction_property(prop, CATALOGUE.get("Queue"), CheckConfig(model_size=k, domain_size=k + 1),
                                       CATALOGUE).kind
            for k in range(4)
        ]
        assert kinds == [VerdictKind.VALID, VerdictKind.INVALID, VerdictKind.INVALID, VerdictKind.INVALID]

        for k in range(1, 4):
            cfg = CheckConfig(model_size=k, domain_size=k + 1)
            assert self._verdict("ascending", "Vec", "insert", cfg).kind == VerdictKind.INVALID

    def test_counterexample_survives_order_preserving_relabeling(self):
        """Test x -> 2x+1 maps the witness to another witness"""
        trace = self._verdict("ascending", "Vec", "insert").counterexample
        relabel = lambda xs: tuple(2 * x + 1 for x in xs)
        semantics = SpecSemantics(CATALOGUE.get("Vec"), Evaluator(range(8)))
        ascending = lambda xs: all(a <= b for a, b in zip(xs, xs[1:]))

        xs = semantics.post_state("insert", relabel(trace.xs0), relabel(trace.aux))
        assert xs == relabel(trace.xs)
        assert ascending(relabel(trace.xs0)) and not ascending(xs)

    def test_timeout(self):
        """Test an exhausted budget yields a timeout verdict and rejects the candidate"""
        ticks = itertools.count(step=10)
        deadline = Deadline(5.0, clock=lambda: next(ticks))
        semantics = SpecSemantics(CATALOGUE.get("SortedVec"), Evaluator(range(4)))
        check = PropertyCheck("ascending", semantics.ev.run(self.typed.spec.get_property("ascending").body),
                              semantics)

        verdict = check.check_op(CATALOGUE.get("SortedVec").triples["insert"], self.cfg, deadline)
        assert verdict.kind == VerdictKind.TIMEOUT

        typed = shipped("ascending_indexable.prs")
        decl = typed.spec.get_type("AscendingIndexableCon")
        result = check_candidate(typed, decl, CATALOGUE.get("SortedVec"), CATALOGUE,
                                 CheckConfig(budget_secs=1e-9))
        assert not result.valid
        assert any(reason.endswith("timeout") for reason in result.reasons)


class TestSoundness:
    """Every counterexample reported must re-validate against the specification"""

    @pytest.mark.parametrize("spec_file", ["unique.prs", "ascending_indexable.prs", "descending.prs"])
    def test_invalid_traces_revalidate(self, spec_file):
        typed = shipped(spec_file)
        cfg = CheckConfig()
        report = select(typed, CATALOGUE, cfg)
        prop = typed.spec.properties[0]

        for candidate in report.selections[0].candidates:
            semantics = SpecSemantics(CATALOGUE.get(candidate.container), Evaluator(range(cfg.domain_size)))
            predicate = semantics.ev.run(prop.body)
            holds = lambda xs: semantics.ev.invoke(predicate, xs) is True
            for verdict in candidate.verdicts:
                if verdict.kind != VerdictKind.INVALID:
                    continue
                trace = verdict.counterexample
                assert semantics.invariant(trace.xs0)
                assert holds(trace.xs0)
                assert semantics.pre(trace.op, trace.xs0, trace.aux)
                assert semantics.post_state(trace.op, trace.xs0, trace.aux) == trace.xs
                assert not holds(trace.xs)


# =======================================================#
# Independent oracle: plain Python models of the catalogue

def _insert_unique(xs, x):
    return xs if x in xs else xs + (x,)


def _remove(xs, x):
    if x not in xs:
        return xs
    i = xs.index(x)
    return xs[:i] + xs[i + 1:]


ORACLE_POSTS = {
    "model-insert-seq": lambda xs, x: xs + (x,),
    "model-insert-sorted": lambda xs, x: tuple(sorted(xs + (x,))),
    "model-insert-sorted-unique": lambda xs, x: tuple(sorted(set(xs) | {x})),
    "insert-unique": _insert_unique,
    "model-push-lifo": lambda xs, x: xs + (x,),
    "model-push-fifo": lambda xs, x: (x,) + xs,
    "model-pop": lambda xs: xs[:-1],
    "model-remove": _remove,
    "model-clear": lambda xs: (),
}

ORACLE_INVARIANTS = {
    "SortedVec": lambda xs: list(xs) == sorted(xs),
    "LazySortedVec": lambda xs: list(xs) == sorted(xs),
    "BTreeSet": lambda xs: list(xs) == sorted(set(xs)),
    "HashSet": lambda xs: list(xs) == sorted(set(xs)),
    "UniqueVec": lambda xs: len(set(xs)) == len(xs),
    "LazyUniqueVec": lambda xs: len(set(xs)) == len(xs),
}

ORACLE_PROPERTIES = {
    "unique": ("\\c -> (for-all-elems (\\a -> (unique-count? a c)) c)", lambda xs: len(set(xs)) == len(xs)),
    "ascending": ("\\c -> (for-all-consecutive-pairs c leq?)", lambda xs: all(a <= b for a, b in zip(xs, xs[1:]))),
    "descending": ("\\c -> (for-all-consecutive-pairs c geq?)", lambda xs: all(a >= b for a, b in zip(xs, xs[1:]))),
}


def oracle_verdict(container, op, predicate, k, m):
    spec = CATALOGUE.get(container)
    triple = spec.triples[op]
    invariant = ORACLE_INVARIANTS.get(container, lambda xs: True)
    post = ORACLE_POSTS.get(triple.post_model_op, lambda xs, *aux: xs)
    args = range(m) if triple.shape.argument == "elem" else range(k + 1)
    satisfiable = False
    for length in range(k + 1):
        for xs0 in itertools.product(range(m), repeat=length):
            if not invariant(xs0) or not predicate(xs0):
                continue
            for aux in ([(a,) for a in args] if triple.shape.argument else [()]):
                satisfiable = True
                if not predicate(post(xs0, *aux)):
                    return VerdictKind.INVALID
    return VerdictKind.VALID if satisfiable else VerdictKind.VACUOUS


class TestOracle:
    """Bounded checking agrees with a direct enumeration in plain Python"""

    def _compare(self, k):
        cfg = CheckConfig(model_size=k, domain_size=k + 1)
        typed = typed_spec("\n".join(f"property {name} {{ {text} }}" for name, (text, _) in ORACLE_PROPERTIES.items()))
        for name, (_, predicate) in ORACLE_PROPERTIES.items():
            prop = typed.spec.get_property(name)
            for spec in CATALOGUE.containers:
                for op, triple in spec.triples.items():
                    expected = oracle_verdict(spec.name, op, predicate, k, k + 1)
                    actual = check_property_on_op(prop, triple, spec, cfg, CATALOGUE).kind
                    assert actual == expected, f"{name} on {spec.name}.{op} at k={k}"

    def test_agrees_at_model_size_two(self):
        self._compare(2)

    @pytest.mark.slow
    def test_agrees_at_model_size_three(self):
        self._compare(3)


class TestScaling:
    """Test cases for the scaling measurements"""

    def test_linear_fit(self):
        slope, intercept, r_squared = linear_fit([1, 2, 3, 4], [3, 5, 7, 9])

        assert slope == pytest.approx(2.0)
        assert intercept == pytest.approx(1.0)
        assert r_squared == pytest.approx(1.0)

    def test_replicate_catalogue(self):
        library = replicate_catalogue(CATALOGUE, ["BTreeSet", "Vec"], 5)
        assert library.names() == ["BTreeSet_0", "Vec_1", "BTreeSet_2", "Vec_3", "BTreeSet_4"]

    def test_work_grows_linearly_with_library_size(self):
        """Test the case count, a deterministic stand-in for time, is linear in the number of candidates"""
        sizes = list(range(2, 9))
        report = scaling_by_library_size(shipped("ascending_indexable.prs"), CATALOGUE, sizes,
                                         model_size=2, metric="cases", names=["BTreeSet"])

        assert report.r_squared >= 0.9
        for point in report.points:
            fitted = report.slope * point.library_size + report.intercept
            assert abs(point.cases - fitted) <= 0.25 * fitted

    def test_work_grows_with_model_size(self):
        """Test the case count, a deterministic stand-in for selection time, grows with k"""
        report = scaling_by_model_size(shipped("unique.prs"), CATALOGUE.subset(STANDARD), [1, 2, 3], metric="cases")
        cases = [p.cases for p in report.points]
        assert cases == sorted(cases) and len(set(cases)) == 3

    def test_measure_scaling_reports_both_axes(self):
        """Test both measurements come back with one point per requested size"""
        reports = measure_scaling(shipped("unique.prs"), CATALOGUE.subset(STANDARD), model_sizes=(1, 2),
                                  library_sizes=(1, 2), metric="cases")

        assert set(reports) == {"model_size", "library_size"}
        assert [p.model_size for p in reports["model_size"].points] == [1, 2]
        assert [p.library_size for p in reports["library_size"].points] == [1, 2]
        assert all(p.model_size == 3 for p in reports["library_size"].points)
        assert reports["library_size"].slope > 0

    @pytest.mark.slow
    def test_selection_time_grows_with_model_size(self):
        report = scaling_by_model_size(shipped("unique.prs"), CATALOGUE.subset(STANDARD), [1, 3])
        small, large = report.points
        assert large.seconds > small.seconds

    @pytest.mark.slow
    def test_selection_time_grows_linearly_with_library_size(self):
        report = scaling_by_library_size(shipped("ascending_indexable.prs"), CATALOGUE, list(range(2, 9)),
                                         model_size=3, names=["BTreeSet"])
        assert report.slope > 0
        assert report.r_squared >= 0.9
