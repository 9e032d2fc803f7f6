"""Parsing and printing of property specifications (.prs) and library specifications (.cts)."""

from pathlib import Path
from typing import Dict, List, Optional, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput

from .errors import ParseErrorList, SpecParseError
from .models import (App, BoolLit, CatalogueFile, ContainerDeclaration, ContainerTypeDecl,
                     InterfaceSig, Lambda, OpClause, OperationSig, OpShape, PropertyDef,
                     Refinement, SpecFile, Var, apply)


GRAMMAR_PATH = Path(__file__).with_name("grammar.lark")

RESERVED_WORDS = frozenset({
    "property", "type", "and", "or", "true", "false", "interface", "container",
    "implements", "invariant", "op", "pre", "post", "model",
})

# Infix operators and the built-ins they stand for
INFIX_BUILTINS = {"and": "and", "or": "or"}
EQUALITY_BUILTIN = "equal?"

_parser: Optional[Lark] = None


def get_parser() -> Lark:
    global _parser
    if _parser is None:
        _parser = Lark(
            GRAMMAR_PATH.read_text(encoding="utf-8"),
            start=["spec_file", "catalogue_file"],
            parser="lalr",
            propagate_positions=True,
            maybe_placeholders=True,
        )
    return _parser


class TermBuilder(Transformer):
    """Turns parse trees into model objects; problems are collected rather than raised"""

    def __init__(self, source: Optional[str] = None):
        super().__init__()
        self.source = source
        self.errors: List[SpecParseError] = []
        self.seen: Dict[str, int] = {}

    def _declare(self, name: str, meta) -> None:
        if name in self.seen:
            self.errors.append(SpecParseError(
                f"duplicate declaration '{name}' (first declared on line {self.seen[name]})",
                meta.line, meta.column, self.source,
            ))
        else:
            self.seen[name] = meta.line

    # terms

    def var(self, args):
        return Var(name=str(args[0]))

    def true(self, args):
        return BoolLit(value=True)

    def false(self, args):
        return BoolLit(value=False)

    def lambda_(self, args):
        param, bound, body = args
        return Lambda(param=str(param), body=body, bound=str(bound) if bound is not None else None)

    def application(self, args):
        return App(fn=args[0], arg=args[1])

    def and_(self, args):
        return apply(Var(name="and"), args[0], args[1])

    def or_(self, args):
        return apply(Var(name="or"), args[0], args[1])

    def eq(self, args):
        return apply(Var(name=EQUALITY_BUILTIN), args[0], args[1])

    # property specifications

    def bounds(self, args):
        return tuple(str(a) for a in args)

    def refinement(self, args):
        return Refinement(conjuncts=tuple(args))

    @v_args(meta=True)
    def property_decl(self, meta, args):
        name, body = args
        self._declare(str(name), meta)
        bound = body.bound if isinstance(body, Lambda) else None
        return PropertyDef(name=str(name), bound=bound, body=body)

    @v_args(meta=True)
    def type_decl(self, meta, args):
        name, elem_param, var, bounds, refinement = args
        self._declare(str(name), meta)
        if len(set(bounds)) != len(bounds):
            self.errors.append(SpecParseError(f"duplicate bounds in '{name}'", meta.line, meta.column, self.source))
            bounds = tuple(dict.fromkeys(bounds))
        return ContainerTypeDecl(
            name=str(name), elem_param=str(elem_param), var=str(var),
            bounds=bounds, refinement=refinement,
        )

    def spec_file(self, args):
        return SpecFile(declarations=tuple(args))

    # library specifications

    @v_args(meta=True)
    def op_sig(self, meta, args):
        name, kind, argument, result = args
        text = f"{kind}({argument or ''})->{result}"
        try:
            shape = OpShape(text)
        except ValueError:
            self.errors.append(SpecParseError(f"unknown operation shape '{text}'", meta.line, meta.column, self.source))
            return None
        return OperationSig(name=str(name), shape=shape)

    @v_args(meta=True)
    def interface_decl(self, meta, args):
        name, *ops = args
        self._declare(str(name), meta)
        ops = [op for op in ops if op is not None]
        names = [op.name for op in ops]
        if len(set(names)) != len(names):
            self.errors.append(SpecParseError(
                f"duplicate operation names in interface '{name}'", meta.line, meta.column, self.source))
            return None
        return InterfaceSig(name=str(name), operations=tuple(ops))

    def invariant_clause(self, args):
        return ("invariant", args[0])

    @v_args(meta=True)
    def op_clause(self, meta, args):
        name, pre, post = args
        return ("op", OpClause(name=str(name), pre=pre, post=str(post), line=meta.line))

    def model_clause(self, args):
        return ("model", (str(args[0]), args[1]))

    @v_args(meta=True)
    def container_decl(self, meta, args):
        name = str(args[0])
        self._declare(name, meta)
        interfaces = [str(a) for a in args[1:] if isinstance(a, Token)]
        clauses = [a for a in args[1:] if isinstance(a, tuple)]
        invariant = BoolLit(value=True)
        ops: List[OpClause] = []
        model_ops = {}
        for kind, value in clauses:
            if kind == "invariant":
                invariant = value
            elif kind == "op":
                if any(op.name == value.name for op in ops):
                    self.errors.append(SpecParseError(
                        f"operation '{value.name}' specified twice in '{name}'", value.line, 0, self.source))
                    continue
                ops.append(value)
            else:
                model_name, term = value
                if model_name in model_ops:
                    self.errors.append(SpecParseError(
                        f"model operation '{model_name}' defined twice in '{name}'", meta.line, meta.column, self.source))
                model_ops[model_name] = term
        return ContainerDeclaration(
            name=name, interfaces=tuple(interfaces), invariant=invariant, ops=tuple(ops),
            model_ops=model_ops, line=meta.line, source=self.source,
        )

    def catalogue_file(self, args):
        args = [a for a in args if a is not None]
        return CatalogueFile(
            interfaces=tuple(a for a in args if isinstance(a, InterfaceSig)),
            containers=tuple(a for a in args if isinstance(a, ContainerDeclaration)),
        )


def _to_parse_error(error: UnexpectedInput, source: Optional[str]) -> SpecParseError:
    if isinstance(error, UnexpectedEOF):
        return SpecParseError("unexpected end of input", max(error.line, 0), max(error.column, 0), source)
    token = getattr(error, "token", None)
    if token is not None:
        message = f"unexpected token {str(token)!r}"
    else:
        char = getattr(error, "char", "")
        message = f"unexpected character {char!r}"
    return SpecParseError(message, error.line, error.column, source)


def _parse(text: str, start: str, source: Optional[str]):
    try:
        tree = get_parser().parse(text, start=start)
    except UnexpectedInput as e:
        raise ParseErrorList([_to_parse_error(e, source)]) from e
    builder = TermBuilder(source)
    result = builder.transform(tree)
    if builder.errors:
        raise ParseErrorList(builder.errors)
    return result


def parse_spec(text: str, source: Optional[str] = None) -> SpecFile:
    """Parse a property specification; all declarations are returned in declaration order"""
    return _parse(text, "spec_file", source)


def parse_catalogue_file(text: str, source: Optional[str] = None) -> CatalogueFile:
    return _parse(text, "catalogue_file", source)


def parse_term(text: str) -> object:
    """Parse a single term, e.g. for tests and the REPL"""
    spec = parse_spec(f"property __term__ {{ {text} }}")
    return spec.declarations[0].body


# ---------------------------------------------------------------------------
# Printing

def _infix(term) -> Optional[Tuple[str, object, object]]:
    if isinstance(term, App) and isinstance(term.fn, App) and isinstance(term.fn.fn, Var):
        if term.fn.fn.name in INFIX_BUILTINS:
            return INFIX_BUILTINS[term.fn.fn.name], term.fn.arg, term.arg
    return None


def format_term(term) -> str:
    """Fully parenthesized rendering; parse_term(format_term(t)) == t"""
    if isinstance(term, BoolLit):
        return "true" if term.value else "false"
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Lambda):
        bound = f" <: {term.bound}" if term.bound else ""
        return f"(\\{term.param}{bound} -> {format_term(term.body)})"
    infix = _infix(term)
    if infix:
        op, left, right = infix
        return f"({format_term(left)} {op} {format_term(right)})"
    return f"({format_term(term.fn)} {format_term(term.arg)})"


def format_declaration(decl) -> str:
    if isinstance(decl, PropertyDef):
        return f"property {decl.name} {{ {format_term(decl.body)} }}"
    bounds = ", ".join(decl.bounds)
    refinement = " and ".join(format_term(c) for c in decl.refinement.conjuncts)
    return f"type {decl.name}<{decl.elem_param}> = {{{decl.var} <: ({bounds}) | {refinement}}}"


def format_spec(spec: SpecFile) -> str:
    return "".join(format_declaration(d) + "\n" for d in spec.declarations)
