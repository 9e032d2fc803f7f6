"""Generate one program variant per chosen implementation of a declared container type.

A project is a directory holding ``containers.json`` (a ``ProjectManifest``) and the
application sources it lists. Sources use the declared type names freely; generation
adds ``from container_types import <Decl>`` for every declared type to each of them and
writes ``container_types.py`` with one wrapper class per declared type, each exposing only
its declared operations. A variant varies one type; the others stay on a fixed choice.
"""

import ast
import importlib.util
import shutil
import sys
from pathlib import Path
from types import ModuleType
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from . import containers
from .errors import BuildFailure, SourceUsesUndeclaredOp
from .models import (Catalogue, ContainerSpec, ContainerTypeDecl, GeneratedProject, GenerationPlan,
                     OpShape, ProjectManifest, TypeBinding)
from .selector import bound_operations


PathLike = Union[str, Path]

MANIFEST_FILE = "containers.json"
WRAPPER_MODULE = "container_types"
IMPLEMENTATION_MODULE = "container_impls"

# (other declared type, its implementation)
Choice = Tuple[ContainerTypeDecl, ContainerSpec]


def load_manifest(project_dir: PathLike) -> ProjectManifest:
    path = Path(project_dir) / MANIFEST_FILE
    try:
        return ProjectManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise BuildFailure(f"no {MANIFEST_FILE} in {project_dir}") from None
    except ValueError as e:
        raise BuildFailure(f"invalid {path}: {e}") from None


class SourceChecker(ast.NodeVisitor):
    """Finds attribute uses on the declared type, or on variables bound from `<Decl>.new()`,
    that name operations the declaration does not expose"""

    def __init__(self, decl_name: str, exposed: Set[str], path: str):
        self.decl_name = decl_name
        self.exposed = exposed
        self.path = path
        self.instances: Set[str] = set()

    def _is_construction(self, node: ast.AST) -> bool:
        return (isinstance(node, ast.Call)
                and isinstance(node.func, ast.Attribute)
                and isinstance(node.func.value, ast.Name)
                and node.func.value.id == self.decl_name
                and node.func.attr == "new")

    def _bind(self, target: ast.AST) -> None:
        if isinstance(target, ast.Name):
            self.instances.add(target.id)

    def collect(self, tree: ast.AST) -> None:
        for node in ast.walk(tree):
            if isinstance(node, ast.Assign) and self._is_construction(node.value):
                for target in node.targets:
                    self._bind(target)
            elif isinstance(node, (ast.AnnAssign, ast.NamedExpr)) and node.value is not None \
                    and self._is_construction(node.value):
                self._bind(node.target)

    def visit_Attribute(self, node: ast.Attribute) -> None:
        if isinstance(node.value, ast.Name):
            owner = node.value.id
            allowed = self.exposed | {"new"} if owner == self.decl_name else self.exposed
            if (owner == self.decl_name or owner in self.instances) and node.attr not in allowed:
                raise SourceUsesUndeclaredOp(node.attr, self.decl_name, self.path, node.lineno, node.col_offset + 1)
        self.generic_visit(node)


def check_source(text: str, decl_name: str, exposed: Sequence[str], path: str = "<source>") -> None:
    """Raise SourceUsesUndeclaredOp at the first use of a non-exposed operation"""
    try:
        tree = ast.parse(text, filename=path)
    except SyntaxError as e:
        raise BuildFailure(f"{path}:{e.lineno}: {e.msg}") from None
    checker = SourceChecker(decl_name, set(exposed), path)
    checker.collect(tree)
    checker.visit(tree)


def _binds(tree: ast.Module, name: str) -> bool:
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)) and node.name == name:
            return True
        if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Store) and node.id == name:
            return True
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            if any((alias.asname or alias.name.split(".")[0]) == name for alias in node.names):
                return True
    return False


def rewrite_source(text: str, decl_name: str, path: str = "<source>") -> str:
    """Import the wrapper under the declared name after the docstring and __future__ imports"""
    tree = ast.parse(text, filename=path)
    if _binds(tree, decl_name):
        raise BuildFailure(f"{path}: the module itself defines '{decl_name}'")
    insert_after = 0
    for index, node in enumerate(tree.body):
        is_docstring = (index == 0 and isinstance(node, ast.Expr)
                        and isinstance(node.value, ast.Constant) and isinstance(node.value.value, str))
        is_future = isinstance(node, ast.ImportFrom) and node.module == "__future__"
        if not (is_docstring or is_future):
            break
        insert_after = node.end_lineno
    lines = text.splitlines(keepends=True)
    if lines and not lines[-1].endswith("\n"):
        lines[-1] += "\n"
    statement = f"from {WRAPPER_MODULE} import {decl_name}\n"
    head, tail = lines[:insert_after], lines[insert_after:]
    spacer = ["\n"] if head else []
    return "".join(head + spacer + [statement] + tail)


class CodeGenerator:
    """Writes wrapper modules and rewritten sources for chosen implementations"""

    def __init__(self, catalogue: Catalogue, quiet: bool = True):
        self.catalogue = catalogue
        self.quiet = quiet

        # parameter names per shape argument
        self.parameters = {
            "elem": "x",
            "index": "n",
        }

    def _log(self, message: str) -> None:
        if not self.quiet:
            print(message)

    def _binding(self, decl: ContainerTypeDecl, impl: ContainerSpec) -> TypeBinding:
        missing = [b for b in decl.bounds if b not in impl.interfaces]
        if missing:
            raise BuildFailure(f"{impl.name} does not implement {', '.join(missing)}")
        return TypeBinding(decl_name=decl.name, implementation=impl.name,
                           exposed_ops=tuple(bound_operations(decl.bounds, self.catalogue)))

    def plan(self, project_dir: PathLike, decl: ContainerTypeDecl, impl: ContainerSpec,
             others: Sequence[Choice] = ()) -> GenerationPlan:
        """`others` chooses an implementation for every other type the manifest declares"""
        manifest = load_manifest(project_dir)
        chosen = [decl.name] + [other.name for other, _ in others]
        for name in chosen:
            if name not in manifest.types:
                raise BuildFailure(f"{MANIFEST_FILE} does not declare '{name}'")
        unchosen = sorted(set(manifest.types) - set(chosen))
        if unchosen:
            raise BuildFailure(f"no implementation chosen for {', '.join(unchosen)}")
        varied = self._binding(decl, impl)
        return GenerationPlan(
            source_files=manifest.sources,
            decl_name=varied.decl_name,
            implementation=varied.implementation,
            exposed_ops=varied.exposed_ops,
            others=tuple(self._binding(other, other_impl) for other, other_impl in others),
        )

    def _shape(self, op: str) -> OpShape:
        for sig in self.catalogue.interfaces.values():
            found = sig.get(op)
            if found is not None:
                return found.shape
        raise BuildFailure(f"operation '{op}' belongs to no interface")

    def render_class(self, binding: TypeBinding) -> List[str]:
        lines = [
            "",
            "",
            f"class {binding.decl_name}:",
            f'    """Exposes {", ".join(binding.exposed_ops)}"""',
            "",
            '    __slots__ = ("_impl",)',
            "",
            "    def __init__(self):",
            f"        self._impl = _{binding.decl_name}Impl.new()",
            "",
            "    @classmethod",
            "    def new(cls):",
            "        return cls()",
        ]
        for op in binding.exposed_ops:
            argument = self._shape(op).argument
            params = f", {self.parameters[argument]}" if argument else ""
            args = self.parameters[argument] if argument else ""
            lines += [
                "",
                f"    def {op}(self{params}):",
                f"        return self._impl.{op}({args})",
            ]
        return lines

    def render_wrapper(self, plan: GenerationPlan) -> str:
        backing = ", ".join(f"{b.decl_name} is backed by {b.implementation}" for b in plan.bindings)
        lines = [f'"""Container types of this program variant: {backing}."""', ""]
        lines += [f"from {IMPLEMENTATION_MODULE} import {b.implementation} as _{b.decl_name}Impl"
                  for b in plan.bindings]
        for binding in plan.bindings:
            lines += self.render_class(binding)
        return "\n".join(lines) + "\n"

    def generate(self, project_dir: PathLike, decl: ContainerTypeDecl, impl: ContainerSpec,
                 out_dir: PathLike, others: Sequence[Choice] = ()) -> GeneratedProject:
        """Write the variant for `impl` under `out_dir`; every file is compiled before returning"""
        plan = self.plan(project_dir, decl, impl, others)
        source_dir = Path(project_dir)
        target = Path(out_dir)
        self._log(f"📋 Generating {decl.name} -> {impl.name}")

        rewritten: Dict[str, str] = {}
        for name in plan.source_files:
            path = source_dir / name
            try:
                text = path.read_text(encoding="utf-8")
            except FileNotFoundError:
                raise BuildFailure(f"source file {path} listed in {MANIFEST_FILE} does not exist") from None
            for binding in plan.bindings:
                check_source(text, binding.decl_name, binding.exposed_ops, str(path))
            for binding in reversed(plan.bindings):
                text = rewrite_source(text, binding.decl_name, str(path))
            rewritten[name] = text

        target.mkdir(parents=True, exist_ok=True)
        files: List[str] = []
        wrapper = self.render_wrapper(plan)
        for name, text in [(f"{WRAPPER_MODULE}.py", wrapper), *rewritten.items()]:
            path = target / name
            path.parent.mkdir(parents=True, exist_ok=True)
            try:
                compile(text, str(path), "exec")
            except SyntaxError as e:
                raise BuildFailure(f"{path}:{e.lineno}: {e.msg}") from None
            path.write_text(text, encoding="utf-8")
            files.append(name)
        shutil.copyfile(containers.__file__, target / f"{IMPLEMENTATION_MODULE}.py")
        files.append(f"{IMPLEMENTATION_MODULE}.py")

        self._log(f"📄 Wrote {len(files)} files to {target}")
        return GeneratedProject(plan=plan, out_dir=str(target), files=tuple(files), wrapper_module=WRAPPER_MODULE)

    def generate_all(self, project_dir: PathLike, decl: ContainerTypeDecl, implementations: Sequence[str],
                     out_dir: PathLike, others: Sequence[Choice] = ()) -> Iterator[GeneratedProject]:
        """One variant directory per implementation, named after it"""
        for name in implementations:
            yield self.generate(project_dir, decl, self.catalogue.get(name), Path(out_dir) / name, others)


def generate(project_dir: PathLike, decl: ContainerTypeDecl, impl: ContainerSpec, out_dir: PathLike,
             catalogue: Catalogue, others: Sequence[Choice] = ()) -> GeneratedProject:
    return CodeGenerator(catalogue).generate(project_dir, decl, impl, out_dir, others)


def load_variant(project: GeneratedProject, module: Optional[str] = None) -> ModuleType:
    """Import a module of a generated variant in isolation from other variants"""
    name = module or project.wrapper_module
    shared = (WRAPPER_MODULE, IMPLEMENTATION_MODULE)
    for key in shared:
        sys.modules.pop(key, None)
    sys.path.insert(0, project.out_dir)
    try:
        spec = importlib.util.spec_from_file_location(name, Path(project.out_dir) / f"{name}.py")
        if spec is None or spec.loader is None:
            raise BuildFailure(f"cannot load {name} from {project.out_dir}")
        loaded = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(loaded)
        return loaded
    finally:
        sys.path.remove(project.out_dir)
        for key in shared:
            sys.modules.pop(key, None)
