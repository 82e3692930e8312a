"""Static resolution of API calls and imports to fully qualified names.

Resolution is intra-file only: a name chain is emitted when its head resolves
through an import binding visible at that point. Star imports and relative
imports produce no bindings (the target is not statically recoverable); names
rebound after an import stop resolving; names rebound inside a nested scope
are dropped conservatively.
"""

from __future__ import annotations

import ast
import logging
from dataclasses import dataclass, field
from typing import Optional

from ink.corpus import SourceUnit

log = logging.getLogger(__name__)

PLAIN_IMPORT = "plain_import"
FROM_IMPORT = "from_import"
ALIASED_IMPORT = "aliased_import"
ALIASED_FROM_IMPORT = "aliased_from_import"

ORIGIN_CALL = "call"
ORIGIN_IMPORT_ONLY = "import_only"
ORIGIN_ALIAS_CALL = "alias_call"


@dataclass(frozen=True)
class ImportBinding:
    local_name: str
    target_fqn: str
    kind: str
    span: tuple[int, int]

    @property
    def aliased(self) -> bool:
        return self.kind in (ALIASED_IMPORT, ALIASED_FROM_IMPORT)


@dataclass(frozen=True)
class ApiUsage:
    fqn: str
    origin: str
    span: tuple[int, int]
    alias: Optional[tuple[str, str]] = None  # (alias_name, imported_fqn)

    @property
    def library(self) -> str:
        return self.fqn.split(".", 1)[0]


@dataclass
class UnitUsages:
    unit: SourceUnit
    bindings: list[ImportBinding]
    usages: list[ApiUsage]
    warnings: list[str] = field(default_factory=list)


def _classify_import(local: str, target: str, has_asname: bool, from_form: bool) -> str:
    if from_form:
        if has_asname and local != target.rsplit(".", 1)[-1]:
            return ALIASED_FROM_IMPORT
        return FROM_IMPORT
    if has_asname and local != target:
        return ALIASED_IMPORT
    return PLAIN_IMPORT


def _iter_import_nodes(tree: ast.AST):
    for node in ast.walk(tree):
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            yield node


def parse_imports(unit: SourceUnit, warnings: list[str] | None = None) -> list[ImportBinding]:
    """Extract one binding per imported name, in source order.

    ``import a.b`` binds the root name ``a`` to target ``a``; ``from a.b
    import c as d`` binds ``d`` to ``a.b.c``. Star and relative imports yield
    no bindings and are recorded as warnings.
    """
    sink = warnings if warnings is not None else []
    try:
        tree = ast.parse(unit.text)
    except SyntaxError as exc:
        sink.append(f"{unit.rel_path}: unparseable ({exc.msg} at line {exc.lineno})")
        log.warning("%s: unparseable file skipped", unit.rel_path)
        return []

    bindings: list[ImportBinding] = []
    for node in _iter_import_nodes(tree):
        span = (node.lineno, node.col_offset)
        if isinstance(node, ast.Import):
            for alias in node.names:
                if alias.asname:
                    local, target = alias.asname, alias.name
                else:
                    local, target = alias.name.split(".", 1)[0], alias.name.split(".", 1)[0]
                kind = _classify_import(local, target, alias.asname is not None, False)
                bindings.append(ImportBinding(local, target, kind, span))
        else:
            if node.level:
                sink.append(f"{unit.rel_path}:{node.lineno}: relative import dropped")
                continue
            for alias in node.names:
                if alias.name == "*":
                    sink.append(f"{unit.rel_path}:{node.lineno}: star import yields no bindings")
                    continue
                target = f"{node.module}.{alias.name}"
                local = alias.asname or alias.name
                kind = _classify_import(local, target, alias.asname is not None, True)
                bindings.append(ImportBinding(local, target, kind, span))
    bindings.sort(key=lambda b: b.span)
    return bindings


class _Scope:
    """Name events inside one lexical scope.

    Module scope is order-sensitive: a binding is live from its line until the
    next non-import assignment of the same name. Nested scopes are
    conservative: any local rebinding of a name kills it for the whole scope.
    """

    def __init__(self, ordered: bool):
        self.ordered = ordered
        # name -> list of (line, ImportBinding | None); None is a kill event
        self.events: dict[str, list[tuple[int, Optional[ImportBinding]]]] = {}

    def bind(self, binding: ImportBinding) -> None:
        self.events.setdefault(binding.local_name, []).append((binding.span[0], binding))

    def kill(self, name: str, line: int) -> None:
        self.events.setdefault(name, []).append((line, None))

    def resolve(self, name: str, line: int) -> tuple[Optional[ImportBinding], bool]:
        """Return (binding, known). known=True means this scope owns the name."""
        if name not in self.events:
            return None, False
        events = sorted(self.events[name], key=lambda e: e[0])
        if not self.ordered and any(b is None for _, b in events):
            return None, True  # rebound somewhere in a nested scope: drop
        live: Optional[ImportBinding] = None
        decided = False
        for ev_line, binding in events:
            if ev_line > line:
                break
            live = binding
            decided = True
        if not decided:
            # name is introduced later in this scope; for nested scopes that
            # still shadows the outer name, for module scope it does not
            return (None, True) if not self.ordered else (None, False)
        return live, True


def _killed_names(node: ast.AST) -> list[tuple[str, int]]:
    """Names (re)bound by an assignment-like statement, with their lines."""
    out: list[tuple[str, int]] = []

    def targets_of(n: ast.AST):
        if isinstance(n, ast.Assign):
            return n.targets
        if isinstance(n, (ast.AugAssign, ast.AnnAssign)):
            return [n.target]
        if isinstance(n, (ast.For, ast.AsyncFor)):
            return [n.target]
        if isinstance(n, (ast.With, ast.AsyncWith)):
            return [i.optional_vars for i in n.items if i.optional_vars is not None]
        return []

    for tgt in targets_of(node):
        for sub in ast.walk(tgt):
            if isinstance(sub, ast.Name):
                out.append((sub.id, node.lineno))
    if isinstance(node, (ast.Delete,)):
        for tgt in node.targets:
            if isinstance(tgt, ast.Name):
                out.append((tgt.id, node.lineno))
    return out


def _scan_scope_kills(body: list[ast.stmt], scope: "_Scope") -> None:
    """Register rebinding events for one scope, without descending into
    nested function/class/lambda bodies (those get their own scopes)."""
    for stmt in body:
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            scope.kill(stmt.name, stmt.lineno)
            continue
        for name, line in _killed_names(stmt):
            scope.kill(name, line)
        if isinstance(stmt, ast.ExceptHandler) and stmt.name:
            scope.kill(stmt.name, stmt.lineno)
        for attr in ("body", "orelse", "finalbody", "handlers"):
            inner = getattr(stmt, attr, None)
            if inner:
                _scan_scope_kills(inner, scope)


class _Resolver(ast.NodeVisitor):
    def __init__(self, unit: SourceUnit, tree: ast.Module, warnings: list[str]):
        self.unit = unit
        self.warnings = warnings
        module_scope = _Scope(ordered=True)
        _scan_scope_kills(tree.body, module_scope)
        self.scopes: list[_Scope] = [module_scope]
        self.usages: list[ApiUsage] = []
        self.has_star_import = any(
            isinstance(n, ast.ImportFrom) and any(a.name == "*" for a in n.names)
            for n in ast.walk(tree))

    # -- scope bookkeeping -------------------------------------------------

    def _enter_scope(self, node, params: list[str]) -> _Scope:
        scope = _Scope(ordered=False)
        for p in params:
            scope.kill(p, node.lineno)
        body = node.body if isinstance(node.body, list) else []
        _scan_scope_kills(body, scope)
        return scope

    def _handle_import_node(self, node) -> None:
        scope = self.scopes[-1]
        sub_warnings: list[str] = []
        sub_unit = self.unit
        for binding in _bindings_of_node(sub_unit, node, sub_warnings):
            scope.bind(binding)
        self.warnings.extend(sub_warnings)
        if isinstance(node, ast.ImportFrom):
            if any(a.name == "*" for a in node.names):
                self.has_star_import = True
            if node.level:
                return
            for alias in node.names:
                if alias.name == "*":
                    continue
                self.usages.append(ApiUsage(f"{node.module}.{alias.name}",
                                            ORIGIN_IMPORT_ONLY,
                                            (node.lineno, node.col_offset)))
        else:
            for alias in node.names:
                self.usages.append(ApiUsage(alias.name, ORIGIN_IMPORT_ONLY,
                                            (node.lineno, node.col_offset)))

    # -- visitors ----------------------------------------------------------

    def visit_Import(self, node):
        self._handle_import_node(node)

    def visit_ImportFrom(self, node):
        self._handle_import_node(node)

    def visit_FunctionDef(self, node):
        self._visit_callable(node)

    def visit_AsyncFunctionDef(self, node):
        self._visit_callable(node)

    def _visit_callable(self, node):
        self.scopes[-1].kill(node.name, node.lineno)
        for dec in node.decorator_list:
            self.visit(dec)
        args = node.args
        params = [a.arg for a in (args.posonlyargs + args.args + args.kwonlyargs)]
        for extra in (args.vararg, args.kwarg):
            if extra is not None:
                params.append(extra.arg)
        for default in list(args.defaults) + [d for d in args.kw_defaults if d is not None]:
            self.visit(default)
        self.scopes.append(self._enter_scope(node, params))
        for stmt in node.body:
            self.visit(stmt)
        self.scopes.pop()

    def visit_Lambda(self, node):
        args = node.args
        params = [a.arg for a in (args.posonlyargs + args.args + args.kwonlyargs)]
        for extra in (args.vararg, args.kwarg):
            if extra is not None:
                params.append(extra.arg)
        self.scopes.append(self._enter_scope(node, params))
        self.visit(node.body)
        self.scopes.pop()

    def visit_ClassDef(self, node):
        self.scopes[-1].kill(node.name, node.lineno)
        for dec in node.decorator_list:
            self.visit(dec)
        for base in node.bases + [k.value for k in node.keywords]:
            self.visit(base)
        self.scopes.append(self._enter_scope(node, []))
        for stmt in node.body:
            self.visit(stmt)
        self.scopes.pop()

    def visit_Attribute(self, node):
        self._emit_chain(node)
        # do not recurse into node.value: the chain is handled as one unit,
        # but slices/call arguments below an attribute must still be visited
        inner = node.value
        while isinstance(inner, ast.Attribute):
            inner = inner.value
        if not isinstance(inner, ast.Name):
            self.visit(inner)

    def visit_Call(self, node):
        if isinstance(node.func, ast.Name):
            self._emit_chain(node.func)
        else:
            self.visit(node.func)
        for arg in node.args:
            self.visit(arg)
        for kw in node.keywords:
            self.visit(kw.value)

    # -- chain emission ----------------------------------------------------

    def _emit_chain(self, node) -> None:
        attrs: list[str] = []
        cur = node
        while isinstance(cur, ast.Attribute):
            attrs.append(cur.attr)
            cur = cur.value
        if not isinstance(cur, ast.Name):
            return
        attrs.reverse()
        head = cur.id
        line, col = node.lineno, node.col_offset
        binding = None
        for scope in reversed(self.scopes):
            binding, known = scope.resolve(head, line)
            if known:
                break
        if binding is None:
            if self.has_star_import:
                self.warnings.append(
                    f"{self.unit.rel_path}:{line}: chain head {head!r} unresolved "
                    f"in a file with a star import; dropped")
            return
        fqn = ".".join([binding.target_fqn] + attrs)
        if binding.aliased:
            self.usages.append(ApiUsage(fqn, ORIGIN_ALIAS_CALL, (line, col),
                                        alias=(binding.local_name, binding.target_fqn)))
        else:
            self.usages.append(ApiUsage(fqn, ORIGIN_CALL, (line, col)))


def _bindings_of_node(unit: SourceUnit, node, warnings: list[str]) -> list[ImportBinding]:
    """Bindings introduced by a single import statement (shared with parse_imports)."""
    out: list[ImportBinding] = []
    span = (node.lineno, node.col_offset)
    if isinstance(node, ast.Import):
        for alias in node.names:
            if alias.asname:
                local, target = alias.asname, alias.name
            else:
                root = alias.name.split(".", 1)[0]
                local, target = root, root
            out.append(ImportBinding(local, target,
                                     _classify_import(local, target,
                                                      alias.asname is not None, False),
                                     span))
    elif isinstance(node, ast.ImportFrom):
        if node.level:
            return out
        for alias in node.names:
            if alias.name == "*":
                continue
            target = f"{node.module}.{alias.name}"
            local = alias.asname or alias.name
            out.append(ImportBinding(local, target,
                                     _classify_import(local, target,
                                                      alias.asname is not None, True),
                                     span))
    return out


def resolve_usages(unit: SourceUnit, bindings: list[ImportBinding],
                   warnings: list[str] | None = None) -> list[ApiUsage]:
    """Emit every resolvable name chain and import statement, ordered by span.

    ``bindings`` must come from :func:`parse_imports` on the same unit; it is
    accepted for contract symmetry, the resolver re-derives per-scope liveness
    from the tree itself.
    """
    sink = warnings if warnings is not None else []
    try:
        tree = ast.parse(unit.text)
    except SyntaxError:
        return []
    resolver = _Resolver(unit, tree, sink)
    resolver.visit(tree)
    resolver.usages.sort(key=lambda u: (u.span, u.fqn))
    return resolver.usages


def resolve_unit(unit: SourceUnit) -> UnitUsages:
    """Parse + resolve one source unit, collecting warnings."""
    warnings: list[str] = []
    bindings = parse_imports(unit, warnings)
    usages = resolve_usages(unit, bindings, warnings)
    return UnitUsages(unit=unit, bindings=bindings, usages=usages, warnings=warnings)


def usage_rows(resolved: list[UnitUsages]) -> list[dict]:
    """Flatten to the JSONL wire form, ordered by (repo_id, rel_path, span)."""
    rows = []
    for ru in sorted(resolved, key=lambda r: (r.unit.repo_id, r.unit.rel_path)):
        for u in ru.usages:
            row = {
                "fqn": u.fqn,
                "origin": u.origin,
                "repo_id": ru.unit.repo_id,
                "rel_path": ru.unit.rel_path,
                "line": u.span[0],
                "col": u.span[1],
            }
            if u.alias is not None:
                row["alias"] = {"name": u.alias[0], "imported_fqn": u.alias[1]}
            rows.append(row)
    return rows
