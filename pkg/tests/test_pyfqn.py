"""Resolution tests against a hand-enumerated oracle for the mini corpus.

EXPECTED_FQNS was written by reading each fixture file and applying the
resolution rules by hand; it is frozen here on purpose. If resolution and
this list disagree, figure out which one is wrong before touching either.
"""

import pytest

from ink.corpus import SourceUnit
from ink.pyfqn import (
    ALIASED_FROM_IMPORT,
    ALIASED_IMPORT,
    FROM_IMPORT,
    ORIGIN_ALIAS_CALL,
    ORIGIN_CALL,
    ORIGIN_IMPORT_ONLY,
    PLAIN_IMPORT,
    parse_imports,
    resolve_unit,
    usage_rows,
)

EXPECTED_FQNS = frozenset({
    "collections",
    "collections.OrderedDict",
    "hashlib",
    "hashlib.sha256",
    "json",
    "json.dumps",
    "math",
    "math.pi",
    "matplotlib.pyplot",
    "matplotlib.pyplot.plot",
    "matplotlib.pyplot.savefig",
    "numpy",
    "numpy.linalg.multi_dot",
    "numpy.linalg.qr",
    "numpy.ones",
    "numpy.zeros",
    "operator",
    "operator.itemgetter",
    "os",
    "os.path",
    "os.path.exists",
    "os.path.isfile",
    "os.path.join",
    "pandas",
    "pandas.DataFrame",
    "pandas.DataFrame.from_records",
    "pandas.read_csv",
    "requests",
    "requests.get",
    "scipy.stats",
    "scipy.stats.norm",
    "sys",
    "sys.exit",
    "tensorflow",
    "tensorflow.compat.v2.boolean_mask",
})


def unit(text: str, rel_path: str = "m.py") -> SourceUnit:
    return SourceUnit("repo", rel_path, "0" * 64, text)


def fqns_of(text: str) -> set[str]:
    return {u.fqn for u in resolve_unit(unit(text)).usages}


def test_mini_corpus_matches_hand_enumeration(usages):
    got = {u.fqn for u in usages}
    assert got - EXPECTED_FQNS == set(), "spurious FQNs"
    assert EXPECTED_FQNS - got == set(), "missing FQNs"


# -- import binding extraction ---------------------------------------------


def test_plain_import_binds_root():
    b, = parse_imports(unit("import numpy\n"))
    assert (b.local_name, b.target_fqn, b.kind) == ("numpy", "numpy", PLAIN_IMPORT)
    assert not b.aliased


def test_dotted_import_binds_root_only():
    b, = parse_imports(unit("import os.path\n"))
    assert (b.local_name, b.target_fqn, b.kind) == ("os", "os", PLAIN_IMPORT)


def test_aliased_import():
    b, = parse_imports(unit("import numpy as np\n"))
    assert (b.local_name, b.target_fqn, b.kind) == ("np", "numpy", ALIASED_IMPORT)
    assert b.aliased


def test_aliased_import_with_same_leaf_is_still_aliased():
    # the local name differs from the dotted path it stands for
    b, = parse_imports(unit("import os.path as path\n"))
    assert (b.local_name, b.target_fqn, b.kind) == ("path", "os.path", ALIASED_IMPORT)
    assert b.aliased


def test_from_import():
    b, = parse_imports(unit("from os.path import join\n"))
    assert (b.local_name, b.target_fqn, b.kind) == ("join", "os.path.join", FROM_IMPORT)
    assert not b.aliased


def test_from_import_with_redundant_asname_is_not_aliased():
    b, = parse_imports(unit("from os.path import join as join\n"))
    assert b.kind == FROM_IMPORT
    assert not b.aliased


def test_aliased_from_import():
    b, = parse_imports(unit("from pandas import DataFrame as DF\n"))
    assert (b.local_name, b.target_fqn, b.kind) == ("DF", "pandas.DataFrame",
                                                    ALIASED_FROM_IMPORT)
    assert b.aliased


def test_star_and_relative_imports_yield_no_bindings():
    warnings: list[str] = []
    assert parse_imports(unit("from os import *\n"), warnings) == []
    assert parse_imports(unit("from . import helpers\n"), warnings) == []
    assert len(warnings) == 2


def test_unparseable_file_yields_no_bindings_and_a_warning():
    warnings: list[str] = []
    assert parse_imports(unit("def broken(:\n"), warnings) == []
    assert any("unparseable" in w for w in warnings)


# -- chain resolution ------------------------------------------------------


def test_longest_chain_only():
    got = fqns_of("import numpy\nnumpy.linalg.qr(x)\n")
    assert got == {"numpy", "numpy.linalg.qr"}


def test_bare_name_emitted_only_when_called():
    assert fqns_of("import numpy\nnumpy\n") == {"numpy"}  # import_only survives
    resolved = resolve_unit(unit("import numpy\nnumpy(x)\n"))
    origins = {(u.fqn, u.origin) for u in resolved.usages}
    assert ("numpy", ORIGIN_CALL) in origins
    assert ("numpy", ORIGIN_IMPORT_ONLY) in origins


def test_alias_call_carries_alias_pair():
    resolved = resolve_unit(unit("import numpy as np\nnp.zeros(3)\n"))
    call, = [u for u in resolved.usages if u.origin == ORIGIN_ALIAS_CALL]
    assert call.fqn == "numpy.zeros"
    assert call.alias == ("np", "numpy")


def test_shadowing_kills_binding_for_later_lines():
    text = "import numpy as np\nnp.ones(2)\nnp = 3\nnp.shape\n"
    assert fqns_of(text) == {"numpy", "numpy.ones"}


def test_rebinding_before_import_does_not_resolve_earlier_lines():
    text = "np = 3\nnp.shape\nimport numpy as np\nnp.ones(2)\n"
    assert fqns_of(text) == {"numpy", "numpy.ones"}


def test_nested_scope_rebinding_is_conservative():
    text = ("import json\n"
            "def f():\n"
            "    json = {}\n"
            "    json.keys()\n"
            "def g():\n"
            "    json.dumps({})\n")
    assert fqns_of(text) == {"json", "json.dumps"}


def test_function_scope_import_resolves_inside_that_function():
    text = ("def lazy():\n"
            "    import hashlib\n"
            "    return hashlib.sha256(b'x')\n")
    assert fqns_of(text) == {"hashlib", "hashlib.sha256"}


def test_parameter_shadows_module_binding():
    text = ("import json\n"
            "def f(json):\n"
            "    json.dumps({})\n")
    assert fqns_of(text) == {"json"}


def test_star_import_file_drops_unresolved_heads_with_warning():
    resolved = resolve_unit(unit("from os import *\npath.join('a', 'b')\n"))
    assert resolved.usages == []
    assert any("star import" in w for w in resolved.warnings)
    assert any("unresolved" in w for w in resolved.warnings)


def test_unresolved_head_without_star_import_is_silently_skipped():
    resolved = resolve_unit(unit("foo.bar(1)\n"))
    assert resolved.usages == []
    assert resolved.warnings == []


def test_call_arguments_below_a_chain_are_still_visited():
    text = "import numpy\nimport json\nnumpy.ones(json.dumps({}))\n"
    assert fqns_of(text) == {"numpy", "numpy.ones", "json", "json.dumps"}


def test_attribute_on_call_result_is_not_a_chain():
    text = "import requests\nrequests.get(url).json()\n"
    assert fqns_of(text) == {"requests", "requests.get"}


def test_usages_ordered_by_span():
    resolved = resolve_unit(unit("import numpy\nnumpy.ones(1)\nnumpy.zeros(2)\n"))
    spans = [u.span for u in resolved.usages]
    assert spans == sorted(spans)


def test_usage_rows_wire_form(resolved):
    rows = usage_rows(resolved)
    assert all({"fqn", "origin", "repo_id", "rel_path", "line", "col"} <= set(r)
               for r in rows)
    aliased = [r for r in rows if "alias" in r]
    assert {(r["alias"]["name"], r["alias"]["imported_fqn"]) for r in aliased} >= {
        ("np", "numpy"), ("nmp", "numpy"), ("pd", "pandas"),
        ("plt", "matplotlib.pyplot"), ("tf", "tensorflow"),
        ("DF", "pandas.DataFrame"),
    }
