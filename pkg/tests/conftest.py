import json
from importlib import resources

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from varalg.nonlin import catalog_make
from varalg.problems import build_generic, build_lattice, build_tridiagonal, rectangle_net


def _schema(name):
    return json.loads((resources.files("varalg") / "schemas" / name).read_text())


@pytest.fixture(scope="session")
def validate():
    common = _schema("common.schema.json")
    registry = Registry().with_resource("common.schema.json", Resource.from_contents(common))

    def check(doc, name):
        Draft202012Validator(_schema(name), registry=registry).validate(doc)

    return check


@pytest.fixture(scope="session")
def ex42():
    return build_lattice(rectangle_net(2, 2), catalog_make("ex42_logistic_log", {"n": 4}))


@pytest.fixture(scope="session")
def ex37():
    return build_tridiagonal(2, -1.0, 2.0, catalog_make("ex37_sqrt", {"n": 2}))


@pytest.fixture(scope="session")
def scalar_rational():
    return build_generic([[2.0]], catalog_make("rational_sq", {"n": 1}))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for n, m in sys.modules.items() if n.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda k: (k[0] == "S", int(k.lstrip("S")))):
        terminalreporter.write_line(results[key])
