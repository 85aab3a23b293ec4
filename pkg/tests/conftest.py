import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trace_attack import protocol as proto  # noqa: E402
from trace_attack import quadtree as qt  # noqa: E402
from trace_attack.modmath import SeededRng  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return SeededRng(1234)


@pytest.fixture(scope="module")
def instance():
    """A shared-mode paper-parameter instance: (tree, pub, sec, en)."""
    r = SeededRng(77)
    tree = qt.gen_random_quadtree(qt.random_bounds(20, r), 50, r)
    pub, sec = proto.setup(proto.PAPER_PARAMS, proto.SHARED, tree.m, r)
    return tree, pub, sec, proto.mask_quadtree(tree, pub, sec)


@pytest.fixture
def acceptance_line():
    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
