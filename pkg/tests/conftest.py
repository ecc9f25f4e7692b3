import sys
from pathlib import Path

import pytest

from cubeid import AFFINE, CARTESIAN, CONNECTIONS, get_site
from cubeid import leibniz as lz
from cubeid import lifting as lf
from cubeid import pathobj as po
from cubeid import presheaf as ps

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def affine3():
    return get_site(AFFINE, 3)


@pytest.fixture(scope="session")
def conn2():
    return get_site(CONNECTIONS, 2)


@pytest.fixture(scope="session")
def cart2():
    return get_site(CARTESIAN, 2)


class World:
    """Small objects and maps over one site at one budget, built once."""

    def __init__(self, site, d):
        self.site, self.d = site, d
        self.I = lz.interval(site, d)
        self.one = self.I.point
        self.two = ps.discrete(site, d, 2, label="two")
        self.P, self.P0, self.P1 = ps.product(self.two, self.I.carrier, label="2xI")
        self.id1 = ps.identity(self.one)
        self.bang2 = ps.terminal_map(self.two, self.one)
        self._ids = {}

    def id_type(self, name, route="sdr"):
        key = (name, route)
        if key not in self._ids:
            f = {"1->1": self.id1, "2->1": self.bang2, "2xI->I": self.P1,
                 "I->1": ps.terminal_map(self.I.carrier, self.one)}[name]
            fib = None if name == "I->1" else lf.search_fib(f)
            self._ids[key] = (po.id_type(f, fib, route=route), fib)
        return self._ids[key]


@pytest.fixture(scope="session")
def aff_world(affine3):
    return World(affine3, 3)


@pytest.fixture(scope="session")
def conn_world(conn2):
    return World(conn2, 2)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
