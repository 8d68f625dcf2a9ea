import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from geoscan.fixtures import load, cover_example  # noqa: E402
from geoscan.fundgroup import manifold_presentation  # noqa: E402
from geoscan.holonomy import representation  # noqa: E402
from geoscan.triangulation import IdealTriangulation  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "geoscan" / "data"


@lru_cache(maxsize=None)
def cached(name):
    return load(name)


@lru_cache(maxsize=None)
def cached_cover():
    T, x = cover_example()
    R = representation(T)
    return T, x, R


@lru_cache(maxsize=None)
def cover_surfaces(bound=2):
    from geoscan.normal import enumerate_admissible

    T, _, _ = cached_cover()
    return tuple(enumerate_admissible(T, bound))


def two_copies(T):
    """Disjoint union of ``T`` with itself."""
    n = T.num_tetrahedra
    glu = tuple(T.gluings) + tuple(tuple((b + n, p) for b, p in row) for row in T.gluings)
    return IdealTriangulation(2 * n, glu, tuple(T.shapes) * 2)


@pytest.fixture
def figure8():
    return cached("figure8")


@pytest.fixture
def one_tet():
    return cached("one_tet")


@pytest.fixture
def cover():
    return cached_cover()


@pytest.fixture
def data_dir():
    return DATA


def manifold_rep(name):
    T = cached(name)
    MP = manifold_presentation(T)
    return T, MP, representation(T, MP)


# ----------------------------------------------------------------- acceptance report

ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records one acceptance line and returns ``ok``."""

    def record(n, ok, detail):
        ACCEPTANCE[n] = (bool(ok), detail)
        print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
