import os
from pathlib import Path

import pytest

from ergfan import enumeration as en
from ergfan import family as fm
from ergfan import geometry as geo

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "ergfan" / "data"
RUN_G9 = os.environ.get("ERGFAN_RUN_G9") == "1"


def load_bundled_g9() -> en.InducedMeasure:
    return en.measure_from_json((DATA_DIR / "g9_edges_triangles.json").read_text())


@pytest.fixture(scope="session")
def m5():
    return en.enumerate_measure(5, (en.edges(), en.triangles()))


@pytest.fixture(scope="session")
def m6():
    return en.enumerate_measure(6, (en.edges(), en.triangles()))


@pytest.fixture(scope="session")
def m7():
    return en.enumerate_measure(7, (en.edges(), en.triangles()))


@pytest.fixture(scope="session")
def m9():
    """The g=9 running-example measure: regenerated when ERGFAN_RUN_G9=1,
    otherwise the bundled copy (itself produced by enumerate_measure)."""
    if RUN_G9:
        return en.enumerate_measure(9, (en.edges(), en.triangles()))
    return load_bundled_g9()


def _bundle(measure):
    poly = geo.build_polytope(measure)
    faces = geo.face_lattice(poly)
    fan = geo.normal_fan(poly, faces)
    fam = fm.ExpFamily.from_measure(measure)
    return fam, poly, faces, fan


@pytest.fixture(scope="session")
def bundle5(m5):
    return _bundle(m5)


@pytest.fixture(scope="session")
def bundle6(m6):
    return _bundle(m6)


@pytest.fixture(scope="session")
def bundle7(m7):
    return _bundle(m7)


@pytest.fixture(scope="session")
def bundle9(m9):
    return _bundle(m9)
