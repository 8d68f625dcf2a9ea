"""Regenerate the bundled triangulation fixtures.

Needs ``snappy`` and ``regina`` (not dependencies of the package itself).
Regina is used only to read off the face gluings of SnapPy's triangulation in
the same tetrahedron labelling; SnapPy supplies the shapes.

    python3 scripts/make_fixtures.py [outdir]
"""
import json
import sys
from pathlib import Path

import regina
import snappy

# coordinates of the genus 2 surface in the triple cover of m412 (7 per tetrahedron)
SURFACE_Y = (
    [0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0]
    + [0, 0, 2, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0]
    + [2, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0]
    + [0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0]
    + [2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0]
)

OMEGA = complex(0.5, 3 ** 0.5 / 2)
EISENSTEIN = {"min_poly": ["1", "-1", "1"], "root": {"re": OMEGA.real, "im": OMEGA.imag, "radius": 1e-6}}


def export(M, exact_omega=False):
    R = regina.Triangulation3(M._to_string())
    gluings = []
    for i in range(R.size()):
        tet = R.tetrahedron(i)
        row = []
        for f in range(4):
            p = tet.adjacentGluing(f)
            row.append([tet.adjacentTetrahedron(f).index(), [p[k] for k in range(4)]])
        gluings.append(row)
    shapes = [complex(z) for z in M.tetrahedra_shapes("rect")]
    data = {
        "version": 1,
        "num_tetrahedra": len(gluings),
        "gluings": gluings,
        "shapes": [{"re": z.real, "im": z.imag} for z in shapes],
    }
    if exact_omega:
        assert all(abs(z - OMEGA) < 1e-9 for z in shapes), shapes
        data["field"] = EISENSTEIN
        data["exact_shapes"] = [["0", "1"] for _ in shapes]
    return data


def one_tetrahedron():
    # faces 0<->1 and 2<->3 self-glued by orientation reversing face maps
    return {
        "version": 1,
        "num_tetrahedra": 1,
        "gluings": [[[0, [1, 2, 3, 0]], [0, [3, 0, 1, 2]], [0, [1, 2, 3, 0]], [0, [3, 0, 1, 2]]]],
        "shapes": [{"re": 0.0, "im": 1.0}],
    }


def main(outdir):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    Y = snappy.Manifold("m412").covers(3)[5]
    assert abs(float(Y.volume()) - 15.2241240961) < 1e-8
    fixtures = {
        "figure8.json": export(snappy.Manifold("m004"), exact_omega=True),
        "m003.json": export(snappy.Manifold("m003")),
        "m006.json": export(snappy.Manifold("m006")),
        "m009.json": export(snappy.Manifold("m009")),
        "m015.json": export(snappy.Manifold("m015")),
        "m412.json": export(snappy.Manifold("m412"), exact_omega=True),
        "cover_m412_3.json": export(Y, exact_omega=True),
        "filled_m004_10_1.json": export(snappy.Manifold("m004(10,1)")),
        "one_tet.json": one_tetrahedron(),
    }
    for name, data in fixtures.items():
        (out / name).write_text(json.dumps(data, indent=1) + "\n")
    (out / "surface_cover_m412_3.json").write_text(json.dumps({"coordinates": SURFACE_Y}) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src/geoscan/data")
