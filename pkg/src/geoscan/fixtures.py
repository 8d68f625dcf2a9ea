"""Bundled triangulations and synthetic representations used by tests and demos."""
from __future__ import annotations

import cmath
import json
import math
from importlib import resources

import numpy as np
import sympy

from .holonomy import MobiusMatrix, Representation, check_relators
from .normal import parse_surface
from .triangulation import parse_triangulation, to_json_dict

DATA = resources.files("geoscan") / "data"

# relator of the standard genus 2 presentation
GENUS2_RELATOR = (1, 2, -1, -2, 3, 4, -3, -4)


def data_path(name):
    return DATA / name


def load(name):
    """A bundled triangulation by stem, e.g. ``load("figure8")``."""
    return parse_triangulation((DATA / f"{name}.json").read_text())


def cover_example():
    """The 15-tetrahedron triple cover of m412 and its genus 2 surface."""
    T = load("cover_m412_3")
    x = parse_surface((DATA / "surface_cover_m412_3.json").read_text(), T)
    return T, x


def small_fixtures():
    """Bundled triangulations with at most three tetrahedra."""
    names = ["one_tet", "figure8", "m003", "filled_m004_10_1", "m006", "m009", "m015"]
    return {n: load(n) for n in names}


# ----------------------------------------------------------------- genus 2 groups


def _rot(t):
    return np.array([[cmath.exp(0.5j * t), 0], [0, cmath.exp(-0.5j * t)]])


def _trans(phi, d):
    T = np.array([[math.cosh(d / 2), math.sinh(d / 2)], [math.sinh(d / 2), math.cosh(d / 2)]], dtype=complex)
    return _rot(phi) @ T @ _rot(-phi)


def genus2_fuchsian():
    """Side pairings of the regular octagon with angles pi/4, moved into SL(2,R).

    Returns ``[a1, b1, a2, b2]`` with ``[a1,b1][a2,b2] = 1``; every entry is
    an exactly real float.
    """
    r = math.acosh(1 + math.sqrt(2))  # centre to side midpoint, interior angle pi/4
    phis = [k * math.pi / 4 for k in range(8)]

    def pair(i, j):
        return _trans(phis[j], r) @ _rot(phis[j] - phis[i] + math.pi) @ _trans(phis[i], -r)

    g = [pair(2, 0), pair(3, 1), pair(6, 4), pair(7, 5)]
    disk = [g[0], np.linalg.inv(g[1]), g[2], np.linalg.inv(g[3])]
    K = np.array([[1j, 1j], [-1, 1]])  # disk -> upper half plane
    Ki = np.linalg.inv(K)
    out = []
    for m in disk:
        h = K @ m @ Ki
        h = h / np.sqrt(np.linalg.det(h))
        assert np.abs(h.imag).max() < 1e-10
        re = h.real
        if re[0, 0] < 0 or (re[0, 0] == 0 and re[0, 1] < 0):
            re = -re
        out.append(MobiusMatrix(*(complex(v, 0.0) for v in re.ravel())))
    return out


def conjugate_all(mats, C):
    Ci = C.inverse()
    return [(C @ m @ Ci).normalized() for m in mats]


def bend(mats, theta):
    """Bend ``[a1, b1, a2, b2]`` by ``theta`` along the curve ``[a1, b1]``.

    ``a2, b2`` are conjugated by the elliptic rotation about the axis of the
    separating curve ``c = [a1, b1]``; since it commutes with ``c`` the surface
    relator still holds.
    """
    a1, b1, a2, b2 = (m.as_array() for m in mats)
    c = a1 @ b1 @ np.linalg.inv(a1) @ np.linalg.inv(b1)
    w, V = np.linalg.eig(c)
    E = V @ np.diag([cmath.exp(0.5j * theta), cmath.exp(-0.5j * theta)]) @ np.linalg.inv(V)
    Ei = np.linalg.inv(E)
    new = [a1, b1, E @ a2 @ Ei, E @ b2 @ Ei]
    return [MobiusMatrix(*m.ravel()).normalized() for m in new]


def bent_genus2(theta=0.6):
    return bend(genus2_fuchsian(), theta)


# ----------------------------------------------------------------- real representations


def abelian_real_representation(MP, base=2.0):
    """A representation into SL(2,R) through a homomorphism to Z.

    Uses an integer vector in the kernel of the relators' exponent-sum matrix;
    all entries are exact binary floats, so every trace is exactly real.
    """
    n = MP.num_generators
    rows = []
    for r in MP.presentation.relators:
        row = [0] * n
        for a in r:
            row[abs(a) - 1] += 1 if a > 0 else -1
        rows.append(row)
    A = sympy.Matrix(rows) if rows else sympy.zeros(1, n)
    kernel = A.nullspace()
    if not kernel:
        raise ValueError("first Betti number is zero")
    v = kernel[0]
    den = sympy.ilcm(*[sympy.fraction(c)[1] for c in v])
    v = [int(c * den) for c in v]
    P = np.array([[2.0, 1.0], [1.0, 1.0]])
    Pi = np.array([[1.0, -1.0], [-1.0, 2.0]])
    mats = []
    for k in v:
        D = np.diag([base ** k, base ** (-k)])
        m = P @ D @ Pi
        mats.append(MobiusMatrix(*(complex(float(e), 0.0) for e in m.ravel())))
    R = Representation(mats, "FromFile", MP, None)
    R.max_relator_error = check_relators(R, MP.presentation.relators, 1e-6)
    return R


def triangulation_with_generators(T, mats):
    """JSON text of ``T`` with a ``generators`` block."""
    data = to_json_dict(T)
    data["generators"] = [m.to_json() for m in mats]
    return json.dumps(data, sort_keys=True)

