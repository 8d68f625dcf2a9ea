"""Holonomy of an ideal triangulation by developing tetrahedra.

Ideal points are projective pairs ``(p, q)`` standing for ``p/q`` (``(1, 0)``
is infinity), so the same code runs over complex floats and over exact
``FieldElement`` entries.  Tetrahedron ``t`` sits in its own chart with
vertices ``(inf, 0, 1, z_t)``; a placement is the Moebius map taking that
chart into the developed picture.  Crossing a face from a placed tetrahedron
forces the neighbour's placement through the three shared vertices.

The generator of a non-tree dual edge ``A -> B`` is ``P'_B P_B^-1`` where
``P_B`` is B's placement along the spanning tree and ``P'_B`` the one
developed from A through the edge.  A word's matrix is the product in word
order.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .fundgroup import Word, manifold_presentation


class InconsistentDevelopment(RuntimeError):
    pass


class DegeneratePlacement(ValueError):
    pass


@dataclass(frozen=True)
class MobiusMatrix:
    a: object
    b: object
    c: object
    d: object

    @classmethod
    def identity(cls, one=1.0 + 0j):
        zero = one - one
        return cls(one, zero, zero, one)

    @classmethod
    def from_rows(cls, rows):
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    def __matmul__(self, o):
        return MobiusMatrix(
            self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d,
        )

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def adjugate(self):
        return MobiusMatrix(self.d, -self.b, -self.c, self.a)

    def inverse(self):
        det = self.det()
        return MobiusMatrix(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def as_array(self):
        return np.array([[complex(self.a), complex(self.b)], [complex(self.c), complex(self.d)]])

    def normalized(self):
        """Determinant 1, first nonzero entry with argument in (-pi/2, pi/2]."""
        det = complex(self.det())
        if det == 0:
            raise DegeneratePlacement("singular matrix")
        s = cmath.sqrt(det)
        m = [complex(e) / s for e in self.entries()]
        scale = max(abs(e) for e in m)
        for e in m:
            if abs(e) > 1e-12 * scale:
                arg = cmath.phase(e)
                if not -math.pi / 2 < arg <= math.pi / 2:
                    m = [-v for v in m]
                break
        return MobiusMatrix(*m)

    def apply(self, z):
        """Action on the Riemann sphere; ``math.inf`` stands for infinity."""
        if z == math.inf:
            num, den = self.a, self.c
        else:
            num, den = self.a * z + self.b, self.c * z + self.d
        if den == 0:
            return math.inf
        return num / den

    def distance_to_pm_identity(self):
        m = self.as_array()
        eye = np.eye(2)
        return min(np.abs(m - eye).max(), np.abs(m + eye).max())

    def to_json(self):
        return [[complex(e).real, complex(e).imag] for e in self.entries()]

    @classmethod
    def from_json(cls, data):
        return cls(*(complex(re, im) for re, im in data))


def _det2(p, q):
    return p[0] * q[1] - p[1] * q[0]


def mobius_from_standard(p1, p2, p3):
    """Matrix sending (0, inf, 1) to the projective points (p1, p2, p3)."""
    D = _det2(p2, p1)
    if D == 0:
        raise DegeneratePlacement("coincident ideal points")
    lam = _det2(p3, p1)
    mu = _det2(p2, p3)
    if lam == 0 or mu == 0:
        raise DegeneratePlacement("coincident ideal points")
    # columns lam*p2 (image of inf) and mu*p1 (image of 0); scaled by D
    return MobiusMatrix(lam * p2[0], mu * p1[0], lam * p2[1], mu * p1[1])


def mobius_from_triples(src, dst):
    """The Moebius map taking the three points ``src`` to ``dst`` (projective pairs)."""
    A = mobius_from_standard(*src)
    B = mobius_from_standard(*dst)
    return B @ A.adjugate()


def apply_projective(M, p):
    return (M.a * p[0] + M.b * p[1], M.c * p[0] + M.d * p[1])


def standard_vertices(z, one):
    zero = one - one
    return [(one, zero), (zero, one), (one, one), (z, one)]


def develop_across(T, shapes, one, placement_a, a, f):
    """Placement of the neighbour of tetrahedron ``a`` across face ``f``."""
    b, perm = T.gluings[a][f]
    va = standard_vertices(shapes[a], one)
    vb = standard_vertices(shapes[b], one)
    ks = [k for k in range(4) if k != f]
    src = [vb[perm[k]] for k in ks]
    dst = [apply_projective(placement_a, va[k]) for k in ks]
    return mobius_from_triples(src, dst)


def face_pairing_matrix(T, placements, a, f, shapes=None, one=1.0 + 0j):
    """Moebius map from the neighbour's placement to the one developed across ``(a, f)``."""
    shapes = T.shapes if shapes is None else shapes
    b, _ = T.gluings[a][f]
    developed = develop_across(T, shapes, one, placements[a], a, f)
    return developed @ placements[b].adjugate()


def develop_tree(T, MP, shapes, one, normalize):
    D = MP.skeleton
    placements = {D.basepoint: MobiusMatrix.identity(one)}
    order = sorted((len(D.path_from_base(n, MP.parent)), n) for n in range(D.num_nodes))
    for _, node in order:
        if MP.parent[node] is None:
            continue
        k, s, prev = MP.parent[node]
        af, bg = D.labels[k]
        a, f = af if s > 0 else bg
        P = develop_across(T, shapes, one, placements[a], a, f)
        placements[node] = P.normalized() if normalize else P
    return placements


def _generators(T, MP, shapes, one, normalize):
    placements = develop_tree(T, MP, shapes, one, normalize)
    mats = []
    for k in sorted(MP.generator_of_edge, key=MP.generator_of_edge.get):
        (a, f), _ = MP.skeleton.labels[k]
        g = face_pairing_matrix(T, placements, a, f, shapes, one)
        mats.append(g.normalized() if normalize else g)
    return mats


@dataclass
class Representation:
    generator_matrices: list
    source: str  # "FromShapes" or "FromFile"
    presentation: object = None  # ManifoldPresentation
    exact_matrices: list = None  # GL2 matrices over the shape field, or None
    max_relator_error: float = 0.0

    @property
    def num_generators(self):
        return len(self.generator_matrices)

    def conjugated(self, C):
        Ci = C.inverse()
        mats = [(C @ g @ Ci).normalized() for g in self.generator_matrices]
        return Representation(mats, self.source, self.presentation, None, self.max_relator_error)


def evaluate_word(R, w):
    """Product of generator matrices in word order; numeric."""
    mats = R.generator_matrices if isinstance(R, Representation) else R
    out = np.eye(2, dtype=complex)
    inv_cache = {}
    for a in (w.letters if isinstance(w, Word) else w):
        k = abs(a) - 1
        if not 0 <= k < len(mats) or a == 0:
            raise IndexError(f"generator {a} out of range")
        if a > 0:
            m = mats[k].as_array()
        else:
            if k not in inv_cache:
                inv_cache[k] = mats[k].inverse().as_array()
            m = inv_cache[k]
        out = out @ m
    return MobiusMatrix(*out.ravel())


def evaluate_word_exact(R, w):
    """Exact GL2 product (scalar multiples of the SL2 lift)."""
    mats = R.exact_matrices
    out = None
    for a in w.letters if isinstance(w, Word) else w:
        m = mats[abs(a) - 1]
        m = m if a > 0 else m.adjugate()
        out = m if out is None else out @ m
    return out


def _is_scalar(M):
    return (M.b).is_zero() and (M.c).is_zero() and M.a == M.d


def check_relators(R, relators, tol):
    worst = 0.0
    for r in relators:
        err = evaluate_word(R, r).distance_to_pm_identity()
        worst = max(worst, err)
        if err > tol:
            raise InconsistentDevelopment(
                f"inconsistent development: relator {list(r.letters)} is {err:.3g} away from +-I"
            )
        if R.exact_matrices is not None and len(r):
            if not _is_scalar(evaluate_word_exact(R, r)):
                raise InconsistentDevelopment(
                    f"inconsistent development: relator {list(r.letters)} is not exactly scalar"
                )
    return worst


def representation_from_shapes(T, MP=None, tol=1e-6, exact=None):
    """Holonomy generators for the dual-tree presentation of ``T``.

    ``exact=None`` develops exactly whenever exact shapes are present.
    """
    MP = manifold_presentation(T) if MP is None else MP
    mats = _generators(T, MP, list(T.shapes), 1.0 + 0j, True)
    exact_mats = None
    if exact is None:
        exact = T.exact_shapes is not None
    if exact:
        if T.exact_shapes is None:
            raise ValueError("exact development needs exact shapes")
        one = T.field.element([1])
        exact_mats = _generators(T, MP, list(T.exact_shapes), one, False)
    R = Representation(mats, "FromShapes", MP, exact_mats)
    R.max_relator_error = check_relators(R, MP.presentation.relators, tol)
    return R


def representation_from_file(T, MP=None, tol=1e-6):
    MP = manifold_presentation(T) if MP is None else MP
    if T.generators is None:
        raise ValueError("triangulation file has no generator matrices")
    if len(T.generators) != MP.num_generators:
        raise ValueError(
            f"file gives {len(T.generators)} generator matrices, presentation has {MP.num_generators}"
        )
    mats = []
    for m in T.generators:
        M = MobiusMatrix(*m)
        if abs(complex(M.det()) - 1) > 1e-9:
            raise ValueError("generator matrix does not have determinant 1")
        mats.append(M)
    R = Representation(mats, "FromFile", MP, None)
    R.max_relator_error = check_relators(R, MP.presentation.relators, tol)
    return R


def representation(T, MP=None, tol=1e-6, exact=None):
    if T.generators is not None:
        return representation_from_file(T, MP, tol)
    return representation_from_shapes(T, MP, tol, exact)
