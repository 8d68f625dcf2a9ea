"""Ideal triangulations with shape parameters.

Conventions used throughout the package:

* tetrahedron vertices are 0..3 and face ``f`` is the face opposite vertex ``f``;
* a gluing ``(nbr, perm)`` on face ``f`` of tetrahedron ``A`` identifies vertex
  ``k`` of ``A`` with vertex ``perm[k]`` of ``nbr``, so face ``f`` of ``A`` is
  glued to face ``perm[f]`` of ``nbr``;
* the six edges are numbered ``(0,1), (0,2), (0,3), (1,2), (1,3), (2,3)``;
* a tetrahedron of shape ``z`` carries ``z`` on edges 01 and 23,
  ``1/(1-z)`` on edges 02 and 13 and ``(z-1)/z`` on edges 03 and 12.
"""
from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
EDGE_INDEX = {frozenset(e): i for i, e in enumerate(EDGES)}
# which of z, z', z'' sits on each edge
EDGE_SHAPE_KIND = (0, 1, 2, 2, 1, 0)

FORMAT_VERSION = 1


class TriangulationError(ValueError):
    pass


class DegenerateShapeError(TriangulationError):
    pass


def perm_sign(perm):
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def perm_inverse(perm):
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


def edge_shape(z, kind):
    """Shape parameter of an edge of kind 0, 1, 2 for a tetrahedron of shape ``z``.

    Works for any field-like scalar supporting ``+ - * /``.
    """
    if kind == 0:
        return z
    one = z ** 0 if not isinstance(z, complex) else 1
    if kind == 1:
        return one / (one - z)
    return (z - one) / z


@dataclass(frozen=True)
class IdealTriangulation:
    num_tetrahedra: int
    gluings: tuple
    shapes: tuple
    field: object = None
    exact_shapes: tuple | None = None
    generators: tuple | None = None

    def __post_init__(self):
        _check_structure(self)

    def neighbor(self, tet, face):
        return self.gluings[tet][face]

    def face_pairs(self):
        """Glued face pairs ``((A, f), (B, g), perm)``, each listed once.

        The representative side is the lexicographically smaller ``(tet, face)``.
        """
        out = []
        for a in range(self.num_tetrahedra):
            for f in range(4):
                b, perm = self.gluings[a][f]
                g = perm[f]
                if (a, f) <= (b, g):
                    out.append(((a, f), (b, g), perm))
        return out

    def edge_shapes(self, tet):
        z = self.shapes[tet]
        return tuple(_numeric_edge_shape(z, EDGE_SHAPE_KIND[e]) for e in range(6))

    def relabel(self, order):
        """Triangulation with tetrahedron ``order[i]`` renamed to ``i``."""
        new_index = {old: new for new, old in enumerate(order)}
        gluings = tuple(
            tuple((new_index[b], perm) for b, perm in self.gluings[old]) for old in order
        )
        shapes = tuple(self.shapes[old] for old in order)
        exact = None if self.exact_shapes is None else tuple(self.exact_shapes[o] for o in order)
        return IdealTriangulation(len(order), gluings, shapes, self.field, exact)

    def is_connected(self):
        seen = {0}
        stack = [0]
        while stack:
            a = stack.pop()
            for b, _ in self.gluings[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        return len(seen) == self.num_tetrahedra

    def checksum(self):
        return hashlib.sha256(dumps(self).encode()).hexdigest()


def _numeric_edge_shape(z, kind):
    if kind == 0:
        return z
    if z == 0 or z == 1:
        raise DegenerateShapeError(f"degenerate shape {z}")
    if kind == 1:
        return 1 / (1 - z)
    return (z - 1) / z


def _check_structure(T):
    t = T.num_tetrahedra
    if not isinstance(t, int) or t < 1:
        raise TriangulationError("num_tetrahedra must be a positive integer")
    if len(T.gluings) != t:
        raise TriangulationError("face count mismatch: expected gluings for %d tetrahedra" % t)
    for a, row in enumerate(T.gluings):
        if len(row) != 4:
            raise TriangulationError(f"face count mismatch: tetrahedron {a} has {len(row)} faces")
        for f, (b, perm) in enumerate(row):
            if not (0 <= b < t) or sorted(perm) != [0, 1, 2, 3]:
                raise TriangulationError(f"bad gluing on tetrahedron {a} face {f}")
            b_back, perm_back = T.gluings[b][perm[f]]
            if b_back != a or tuple(perm_back) != perm_inverse(perm):
                raise TriangulationError(
                    f"non-involutive gluing at tetrahedron {a} face {f}"
                )
            if b == a and perm[f] == f:
                raise TriangulationError(f"face {f} of tetrahedron {a} glued to itself")
            if perm_sign(perm) != -1:
                raise TriangulationError(
                    f"inconsistently oriented gluing at tetrahedron {a} face {f}"
                )
    if len(T.shapes) != t:
        raise TriangulationError("need one shape per tetrahedron")
    for i, z in enumerate(T.shapes):
        if z.imag < 0:
            raise TriangulationError(f"shape {i} outside closed upper half-plane: {z}")
        if z == 0 or z == 1:
            raise DegenerateShapeError(f"degenerate shape {i}: {z}")
    if T.exact_shapes is not None and len(T.exact_shapes) != t:
        raise TriangulationError("need one exact shape per tetrahedron")


# ---------------------------------------------------------------- file format


def parse_triangulation(text):
    """Parse and validate the JSON triangulation format."""
    from .numfield import FieldElement, NumberField, parse_rational

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TriangulationError(f"malformed syntax: {exc}") from None
    if not isinstance(data, dict):
        raise TriangulationError("malformed syntax: top level must be an object")
    if data.get("version") != FORMAT_VERSION:
        raise TriangulationError("missing or unsupported 'version' (expected 1)")
    try:
        t = data["num_tetrahedra"]
        gluings = tuple(
            tuple((int(nbr), tuple(int(p) for p in perm)) for nbr, perm in row)
            for row in data["gluings"]
        )
        shapes = tuple(complex(float(s["re"]), float(s["im"])) for s in data["shapes"])
    except (KeyError, TypeError, ValueError) as exc:
        raise TriangulationError(f"malformed syntax: {exc!r}") from None

    field_ = None
    exact = None
    if data.get("field") is not None:
        fd = data["field"]
        root = fd["root"]
        field_ = NumberField(
            [parse_rational(c) for c in fd["min_poly"]],
            complex(float(root["re"]), float(root["im"])),
            float(root.get("radius", 1e-6)),
        )
        if data.get("exact_shapes") is not None:
            exact = tuple(
                FieldElement(field_, [parse_rational(c) for c in coeffs])
                for coeffs in data["exact_shapes"]
            )
    elif data.get("exact_shapes") is not None:
        raise TriangulationError("'exact_shapes' given without 'field'")

    generators = None
    if data.get("generators") is not None:
        gens = data["generators"]
        if isinstance(gens, dict):
            gens = [gens[k] for k in sorted(gens, key=int)]
        generators = tuple(
            tuple(complex(float(re), float(im)) for re, im in m) for m in gens
        )
    T = IdealTriangulation(t, gluings, shapes, field_, exact, generators)
    if exact is not None:
        for i, (z, e) in enumerate(zip(shapes, exact)):
            if abs(e.approx() - z) > 1e-6:
                raise TriangulationError(f"exact shape {i} does not match numeric shape")
    return T


def to_json_dict(T):
    data = {
        "version": FORMAT_VERSION,
        "num_tetrahedra": T.num_tetrahedra,
        "gluings": [[[b, list(perm)] for b, perm in row] for row in T.gluings],
        "shapes": [{"re": z.real, "im": z.imag} for z in T.shapes],
    }
    if T.field is not None:
        F = T.field
        data["field"] = {
            "min_poly": [str(c) for c in F.min_poly],
            "root": {"re": F.root.real, "im": F.root.imag, "radius": F.radius},
        }
        if T.exact_shapes is not None:
            data["exact_shapes"] = [[str(c) for c in e.coeffs] for e in T.exact_shapes]
    if T.generators is not None:
        data["generators"] = [[[w.real, w.imag] for w in m] for m in T.generators]
    return data


def dumps(T):
    return json.dumps(to_json_dict(T), sort_keys=True)


def load_triangulation(path):
    with open(path, encoding="utf-8") as fh:
        return parse_triangulation(fh.read())


# ---------------------------------------------------------------- edge classes


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def classes(self):
        out = {}
        for x in sorted(self.parent):
            out.setdefault(self.find(x), []).append(x)
        return sorted(out.values())


@dataclass(frozen=True)
class EdgeClass:
    members: tuple
    total_log_sum: complex

    @property
    def valence(self):
        return len(self.members)


def compute_edge_classes(T):
    slots = [(a, e) for a in range(T.num_tetrahedra) for e in range(6)]
    uf = _UnionFind(slots)
    for a in range(T.num_tetrahedra):
        for e, (u, v) in enumerate(EDGES):
            for f in range(4):
                if f in (u, v):
                    continue
                b, perm = T.gluings[a][f]
                uf.union((a, e), (b, EDGE_INDEX[frozenset((perm[u], perm[v]))]))
    out = []
    for members in uf.classes():
        total = 0j
        for a, e in members:
            w = _numeric_edge_shape(T.shapes[a], EDGE_SHAPE_KIND[e])
            if w == 0:
                raise DegenerateShapeError(f"degenerate shape on tetrahedron {a}")
            total += cmath.log(w)
        out.append(EdgeClass(tuple(members), total))
    return out


def edge_class_lookup(T, classes=None):
    """Map ``(tet, edge)`` to its edge-class index."""
    classes = compute_edge_classes(T) if classes is None else classes
    return {m: i for i, c in enumerate(classes) for m in c.members}


# ---------------------------------------------------------------- cusps


def vertex_classes(T):
    """Cusps: classes of ``(tet, vertex)`` under the face gluings."""
    items = [(a, v) for a in range(T.num_tetrahedra) for v in range(4)]
    uf = _UnionFind(items)
    for a in range(T.num_tetrahedra):
        for f in range(4):
            b, perm = T.gluings[a][f]
            for v in range(4):
                if v != f:
                    uf.union((a, v), (b, perm[v]))
    return [tuple(c) for c in uf.classes()]


def _turn_sign(v, f_in, f_out, w):
    return perm_sign((v, f_in, f_out, w))


def _corner_log(T, tet, v, w):
    z = T.shapes[tet]
    kind = EDGE_SHAPE_KIND[EDGE_INDEX[frozenset((v, w))]]
    return cmath.log(_numeric_edge_shape(z, kind))


def _cusp_walk_log(T, path):
    """Log-derivative sum of a closed walk in a cusp cross-section.

    ``path`` is a list of steps ``(tet, v, f_in, f_out)``: the walk passes the
    link triangle of vertex ``v`` of ``tet`` entering through face ``f_in`` and
    leaving through face ``f_out``.  Each step turns around the corner on the
    edge ``(v, w)``, ``w`` the remaining vertex.
    """
    total = 0j
    for tet, v, f_in, f_out in path:
        (w,) = {0, 1, 2, 3} - {v, f_in, f_out}
        total += _turn_sign(v, f_in, f_out, w) * _corner_log(T, tet, v, w)
    return total


@dataclass(frozen=True)
class CuspReport:
    triangles: tuple
    basis: tuple  # closed walks, each a tuple of (tet, v, f_in, f_out)
    residuals: tuple


def _cusp_cycles(T, triangles):
    """Homology basis of one cusp cross-section as closed walks.

    Dual graph: nodes are link triangles ``(tet, v)``, edges are glued sides.
    Fundamental cycles of a BFS tree are reduced modulo the loops around the
    link vertices; the chosen cycles are independent over the rationals.
    """
    tri_set = set(triangles)
    # dual edges, each once: ((a, v, f), (b, perm[v], perm[f]))
    dual = []
    for a, v in triangles:
        for f in range(4):
            if f == v:
                continue
            b, perm = T.gluings[a][f]
            other = (b, perm[v], perm[f])
            if (a, v, f) <= other:
                dual.append(((a, v, f), other))
    adjacency = {x: [] for x in triangles}
    for k, ((a, v, f), (b, w, g)) in enumerate(dual):
        adjacency[(a, v)].append((k, f, (b, w), g))
        adjacency[(b, w)].append((k, g, (a, v), f))
    root = min(tri_set)
    parent = {root: None}
    order = [root]
    for node in order:
        for k, f, nbr, g in sorted(adjacency[node]):
            if nbr not in parent:
                parent[nbr] = (k, node, f, g)  # reached from node through its face f
                order.append(nbr)
    tree = {p[0] for p in parent.values() if p is not None}
    non_tree = [k for k in range(len(dual)) if k not in tree]
    col = {k: i for i, k in enumerate(non_tree)}

    def path_to_root(node):
        # list of (node, face used to leave towards parent, parent, face entered)
        out = []
        while parent[node] is not None:
            k, p, f_p, g_node = parent[node]
            out.append((node, g_node, p, f_p))
            node = p
        return out

    def cycle_for(k):
        (a, v, f), (b, w, g) = dual[k]
        up_a = path_to_root((a, v))
        up_b = path_to_root((b, w))
        # drop the shared part of the two tree paths (no backtracking)
        while up_a and up_b and up_a[-1] == up_b[-1]:
            up_a.pop()
            up_b.pop()
        # crossings (from, exit face, to, entry face) around the cycle
        seq = [(p, f_p, node, g_node) for node, g_node, p, f_p in reversed(up_a)]
        seq.append(((a, v), f, (b, w), g))
        seq.extend((node, g_node, p, f_p) for node, g_node, p, f_p in up_b)
        moves = []
        for i, (_, _, node, f_in) in enumerate(seq):
            f_out = seq[(i + 1) % len(seq)][1]
            moves.append((node[0], node[1], f_in, f_out))
        return tuple(moves)

    star_rows = _star_rows(T, triangles, dual, col)
    basis = []
    rows = [r[:] for r in star_rows]
    for k in non_tree:
        vec = [Fraction(0)] * len(non_tree)
        vec[col[k]] = Fraction(1)
        if _rank(rows + [vec]) > _rank(rows):
            rows.append(vec)
            basis.append(cycle_for(k))
    return tuple(basis)


def _star_rows(T, triangles, dual, col):
    """Non-tree coordinates of the loop around each link vertex."""
    lookup = {}
    for k, ((a, v, f), (b, w, g)) in enumerate(dual):
        lookup[(a, v, f)] = (k, 1)
        lookup[(b, w, g)] = (k, -1)
    seen = set()
    rows = []
    for a, v in triangles:
        for w in range(4):
            if w == v or (a, v, w) in seen:
                continue
            row = [Fraction(0)] * len(col)
            tet, vv, ww = a, v, w
            # the two faces of tet containing edge (v, w)
            f_in, f_out = sorted({0, 1, 2, 3} - {v, w})
            while (tet, vv, ww) not in seen:
                seen.add((tet, vv, ww))
                k, s = lookup[(tet, vv, f_out)]
                if k in col:
                    row[col[k]] += s
                b, perm = T.gluings[tet][f_out]
                nf_in = perm[f_out]
                (nf_out,) = {0, 1, 2, 3} - {perm[vv], perm[ww], nf_in}
                tet, vv, ww, f_in, f_out = b, perm[vv], perm[ww], nf_in, nf_out
            rows.append(row)
    return rows


def _rank(rows):
    if not rows:
        return 0
    m = [r[:] for r in rows]
    rank = 0
    ncols = len(m[0])
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                factor = m[i][c] / m[rank][c]
                m[i] = [x - factor * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def _wrap_2pi(x):
    k = round(x.imag / (2 * math.pi))
    return abs(x - 2j * math.pi * k)


@dataclass(frozen=True)
class GluingReport:
    edge_residuals: tuple
    cusps: tuple
    tol: float

    @property
    def max_edge_residual(self):
        return max(self.edge_residuals, default=0.0)

    @property
    def max_cusp_residual(self):
        return max((r for c in self.cusps for r in c.residuals), default=0.0)

    @property
    def passed(self):
        return self.max_edge_residual < self.tol and self.max_cusp_residual < self.tol

    def to_json(self):
        return {
            "tol": self.tol,
            "passed": self.passed,
            "edge_residuals": list(self.edge_residuals),
            "cusps": [
                {
                    "triangles": [list(x) for x in c.triangles],
                    "basis": [[list(step) for step in walk] for walk in c.basis],
                    "residuals": list(c.residuals),
                }
                for c in self.cusps
            ],
        }


def validate_gluing_equations(T, tol=1e-9):
    """Edge and cusp (completeness) residuals of the shapes of ``T``.

    Edge residual: ``|sum of logs around the edge - 2 pi i|``.  Cusp residual:
    the log-derivative holonomy of each cross-section homology basis walk,
    measured modulo ``2 pi i`` (a walk's turning number is not fixed).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    for z in T.shapes:
        if z == 0 or z == 1:
            raise DegenerateShapeError(f"degenerate shape {z}")
    classes = compute_edge_classes(T)
    edge_res = tuple(abs(c.total_log_sum - 2j * math.pi) for c in classes)
    cusps = []
    for tris in vertex_classes(T):
        basis = _cusp_cycles(T, tris)
        res = tuple(_wrap_2pi(_cusp_walk_log(T, walk)) for walk in basis)
        cusps.append(CuspReport(tris, basis, res))
    return GluingReport(edge_res, tuple(cusps), tol)


# ---------------------------------------------------------------- volume

# log(sin u / u) = -sum_k c_k u^{2k},  c_k = 2^{2k-1} |B_{2k}| / (k (2k)!)
def _lobachevsky_coeffs(nterms=40):
    from sympy import bernoulli, factorial

    out = []
    for k in range(1, nterms + 1):
        c = Fraction(2 ** (2 * k - 1)) * abs(Fraction(str(bernoulli(2 * k)))) / (k * int(factorial(2 * k)))
        out.append(float(c / (2 * k + 1)))
    return out


_LOB_COEFFS = None


def lobachevsky(theta):
    """Lobachevsky function ``-int_0^theta log|2 sin u| du``.

    Reduced to ``[-pi/2, pi/2]`` by period and oddness, then summed from the
    power series of ``log(sin u / u)``; the term ratio there is at most 1/4, so
    40 terms leave a tail below ``1e-17``.
    """
    global _LOB_COEFFS
    if _LOB_COEFFS is None:
        _LOB_COEFFS = _lobachevsky_coeffs()
    theta = math.remainder(theta, math.pi)
    if theta == 0.0:
        return 0.0
    sign = 1.0 if theta > 0 else -1.0
    x = abs(theta)
    total = x - x * math.log(2 * x)
    x2 = x * x
    power = x * x2
    for c in _LOB_COEFFS:
        total += c * power
        power *= x2
    return sign * total


def tetrahedron_volume(z):
    if z == 0 or z == 1:
        raise DegenerateShapeError(f"degenerate shape {z}")
    if z.imag == 0:
        return 0.0
    return sum(lobachevsky(cmath.phase(w)) for w in (z, 1 / (1 - z), (z - 1) / z))


def compute_volume(T):
    return math.fsum(tetrahedron_volume(z) for z in T.shapes)

