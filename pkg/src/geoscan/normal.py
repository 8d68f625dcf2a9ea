"""Normal surfaces in standard (triangle and quad) coordinates.

Coordinates are ordered per tetrahedron as ``[t0, t1, t2, t3, q01|23,
q02|13, q03|12]``: triangle ``k`` cuts off vertex ``k``, quad ``q`` separates
the two vertex pairs of ``QUAD_PAIRS[q]``.

Parallel copies of a disk type are stacked in normal position: triangle copy
0 is the one nearest its vertex, quad copy 0 is the one nearest the pair that
contains vertex 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .triangulation import EDGE_INDEX, EDGES, compute_edge_classes, edge_class_lookup

MU3 = 0.29156
VOLUME_PER_EULER = 4 * math.pi * MU3
NONORIENTABLE_VOLUME_THRESHOLD = VOLUME_PER_EULER  # ~3.66385
ORIENTABLE_VOLUME_THRESHOLD = 2 * VOLUME_PER_EULER  # ~7.3277

QUAD_PAIRS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))
# quad type separating the pair {a, b} from its complement
QUAD_OF_PAIR = {}
for _q, (_p1, _p2) in enumerate(QUAD_PAIRS):
    QUAD_OF_PAIR[frozenset(_p1)] = _q
    QUAD_OF_PAIR[frozenset(_p2)] = _q


class IncompleteEnumeration(RuntimeError):
    """Raised when an enumeration budget is exhausted; results would be partial."""


def coord(tet, disk):
    return 7 * tet + disk


def partner(q, v):
    """The vertex paired with ``v`` by quad type ``q``."""
    for pair in QUAD_PAIRS[q]:
        if v in pair:
            return pair[0] if pair[1] == v else pair[1]
    raise ValueError(v)


@dataclass(frozen=True)
class NormalCoordinates:
    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) % 7:
            raise ValueError("coordinate vector length must be a multiple of 7")
        if any(c < 0 for c in counts):
            raise ValueError("normal coordinates must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def num_tetrahedra(self):
        return len(self.counts) // 7

    def tri(self, tet, v):
        return self.counts[7 * tet + v]

    def quad(self, tet, q):
        return self.counts[7 * tet + 4 + q]

    def quad_type(self, tet):
        """Index of the nonzero quad type in ``tet`` (None if quad-free)."""
        nz = [q for q in range(3) if self.quad(tet, q)]
        return nz[0] if len(nz) == 1 else (None if not nz else -1)

    def has_quads(self):
        return any(self.quad(t, q) for t in range(self.num_tetrahedra) for q in range(3))

    def __add__(self, other):
        return NormalCoordinates(tuple(a + b for a, b in zip(self.counts, other.counts)))

    def scaled(self, k):
        return NormalCoordinates(tuple(k * c for c in self.counts))

    def __iter__(self):
        return iter(self.counts)

    def __len__(self):
        return len(self.counts)


def as_coordinates(x):
    return x if isinstance(x, NormalCoordinates) else NormalCoordinates(tuple(x))


def vertex_linking(T, cusp=None):
    """Coordinates of the vertex-linking surface (all cusps, or one cusp)."""
    from .triangulation import vertex_classes

    counts = [0] * (7 * T.num_tetrahedra)
    classes = vertex_classes(T)
    chosen = classes if cusp is None else [classes[cusp]]
    for cls in chosen:
        for tet, v in cls:
            counts[coord(tet, v)] = 1
    return NormalCoordinates(tuple(counts))


# ----------------------------------------------------------------- matching


@dataclass(frozen=True)
class MatchingSystem:
    """Equations ``x[i] + x[j] == x[k] + x[l]``, one per arc type per glued face pair."""

    num_variables: int
    equations: tuple

    def residuals(self, x):
        x = list(x)
        return [x[i] + x[j] - x[k] - x[l] for i, j, k, l in self.equations]

    def satisfied(self, x):
        return not any(self.residuals(x))

    def matrix(self):
        rows = []
        for i, j, k, l in self.equations:
            row = [0] * self.num_variables
            row[i] += 1
            row[j] += 1
            row[k] -= 1
            row[l] -= 1
            rows.append(row)
        return rows


def matching_equations(T):
    eqs = []
    for (a, f), (b, g), perm in T.face_pairs():
        for u in range(4):
            if u == f:
                continue
            su, sf = perm[u], perm[f]
            eqs.append(
                (
                    coord(a, u),
                    coord(a, 4 + QUAD_OF_PAIR[frozenset((u, f))]),
                    coord(b, su),
                    coord(b, 4 + QUAD_OF_PAIR[frozenset((su, sf))]),
                )
            )
    return MatchingSystem(7 * T.num_tetrahedra, tuple(eqs))


def quads_compatible(x):
    x = as_coordinates(x)
    return all(
        sum(1 for q in range(3) if x.quad(t, q)) <= 1 for t in range(x.num_tetrahedra)
    )


def is_admissible(T, x, system=None):
    x = as_coordinates(x)
    if len(x) != 7 * T.num_tetrahedra:
        raise ValueError(f"length mismatch: expected {7 * T.num_tetrahedra}, got {len(x)}")
    system = matching_equations(T) if system is None else system
    return quads_compatible(x) and system.satisfied(x.counts)


# ----------------------------------------------------------------- Euler


def euler_coefficients(T):
    """Exact per-coordinate contributions to the Euler characteristic.

    A disk with ``n`` sides contributes ``1 - n/2 + sum 1/valence`` over its
    corners, the valence being that of the edge class the corner lies on.
    """
    classes = compute_edge_classes(T)
    lookup = edge_class_lookup(T, classes)
    coeffs = []
    for tet in range(T.num_tetrahedra):
        for v in range(4):
            corners = [(v, w) for w in range(4) if w != v]
            coeffs.append(_disk_coeff(3, corners, tet, lookup, classes))
        for q in range(3):
            (p1, p2) = QUAD_PAIRS[q]
            corners = [(a, b) for a in p1 for b in p2]
            coeffs.append(_disk_coeff(4, corners, tet, lookup, classes))
    return coeffs


def _disk_coeff(nsides, corners, tet, lookup, classes):
    total = Fraction(1) - Fraction(nsides, 2)
    for a, b in corners:
        total += Fraction(1, classes[lookup[(tet, EDGE_INDEX[frozenset((a, b))])]].valence)
    return total


def euler_characteristic(T, x, coeffs=None):
    coeffs = euler_coefficients(T) if coeffs is None else coeffs
    chi = sum(c * n for c, n in zip(coeffs, as_coordinates(x).counts))
    if chi.denominator != 1:
        raise ValueError("non-integral Euler characteristic: coordinates are not a surface")
    return int(chi)


def euler_bound(volume, orientable_only=False):
    """Largest ``|chi|`` a closed totally geodesic surface can have.

    From ``vol >= 4 pi mu3(0) |chi|``.  With ``orientable_only`` the bound is
    rounded down to an even number.
    """
    if volume <= 0:
        raise ValueError("volume must be positive")
    bound = math.floor(volume / VOLUME_PER_EULER)
    if orientable_only:
        bound -= bound % 2
    return bound


# ----------------------------------------------------------------- complex


@dataclass(frozen=True)
class Disk:
    tet: int
    kind: int  # 0..3 triangle at that vertex, 4..6 quad type kind-4
    copy: int

    def faces(self):
        if self.kind < 4:
            return tuple(f for f in range(4) if f != self.kind)
        return (0, 1, 2, 3)

    def corner_of_face(self, f):
        """The face vertex whose corner this disk's arc on face ``f`` cuts off."""
        if self.kind < 4:
            return self.kind
        return partner(self.kind - 4, f)

    def edges(self):
        """Tetrahedron edges (as vertex pairs) carrying a corner of this disk."""
        if self.kind < 4:
            v = self.kind
            return tuple(tuple(sorted((v, w))) for w in range(4) if w != v)
        p1, p2 = QUAD_PAIRS[self.kind - 4]
        return tuple(tuple(sorted((a, b))) for a in p1 for b in p2)

    def side_sign(self, u):
        """+1 if the disk's reference normal points toward vertex ``u``'s corner."""
        if self.kind < 4:
            return 1
        p1, _ = QUAD_PAIRS[self.kind - 4]
        return 1 if u in p1 else -1


@dataclass
class SurfaceComplex:
    """Cell structure a normal coordinate vector induces.

    ``arc_gluings[k] = ((i, f), (j, g))``: the arc of disk ``i`` on face ``f`` of
    its tetrahedron is glued to the arc of disk ``j`` on face ``g``.  The
    vertices of the complex are classes of disk corners ``(disk, edge)``.
    """

    disks: list
    arc_gluings: list
    vertices: list
    euler_characteristic: int
    orientable: bool
    components: list
    arc_index: dict = field(repr=False, default_factory=dict)

    @property
    def num_components(self):
        return len(self.components)

    @property
    def connected(self):
        return len(self.components) == 1

    def glued_arc(self, disk, face):
        k, side = self.arc_index[(disk, face)]
        return self.arc_gluings[k][1 - side]


def _arc_position(x, disk, f):
    """Position of ``disk``'s arc on face ``f`` within its corner's stack."""
    u = disk.corner_of_face(f)
    n_tri = x.tri(disk.tet, u)
    if disk.kind < 4:
        return disk.copy
    n_q = x.quad(disk.tet, disk.kind - 4)
    p1, _ = QUAD_PAIRS[disk.kind - 4]
    return n_tri + (disk.copy if u in p1 else n_q - 1 - disk.copy)


def build_surface_complex(T, x, check=True):
    x = as_coordinates(x)
    if check and not is_admissible(T, x):
        raise ValueError("coordinates are not admissible")
    disks = []
    for tet in range(T.num_tetrahedra):
        for kind in range(7):
            for c in range(x.counts[coord(tet, kind)]):
                disks.append(Disk(tet, kind, c))
    index = {d: i for i, d in enumerate(disks)}

    # arc at (tet, face, corner, position) -> (disk index, face)
    slots = {}
    for i, d in enumerate(disks):
        for f in d.faces():
            slots[(d.tet, f, d.corner_of_face(f), _arc_position(x, d, f))] = (i, f)

    arc_gluings = []
    arc_index = {}
    for (tet, f, u, pos), (i, _) in sorted(slots.items()):
        if (i, f) in arc_index:
            continue
        b, perm = T.gluings[tet][f]
        j, g = slots[(b, perm[f], perm[u], pos)]
        k = len(arc_gluings)
        arc_gluings.append(((i, f), (j, g)))
        arc_index[(i, f)] = (k, 0)
        arc_index[(j, g)] = (k, 1)

    # vertices: classes of (disk, edge) corners
    parent = {}

    def find(a):
        parent.setdefault(a, a)
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, d in enumerate(disks):
        for e in d.edges():
            find((i, e))
    for (i, f), (j, g) in arc_gluings:
        d = disks[i]
        tet = d.tet
        perm = T.gluings[tet][f][1]
        u = d.corner_of_face(f)
        for a in range(4):
            if a in (u, f):
                continue
            ra = find((i, tuple(sorted((u, a)))))
            rb = find((j, tuple(sorted((perm[u], perm[a])))))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    vclasses = {}
    for key in sorted(parent):
        vclasses.setdefault(find(key), []).append(key)
    vertices = sorted(vclasses.values())

    chi = len(vertices) - len(arc_gluings) + len(disks)

    # components and transverse orientation (two-sidedness == orientability here)
    adjacency = [[] for _ in disks]
    for (i, f), (j, g) in arc_gluings:
        u = disks[i].corner_of_face(f)
        w = disks[j].corner_of_face(g)
        rel = disks[i].side_sign(u) * disks[j].side_sign(w)
        adjacency[i].append((j, rel))
        adjacency[j].append((i, rel))
    sign = [0] * len(disks)
    components = []
    orientable = True
    for start in range(len(disks)):
        if sign[start]:
            continue
        sign[start] = 1
        comp = [start]
        stack = [start]
        while stack:
            i = stack.pop()
            for j, rel in adjacency[i]:
                want = sign[i] * rel
                if not sign[j]:
                    sign[j] = want
                    comp.append(j)
                    stack.append(j)
                elif sign[j] != want:
                    orientable = False
        components.append(sorted(comp))
    return SurfaceComplex(disks, arc_gluings, vertices, chi, orientable, components, arc_index)


def vertex_walks(S, T):
    """Cyclic arc crossings around every vertex of the surface complex.

    Each walk is a list of ``(gluing index, +1/-1)`` where ``+1`` means the
    gluing is crossed from its first arc to its second.
    """
    walks = []
    seen = set()
    for cls in S.vertices:
        i, e = cls[0]
        if (i, e) in seen:
            continue
        f_out = min(f for f in range(4) if f not in e)
        walk = []
        cur, edge, face = i, e, f_out
        while (cur, edge) not in seen:
            seen.add((cur, edge))
            k, side = S.arc_index[(cur, face)]
            walk.append((k, 1 if side == 0 else -1))
            (j, g) = S.arc_gluings[k][1 - side]
            d = S.disks[cur]
            perm = T.gluings[d.tet][face][1]
            nedge = tuple(sorted((perm[edge[0]], perm[edge[1]])))
            (nface,) = set(range(4)) - set(nedge) - {g}
            cur, edge, face = j, nedge, nface
        walks.append(walk)
    return walks


def connected_components(T, x):
    return build_surface_complex(T, x).components


def letscher_tube_check(T, x):
    """Edge classes fully encircled by quads that separate them from the opposite edge."""
    x = as_coordinates(x)
    flagged = []
    for idx, cls in enumerate(compute_edge_classes(T)):
        if all(x.quad(tet, QUAD_OF_PAIR[frozenset(EDGES[e])]) > 0 for tet, e in cls.members):
            flagged.append(idx)
    return flagged


def halve_if_double(T, x):
    """``x/2`` when every entry is even and the half is a connected one-sided surface."""
    x = as_coordinates(x)
    if not any(x.counts):
        return None
    if any(c % 2 for c in x.counts):
        return None
    half = NormalCoordinates(tuple(c // 2 for c in x.counts))
    if not is_admissible(T, half):
        return None
    S = build_surface_complex(T, half, check=False)
    if S.connected and not S.orientable:
        return half
    return None


# ----------------------------------------------------------------- enumeration


def minimal_triangle_completion(T, quads, system=None):
    """Smallest non-negative triangle counts making ``quads`` a closed surface.

    ``quads`` maps ``(tet, quad type)`` to a count.  The matching equations fix
    triangle counts up to adding whole vertex-linking surfaces; within every
    cusp the completion is shifted so that its smallest triangle count is 0.
    Returns None when no completion exists.
    """
    t = T.num_tetrahedra
    counts = [0] * (7 * t)
    for (tet, q), n in quads.items():
        counts[coord(tet, 4 + q)] = n
    system = matching_equations(T) if system is None else system
    # tri(i) - tri(k) = x[l] - x[j]
    adj = {}
    for i, j, k, l in system.equations:
        delta = counts[l] - counts[j]
        adj.setdefault(i, []).append((k, -delta))
        adj.setdefault(k, []).append((i, delta))
    value = {}
    for tet in range(t):
        for v in range(4):
            start = coord(tet, v)
            if start in value:
                continue
            value[start] = 0
            comp = [start]
            stack = [start]
            while stack:
                a = stack.pop()
                for b, d in adj.get(a, ()):
                    # value[b] = value[a] + d
                    if b not in value:
                        value[b] = value[a] + d
                        comp.append(b)
                        stack.append(b)
                    elif value[b] != value[a] + d:
                        return None
            low = min(value[c] for c in comp)
            for c in comp:
                value[c] -= low
    for key, val in value.items():
        counts[key] = val
    return NormalCoordinates(tuple(counts))


def _lp_bounds(T, system, coeffs, max_euler_abs):
    import numpy as np

    A = np.array(system.matrix(), dtype=float) if system.equations else np.zeros((0, 7 * T.num_tetrahedra))
    c = np.array([float(v) for v in coeffs])
    # -B <= chi <= -1   written as  A_ub x <= b_ub
    A_ub = np.vstack([c, -c])
    b_ub = np.array([-1.0, float(max_euler_abs)])
    return A, A_ub, b_ub


class _LP:
    def __init__(self, T, system, coeffs, max_euler_abs, budget):
        self.A_eq, self.A_ub, self.b_ub = _lp_bounds(T, system, coeffs, max_euler_abs)
        self.n = 7 * T.num_tetrahedra
        self.calls = 0
        self.budget = budget

    def solve(self, objective, bounds):
        from scipy.optimize import linprog
        import numpy as np

        self.calls += 1
        if self.calls > self.budget:
            raise IncompleteEnumeration(f"LP budget of {self.budget} calls exhausted")
        res = linprog(
            objective,
            A_ub=self.A_ub,
            b_ub=self.b_ub,
            A_eq=self.A_eq if len(self.A_eq) else None,
            b_eq=np.zeros(len(self.A_eq)) if len(self.A_eq) else None,
            bounds=bounds,
            method="highs",
        )
        return res

    def feasible(self, bounds):
        import numpy as np

        res = self.solve(np.zeros(self.n), bounds)
        return res.status == 0

    def maximize(self, var, bounds):
        import numpy as np

        obj = np.zeros(self.n)
        obj[var] = -1.0
        res = self.solve(obj, bounds)
        if res.status == 3:
            return math.inf
        if res.status != 0:
            return None
        return -res.fun


@dataclass
class EnumerationStats:
    lp_calls: int = 0
    patterns_visited: int = 0
    candidates: int = 0


def enumerate_admissible(T, max_euler_abs, lp_budget=200_000, candidate_budget=2_000_000,
                         stats=None):
    """All connected closed normal surfaces with ``-max_euler_abs <= chi < 0``.

    Completeness: a connected surface containing quads never has a whole
    vertex-linking surface as a summand (that summand would be a separate
    component), so it is the minimal triangle completion of its quad vector.
    The quad vectors are enumerated exactly by branch and bound: a search
    over quad types per tetrahedron, then over integer quad counts, pruned by
    linear programs over the matching cone cut by ``-B <= chi <= -1``.  If some
    quad count is unbounded on that region (a quad-bearing surface with
    ``chi >= 0`` exists) no finite search is complete and
    :class:`IncompleteEnumeration` is raised, as it is when a budget runs out.
    """
    if max_euler_abs < 1:
        return []
    stats = EnumerationStats() if stats is None else stats
    t = T.num_tetrahedra
    system = matching_equations(T)
    coeffs = euler_coefficients(T)
    lp = _LP(T, system, coeffs, max_euler_abs, lp_budget)
    found = set()

    def bounds_for(pattern, fixed=None):
        b = []
        for tet in range(t):
            b.extend([(0, None)] * 4)
            for q in range(3):
                if tet < len(pattern):
                    if pattern[tet] != q:
                        b.append((0, 0))
                    elif fixed is not None and (tet, q) in fixed:
                        b.append((fixed[(tet, q)], fixed[(tet, q)]))
                    else:
                        b.append((1, None))
                else:
                    b.append((0, None))
        return b

    def assign(pattern, active, fixed):
        if not lp.feasible(bounds_for(pattern, fixed)):
            return
        if len(fixed) == len(active):
            stats.candidates += 1
            if stats.candidates > candidate_budget:
                raise IncompleteEnumeration("candidate budget exhausted")
            x = minimal_triangle_completion(T, fixed, system)
            if x is None:
                return
            chi = euler_characteristic(T, x, coeffs)
            if not (-max_euler_abs <= chi <= -1):
                return
            if build_surface_complex(T, x, check=False).connected:
                found.add(x.counts)
            return
        key = active[len(fixed)]
        var = coord(key[0], 4 + key[1])
        upper = lp.maximize(var, bounds_for(pattern, fixed))
        if upper is None:
            return
        if math.isinf(upper):
            raise IncompleteEnumeration(
                f"quad count of tetrahedron {key[0]} is unbounded for |chi| <= {max_euler_abs}"
            )
        for n in range(1, int(math.floor(upper + 1e-7)) + 1):
            assign(pattern, active, {**fixed, key: n})

    def choose(pattern):
        stats.patterns_visited += 1
        if not lp.feasible(bounds_for(pattern)):
            return
        if len(pattern) == t:
            active = [(tet, q) for tet, q in enumerate(pattern) if q is not None]
            if active:
                assign(pattern, active, {})
            return
        for q in (None, 0, 1, 2):
            choose(pattern + (q,))

    choose(())
    stats.lp_calls = lp.calls
    return [NormalCoordinates(c) for c in sorted(found)]


def vertex_surfaces(T, max_rays=100_000):
    """Admissible extreme rays of the matching cone (double description).

    Hyperplanes are intersected one at a time; combinations of two
    quad-incompatible rays are dropped as they appear, which is safe because
    every admissible vector lies on a face cut out by quad coordinates.
    Rays are returned as primitive integer vectors.
    """
    n = 7 * T.num_tetrahedra
    system = matching_equations(T)
    rays = []
    for i in range(n):
        v = [0] * n
        v[i] = 1
        rays.append(tuple(v))

    def zero_mask(v):
        m = 0
        for i, c in enumerate(v):
            if c == 0:
                m |= 1 << i
        return m

    for row in system.matrix():
        pos, neg, zer = [], [], []
        for r in rays:
            s = sum(a * b for a, b in zip(row, r))
            (pos if s > 0 else neg if s < 0 else zer).append((r, s))
        masks = {r: zero_mask(r) for r in rays}
        new = [r for r, _ in zer]
        for r, sr in pos:
            for s, ss in neg:
                common = masks[r] & masks[s]
                if any(
                    o != r and o != s and (common & ~masks[o]) == 0 for o in rays
                ):
                    continue
                v = tuple(-ss * a + sr * b for a, b in zip(r, s))
                if not quads_compatible(v):
                    continue
                g = 0
                for c in v:
                    g = math.gcd(g, c)
                new.append(tuple(c // g for c in v))
                if len(new) > max_rays:
                    raise IncompleteEnumeration(f"more than {max_rays} intermediate rays")
        rays = sorted(set(new))
    return [NormalCoordinates(r) for r in rays if quads_compatible(r)]


# ----------------------------------------------------------------- files


def surface_to_json(T, x):
    return {"coordinates": list(as_coordinates(x).counts), "triangulation_hash": T.checksum()}


def parse_surface(text, T=None):
    data = json.loads(text)
    x = NormalCoordinates(tuple(data["coordinates"]))
    if T is not None:
        if len(x) != 7 * T.num_tetrahedra:
            raise ValueError("surface length does not match the triangulation")
        expected = data.get("triangulation_hash")
        if expected is not None and expected != T.checksum():
            raise ValueError("surface file refers to a different triangulation")
    return x
