"""Fundamental groups from dual 1-skeletons.

Generators are the dual edges outside a breadth-first spanning tree.  For the
manifold the dual edges are glued face pairs (oriented from the
representative side listed by ``IdealTriangulation.face_pairs``); for a
normal surface they are glued arc pairs of its ``SurfaceComplex``.  Words are
tuples of signed 1-based generator indices.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .normal import build_surface_complex, vertex_walks
from .triangulation import EDGES


class PresentationError(ValueError):
    pass


# ----------------------------------------------------------------- words


def free_reduce(letters):
    out = []
    for a in letters:
        if a == 0:
            raise ValueError("0 is not a generator letter")
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def cyclic_reduce(letters):
    w = list(free_reduce(letters))
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return tuple(w[i:j + 1])


@dataclass(frozen=True)
class Word:
    letters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(a) for a in self.letters))
        if any(a == 0 for a in self.letters):
            raise ValueError("0 is not a generator letter")

    def reduced(self):
        return Word(free_reduce(self.letters))

    def cyclically_reduced(self):
        return Word(cyclic_reduce(self.letters))

    def inverse(self):
        return Word(tuple(-a for a in reversed(self.letters)))

    def __mul__(self, other):
        return Word(free_reduce(self.letters + other.letters))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self):
        if not self.letters:
            return "1"
        names = "abcdefghijklmnopqrstuvwxyz"
        parts = []
        for a in self.letters:
            k = abs(a) - 1
            name = names[k] if k < 26 else f"g{k + 1}"
            parts.append(name if a > 0 else name + "^-1")
        return " ".join(parts)


def parse_word(text):
    """``"a b A B"`` style (capital = inverse) or ``"a b a^-1 b^-1"``."""
    out = []
    for tok in text.replace("*", " ").split():
        inv = tok.endswith("^-1")
        tok = tok[:-3] if inv else tok
        if len(tok) == 1 and tok.isupper():
            tok, inv = tok.lower(), not inv
        k = ord(tok) - ord("a") + 1
        out.append(-k if inv else k)
    return Word(tuple(out))


@dataclass
class GroupPresentation:
    num_generators: int
    relators: list
    origin: list = None  # generator -> index in the presentation it was simplified from

    def __post_init__(self):
        self.relators = [r if isinstance(r, Word) else Word(tuple(r)) for r in self.relators]
        for r in self.relators:
            if any(abs(a) > self.num_generators for a in r):
                raise PresentationError(f"relator {r.letters} uses an unknown generator")

    def to_json(self):
        return {"num_generators": self.num_generators, "relators": [list(r.letters) for r in self.relators]}


# ----------------------------------------------------------------- skeletons


@dataclass
class DualSkeleton:
    """Nodes ``0..num_nodes-1``; ``edges[k] = (a, b)`` oriented from a to b."""

    num_nodes: int
    edges: list
    basepoint: int = 0
    labels: list = field(default_factory=list)

    def adjacency(self):
        adj = [[] for _ in range(self.num_nodes)]
        for k, (a, b) in enumerate(self.edges):
            adj[a].append((k, b, 1))
            adj[b].append((k, a, -1))
        return adj

    def spanning_tree(self):
        """Breadth-first tree from the basepoint.

        Returns ``(tree_edges, parent)`` with ``parent[node] = (edge, sign,
        previous node)``; ties broken by node then edge index.
        """
        adj = self.adjacency()
        parent = {self.basepoint: None}
        queue = deque([self.basepoint])
        tree = set()
        while queue:
            a = queue.popleft()
            for k, b, s in sorted(adj[a]):
                if b not in parent:
                    parent[b] = (k, s, a)
                    tree.add(k)
                    queue.append(b)
        if len(parent) != self.num_nodes:
            raise PresentationError("dual skeleton is disconnected")
        return tree, parent

    def path_from_base(self, node, parent):
        """Signed edge crossings along the tree path basepoint -> node."""
        steps = []
        while parent[node] is not None:
            k, s, prev = parent[node]
            steps.append((k, s))
            node = prev
        return steps[::-1]


def dual_skeleton_manifold(T, basepoint=0):
    if not T.is_connected():
        raise PresentationError("triangulation is disconnected")
    pairs = T.face_pairs()
    edges = [(a, b) for (a, _), (b, _), _ in pairs]
    return DualSkeleton(T.num_tetrahedra, edges, basepoint, [(af, bg) for af, bg, _ in pairs])


@dataclass
class ManifoldPresentation:
    skeleton: DualSkeleton
    tree: set
    parent: dict
    generator_of_edge: dict  # dual edge index -> generator (1-based)
    presentation: GroupPresentation
    face_edge: dict  # (tet, face) -> (dual edge index, +1 leaving from this side)

    @property
    def num_generators(self):
        return self.presentation.num_generators

    def crossing_letter(self, k, sign):
        g = self.generator_of_edge.get(k)
        return None if g is None else sign * g

    def word_of_crossings(self, crossings):
        letters = [self.crossing_letter(k, s) for k, s in crossings]
        return Word(free_reduce([a for a in letters if a is not None]))


def edge_loops(T):
    """For each edge class, the cyclic sequence of (tet, face) exits around it."""
    seen = set()
    loops = []
    for tet in range(T.num_tetrahedra):
        for e, (a, b) in enumerate(EDGES):
            if (tet, (a, b)) in seen:
                continue
            c = min(v for v in range(4) if v not in (a, b))
            cur, edge, face = tet, (a, b), c
            loop = []
            while (cur, edge) not in seen:
                seen.add((cur, edge))
                loop.append((cur, face))
                nbr, perm = T.gluings[cur][face]
                nedge = tuple(sorted((perm[edge[0]], perm[edge[1]])))
                entered = perm[face]
                (nface,) = set(range(4)) - set(nedge) - {entered}
                cur, edge, face = nbr, nedge, nface
            loops.append(loop)
    return loops


def manifold_presentation(T, basepoint=0):
    D = dual_skeleton_manifold(T, basepoint)
    tree, parent = D.spanning_tree()
    gen = {}
    for k in range(len(D.edges)):
        if k not in tree:
            gen[k] = len(gen) + 1
    face_edge = {}
    for k, (af, bg) in enumerate(D.labels):
        face_edge[af] = (k, 1)
        if bg != af:
            face_edge[bg] = (k, -1)
    partial = ManifoldPresentation(D, tree, parent, gen, GroupPresentation(len(gen), []), face_edge)
    relators = []
    for loop in edge_loops(T):
        relators.append(partial.word_of_crossings([exit_crossing(face_edge, tf) for tf in loop]))
    partial.presentation = GroupPresentation(len(gen), relators)
    return partial


def exit_crossing(face_edge, tet_face):
    """Dual edge crossing made when leaving ``tet`` through ``face``."""
    k, s = face_edge[tet_face]
    return k, s


# ----------------------------------------------------------------- surfaces


@dataclass
class SurfacePresentation:
    complex: object
    skeleton: DualSkeleton
    tree: set
    parent: dict
    generator_of_edge: dict
    presentation: GroupPresentation

    def generator_edges(self):
        return sorted(self.generator_of_edge, key=self.generator_of_edge.get)


def dual_skeleton_surface(S):
    edges = [(i, j) for (i, _), (j, _) in S.arc_gluings]
    return DualSkeleton(len(S.disks), edges, 0, list(S.arc_gluings))


def surface_presentation(S, T):
    """Unsimplified presentation: one relator per vertex of the complex."""
    if not S.disks:
        raise PresentationError("empty surface")
    if not S.connected:
        raise PresentationError("surface is disconnected")
    D = dual_skeleton_surface(S)
    tree, parent = D.spanning_tree()
    gen = {}
    for k in range(len(D.edges)):
        if k not in tree:
            gen[k] = len(gen) + 1
    relators = []
    for walk in vertex_walks(S, T):
        relators.append(Word(free_reduce([s * gen[k] for k, s in walk if k in gen])))
    return SurfacePresentation(S, D, tree, parent, gen, GroupPresentation(len(gen), relators))


def _canonical_cyclic(letters):
    """Representative of a cyclic word up to rotation and inversion."""
    if not letters:
        return ()
    inv = tuple(-a for a in reversed(letters))
    rots = [w[i:] + w[:i] for w in (letters, inv) for i in range(len(w))]
    return min(rots)


def simplify_presentation(P, max_passes=10_000):
    """Tietze moves toward a single relator.

    Repeatedly picks a generator occurring exactly once in some relator,
    solves for it there and substitutes it everywhere else; cyclically reduces;
    drops empty and duplicate relators; renumbers the surviving generators.
    """
    rels = [cyclic_reduce(r.letters) for r in P.relators]
    gens = set(range(1, P.num_generators + 1))
    for _ in range(max_passes):
        rels = [r for r in rels if r]
        uniq = {}
        for r in rels:
            uniq.setdefault(_canonical_cyclic(r), r)
        rels = list(uniq.values())
        move = _find_elimination(rels, prefer_shared=len(rels) > 1)
        if move is None:
            break
        ri, pos, g = move
        r = rels[ri]
        rot = r[pos:] + r[:pos]  # starts with the occurrence
        rest = rot[1:]
        # rot = a * rest = 1 with a = +-g, so a = rest^-1
        a = rot[0]
        sub_pos = tuple(-b for b in reversed(rest)) if a > 0 else rest  # value of g
        sub_neg = tuple(-b for b in reversed(sub_pos))
        new = []
        for k, s in enumerate(rels):
            if k == ri:
                continue
            out = []
            for b in s:
                if b == g:
                    out.extend(sub_pos)
                elif b == -g:
                    out.extend(sub_neg)
                else:
                    out.append(b)
            new.append(cyclic_reduce(out))
        rels = new
        gens.discard(g)
    else:
        raise PresentationError("simplification did not terminate")
    order = sorted(gens)
    renum = {g: i + 1 for i, g in enumerate(order)}
    rels = [tuple((1 if b > 0 else -1) * renum[abs(b)] for b in r) for r in rels if r]
    return GroupPresentation(len(order), [Word(r) for r in rels], order)


def _find_elimination(rels, prefer_shared):
    counts = [Counter(abs(b) for b in r) for r in rels]
    total = Counter()
    for c in counts:
        total.update(c)
    best = None
    for ri, r in enumerate(rels):
        for pos, b in enumerate(r):
            g = abs(b)
            if counts[ri][g] != 1:
                continue
            shared = total[g] > 1
            if prefer_shared and not shared:
                # eliminating a lone generator would kill a relator that is
                # still needed to merge the others
                continue
            key = (len(r), ri, pos)
            if best is None or key < best[0]:
                best = (key, (ri, pos, g))
    if best is None and prefer_shared:
        return _find_elimination(rels, False)
    return None if best is None else best[1]


@dataclass
class PresentationVerdict:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def verify_surface_presentation(P, orientable):
    """Single-relator surface presentation check."""
    rels = [r for r in P.relators if len(r)]
    if len(rels) != 1:
        return PresentationVerdict(False, f"not a surface presentation: {len(rels)} relators")
    r = rels[0].letters
    used = {abs(b) for b in r}
    if used != set(range(1, P.num_generators + 1)):
        return PresentationVerdict(False, "some generator does not occur in the relator")
    same_sign = False
    for g in used:
        occ = [b for b in r if abs(b) == g]
        if len(occ) != 2:
            return PresentationVerdict(False, f"generator {g} occurs {len(occ)} times")
        if occ[0] == occ[1]:
            same_sign = True
    if orientable and same_sign:
        return PresentationVerdict(False, "orientable relator needs each g once and g^-1 once")
    if not orientable and not same_sign:
        return PresentationVerdict(False, "non-orientable relator needs a generator repeated with one sign")
    if not _corners_identified(r):
        return PresentationVerdict(False, "polygon corners fall into more than one vertex class")
    return PresentationVerdict(True, "")


def _corners_identified(r):
    n = len(r)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def ends(pos):
        # side pos runs from corner pos to corner pos+1, read along the generator
        tail, head = pos, (pos + 1) % n
        return (tail, head) if r[pos] > 0 else (head, tail)

    occ = {}
    for pos, b in enumerate(r):
        occ.setdefault(abs(b), []).append(pos)
    for p, q in occ.values():
        for a, b in zip(ends(p), ends(q)):
            parent[find(a)] = find(b)
    return len({find(a) for a in range(n)}) == 1


# ----------------------------------------------------------------- embedding surface groups


def surface_crossings_to_manifold(SP, MP, T, crossings):
    """Map surface dual-edge crossings to manifold dual-edge crossings."""
    S = SP.complex
    out = []
    for k, s in crossings:
        (i, f), (j, g) = S.arc_gluings[k]
        if s > 0:
            tet, face = S.disks[i].tet, f
        else:
            tet, face = S.disks[j].tet, g
        out.append(exit_crossing(MP.face_edge, (tet, face)))
    return out


def surface_generator_loops(SP):
    """Closed crossing sequences (basepoint loops) for each surface generator."""
    D, parent = SP.skeleton, SP.parent
    loops = []
    for k in SP.generator_edges():
        a, b = D.edges[k]
        there = D.path_from_base(a, parent)
        back = [(e, -s) for e, s in reversed(D.path_from_base(b, parent))]
        loops.append(there + [(k, 1)] + back)
    return loops


def embed_surface_generators(T, S=None, x=None, MP=None, SP=None):
    """Words in the manifold generators for every surface generator."""
    if S is None:
        S = build_surface_complex(T, x)
    MP = manifold_presentation(T) if MP is None else MP
    SP = surface_presentation(S, T) if SP is None else SP
    words = []
    for loop in surface_generator_loops(SP):
        words.append(MP.word_of_crossings(surface_crossings_to_manifold(SP, MP, T, loop)))
    return words


def push_word(word, images):
    """Substitute manifold words for the generators of ``word``."""
    out = []
    for a in word:
        w = images[abs(a) - 1]
        out.extend(w.letters if a > 0 else w.inverse().letters)
    return Word(free_reduce(out))
