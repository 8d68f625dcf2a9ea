"""Independent reference computations used by the test-suite."""
import math
from itertools import product

from scipy.integrate import quad

from geoscan.normal import build_surface_complex, matching_equations


def _xlogx(x):
    return x * math.log(x) - x if x > 0 else 0.0


def lobachevsky_quadrature(theta):
    """``-int_0^theta log|2 sin u| du`` by quadrature.

    On each cell ``[k pi, (k+1) pi]`` the two log singularities are taken out in
    closed form; quad only sees the bounded remainder.
    """
    lo, hi, sign = (0.0, theta, 1.0) if theta >= 0 else (theta, 0.0, -1.0)
    cuts = [lo] + [k * math.pi for k in range(math.floor(lo / math.pi) + 1, math.ceil(hi / math.pi))] + [hi]
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        if b <= a:
            continue
        L = math.floor((a + b) / 2 / math.pi) * math.pi
        R = L + math.pi

        def rest(u):
            return math.log(abs(2 * math.sin(u))) - math.log(u - L) - math.log(R - u)

        sing = (_xlogx(b - L) - _xlogx(a - L)) + (_xlogx(R - a) - _xlogx(R - b))
        total -= sing + quad(rest, a, b, limit=200, epsabs=1e-14)[0]
    return sign * total


def brute_force_admissible(T, max_entry):
    """Every admissible coordinate vector with all entries <= ``max_entry``.

    Depth-first search over the 7t entries.  Whenever a matching equation has a
    single unassigned variable its value is forced; out-of-range or negative
    forced values prune the branch.
    """
    n = 7 * T.num_tetrahedra
    eqs = matching_equations(T).equations
    touching = [[] for _ in range(n)]
    for e in eqs:
        for v in set(e):
            touching[v].append(e)
    out = []

    def quad_ok(x, v):
        tet, disk = divmod(v, 7)
        if disk < 4 or not x[v]:
            return True
        base = 7 * tet + 4
        return all(not x[base + q] for q in range(3) if base + q != v and x[base + q] is not None)

    def propagate(x, queue):
        while queue:
            v = queue.pop()
            if not quad_ok(x, v):
                return False
            for e in touching[v]:
                i, j, k, l = e
                unknown = [p for p in e if x[p] is None]
                if not unknown:
                    if x[i] + x[j] != x[k] + x[l]:
                        return False
                elif len(set(unknown)) == 1:
                    u = unknown[0]
                    mult = (i == u) + (j == u) - (k == u) - (l == u)
                    rest = sum(x[p] or 0 for p in (i, j)) - sum(x[p] or 0 for p in (k, l))
                    if mult == 0:
                        if rest:
                            return False
                        continue
                    if rest % mult:
                        return False
                    val = -rest // mult
                    if not 0 <= val <= max_entry:
                        return False
                    x[u] = val
                    queue.append(u)
        return True

    def rec(x):
        try:
            pos = x.index(None)
        except ValueError:
            out.append(tuple(x))
            return
        for val in range(max_entry + 1):
            y = list(x)
            y[pos] = val
            if propagate(y, [pos]):
                rec(y)

    rec([None] * n)
    return sorted(set(out))


def brute_force_surfaces(T, max_entry, max_euler_abs):
    """Connected admissible surfaces with ``-max_euler_abs <= chi < 0``, entries bounded."""
    found = []
    for x in brute_force_admissible(T, max_entry):
        if not any(x):
            continue
        S = build_surface_complex(T, x, check=False)
        if S.connected and -max_euler_abs <= S.euler_characteristic <= -1:
            found.append(x)
    return sorted(found)


def words_up_to(num_generators, length):
    letters = [k for g in range(1, num_generators + 1) for k in (g, -g)]
    for n in range(length + 1):
        yield from product(letters, repeat=n)
