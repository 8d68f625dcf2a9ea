import json
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cached, manifold_rep
from geoscan.fixtures import triangulation_with_generators
from geoscan.fundgroup import Word, manifold_presentation
from geoscan.holonomy import (
    DegeneratePlacement,
    InconsistentDevelopment,
    MobiusMatrix,
    develop_tree,
    evaluate_word,
    evaluate_word_exact,
    face_pairing_matrix,
    mobius_from_triples,
    representation,
    representation_from_file,
    representation_from_shapes,
)
from geoscan.triangulation import IdealTriangulation, parse_triangulation

FIXTURES = ["figure8", "m003", "m006", "m009", "m015", "m412", "cover_m412_3"]
INF = (1, 0)


def _pt(z):
    return INF if z == "inf" else (complex(z), 1)


def _words(n, max_len):
    letters = [s * g for g in range(1, n + 1) for s in (1, -1)]
    return st.lists(st.sampled_from(letters), max_size=max_len).map(lambda v: Word(tuple(v)))


def test_triple_map_example():
    src = [_pt(0), _pt(1), _pt("inf")]
    dst = [_pt("inf"), _pt(0), _pt(1)]
    M = mobius_from_triples(src, dst).normalized()
    # oracle: apply the matrix to the source triple
    assert M.apply(0) == math.inf
    assert abs(M.apply(1)) < 1e-15
    assert abs(M.apply(math.inf) - 1) < 1e-15
    # z -> (z - 1)/z; [[0, -1], [1, -1]] is the map in the other direction
    assert M == MobiusMatrix(1, -1, 1, 0)
    back = MobiusMatrix(0, -1, 1, -1)
    assert (M @ back).distance_to_pm_identity() < 1e-15


def test_coincident_points():
    with pytest.raises(DegeneratePlacement):
        mobius_from_triples([_pt(0), _pt(0), _pt(1)], [_pt(0), _pt(1), _pt(2)])


@pytest.mark.parametrize("name", FIXTURES)
def test_relators_and_tree_faces(name):
    T, MP, R = manifold_rep(name)
    assert R.max_relator_error < 1e-9
    for m in R.generator_matrices:
        assert abs(complex(m.det()) - 1) < 1e-9
    P = develop_tree(T, MP, list(T.shapes), 1 + 0j, True)
    for k in MP.tree:
        (a, f), _ = MP.skeleton.labels[k]
        assert face_pairing_matrix(T, P, a, f).normalized().distance_to_pm_identity() < 1e-9


@pytest.mark.parametrize("name", ["figure8", "m412"])
def test_face_pairing_involution(name):
    T, MP, _ = manifold_rep(name)
    P = develop_tree(T, MP, list(T.shapes), 1 + 0j, True)
    for (a, f), (b, g), _ in T.face_pairs():
        F = face_pairing_matrix(T, P, a, f).normalized()
        G = face_pairing_matrix(T, P, b, g).normalized()
        assert (F @ G).distance_to_pm_identity() < 1e-9


def test_figure8_traces_not_real(figure8):
    R = representation(figure8)
    assert max(abs(complex(m.trace()).imag) for m in R.generator_matrices) > 0.01


def test_empty_word_is_identity(figure8):
    R = representation(figure8)
    assert np.array_equal(evaluate_word(R, Word(())).as_array(), np.eye(2))
    with pytest.raises(IndexError):
        evaluate_word(R, Word((9,)))


def test_perturbed_shapes_are_inconsistent(figure8):
    T = IdealTriangulation(2, figure8.gluings, (figure8.shapes[0] + 0.05, figure8.shapes[1]))
    with pytest.raises(InconsistentDevelopment, match="inconsistent development"):
        representation_from_shapes(T)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(FIXTURES), st.data())
def test_word_identities(name, data):
    T, MP, R = manifold_rep(name)
    w = data.draw(_words(MP.num_generators, 64))
    v = data.draw(_words(MP.num_generators, 16))
    M = evaluate_word(R, w)
    assert abs(complex(M.det()) - 1) < 1e-9 * max(1.0, np.abs(M.as_array()).max() ** 2)
    assert evaluate_word(R, w * w.inverse()).distance_to_pm_identity() < 1e-9
    gh, hg = evaluate_word(R, v * w.inverse()), evaluate_word(R, w.inverse() * v)
    # cancellation error follows the entry sizes, not the trace
    scale = max(1.0, np.abs(evaluate_word(R, v).as_array()).max() * np.abs(evaluate_word(R, w.inverse()).as_array()).max())
    assert abs(complex(gh.trace()) - complex(hg.trace())) < 1e-9 * scale


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["figure8", "m412"]), st.data(),
       st.tuples(*[st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)] * 4))
def test_conjugation_keeps_traces(name, data, entries):
    C = MobiusMatrix(*entries)
    if abs(complex(C.det())) < 0.1:
        return
    T, MP, R = manifold_rep(name)
    Rc = R.conjugated(C)
    w = data.draw(_words(MP.num_generators, 12))
    t0 = complex(evaluate_word(R, w).trace())
    t1 = complex(evaluate_word(Rc, w).trace())
    # lifts may differ by sign after renormalization
    assert min(abs(t0 - t1), abs(t0 + t1)) < 1e-9 * max(1.0, abs(t0)) * 100


def _closed_walk(MP, rng, steps):
    adj = MP.skeleton.adjacency()
    node, walk = 0, []
    for _ in range(steps):
        k, nxt, s = rng.choice(adj[node])
        walk.append((k, s))
        node = nxt
    # back to node 0 along any path (BFS over the skeleton)
    prev = {node: None}
    queue = [node]
    while 0 not in prev:
        a = queue.pop(0)
        for k, b, s in adj[a]:
            if b not in prev:
                prev[b] = (a, k, s)
                queue.append(b)
    back = []
    cur = 0
    while prev[cur] is not None:
        a, k, s = prev[cur]
        back.append((k, s))
        cur = a
    return walk + back[::-1]


@pytest.mark.parametrize("name", ["m412", "cover_m412_3"])
def test_tree_choice_does_not_change_traces(name):
    T = cached(name)
    MP0 = manifold_presentation(T)
    MP1 = manifold_presentation(T, basepoint=T.num_tetrahedra - 1)
    assert MP0.tree != MP1.tree
    R0 = representation_from_shapes(T, MP0, exact=False)
    R1 = representation_from_shapes(T, MP1, exact=False)
    rng = random.Random(7)
    for _ in range(40):
        loop = _closed_walk(MP0, rng, rng.randint(1, 12))
        t0 = complex(evaluate_word(R0, MP0.word_of_crossings(loop)).trace())
        t1 = complex(evaluate_word(R1, MP1.word_of_crossings(loop)).trace())
        assert min(abs(t0 - t1), abs(t0 + t1)) < 1e-9 * max(1.0, abs(t0))


@pytest.mark.parametrize("name", ["figure8", "m412", "cover_m412_3"])
def test_exact_development(name):
    T = cached(name)
    R = representation_from_shapes(T, exact=True)
    assert R.exact_matrices is not None
    for r in R.presentation.presentation.relators:
        M = evaluate_word_exact(R, r)
        assert M.b.is_zero() and M.c.is_zero() and M.a == M.d
    for g, E in zip(R.generator_matrices, R.exact_matrices):
        tr2 = complex((E.trace() * E.trace() / E.det()).approx())
        assert abs(tr2 - complex(g.trace()) ** 2) < 1e-9


def test_exact_needs_exact_shapes():
    with pytest.raises(ValueError):
        representation_from_shapes(cached("m003"), exact=True)


def test_generators_from_file(figure8):
    R = representation(figure8)
    T = parse_triangulation(triangulation_with_generators(figure8, R.generator_matrices))
    F = representation(T)
    assert F.source == "FromFile"
    for a, b in zip(F.generator_matrices, R.generator_matrices):
        assert np.abs(a.as_array() - b.as_array()).max() < 1e-12


def test_generators_from_file_errors(figure8):
    R = representation(figure8)
    data = json.loads(triangulation_with_generators(figure8, R.generator_matrices[:1]))
    with pytest.raises(ValueError, match="generator matrices"):
        representation_from_file(parse_triangulation(json.dumps(data)))
    mats = [MobiusMatrix(2, 0, 0, 0.5), MobiusMatrix(1, 1, 0, 1)]
    mats = mats[: R.num_generators] + [MobiusMatrix(1, 0, 1, 1)] * (R.num_generators - len(mats))
    T = parse_triangulation(triangulation_with_generators(figure8, mats))
    with pytest.raises(InconsistentDevelopment):
        representation_from_file(T)


def test_matrix_json_round_trip():
    M = MobiusMatrix(1 + 2j, 3, -1j, 0.5)
    assert MobiusMatrix.from_json(M.to_json()) == M


def test_normalized_sign_rule():
    M = MobiusMatrix(-2, 0, 0, -0.5).normalized()
    assert complex(M.a).real > 0 and abs(complex(M.det()) - 1) < 1e-15
