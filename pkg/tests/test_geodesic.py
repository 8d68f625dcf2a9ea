import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cached, cover_surfaces
from geoscan.fixtures import (
    GENUS2_RELATOR,
    abelian_real_representation,
    bent_genus2,
    genus2_fuchsian,
)
from geoscan.geodesic import (
    CERTIFIED_NEGATIVE,
    FUCHSIAN_DOUBLE_COVER,
    NONORIENTABLE_TOTALLY_GEODESIC,
    NOT_FUCHSIAN,
    NUMERIC_THRESHOLD,
    TOTALLY_GEODESIC,
    VOLUME_TOO_SMALL,
    CheckConfig,
    ScanConfig,
    SurfaceTimeout,
    check_surface,
    classify_generators,
    looks_reducible,
    scan_manifold,
    trace_test_count,
    trace_test_set,
    witness_trace,
)
from geoscan.holonomy import MobiusMatrix, evaluate_word
from geoscan.normal import build_surface_complex, halve_if_double, vertex_linking


def _odd_orientable_surface(T, bound=2):
    for y in cover_surfaces(bound):
        if any(c % 2 for c in y.counts) and build_surface_complex(T, y).orientable:
            return y
    raise AssertionError("no odd orientable surface")


@pytest.mark.parametrize("n", range(1, 8))
def test_trace_count(n):
    mats = [MobiusMatrix(1, k, 0, 1) for k in range(n)]
    assert len(trace_test_set(mats)) == trace_test_count(n) == n + n * (n + 1) // 2 + n * (n + 1) * (n + 2) // 6


def test_trace_count_examples():
    assert trace_test_count(1) == 3
    assert trace_test_count(4) == 34
    g = MobiusMatrix(2, 1, 1, 1)
    got = [t for _, t in trace_test_set([g])]
    m = g.as_array()
    assert got == [np.trace(m), np.trace(m @ m), np.trace(m @ m @ m)]


def test_real_generators_give_exactly_real_traces():
    mats = genus2_fuchsian()
    assert all(complex(e).imag == 0.0 for m in mats for e in m.entries())
    assert all(t.imag == 0.0 for _, t in trace_test_set(mats))
    all_real, mode, witness, _, summary = classify_generators(mats)
    assert all_real and witness is None and mode == NUMERIC_THRESHOLD
    assert summary["count"] == 34 and summary["max_abs_im"] == 0.0


def test_genus2_fixture_satisfies_relator():
    for mats in (genus2_fuchsian(), bent_genus2()):
        assert evaluate_word(mats, GENUS2_RELATOR).distance_to_pm_identity() < 1e-9
        assert not looks_reducible(mats)


def test_bent_fixture_not_fuchsian():
    mats = bent_genus2()
    all_real, _, witness, _, _ = classify_generators(mats)
    assert not all_real
    assert witness["im"] > 0.01
    # the witness reproduces from the matrices alone
    assert abs(witness_trace(mats, witness).imag) > 0.01


@settings(max_examples=25, deadline=None)
@given(st.permutations(range(4)))
def test_verdict_invariant_under_generator_permutation(order):
    for mats, expect in ((genus2_fuchsian(), True), (bent_genus2(), False)):
        assert classify_generators([mats[i] for i in order])[0] is expect


def test_threshold_is_respected():
    mats = bent_genus2(theta=1e-4)
    worst = classify_generators(mats)[4]["max_abs_im"]
    assert 0 < worst < 0.01
    assert classify_generators(mats)[0]
    assert not classify_generators(mats, CheckConfig(threshold_im=worst / 2))[0]


def test_bad_config():
    with pytest.raises(ValueError):
        CheckConfig(threshold_im=0)
    with pytest.raises(ValueError):
        CheckConfig(timeout_s=-1)


def test_reducible_detection():
    assert looks_reducible([MobiusMatrix(2, 1, 0, 0.5), MobiusMatrix(1, 3, 0, 1)])


# ----------------------------------------------------------------- manifold Y


def test_cover_surface_is_double_cover(cover):
    T, x, R = cover
    v = check_surface(T, R, x)
    assert v.kind == FUCHSIAN_DOUBLE_COVER
    assert v.mode == CERTIFIED_NEGATIVE
    assert tuple(2 * c for c in v.half_coordinates) == x.counts
    assert v.trace_summary["count"] == 34
    assert v.trace_summary["max_abs_im"] < 1e-9
    assert v.diagnostics["presentation_ok"] and v.diagnostics["num_generators"] == 4


def test_cover_surface_numeric_mode(cover):
    T, x, R = cover
    v = check_surface(T, R, x, CheckConfig(certified=False))
    assert v.kind == FUCHSIAN_DOUBLE_COVER and v.mode == NUMERIC_THRESHOLD


def test_cover_half_is_one_sided_candidate(cover):
    T, x, R = cover
    half = halve_if_double(T, x)
    v = check_surface(T, R, half)
    assert v.kind == NONORIENTABLE_TOTALLY_GEODESIC
    assert v.diagnostics["chi"] == -1 and not v.diagnostics["orientable"]


def test_cover_trace_field_is_real(cover):
    # every tested trace squared lies in Q(sqrt 3), hence is real
    T, x, R = cover
    v = check_surface(T, R, x)
    for row in v.traces:
        assert abs(row["trace"][1]) < 1e-9


def test_odd_surface_with_real_representation(cover):
    T, _, R = cover
    A = abelian_real_representation(R.presentation)
    y = _odd_orientable_surface(T)
    v = check_surface(T, A, y)
    assert v.kind == TOTALLY_GEODESIC
    # the abelian representation is reducible and says so
    assert v.diagnostics["reducible_looking"]


def test_real_representation_never_not_fuchsian(cover):
    T, x, R = cover
    A = abelian_real_representation(R.presentation)
    for y in cover_surfaces():
        assert check_surface(T, A, y).kind != NOT_FUCHSIAN


def test_disconnected_surface_rejected(figure8):
    with pytest.raises(ValueError, match="disconnected"):
        check_surface(figure8, None, vertex_linking(figure8).scaled(2))


def test_timeout(cover):
    T, x, R = cover
    with pytest.raises(SurfaceTimeout):
        check_surface(T, R, x, CheckConfig(timeout_s=1e-9))


def test_conjugated_representation_same_verdict(cover):
    T, x, R = cover
    C = MobiusMatrix(1 + 0.5j, -0.3, 0.7j, 1.2)
    C = MobiusMatrix(*(e / complex(C.det()) ** 0.5 for e in C.entries()))
    Rc = R.conjugated(C)
    assert check_surface(T, Rc, x).kind == FUCHSIAN_DOUBLE_COVER
    for y in cover_surfaces()[:6]:
        assert check_surface(T, Rc, y).kind == check_surface(T, R, y, CheckConfig(certified=False)).kind


# ----------------------------------------------------------------- scanning


def test_scan_figure8_volume_gate(figure8):
    r = scan_manifold(figure8)
    assert r.verdict == VOLUME_TOO_SMALL and r.surfaces == []


def test_scan_zero_bound(cover):
    T, _, R = cover
    assert scan_manifold(T, R, ScanConfig(euler_bound_override=0)).surfaces == []


def test_scan_cover_example(cover):
    T, x, R = cover
    cfg = ScanConfig(euler_bound_override=2, extra_surfaces=[x], threads=2)
    r = scan_manifold(T, R, cfg)
    rows = [e for e in r.surfaces if e.coordinates == x.counts]
    assert len(rows) == 1 and rows[0].verdict.kind == FUCHSIAN_DOUBLE_COVER
    kinds = {e.verdict.kind for e in r.surfaces if e.verdict}
    assert NONORIENTABLE_TOTALLY_GEODESIC in kinds and NOT_FUCHSIAN in kinds
    # flagged surfaces are recorded but not checked
    flagged = [e for e in r.surfaces if e.letscher_edges]
    assert flagged and all(e.verdict is None for e in flagged)
    assert r.complete


def _strip_timings(d):
    if isinstance(d, dict):
        return {k: _strip_timings(v) for k, v in d.items() if k not in ("timings", "check_s")}
    if isinstance(d, list):
        return [_strip_timings(v) for v in d]
    return d


def test_scan_is_deterministic(cover):
    T, _, R = cover
    a = scan_manifold(T, R, ScanConfig(euler_bound_override=2, threads=1)).to_json()
    b = scan_manifold(T, R, ScanConfig(euler_bound_override=2, threads=3)).to_json()
    assert json.dumps(_strip_timings(a), sort_keys=True) == json.dumps(_strip_timings(b), sort_keys=True)


def test_scan_incomplete_when_budget_runs_out(cover):
    T, _, R = cover
    r = scan_manifold(T, R, ScanConfig(euler_bound_override=2, lp_budget=5))
    assert not r.complete and "incomplete" in r.message


def test_scan_m412_small_manifold():
    T = cached("m412")
    r = scan_manifold(T, None, ScanConfig(euler_bound_override=2))
    assert len(r.surfaces) == 7
