import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoscan.fixtures import bent_genus2, conjugate_all, genus2_fuchsian
from geoscan.holonomy import MobiusMatrix
from geoscan.limitset import (
    INFINITY,
    LimitSetSample,
    attracting_fixed_point,
    fit_circle,
    render_svg,
    sample_limit_set,
    write_csv,
    write_svg,
)

TO_DISK = MobiusMatrix(1, -1j, 1, 1j)  # upper half plane -> unit disk


def test_real_generators_stay_on_the_line():
    s = sample_limit_set(genus2_fuchsian(), num_points=2000, max_word=200, seed=3)
    z = s.finite()
    assert len(z) > 0.9 * 2000
    assert np.abs(z.imag).max() < 1e-6
    assert fit_circle(s).kind == "Line"


def test_identity_generators_fix_base_point():
    s = sample_limit_set([MobiusMatrix(1, 0, 0, 1)], num_points=50, max_word=40, seed=1)
    assert np.all(s.points == 1 + 0j)


def test_same_seed_same_points():
    a = sample_limit_set(bent_genus2(), num_points=500, max_word=300, seed=11)
    b = sample_limit_set(bent_genus2(), num_points=500, max_word=300, seed=11)
    c = sample_limit_set(bent_genus2(), num_points=500, max_word=300, seed=12)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_bad_arguments():
    with pytest.raises(ValueError):
        sample_limit_set([], num_points=5)
    with pytest.raises(ValueError):
        sample_limit_set(genus2_fuchsian(), num_points=0)
    with pytest.raises(ValueError):
        fit_circle(np.array([1 + 1j, 1 + 1j, 1 + 1j]))
    with pytest.raises(ValueError):
        fit_circle(np.array([1 + 1j]))


def test_unit_circle_points():
    z = np.exp(2j * np.pi * np.arange(100) / 100)
    fit = fit_circle(z)
    assert fit.kind == "Circle"
    assert abs(fit.center) < 1e-12 and abs(fit.radius - 1) < 1e-12
    assert fit.max_residual < 1e-12


def test_real_line_points():
    fit = fit_circle(np.linspace(-5, 7, 100).astype(complex))
    assert fit.kind == "Line" and fit.max_residual < 1e-12


def test_residual_ordering():
    rng = np.random.default_rng(0)
    z = np.exp(2j * np.pi * rng.random(200)) * (1 + 0.01 * rng.standard_normal(200))
    fit = fit_circle(z)
    assert fit.max_residual >= fit.rms_residual >= 0


@settings(max_examples=40, deadline=None)
@given(st.floats(-math.pi, math.pi), st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_fit_invariant_under_euclidean_motion(angle, shift):
    rng = np.random.default_rng(5)
    z = (2 + 1j) + 3 * np.exp(2j * np.pi * rng.random(300)) * (1 + 0.02 * rng.standard_normal(300))
    a = fit_circle(z)
    b = fit_circle(z * np.exp(1j * angle) + shift)
    assert abs(a.max_residual - b.max_residual) < 1e-9
    assert abs(a.rms_residual - b.rms_residual) < 1e-9


def test_fuchsian_group_conjugated_into_disk():
    mats = conjugate_all(genus2_fuchsian(), TO_DISK)
    s = sample_limit_set(mats, num_points=3000, max_word=500, seed=2)
    fit = fit_circle(s)
    assert fit.kind == "Circle"
    assert abs(fit.radius - 1) < 1e-6 and fit.max_residual < 1e-6


def test_bent_group_is_not_round():
    fit = fit_circle(sample_limit_set(bent_genus2(), num_points=3000, max_word=500, seed=2))
    assert fit.max_residual > 0.01
    assert not fit.is_circular()


def test_equivariance():
    mats = conjugate_all(genus2_fuchsian(), TO_DISK)
    s = sample_limit_set(mats, num_points=2000, max_word=400, seed=4)
    fit = fit_circle(s)
    for g in mats:
        moved = np.array([g.apply(complex(p)) for p in s.finite()])
        moved = moved[np.isfinite(moved)]
        assert fit.residuals(moved).max() < 1e-6


def test_fixed_base_point_is_on_limit_set():
    mats = conjugate_all(genus2_fuchsian(), TO_DISK)
    p = attracting_fixed_point(mats)
    assert abs(abs(p) - 1) < 1e-9
    s = sample_limit_set(mats, num_points=200, max_word=5, seed=0, base_point="fixed")
    assert np.abs(np.abs(s.finite()) - 1).max() < 1e-9


def test_infinity_sentinel_excluded():
    s = LimitSetSample(np.array([0, 1, 1j, INFINITY]), 0, 1, 4)
    assert len(s.finite()) == 3


def test_outputs_are_deterministic(tmp_path):
    mats = bent_genus2()
    a = sample_limit_set(mats, num_points=400, max_word=100, seed=9)
    b = sample_limit_set(mats, num_points=400, max_word=100, seed=9)
    assert render_svg(a, fit_circle(a)) == render_svg(b, fit_circle(b))
    write_svg(a, fit_circle(a), tmp_path / "a.svg")
    write_svg(b, fit_circle(b), tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    write_csv(a, tmp_path / "a.csv")
    rows = (tmp_path / "a.csv").read_text().splitlines()
    assert len(rows) == 400 and all(len(r.split(",")) == 2 for r in rows)
