"""Deciding whether normal surfaces are totally geodesic, and scanning a manifold.

A closed essential surface is Fuchsian exactly when the traces of its
holonomy are real, and for an irreducible representation of a surface group it
suffices to look at the traces of all ``g_i``, ``g_i g_j`` and ``g_i g_j g_k``
with ``i <= j <= k``.  A one-sided surface is tested through its orientable
double (twice its coordinates); an orientable Fuchsian surface whose
coordinates are all even and whose half is one-sided is reported as a double
cover rather than as totally geodesic itself.
"""
from __future__ import annotations

import concurrent.futures as cf
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .fundgroup import (
    PresentationError,
    embed_surface_generators,
    manifold_presentation,
    simplify_presentation,
    surface_presentation,
    verify_surface_presentation,
)
from .holonomy import MobiusMatrix, evaluate_word, evaluate_word_exact, representation
from .normal import (
    NONORIENTABLE_VOLUME_THRESHOLD,
    IncompleteEnumeration,
    NormalCoordinates,
    as_coordinates,
    build_surface_complex,
    enumerate_admissible,
    euler_bound,
    halve_if_double,
    is_admissible,
    letscher_tube_check,
)
from .numfield import DEFAULT_IM_THRESHOLD, Realness, embedding_is_real
from .triangulation import compute_volume

VOLUME_TOO_SMALL = "VolumeTooSmall"
NOT_FUCHSIAN = "NotFuchsian"
FUCHSIAN_DOUBLE_COVER = "FuchsianDoubleCover"
TOTALLY_GEODESIC = "TotallyGeodesicCandidate"
NONORIENTABLE_TOTALLY_GEODESIC = "NonOrientableTotallyGeodesicCandidate"

NUMERIC_THRESHOLD = "NumericThreshold"
CERTIFIED_NEGATIVE = "CertifiedNegative"


class SurfaceTimeout(RuntimeError):
    pass


@dataclass
class CheckConfig:
    threshold_im: float = DEFAULT_IM_THRESHOLD
    certified: bool | None = None  # None: certify whenever exact matrices exist
    refine_limit: int = 8
    timeout_s: float = 5000.0

    def __post_init__(self):
        if not self.threshold_im > 0:
            raise ValueError("threshold must be positive")
        if not self.timeout_s > 0:
            raise ValueError("timeout must be positive")


@dataclass
class GeodesicVerdict:
    kind: str
    mode: str = NUMERIC_THRESHOLD
    witness: dict | None = None  # {"index": ..., "word": ..., "trace": [re, im], "im": ...}
    half_coordinates: tuple | None = None
    trace_summary: dict | None = None
    traces: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        d = asdict(self)
        d["half_coordinates"] = None if self.half_coordinates is None else list(self.half_coordinates)
        return d


def trace_test_set(generators):
    """Traces of ``g_i``, ``g_i g_j`` and ``g_i g_j g_k`` for ``i <= j <= k`` (1-based)."""
    mats = [g.as_array() if hasattr(g, "as_array") else np.asarray(g, dtype=complex) for g in generators]
    n = len(mats)
    out = []
    for i in range(n):
        out.append(((i + 1,), complex(np.trace(mats[i]))))
    for i in range(n):
        for j in range(i, n):
            out.append(((i + 1, j + 1), complex(np.trace(mats[i] @ mats[j]))))
    for i in range(n):
        for j in range(i, n):
            mij = mats[i] @ mats[j]
            for k in range(j, n):
                out.append(((i + 1, j + 1, k + 1), complex(np.trace(mij @ mats[k]))))
    return out


def trace_test_count(n):
    return n + n * (n + 1) // 2 + n * (n + 1) * (n + 2) // 6


def _exact_square_trace(exact_mats, index):
    M = None
    for i in index:
        M = exact_mats[i - 1] if M is None else M @ exact_mats[i - 1]
    tr = M.trace()
    return tr * tr / M.det()


def _certified_nonreal(e, config):
    """True when tr is certainly not real, where ``e = tr^2`` (exactly, up to the lift)."""
    verdict = embedding_is_real(e, config.refine_limit, config.threshold_im)
    if verdict is Realness.CERTIFIED_NOT_REAL:
        return True, verdict
    re = e.interval().real
    if re.b < 0:  # tr^2 certainly negative: tr is purely imaginary
        return True, verdict
    return False, verdict


def classify_generators(mats, config=None, exact_mats=None, deadline=None):
    """Realness of the trace test set.

    Returns ``(all_real, mode, witness, traces, summary)``.
    """
    config = config or CheckConfig()
    traces = trace_test_set(mats)
    certified = config.certified
    if certified is None:
        certified = exact_mats is not None
    if certified and exact_mats is None:
        raise ValueError("certified mode needs exact generator matrices")
    mode = CERTIFIED_NEGATIVE if certified else NUMERIC_THRESHOLD
    witness = None
    inconclusive = 0
    worst = max(traces, key=lambda t: abs(t[1].imag))
    for index, tr in traces:
        if deadline is not None and time.monotonic() > deadline:
            raise SurfaceTimeout("per-surface time limit reached")
        if certified:
            bad, verdict = _certified_nonreal(_exact_square_trace(exact_mats, index), config)
            if verdict is Realness.INCONCLUSIVE:
                inconclusive += 1
            if bad:
                witness = {"index": list(index), "trace": [tr.real, tr.imag], "im": abs(tr.imag)}
                break
        elif abs(tr.imag) > config.threshold_im:
            witness = {"index": list(index), "trace": [tr.real, tr.imag], "im": abs(tr.imag)}
            break
    summary = {
        "count": len(traces),
        "max_abs_im": abs(worst[1].imag),
        "inconclusive": inconclusive,
    }
    return witness is None, mode, witness, traces, summary


def _fixed_points(m, tol=1e-9):
    a, b, c, d = m.as_array().ravel()
    if abs(c) < tol:
        pts = [np.inf]
        if abs(d - a) > tol:
            pts.append(b / (d - a))
        return pts
    disc = np.sqrt((d - a) ** 2 + 4 * b * c)
    return [(a - d + disc) / (2 * c), (a - d - disc) / (2 * c)]


def _fixes(m, p, tol):
    a, b, c, d = m.as_array().ravel()
    if p == np.inf:
        return abs(c) < tol
    return abs(c * p * p + (d - a) * p - b) < tol * max(1.0, abs(p) ** 2)


def looks_reducible(mats, tol=1e-7):
    """All generators numerically share a fixed point on the sphere."""
    nontrivial = [m for m in mats if m.distance_to_pm_identity() > tol]
    if not nontrivial:
        return True
    for p in _fixed_points(nontrivial[0]):
        if all(_fixes(m, p, tol) for m in nontrivial):
            return True
    return False


@dataclass
class SurfaceGroup:
    """Generator words and matrices of an orientable surface (the input or its double)."""

    coordinates: NormalCoordinates
    words: list
    matrices: list
    exact_matrices: list | None
    presentation_ok: bool
    presentation: object


def surface_group(T, R, x):
    S = build_surface_complex(T, x, check=False)
    SP = surface_presentation(S, T)
    words = embed_surface_generators(T, S, MP=R.presentation, SP=SP)
    ok = False
    P = SP.presentation
    try:
        simple = simplify_presentation(SP.presentation)
        ok = bool(verify_surface_presentation(simple, S.orientable))
        if ok:
            words = [words[o - 1] for o in simple.origin]
            P = simple
    except PresentationError:
        pass
    mats = [evaluate_word(R, w) for w in words]
    exact = None
    if R.exact_matrices:
        one = R.exact_matrices[0].a.field.element([1])
        exact = [evaluate_word_exact(R, w) or MobiusMatrix.identity(one) for w in words]
    return SurfaceGroup(as_coordinates(x), words, mats, exact, ok, P)


def check_surface(T, R, x, config=None):
    """Classify one connected admissible surface."""
    config = config or CheckConfig()
    deadline = time.monotonic() + config.timeout_s
    x = as_coordinates(x)
    if not is_admissible(T, x):
        raise ValueError("coordinates are not admissible")
    S = build_surface_complex(T, x, check=False)
    if not S.connected:
        raise ValueError("surface is disconnected")
    one_sided = not S.orientable
    y = x.scaled(2) if one_sided else x  # test one-sided surfaces through their double
    G = surface_group(T, R, y)
    use_exact = G.exact_matrices if config.certified is not False else None
    all_real, mode, witness, traces, summary = classify_generators(
        G.matrices, config, use_exact, deadline
    )
    diagnostics = {
        "chi": S.euler_characteristic,
        "orientable": S.orientable,
        "num_generators": len(G.matrices),
        "presentation_ok": G.presentation_ok,
        "reducible_looking": looks_reducible(G.matrices),
        "generator_words": [list(w.letters) for w in G.words],
    }
    trace_rows = [{"index": list(i), "trace": [t.real, t.imag]} for i, t in traces]
    if not all_real:
        return GeodesicVerdict(NOT_FUCHSIAN, mode, witness, None, summary, trace_rows, diagnostics)
    if one_sided:
        return GeodesicVerdict(NONORIENTABLE_TOTALLY_GEODESIC, mode, None, None, summary, trace_rows, diagnostics)
    half = halve_if_double(T, x)  # an even orientable S may just double a one-sided F
    if half is not None:
        return GeodesicVerdict(FUCHSIAN_DOUBLE_COVER, mode, None, half.counts, summary, trace_rows, diagnostics)
    return GeodesicVerdict(TOTALLY_GEODESIC, mode, None, None, summary, trace_rows, diagnostics)


def witness_trace(G_matrices, witness):
    """Recompute the trace of a witness multi-index."""
    M = np.eye(2, dtype=complex)
    for i in witness["index"]:
        M = M @ G_matrices[i - 1].as_array()
    return complex(np.trace(M))


# ----------------------------------------------------------------- scanning


@dataclass
class ScanConfig:
    check: CheckConfig = field(default_factory=CheckConfig)
    euler_bound_override: int | None = None
    threads: int | None = None
    lp_budget: int = 200_000
    candidate_budget: int = 2_000_000
    extra_surfaces: list = field(default_factory=list)

    def worker_count(self):
        if self.threads:
            return max(1, int(self.threads))
        env = os.environ.get("GEOSCAN_THREADS")
        if env:
            return max(1, int(env))
        return os.cpu_count() or 1


@dataclass
class ScanEntry:
    coordinates: tuple
    chi: int
    verdict: GeodesicVerdict | None
    letscher_edges: list
    check_s: float
    error: str | None = None

    def to_json(self):
        return {
            "coordinates": list(self.coordinates),
            "chi": self.chi,
            "verdict": None if self.verdict is None else self.verdict.kind,
            "witness": None if self.verdict is None else self.verdict.witness,
            "details": None if self.verdict is None else self.verdict.to_json(),
            "letscher_edges": self.letscher_edges,
            "skipped": bool(self.letscher_edges),
            "error": self.error,
            "timings": {"check_s": self.check_s},
        }


@dataclass
class ScanReport:
    volume: float
    euler_bound: int
    verdict: str | None  # VolumeTooSmall or None
    surfaces: list
    enumeration_s: float = 0.0
    check_s: float = 0.0
    complete: bool = True
    message: str = ""

    def candidates(self):
        return [e for e in self.surfaces if e.verdict is not None and e.verdict.kind != NOT_FUCHSIAN]

    def to_json(self):
        return {
            "volume": self.volume,
            "euler_bound": self.euler_bound,
            "verdict": self.verdict,
            "complete": self.complete,
            "message": self.message,
            "timings": {"enumeration_s": self.enumeration_s, "check_s": self.check_s},
            "surfaces": [e.to_json() for e in self.surfaces],
        }


def _check_one(T, R, x, config):
    t0 = time.monotonic()
    S = build_surface_complex(T, x, check=False)
    flagged = letscher_tube_check(T, x)
    if flagged:
        return ScanEntry(x.counts, S.euler_characteristic, None, flagged, time.monotonic() - t0)
    try:
        v = check_surface(T, R, x, config)
        err = None
    except SurfaceTimeout as exc:
        v, err = None, str(exc)
    return ScanEntry(x.counts, S.euler_characteristic, v, [], time.monotonic() - t0, err)


def scan_manifold(T, R=None, config=None):
    """Enumerate surfaces up to the volume bound and classify each."""
    config = config or ScanConfig()
    vol = compute_volume(T)
    if vol < NONORIENTABLE_VOLUME_THRESHOLD and config.euler_bound_override is None:
        return ScanReport(vol, 0, VOLUME_TOO_SMALL, [])
    bound = euler_bound(vol) if config.euler_bound_override is None else int(config.euler_bound_override)
    report = ScanReport(vol, bound, None, [])
    if bound <= 0:
        return report
    t0 = time.monotonic()
    try:
        found = enumerate_admissible(T, bound, config.lp_budget, config.candidate_budget)
    except IncompleteEnumeration as exc:
        report.complete = False
        report.message = f"incomplete enumeration: {exc}"
        found = []
    for extra in config.extra_surfaces:
        extra = as_coordinates(extra)
        if not is_admissible(T, extra):
            raise ValueError("supplied surface is not admissible")
        found.append(extra)
    surfaces = sorted({x.counts: x for x in found}.values(), key=lambda x: x.counts)
    report.enumeration_s = time.monotonic() - t0
    if not report.complete and not surfaces:
        return report
    t1 = time.monotonic()
    R = representation(T, manifold_presentation(T)) if R is None else R
    workers = config.worker_count()
    if workers == 1 or len(surfaces) <= 1:
        entries = [_check_one(T, R, x, config.check) for x in surfaces]
    else:
        with cf.ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(lambda x: _check_one(T, R, x, config.check), surfaces))
    report.surfaces = sorted(entries, key=lambda e: e.coordinates)
    report.check_s = time.monotonic() - t1
    return report
