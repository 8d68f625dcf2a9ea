"""Sampling limit sets of finitely generated Kleinian groups and fitting circles.

Points are images of a base point under random words; for a Fuchsian group
they lie on a round circle (or a line, a circle through infinity), for a
quasi-Fuchsian one on a visibly non-round Jordan curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RENORMALIZE_EVERY = 32
INFINITY = complex(math.inf, 0.0)
FAR = 1e12  # images farther out than this count as infinity
DEFAULT_RESIDUAL_THRESHOLD = 1e-3


@dataclass
class LimitSetSample:
    points: np.ndarray  # complex; INFINITY marks the point at infinity
    seed: int
    word_length_max: int
    num_points: int
    base_point: complex = 1 + 0j

    def finite(self):
        return self.points[np.isfinite(self.points)]


def _as_stack(mats):
    out = []
    for m in mats:
        out.append(m.as_array() if hasattr(m, "as_array") else np.asarray(m, dtype=complex))
    return np.array(out, dtype=complex)


def attracting_fixed_point(mats):
    """Attracting fixed point of the first loxodromic generator; it lies in the limit set."""
    for m in _as_stack(mats):
        w, V = np.linalg.eig(m)
        if abs(abs(w[0]) - abs(w[1])) > 1e-9:
            v = V[:, int(np.argmax(np.abs(w)))]
            return INFINITY if v[1] == 0 else complex(v[0] / v[1])
    raise ValueError("no loxodromic generator")


def sample_limit_set(mats, num_points=10_000, max_word=2000, seed=0, base_point=1 + 0j):
    """Images of ``base_point`` under ``num_points`` random words.

    ``base_point="fixed"`` starts from a point of the limit set (see
    ``attracting_fixed_point``) so that short words do not leave transients.

    Each word has a uniform length in ``[1, max_word]`` and uniform i.i.d.
    letters among the generators and their inverses.  All words are built in
    parallel, one letter per step, and each running product is rescaled by its
    largest entry every ``RENORMALIZE_EVERY`` steps.
    """
    if len(mats) < 1:
        raise ValueError("need at least one generator")
    if num_points < 1 or max_word < 1:
        raise ValueError("num_points and max_word must be positive")
    gens = _as_stack(mats)
    alphabet = np.concatenate([gens, np.linalg.inv(gens)])
    rng = np.random.default_rng(seed)
    lengths = rng.integers(1, max_word + 1, size=num_points)
    prod = np.broadcast_to(np.eye(2, dtype=complex), (num_points, 2, 2)).copy()
    for step in range(int(lengths.max())):
        letters = rng.integers(0, len(alphabet), size=num_points)
        active = lengths > step
        prod[active] = prod[active] @ alphabet[letters[active]]
        if (step + 1) % RENORMALIZE_EVERY == 0:
            scale = np.abs(prod).reshape(num_points, 4).max(axis=1)
            prod /= scale[:, None, None]
    b = attracting_fixed_point(mats) if base_point == "fixed" else complex(base_point)
    if not np.isfinite(b):
        raise ValueError("base point at infinity is not supported")
    num = prod[:, 0, 0] * b + prod[:, 0, 1]
    den = prod[:, 1, 0] * b + prod[:, 1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        pts = num / den
    bad = ~np.isfinite(pts) | (np.abs(pts) > FAR)
    pts[bad] = INFINITY
    return LimitSetSample(pts, seed, max_word, num_points, b)


@dataclass
class CircleFit:
    kind: str  # "Circle" or "Line"
    center: complex | None
    radius: float | None
    point: complex | None
    direction: complex | None
    max_residual: float
    rms_residual: float

    def residuals(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "Circle":
            return np.abs(np.abs(z - self.center) - self.radius)
        d = self.direction / abs(self.direction)
        return np.abs(((z - self.point) * np.conj(d)).imag)

    def is_circular(self, threshold=DEFAULT_RESIDUAL_THRESHOLD):
        return self.max_residual < threshold

    def to_json(self):
        def c(v):
            return None if v is None else [v.real, v.imag]

        return {
            "kind": self.kind,
            "center": c(self.center),
            "radius": self.radius,
            "point": c(self.point),
            "direction": c(self.direction),
            "max_residual": self.max_residual,
            "rms_residual": self.rms_residual,
        }


def fit_circle(sample, line_tol=1e-10):
    """Algebraic least-squares fit of ``a(x^2+y^2) + bx + cy + d = 0``, ``|(a,b,c,d)| = 1``.

    Data are centred and scaled first so the fit does not depend on where the
    sample sits in the plane.  A vanishing ``a`` gives a line.
    """
    z = sample.finite() if isinstance(sample, LimitSetSample) else np.asarray(sample, dtype=complex)
    z = z[np.isfinite(z)]
    if len(z) < 3:
        raise ValueError("need at least three finite points")
    mu = z.mean()
    w = z - mu
    s = math.sqrt(float(np.mean(np.abs(w) ** 2)))
    if s == 0:
        raise ValueError("all points coincide")
    w = w / s
    A = np.column_stack([np.abs(w) ** 2, w.real, w.imag, np.ones(len(w))])
    _, _, vt = np.linalg.svd(A, full_matrices=False)
    a, b, c, d = vt[-1]
    if abs(a) < line_tol * max(abs(b), abs(c)):
        # b x + c y + d = 0 in scaled coordinates
        normal = complex(b, c)
        p0 = -d * normal / abs(normal) ** 2
        fit = CircleFit("Line", None, None, p0 * s + mu, 1j * normal, 0.0, 0.0)
    else:
        cen = complex(-b / (2 * a), -c / (2 * a))
        r2 = abs(cen) ** 2 - d / a
        r = math.sqrt(max(r2, 0.0))
        fit = CircleFit("Circle", cen * s + mu, r * s, None, None, 0.0, 0.0)
    res = fit.residuals(z)
    fit.max_residual = float(res.max())
    fit.rms_residual = float(math.sqrt(np.mean(res ** 2)))
    return fit


# ----------------------------------------------------------------- output


def write_csv(sample, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in sample.points:
            if np.isfinite(p):
                fh.write(f"{p.real:.17g},{p.imag:.17g}\n")
            else:
                fh.write("inf,inf\n")


def render_svg(sample, fit=None, size=600, margin=20):
    """Scatter plot with the fitted circle or line; byte-identical for equal input."""
    z = sample.finite()
    if len(z) == 0:
        z = np.array([sample.base_point])
    lo_x, hi_x = float(z.real.min()), float(z.real.max())
    lo_y, hi_y = float(z.imag.min()), float(z.imag.max())
    span = max(hi_x - lo_x, hi_y - lo_y, 1e-12)
    cx, cy = (lo_x + hi_x) / 2, (lo_y + hi_y) / 2
    k = (size - 2 * margin) / span

    def X(v):
        return size / 2 + (v.real - cx) * k

    def Y(v):
        return size / 2 - (v.imag - cy) * k

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if fit is not None and fit.kind == "Circle":
        lines.append(
            f'<circle cx="{X(fit.center):.3f}" cy="{Y(fit.center):.3f}" r="{fit.radius * k:.3f}" '
            'fill="none" stroke="#c03030" stroke-width="1"/>'
        )
    elif fit is not None:
        d = fit.direction / abs(fit.direction) * span * 4
        a, b = fit.point - d, fit.point + d
        lines.append(
            f'<line x1="{X(a):.3f}" y1="{Y(a):.3f}" x2="{X(b):.3f}" y2="{Y(b):.3f}" '
            'stroke="#c03030" stroke-width="1"/>'
        )
    lines.append('<g fill="#203080">')
    for p in z:
        lines.append(f'<circle cx="{X(p):.2f}" cy="{Y(p):.2f}" r="0.8"/>')
    lines.append("</g>")
    label = f"n={len(z)} seed={sample.seed} max_word={sample.word_length_max}"
    if fit is not None:
        label += f" {fit.kind} max_residual={fit.max_residual:.3e}"
    lines.append(f'<text x="{margin}" y="{size - 6}" font-size="11" font-family="monospace">{label}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(sample, fit, path, size=600):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(sample, fit, size))
