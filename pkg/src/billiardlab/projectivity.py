"""Deciding whether a sphere involution lifts a projective involution.

The planar test compares cross-ratios of sampled quadruples before and
after the involution; in higher dimension the sampled graph is fitted
against the harmonic-homology family (the projective involutions fixing
a hyperplane pointwise plus one extra point).  Deviations from
projectivity are quantified by power-law fits of chart differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import least_squares

from .bodies import ConvexBody, _unit, rot90, tangent_frame
from .errors import (
    DegenerateChordError,
    DegenerateDataError,
    DomainError,
    PrecisionError,
    SamplePlanError,
)
from .jets import fit_power_law
from .osculation import height_partner, slope_point
from .reflection import ParallelClass, parallel_chord_involution


def rp_distance(a, b):
    """Angle between the lines spanned by two nonzero vectors.

    Computed from chord lengths, so it stays accurate near zero where
    acos of the inner product loses all precision.
    """
    a = _unit(a)
    b = _unit(b)
    chord = min(float(np.linalg.norm(a - b)), float(np.linalg.norm(a + b)))
    return 2.0 * math.asin(min(1.0, 0.5 * chord))


class ProjectiveMap:
    """Projective transformation of RP^(n-1): an n x n matrix mod scale.

    In involution mode the map carries its fixed hyperplane (as a unit
    normal) and the extra fixed point.
    """

    def __init__(self, matrix, axis_normal=None, center=None):
        M = np.asarray(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DomainError("projective map matrix must be square")
        self.matrix = M / np.linalg.norm(M)
        self.axis_normal = None if axis_normal is None else _unit(axis_normal)
        self.center = None if center is None else _unit(center)

    @classmethod
    def harmonic_homology(cls, center, axis_normal):
        """Involution fixing the hyperplane <m, x> = 0 pointwise and the
        center projectively: M = I - 2 P m^T / <m, P>."""
        P = np.asarray(center, dtype=float)
        m = np.asarray(axis_normal, dtype=float)
        s = float(np.dot(m, P))
        if abs(s) < 1e-14 * np.linalg.norm(P) * np.linalg.norm(m):
            raise DegenerateDataError("homology center lies on the axis")
        M = np.eye(len(P)) - 2.0 * np.outer(P, m) / s
        return cls(M, axis_normal=m, center=P)

    def apply(self, u):
        v = self.matrix @ np.asarray(u, dtype=float)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise DegenerateDataError("vector maps to zero (indeterminate point)")
        return v / n

    def involution_defect(self):
        """Relative defect of M^2 from a scalar matrix."""
        M2 = self.matrix @ self.matrix
        c = np.trace(M2) / M2.shape[0]
        return float(np.linalg.norm(M2 - c * np.eye(M2.shape[0]))
                     / max(np.linalg.norm(M2), 1e-300))

    def is_involution(self, tol=1e-8):
        return self.involution_defect() <= tol


# ---------------------------------------------------------------------------
# Cross-ratio
# ---------------------------------------------------------------------------

def cross_ratio_rp1(quadruple):
    """Cross-ratio of four points of RP^1 given as homogeneous 2-vectors."""
    U = np.asarray(quadruple, dtype=float)
    if U.shape != (4, 2):
        raise DomainError("expected four homogeneous 2-vectors")

    def det(i, j):
        return U[i, 0] * U[j, 1] - U[i, 1] * U[j, 0]

    d13, d24, d14, d23 = det(0, 2), det(1, 3), det(0, 3), det(1, 2)
    scale = np.max(np.abs(U))
    if abs(d14) < 1e-14 * scale ** 2 or abs(d23) < 1e-14 * scale ** 2:
        raise DegenerateDataError("cross-ratio of coincident points")
    return (d13 * d24) / (d14 * d23)


def _to_homogeneous_scalar(t):
    if np.isinf(t):
        return np.array([1.0, 0.0])
    return np.array([float(t), 1.0])


def cross_ratio(p1, p2, p3, p4, collinearity_tol=1e-9):
    """Cross-ratio (p1, p2; p3, p4) of four collinear points.

    Scalars (np.inf allowed) are read in an affine chart of the line;
    point arrays are projected onto their common line first, and a
    DomainError is raised if they are not collinear within tolerance.
    The convention is ((p1-p3)(p2-p4)) / ((p1-p4)(p2-p3)), so
    (0, 1; 2, inf) = 2 and a harmonic quadruple has cross-ratio -1.
    """
    pts = [p1, p2, p3, p4]
    if all(np.ndim(p) == 0 for p in pts):
        return cross_ratio_rp1([_to_homogeneous_scalar(t) for t in pts])
    P = np.asarray(pts, dtype=float)
    if P.ndim != 2:
        raise DomainError("mixed scalar/vector cross-ratio arguments")
    center = P.mean(axis=0)
    M = P - center
    _, svals, vt = np.linalg.svd(M, full_matrices=False)
    scale = max(svals[0], 1e-300)
    if svals[1] > collinearity_tol * scale:
        raise DomainError("cross-ratio points are not collinear")
    ts = M @ vt[0]
    return cross_ratio_rp1([_to_homogeneous_scalar(t) for t in ts])


# ---------------------------------------------------------------------------
# Sphere involution samplers
# ---------------------------------------------------------------------------

@dataclass
class SphereInvolutionSampler:
    """Black-box involution of a sphere patch with a known fixed vector."""

    func: Callable[[np.ndarray], np.ndarray]
    fixed_vector: np.ndarray
    dim: int
    axis_normal: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        self.fixed_vector = _unit(self.fixed_vector)
        if self.axis_normal is not None:
            self.axis_normal = _unit(self.axis_normal)

    def __call__(self, u):
        return self.func(np.asarray(u, dtype=float))

    @classmethod
    def from_parallel_chord(cls, body: ConvexBody, cls_or_direction, name=""):
        """The involution R of normal directions defined by chords of a
        fixed parallel class; near-tangential chords are treated as fixed
        directions."""
        pc = (cls_or_direction if isinstance(cls_or_direction, ParallelClass)
              else ParallelClass(np.asarray(cls_or_direction, dtype=float)))
        d = pc.direction
        fixed = tangent_frame(d)[0] if body.dim > 2 else rot90(d)

        def f(u):
            try:
                return parallel_chord_involution(body, pc, u)
            except DegenerateChordError:
                return _unit(u)

        return cls(f, fixed, body.dim, axis_normal=d,
                   name=name or f"R_L[{type(body).__name__}]")

    @classmethod
    def from_planar_curve(cls, curve, name=""):
        """Parallel-chord involution of a planar curve germ y = h(x), for
        the class of lines parallel to the tangent at the origin.

        The sampler acts on unit normal directions near (0, 1); in the
        slope chart it is t -> h'(partner(x)) with h'(x) = t.
        """

        def f(u):
            u = _unit(u)
            if u[1] <= 0.0:
                raise DomainError("direction outside the germ normal patch")
            t = -u[0] / u[1]
            x = slope_point(curve, t)
            x_other = height_partner(curve, x)
            tp = float(curve.derivative(np.asarray(x_other), 1))
            return _unit(np.array([-tp, 1.0]))

        return cls(f, np.array([0.0, 1.0]), 2,
                   axis_normal=np.array([1.0, 0.0]),
                   name=name or f"R_L[{type(curve).__name__}]")

    def chart_map(self):
        """Scalar involution in the gnomonic chart at the fixed vector."""
        u0 = self.fixed_vector
        if self.dim != 2:
            raise DomainError("scalar chart is only defined on S^1")
        w = rot90(u0)

        def g(t):
            u = u0 + float(t) * w
            v = self.func(u / np.linalg.norm(u))
            denom = float(np.dot(v, u0))
            if denom == 0.0:
                raise DomainError("image left the chart")
            return float(np.dot(v, w)) / denom

        return g


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic sampling recipe for projectivity testing."""

    patch_scale: float = 0.3
    n_quadruples: int = 40
    n_points: int = 60
    seed: int = 0
    min_separation: float = 0.15


def _chart_function(f):
    if isinstance(f, SphereInvolutionSampler):
        return f.chart_map()
    if callable(f):
        return f
    raise DomainError("expected a sampler or a scalar chart map")


# ---------------------------------------------------------------------------
# Projectivity residual
# ---------------------------------------------------------------------------

def _sample_quadruple(rng, scale, min_sep, max_tries=200):
    for _ in range(max_tries):
        t = np.sort(rng.uniform(-scale, scale, size=4))
        if np.min(np.diff(t)) >= min_sep * 2.0 * scale / 4.0:
            return t
    raise SamplePlanError("could not sample a separated quadruple")


def projectivity_residual(sampler: SphereInvolutionSampler, plan: SamplePlan):
    """Deviation of a sphere involution from a projective lifting.

    On S^1 this is the max cross-ratio discrepancy over sampled angle
    quadruples in the patch; in higher dimension it is the residual of
    the best harmonic-homology fit.  Values at round-off scale mean the
    involution is projectively liftable on the sampled patch.
    """
    if plan.n_quadruples < 1 or plan.n_points < 6:
        raise SamplePlanError("sample plan too small")
    rng = np.random.default_rng(plan.seed)
    u0 = sampler.fixed_vector
    if sampler.dim == 2:
        w = rot90(u0)
        worst = 0.0
        for _ in range(plan.n_quadruples):
            angles = _sample_quadruple(rng, plan.patch_scale, plan.min_separation)
            us = [math.cos(a) * u0 + math.sin(a) * w for a in angles]
            vs = [sampler(u) for u in us]
            cr_before = cross_ratio_rp1(us)
            cr_after = cross_ratio_rp1(vs)
            worst = max(worst, abs(cr_before - cr_after))
        return worst
    if sampler.axis_normal is None:
        raise SamplePlanError("higher-dimensional residual needs the fixed "
                              "hyperplane of the direction class")
    frame = tangent_frame(u0)
    spread = math.tan(plan.patch_scale)
    pairs = []
    for _ in range(plan.n_points):
        t = rng.uniform(-spread, spread, size=sampler.dim - 1)
        u = _unit(u0 + frame.T @ t)
        pairs.append((u, sampler(u)))
    _, residual = fit_projective_involution(pairs, sampler.axis_normal)
    return residual


def fit_projective_involution(pairs, axis_normal):
    """Best harmonic homology fixing the given hyperplane pointwise.

    The center is first recovered linearly (it lies on every line
    joining a point to its image), then polished by least squares on the
    projective distances.  Returns (ProjectiveMap, rms residual).
    """
    m = _unit(axis_normal)
    us = np.asarray([p[0] for p in pairs], dtype=float)
    vs = np.asarray([p[1] for p in pairs], dtype=float)
    n = us.shape[1]
    if len(us) < n:
        raise DegenerateDataError("need at least dim independent pairs")
    Q = np.zeros((n, n))
    used = 0
    for u, v in zip(us, vs):
        u = _unit(u)
        v = _unit(v)
        if abs(abs(float(np.dot(u, v))) - 1.0) < 1e-12:
            continue  # fixed directions put no constraint on the center
        span = np.linalg.qr(np.column_stack([u, v]))[0]
        Q += np.eye(n) - span @ span.T
        used += 1
    if used < 2:
        raise DegenerateDataError("pairs are rank deficient (all fixed)")
    evals, evecs = np.linalg.eigh(Q)
    center0 = evecs[:, 0]

    def residuals(P_raw):
        norm = np.linalg.norm(P_raw)
        if norm < 1e-12 or abs(float(np.dot(m, P_raw))) < 1e-12 * norm:
            return np.full(len(us), 1.0)
        model = ProjectiveMap.harmonic_homology(P_raw, m)
        out = np.zeros(len(us))
        for i, (u, v) in enumerate(zip(us, vs)):
            w = model.apply(u)
            out[i] = math.sin(rp_distance(w, v))
        return out

    best = center0
    best_rms = float(np.sqrt(np.mean(residuals(center0) ** 2)))
    sol = least_squares(residuals, center0, method="lm", xtol=1e-15, ftol=1e-15)
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    if rms < best_rms:
        best, best_rms = sol.x, rms
    model = ProjectiveMap.harmonic_homology(_unit(best), m)
    return model, best_rms


def fit_mobius_involution(ts, fs):
    """Best projective involution of RP^1 fixing t = 0: t -> -t/(1+ct).

    Returns (c, rms residual) from a pointwise estimate polished by
    Levenberg-Marquardt.
    """
    ts = np.asarray(ts, dtype=float)
    fs = np.asarray(fs, dtype=float)
    keep = (np.abs(ts) > 1e-12) & (np.abs(fs) > 1e-12)
    if keep.sum() < 2:
        raise DegenerateDataError("too few usable samples for a Mobius fit")
    c0 = float(np.median(-(ts[keep] + fs[keep]) / (fs[keep] * ts[keep])))

    def residuals(c):
        return fs + ts / (1.0 + c[0] * ts)

    sol = least_squares(residuals, np.array([c0]), method="lm")
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    return float(sol.x[0]), rms


# ---------------------------------------------------------------------------
# Jets of involutions at the fixed point
# ---------------------------------------------------------------------------

def two_jet_at_fixed_point(f, scale=1e-2, rel_tol=1e-4):
    """Coefficients (a1, a2) of f(t) = a1 t + a2 t^2 + O(t^3) at t = 0.

    Richardson-extrapolated central differences at two step sizes; a
    disagreement beyond rel_tol raises PrecisionError (noisy sampler).
    """
    g = _chart_function(f)

    def d1(h):
        return (g(h) - g(-h)) / (2.0 * h)

    def d2(h):
        return (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h)

    def richardson(d, h):
        return (4.0 * d(h / 2.0) - d(h)) / 3.0

    a1_coarse = richardson(d1, scale)
    a1_fine = richardson(d1, scale / 2.0)
    a2_coarse = richardson(d2, scale) / 2.0
    a2_fine = richardson(d2, scale / 2.0) / 2.0
    if abs(a1_fine - a1_coarse) > rel_tol * max(1.0, abs(a1_fine)):
        raise PrecisionError("first-jet extrapolations disagree")
    if abs(a2_fine - a2_coarse) > rel_tol * max(1.0, abs(a2_fine)):
        raise PrecisionError("second-jet extrapolations disagree")
    return float(a1_fine), float(a2_fine)


def deviation_exponent(f, g, grid):
    """Power-law fit of the chart difference of two involutions.

    Returns (exponent, signed coefficient) of |f(t) - g(t)| ~ |C| t^k on
    the grid; grids entirely below the round-off floor raise
    IndistinguishableError (the maps agree).
    """
    if isinstance(f, SphereInvolutionSampler) and isinstance(g, SphereInvolutionSampler):
        if rp_distance(f.fixed_vector, g.fixed_vector) > 1e-9:
            raise DomainError("samplers do not share their fixed point")
    fc = _chart_function(f)
    gc = _chart_function(g)
    grid = np.asarray(grid, dtype=float)
    deltas = np.array([fc(t) - gc(t) for t in grid])
    return fit_power_law(grid, deltas)
