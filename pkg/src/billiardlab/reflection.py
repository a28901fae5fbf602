"""Reflection laws in convex bodies.

Implements the parallel-chord involution of a sphere of directions, the
T-billiard reflection it induces, the Euclidean and projective-billiard
reflections, both formulations of the Minkowski-Finsler reflection law,
and the diagonal rescaling that conjugates ellipse billiards to
Euclidean ones.  All functions are pure; bodies are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import least_squares

from .bodies import ConvexBody, OrientedLine, _unit, legendre_point, polar_dual
from .errors import (
    DegenerateChordError,
    DomainError,
    GrazingError,
    SolverError,
)

# incidence angles below this (radians, small-angle regime) are grazing
GRAZING_ANGLE = 1e-6
_PERP_TOL = 1e-13


@dataclass(frozen=True)
class ParallelClass:
    """A class of parallel lines, stored as a sign-normalized unit vector."""

    direction: np.ndarray

    def __post_init__(self):
        d = _unit(self.direction)
        nz = np.nonzero(np.abs(d) > 1e-14)[0]
        if len(nz) and d[nz[0]] < 0:
            d = -d
        object.__setattr__(self, "direction", d)


@dataclass(frozen=True)
class TransversalField:
    """Line field transversal to a hypersurface: Q -> unit vector (up to sign)."""

    func: Callable[[np.ndarray], np.ndarray]
    margin: float = 1e-8

    def at(self, q):
        return _unit(self.func(np.asarray(q, dtype=float)))


def euclidean_reflect(normal, v):
    """Mirror v across the hyperplane orthogonal to the unit normal."""
    normal = _unit(normal)
    v = np.asarray(v, dtype=float)
    return v - 2.0 * float(np.dot(v, normal)) * normal


def parallel_chord_involution(T: ConvexBody, cls: ParallelClass, u):
    """Sphere involution transporting normals of dT along chords of class cls.

    Sends the exterior normal at one end of a chord parallel to
    cls.direction to the normal at the other end; directions orthogonal
    to the class are fixed.  Near-tangential chords raise
    DegenerateChordError (callers may treat those directions as fixed).
    """
    u = _unit(u)
    d = cls.direction
    if abs(float(np.dot(u, d))) < _PERP_TOL:
        return u
    a = T.gauss_inverse(u)
    b = T.chord_second_intersection(a, d)
    return T.exterior_normal(b)


def t_billiard_reflect(K: ConvexBody, T: ConvexBody, line: OrientedLine):
    """Reflect an oriented line off dK under the T-billiard law.

    The bounce point is the last intersection q of the line with dK; the
    outgoing direction is the parallel-chord involution of the incoming
    one, for the class of lines parallel to the normal of dK at q.
    """
    q = K.last_intersection(line)
    n = K.exterior_normal(q)
    inc = float(np.dot(line.direction, n))
    if inc <= GRAZING_ANGLE:
        raise GrazingError(f"grazing incidence at {q} (sin = {inc:.2e})")
    v_out = parallel_chord_involution(T, ParallelClass(n), line.direction)
    if float(np.dot(v_out, n)) >= 0.0:
        raise SolverError("reflected direction does not point into the body")
    return OrientedLine(q, v_out)


def projective_billiard_reflect(point, tangent_normal, transversal, incoming: OrientedLine):
    """Projective-billiard reflection at a boundary point.

    The reflection is the affine involution fixing the tangent plane
    (through ``point`` with unit normal ``tangent_normal``) pointwise and
    acting as central symmetry on the transversal line; a line inside
    the tangent plane is returned unchanged.
    """
    q = np.asarray(point, dtype=float)
    m = _unit(tangent_normal)
    nu = _unit(transversal)
    trans = float(np.dot(nu, m))
    if abs(trans) < 1e-10:
        raise DomainError("transversal line lies in the tangent plane")
    if np.linalg.norm(incoming.point - q) > 1e-9 * max(1.0, np.linalg.norm(q)):
        # allow lines given by any base point on them
        t = float(np.dot(q - incoming.point, incoming.direction))
        if np.linalg.norm(incoming.at(t) - q) > 1e-9 * max(1.0, np.linalg.norm(q)):
            raise DomainError("incoming line does not pass through the point")
    v = incoming.direction
    w = v - 2.0 * (float(np.dot(v, m)) / trans) * nu
    return OrientedLine(q, w)


def projective_billiard_map(body: ConvexBody, field: TransversalField,
                            line: OrientedLine):
    """Projective billiard map on a convex body with a transversal field."""
    q = body.last_intersection(line)
    n = body.exterior_normal(q)
    inc = float(np.dot(line.direction, n))
    if inc <= GRAZING_ANGLE:
        raise GrazingError(f"grazing incidence at {q}")
    nu = field.at(q)
    if abs(float(np.dot(nu, n))) < field.margin:
        raise DomainError("transversal field violates its margin")
    out = projective_billiard_reflect(q, n, nu, OrientedLine(q, line.direction))
    if float(np.dot(out.direction, n)) > 0.0:
        out = OrientedLine(q, -out.direction)
    return out


# ---------------------------------------------------------------------------
# Minkowski-Finsler reflection laws
# ---------------------------------------------------------------------------

def _require_symmetric(I: ConvexBody):
    for k in range(I.dim):
        u = np.zeros(I.dim)
        u[k] = 1.0
        if abs(I.support(u) - I.support(-u)) > 1e-9 * I.bounding_radius():
            raise DomainError(
                "Finsler reflection laws require a centrally symmetric indicatrix")
    u = _unit(np.arange(1.0, I.dim + 1.0))
    if abs(I.support(u) - I.support(-u)) > 1e-9 * I.bounding_radius():
        raise DomainError(
            "Finsler reflection laws require a centrally symmetric indicatrix")


def _check_grazing(m, u):
    if abs(float(np.dot(_unit(m), _unit(u)))) < GRAZING_ANGLE:
        raise GrazingError("incidence vector lies in the reflecting hyperplane")


def finsler_reflect_legendre(I: ConvexBody, hyperplane_normal, u):
    """Finsler reflection via the Legendre transform.

    Returns the point v on the indicatrix for which D(u) - D(v)
    annihilates the reflecting hyperplane; realized as a chord of the
    figuratrix (the polar dual) in the direction of the hyperplane
    normal.
    """
    _require_symmetric(I)
    m = _unit(hyperplane_normal)
    u = np.asarray(u, dtype=float)
    _check_grazing(m, u)
    J = polar_dual(I)
    du = legendre_point(I, u)
    w = J.chord_second_intersection(du, m)
    v = legendre_point(J, w)
    gap = du - w
    residual = np.linalg.norm(gap - float(np.dot(gap, m)) * m)
    if residual > 1e-10 * max(1.0, np.linalg.norm(gap)):
        raise SolverError(f"Legendre reflection residual {residual:.2e}")
    if np.sign(np.dot(m, v)) == np.sign(np.dot(m, u)):
        raise SolverError("reflected vector is on the wrong side of the hyperplane")
    return v


def finsler_reflect_concurrency(I: ConvexBody, hyperplane_normal, u):
    """Finsler reflection via the concurrent-hyperplanes law.

    Finds v on the indicatrix whose tangent hyperplane meets the tangent
    hyperplane at u inside the reflecting hyperplane (the three are
    concurrent); when the tangent plane at u is parallel to the
    reflecting hyperplane the antipode is returned.
    """
    _require_symmetric(I)
    if I.dim > 3:
        raise DomainError("concurrency law implemented for dimensions 2 and 3")
    m = _unit(hyperplane_normal)
    u = np.asarray(u, dtype=float)
    _check_grazing(m, u)
    a = legendre_point(I, u)
    a_norm = np.linalg.norm(a)
    if np.linalg.norm(a - float(np.dot(a, m)) * m) < 1e-12 * a_norm:
        return -u
    if I.dim == 2:
        return _concurrency_2d(I, m, a, u)
    return _concurrency_nd(I, m, a, u)


def _concurrency_2d(I, m, a, u):
    # point where the tangent line at u meets the reflecting line
    M = np.stack([a, m])
    p_star = np.linalg.solve(M, np.array([1.0, 0.0]))

    def gap(theta):
        v = I.gauss_inverse(np.array([np.cos(theta), np.sin(theta)]))
        return float(np.dot(legendre_point(I, v), p_star)) - 1.0

    # the tangency angles seen from p_star are the two roots of gap();
    # one of them is u itself, so deflate it: gap / sin((theta-theta_u)/2)
    # changes sign exactly once more on the circle, even when the roots
    # nearly merge (p_star close to the boundary at near-grazing incidence)
    n_u = I.exterior_normal(_boundary_of(I, u))
    theta_u = float(np.arctan2(n_u[1], n_u[0]))

    def deflated(theta):
        return gap(theta) / math.sin(0.5 * (theta - theta_u))

    grid = theta_u + np.linspace(1e-4, 2.0 * np.pi - 1e-4, 257)
    vals = np.array([deflated(t) for t in grid])
    change = np.nonzero(vals[:-1] * vals[1:] <= 0.0)[0]
    if len(change) == 0:
        raise SolverError("no transversal concurrency solution found")
    k = int(change[0])
    lo, hi = grid[k], grid[k + 1]
    flo = deflated(lo)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fmid = deflated(mid)
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    v = I.gauss_inverse(np.array([np.cos(theta), np.sin(theta)]))
    if np.sign(np.dot(m, v)) == np.sign(np.dot(m, u)):
        raise SolverError("concurrency solution on the wrong side")
    return v


def _boundary_of(I, u):
    """Boundary point of the indicatrix along the ray of u (u itself if on it)."""
    u = np.asarray(u, dtype=float)
    if abs(I.boundary_residual(u)) < 1e-9:
        return u
    t_lo, t_hi = 0.0, 1.0
    while I.implicit(t_hi * u) < 0.0:
        t_hi *= 2.0
    for _ in range(80):
        mid = 0.5 * (t_lo + t_hi)
        if I.implicit(mid * u) < 0.0:
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi) * u


def _concurrency_nd(I, m, a, u):
    # affine frame of the codimension-two plane (tangent at u) n (hyperplane)
    M = np.stack([a, m])
    w0, *_ = np.linalg.lstsq(M, np.array([1.0, 0.0]), rcond=None)
    _, _, vt = np.linalg.svd(M)
    E = vt[2:]  # directions spanning the codim-2 plane

    n_angles = I.dim - 1

    def residuals(angles):
        azimuth, polars = angles[0], angles[1:]
        vec = np.array([np.cos(azimuth) * np.sin(polars[0]),
                        np.sin(azimuth) * np.sin(polars[0]),
                        np.cos(polars[0])])
        v = I.gauss_inverse(vec)
        dv = legendre_point(I, v)
        return np.concatenate([[np.dot(dv, w0) - 1.0], E @ dv])

    v_seed = euclidean_reflect(m, _boundary_of(I, u))
    n_seed = I.exterior_normal(_boundary_of(I, v_seed))
    seed = np.array([np.arctan2(n_seed[1], n_seed[0]),
                     np.arccos(np.clip(n_seed[2], -1.0, 1.0))])
    sol = least_squares(residuals, seed, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if not sol.success or np.linalg.norm(sol.fun) > 1e-9:
        raise SolverError("concurrency solve did not converge")
    azimuth, polar = sol.x
    v = I.gauss_inverse(np.array([np.cos(azimuth) * np.sin(polar),
                                  np.sin(azimuth) * np.sin(polar),
                                  np.cos(polar)]))
    if np.sign(np.dot(m, v)) == np.sign(np.dot(m, u)):
        raise SolverError("concurrency solution on the wrong side")
    return v


def rescale_conjugate(b, line: OrientedLine):
    """Coordinate rescaling q_j -> b_j q_j applied to an oriented line.

    For T the ellipse with semiaxes b this conjugates the T-billiard in K
    to the Euclidean billiard in the rescaled body.
    """
    b = np.asarray(b, dtype=float)
    if np.any(b <= 0.0):
        raise DomainError("rescaling factors must be positive")
    return OrientedLine(b * line.point, _unit(b * line.direction))
