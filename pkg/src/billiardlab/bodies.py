"""Smooth strictly convex bodies with high-order boundary jets.

Every body exposes an implicit function F (negative inside, zero on the
boundary), its gradient and Hessian, and a handful of geometric queries:
exterior normals, the inverse Gauss map, chords, support functions and
polar duals.  Closed-form paths are provided wherever the representation
allows (ellipsoids, superellipses, radial and support-function bodies);
the generic fallbacks are damped Newton with multistart seeding and
ray-march bracketing followed by bisection and Newton polish.

Bodies are immutable after construction and all queries are pure
functions of (body, arguments), so instances are safe to share between
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryMembershipError,
    ConvergenceError,
    ConvexityViolationError,
    DegenerateChordError,
    DomainError,
    OriginNotInteriorError,
)
from .jets import MPoly, Taylor1D

# tolerances used by the generic solvers
GAUSS_TOL = 1e-12
GAUSS_MAX_ITER = 100
CHORD_RESIDUAL_TOL = 1e-12
CHORD_MARCH_FRACTION = 1e-2
TANGENCY_FRACTION = 1e-6
BOUNDARY_TOL = 1e-8


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero vector has no direction")
    return v / n


def unit_vector(angles, dim):
    """Point of S^(dim-1) from one angle (2D) or (azimuth, polar) (3D)."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if dim == 2:
        return np.array([math.cos(angles[0]), math.sin(angles[0])])
    if dim == 3:
        az, pol = angles[0], angles[1]
        s = math.sin(pol)
        return np.array([math.cos(az) * s, math.sin(az) * s, math.cos(pol)])
    raise DomainError(f"no angle chart for dimension {dim}")


def rot90(v):
    """Counterclockwise quarter turn in the plane."""
    return np.array([-v[1], v[0]])


def tangent_frame(u):
    """Deterministic orthonormal basis of the hyperplane orthogonal to u."""
    u = _unit(u)
    n = len(u)
    if n == 2:
        return rot90(u).reshape(1, 2)
    M = np.eye(n)
    idx = int(np.argmax(np.abs(u)))
    M[:, [0, idx]] = M[:, [idx, 0]]
    M[:, 0] = u
    q, _ = np.linalg.qr(M)
    frame = q[:, 1:].T
    return frame


def _compass_directions(dim):
    """Multistart seed directions: 8 in the plane, 26 in space."""
    if dim == 2:
        ang = np.arange(8) * (math.pi / 4.0)
        return [np.array([math.cos(a), math.sin(a)]) for a in ang]
    if dim == 3:
        dirs = []
        for ix in (-1, 0, 1):
            for iy in (-1, 0, 1):
                for iz in (-1, 0, 1):
                    if ix == iy == iz == 0:
                        continue
                    dirs.append(_unit(np.array([ix, iy, iz], dtype=float)))
        return dirs
    dirs = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        dirs.extend([e, -e])
    dirs.append(_unit(np.ones(dim)))
    dirs.append(_unit(-np.ones(dim)))
    return dirs


@dataclass(frozen=True)
class OrientedLine:
    """Base point plus unit direction; the phase-space element of billiards."""

    point: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "direction", _unit(self.direction))

    def at(self, t):
        return self.point + t * self.direction

    def reversed(self):
        return OrientedLine(self.point, -self.direction)


class ConvexBody:
    """Base class: generic algorithms over the implicit representation."""

    dim = None

    # -- representation interface ------------------------------------------

    def implicit(self, x):
        raise NotImplementedError

    def implicit_grad(self, x):
        raise NotImplementedError

    def implicit_hess(self, x):
        raise NotImplementedError

    def bounding_radius(self):
        raise NotImplementedError

    def diameter(self):
        return 2.0 * self.bounding_radius()

    def interior_point(self):
        return np.zeros(self.dim)

    # -- membership and normals --------------------------------------------

    def contains(self, x):
        return bool(self.implicit(np.asarray(x, dtype=float)) < 0.0)

    def boundary_residual(self, p):
        return float(self.implicit(np.asarray(p, dtype=float)))

    def _require_boundary(self, p, tol=BOUNDARY_TOL):
        p = np.asarray(p, dtype=float)
        r = abs(self.implicit(p))
        scale = max(1.0, float(np.linalg.norm(self.implicit_grad(p))))
        if r > tol * scale * max(1.0, self.bounding_radius()):
            raise BoundaryMembershipError(
                f"point {p} not on boundary (residual {r:.3e})")
        return p

    def exterior_normal(self, p):
        """Unit exterior normal at a boundary point."""
        p = self._require_boundary(p)
        return _unit(self.implicit_grad(p))

    def second_fundamental_form(self, p):
        """Symmetric matrix of the second fundamental form in an
        orthonormal tangent frame; raises if not positive definite."""
        p = self._require_boundary(p)
        g = self.implicit_grad(p)
        H = self.implicit_hess(p)
        frame = tangent_frame(g)
        II = frame @ H @ frame.T / np.linalg.norm(g)
        II = 0.5 * (II + II.T)
        if np.min(np.linalg.eigvalsh(II)) <= 0.0:
            raise ConvexityViolationError(
                f"second fundamental form not positive definite at {p}")
        return II

    # -- inverse Gauss map ---------------------------------------------------

    def gauss_inverse(self, u):
        """Boundary point whose exterior normal is u (damped Newton,
        multistart from compass seed directions)."""
        u = _unit(u)
        seeds = [u] + _compass_directions(self.dim)
        last = (None, None)
        for s in seeds:
            try:
                p0 = self._boundary_in_direction(s)
            except ConvergenceError:
                continue
            p, iters, res = self._gauss_newton(u, p0)
            if p is not None:
                return p
            last = (iters, res)
        raise ConvergenceError(
            f"gauss_inverse failed for u={u}", iterations=last[0], residual=last[1])

    def _boundary_in_direction(self, s):
        """Boundary intersection of the ray from the interior point along s."""
        s = _unit(s)
        c = self.interior_point()
        lo, hi = 0.0, self.bounding_radius()
        f_hi = float(self.implicit(c + hi * s))
        k = 0
        while f_hi <= 0.0 and k < 60:
            hi *= 2.0
            f_hi = float(self.implicit(c + hi * s))
            k += 1
        if f_hi <= 0.0:
            raise ConvergenceError("ray never leaves the body")
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if float(self.implicit(c + mid * s)) < 0.0:
                lo = mid
            else:
                hi = mid
        return c + 0.5 * (lo + hi) * s

    def _gauss_newton(self, u, p0):
        n = self.dim
        p = np.asarray(p0, dtype=float).copy()
        lam = float(np.linalg.norm(self.implicit_grad(p)))

        def residual(p, lam):
            return np.concatenate([self.implicit_grad(p) - lam * u,
                                   [self.implicit(p)]])

        r = residual(p, lam)
        for it in range(GAUSS_MAX_ITER):
            nr = np.linalg.norm(r)
            if nr <= GAUSS_TOL * max(1.0, lam):
                if lam > 0.0:
                    return p, it, nr
                return None, it, nr
            J = np.zeros((n + 1, n + 1))
            J[:n, :n] = self.implicit_hess(p)
            J[:n, n] = -u
            J[n, :n] = self.implicit_grad(p)
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                return None, it, nr
            alpha = 1.0
            for _ in range(40):
                p_new = p + alpha * step[:n]
                lam_new = lam + alpha * step[n]
                r_new = residual(p_new, lam_new)
                if np.linalg.norm(r_new) < (1.0 - 1e-4 * alpha) * nr:
                    break
                alpha *= 0.5
            else:
                return None, it, nr
            p, lam, r = p_new, lam_new, r_new
        nr = np.linalg.norm(r)
        if nr <= GAUSS_TOL * max(1.0, lam) and lam > 0.0:
            return p, GAUSS_MAX_ITER, nr
        return None, GAUSS_MAX_ITER, nr

    def gauss_point(self, angles):
        """Boundary point with exterior normal unit_vector(angles)."""
        return self.gauss_inverse(unit_vector(angles, self.dim))

    # -- support function ----------------------------------------------------

    def support(self, u):
        """h(u) = max over the body of <x, u> (1-homogeneous in u)."""
        u = np.asarray(u, dtype=float)
        nu = np.linalg.norm(u)
        p = self.gauss_inverse(u / nu)
        return float(np.dot(p, u))

    def support_point(self, u):
        """The boundary point attaining the support value in direction u."""
        return self.gauss_inverse(_unit(u))

    # -- chords and line intersections ---------------------------------------

    def chord_second_intersection(self, a, d):
        """Second boundary point on the chord through a in direction d.

        The parameter sign is chosen so the chord enters the body; a
        tangential chord (|t| below the tangency threshold) raises
        DegenerateChordError.
        """
        a = self._require_boundary(a)
        d = _unit(d)
        diam = self.diameter()
        g = float(np.dot(self.implicit_grad(a), d))
        sign = -1.0 if g > 0.0 else 1.0
        t = self._march_to_exit(a, sign * d, diam)
        t *= sign
        if abs(t) < TANGENCY_FRACTION * diam:
            raise DegenerateChordError(
                f"chord at {a} along {d} is tangential (|t|={abs(t):.2e})")
        return a + t * d

    def _march_to_exit(self, a, w, diam):
        """Positive root of F(a + t w) = 0 by march, bisection, Newton."""
        step = CHORD_MARCH_FRACTION * diam
        kmax = int(math.ceil(1.2 * diam / step)) + 2
        ts = step * np.arange(1, kmax + 1)
        vals = self.implicit(a[None, :] + ts[:, None] * w[None, :])
        out = np.nonzero(vals >= 0.0)[0]
        if len(out) == 0:
            raise DegenerateChordError("ray never exits the body")
        k = int(out[0])
        lo = 0.0 if k == 0 else ts[k - 1]
        hi = ts[k]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if float(self.implicit(a + mid * w)) < 0.0:
                lo = mid
            else:
                hi = mid
        t = 0.5 * (lo + hi)
        for _ in range(8):
            f = float(self.implicit(a + t * w))
            df = float(np.dot(self.implicit_grad(a + t * w), w))
            if df == 0.0:
                break
            t_new = t - f / df
            if not (lo - step <= t_new <= hi + step):
                break
            t = t_new
            if abs(f) <= CHORD_RESIDUAL_TOL:
                break
        return t

    def line_intersections(self, line: OrientedLine):
        """Entry and exit parameters (t_enter < t_exit) of an oriented line."""
        p, v = line.point, line.direction
        R = self.bounding_radius()
        b = float(np.dot(p, v))
        disc = b * b + R * R * 1.1 - float(np.dot(p, p))
        if disc <= 0.0:
            raise DomainError("line misses the body")
        t0, t1 = -b - math.sqrt(disc), -b + math.sqrt(disc)
        grid = np.linspace(t0, t1, 257)
        vals = self.implicit(p[None, :] + grid[:, None] * v[None, :])
        inside = vals < 0.0
        if not np.any(inside):
            raise DomainError("line misses the body")
        idx = np.nonzero(inside)[0]
        t_enter = self._refine_crossing(p, v, grid[idx[0] - 1], grid[idx[0]])
        t_exit = self._refine_crossing(p, v, grid[idx[-1]], grid[idx[-1] + 1])
        return t_enter, t_exit

    def _refine_crossing(self, p, v, lo, hi):
        f_lo = float(self.implicit(p + lo * v))
        for _ in range(70):
            mid = 0.5 * (lo + hi)
            f_mid = float(self.implicit(p + mid * v))
            if (f_mid < 0.0) == (f_lo < 0.0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        t = 0.5 * (lo + hi)
        for _ in range(6):
            f = float(self.implicit(p + t * v))
            df = float(np.dot(self.implicit_grad(p + t * v), v))
            if df == 0.0:
                break
            t -= f / df
        return t

    def last_intersection(self, line: OrientedLine):
        """Last boundary point met by the oriented line (its exit point)."""
        _, t_exit = self.line_intersections(line)
        return line.at(t_exit)

    # -- volume ---------------------------------------------------------------

    def volume(self, n_samples=2 ** 17, seed=0):
        """Generic volume: boundary quadrature in 2D, quasi-Monte Carlo
        indicator integration in higher dimension."""
        if self.dim == 2:
            thetas = np.linspace(0.0, 2.0 * math.pi, 1024, endpoint=False)
            pts = np.array([self.gauss_inverse(np.array([math.cos(t), math.sin(t)]))
                            for t in thetas])

            def shoelace(P):
                x, y = P[:, 0], P[:, 1]
                xn, yn = np.roll(x, -1), np.roll(y, -1)
                return float(0.5 * np.sum(x * yn - xn * y))

            # inscribed-polygon area has an O(N^-2) defect; extrapolate it out
            fine = shoelace(pts)
            coarse = shoelace(pts[::2])
            return (4.0 * fine - coarse) / 3.0
        from scipy.stats import qmc

        R = self.bounding_radius()
        sampler = qmc.Halton(d=self.dim, scramble=True, seed=seed)
        pts = (sampler.random(n_samples) * 2.0 - 1.0) * R
        frac = float(np.mean(self.implicit(pts) < 0.0))
        return frac * (2.0 * R) ** self.dim


# ---------------------------------------------------------------------------
# Concrete bodies
# ---------------------------------------------------------------------------

class Ellipsoid(ConvexBody):
    """Body {<Ax, x> <= 1} for symmetric positive definite A."""

    def __init__(self, A):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DomainError("ellipsoid matrix must be square")
        if not np.allclose(A, A.T, atol=1e-12):
            raise DomainError("ellipsoid matrix must be symmetric")
        w = np.linalg.eigvalsh(A)
        if w[0] <= 0.0:
            raise ConvexityViolationError("ellipsoid matrix must be positive definite")
        self.A = 0.5 * (A + A.T)
        self.A_inv = np.linalg.inv(self.A)
        self.dim = A.shape[0]
        self._radius = 1.0 / math.sqrt(w[0])

    def implicit(self, x):
        x = np.asarray(x, dtype=float)
        return np.einsum("...i,ij,...j->...", x, self.A, x) - 1.0

    def implicit_grad(self, x):
        return 2.0 * np.asarray(x, dtype=float) @ self.A

    def implicit_hess(self, x):
        return 2.0 * self.A

    def bounding_radius(self):
        return self._radius

    def gauss_inverse(self, u):
        u = _unit(u)
        w = self.A_inv @ u
        return w / math.sqrt(float(np.dot(w, u)))

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return math.sqrt(float(u @ self.A_inv @ u))

    def support_point(self, u):
        return self.gauss_inverse(u)

    def chord_second_intersection(self, a, d):
        a = self._require_boundary(a)
        d = _unit(d)
        t = -2.0 * float(a @ self.A @ d) / float(d @ self.A @ d)
        if abs(t) < TANGENCY_FRACTION * self.diameter():
            raise DegenerateChordError("tangential chord on ellipsoid")
        return a + t * d

    def line_intersections(self, line: OrientedLine):
        p, v = line.point, line.direction
        qa = float(v @ self.A @ v)
        qb = float(p @ self.A @ v)
        qc = float(p @ self.A @ p) - 1.0
        disc = qb * qb - qa * qc
        if disc <= 0.0:
            raise DomainError("line misses the ellipsoid")
        r = math.sqrt(disc)
        return (-qb - r) / qa, (-qb + r) / qa

    def volume(self, **_):
        unit_ball = math.pi ** (self.dim / 2.0) / math.gamma(self.dim / 2.0 + 1.0)
        return unit_ball / math.sqrt(float(np.linalg.det(self.A)))

    def position_jet(self, theta, order=5):
        """Taylor jets of the Gauss-angle boundary parametrization (2D)."""
        if self.dim != 2:
            raise DomainError("position_jet is a planar parametrization")
        t = Taylor1D.variable(float(theta), order)
        c, s = t.cos(), t.sin()
        wx = c * self.A_inv[0, 0] + s * self.A_inv[0, 1]
        wy = c * self.A_inv[1, 0] + s * self.A_inv[1, 1]
        scale = (wx * c + wy * s).sqrt().recip()
        return wx * scale, wy * scale


def Ball(radius=1.0, dim=2):
    """Euclidean ball as an Ellipsoid instance."""
    return Ellipsoid(np.eye(dim) / radius ** 2)


class Superellipse(ConvexBody):
    """Body {sum |x_i / a_i|^m <= 1} with exponent m > 2.

    Smooth and strictly convex away from the coordinate axis points,
    where the curvature degenerates for m > 2; all queries are valid at
    the points where they are made (the standing positive-definiteness
    hypothesis is checked per query).
    """

    def __init__(self, exponent=4.0, semiaxes=None, dim=2):
        self.m = float(exponent)
        if self.m <= 1.0:
            raise DomainError("superellipse exponent must exceed 1")
        if semiaxes is None:
            semiaxes = np.ones(dim)
        self.a = np.asarray(semiaxes, dtype=float)
        if np.any(self.a <= 0.0):
            raise DomainError("semiaxes must be positive")
        self.dim = len(self.a)
        # farthest point: Lagrange gives |x| = (sum a_i^(2m/(m-2)))^((m-2)/2m)
        # for m > 2; for m <= 2 the maximum sits on the longest axis
        if self.m > 2.0:
            expo = 2.0 * self.m / (self.m - 2.0)
            reach = float(np.sum(self.a ** expo)) ** ((self.m - 2.0) / (2.0 * self.m))
        else:
            reach = float(np.max(self.a))
        self._radius = max(reach, float(np.max(self.a))) * 1.0001

    def implicit(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum(np.abs(x / self.a) ** self.m, axis=-1) - 1.0

    def implicit_grad(self, x):
        x = np.asarray(x, dtype=float)
        y = x / self.a
        return (self.m / self.a) * np.sign(y) * np.abs(y) ** (self.m - 1.0)

    def implicit_hess(self, x):
        x = np.asarray(x, dtype=float)
        y = np.abs(x / self.a)
        return np.diag(self.m * (self.m - 1.0) / self.a ** 2 * y ** (self.m - 2.0))

    def bounding_radius(self):
        return self._radius

    def gauss_inverse(self, u):
        # grad F at p is proportional to u componentwise; invert the odd power
        u = _unit(u)
        w = self.a * np.sign(u) * np.abs(self.a * u) ** (1.0 / (self.m - 1.0))
        scale = np.sum(np.abs(w / self.a) ** self.m) ** (1.0 / self.m)
        return w / scale

    def support(self, u):
        u = np.asarray(u, dtype=float)
        q = self.m / (self.m - 1.0)
        return float(np.sum(np.abs(self.a * u) ** q) ** (1.0 / q))

    def support_point(self, u):
        return self.gauss_inverse(u)

    def volume(self, **_):
        g = math.gamma(1.0 + 1.0 / self.m)
        gn = math.gamma(1.0 + self.dim / self.m)
        return float(np.prod(2.0 * self.a)) * g ** self.dim / gn

    def chord_second_intersection(self, a, d):
        if not float(self.m).is_integer() or self.m < 2 or int(self.m) % 2:
            # odd or fractional exponents keep the absolute values in the
            # implicit function; fall back to the bracketing solver
            return super().chord_second_intersection(a, d)
        # exact route for even polynomial exponents: F along the line is a
        # degree-m polynomial with an exact root at t = 0; deflating that
        # root keeps the other intersection well conditioned even for
        # near-tangential chords, where bisection on F loses digits
        a = self._require_boundary(a)
        d = _unit(d)
        m = int(self.m)
        coeffs = np.zeros(m + 1)
        for ai, di, scale in zip(a, d, self.a):
            base = np.zeros(m + 1)
            for k in range(m + 1):
                base[k] = (math.comb(m, k) * (ai / scale) ** (m - k)
                           * (di / scale) ** k)
            coeffs += base
        coeffs[0] -= 1.0  # exact residual of the boundary point
        deflated = coeffs[1:]
        roots = np.roots(deflated[::-1])
        real = roots[np.abs(roots.imag) < 1e-9 * (1.0 + np.abs(roots.real))].real
        threshold = TANGENCY_FRACTION * self.diameter()
        candidates = sorted(t for t in real if abs(t) > 1e-3 * threshold)
        if not candidates:
            raise DegenerateChordError("tangential chord on superellipse")
        t = min(candidates, key=abs)
        # Newton polish on the deflated polynomial
        dpoly = np.polyder(np.poly1d(deflated[::-1]))
        poly = np.poly1d(deflated[::-1])
        for _ in range(4):
            dv = dpoly(t)
            if dv == 0.0:
                break
            t -= poly(t) / dv
        if abs(t) < threshold:
            raise DegenerateChordError("tangential chord on superellipse")
        return a + t * d

    def position_jet(self, theta, order=5):
        """Taylor jets of the Gauss-angle boundary parametrization (2D).

        Valid away from the axis directions, where the normal components
        vanish and the fractional power loses smoothness.
        """
        if self.dim != 2:
            raise DomainError("position_jet is a planar parametrization")
        t = Taylor1D.variable(float(theta), order)
        comps = [t.cos(), t.sin()]
        if any(abs(c.value) < 1e-8 for c in comps):
            raise DomainError("superellipse jets degenerate on the axes")
        ws = []
        for u_i, a_i in zip(comps, self.a):
            s = 1.0 if u_i.value > 0 else -1.0
            ws.append((u_i * (s * a_i)).pow(1.0 / (self.m - 1.0)) * (s * a_i))
        # sum |w_i/a_i|^m, with signs handled through the positive base
        total = Taylor1D.constant(0.0, order)
        for w_i, a_i in zip(ws, self.a):
            s = 1.0 if w_i.value > 0 else -1.0
            total = total + (w_i * (s / a_i)).pow(self.m)
        scale = total.pow(-1.0 / self.m)
        return ws[0] * scale, ws[1] * scale


class RadialBody2D(ConvexBody):
    """Planar body with trigonometric-polynomial radial function.

    r(theta) = cos_coeffs[0] + sum_k cos_coeffs[k] cos(k theta)
                             + sum_k sin_coeffs[k] sin(k theta).
    Exact theta-derivatives to any order make 5-jets of the boundary
    available without differencing noise.
    """

    dim = 2

    def __init__(self, cos_coeffs, sin_coeffs=()):
        self.cc = np.asarray(cos_coeffs, dtype=float)
        sc = np.asarray(sin_coeffs, dtype=float)
        if len(sc) < len(self.cc):
            sc = np.concatenate([sc, np.zeros(len(self.cc) - len(sc))])
        self.sc = sc
        rs = self.radial(np.linspace(0, 2 * math.pi, 720, endpoint=False))
        if np.min(rs) <= 0.0:
            raise DomainError("radial function must be positive")
        self._radius = float(np.max(rs)) * 1.0001
        ks = self.boundary_curvature(np.linspace(0, 2 * math.pi, 720, endpoint=False))
        if np.min(ks) <= 0.0:
            raise ConvexityViolationError("radial body is not convex")

    def radial(self, theta, order=0):
        """d^order/dtheta^order of r at theta (vectorized)."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta, dtype=float)
        for k in range(len(self.cc)):
            kk = float(k)
            phase = order * math.pi / 2.0
            if k == 0:
                out = out + (self.cc[0] if order == 0 else 0.0)
                continue
            out = out + self.cc[k] * kk ** order * np.cos(kk * theta + phase)
            out = out + self.sc[k] * kk ** order * np.sin(kk * theta + phase)
        return out

    def boundary_point(self, theta):
        r = self.radial(theta)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def boundary_curvature(self, theta):
        r = self.radial(theta)
        r1 = self.radial(theta, 1)
        r2 = self.radial(theta, 2)
        return (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5

    def position_jet(self, theta, order=5):
        """Taylor jets of the parametrized boundary at theta."""
        t = Taylor1D.variable(theta, order)
        r = Taylor1D.constant(0.0, order)
        for k in range(len(self.cc)):
            if k == 0:
                r = r + self.cc[0]
            else:
                kt = t * float(k)
                r = r + kt.cos() * self.cc[k] + kt.sin() * self.sc[k]
        return r * t.cos(), r * t.sin()

    def implicit(self, x):
        x = np.asarray(x, dtype=float)
        rho = np.linalg.norm(x, axis=-1)
        theta = np.arctan2(x[..., 1], x[..., 0])
        return rho - self.radial(theta)

    def implicit_grad(self, x):
        x = np.asarray(x, dtype=float)
        rho = float(np.linalg.norm(x))
        theta = math.atan2(x[1], x[0])
        e_r = x / rho
        e_t = rot90(e_r)
        r1 = float(self.radial(np.array(theta), 1))
        return e_r - (r1 / rho) * e_t

    def implicit_hess(self, x):
        x = np.asarray(x, dtype=float)
        rho = float(np.linalg.norm(x))
        theta = math.atan2(x[1], x[0])
        e_r = (x / rho).reshape(2, 1)
        e_t = rot90(x / rho).reshape(2, 1)
        r1 = float(self.radial(np.array(theta), 1))
        r2 = float(self.radial(np.array(theta), 2))
        H = (e_t @ e_t.T) / rho
        H = H - (r2 / rho ** 2) * (e_t @ e_t.T)
        H = H + (r1 / rho ** 2) * (e_r @ e_t.T + e_t @ e_r.T)
        return H

    def bounding_radius(self):
        return self._radius

    def _boundary_in_direction(self, s):
        s = _unit(s)
        return float(self.radial(np.array(math.atan2(s[1], s[0])))) * s

    def gauss_inverse(self, u):
        # normal azimuth theta - arctan(r'/r) is strictly increasing in
        # theta for convex bodies, so plain Newton from theta = target
        # converges; a windowed bisection backs it up
        u = _unit(u)
        target = math.atan2(u[1], u[0])

        def gap(theta):
            r = float(self.radial(np.array(theta)))
            r1 = float(self.radial(np.array(theta), 1))
            g = theta - math.atan2(r1, r) - target
            return (g + math.pi) % (2.0 * math.pi) - math.pi

        def dgap(theta):
            r = float(self.radial(np.array(theta)))
            r1 = float(self.radial(np.array(theta), 1))
            r2 = float(self.radial(np.array(theta), 2))
            return 1.0 - (r2 * r - r1 * r1) / (r * r + r1 * r1)

        theta = target
        ok = False
        for _ in range(60):
            g = gap(theta)
            if abs(g) < 1e-14:
                ok = True
                break
            theta -= g / dgap(theta)
        if not ok and abs(gap(theta)) > 1e-12:
            lo, hi = target - math.pi / 2, target + math.pi / 2
            while gap(lo) > 0.0:
                lo -= 0.3
            while gap(hi) < 0.0:
                hi += 0.3
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if gap(mid) < 0.0:
                    lo = mid
                else:
                    hi = mid
            theta = 0.5 * (lo + hi)
        p = self.boundary_point(np.array(theta))
        res = np.linalg.norm(_unit(self.implicit_grad(p)) - u)
        if res > 1e-9:
            raise ConvergenceError("radial gauss_inverse failed", residual=res)
        return p


class SupportBody2D(ConvexBody):
    """Planar body given by a trigonometric-polynomial support function.

    h(theta) = cos_coeffs[0] + sum_k (cos_coeffs[k] cos k theta +
    sin_coeffs[k] sin k theta); requires h + h'' > 0 (positive curvature
    radius), which is checked on a fine grid at construction.
    """

    dim = 2

    def __init__(self, cos_coeffs, sin_coeffs=()):
        self.cc = np.asarray(cos_coeffs, dtype=float)
        sc = np.asarray(sin_coeffs, dtype=float)
        if len(sc) < len(self.cc):
            sc = np.concatenate([sc, np.zeros(len(self.cc) - len(sc))])
        self.sc = sc
        grid = np.linspace(0, 2 * math.pi, 720, endpoint=False)
        h = self.h(grid)
        rho = h + self.h(grid, 2)
        if np.min(h) <= 0.0:
            raise OriginNotInteriorError("support function must be positive")
        if np.min(rho) <= 0.0:
            raise ConvexityViolationError("support body has h + h'' <= 0")
        self._radius = float(np.max(h)) * 1.0001

    def h(self, theta, order=0):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta, dtype=float)
        for k in range(len(self.cc)):
            if k == 0:
                out = out + (self.cc[0] if order == 0 else 0.0)
                continue
            kk = float(k)
            phase = order * math.pi / 2.0
            out = out + self.cc[k] * kk ** order * np.cos(kk * theta + phase)
            out = out + self.sc[k] * kk ** order * np.sin(kk * theta + phase)
        return out

    def support(self, u):
        u = np.asarray(u, dtype=float)
        nu = np.linalg.norm(u)
        theta = math.atan2(u[1], u[0])
        return nu * float(self.h(np.array(theta)))

    def support_point(self, u):
        u = _unit(u)
        theta = math.atan2(u[1], u[0])
        h = float(self.h(np.array(theta)))
        h1 = float(self.h(np.array(theta), 1))
        return h * u + h1 * rot90(u)

    def gauss_inverse(self, u):
        return self.support_point(u)

    def _argmax_angle(self, x):
        theta0 = math.atan2(x[1], x[0])
        grid = theta0 + np.linspace(-math.pi, math.pi, 129)
        g = x[0] * np.cos(grid) + x[1] * np.sin(grid) - self.h(grid)
        theta = grid[int(np.argmax(g))]
        for _ in range(60):
            g1 = -x[0] * math.sin(theta) + x[1] * math.cos(theta) \
                - float(self.h(np.array(theta), 1))
            g2 = -x[0] * math.cos(theta) - x[1] * math.sin(theta) \
                - float(self.h(np.array(theta), 2))
            if g2 >= -1e-14:
                break
            step = g1 / g2
            theta -= step
            if abs(step) < 1e-14:
                break
        return theta

    def implicit(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            theta = self._argmax_angle(x)
            return (x[0] * math.cos(theta) + x[1] * math.sin(theta)
                    - float(self.h(np.array(theta))))
        return np.array([self.implicit(row) for row in x])

    def implicit_grad(self, x):
        theta = self._argmax_angle(np.asarray(x, dtype=float))
        return np.array([math.cos(theta), math.sin(theta)])

    def implicit_hess(self, x):
        theta = self._argmax_angle(np.asarray(x, dtype=float))
        u_t = np.array([-math.sin(theta), math.cos(theta)]).reshape(2, 1)
        rho = float(self.h(np.array(theta))) + float(self.h(np.array(theta), 2))
        return (u_t @ u_t.T) / rho

    def bounding_radius(self):
        return self._radius


class LinearImageBody(ConvexBody):
    """Image B(K) of a body K under an invertible linear map B."""

    def __init__(self, base: ConvexBody, B):
        self.base = base
        self.B = np.asarray(B, dtype=float)
        self.B_inv = np.linalg.inv(self.B)
        self.dim = base.dim
        self._radius = base.bounding_radius() * float(
            np.linalg.norm(self.B, ord=2))

    def implicit(self, x):
        x = np.asarray(x, dtype=float)
        return self.base.implicit(x @ self.B_inv.T)

    def implicit_grad(self, x):
        return self.B_inv.T @ self.base.implicit_grad(self.B_inv @ np.asarray(x, float))

    def implicit_hess(self, x):
        H = self.base.implicit_hess(self.B_inv @ np.asarray(x, float))
        return self.B_inv.T @ H @ self.B_inv

    def bounding_radius(self):
        return self._radius

    def gauss_inverse(self, u):
        u = _unit(u)
        p = self.base.gauss_inverse(_unit(self.B.T @ u))
        return self.B @ p

    def support(self, u):
        return self.base.support(self.B.T @ np.asarray(u, dtype=float))

    def support_point(self, u):
        return self.gauss_inverse(u)

    def volume(self, **kw):
        return abs(float(np.linalg.det(self.B))) * self.base.volume(**kw)


class PolarBody(ConvexBody):
    """Polar dual {x : h_K(x) <= 1} of a body K containing the origin."""

    def __init__(self, base: ConvexBody):
        if not base.contains(np.zeros(base.dim)):
            raise OriginNotInteriorError("polar dual needs the origin inside")
        self.base = base
        self.dim = base.dim
        # h_base >= inradius, so 1/inradius bounds the polar; pad generously
        self._radius = 1.5 / min(
            base.support(_unit(d)) for d in _compass_directions(self.dim))

    def implicit(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            n = np.linalg.norm(x)
            if n == 0.0:
                return -1.0
            return self.base.support(x) - 1.0
        return np.array([self.implicit(row) for row in x])

    def implicit_grad(self, x):
        # gradient of the support function is the touching point of the base
        return self.base.support_point(np.asarray(x, dtype=float))

    def implicit_hess(self, x):
        x = np.asarray(x, dtype=float)
        h = 1e-6 * max(1.0, float(np.linalg.norm(x)))
        n = self.dim
        H = np.zeros((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            H[:, i] = (self.implicit_grad(x + e) - self.implicit_grad(x - e)) / (2 * h)
        return 0.5 * (H + H.T)

    def gauss_inverse(self, u):
        # Legendre involutivity: the polar boundary point with exterior
        # normal u is n(p)/<n(p), p> for p the base boundary point on the
        # ray of u
        u = _unit(u)
        p = self.base._boundary_in_direction(u)
        n = _unit(self.base.implicit_grad(p))
        return n / float(np.dot(n, p))

    def bounding_radius(self):
        return self._radius * 1.001


class Polygon2D:
    """Convex polygon (vertices counterclockwise, origin inside).

    Admitted only for polar duality and volume computations; it is not a
    smooth ConvexBody and cannot be used in reflection operations.
    """

    dim = 2

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
            raise DomainError("polygon needs at least three planar vertices")
        if self._signed_area(V) < 0.0:
            V = V[::-1]
        self.vertices = V

    @staticmethod
    def _signed_area(V):
        x, y = V[:, 0], V[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        return 0.5 * float(np.sum(x * yn - xn * y))

    def volume(self):
        return abs(self._signed_area(self.vertices))

    def support(self, u):
        return float(np.max(self.vertices @ np.asarray(u, dtype=float)))

    def polar(self):
        """Polar dual polygon: each edge <a, x> = 1 maps to the vertex a."""
        V = self.vertices
        W = np.roll(V, -1, axis=0)
        duals = []
        for v, w in zip(V, W):
            M = np.stack([v, w])
            try:
                a = np.linalg.solve(M, np.ones(2))
            except np.linalg.LinAlgError as exc:
                raise OriginNotInteriorError(
                    "polygon edge line passes through the origin") from exc
            duals.append(a)
        return Polygon2D(np.asarray(duals))


# ---------------------------------------------------------------------------
# Hypersurface germs
# ---------------------------------------------------------------------------

class PlanarGerm:
    """Planar curve germ y = h(x) with polynomial Taylor data to order >= 5.

    Coefficients are of the monomial expansion h(x) = sum c[k] x^k with
    c[0] = c[1] = 0 and c[2] > 0 (tangent to the x-axis at the origin,
    curving upward).
    """

    def __init__(self, coeffs, radius=1.0):
        c = np.asarray(coeffs, dtype=float)
        if len(c) < 3:
            c = np.concatenate([c, np.zeros(3 - len(c))])
        if abs(c[0]) > 0 or abs(c[1]) > 0:
            raise DomainError("germ must vanish to first order at the origin")
        if c[2] <= 0.0:
            raise ConvexityViolationError("germ quadratic part must be positive")
        self.coeffs = c
        self.radius = float(radius)

    @property
    def order(self):
        return len(self.coeffs) - 1

    def h(self, x):
        return np.polyval(self.coeffs[::-1], np.asarray(x, dtype=float))

    def derivative(self, x, order=1):
        c = np.polyder(np.poly1d(self.coeffs[::-1]), order)
        return np.polyval(c, np.asarray(x, dtype=float))

    def jet(self, x, order=5):
        """[h, h', ..., h^(order)] at x."""
        return np.array([self.h(x) if k == 0 else self.derivative(x, k)
                         for k in range(order + 1)], dtype=float)

    def second_fundamental_form(self):
        """Curvature at the origin (the 1x1 second fundamental form)."""
        return np.array([[2.0 * self.coeffs[2]]])

    def rescaled(self, lam):
        """Unit-curvature-preserving chart zoom h(x) -> h(lam x)/lam^2."""
        k = np.arange(len(self.coeffs), dtype=float)
        return PlanarGerm(self.coeffs * lam ** (k - 2.0), self.radius / lam)


class GraphGerm:
    """Hypersurface germ x_n = h(x_1, ..., x_{n-1}) with Taylor data.

    ``terms`` maps exponent tuples of length n-1 to coefficients, total
    degree at most 5; the constant and linear parts must vanish and the
    quadratic part must be positive definite.
    """

    def __init__(self, nvars, terms, radius=1.0, require_convex=True):
        self.nvars = int(nvars)
        self.poly = MPoly(self.nvars, terms, max_degree=5)
        self.radius = float(radius)
        for alpha, c in self.poly.terms.items():
            if sum(alpha) <= 1 and c != 0.0:
                raise DomainError("germ must vanish to first order at the origin")
        Q = self.quadratic_form()
        if require_convex and np.min(np.linalg.eigvalsh(Q)) <= 0.0:
            raise ConvexityViolationError("germ quadratic part must be positive definite")

    @property
    def dim(self):
        return self.nvars + 1

    def quadratic_form(self):
        """Symmetric matrix Q with quadratic part = <Qx, x>."""
        n = self.nvars
        Q = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                alpha = [0] * n
                alpha[i] += 1
                alpha[j] += 1
                c = self.poly.coeff(tuple(alpha))
                Q[i, j] = c if i == j else 0.5 * c
        return Q

    def second_fundamental_form(self):
        """Second fundamental form at the origin (tangent frame = axes)."""
        return 2.0 * self.quadratic_form()

    def h(self, x):
        return self.poly.eval(np.asarray(x, dtype=float))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([self.poly.partial(i).eval(x) for i in range(self.nvars)])

    def coeff(self, alpha):
        return self.poly.coeff(alpha)

    def section_along_axis(self, i=0):
        """Planar germ of the intersection with the (x_i, x_n) plane."""
        return PlanarGerm(self.poly.restrict_to_axis(i), self.radius)

    def graph_normal(self, x):
        """Downward-oriented unit normal (grad h, -1)/norm at x."""
        g = self.gradient(x)
        v = np.concatenate([g, [-1.0]])
        return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# Duality operations
# ---------------------------------------------------------------------------

def legendre_point(body: ConvexBody, v):
    """Legendre image D(v) = n(v)/<n(v), v> of a boundary point.

    D(v) is orthogonal to the tangent plane at v and satisfies
    <D(v), v> = 1; under the Euclidean identification this is the Gauss
    map rescaled by a positive function.
    """
    v = np.asarray(v, dtype=float)
    n = body.exterior_normal(v)
    s = float(np.dot(n, v))
    if s <= 0.0:
        raise OriginNotInteriorError(
            "Legendre transform needs the origin strictly inside the body")
    return n / s


def polar_dual(body):
    """Polar dual body; closed-form for ellipsoids, superellipses and
    polygons, generic support-function wrapper otherwise."""
    if isinstance(body, Ellipsoid):
        return Ellipsoid(body.A_inv)
    if isinstance(body, Superellipse):
        q = body.m / (body.m - 1.0)
        # dual norm of a weighted m-norm is the weighted q-norm
        return Superellipse(exponent=q, semiaxes=1.0 / body.a)
    if isinstance(body, Polygon2D):
        return body.polar()
    if not body.contains(np.zeros(body.dim)):
        raise OriginNotInteriorError("polar dual needs the origin inside")
    return PolarBody(body)


def mirror_symmetric(body: ConvexBody, tol_points=32, tol=1e-9):
    """Check central symmetry by sampling support values in +-u pairs."""
    rng = np.random.default_rng(11)
    for _ in range(tol_points):
        u = _unit(rng.normal(size=body.dim))
        if abs(body.support(u) - body.support(-u)) > tol * body.bounding_radius():
            return False
    return True


# ---------------------------------------------------------------------------
# Module-level operation wrappers (flat spec-facing API)
# ---------------------------------------------------------------------------

def exterior_normal(body, p):
    return body.exterior_normal(p)


def gauss_inverse(body, u):
    return body.gauss_inverse(u)


def chord_second_intersection(body, a, d):
    return body.chord_second_intersection(a, d)


def second_fundamental_form(body, p):
    return body.second_fundamental_form(p)


def support_function(body, u):
    return body.support(u)


# ---------------------------------------------------------------------------
# Body definition files
# ---------------------------------------------------------------------------

class BodyFileError(ValueError):
    """Raised with a line number when a body definition cannot be parsed."""


def parse_body_text(text):
    """Parse the key/value body definition grammar (see README)."""
    data = {}
    germ_terms = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BodyFileError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("c[") and key.endswith("]"):
            inside = key[2:-1]
            try:
                alpha = tuple(int(tok) for tok in inside.split(","))
            except ValueError as exc:
                raise BodyFileError(f"line {lineno}: bad germ index '{key}'") from exc
            try:
                germ_terms[alpha] = float(value)
            except ValueError as exc:
                raise BodyFileError(f"line {lineno}: bad number '{value}'") from exc
        else:
            data[key] = (value, lineno)
    return data, germ_terms


def _get(data, key, conv, default=None, required=False):
    if key not in data:
        if required:
            raise BodyFileError(f"missing required key '{key}'")
        return default
    value, lineno = data[key]
    try:
        return conv(value)
    except ValueError as exc:
        raise BodyFileError(f"line {lineno}: bad value for '{key}'") from exc


def _floats(s):
    return np.array([float(tok) for tok in s.replace(",", " ").split()])


def body_from_text(text):
    """Build a body from definition text; raises BodyFileError on errors."""
    data, germ_terms = parse_body_text(text)
    kind = _get(data, "kind", str, required=True)
    if kind == "ellipsoid":
        dim = _get(data, "dim", int, required=True)
        A = _get(data, "matrix", _floats, required=True)
        if len(A) != dim * dim:
            raise BodyFileError("matrix length does not match dim^2")
        return Ellipsoid(A.reshape(dim, dim))
    if kind == "ball":
        dim = _get(data, "dim", int, default=2)
        r = _get(data, "radius", float, default=1.0)
        return Ball(r, dim)
    if kind == "superellipse":
        dim = _get(data, "dim", int, default=2)
        m = _get(data, "exponent", float, default=4.0)
        semi = _get(data, "semiaxes", _floats, default=np.ones(dim))
        return Superellipse(exponent=m, semiaxes=semi)
    if kind == "radial":
        cc = _get(data, "fourier_cos", _floats, required=True)
        sc = _get(data, "fourier_sin", _floats, default=np.zeros(1))
        return RadialBody2D(cc, sc)
    if kind == "support":
        cc = _get(data, "fourier_cos", _floats, required=True)
        sc = _get(data, "fourier_sin", _floats, default=np.zeros(1))
        return SupportBody2D(cc, sc)
    if kind == "polygon":
        v = _get(data, "vertices", _floats, required=True)
        if len(v) % 2:
            raise BodyFileError("vertices must be an even list of floats")
        return Polygon2D(v.reshape(-1, 2))
    if kind == "graph_germ":
        dim = _get(data, "dim", int, default=2)
        radius = _get(data, "radius_of_validity", float, default=1.0)
        if not germ_terms:
            raise BodyFileError("graph_germ needs c[...] coefficient entries")
        nvars = dim - 1
        if nvars == 1:
            order = max(a[0] for a in germ_terms)
            coeffs = np.zeros(max(order + 1, 6))
            for alpha, c in germ_terms.items():
                if len(alpha) != 1:
                    raise BodyFileError("planar germ uses single-index c[i] entries")
                coeffs[alpha[0]] = c
            return PlanarGerm(coeffs, radius)
        terms = {}
        for alpha, c in germ_terms.items():
            if len(alpha) != nvars:
                raise BodyFileError(
                    f"germ index arity {len(alpha)} does not match dim-1 = {nvars}")
            terms[alpha] = c
        return GraphGerm(nvars, terms, radius)
    raise BodyFileError(f"unknown body kind '{kind}'")


def load_body(path):
    with open(path, "r", encoding="utf-8") as fh:
        return body_from_text(fh.read())
