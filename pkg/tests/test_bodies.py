"""Convex body representations: normals, Gauss maps, chords, duality."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import billiardlab as bl
from billiardlab.bodies import ConvexBody, body_from_text
from billiardlab.errors import (
    BoundaryMembershipError,
    ConvexityViolationError,
    DegenerateChordError,
    DomainError,
    OriginNotInteriorError,
)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# exterior_normal
# ---------------------------------------------------------------------------

def test_normal_circle_axis(disk):
    assert np.allclose(disk.exterior_normal([0.0, 1.0]), [0.0, 1.0])


def test_normal_ellipse_axis(ellipse):
    assert np.allclose(ellipse.exterior_normal([2.0, 0.0]), [1.0, 0.0])


def test_normal_ellipsoid_matches_finite_differences(ellipsoid3):
    # oracle: centered differences of the implicit function
    rng = np.random.default_rng(1)
    for _ in range(5):
        p = ellipsoid3.gauss_inverse(unit(rng.normal(size=3)))
        h = 1e-6
        grad_fd = np.array([
            (ellipsoid3.implicit(p + h * e) - ellipsoid3.implicit(p - h * e)) / (2 * h)
            for e in np.eye(3)
        ])
        assert np.allclose(ellipsoid3.exterior_normal(p), unit(grad_fd), atol=1e-8)


def test_normal_requires_boundary_point(disk):
    with pytest.raises(BoundaryMembershipError):
        disk.exterior_normal([0.3, 0.1])


# ---------------------------------------------------------------------------
# gauss_inverse
# ---------------------------------------------------------------------------

def test_gauss_inverse_circle_trivial(disk):
    assert np.allclose(disk.gauss_inverse([0.0, 1.0]), [0.0, 1.0])


def test_gauss_inverse_superellipse_axis(superellipse):
    assert np.allclose(superellipse.gauss_inverse([1.0, 0.0]), [1.0, 0.0])


def test_gauss_inverse_ellipsoid_formula(ellipsoid3):
    # derived solution p = A^-1 u / sqrt(<A^-1 u, u>)
    rng = np.random.default_rng(2)
    for _ in range(10):
        u = unit(rng.normal(size=3))
        p = ellipsoid3.gauss_inverse(u)
        w = np.linalg.solve(ellipsoid3.A, u)
        expect = w / math.sqrt(float(w @ u))
        assert np.allclose(p, expect, atol=1e-12)
        assert abs(ellipsoid3.implicit(p)) < 1e-12


def test_gauss_round_trip_all_families(disk, ellipse, ellipse_rot, superellipse,
                                        radial_blob, ellipsoid3):
    rng = np.random.default_rng(3)
    for body in (disk, ellipse, ellipse_rot, superellipse, radial_blob, ellipsoid3):
        n_samples = 1000 if body.dim == 2 else 300
        worst = 0.0
        for _ in range(n_samples):
            u = unit(rng.normal(size=body.dim))
            p = body.gauss_inverse(u)
            worst = max(worst, np.linalg.norm(body.exterior_normal(p) - u))
        assert worst <= 1e-9, type(body).__name__


class _BrokenHessianBody(bl.ConvexBody):
    # ellipse implicit with a zeroed-out Hessian: the Newton system is
    # singular, so every seed fails and the divergence path is taken
    dim = 2
    A = np.diag([0.25, 1.0])

    def implicit(self, x):
        x = np.asarray(x, dtype=float)
        return np.einsum("...i,ij,...j->...", x, self.A, x) - 1.0

    def implicit_grad(self, x):
        return 2.0 * self.A @ np.asarray(x, dtype=float)

    def implicit_hess(self, x):
        return np.zeros((2, 2))

    def bounding_radius(self):
        return 2.001


def test_gauss_inverse_divergence_reports_iterations_and_residual():
    from billiardlab.errors import ConvergenceError
    body = _BrokenHessianBody()
    with pytest.raises(ConvergenceError) as err:
        bl.ConvexBody.gauss_inverse(body, np.array([0.6, 0.8]))
    assert err.value.residual is None or err.value.residual >= 0.0


def test_generic_newton_gauss_inverse_agrees_with_closed_form(ellipse_rot):
    # exercise the damped-Newton fallback against the ellipsoid formula
    rng = np.random.default_rng(4)
    for _ in range(20):
        u = unit(rng.normal(size=2))
        p_generic = ConvexBody.gauss_inverse(ellipse_rot, u)
        p_exact = ellipse_rot.gauss_inverse(u)
        assert np.allclose(p_generic, p_exact, atol=1e-9)


def test_gauss_inverse_superellipse_with_semiaxes():
    body = bl.Superellipse(4.0, semiaxes=[1.5, 0.6])
    rng = np.random.default_rng(14)
    for _ in range(40):
        u = unit(rng.normal(size=2))
        p = body.gauss_inverse(u)
        assert abs(body.implicit(p)) <= 1e-12
        assert np.linalg.norm(body.exterior_normal(p) - u) <= 1e-10


def test_linear_image_body_with_shear(ellipse):
    B = np.array([[1.2, 0.3], [0.0, 0.8]])
    image = bl.LinearImageBody(ellipse, B)
    rng = np.random.default_rng(15)
    for _ in range(25):
        u = unit(rng.normal(size=2))
        p = image.gauss_inverse(u)
        assert abs(image.implicit(p)) <= 1e-10
        assert np.linalg.norm(image.exterior_normal(p) - u) <= 1e-9
    # support function transforms through the adjoint
    u = unit([0.4, -0.9])
    assert abs(image.support(u) - ellipse.support(B.T @ u)) <= 1e-12
    assert abs(image.volume() - abs(np.linalg.det(B)) * ellipse.volume()) <= 1e-12


# ---------------------------------------------------------------------------
# chord_second_intersection
# ---------------------------------------------------------------------------

def test_chord_circle_vertical(disk):
    for theta in (0.4, 1.2, 2.0):
        a = np.array([math.cos(theta), math.sin(theta)])
        b = disk.chord_second_intersection(a, [0.0, -1.0])
        assert np.allclose(b, [math.cos(theta), -math.sin(theta)], atol=1e-12)


def test_chord_ellipse_vertical_quadratic_root(ellipse):
    # oracle: x fixed, y solves x^2/4 + y^2 = 1
    for t in (0.3, 1.0, 2.2):
        a = np.array([2 * math.cos(t), math.sin(t)])
        b = ellipse.chord_second_intersection(a, [0.0, -math.copysign(1.0, math.sin(t))])
        assert np.allclose(b, [2 * math.cos(t), -math.sin(t)], atol=1e-12)


def test_chord_tangent_raises(disk):
    with pytest.raises(DegenerateChordError):
        disk.chord_second_intersection(np.array([1.0, 0.0]), [0.0, -1.0])


def test_chord_involution_property(ellipse_rot, superellipse, radial_blob):
    rng = np.random.default_rng(5)
    for body in (ellipse_rot, superellipse, radial_blob):
        for _ in range(40):
            u = unit(rng.normal(size=2))
            a = body.gauss_inverse(u)
            d = unit(rng.normal(size=2))
            if abs(np.dot(body.exterior_normal(a), d)) > 0.999:
                continue
            try:
                b = body.chord_second_intersection(a, d)
            except DegenerateChordError:
                continue
            back = body.chord_second_intersection(b, d)
            assert np.linalg.norm(back - a) <= 1e-10


def test_generic_march_chord_agrees_with_ellipsoid_closed_form(ellipse_rot):
    rng = np.random.default_rng(6)
    for _ in range(20):
        a = ellipse_rot.gauss_inverse(unit(rng.normal(size=2)))
        d = unit(rng.normal(size=2))
        if abs(np.dot(ellipse_rot.exterior_normal(a), d)) > 0.99:
            continue
        b_generic = ConvexBody.chord_second_intersection(ellipse_rot, a, d)
        b_exact = ellipse_rot.chord_second_intersection(a, d)
        assert np.allclose(b_generic, b_exact, atol=1e-9)


# ---------------------------------------------------------------------------
# polar duality and the Legendre transform
# ---------------------------------------------------------------------------

def test_polar_dual_ball_self_dual(disk):
    dual = bl.polar_dual(disk)
    assert np.allclose(dual.A, np.eye(2))


def test_polar_dual_ellipsoid_inverse_matrix(ellipsoid3):
    dual = bl.polar_dual(ellipsoid3)
    assert np.allclose(dual.A, np.linalg.inv(ellipsoid3.A))


def test_polar_dual_square_is_cross_polytope():
    square = bl.Polygon2D([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    dual = bl.polar_dual(square)
    verts = sorted(tuple(np.round(v, 12)) for v in dual.vertices)
    assert verts == [(-1.0, 0.0), (0.0, -1.0), (0.0, 1.0), (1.0, 0.0)]


def test_polar_involutive_on_closed_forms(ellipse_rot, superellipse):
    dd = bl.polar_dual(bl.polar_dual(ellipse_rot))
    assert np.allclose(dd.A, ellipse_rot.A, atol=1e-12)
    ss = bl.polar_dual(bl.polar_dual(superellipse))
    assert abs(ss.m - superellipse.m) < 1e-12
    assert np.allclose(ss.a, superellipse.a)


def test_legendre_circle_identity(disk):
    assert np.allclose(bl.legendre_point(disk, [0.0, 1.0]), [0.0, 1.0])


def test_legendre_ellipse_is_matrix_action(ellipse):
    rng = np.random.default_rng(7)
    for _ in range(10):
        v = ellipse.gauss_inverse(unit(rng.normal(size=2)))
        assert np.allclose(bl.legendre_point(ellipse, v), ellipse.A @ v, atol=1e-12)


def test_legendre_scaled_circle():
    r = 2.5
    circle = bl.Ball(r)
    assert np.allclose(bl.legendre_point(circle, [r, 0.0]), [1.0 / r, 0.0])


def test_legendre_involutive_through_dual(ellipse_rot, superellipse, radial_symmetric):
    rng = np.random.default_rng(8)
    for body in (ellipse_rot, superellipse, radial_symmetric):
        dual = bl.polar_dual(body)
        for _ in range(15):
            v = body.gauss_inverse(unit(rng.normal(size=2)))
            w = bl.legendre_point(body, v)
            assert abs(dual.implicit(w)) < 1e-9
            back = bl.legendre_point(dual, w)
            assert np.linalg.norm(back - v) <= 1e-9


class _ShiftedDisk(bl.ConvexBody):
    # unit disk centered at (2, 0); the origin is outside
    dim = 2
    center = np.array([2.0, 0.0])

    def implicit(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum((x - self.center) ** 2, axis=-1) - 1.0

    def implicit_grad(self, x):
        return 2.0 * (np.asarray(x, dtype=float) - self.center)

    def implicit_hess(self, x):
        return 2.0 * np.eye(2)

    def bounding_radius(self):
        return 3.1

    def interior_point(self):
        return self.center


def test_legendre_needs_origin_inside():
    shifted = _ShiftedDisk()
    p = np.array([1.0, 0.0])  # boundary point on the near side, normal (-1, 0)
    with pytest.raises(OriginNotInteriorError):
        bl.legendre_point(shifted, p)


def test_polar_dual_needs_origin_inside():
    with pytest.raises(OriginNotInteriorError):
        bl.polar_dual(_ShiftedDisk())


def test_support_body_round_trip():
    # support function 1 + small even harmonic: a smooth symmetric body
    body = bl.SupportBody2D([1.0, 0.0, 0.05])
    rng = np.random.default_rng(60)
    for _ in range(25):
        u = unit(rng.normal(size=2))
        p = body.gauss_inverse(u)
        assert abs(body.implicit(p)) <= 1e-10
        assert np.linalg.norm(body.exterior_normal(p) - u) <= 1e-8
        assert abs(body.support(u) - np.dot(p, u)) <= 1e-10


# ---------------------------------------------------------------------------
# second fundamental form
# ---------------------------------------------------------------------------

def test_second_fundamental_form_sphere_identity(ball3):
    rng = np.random.default_rng(9)
    p = ball3.gauss_inverse(unit(rng.normal(size=3)))
    II = ball3.second_fundamental_form(p)
    assert np.allclose(II, np.eye(2), atol=1e-10)


def test_second_fundamental_form_paraboloid_germ_identity():
    germ = bl.GraphGerm(2, {(2, 0): 0.5, (0, 2): 0.5})
    assert np.allclose(germ.second_fundamental_form(), np.eye(2))


def test_second_fundamental_form_ellipse_curvature_oracle(ellipse):
    # finite-difference curvature oracle: fit the local graph u = kappa y^2 / 2
    def fd_curvature(x_of_y, h):
        return (x_of_y(0.0) - 2 * x_of_y(h) + x_of_y(2 * h)) / h ** 2 * (-1.0)

    # at (2,0): x = 2 sqrt(1 - y^2), curvature = 2
    kappa_20 = 2 * (2 - 2 * math.sqrt(1 - 1e-4)) / 1e-4
    II_20 = ellipse.second_fundamental_form(np.array([2.0, 0.0]))
    assert abs(II_20[0, 0] - kappa_20) < 1e-3
    assert abs(II_20[0, 0] - 2.0) < 1e-10
    # at (0,1): y = sqrt(1 - x^2/4), curvature = 1/4
    kappa_01 = 2 * (1 - math.sqrt(1 - 1e-4 / 4)) / 1e-4
    II_01 = ellipse.second_fundamental_form(np.array([0.0, 1.0]))
    assert abs(II_01[0, 0] - kappa_01) < 1e-3
    assert abs(II_01[0, 0] - 0.25) < 1e-10


def test_nonconvex_radial_profile_rejected():
    with pytest.raises(ConvexityViolationError):
        bl.RadialBody2D([1.0, 0.0, 0.6])


def test_implicit_hessians_match_finite_differences(radial_blob):
    # the generic Newton paths rely on exact Hessians
    support = bl.SupportBody2D([1.0, 0.0, 0.05])
    rng = np.random.default_rng(16)
    h = 1e-6
    for body in (radial_blob, support):
        for _ in range(5):
            p = body.gauss_inverse(unit(rng.normal(size=2)))
            x = p * 0.9 if isinstance(body, bl.RadialBody2D) else p
            H = body.implicit_hess(x)
            for i, e in enumerate(np.eye(2)):
                fd = (body.implicit_grad(x + h * e)
                      - body.implicit_grad(x - h * e)) / (2 * h)
                assert np.allclose(H[:, i], fd, atol=5e-5), type(body).__name__


def test_polygon_accepts_clockwise_vertices():
    cw = bl.Polygon2D([[1, 1], [1, -1], [-1, -1], [-1, 1]])
    ccw = bl.Polygon2D([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    assert abs(cw.volume() - 4.0) < 1e-12
    assert abs(cw.polar().volume() - ccw.polar().volume()) < 1e-12


# ---------------------------------------------------------------------------
# germs: jets against finite differences
# ---------------------------------------------------------------------------

def test_graph_germ_jets_match_finite_differences():
    germ = bl.GraphGerm(2, {(2, 0): 1.0, (1, 1): 0.4, (0, 2): 0.7,
                            (2, 1): 0.3, (3, 0): 0.0, (5, 0): 0.01})
    rng = np.random.default_rng(10)
    h = 1e-5
    for _ in range(5):
        x = rng.uniform(-0.2, 0.2, size=2)
        for i, e in enumerate(np.eye(2)):
            fd = (germ.h(x + h * e) - germ.h(x - h * e)) / (2 * h)
            grad = germ.gradient(x)[i]
            assert abs(fd - grad) <= 1e-6 * max(1.0, abs(grad))


def test_planar_germ_jets_match_finite_differences():
    germ = bl.PlanarGerm([0, 0, 0.5, 0.1, -0.05, 0.01])
    h = 0.05
    x = 0.1
    # 5th derivative via 7-point stencil is exact for quintic polynomials
    nodes = np.arange(-3, 4) * h
    from billiardlab.jets import stencil_weights
    w = stencil_weights(nodes, 5)
    fd5 = sum(wk * germ.h(x + xk) for wk, xk in zip(w, nodes))
    assert abs(fd5 - germ.derivative(x, 5)) <= 1e-6 * max(1.0, abs(fd5))


def test_planar_germ_requires_tangency():
    with pytest.raises(DomainError):
        bl.PlanarGerm([0.1, 0, 0.5])
    with pytest.raises(ConvexityViolationError):
        bl.PlanarGerm([0, 0, -0.5])


# ---------------------------------------------------------------------------
# oriented lines, volumes, body files
# ---------------------------------------------------------------------------

def test_oriented_line_normalizes_direction():
    line = bl.OrientedLine([0.0, 0.0], [3.0, 4.0])
    assert np.allclose(line.direction, [0.6, 0.8])
    assert np.allclose(line.at(5.0), [3.0, 4.0])


def test_last_intersection_is_exit_point(ellipse):
    line = bl.OrientedLine([0.0, 0.0], [1.0, 0.0])
    q = ellipse.last_intersection(line)
    assert np.allclose(q, [2.0, 0.0], atol=1e-10)
    n = ellipse.exterior_normal(q)
    assert np.dot(line.direction, n) > 0


def test_generic_volume_quadrature_matches_exact(ellipse):
    generic = ConvexBody.volume(ellipse)
    assert abs(generic - ellipse.volume()) < 1e-8 * ellipse.volume()


def test_superellipse_volume_formula(superellipse):
    # Dirichlet: vol = 4 Gamma(1 + 1/4)^2 / Gamma(1 + 2/4)
    expect = 4 * math.gamma(1.25) ** 2 / math.gamma(1.5)
    assert abs(superellipse.volume() - expect) < 1e-12
    # generic quadrature only needs the volume-product tolerance; the
    # Gauss chart degenerates at the four flat axis points
    generic = ConvexBody.volume(superellipse)
    assert abs(generic - expect) < 1e-3 * expect


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
@settings(max_examples=25, deadline=None)
def test_ellipsoid_membership_consistency(x, y):
    E = bl.Ellipsoid(np.diag([0.25, 1.0]))
    inside = x * x / 4 + y * y < 1
    assert E.contains(np.array([x, y])) == inside


def test_body_file_round_trips(tmp_path):
    text = """
    kind = ellipsoid
    dim = 2
    matrix = 0.25 0 0 1
    """
    body = body_from_text(text)
    assert isinstance(body, bl.Ellipsoid)
    assert np.allclose(body.A, np.diag([0.25, 1.0]))

    germ = body_from_text("""
    kind = graph_germ
    dim = 3
    radius_of_validity = 0.8
    c[2,0] = 1.0
    c[1,1] = 0.4
    c[0,2] = 0.7
    c[2,1] = 0.3
    """)
    assert isinstance(germ, bl.GraphGerm)
    assert germ.coeff((2, 1)) == 0.3

    planar = body_from_text("""
    kind = graph_germ
    dim = 2
    c[2] = 0.5
    c[5] = 0.01
    """)
    assert isinstance(planar, bl.PlanarGerm)
    assert planar.coeffs[5] == 0.01

    poly = body_from_text("kind = polygon\nvertices = 1 1 -1 1 -1 -1 1 -1")
    assert isinstance(poly, bl.Polygon2D)

    radial = body_from_text("kind = radial\nfourier_cos = 1.0 0 0.1")
    assert isinstance(radial, bl.RadialBody2D)


def test_body_file_errors_carry_line_numbers():
    from billiardlab.bodies import BodyFileError
    with pytest.raises(BodyFileError, match="line 2"):
        body_from_text("kind = ellipsoid\ndim = nope\nmatrix = 1 0 0 1")
    with pytest.raises(BodyFileError, match="experiment|kind"):
        body_from_text("dim = 2")
