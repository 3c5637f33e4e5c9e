#include <doctest.h>

#include <cmath>
#include <vector>

#include "impedance/bie.hpp"
#include "impedance/specfun.hpp"

using namespace impedance;

namespace {

std::vector<cplx> fourier_mode(const DiscreteBoundary& b, int m) {
    std::vector<cplx> s(b.n);
    for (int j = 0; j < b.n; ++j) s[j] = std::exp(kI * double(m) * b.t[j]);
    return s;
}

double max_dev(const std::vector<cplx>& a, const std::vector<cplx>& s, cplx eig) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - eig * s[j]));
    return d;
}

}  // namespace

TEST_CASE("built-in curves: velocity is the derivative of position") {
    for (const std::string& name : builtin_curve_names()) {
        CAPTURE(name);
        const ParametricCurve c = builtin_curve(name);
        for (double u = 0.1; u < 1.0; u += 0.2) {
            const double t = c.t0 + u * (c.t1 - c.t0), h = 1e-6;
            const Vec2 fd = (1.0 / (2 * h)) * (c.position(t + h) - c.position(t - h));
            const Vec2 v = c.velocity(t);
            CHECK(norm(fd - v) < 1e-7 * std::max(1.0, norm(v)));
        }
    }
    CHECK_THROWS_AS(builtin_curve("teapot"), std::invalid_argument);
}

TEST_CASE("curve geometry: flower clearance and flat ends of the interface") {
    const DiscreteBoundary f = discretize(builtin_curve("flower"), 400);
    double ymin = 1e9;
    for (const Vec2& p : f.points) ymin = std::min(ymin, p.y);
    CHECK(ymin == doctest::Approx(0.8).epsilon(1e-9));
    const DiscreteBoundary fn = discretize(builtin_curve("flower_near"), 400);
    ymin = 1e9;
    for (const Vec2& p : fn.points) ymin = std::min(ymin, p.y);
    CHECK(ymin == doctest::Approx(1e-3).epsilon(1e-6));
    for (const char* name : {"perturb1", "perturb2"}) {
        const ParametricCurve c = builtin_curve(name);
        CHECK(c.kind == CurveKind::open);
        CHECK(c.t0 == -4.0);
        CHECK(c.t1 == 4.0);
        // The bump vanishes to roundoff at the truncation points.
        const double base = c.position(0.0).y - (c.position(0.0).y - c.position(4.0).y);
        CHECK(std::abs(c.position(-4.0).y - base) < 1e-12);
        CHECK(std::abs(c.velocity(4.0).y) < 1e-11);
    }
}

TEST_CASE("discretisation: weights, normals, spacing and size guards") {
    const DiscreteBoundary c = discretize(circle_curve({0.0, 3.0}, 1.0), 64);
    CHECK(c.length() == doctest::Approx(2 * kPi).epsilon(1e-14));
    CHECK(c.omega_side() == -1);
    for (int j = 0; j < c.n; ++j) {
        const Vec2 radial = c.points[j] - Vec2{0.0, 3.0};
        CHECK(dot(radial, c.normals[j]) == doctest::Approx(1.0));
    }
    const DiscreteBoundary o = discretize(builtin_curve("perturb1"), 801);
    CHECK(o.omega_side() == 1);
    CHECK(o.dt == doctest::Approx(0.01));
    CHECK(o.weights.front() == doctest::Approx(0.5 * o.speed.front() * o.dt));
    CHECK(o.normals[400].y < 0.0);
    CHECK_THROWS_AS(discretize(circle_curve({0, 3}, 1), 16), std::invalid_argument);
    CHECK_THROWS_AS(discretize(builtin_curve("perturb1"), 32), std::invalid_argument);
}

TEST_CASE("closest point and density interpolation") {
    const DiscreteBoundary c = discretize(circle_curve({0.0, 3.0}, 1.0), 128);
    const ClosestPoint p = closest_parameter(c, {2.0, 3.0}, false);
    CHECK(p.distance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(std::remainder(p.t, 2 * kPi)) < 1e-6);
    const ClosestPoint q = closest_parameter(c, {0.0, 0.5}, true);   // mirror circle centred at (0, -3)
    CHECK(q.distance == doctest::Approx(2.5).epsilon(1e-12));
    const std::vector<cplx> s = fourier_mode(c, 3);
    for (double t : {0.01, 1.234, 5.9}) CHECK(std::abs(interpolate_density(c, s, t) - std::exp(3.0 * kI * t)) < 1e-12);
}

TEST_CASE("circle spectrum of S and D with the free kernel") {
    const DiscreteBoundary b = discretize(circle_curve({0.0, 3.0}, 1.0), 400);
    const cplx k = 1.0;
    const KernelSpec ks = free_space_kernel(k);
    std::vector<cplx> H, J;
    hankel_seq(k, 6, H);
    besselj_seq(k, 6, J);
    for (int m : {0, 3}) {
        CAPTURE(m);
        const std::vector<cplx> s = fourier_mode(b, m);
        const cplx dH = m == 0 ? -H[1] : 0.5 * (H[m - 1] - H[m + 1]);
        const cplx dJ = m == 0 ? -J[1] : 0.5 * (J[m - 1] - J[m + 1]);
        const cplx eS = 0.5 * kI * kPi * J[m] * H[m];
        // The interior limit of D carries J_m H_m'; the exterior one J_m' H_m.
        const cplx eDin = 0.5 * kI * kPi * k * dH * J[m];
        const cplx eDout = 0.5 * kI * kPi * k * dJ * H[m];
        CHECK(max_dev(apply_layer_on_surface(b, s, LayerKind::single, ks, Limit::omega_side), s, eS) < 1e-12);
        CHECK(max_dev(apply_layer_on_surface(b, s, LayerKind::double_layer, ks, Limit::omega_side), s, eDin) < 1e-12);
        CHECK(max_dev(apply_layer_on_surface(b, s, LayerKind::double_layer, ks, Limit::physical_side), s, eDout) < 1e-12);
        CHECK(max_dev(apply_layer_on_surface(b, s, LayerKind::double_layer, ks, Limit::principal_value), s,
                      0.5 * (eDin + eDout)) < 1e-12);
        // S' from outside is the adjoint of D from inside on the circle.
        CHECK(max_dev(apply_layer_on_surface(b, s, LayerKind::normal_single, ks, Limit::physical_side), s, eDin) < 1e-12);
    }
}

TEST_CASE("Green's representation on and off a flower-shaped boundary") {
    // u = g_k(., xs) with xs outside: S[du/dn] - D[u] reproduces u inside and vanishes outside.
    const DiscreteBoundary b = discretize(builtin_curve("flower"), 400);
    const cplx k = 4.0;
    const KernelSpec ks = free_space_kernel(k);
    const Vec2 xs{-2.0, 4.0};
    std::vector<cplx> u(b.n), du(b.n);
    for (int j = 0; j < b.n; ++j) {
        u[j] = gk_free(b.points[j], xs, k);
        const Grad2 g = gk_free_grad(b.points[j], xs, k);
        du[j] = g.dx * b.normals[j].x + g.dy * b.normals[j].y;
    }
    const std::vector<Vec2> pts{{1.1, 2.0}, {1.3, 1.1}, {3.0, 2.5}, {1.1, 0.7}};
    const std::vector<cplx> S = layer_potential(b, du, LayerKind::single, ks, pts);
    const std::vector<cplx> D = layer_potential(b, u, LayerKind::double_layer, ks, pts);
    CHECK(std::abs(S[0] - D[0] - gk_free(pts[0], xs, k)) < 1e-11);
    CHECK(std::abs(S[1] - D[1] - gk_free(pts[1], xs, k)) < 1e-11);   // 0.1 from the curve
    CHECK(std::abs(S[2] - D[2]) < 1e-11);
    CHECK(std::abs(S[3] - D[3]) < 1e-11);
    const std::vector<cplx> Ss = apply_layer_on_surface(b, du, LayerKind::single, ks, Limit::omega_side);
    const std::vector<cplx> Ds = apply_layer_on_surface(b, u, LayerKind::double_layer, ks, Limit::omega_side);
    double worst = 0.0;
    for (int j = 0; j < b.n; ++j) worst = std::max(worst, std::abs(Ss[j] - Ds[j] - u[j]));
    CHECK(worst < 1e-11);
}

TEST_CASE("GMRES solves a small nonsymmetric system and reports non-convergence") {
    const int n = 30;
    const auto op = [n](const std::vector<cplx>& x, std::vector<cplx>& y) {
        y.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            y[i] = (2.0 + 0.1 * i) * x[i] + (i + 1 < n ? cplx(0.0, 0.5) * x[i + 1] : 0.0);
        }
    };
    std::vector<cplx> xs(n), rhs;
    for (int i = 0; i < n; ++i) xs[i] = {std::cos(i), std::sin(0.3 * i)};
    op(xs, rhs);
    const GmresResult r = gmres(op, rhs, 1e-13, 100);
    CHECK(r.converged);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(r.x[i] - xs[i]));
    CHECK(err < 1e-11);
    const GmresResult s = gmres(op, rhs, 1e-13, 3);
    CHECK_FALSE(s.converged);
    CHECK(s.iterations == 3);
}

TEST_CASE("problem validation") {
    const Medium m;
    CHECK_THROWS_AS(make_problem(ProblemKind::perturbed, "flower", 200, m, {-2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(ProblemKind::dirichlet, "perturb1", 200, m, {3, 3}), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(ProblemKind::dirichlet, "flower", 200, m, {1.1, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(ProblemKind::dirichlet, "flower", 200, m, {1.0, -1.0}), std::invalid_argument);
    ScatterProblem p = make_problem(ProblemKind::dirichlet, "flower", 200, m, {-2, 2});
    p.interior_source = Vec2{5.0, 5.0};
    CHECK_THROWS_AS(validate_problem(p), std::invalid_argument);
    CHECK(parse_problem_kind("neumann") == ProblemKind::neumann);
    CHECK_THROWS_AS(parse_problem_kind("robin"), std::invalid_argument);
}

TEST_CASE("flower scattering with a known exterior field") {
    const Medium m;
    for (ProblemKind kind : {ProblemKind::dirichlet, ProblemKind::neumann}) {
        CAPTURE(to_string(kind));
        ScatterProblem p = make_problem(kind, "flower", 300, m, {-2, 2});
        p.interior_source = Vec2{1.1, 2.0};
        const SolveResult r = solve(p);
        CHECK(r.converged);
        const std::vector<FieldSample> f = eval_field(p, r, {{0, 5}, {3, 0.5}, {-1, 0}});
        for (const FieldSample& s : f) CHECK(std::abs(s.total) < 1e-9 * std::abs(s.incident));
    }
}

TEST_CASE("perturbed interface with a known field below the curve source") {
    Medium m;
    m.k = 5.7;
    m.alpha = 0.855;
    ScatterProblem p = make_problem(ProblemKind::perturbed, "perturb1", 1000, m, {3, 3});
    p.interior_source = Vec2{0.0, 0.5};
    const SolveResult r = solve(p);
    CHECK(r.converged);
    const FieldSample s = eval_field(p, r, {{-2, 4}}).front();
    CHECK(std::abs(s.total) < 1e-7 * std::abs(s.incident));
}
