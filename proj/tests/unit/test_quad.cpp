#include <doctest.h>

#include <cmath>

#include "impedance/quad.hpp"
#include "impedance/specfun.hpp"

using namespace impedance;

TEST_CASE("five-point Gauss rule matches the closed form") {
    const GaussRule g = gauss_legendre(5);
    const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    CHECK(std::abs(g.nodes[0] + b) < 1e-15);
    CHECK(std::abs(g.nodes[1] + a) < 1e-15);
    CHECK(std::abs(g.nodes[2]) < 1e-15);
    CHECK(std::abs(g.weights[0] - wb) < 1e-15);
    CHECK(std::abs(g.weights[1] - wa) < 1e-15);
    CHECK(std::abs(g.weights[2] - 128.0 / 225.0) < 1e-15);
}

TEST_CASE("Gauss rules integrate polynomials of degree 2n-1 exactly") {
    for (int n : {1, 2, 7, 16, 33, 64}) {
        const GaussRule& g = gauss_legendre_cached(n);
        for (int d = 0; d <= 2 * n - 1; d += std::max(1, n / 4)) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], d);
            const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
            CHECK(std::abs(s - exact) < 1e-14);
        }
    }
    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
    CHECK_THROWS_AS(gauss_legendre(65), std::invalid_argument);
}

TEST_CASE("image rule level count follows ceil(log2(C k / y0))") {
    CHECK(image_levels(1.0, 5.0, 10.2) == 2);
    CHECK(image_levels(1.0, 1.0, 10.2) == 4);
    CHECK(image_levels(1.0, 1e-4, 10.2) == 17);
    CHECK(image_levels(1.0, 20.0, 10.2) == 0);
    const ImageRule r = build_image_rule(1.0, 1e-2, 10.2);
    CHECK(r.levels == 10);
    CHECK(r.count() == (r.levels + 1) * r.order);
    CHECK(r.panel_edges.front() == 0.0);
    CHECK(r.panel_edges.back() == 1.0);
    // Nearly singular log integral over [0, C] resolved by the dyadic panels.
    double s = 0.0;
    for (int i = 0; i < r.count(); ++i) s += r.raw_weights[i] * std::log(r.eta_nodes[i] + 1e-2);
    const double exact = 1.01 * std::log(1.01) - 1.0 - 1e-2 * std::log(1e-2);
    CHECK(std::abs(s - exact) < 1e-13);
}

TEST_CASE("tanh contour trapezoid reproduces a Sommerfeld integral of the free kernel") {
    // (1/2pi) int e^{-s Y} e^{i lambda x} / s dlambda = (i/2) H0(k r) with s = -i sqrt(k^2 - lambda^2).
    const double k = 3.0, x = 0.7, Y = 1.3;
    const ContourRule c = make_contour_rule(60.0);
    cplx sum = 0.0;
    for (int j = 0; j < c.count(); ++j) {
        const cplx lam = c.lambda_nodes[j];
        const cplx s = spectral_root_value(lam, k);
        sum += c.weights[j] * std::exp(-s * Y + kI * lam * x) / s;
    }
    sum /= 2.0 * kPi;
    const cplx exact = 0.5 * kI * hankel0(k * std::hypot(x, Y));
    CHECK(std::abs(sum - exact) < 1e-11);
}

TEST_CASE("contour length grows with the wavenumber") {
    const ContourRule a = build_contour_rule(10.2, 2.04, 1.0);
    const ContourRule b = build_contour_rule(31.7, 5.389, 1.0);
    CHECK(a.t_max >= 10.2 + 20.0);
    CHECK(b.t_max > a.t_max);
    CHECK(a.count() == 1209);
    CHECK(std::abs(tanh_contour(1.0) - cplx(1.0, -std::tanh(1.0))) < 1e-16);
}

TEST_CASE("adaptive integration handles a near-singular integrand and reports failure") {
    const auto f = [](double t) { return cplx(1.0 / (t * t + 1e-6), 0.0); };
    CHECK(std::abs(adaptive_integrate(f, -1.0, 1.0, 1e-12) - 2000.0 * std::atan(1000.0)) < 1e-8);
    const auto g = [](double t) { return cplx(1.0 / std::sqrt(std::abs(t)), 0.0); };
    CHECK_THROWS_AS(adaptive_integrate_ex(g, -1.0, 1.0, 1e-30), NonConvergence);
}
