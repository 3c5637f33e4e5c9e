#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "impedance/types.hpp"

namespace impedance {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1], increasing
    std::vector<double> weights;
};

// Classical Gauss-Legendre rule, 1 <= n <= 64.
GaussRule gauss_legendre(int n);
// Same rule from a process-wide cache (rules are immutable once built).
const GaussRule& gauss_legendre_cached(int n);

// Dyadic Gauss-Legendre rule for the image segment [0, C].
struct ImageRule {
    double C = 1.0;
    int levels = 0;   // m, the number of dyadic halvings
    int order = 16;   // points per panel
    std::vector<double> eta_nodes;
    std::vector<double> raw_weights;
    std::vector<double> panel_edges;  // 0, 2^-m C, ..., C
    int count() const { return static_cast<int>(eta_nodes.size()); }
};

inline constexpr int kMaxImageLevels = 52;

// Number of dyadic halvings for a source at height y0: max(0, ceil(log2(C k / y0))), capped.
int image_levels(double C, double y0, double k_mag);
ImageRule build_image_rule(double C, double y0, double k_mag, int order = 16, double eps = 1e-14);
// Rule with an explicit level count (panel edges 0, 2^-m C, ..., C).
ImageRule image_rule_with_levels(double C, int levels, int order = 16);

// Trapezoidal rule on the tanh contour lambda(t) = t - i tanh t.
struct ContourRule {
    double t_max = 0.0;
    double dt = 0.05;
    std::vector<double> t_nodes;
    std::vector<cplx> lambda_nodes;
    std::vector<cplx> weights;   // (1 - i sech^2 t) dt, halved at the two ends
    int count() const { return static_cast<int>(lambda_nodes.size()); }
};

inline constexpr double kDefaultContourStep = 0.05;

cplx tanh_contour(double t);
cplx tanh_contour_derivative(double t);

// t_max starts at |k| + 20 and grows until |exp(-(s - i alpha) C)| <= eps at the end.
ContourRule build_contour_rule(cplx k, cplx alpha, double C, double eps = 1e-12,
                               double dt = kDefaultContourStep);
// Rule with an explicit truncation (snapped up to a multiple of dt).
ContourRule make_contour_rule(double t_max, double dt = kDefaultContourStep);

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, cplx best, double err)
        : std::runtime_error(what), best_estimate(best), error_estimate(err) {}
    cplx best_estimate;
    double error_estimate;
};

struct AdaptiveResult {
    cplx value;
    double error_estimate = 0.0;
    int panels = 0;
};

// Global adaptive bisection with 16-point panels and an embedded 8-point error
// estimate. Throws NonConvergence (with the best estimate) past depth 60 or
// 100000 panels.
AdaptiveResult adaptive_integrate_ex(const std::function<cplx(double)>& f, double a, double b,
                                     double tol);
cplx adaptive_integrate(const std::function<cplx(double)>& f, double a, double b, double tol);

}  // namespace impedance
