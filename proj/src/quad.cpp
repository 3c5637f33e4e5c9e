#include "impedance/quad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <queue>
#include <string>

#include "impedance/specfun.hpp"

namespace impedance {

GaussRule gauss_legendre(int n) {
    if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: n must lie in 1..64");
    GaussRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-like initial guess for the i-th largest root.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            const double pn = (n == 1) ? x : p1;
            dp = n * (x * pn - p0) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged root for the weight.
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) { p0 = 1.0; p1 = x; }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

const GaussRule& gauss_legendre_cached(int n) {
    static std::array<std::unique_ptr<GaussRule>, 65> cache;
    static std::mutex guard;
    if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: n must lie in 1..64");
    std::lock_guard<std::mutex> lock(guard);
    if (!cache[n]) cache[n] = std::make_unique<GaussRule>(gauss_legendre(n));
    return *cache[n];
}

int image_levels(double C, double y0, double k_mag) {
    if (!(C > 0.0) || !(y0 > 0.0) || !(k_mag > 0.0))
        throw std::invalid_argument("build_image_rule: C, y0 and |k| must be positive");
    const double ratio = C * k_mag / y0;
    if (ratio <= 1.0) return 0;
    int m = static_cast<int>(std::ceil(std::log2(ratio)));
    // log2 of an exact power of two may land a hair above the integer.
    if (m > 0 && std::ldexp(1.0, m - 1) >= ratio) --m;
    return std::clamp(m, 0, kMaxImageLevels);
}

ImageRule image_rule_with_levels(double C, int levels, int order) {
    if (!(C > 0.0)) throw std::invalid_argument("image rule: C must be positive");
    levels = std::clamp(levels, 0, kMaxImageLevels);
    const GaussRule& gl = gauss_legendre_cached(order);
    ImageRule rule;
    rule.C = C;
    rule.levels = levels;
    rule.order = order;
    rule.panel_edges.push_back(0.0);
    for (int j = levels; j >= 0; --j) rule.panel_edges.push_back(std::ldexp(C, -j));
    rule.eta_nodes.reserve(order * (levels + 1));
    rule.raw_weights.reserve(order * (levels + 1));
    for (std::size_t p = 0; p + 1 < rule.panel_edges.size(); ++p) {
        const double a = rule.panel_edges[p], b = rule.panel_edges[p + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int q = 0; q < order; ++q) {
            rule.eta_nodes.push_back(mid + half * gl.nodes[q]);
            rule.raw_weights.push_back(half * gl.weights[q]);
        }
    }
    return rule;
}

ImageRule build_image_rule(double C, double y0, double k_mag, int order, double /*eps*/) {
    return image_rule_with_levels(C, image_levels(C, y0, k_mag), order);
}

cplx tanh_contour(double t) { return {t, -std::tanh(t)}; }

cplx tanh_contour_derivative(double t) {
    const double sech = 1.0 / std::cosh(t);
    return {1.0, -sech * sech};
}

ContourRule build_contour_rule(cplx k, cplx alpha, double C, double eps, double dt) {
    if (!(std::abs(k) > 0.0)) throw std::invalid_argument("build_contour_rule: k must be nonzero");
    if (!(C > 0.0)) throw std::invalid_argument("build_contour_rule: C must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("build_contour_rule: dt must be positive");
    double t_max = std::abs(k) + 20.0;
    for (int guard = 0; guard < 10000; ++guard) {
        const cplx lam = tanh_contour(t_max);
        const cplx s = spectral_root_value(lam, k);
        if (std::abs(std::exp(-(s - kI * alpha) * C)) <= eps) break;
        t_max += 1.0;
    }
    return make_contour_rule(t_max, dt);
}

ContourRule make_contour_rule(double t_max, double dt) {
    if (!(dt > 0.0) || !(t_max > 0.0)) throw std::invalid_argument("contour rule: t_max and dt must be positive");
    // Snap t_max onto the grid so the end nodes sit exactly at +-t_max.
    const double steps = t_max / dt;
    long n_half = std::lround(steps);
    if (std::abs(steps - static_cast<double>(n_half)) > 1e-9) n_half = static_cast<long>(std::ceil(steps));
    ContourRule rule;
    rule.dt = dt;
    rule.t_max = n_half * dt;
    const long count = 2 * n_half + 1;
    rule.t_nodes.resize(count);
    rule.lambda_nodes.resize(count);
    rule.weights.resize(count);
    for (long j = 0; j < count; ++j) {
        const double t = (j - n_half) * dt;
        rule.t_nodes[j] = t;
        rule.lambda_nodes[j] = tanh_contour(t);
        rule.weights[j] = tanh_contour_derivative(t) * dt;
    }
    rule.weights.front() *= 0.5;
    rule.weights.back() *= 0.5;
    return rule;
}

namespace {

struct Panel {
    double a, b;
    cplx value;
    double err;
    int depth;
    bool operator<(const Panel& o) const { return err < o.err; }
};

Panel eval_panel(const std::function<cplx(double)>& f, double a, double b, int depth) {
    const GaussRule& g16 = gauss_legendre_cached(16);
    const GaussRule& g8 = gauss_legendre_cached(8);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    cplx s16 = 0.0, s8 = 0.0;
    for (int q = 0; q < 16; ++q) s16 += g16.weights[q] * f(mid + half * g16.nodes[q]);
    for (int q = 0; q < 8; ++q) s8 += g8.weights[q] * f(mid + half * g8.nodes[q]);
    s16 *= half;
    s8 *= half;
    return {a, b, s16, std::abs(s16 - s8), depth};
}

}  // namespace

AdaptiveResult adaptive_integrate_ex(const std::function<cplx(double)>& f, double a, double b,
                                     double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("adaptive_integrate: tol must be positive");
    std::priority_queue<Panel> heap;
    heap.push(eval_panel(f, a, b, 0));
    cplx total = heap.top().value;
    double total_err = heap.top().err;
    bool depth_hit = false;
    std::vector<Panel> done;  // panels that cannot be split further
    constexpr std::size_t kMaxPanels = 100000;
    bool budget_hit = false;
    while (total_err > tol && !heap.empty()) {
        if (heap.size() + done.size() >= kMaxPanels) {
            budget_hit = true;
            break;
        }
        Panel p = heap.top();
        heap.pop();
        if (p.depth >= 60) {
            depth_hit = true;
            done.push_back(p);
            continue;
        }
        const double m = 0.5 * (p.a + p.b);
        Panel l = eval_panel(f, p.a, m, p.depth + 1);
        Panel r = eval_panel(f, m, p.b, p.depth + 1);
        total += l.value + r.value - p.value;
        total_err += l.err + r.err - p.err;
        heap.push(l);
        heap.push(r);
        // Rebuild the sum now and then to keep drift from the running update out.
        if (heap.size() % 512 == 0) {
            auto copy = heap;
            total = 0.0;
            total_err = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                total_err += copy.top().err;
                copy.pop();
            }
            for (const Panel& d : done) {
                total += d.value;
                total_err += d.err;
            }
        }
    }
    AdaptiveResult res{total, total_err, static_cast<int>(heap.size() + done.size())};
    if ((depth_hit || budget_hit) && total_err > tol)
        throw NonConvergence(budget_hit ? "adaptive_integrate: panel budget exhausted"
                                        : "adaptive_integrate: subdivision depth 60 exceeded",
                             total, total_err);
    return res;
}

cplx adaptive_integrate(const std::function<cplx(double)>& f, double a, double b, double tol) {
    return adaptive_integrate_ex(f, a, b, tol).value;
}

}  // namespace impedance
