#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "impedance/bie.hpp"

namespace impedance {

namespace {

ParametricCurve graph_curve(const std::string& name, double base, double amp,
                            const std::vector<double>& sin_freq, const std::vector<double>& cos_freq,
                            const std::vector<double>& cos_scale) {
    // y(t) = (base + amp * (sum sin(f t) + sum s_i cos(g_i t))) e^{-2 t^2}, x(t) = t
    ParametricCurve c;
    c.name = name;
    c.kind = CurveKind::open;
    c.t0 = -4.0;
    c.t1 = 4.0;
    auto amplitude = [=](double t, double& a, double& da) {
        double s = 0.0, ds = 0.0;
        for (double f : sin_freq) {
            s += std::sin(f * t);
            ds += f * std::cos(f * t);
        }
        for (std::size_t i = 0; i < cos_freq.size(); ++i) {
            const double g = cos_freq[i];
            s += cos_scale[i] * std::cos(g * t);
            ds -= cos_scale[i] * g * std::sin(g * t);
        }
        a = base + amp * s;
        da = amp * ds;
    };
    c.position = [amplitude](double t) {
        double a, da;
        amplitude(t, a, da);
        return Vec2{t, a * std::exp(-2.0 * t * t)};
    };
    c.velocity = [amplitude](double t) {
        double a, da;
        amplitude(t, a, da);
        return Vec2{1.0, (da - 4.0 * t * a) * std::exp(-2.0 * t * t)};
    };
    return c;
}

}  // namespace

ParametricCurve flower_curve(double delta) {
    ParametricCurve c;
    c.name = "flower";
    c.kind = CurveKind::closed;
    c.t0 = 0.0;
    c.t1 = 2.0 * kPi;
    c.position = [delta](double t) {
        const double R = 1.0 + 0.2 * std::cos(4.0 * t);
        return Vec2{1.1 + R * std::cos(t), 1.2 + delta + R * std::sin(t)};
    };
    c.velocity = [](double t) {
        const double R = 1.0 + 0.2 * std::cos(4.0 * t);
        const double dR = -0.8 * std::sin(4.0 * t);
        return Vec2{dR * std::cos(t) - R * std::sin(t), dR * std::sin(t) + R * std::cos(t)};
    };
    return c;
}

ParametricCurve circle_curve(Vec2 center, double radius) {
    ParametricCurve c;
    c.name = "circle";
    c.kind = CurveKind::closed;
    c.t0 = 0.0;
    c.t1 = 2.0 * kPi;
    c.position = [=](double t) {
        return Vec2{center.x + radius * std::cos(t), center.y + radius * std::sin(t)};
    };
    c.velocity = [=](double t) { return Vec2{-radius * std::sin(t), radius * std::cos(t)}; };
    return c;
}

std::vector<std::string> builtin_curve_names() {
    return {"flower", "flower_near", "perturb1", "perturb2"};
}

ParametricCurve builtin_curve(const std::string& name) {
    if (name == "flower") return flower_curve(0.8);
    if (name == "flower_near") {
        ParametricCurve c = flower_curve(1e-3);
        c.name = "flower_near";
        return c;
    }
    if (name == "perturb1")
        return graph_curve(name, 1.0, 0.05, {8.79, 1.88}, {16.96}, {1.0});
    if (name == "perturb2")
        return graph_curve(name, 1.75, 1.0 / 6.0, {8.79, 27.02}, {16.96, 32.67},
                           {1.0, 1.0 / 7.0});
    throw std::invalid_argument("unknown curve '" + name + "'");
}

Vec2 curve_normal(Vec2 v) {
    const double s = norm(v);
    return {v.y / s, -v.x / s};
}

double curve_curvature(const ParametricCurve& c, double t) {
    const double e = 1e-5 * std::max(1.0, std::abs(t));
    const Vec2 v = c.velocity(t);
    const Vec2 a = (0.5 / e) * (c.velocity(t + e) - c.velocity(t - e));
    const double s = norm(v);
    return std::abs(v.x * a.y - v.y * a.x) / (s * s * s);
}

double DiscreteBoundary::length() const {
    double L = 0.0;
    for (double w : weights) L += w;
    return L;
}

double DiscreteBoundary::max_spacing() const {
    double h = 0.0;
    for (double s : speed) h = std::max(h, s * dt);
    return h;
}

DiscreteBoundary discretize(const ParametricCurve& curve, int n) {
    const bool closed = curve.kind == CurveKind::closed;
    if (closed && n < 32) throw std::invalid_argument("discretize: closed curves need n >= 32");
    if (!closed && n < 64) throw std::invalid_argument("discretize: open curves need n >= 64");
    DiscreteBoundary b;
    b.curve = curve;
    b.n = n;
    b.dt = (curve.t1 - curve.t0) / (closed ? n : n - 1);
    for (int j = 0; j < n; ++j) {
        const double t = curve.t0 + j * b.dt;
        const Vec2 v = curve.velocity(t);
        const double s = norm(v);
        if (!(s > 0.0)) throw std::invalid_argument("discretize: curve velocity vanishes");
        b.t.push_back(t);
        b.points.push_back(curve.position(t));
        b.normals.push_back(curve_normal(v));
        b.speed.push_back(s);
        b.weights.push_back(s * b.dt);
    }
    if (!closed) {
        b.weights.front() *= 0.5;
        b.weights.back() *= 0.5;
    }
    return b;
}

ClosestPoint closest_parameter(const DiscreteBoundary& b, Vec2 x, bool mirrored) {
    const double sgn = mirrored ? -1.0 : 1.0;
    auto dist2 = [&](Vec2 p) {
        const double dx = x.x - p.x, dy = x.y - sgn * p.y;
        return dx * dx + dy * dy;
    };
    int best = 0;
    double bd = dist2(b.points[0]);
    for (int j = 1; j < b.n; ++j) {
        const double d = dist2(b.points[j]);
        if (d < bd) {
            bd = d;
            best = j;
        }
    }
    // Golden-section refinement between the neighbouring nodes.
    double lo = b.t[best] - b.dt, hi = b.t[best] + b.dt;
    if (!b.closed()) {
        lo = std::max(lo, b.curve.t0);
        hi = std::min(hi, b.curve.t1);
    }
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - g * (hi - lo), c = lo + g * (hi - lo);
    double fa = dist2(b.curve.position(a)), fc = dist2(b.curve.position(c));
    for (int it = 0; it < 90 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        if (fa < fc) {
            hi = c;
            c = a;
            fc = fa;
            a = hi - g * (hi - lo);
            fa = dist2(b.curve.position(a));
        } else {
            lo = a;
            a = c;
            fa = fc;
            c = lo + g * (hi - lo);
            fc = dist2(b.curve.position(c));
        }
    }
    ClosestPoint cp{b.t[best], std::sqrt(bd)};
    const double tm = 0.5 * (lo + hi);
    const double dm = dist2(b.curve.position(tm));
    if (dm < bd) cp = {tm, std::sqrt(dm)};
    return cp;
}

double blend_chi(double d, const NearRuleConfig& cfg) {
    const double a = cfg.blend_centre * cfg.scale, w = cfg.blend_width * cfg.scale;
    d = std::abs(d);
    if (d <= a - 6.0 * w) return 1.0;
    if (d >= a + 6.0 * w) return 0.0;
    return 0.5 * std::erfc((d - a) / w);
}

cplx NearRule::interpolate(const std::vector<cplx>& nodal, int f) const {
    cplx v = 0.0;
    const int* idx = &stencil_index[static_cast<std::size_t>(f) * stencil_size];
    const double* c = &stencil_coef[static_cast<std::size_t>(f) * stencil_size];
    for (int q = 0; q < stencil_size; ++q) v += c[q] * nodal[idx[q]];
    return v;
}

namespace {

// Panel edges on [0, W]: dyadic growth from g up to pmax, then uniform.
std::vector<double> graded_edges(double W, double g, double pmax) {
    std::vector<double> e{0.0};
    if (g > 0.0 && g < pmax) {
        double x = g;
        e.push_back(x);
        while (x < pmax && x < W) {
            x = std::min(2.0 * x, W);
            e.push_back(x);
        }
    }
    while (e.back() < W) e.push_back(std::min(e.back() + pmax, W));
    return e;
}

// Barycentric weights of equispaced points: (-1)^q binom(P-1, q).
std::vector<double> equispaced_bary(int P) {
    std::vector<double> w(P);
    double binom = 1.0;
    for (int q = 0; q < P; ++q) {
        w[q] = (q % 2 ? -1.0 : 1.0) * binom;
        binom = binom * (P - 1 - q) / (q + 1);
    }
    return w;
}

// Stencil of P coarse nodes around parameter t with Lagrange coefficients.
void lagrange_stencil(const DiscreteBoundary& b, double t, const std::vector<double>& bary,
                      std::vector<int>& idx_out, std::vector<double>& coef_out) {
    const int n = b.n, P = static_cast<int>(bary.size());
    const double u = (t - b.curve.t0) / b.dt;
    long j0 = static_cast<long>(std::floor(u)) - P / 2 + 1;
    if (!b.closed()) j0 = std::clamp<long>(j0, 0, n - P);
    double denom = 0.0;
    int exact = -1;
    double tmp[64];
    for (int m = 0; m < P; ++m) {
        const double diff = u - static_cast<double>(j0 + m);
        if (diff == 0.0) {
            exact = m;
            break;
        }
        tmp[m] = bary[m] / diff;
        denom += tmp[m];
    }
    for (int m = 0; m < P; ++m) {
        long idx = j0 + m;
        if (b.closed()) idx = ((idx % n) + n) % n;
        idx_out.push_back(static_cast<int>(idx));
        if (exact >= 0)
            coef_out.push_back(m == exact ? 1.0 : 0.0);
        else
            coef_out.push_back(tmp[m] / denom);
    }
}

}  // namespace

cplx interpolate_density(const DiscreteBoundary& b, const std::vector<cplx>& nodal, double t,
                         int stencil) {
    if (static_cast<int>(nodal.size()) != b.n)
        throw std::invalid_argument("interpolate_density: data length differs from the node count");
    if (stencil < 2 || stencil > 64) throw std::invalid_argument("interpolate_density: bad stencil");
    // A parameter that is a node up to rounding returns the nodal value itself.
    const double u = (t - b.curve.t0) / b.dt, ur = std::round(u);
    if (std::abs(u - ur) < 1e-10) {
        long j = static_cast<long>(ur);
        if (b.closed()) j = ((j % b.n) + b.n) % b.n;
        if (j >= 0 && j < b.n) return nodal[j];
    }
    const std::vector<double> bary = equispaced_bary(std::min(stencil, b.n));
    std::vector<int> idx;
    std::vector<double> coef;
    lagrange_stencil(b, t, bary, idx, coef);
    cplx v = 0.0;
    for (std::size_t m = 0; m < idx.size(); ++m) v += coef[m] * nodal[idx[m]];
    return v;
}

NearRule build_near_rule(const DiscreteBoundary& b, double tc, const NearRuleConfig& cfg) {
    const int n = b.n;
    const double dt = b.dt;
    const double period = b.curve.t1 - b.curve.t0;
    const double W = (cfg.blend_centre + 6.0 * cfg.blend_width) * cfg.scale * dt;
    const int P = std::min(cfg.stencil, n);
    if (P < 2 || P > 64) throw std::invalid_argument("near rule: stencil size out of range");
    if (b.closed() && 2.0 * W >= period)
        throw std::invalid_argument("near rule: too few boundary nodes for the blending window");

    NearRule r;
    r.stencil_size = P;
    const double pmax = cfg.panel_max * dt;

    // Coarse part.
    for (int j = 0; j < n; ++j) {
        double d = std::abs(b.t[j] - tc);
        if (b.closed()) {
            d = std::fmod(d, period);
            d = std::min(d, period - d);
        }
        const double chi = blend_chi(d / dt, cfg);
        if (chi < 1.0) {
            r.far_index.push_back(j);
            r.far_weight.push_back(b.weights[j] * (1.0 - chi));
        }
    }

    // Fine part: Gauss panels on each side of tc.
    const GaussRule& gl = gauss_legendre_cached(16);
    const std::vector<double> bary = equispaced_bary(P);
    for (int side = -1; side <= 1; side += 2) {
        double Wside = W;
        if (!b.closed()) Wside = std::min(W, side > 0 ? b.curve.t1 - tc : tc - b.curve.t0);
        if (Wside <= 0.0) continue;
        const std::vector<double> e = graded_edges(Wside, cfg.grade_to, pmax);
        for (std::size_t k = 0; k + 1 < e.size(); ++k) {
            const double a = e[k], c = e[k + 1], half = 0.5 * (c - a);
            if (!(half > 0.0)) continue;
            for (int q = 0; q < 16; ++q) {
                const double off = a + half * (gl.nodes[q] + 1.0);
                const double chi = blend_chi(off / dt, cfg);
                if (chi == 0.0) continue;
                const double t = tc + side * off;
                const Vec2 v = b.curve.velocity(t);
                r.fine_point.push_back(b.curve.position(t));
                r.fine_normal.push_back(curve_normal(v));
                r.fine_weight.push_back(gl.weights[q] * half * norm(v) * chi);

                lagrange_stencil(b, t, bary, r.stencil_index, r.stencil_coef);
            }
        }
    }
    return r;
}

}  // namespace impedance
