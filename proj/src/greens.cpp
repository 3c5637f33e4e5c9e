#include "impedance/greens.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "impedance/specfun.hpp"

namespace impedance {

void validate_medium(const Medium& m) {
    if (!(std::abs(m.k) > 0.0) || m.k.real() < 0.0 || m.k.imag() < 0.0)
        throw std::invalid_argument("medium: k must be nonzero with Re k >= 0 and Im k >= 0");
    if (m.alpha.real() < 0.0 || m.alpha.imag() < 0.0)
        throw std::invalid_argument("medium: alpha must have Re >= 0 and Im >= 0");
    if (std::abs(m.alpha) > std::abs(m.k) * (1.0 + 1e-12))
        throw std::invalid_argument("medium: |alpha| must not exceed |k|");
    if (!(m.C > 0.0)) throw std::invalid_argument("medium: C must be positive");
}

EvalConfig make_eval_config(const Medium& m, double tol, double dt) {
    if (!(tol >= 1e-14)) throw std::invalid_argument("eval config: tol must be >= 1e-14");
    EvalConfig cfg;
    cfg.contour = build_contour_rule(m.k, m.alpha, m.C, 1e-12, dt);
    cfg.tol = tol;
    return cfg;
}

void free_kernel_radial(cplx k, double r, cplx& g, cplx& dg_dr) {
    if (k.imag() == 0.0) {
        const Bessel01Real b = bessel01(k.real() * r);
        // (i/4)(J0 + iY0) and -(ik/4)(J1 + iY1)
        g = cplx(-0.25 * b.y0, 0.25 * b.j0);
        const double kr = k.real();
        dg_dr = cplx(0.25 * kr * b.y1, -0.25 * kr * b.j1);
        return;
    }
    const cplx z = k * r;
    const cplx h0 = hankel0(z), h1 = hankel1(z);
    g = 0.25 * kI * h0;
    dg_dr = -0.25 * kI * k * h1;
}

cplx gk_free(Vec2 x, Vec2 x0, cplx k) {
    const double r = norm(x - x0);
    if (!(r > 0.0)) throw std::domain_error("gk_free: coincident points");
    cplx g, dg;
    free_kernel_radial(k, r, g, dg);
    return g;
}

Grad2 gk_free_grad(Vec2 x, Vec2 x0, cplx k) {
    const Vec2 d = x - x0;
    const double r = norm(d);
    if (!(r > 0.0)) throw std::domain_error("gk_free_grad: coincident points");
    cplx g, dg;
    free_kernel_radial(k, r, g, dg);
    return {dg * (d.x / r), dg * (d.y / r)};
}

ImageSegment::ImageSegment(const Medium& m, int order) : m_(m), order_(order) {
    eta_.resize(kMaxImageLevels + 1);
    v_.resize(kMaxImageLevels + 1);
    for (int lev = 0; lev <= kMaxImageLevels; ++lev) {
        const ImageRule rule = image_rule_with_levels(m.C, lev, order);
        eta_[lev] = rule.eta_nodes;
        v_[lev].resize(rule.eta_nodes.size());
        for (std::size_t j = 0; j < rule.eta_nodes.size(); ++j)
            v_[lev][j] = 2.0 * kI * m.alpha * std::exp(kI * m.alpha * rule.eta_nodes[j]) *
                         rule.raw_weights[j];
    }
}

int ImageSegment::pair_levels(double dx, double Y) const {
    const double R = std::hypot(dx, Y);
    if (!(R > 0.0)) return kMaxImageLevels;
    if (R >= m_.C) return 0;
    int lev = static_cast<int>(std::ceil(std::log2(m_.C / R)));
    return std::clamp(lev, 0, kMaxImageLevels);
}

KernelParts ImageSegment::eval(double dx, double Y, int levels) const {
    const double R = std::hypot(dx, Y);
    if (!(R > 0.0)) throw std::domain_error("image segment: target coincides with the mirror image");
    KernelParts out;
    cplx g, dg;
    free_kernel_radial(m_.k, R, g, dg);
    out.value = g;
    out.d_dx = dg * (dx / R);
    out.d_dY = dg * (Y / R);
    if (m_.alpha == cplx(0.0)) return out;
    const std::vector<double>& eta = eta_[levels];
    const std::vector<cplx>& v = v_[levels];
    cplx sv = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < eta.size(); ++j) {
        const double yy = Y + eta[j];
        const double r = std::hypot(dx, yy);
        free_kernel_radial(m_.k, r, g, dg);
        const cplx vg = v[j] * dg / r;
        sv += v[j] * g;
        sx += vg * dx;
        sy += vg * yy;
    }
    out.value += sv;
    out.d_dx += sx;
    out.d_dY += sy;
    return out;
}

SommerfeldTail::SommerfeldTail(const Medium& m, const ContourRule& rule) {
    const int n = rule.count();
    lambda_.resize(n);
    s_.resize(n);
    coef_.resize(n);
    const cplx ia = kI * m.alpha;
    for (int j = 0; j < n; ++j) {
        const cplx lam = rule.lambda_nodes[j];
        const cplx s = spectral_root_value(lam, m.k);
        lambda_[j] = lam;
        s_[j] = s;
        coef_[j] = rule.weights[j] * (ia / (2.0 * kPi)) * std::exp(-(s - ia) * m.C) / (s * (s - ia));
    }
}

SommerfeldTail SommerfeldTail::full_reflection(const Medium& m, const ContourRule& rule) {
    SommerfeldTail t;
    const int n = rule.count();
    t.lambda_.resize(n);
    t.s_.resize(n);
    t.coef_.resize(n);
    const cplx ia = kI * m.alpha;
    for (int j = 0; j < n; ++j) {
        const cplx lam = rule.lambda_nodes[j];
        const cplx s = spectral_root_value(lam, m.k);
        t.lambda_[j] = lam;
        t.s_[j] = s;
        t.coef_[j] = rule.weights[j] * (s + ia) / (4.0 * kPi * s * (s - ia));
    }
    return t;
}

KernelParts SommerfeldTail::eval(double dx, double Y) const {
    KernelParts out;
    for (std::size_t j = 0; j < lambda_.size(); ++j) {
        const cplx e = coef_[j] * std::exp(-s_[j] * Y + kI * lambda_[j] * dx);
        out.value += e;
        out.d_dx += kI * lambda_[j] * e;
        out.d_dY -= s_[j] * e;
    }
    return out;
}

HybridGreens::HybridGreens(const Medium& m, const EvalConfig& cfg)
    : m_(m), cfg_(cfg), seg_(m, cfg.image_order), tail_(m, cfg.contour) {
    validate_medium(m);
    const cplx lam = tanh_contour(cfg.contour.t_max);
    const cplx s = spectral_root_value(lam, m.k);
    const double endpoint = std::abs(m.alpha) * std::abs(std::exp(-(s - kI * m.alpha) * m.C) / (s * (s - kI * m.alpha)));
    endpoint_warning_ = endpoint > cfg.tol;
    if (cfg.pure_sommerfeld) {
        if (!(cfg.pure_sommerfeld_min_y > 0.0))
            throw std::invalid_argument("eval config: pure_sommerfeld_min_y must be positive");
        direct_ = SommerfeldTail::full_reflection(m, sommerfeld_oracle_contour(m, cfg.pure_sommerfeld_min_y));
    }
}

int HybridGreens::source_levels(double y0) const {
    return image_levels(m_.C, y0, std::abs(m_.k));
}

namespace {
void check_points(Vec2 x, Vec2 x0) {
    if (x.y < 0.0) throw std::domain_error("hybrid_greens: target below the interface");
    if (!(x0.y > 0.0)) throw std::domain_error("hybrid_greens: source must lie above the interface");
    if (x.x == x0.x && x.y == x0.y) throw std::domain_error("hybrid_greens: coincident points");
}
}  // namespace

KernelParts HybridGreens::images(Vec2 x, Vec2 x0) const {
    return seg_.eval(x.x - x0.x, x.y + x0.y, source_levels(x0.y));
}

KernelParts HybridGreens::scattered(Vec2 x, Vec2 x0) const {
    if (direct_ && x.y + x0.y >= cfg_.pure_sommerfeld_min_y) return direct_->eval(x.x - x0.x, x.y + x0.y);
    KernelParts p = images(x, x0);
    p += tail(x, x0);
    return p;
}

cplx HybridGreens::value(Vec2 x, Vec2 x0) const {
    check_points(x, x0);
    return gk_free(x, x0, m_.k) + scattered(x, x0).value;
}

Grad2 HybridGreens::grad(Vec2 x, Vec2 x0) const {
    check_points(x, x0);
    const Grad2 f = gk_free_grad(x, x0, m_.k);
    const KernelParts s = scattered(x, x0);
    return {f.dx + s.d_dx, f.dy + s.d_dY};
}

cplx hybrid_greens(Vec2 x, Vec2 x0, const Medium& m, const EvalConfig& cfg) {
    check_points(x, x0);
    validate_medium(m);
    const ImageRule rule = build_image_rule(m.C, x0.y, std::abs(m.k), cfg.image_order, cfg.image_eps);
    const double dx = x.x - x0.x, Y = x.y + x0.y;
    cplx total = gk_free(x, x0, m.k) + gk_free({dx, Y}, {0.0, 0.0}, m.k);
    for (int j = 0; j < rule.count(); ++j) {
        const double eta = rule.eta_nodes[j];
        const cplx v = 2.0 * kI * m.alpha * std::exp(kI * m.alpha * eta) * rule.raw_weights[j];
        total += v * gk_free({dx, Y + eta}, {0.0, 0.0}, m.k);
    }
    const cplx ia = kI * m.alpha;
    for (int j = 0; j < cfg.contour.count(); ++j) {
        const cplx lam = cfg.contour.lambda_nodes[j];
        const cplx s = spectral_root_value(lam, m.k);
        const cplx phi = (ia / (2.0 * kPi)) * std::exp(-s * Y) / s * std::exp(-(s - ia) * m.C) /
                         (s - ia) * std::exp(kI * lam * dx);
        total += cfg.contour.weights[j] * phi;
    }
    return total;
}

Grad2 hybrid_greens_grad(Vec2 x, Vec2 x0, const Medium& m, const EvalConfig& cfg) {
    return HybridGreens(m, cfg).grad(x, x0);
}

ContourRule sommerfeld_oracle_contour(const Medium& m, double Y, double eps, double dt) {
    if (!(Y > 0.0)) throw std::domain_error("sommerfeld oracle: needs y + y0 > 0");
    double t = std::abs(m.k) + 5.0;
    for (int guard = 0; guard < 200000; ++guard) {
        const cplx s = spectral_root_value(tanh_contour(t), m.k);
        if (std::exp(-s.real() * Y) / std::abs(s) <= eps) break;
        t += 1.0;
    }
    return make_contour_rule(t, dt);
}

OracleValue sommerfeld_scattered(Vec2 x, Vec2 x0, const Medium& m, const ContourRule& contour) {
    if (!(x.y > 0.0) || !(x0.y > 0.0))
        throw std::domain_error("sommerfeld_scattered: needs y > 0 and y0 > 0");
    const double Y = x.y + x0.y, dx = x.x - x0.x;
    const cplx ia = kI * m.alpha;
    auto integrand = [&](double t) {
        const cplx lam(t, -std::tanh(t));
        const double sech = 1.0 / std::cosh(t);
        const cplx dlam(1.0, -sech * sech);
        // s on the outgoing branch, written out here rather than shared
        cplx w = m.k * m.k - lam * lam;
        if (w.imag() == 0.0) w = cplx(w.real(), 0.0);
        const cplx s = -kI * std::sqrt(w);
        return std::exp(-s * Y + kI * lam * dx) / s * (s + ia) / (s - ia) * dlam / (4.0 * kPi);
    };
    OracleValue out;
    const double dt = contour.dt;
    const long n_half = std::lround(contour.t_max / dt);
    cplx sum = 0.0;
    for (long j = -n_half; j <= n_half; ++j) {
        const double wgt = (std::labs(j) == n_half) ? 0.5 * dt : dt;
        sum += wgt * integrand(j * dt);
    }
    out.value = sum;
    const double end = std::max(std::abs(integrand(n_half * dt)), std::abs(integrand(-n_half * dt)));
    out.accuracy_warning = end > 1e-13;
    return out;
}

cplx image_ray_scattered(Vec2 x, Vec2 x0, const Medium& m, double tol) {
    if (!(x.y > 0.0) || !(x0.y > 0.0))
        throw std::domain_error("image_ray_scattered: needs y > 0 and y0 > 0");
    if (!(m.alpha.imag() > 0.0))
        throw std::domain_error("image_ray_scattered: unsupported regime, needs Im(alpha) > 0");
    const double dx = x.x - x0.x, Y = x.y + x0.y;
    cplx total = gk_free({dx, Y}, {0.0, 0.0}, m.k);
    const double amp = 2.0 * std::abs(m.alpha);
    // Truncate where the ray density 2 i alpha e^{i alpha eta} drops below tol.
    const double eta_max = std::max(0.0, std::log(amp / tol) / m.alpha.imag());
    if (eta_max > 1e6)
        throw std::domain_error("image_ray_scattered: unsupported regime, ray truncation beyond 1e6");
    if (eta_max == 0.0) return total;
    auto f = [&](double eta) {
        return 2.0 * kI * m.alpha * std::exp(kI * m.alpha * eta) *
               gk_free({dx, Y + eta}, {0.0, 0.0}, m.k);
    };
    total += adaptive_integrate(f, 0.0, eta_max, 0.1 * tol);
    return total;
}

cplx gk_free_3d(Vec3 x, Vec3 x0, cplx k) {
    const double r = std::sqrt((x.x - x0.x) * (x.x - x0.x) + (x.y - x0.y) * (x.y - x0.y) +
                               (x.z - x0.z) * (x.z - x0.z));
    if (!(r > 0.0)) throw std::domain_error("gk_free_3d: coincident points");
    return -std::exp(kI * k * r) / (4.0 * kPi * r);
}

cplx hybrid_greens_3d(Vec3 x, Vec3 x0, const Medium& m, const EvalConfig& cfg) {
    if (x.z < 0.0 || !(x0.z > 0.0))
        throw std::domain_error("hybrid_greens_3d: needs z >= 0 and z0 > 0");
    validate_medium(m);
    const double rho = std::hypot(x.x - x0.x, x.y - x0.y);
    const double Z = x.z + x0.z;
    auto g3 = [&](double dz) {
        const double r = std::hypot(rho, dz);
        return -std::exp(kI * m.k * r) / (4.0 * kPi * r);
    };
    cplx total = gk_free_3d(x, x0, m.k) + gk_free_3d(x, {x0.x, x0.y, -x0.z}, m.k);
    const cplx ia = kI * m.alpha;
    if (m.alpha == cplx(0.0)) return total;
    const ImageRule rule = build_image_rule(m.C, x0.z, std::abs(m.k), cfg.image_order, cfg.image_eps);
    for (int j = 0; j < rule.count(); ++j) {
        const double eta = rule.eta_nodes[j];
        total += 2.0 * ia * std::exp(ia * eta) * rule.raw_weights[j] * g3(Z + eta);
    }
    // Tail on the half contour lambda(t), t in [0, t_max], composite Gauss-Legendre.
    const double t_max = cfg.contour.t_max;
    const GaussRule& gl = gauss_legendre_cached(16);
    const double panel = 0.5;
    const int npanel = static_cast<int>(std::ceil(t_max / panel));
    cplx tail = 0.0;
    for (int p = 0; p < npanel; ++p) {
        const double a = p * panel, b = std::min(t_max, (p + 1) * panel);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int q = 0; q < 16; ++q) {
            const double t = mid + half * gl.nodes[q];
            const cplx lam = tanh_contour(t);
            const cplx s = spectral_root_value(lam, m.k);
            const cplx arg = lam * rho;
            const cplx j0 = (std::abs(arg) == 0.0) ? cplx(1.0) : bessel01(arg).j0;
            tail += half * gl.weights[q] * tanh_contour_derivative(t) * lam / s * std::exp(-s * Z) *
                    std::exp(-(s - ia) * m.C) / (s - ia) * j0;
        }
    }
    // Overall minus sign carries the -e^{ikr}/(4 pi r) normalisation.
    total -= ia / (2.0 * kPi) * tail;
    return total;
}

}  // namespace impedance
