#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "impedance/quad.hpp"
#include "impedance/types.hpp"

namespace impedance {

struct Medium {
    cplx k{10.2, 0.0};
    cplx alpha{2.04, 0.0};
    double C = 1.0;
};

// Throws std::invalid_argument when k, alpha or C leave the supported range.
void validate_medium(const Medium& m);

struct EvalConfig {
    ContourRule contour;
    int image_order = 16;
    double image_eps = 1e-14;
    double tol = 1e-11;
    // Shortcut for well-separated pairs: when y + y0 >= pure_sommerfeld_min_y the
    // whole scattered part comes from one Sommerfeld integral. Off by default.
    bool pure_sommerfeld = false;
    double pure_sommerfeld_min_y = 1.0;
};

EvalConfig make_eval_config(const Medium& m, double tol = 1e-11,
                            double dt = kDefaultContourStep);

// A scattered-part term as a function of dx = x - x0 and Y = y + y0. Target
// derivatives are (d_dx, d_dY); source derivatives are (-d_dx, d_dY).
struct KernelParts {
    cplx value{};
    cplx d_dx{};
    cplx d_dY{};
    KernelParts& operator+=(const KernelParts& o) {
        value += o.value;
        d_dx += o.d_dx;
        d_dY += o.d_dY;
        return *this;
    }
};

// (i/4) H0(k r) and -(ik/4) H1(k r); takes the real fast path when k is real.
void free_kernel_radial(cplx k, double r, cplx& g, cplx& dg_dr);

cplx gk_free(Vec2 x, Vec2 x0, cplx k);
Grad2 gk_free_grad(Vec2 x, Vec2 x0, cplx k);

// Mirror image plus the weighted ray segment on [0, C], with rules for every
// level count built once. Weights v_j = 2 i alpha e^{i alpha eta_j} v_j^GL.
class ImageSegment {
public:
    explicit ImageSegment(const Medium& m, int order = 16);
    KernelParts eval(double dx, double Y, int levels) const;
    // Level count whose finest panel is no longer than the distance to the mirror point.
    int pair_levels(double dx, double Y) const;
    KernelParts eval_adapted(double dx, double Y) const { return eval(dx, Y, pair_levels(dx, Y)); }
    int node_count(int levels) const { return static_cast<int>(eta_[levels].size()); }
    const std::vector<double>& eta(int levels) const { return eta_[levels]; }
    const std::vector<cplx>& weights(int levels) const { return v_[levels]; }
    const Medium& medium() const { return m_; }

private:
    Medium m_;
    int order_;
    std::vector<std::vector<double>> eta_;
    std::vector<std::vector<cplx>> v_;
};

// Discretised Sommerfeld tail sum_j w_j phi(lambda_j).
class SommerfeldTail {
public:
    SommerfeldTail(const Medium& m, const ContourRule& rule);
    // The complete reflected field, coefficients w_j (s + i alpha) / (4 pi s (s - i alpha)).
    static SommerfeldTail full_reflection(const Medium& m, const ContourRule& rule);
    KernelParts eval(double dx, double Y) const;
    int count() const { return static_cast<int>(lambda_.size()); }
    const std::vector<cplx>& lambda() const { return lambda_; }
    const std::vector<cplx>& s() const { return s_; }
    // w_j (i alpha / 2 pi) e^{-(s-i alpha)C} / (s (s - i alpha))
    const std::vector<cplx>& coef() const { return coef_; }

private:
    SommerfeldTail() = default;
    std::vector<cplx> lambda_, s_, coef_;
};

// Reusable hybrid evaluator: free + mirror + image segment + tail.
class HybridGreens {
public:
    HybridGreens(const Medium& m, const EvalConfig& cfg);
    cplx value(Vec2 x, Vec2 x0) const;
    Grad2 grad(Vec2 x, Vec2 x0) const;
    // Scattered part only, image levels from the source height rule.
    KernelParts scattered(Vec2 x, Vec2 x0) const;
    KernelParts images(Vec2 x, Vec2 x0) const;
    KernelParts tail(Vec2 x, Vec2 x0) const { return tail_.eval(x.x - x0.x, x.y + x0.y); }
    int source_levels(double y0) const;
    const Medium& medium() const { return m_; }
    const ImageSegment& segment() const { return seg_; }
    const SommerfeldTail& tail_rule() const { return tail_; }
    bool endpoint_warning() const { return endpoint_warning_; }

private:
    Medium m_;
    EvalConfig cfg_;
    ImageSegment seg_;
    SommerfeldTail tail_;
    std::optional<SommerfeldTail> direct_;
    bool endpoint_warning_ = false;
};

cplx hybrid_greens(Vec2 x, Vec2 x0, const Medium& m, const EvalConfig& cfg);
Grad2 hybrid_greens_grad(Vec2 x, Vec2 x0, const Medium& m, const EvalConfig& cfg);

// Oracles. The direct Sommerfeld integral of the scattered field, coded
// independently of the hybrid path.
struct OracleValue {
    cplx value{};
    bool accuracy_warning = false;
};
OracleValue sommerfeld_scattered(Vec2 x, Vec2 x0, const Medium& m, const ContourRule& contour);
// Contour long enough for exp(-s Y) to fall below eps at the ends.
ContourRule sommerfeld_oracle_contour(const Medium& m, double Y, double eps = 1e-16,
                                      double dt = kDefaultContourStep);

// Mirror image plus the full ray of images, integrated adaptively; needs Im(alpha) > 0.
cplx image_ray_scattered(Vec2 x, Vec2 x0, const Medium& m, double tol);

// Three-dimensional hybrid formula with g_k = -e^{ikr}/(4 pi r).
cplx hybrid_greens_3d(Vec3 x, Vec3 x0, const Medium& m, const EvalConfig& cfg);
cplx gk_free_3d(Vec3 x, Vec3 x0, cplx k);

}  // namespace impedance
