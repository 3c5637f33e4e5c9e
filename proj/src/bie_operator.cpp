#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "impedance/bie.hpp"
#include "impedance/parallel.hpp"
#include "impedance/specfun.hpp"

namespace impedance {

KernelSpec free_space_kernel(cplx k) {
    KernelSpec ks;
    ks.medium.k = k;
    ks.medium.alpha = 0.0;
    ks.free_only = true;
    return ks;
}

KernelSpec impedance_kernel(const Medium& m, double tol) {
    validate_medium(m);
    KernelSpec ks;
    ks.medium = m;
    ks.free_only = false;
    ks.eval = make_eval_config(m, tol);
    return ks;
}

namespace {

// Expansion factors about a centre. For a source at y the single layer factor
// is H_l(k rho) e^{-i l theta}; the double layer factor is its derivative along
// the source normal. Index l + p.
struct SourceFactors {
    std::vector<cplx> H, S, D;

    void compute(cplx k, Vec2 c, int p, Vec2 y, Vec2 ny, bool want_s, bool want_d) {
        const Vec2 d = y - c;
        const double rho = norm(d);
        if (!(rho > 0.0)) throw GeometryError("qbx: source point coincides with the centre");
        const double ct = d.x / rho, st = d.y / rho;
        hankel_seq(k * rho, p + 1, H);
        if (want_s) S.assign(2 * p + 1, cplx(0.0));
        if (want_d) D.assign(2 * p + 1, cplx(0.0));
        const cplx e1(ct, -st);
        const double rn = ct * ny.x + st * ny.y;
        const double tn = -st * ny.x + ct * ny.y;
        cplx el = 1.0;
        for (int l = 0; l <= p; ++l) {
            const double sign = (l % 2) ? -1.0 : 1.0;
            const cplx emi = el, epi = std::conj(el);
            if (want_s) {
                S[p + l] = H[l] * emi;
                if (l > 0) S[p - l] = sign * H[l] * epi;
            }
            if (want_d) {
                const cplx dH = (l == 0) ? -H[1] : 0.5 * (H[l - 1] - H[l + 1]);
                const cplx a = k * dH * rn;
                const cplx bb = (kI * static_cast<double>(l) / rho) * H[l] * tn;
                D[p + l] = emi * (a - bb);
                if (l > 0) D[p - l] = sign * epi * (a + bb);
            }
            el *= e1;
        }
    }
};

// Target factors at x about c: J_l(k rho) e^{i l theta} and its derivative
// along nx, combined with the layer coefficients.
struct TargetFactors {
    std::vector<cplx> tS, tD;
    bool use_s = false, use_d = false;

    void compute(cplx k, Vec2 c, int p, Vec2 x, Vec2 nx, const LayerCombo& cb) {
        use_s = cb.single != 0.0 || cb.normal_single != 0.0;
        use_d = cb.double_layer != 0.0;
        const Vec2 d = x - c;
        const double r = norm(d);
        const double ct = d.x / r, st = d.y / r;
        std::vector<cplx> J;
        besselj_seq(k * r, p + 1, J);
        tS.assign(2 * p + 1, cplx(0.0));
        tD.assign(2 * p + 1, cplx(0.0));
        const cplx e1(ct, st);
        const double rn = ct * nx.x + st * nx.y;
        const double tn = -st * nx.x + ct * nx.y;
        cplx el = 1.0;
        for (int l = 0; l <= p; ++l) {
            const double sign = (l % 2) ? -1.0 : 1.0;
            const cplx dJ = (l == 0) ? -J[1] : 0.5 * (J[l - 1] - J[l + 1]);
            const cplx a = k * dJ * rn;
            const cplx bb = (kI * static_cast<double>(l) / r) * J[l] * tn;
            const cplx base_p = J[l] * el, base_m = sign * J[l] * std::conj(el);
            const cplx der_p = el * (a + bb), der_m = sign * std::conj(el) * (a - bb);
            tS[p + l] = cb.single * base_p + cb.normal_single * der_p;
            tD[p + l] = cb.double_layer * base_p;
            if (l > 0) {
                tS[p - l] = cb.single * base_m + cb.normal_single * der_m;
                tD[p - l] = cb.double_layer * base_m;
            }
            el *= e1;
        }
    }
};

cplx qbx_pair(const TargetFactors& T, SourceFactors& F, cplx k, Vec2 c, int p, Vec2 y, Vec2 ny) {
    F.compute(k, c, p, y, ny, T.use_s, T.use_d);
    cplx acc = 0.0;
    if (T.use_s)
        for (int m = 0; m <= 2 * p; ++m) acc += F.S[m] * T.tS[m];
    if (T.use_d)
        for (int m = 0; m <= 2 * p; ++m) acc += F.D[m] * T.tD[m];
    return 0.25 * kI * acc;
}

// Image part (mirror plus segment) of the combined kernel.
cplx image_pair(const ImageSegment& seg, const LayerCombo& cb, Vec2 x, Vec2 nx, Vec2 y, Vec2 ny) {
    const KernelParts P = seg.eval_adapted(x.x - y.x, x.y + y.y);
    cplx v = 0.0;
    if (cb.single != 0.0) v += cb.single * P.value;
    if (cb.normal_single != 0.0) v += cb.normal_single * (nx.x * P.d_dx + nx.y * P.d_dY);
    if (cb.double_layer != 0.0) v += cb.double_layer * (-ny.x * P.d_dx + ny.y * P.d_dY);
    return v;
}

NearRuleConfig qbx_rule_config(double radius_in_dt, int stencil) {
    NearRuleConfig nc;
    nc.scale = std::max(1.0, radius_in_dt / 4.0);
    nc.panel_max = std::min(2.0, radius_in_dt);
    nc.stencil = stencil;
    return nc;
}

NearRuleConfig graded_rule_config(const DiscreteBoundary& b, const ClosestPoint& cp) {
    NearRuleConfig nc;
    const double sp = norm(b.curve.velocity(cp.t));
    nc.grade_to = 0.25 * cp.distance / sp;
    nc.panel_max = 4.0;
    return nc;
}

// Nodes closer than this to the mirrored curve get the graded image rule.
constexpr double kNearFactor = 6.0;

// Expansion radius for node i. Starts from the spacing rule and the curvature
// cap, then shrinks while another part of the curve intrudes on the disk: no
// node may sit closer to the centre than the node itself, and nodes beyond 2r
// of it must keep 1.5r from the centre.
double centre_radius(const DiscreteBoundary& b, int i, const QbxConfig& qc, int sgn) {
    const Vec2 x = b.points[i], nx = b.normals[i];
    const double kappa = curve_curvature(b.curve, b.t[i]);
    double r = qc.radius_factor * b.speed[i] * b.dt;
    if (kappa > 0.0) r = std::min(r, qc.curvature_cap / kappa);
    const double r_min = 0.25 * b.speed[i] * b.dt;
    for (; r > r_min; r *= 0.8) {
        const Vec2 c = x + (sgn * r) * nx;
        bool clear = true;
        for (int j = 0; j < b.n && clear; ++j) {
            if (j == i) continue;
            const double dc = norm(b.points[j] - c);
            clear = dc >= r * (1.0 - 1e-9) && (norm(b.points[j] - x) <= 2.0 * r || dc >= 1.5 * r);
        }
        if (clear) break;
    }
    return std::max(r, r_min);
}

}  // namespace

cplx QbxExpansion::eval(Vec2 x) const {
    const Vec2 d = x - center;
    const double r = norm(d);
    if (r > radius * (1.0 + 1e-12))
        throw GeometryError("qbx: evaluation point outside the expansion disk");
    if (r == 0.0) return coeffs[order];
    std::vector<cplx> J;
    besselj_seq(k * r, order, J);
    const cplx e1(d.x / r, d.y / r);
    cplx el = 1.0, acc = coeffs[order] * J[0];
    for (int l = 1; l <= order; ++l) {
        el *= e1;
        const double sign = (l % 2) ? -1.0 : 1.0;
        acc += J[l] * (coeffs[order + l] * el + sign * coeffs[order - l] * std::conj(el));
    }
    return acc;
}

QbxExpansion qbx_expansion(const DiscreteBoundary& b, const std::vector<cplx>& density,
                           LayerKind kind, Vec2 center, cplx k, const QbxConfig& cfg) {
    if (kind == LayerKind::normal_single)
        throw std::invalid_argument("qbx_expansion: only single and double layers are expanded");
    if (static_cast<int>(density.size()) != b.n)
        throw std::invalid_argument("qbx_expansion: density length differs from the node count");
    const int p = cfg.order;
    const ClosestPoint cp = closest_parameter(b, center, false);
    double rmin = cp.distance;
    for (const Vec2& y : b.points) rmin = std::min(rmin, norm(y - center));
    if (!(rmin > 0.0)) throw GeometryError("qbx: centre lies on the boundary");

    QbxExpansion e;
    e.center = center;
    e.k = k;
    e.order = p;
    e.radius = rmin;
    e.coeffs.assign(2 * p + 1, cplx(0.0));
    const double sp = norm(b.curve.velocity(cp.t));
    const NearRule rule = build_near_rule(b, cp.t, qbx_rule_config(rmin / (sp * b.dt), cfg.stencil));
    const bool dbl = kind == LayerKind::double_layer;
    SourceFactors F;
    auto add = [&](Vec2 y, Vec2 ny, cplx wsig) {
        F.compute(k, center, p, y, ny, !dbl, dbl);
        const std::vector<cplx>& v = dbl ? F.D : F.S;
        for (int m = 0; m <= 2 * p; ++m) e.coeffs[m] += 0.25 * kI * wsig * v[m];
    };
    for (std::size_t q = 0; q < rule.far_index.size(); ++q) {
        const int j = rule.far_index[q];
        add(b.points[j], b.normals[j], rule.far_weight[q] * density[j]);
    }
    for (int f = 0; f < rule.fine_count(); ++f)
        add(rule.fine_point[f], rule.fine_normal[f], rule.fine_weight[f] * rule.interpolate(density, f));
    return e;
}

BoundaryOperator::BoundaryOperator(const DiscreteBoundary& b, const KernelSpec& ks,
                                   const QbxConfig& qc, const LayerCombo& cb) {
    const auto t_start = std::chrono::steady_clock::now();
    if (qc.order < 1 || qc.order > kBesselMaxOrder - 2) throw std::invalid_argument("qbx order out of range");
    if (!(qc.radius_factor > 0.0)) throw std::invalid_argument("qbx radius must be positive");
    if (!(qc.curvature_cap > 0.0)) throw std::invalid_argument("qbx curvature cap must be positive");
    if (qc.stencil < 2 || qc.stencil > 64) throw std::invalid_argument("interpolation stencil out of range");
    n_ = b.n;
    const int n = n_, p = qc.order;
    const cplx k = ks.medium.k;
    const int sgn = b.omega_side();
    a_.assign(static_cast<std::size_t>(n) * n, cplx(0.0));
    const bool images = !ks.free_only;
    std::unique_ptr<ImageSegment> seg;
    if (images) seg = std::make_unique<ImageSegment>(ks.medium);
    const double hmax = b.max_spacing();

    parallel_for(n, [&](long il) {
        const int i = static_cast<int>(il);
        cplx* row = &a_[static_cast<std::size_t>(i) * n];
        const Vec2 x = b.points[i], nx = b.normals[i];
        const double r = centre_radius(b, i, qc, sgn);
        const Vec2 c = x + (sgn * r) * nx;

        TargetFactors T;
        T.compute(k, c, p, x, nx, cb);
        SourceFactors F;
        const NearRule rule = build_near_rule(b, b.t[i], qbx_rule_config(r / (b.speed[i] * b.dt), qc.stencil));
        for (std::size_t q = 0; q < rule.far_index.size(); ++q) {
            const int j = rule.far_index[q];
            row[j] += rule.far_weight[q] * qbx_pair(T, F, k, c, p, b.points[j], b.normals[j]);
        }
        auto spread = [&](const NearRule& nr, int f, cplx v) {
            const int* idx = &nr.stencil_index[static_cast<std::size_t>(f) * nr.stencil_size];
            const double* co = &nr.stencil_coef[static_cast<std::size_t>(f) * nr.stencil_size];
            for (int m = 0; m < nr.stencil_size; ++m) row[idx[m]] += co[m] * v;
        };
        for (int f = 0; f < rule.fine_count(); ++f)
            spread(rule, f, rule.fine_weight[f] * qbx_pair(T, F, k, c, p, rule.fine_point[f], rule.fine_normal[f]));

        if (images) {
            if (x.y < kNearFactor * hmax) {
                const ClosestPoint cp = closest_parameter(b, x, true);
                const NearRule ir = build_near_rule(b, cp.t, graded_rule_config(b, cp));
                for (std::size_t q = 0; q < ir.far_index.size(); ++q) {
                    const int j = ir.far_index[q];
                    row[j] += ir.far_weight[q] * image_pair(*seg, cb, x, nx, b.points[j], b.normals[j]);
                }
                for (int f = 0; f < ir.fine_count(); ++f)
                    spread(ir, f, ir.fine_weight[f] * image_pair(*seg, cb, x, nx, ir.fine_point[f], ir.fine_normal[f]));
            } else {
                for (int j = 0; j < n; ++j)
                    row[j] += b.weights[j] * image_pair(*seg, cb, x, nx, b.points[j], b.normals[j]);
            }
        }
        row[i] += cb.identity;
    });

    // Sommerfeld tail as a rank-Q product, applied at matvec time.
    if (images) {
        const SommerfeldTail tail(ks.medium, ks.eval.contour);
        const int Q = tail.count();
        q_ = Q;
        auto make_term = [&](bool dbl) {
            TailTerm t;
            t.src.resize(static_cast<std::size_t>(Q) * n);
            t.tgt.resize(static_cast<std::size_t>(n) * Q);
            parallel_for(Q, [&](long q) {
                const cplx s = tail.s()[q], lam = tail.lambda()[q];
                for (int j = 0; j < n; ++j) {
                    const Vec2 y = b.points[j], ny = b.normals[j];
                    cplx f = b.weights[j] * std::exp(-s * y.y - kI * lam * y.x);
                    if (dbl) f *= -s * ny.y - kI * lam * ny.x;
                    t.src[static_cast<std::size_t>(q) * n + j] = f;
                }
            });
            parallel_for(n, [&](long i) {
                const Vec2 x = b.points[i], nx = b.normals[i];
                for (int q = 0; q < Q; ++q) {
                    const cplx s = tail.s()[q], lam = tail.lambda()[q];
                    cplx f = tail.coef()[q] * std::exp(-s * x.y + kI * lam * x.x);
                    if (dbl)
                        f *= cb.double_layer;
                    else
                        f *= cb.single + cb.normal_single * (-s * nx.y + kI * lam * nx.x);
                    t.tgt[static_cast<std::size_t>(i) * Q + q] = f;
                }
            });
            tail_.push_back(std::move(t));
        };
        if (cb.single != 0.0 || cb.normal_single != 0.0) make_term(false);
        if (cb.double_layer != 0.0) make_term(true);
    }
    assembly_seconds_ =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
}

void BoundaryOperator::apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
    const int n = n_;
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("operator: size mismatch");
    y.assign(n, cplx(0.0));
    parallel_for(n, [&](long i) {
        const cplx* row = &a_[static_cast<std::size_t>(i) * n];
        cplx acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
    });
    for (const TailTerm& t : tail_) {
        std::vector<cplx> rho(q_);
        parallel_for(q_, [&](long q) {
            const cplx* s = &t.src[static_cast<std::size_t>(q) * n];
            cplx acc = 0.0;
            for (int j = 0; j < n; ++j) acc += s[j] * x[j];
            rho[q] = acc;
        });
        parallel_for(n, [&](long i) {
            const cplx* g = &t.tgt[static_cast<std::size_t>(i) * q_];
            cplx acc = 0.0;
            for (int q = 0; q < q_; ++q) acc += g[q] * rho[q];
            y[i] += acc;
        });
    }
}

std::vector<cplx> apply_layer_on_surface(const DiscreteBoundary& b, const std::vector<cplx>& sigma,
                                         LayerKind kind, const KernelSpec& ks, Limit limit,
                                         const QbxConfig& q) {
    LayerCombo cb;
    const double s = b.omega_side();
    double jump = 0.0;   // identity coefficient added to the Omega-side limit
    switch (kind) {
        case LayerKind::single:
            cb.single = 1.0;
            break;
        case LayerKind::double_layer:
            cb.double_layer = 1.0;
            if (limit == Limit::principal_value) jump = -0.5 * s;
            if (limit == Limit::physical_side) jump = -s;
            break;
        case LayerKind::normal_single:
            cb.normal_single = 1.0;
            if (limit == Limit::principal_value) jump = 0.5 * s;
            if (limit == Limit::physical_side) jump = s;
            break;
    }
    cb.identity = jump;
    const BoundaryOperator op(b, ks, q, cb);
    std::vector<cplx> out;
    op.apply(sigma, out);
    return out;
}

std::vector<cplx> layer_potential(const DiscreteBoundary& b, const std::vector<cplx>& sigma,
                                  LayerKind kind, const KernelSpec& ks,
                                  const std::vector<Vec2>& targets) {
    if (kind == LayerKind::normal_single)
        throw std::invalid_argument("layer_potential: off-surface values need S or D");
    if (static_cast<int>(sigma.size()) != b.n)
        throw std::invalid_argument("layer_potential: density length differs from the node count");
    const bool dbl = kind == LayerKind::double_layer;
    const bool images = !ks.free_only;
    const cplx k = ks.medium.k;
    const double hmax = b.max_spacing();
    if (images)
        for (const Vec2& x : targets)
            if (x.y < 0.0) throw std::invalid_argument("layer_potential: targets need y >= 0");

    std::unique_ptr<ImageSegment> seg;
    std::unique_ptr<SommerfeldTail> tail;
    std::vector<cplx> rho;
    LayerCombo cb;
    if (dbl)
        cb.double_layer = 1.0;
    else
        cb.single = 1.0;
    if (images) {
        seg = std::make_unique<ImageSegment>(ks.medium);
        tail = std::make_unique<SommerfeldTail>(ks.medium, ks.eval.contour);
        rho.assign(tail->count(), cplx(0.0));
        parallel_for(tail->count(), [&](long q) {
            const cplx s = tail->s()[q], lam = tail->lambda()[q];
            cplx acc = 0.0;
            for (int j = 0; j < b.n; ++j) {
                const Vec2 y = b.points[j], ny = b.normals[j];
                cplx f = b.weights[j] * sigma[j] * std::exp(-s * y.y - kI * lam * y.x);
                if (dbl) f *= -s * ny.y - kI * lam * ny.x;
                acc += f;
            }
            rho[q] = acc;
        });
    }

    auto free_kernel = [&](Vec2 x, Vec2 y, Vec2 ny) -> cplx {
        if (!dbl) return gk_free(x, y, k);
        const Grad2 g = gk_free_grad(x, y, k);
        return -(g.dx * ny.x + g.dy * ny.y);
    };

    std::vector<cplx> out(targets.size());
    parallel_for(static_cast<long>(targets.size()), [&](long l) {
        const Vec2 x = targets[l];
        const Vec2 nx{0.0, 0.0};
        cplx acc = 0.0;
        const ClosestPoint cp = closest_parameter(b, x, false);
        if (!(cp.distance > 0.0)) throw GeometryError("layer_potential: target lies on the boundary");
        if (cp.distance < kNearFactor * hmax) {
            const NearRule nr = build_near_rule(b, cp.t, graded_rule_config(b, cp));
            for (std::size_t q = 0; q < nr.far_index.size(); ++q) {
                const int j = nr.far_index[q];
                acc += nr.far_weight[q] * sigma[j] * free_kernel(x, b.points[j], b.normals[j]);
            }
            for (int f = 0; f < nr.fine_count(); ++f)
                acc += nr.fine_weight[f] * nr.interpolate(sigma, f) *
                       free_kernel(x, nr.fine_point[f], nr.fine_normal[f]);
        } else {
            for (int j = 0; j < b.n; ++j) acc += b.weights[j] * sigma[j] * free_kernel(x, b.points[j], b.normals[j]);
        }
        if (images) {
            const ClosestPoint mp = closest_parameter(b, x, true);
            if (mp.distance < kNearFactor * hmax) {
                const NearRule nr = build_near_rule(b, mp.t, graded_rule_config(b, mp));
                for (std::size_t q = 0; q < nr.far_index.size(); ++q) {
                    const int j = nr.far_index[q];
                    acc += nr.far_weight[q] * sigma[j] * image_pair(*seg, cb, x, nx, b.points[j], b.normals[j]);
                }
                for (int f = 0; f < nr.fine_count(); ++f)
                    acc += nr.fine_weight[f] * nr.interpolate(sigma, f) *
                           image_pair(*seg, cb, x, nx, nr.fine_point[f], nr.fine_normal[f]);
            } else {
                for (int j = 0; j < b.n; ++j)
                    acc += b.weights[j] * sigma[j] * image_pair(*seg, cb, x, nx, b.points[j], b.normals[j]);
            }
            for (int q = 0; q < tail->count(); ++q)
                acc += tail->coef()[q] * std::exp(-tail->s()[q] * x.y + kI * tail->lambda()[q] * x.x) * rho[q];
        }
        out[l] = acc;
    });
    return out;
}

}  // namespace impedance
