#include "impedance/fastsum.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "impedance/parallel.hpp"
#include "impedance/specfun.hpp"

namespace impedance {

namespace {
double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace

long ExpandedSources::image_count() const {
    long n = 0;
    for (ImageTag t : provenance)
        if (t != ImageTag::source) ++n;
    return n;
}

int ImagePolicy::levels(const Medium& m, double y0) const {
    double kmag = std::abs(m.k);
    if (scale_by_log_eps) kmag *= std::log(1.0 / eps);
    return image_levels(m.C, y0, kmag);
}

void validate_batch(const SourceBatch& batch) {
    if (batch.locations.size() != batch.strengths.size())
        throw std::invalid_argument("source batch: locations and strengths differ in length");
    for (std::size_t i = 0; i < batch.locations.size(); ++i) {
        if (!(batch.locations[i].y > 0.0))
            throw std::invalid_argument("source batch: every source needs y > 0");
        if (!std::isfinite(batch.strengths[i].real()) || !std::isfinite(batch.strengths[i].imag()))
            throw std::invalid_argument("source batch: non-finite strength");
    }
}

ExpandedSources expand_images(const SourceBatch& batch, const Medium& m, const ImagePolicy& policy) {
    validate_batch(batch);
    ExpandedSources out;
    const std::size_t M = batch.locations.size();
    for (std::size_t i = 0; i < M; ++i) {
        out.points.push_back(batch.locations[i]);
        out.strengths.push_back(batch.strengths[i]);
        out.provenance.push_back(ImageTag::source);
    }
    for (std::size_t i = 0; i < M; ++i) {
        const Vec2 p = batch.locations[i];
        const cplx c = batch.strengths[i];
        out.points.push_back({p.x, -p.y});
        out.strengths.push_back(c);
        out.provenance.push_back(ImageTag::mirror);
        const ImageRule rule = image_rule_with_levels(m.C, policy.levels(m, p.y), policy.order);
        for (int j = 0; j < rule.count(); ++j) {
            const double eta = rule.eta_nodes[j];
            out.points.push_back({p.x, -(p.y + eta)});
            out.strengths.push_back(c * 2.0 * kI * m.alpha * std::exp(kI * m.alpha * eta) *
                                    rule.raw_weights[j]);
            out.provenance.push_back(ImageTag::ray);
        }
    }
    return out;
}

void DirectBackend::evaluate(const std::vector<Vec2>& points, const std::vector<cplx>& strengths,
                             const std::vector<Vec2>& targets, cplx k, std::vector<cplx>& out,
                             std::vector<char>& flag) const {
    out.assign(targets.size(), cplx(0.0));
    flag.assign(targets.size(), 0);
    parallel_for(static_cast<long>(targets.size()), [&](long l) {
        cplx acc = 0.0;
        const Vec2 t = targets[l];
        for (std::size_t m = 0; m < points.size(); ++m) {
            const double r = std::hypot(t.x - points[m].x, t.y - points[m].y);
            if (!(r > 0.0)) {
                flag[l] = 1;
                continue;
            }
            cplx g, dg;
            free_kernel_radial(k, r, g, dg);
            acc += strengths[m] * g;
        }
        out[l] = acc;
    });
}

SeparatedPlan plan_sommerfeld(const SourceBatch& batch, const Medium& m, const ContourRule& contour) {
    SeparatedPlan plan;
    plan.contour = contour;
    const int Q = contour.count();
    plan.rho.assign(Q, cplx(0.0));
    std::vector<cplx> s(Q);
    for (int j = 0; j < Q; ++j) s[j] = spectral_root_value(contour.lambda_nodes[j], m.k);
    parallel_for(Q, [&](long j) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < batch.locations.size(); ++i) {
            const Vec2 p = batch.locations[i];
            acc += batch.strengths[i] * std::exp(-s[j] * p.y - kI * contour.lambda_nodes[j] * p.x);
        }
        plan.rho[j] = acc;
    });
    return plan;
}

std::vector<cplx> sommerfeld_batch(const SourceBatch& batch, const std::vector<Vec2>& targets,
                                   const Medium& m, const ContourRule& contour) {
    validate_batch(batch);
    const SeparatedPlan plan = plan_sommerfeld(batch, m, contour);
    const SommerfeldTail tail(m, contour);
    const int Q = tail.count();
    std::vector<cplx> weighted(Q);
    for (int j = 0; j < Q; ++j) weighted[j] = tail.coef()[j] * plan.rho[j];
    std::vector<cplx> out(targets.size());
    parallel_for(static_cast<long>(targets.size()), [&](long l) {
        const Vec2 x = targets[l];
        cplx acc = 0.0;
        for (int j = 0; j < Q; ++j)
            acc += weighted[j] * std::exp(-tail.s()[j] * x.y + kI * tail.lambda()[j] * x.x);
        out[l] = acc;
    });
    return out;
}

std::vector<cplx> sommerfeld_pairwise(const SourceBatch& batch, const std::vector<Vec2>& targets,
                                      const Medium& m, const ContourRule& contour) {
    const SommerfeldTail tail(m, contour);
    std::vector<cplx> out(targets.size(), cplx(0.0));
    for (std::size_t l = 0; l < targets.size(); ++l)
        for (std::size_t i = 0; i < batch.locations.size(); ++i) {
            const Vec2 p = batch.locations[i];
            out[l] += batch.strengths[i] * tail.eval(targets[l].x - p.x, targets[l].y + p.y).value;
        }
    return out;
}

BatchResult eval_potential_batch(const SourceBatch& batch, const std::vector<Vec2>& targets,
                                 const Medium& m, const EvalConfig& cfg,
                                 const PointSumBackend& backend, const ImagePolicy& policy) {
    validate_medium(m);
    validate_batch(batch);
    for (const Vec2& t : targets)
        if (t.y < 0.0) throw std::invalid_argument("eval_potential_batch: targets must have y >= 0");
    BatchResult res;
    const auto t_start = std::chrono::steady_clock::now();
    if (batch.locations.empty()) {
        res.values.assign(targets.size(), cplx(0.0));
        res.error_flag.assign(targets.size(), 0);
        return res;
    }
    const ExpandedSources ex = expand_images(batch, m, policy);
    res.m_image = ex.image_count();
    auto t0 = std::chrono::steady_clock::now();
    backend.evaluate(ex.points, ex.strengths, targets, m.k, res.values, res.error_flag);
    res.t_backend = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const std::vector<cplx> tail = sommerfeld_batch(batch, targets, m, cfg.contour);
    res.t_sommerfeld = seconds_since(t0);
    for (std::size_t l = 0; l < targets.size(); ++l) res.values[l] += tail[l];
    res.t_total = seconds_since(t_start);
    return res;
}

}  // namespace impedance
