#pragma once

#include <vector>

#include "impedance/greens.hpp"

namespace impedance {

struct SourceBatch {
    std::vector<Vec2> locations;   // all y > 0
    std::vector<cplx> strengths;
};

enum class ImageTag { source, mirror, ray };

struct ExpandedSources {
    std::vector<Vec2> points;
    std::vector<cplx> strengths;
    std::vector<ImageTag> provenance;
    // Mirror plus ray points, i.e. M_image.
    long image_count() const;
};

// How many dyadic levels each source gets. The a priori rule uses
// ceil(log2(C |k| / y0)); the scaled rule multiplies |k| by ln(1/eps).
struct ImagePolicy {
    int order = 16;
    double eps = 1e-14;
    bool scale_by_log_eps = false;
    int levels(const Medium& m, double y0) const;
};

void validate_batch(const SourceBatch& batch);

ExpandedSources expand_images(const SourceBatch& batch, const Medium& m,
                              const ImagePolicy& policy = {});

// Free-space point summation sum_m c_m g_k(x_l, p_m); the narrow seam where a
// fast multipole code would slot in.
class PointSumBackend {
public:
    virtual ~PointSumBackend() = default;
    // out[l] = sum_m c_m g_k(targets[l], points[m]); coincident pairs set flag[l].
    virtual void evaluate(const std::vector<Vec2>& points, const std::vector<cplx>& strengths,
                          const std::vector<Vec2>& targets, cplx k, std::vector<cplx>& out,
                          std::vector<char>& flag) const = 0;
};

class DirectBackend : public PointSumBackend {
public:
    void evaluate(const std::vector<Vec2>& points, const std::vector<cplx>& strengths,
                  const std::vector<Vec2>& targets, cplx k, std::vector<cplx>& out,
                  std::vector<char>& flag) const override;
};

struct SeparatedPlan {
    ContourRule contour;
    // rho_j = sum_m c_m e^{-s_j y'_m} e^{-i lambda_j x'_m}
    std::vector<cplx> rho;
};

SeparatedPlan plan_sommerfeld(const SourceBatch& batch, const Medium& m, const ContourRule& contour);
std::vector<cplx> sommerfeld_batch(const SourceBatch& batch, const std::vector<Vec2>& targets,
                                   const Medium& m, const ContourRule& contour);
// Pairwise reference: sum_m c_m tail(x_l, x'_m), used to check the separated sum.
std::vector<cplx> sommerfeld_pairwise(const SourceBatch& batch, const std::vector<Vec2>& targets,
                                      const Medium& m, const ContourRule& contour);

struct BatchResult {
    std::vector<cplx> values;
    std::vector<char> error_flag;
    long m_image = 0;
    double t_backend = 0.0;
    double t_sommerfeld = 0.0;
    double t_total = 0.0;
};

BatchResult eval_potential_batch(const SourceBatch& batch, const std::vector<Vec2>& targets,
                                 const Medium& m, const EvalConfig& cfg,
                                 const PointSumBackend& backend,
                                 const ImagePolicy& policy = {});

}  // namespace impedance
