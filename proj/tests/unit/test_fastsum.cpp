#include <doctest.h>

#include <cmath>
#include <vector>

#include "impedance/fastsum.hpp"
#include "impedance/rng.hpp"

using namespace impedance;

namespace {

SourceBatch random_batch(int n, double ylo, double yhi, std::uint64_t seed) {
    Lcg64 rng(seed);
    SourceBatch b;
    for (int i = 0; i < n; ++i) {
        b.locations.push_back({rng.uniform(-1, 1), rng.uniform(ylo, yhi)});
        b.strengths.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    }
    return b;
}

std::vector<Vec2> random_targets(int n, double ylo, double yhi, std::uint64_t seed) {
    Lcg64 rng(seed);
    std::vector<Vec2> t;
    for (int i = 0; i < n; ++i) t.push_back({rng.uniform(-1, 1), rng.uniform(ylo, yhi)});
    return t;
}

}  // namespace

TEST_CASE("image counts follow the level rule for each source") {
    const Medium m;
    SourceBatch b;
    b.locations = {{0.0, 5.0}, {0.3, 1e-2}};
    b.strengths = {1.0, 1.0};
    const ExpandedSources e = expand_images(b, m);
    // One mirror point plus (levels + 1) panels of 16 ray points per source.
    const long expect = (1 + 16 * (image_levels(1.0, 5.0, 10.2) + 1)) + (1 + 16 * (image_levels(1.0, 1e-2, 10.2) + 1));
    CHECK(e.image_count() == expect);
    CHECK(e.points.size() == static_cast<std::size_t>(expect + 2));
    int sources = 0;
    for (ImageTag t : e.provenance) sources += t == ImageTag::source;
    CHECK(sources == 2);
}

TEST_CASE("far-region count with the log-scaled eps policy") {
    // Every source in (2, 3) gets ceil(log2(10.2 ln(1e10) / y0)) = 7 levels: 1 + 8 * 16 = 129 images.
    const Medium m;
    ImagePolicy p;
    p.eps = 1e-10;
    p.scale_by_log_eps = true;
    CHECK(expand_images(random_batch(100, 2.0, 3.0, 1), m, p).image_count() == 12900);
}

TEST_CASE("near sources need more images than far ones") {
    const Medium m;
    CHECK(expand_images(random_batch(200, 0.0, 1.0, 2), m).image_count() >
          expand_images(random_batch(200, 2.0, 3.0, 2), m).image_count());
}

TEST_CASE("separated Sommerfeld sum equals the pairwise sum") {
    const Medium m;
    const EvalConfig cfg = make_eval_config(m);
    const SourceBatch b = random_batch(60, 0.0, 1.0, 4);
    const std::vector<Vec2> t = random_targets(25, 0.0, 1.0, 5);
    const std::vector<cplx> a = sommerfeld_batch(b, t, m, cfg.contour);
    const std::vector<cplx> c = sommerfeld_pairwise(b, t, m, cfg.contour);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(a[i] - c[i]) < 1e-12);
}

TEST_CASE("batched potential equals summed hybrid kernels") {
    const Medium m;
    const EvalConfig cfg = make_eval_config(m);
    const SourceBatch b = random_batch(40, 0.0, 1.0, 8);
    const std::vector<Vec2> t = random_targets(15, 0.0, 1.0, 9);
    const BatchResult r = eval_potential_batch(b, t, m, cfg, DirectBackend());
    for (std::size_t l = 0; l < t.size(); ++l) {
        cplx ref = 0.0;
        for (std::size_t j = 0; j < b.locations.size(); ++j)
            ref += b.strengths[j] * hybrid_greens(t[l], b.locations[j], m, cfg);
        CHECK(std::abs(ref - r.values[l]) < 1e-11);
        CHECK(r.error_flag[l] == 0);
    }
    CHECK(r.m_image == expand_images(b, m).image_count());
}

TEST_CASE("a target on a source is flagged, not propagated as inf") {
    const Medium m;
    SourceBatch b;
    b.locations = {{0.0, 1.0}, {0.5, 0.5}};
    b.strengths = {1.0, 2.0};
    const BatchResult r = eval_potential_batch(b, {{0.0, 1.0}, {0.2, 0.2}}, m, make_eval_config(m), DirectBackend());
    CHECK(r.error_flag[0] != 0);
    CHECK(r.error_flag[1] == 0);
    CHECK(std::isfinite(std::abs(r.values[1])));
}

TEST_CASE("invalid batches are rejected") {
    SourceBatch b;
    b.locations = {{0.0, 0.0}};
    b.strengths = {1.0};
    CHECK_THROWS_AS(validate_batch(b), std::invalid_argument);
    b.locations = {{0.0, 1.0}};
    b.strengths = {};
    CHECK_THROWS_AS(validate_batch(b), std::invalid_argument);
    b.strengths = {1.0};
    const Medium m;
    CHECK_THROWS_AS(eval_potential_batch(b, {{0.0, -1.0}}, m, make_eval_config(m), DirectBackend()),
                    std::invalid_argument);
}
