#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "impedance/greens.hpp"

namespace impedance {

// ---------------------------------------------------------------- geometry

enum class CurveKind { closed, open };

struct ParametricCurve {
    std::string name;
    CurveKind kind = CurveKind::closed;
    double t0 = 0.0;
    double t1 = 2.0 * kPi;
    std::function<Vec2(double)> position;
    std::function<Vec2(double)> velocity;
};

// flower (delta 0.8), flower_near (delta 1e-3), perturb1, perturb2.
ParametricCurve builtin_curve(const std::string& name);
std::vector<std::string> builtin_curve_names();
ParametricCurve flower_curve(double delta);
// Counter-clockwise circle, used by the tests.
ParametricCurve circle_curve(Vec2 center, double radius);

// (y', -x') / |gamma'|: outward for counter-clockwise closed curves, downward
// for the graph-like open interface curves.
Vec2 curve_normal(Vec2 velocity);
// Unsigned curvature at parameter t; the acceleration comes from a central
// difference of the velocity.
double curve_curvature(const ParametricCurve& c, double t);

struct DiscreteBoundary {
    ParametricCurve curve;
    int n = 0;
    double dt = 0.0;
    std::vector<double> t;
    std::vector<Vec2> points;
    std::vector<Vec2> normals;
    std::vector<double> speed;
    std::vector<double> weights;   // speed * dt, halved at the ends of an open curve

    bool closed() const { return curve.kind == CurveKind::closed; }
    double length() const;
    double max_spacing() const;    // largest speed * dt
    // +1 when the region Omega lies on the side the normal points to (open
    // interface), -1 when it lies behind the normal (closed obstacle).
    int omega_side() const { return closed() ? -1 : 1; }
};

// Closed curves need n >= 32, open ones n >= 64.
DiscreteBoundary discretize(const ParametricCurve& curve, int n);

struct ClosestPoint {
    double t = 0.0;
    double distance = 0.0;
};
// Closest point of the curve, or of its mirror image in y = 0, to x.
ClosestPoint closest_parameter(const DiscreteBoundary& b, Vec2 x, bool mirrored);

// Value at parameter t of the local Lagrange interpolant through nodal data.
cplx interpolate_density(const DiscreteBoundary& b, const std::vector<cplx>& nodal, double t,
                         int stencil = 20);

// ---------------------------------------------------------------- near rules

// Partition-of-unity rule for integrands that are nearly singular close to
// parameter tc. Coarse nodes keep w_j (1 - chi), Gauss panels around tc
// carry chi, and densities reach the fine nodes by local Lagrange
// interpolation of the nodal values.
struct NearRule {
    std::vector<int> far_index;
    std::vector<double> far_weight;
    std::vector<Vec2> fine_point;
    std::vector<Vec2> fine_normal;
    std::vector<double> fine_weight;   // Gauss weight * speed * chi
    std::vector<int> stencil_index;    // stencil_size coarse indices per fine node
    std::vector<double> stencil_coef;
    int stencil_size = 0;

    int fine_count() const { return static_cast<int>(fine_point.size()); }
    // Density value at fine node f.
    cplx interpolate(const std::vector<cplx>& nodal, int f) const;
};

struct NearRuleConfig {
    double blend_centre = 18.0;   // chi = erfc((|t - tc|/dt - a)/b)/2, in units of dt
    double blend_width = 2.5;
    double scale = 1.0;           // stretches a and b together
    double panel_max = 2.0;       // longest fine panel, in units of dt
    double grade_to = 0.0;        // smallest panel next to tc (parameter units); 0 = no grading
    int stencil = 20;
};

NearRule build_near_rule(const DiscreteBoundary& b, double tc, const NearRuleConfig& cfg);
// The blending function chi for a parameter offset measured in units of dt.
double blend_chi(double offset_in_dt, const NearRuleConfig& cfg);

// ---------------------------------------------------------------- kernels

enum class LayerKind { single, double_layer, normal_single };   // S, D, S'

struct KernelSpec {
    Medium medium;
    bool free_only = false;   // g_k alone, without images and tail
    EvalConfig eval;
};
KernelSpec free_space_kernel(cplx k);
KernelSpec impedance_kernel(const Medium& m, double tol = 1e-11);

struct QbxConfig {
    int order = 16;               // p
    double radius_factor = 4.0;   // r = radius_factor * local node spacing
    double curvature_cap = 0.5;   // r <= curvature_cap / kappa, and shrunk until no other
                                  // part of the curve crowds the expansion disk
    int stencil = 20;             // interpolation points for the upsampled density
};

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Local expansion sum_{l=-p..p} a_l J_l(k rho) e^{i l theta} about a centre.
struct QbxExpansion {
    Vec2 center;
    cplx k;
    int order = 0;
    double radius = 0.0;          // distance from the centre to the nearest node
    std::vector<cplx> coeffs;     // index l + p
    cplx eval(Vec2 x) const;
};

// Free-space single or double layer expansion about c. The coefficient
// integrals use the blended near rule around the closest node.
QbxExpansion qbx_expansion(const DiscreteBoundary& b, const std::vector<cplx>& density,
                           LayerKind kind, Vec2 center, cplx k, const QbxConfig& cfg);

// ---------------------------------------------------------------- operators

// c_id I + c_S S + c_D D + c_Sp S', every layer term taken as its limit from
// the Omega side (where the QBX centres sit).
struct LayerCombo {
    cplx identity{0.0};
    cplx single{0.0};
    cplx double_layer{0.0};
    cplx normal_single{0.0};
};

class BoundaryOperator {
public:
    BoundaryOperator(const DiscreteBoundary& b, const KernelSpec& ks, const QbxConfig& q,
                     const LayerCombo& combo);
    void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const;
    int size() const { return n_; }
    // Dense part (free space with QBX, images, identity), row-major.
    const std::vector<cplx>& dense() const { return a_; }
    double assembly_seconds() const { return assembly_seconds_; }

private:
    struct TailTerm {
        std::vector<cplx> src;   // Q x n
        std::vector<cplx> tgt;   // n x Q
    };
    int n_ = 0;
    int q_ = 0;
    std::vector<cplx> a_;
    std::vector<TailTerm> tail_;
    double assembly_seconds_ = 0.0;
};

enum class Limit { omega_side, physical_side, principal_value };

// Layer potential on the boundary nodes. For closed curves the Omega side is
// the interior; for the open interface it is the region below the curve.
std::vector<cplx> apply_layer_on_surface(const DiscreteBoundary& b, const std::vector<cplx>& sigma,
                                         LayerKind kind, const KernelSpec& ks, Limit limit,
                                         const QbxConfig& q = {});

// Layer potential at points off the boundary.
std::vector<cplx> layer_potential(const DiscreteBoundary& b, const std::vector<cplx>& sigma,
                                  LayerKind kind, const KernelSpec& ks,
                                  const std::vector<Vec2>& targets);

// ---------------------------------------------------------------- solver

struct GmresResult {
    std::vector<cplx> x;
    int iterations = 0;
    double residual = 0.0;   // relative to |b|
    bool converged = false;
};

// Unrestarted GMRES with modified Gram-Schmidt and Givens rotations.
GmresResult gmres(const std::function<void(const std::vector<cplx>&, std::vector<cplx>&)>& op,
                  const std::vector<cplx>& rhs, double tol, int max_iter);

enum class ProblemKind { dirichlet, neumann, perturbed };

ProblemKind parse_problem_kind(const std::string& s);
std::string to_string(ProblemKind k);

struct ScatterProblem {
    ProblemKind kind = ProblemKind::dirichlet;
    Medium medium;
    Vec2 source{-2.0, 2.0};
    // When set, the incident field is -g(., x_I) with x_I inside Omega, so the
    // exact total field vanishes outside.
    std::optional<Vec2> interior_source;
    DiscreteBoundary boundary;
    QbxConfig qbx;
    double eval_tol = 1e-11;
};

// Checks the problem kind against the curve and the source positions.
void validate_problem(const ScatterProblem& p);
// Builds and validates a problem on a built-in curve.
ScatterProblem make_problem(ProblemKind kind, const std::string& curve, int n, const Medium& m,
                            Vec2 source, const QbxConfig& q = {});

struct SolveResult {
    std::vector<cplx> density;
    int iterations = 0;
    double residual = 0.0;
    double sigma_l2 = 0.0;     // sqrt(sum w_j |sigma_j|^2)
    bool converged = false;
    bool resonance_suspect = false;
    double assembly_seconds = 0.0;
    double solve_seconds = 0.0;
};

double sigma_l2(const DiscreteBoundary& b, const std::vector<cplx>& sigma);

SolveResult solve(const ScatterProblem& p, double gmres_tol = 1e-10, int max_iter = 500);

struct FieldSample {
    Vec2 x;
    cplx scattered{};
    cplx incident{};
    cplx total{};
};

cplx incident_field(const ScatterProblem& p, Vec2 x);
std::vector<FieldSample> eval_field(const ScatterProblem& p, const SolveResult& r,
                                    const std::vector<Vec2>& targets);

}  // namespace impedance
