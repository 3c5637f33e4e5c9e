#include <chrono>
#include <cmath>
#include <stdexcept>

#include "impedance/bie.hpp"

namespace impedance {

namespace {

double vnorm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

// Winding-number test against the discretised polygon.
bool inside_closed(const DiscreteBoundary& b, Vec2 x) {
    double wind = 0.0;
    for (int j = 0; j < b.n; ++j) {
        const Vec2 a = b.points[j] - x, c = b.points[(j + 1) % b.n] - x;
        wind += std::atan2(a.x * c.y - a.y * c.x, a.x * c.x + a.y * c.y);
    }
    return std::abs(wind) > kPi;
}

// Height of an open graph-like curve above abscissa x, zero outside its span.
double curve_height(const DiscreteBoundary& b, double x) {
    if (x < b.curve.t0 || x > b.curve.t1) return 0.0;
    return b.curve.position(x).y;
}

struct Incident {
    Vec2 at;
    double sign;
};

Incident incident_source(const ScatterProblem& p) {
    if (p.interior_source) return {*p.interior_source, -1.0};
    return {p.source, 1.0};
}

}  // namespace

GmresResult gmres(const std::function<void(const std::vector<cplx>&, std::vector<cplx>&)>& op,
                  const std::vector<cplx>& rhs, double tol, int max_iter) {
    const std::size_t n = rhs.size();
    GmresResult res;
    res.x.assign(n, cplx(0.0));
    const double beta = vnorm(rhs);
    if (beta == 0.0) {
        res.converged = true;
        return res;
    }
    std::vector<std::vector<cplx>> V;
    std::vector<std::vector<cplx>> H;   // column j holds h_{0..j+1, j}
    std::vector<cplx> cs, sn, g{beta};
    V.push_back(rhs);
    for (cplx& z : V[0]) z /= beta;
    std::vector<cplx> w;
    int j = 0;
    double est = 1.0;
    for (; j < max_iter; ++j) {
        op(V[j], w);
        std::vector<cplx> h(j + 2, cplx(0.0));
        for (int i = 0; i <= j; ++i) {
            cplx d = 0.0;
            for (std::size_t q = 0; q < n; ++q) d += std::conj(V[i][q]) * w[q];
            h[i] = d;
            for (std::size_t q = 0; q < n; ++q) w[q] -= d * V[i][q];
        }
        const double hn = vnorm(w);
        h[j + 1] = hn;
        for (int i = 0; i < j; ++i) {
            const cplx a = h[i], b = h[i + 1];
            h[i] = cs[i] * a + sn[i] * b;
            h[i + 1] = -std::conj(sn[i]) * a + cs[i] * b;
        }
        const cplx a = h[j], b = h[j + 1];
        const double den = std::sqrt(std::norm(a) + std::norm(b));
        cplx c, s;
        if (std::abs(a) == 0.0) {
            c = 0.0;
            s = 1.0;
        } else {
            c = std::abs(a) / den;
            s = (a / std::abs(a)) * std::conj(b) / den;
        }
        cs.push_back(c);
        sn.push_back(s);
        h[j] = c * a + s * b;
        h[j + 1] = 0.0;
        g.push_back(-std::conj(s) * g[j]);
        g[j] = c * g[j];
        H.push_back(h);
        est = std::abs(g[j + 1]) / beta;
        if (est <= tol || hn == 0.0) {
            ++j;
            break;
        }
        V.push_back(w);
        for (cplx& z : V.back()) z /= hn;
    }
    const int m = j;
    std::vector<cplx> y(m);
    for (int i = m - 1; i >= 0; --i) {
        cplx s = g[i];
        for (int l = i + 1; l < m; ++l) s -= H[l][i] * y[l];
        y[i] = s / H[i][i];
    }
    for (int i = 0; i < m; ++i)
        for (std::size_t q = 0; q < n; ++q) res.x[q] += y[i] * V[i][q];
    op(res.x, w);
    for (std::size_t q = 0; q < n; ++q) w[q] = rhs[q] - w[q];
    res.iterations = m;
    res.residual = vnorm(w) / beta;
    res.converged = est <= tol;
    return res;
}

ProblemKind parse_problem_kind(const std::string& s) {
    if (s == "dirichlet") return ProblemKind::dirichlet;
    if (s == "neumann") return ProblemKind::neumann;
    if (s == "perturbed") return ProblemKind::perturbed;
    throw std::invalid_argument("unknown problem kind '" + s + "'");
}

std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::dirichlet: return "dirichlet";
        case ProblemKind::neumann: return "neumann";
        case ProblemKind::perturbed: return "perturbed";
    }
    return "?";
}

void validate_problem(const ScatterProblem& p) {
    validate_medium(p.medium);
    const DiscreteBoundary& b = p.boundary;
    if (b.n == 0) throw std::invalid_argument("problem has no boundary nodes");
    const bool closed = b.closed();
    if (closed && p.kind == ProblemKind::perturbed)
        throw std::invalid_argument("perturbed problems need an open interface curve");
    if (!closed && p.kind != ProblemKind::perturbed)
        throw std::invalid_argument("dirichlet and neumann problems need a closed curve");
    for (const Vec2& pt : b.points)
        if (pt.y < 0.0) throw std::invalid_argument("boundary dips below y = 0");
    auto outside = [&](Vec2 x) {
        return closed ? !inside_closed(b, x) : x.y > curve_height(b, x.x);
    };
    if (!(p.source.y > 0.0)) throw std::invalid_argument("incident source needs y > 0");
    if (!outside(p.source)) throw std::invalid_argument("incident source lies inside the obstacle region");
    if (p.interior_source) {
        const Vec2 xi = *p.interior_source;
        if (!(xi.y > 0.0)) throw std::invalid_argument("interior source needs y > 0");
        if (outside(xi)) throw std::invalid_argument("interior source lies outside the obstacle region");
    }
}

ScatterProblem make_problem(ProblemKind kind, const std::string& curve, int n, const Medium& m,
                            Vec2 source, const QbxConfig& q) {
    ScatterProblem p;
    p.kind = kind;
    p.medium = m;
    p.source = source;
    p.boundary = discretize(builtin_curve(curve), n);
    p.qbx = q;
    validate_problem(p);
    return p;
}

double sigma_l2(const DiscreteBoundary& b, const std::vector<cplx>& sigma) {
    double s = 0.0;
    for (int j = 0; j < b.n; ++j) s += b.weights[j] * std::norm(sigma[j]);
    return std::sqrt(s);
}

SolveResult solve(const ScatterProblem& p, double gmres_tol, int max_iter) {
    validate_problem(p);
    if (!(gmres_tol > 0.0)) throw std::invalid_argument("gmres tolerance must be positive");
    const DiscreteBoundary& b = p.boundary;
    const KernelSpec ks = impedance_kernel(p.medium, p.eval_tol);
    const double s = b.omega_side();
    LayerCombo cb;
    switch (p.kind) {
        case ProblemKind::dirichlet:
            cb.double_layer = 1.0;
            cb.identity = -s;
            break;
        case ProblemKind::neumann:
            cb.normal_single = 1.0;
            cb.identity = s;
            break;
        case ProblemKind::perturbed:
            cb.normal_single = 1.0;
            cb.single = -kI * p.medium.alpha;
            cb.identity = s;
            break;
    }
    const BoundaryOperator op(b, ks, p.qbx, cb);

    const HybridGreens hg(p.medium, ks.eval);
    const Incident inc = incident_source(p);
    std::vector<cplx> rhs(b.n);
    for (int i = 0; i < b.n; ++i) {
        const Vec2 x = b.points[i], nx = b.normals[i];
        const cplx u = inc.sign * hg.value(x, inc.at);
        if (p.kind == ProblemKind::dirichlet) {
            rhs[i] = -u;
            continue;
        }
        const Grad2 g = hg.grad(x, inc.at);
        const cplx dn = inc.sign * (g.dx * nx.x + g.dy * nx.y);
        rhs[i] = -dn;
        if (p.kind == ProblemKind::perturbed) rhs[i] += kI * p.medium.alpha * u;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const GmresResult g = gmres([&](const std::vector<cplx>& x, std::vector<cplx>& y) { op.apply(x, y); },
                                rhs, gmres_tol, max_iter);
    SolveResult r;
    r.density = g.x;
    r.iterations = g.iterations;
    r.residual = g.residual;
    r.converged = g.converged;
    r.resonance_suspect = !g.converged || g.iterations > 300;
    r.sigma_l2 = sigma_l2(b, g.x);
    r.assembly_seconds = op.assembly_seconds();
    r.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

cplx incident_field(const ScatterProblem& p, Vec2 x) {
    const KernelSpec ks = impedance_kernel(p.medium, p.eval_tol);
    const Incident inc = incident_source(p);
    return inc.sign * hybrid_greens(x, inc.at, p.medium, ks.eval);
}

std::vector<FieldSample> eval_field(const ScatterProblem& p, const SolveResult& r,
                                    const std::vector<Vec2>& targets) {
    validate_problem(p);
    const KernelSpec ks = impedance_kernel(p.medium, p.eval_tol);
    const LayerKind kind = p.kind == ProblemKind::dirichlet ? LayerKind::double_layer : LayerKind::single;
    const std::vector<cplx> us = layer_potential(p.boundary, r.density, kind, ks, targets);
    const HybridGreens hg(p.medium, ks.eval);
    const Incident inc = incident_source(p);
    std::vector<FieldSample> out(targets.size());
    for (std::size_t l = 0; l < targets.size(); ++l) {
        out[l].x = targets[l];
        out[l].scattered = us[l];
        out[l].incident = inc.sign * hg.value(targets[l], inc.at);
        out[l].total = out[l].scattered + out[l].incident;
    }
    return out;
}

}  // namespace impedance
