#include "cli_app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "impedance/bie.hpp"
#include "impedance/fastsum.hpp"
#include "impedance/greens.hpp"
#include "impedance/rng.hpp"
#include "impedance/version.hpp"

namespace impedance::cli {

namespace {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest round-trip text by default, fixed significant digits otherwise.
std::string fmt(double v, int digits = 0) {
    char buf[64];
    if (digits == 0) {
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("--" + what + ": expected a number, got '" + s + "'");
    }
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> v;
    for (const std::string& p : split(s)) v.push_back(parse_double(p, what));
    return v;
}

int parse_int(const std::string& s, const std::string& what) {
    const double v = parse_double(s, what);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("--" + what + ": expected an integer");
    return static_cast<int>(v);
}

cplx parse_complex(const std::string& s, const std::string& what) {
    const std::vector<double> v = parse_list(s, what);
    if (v.size() == 1) return {v[0], 0.0};
    if (v.size() == 2) return {v[0], v[1]};
    throw ConfigError("--" + what + ": expected 're' or 're,im'");
}

Vec2 parse_vec2(const std::string& s, const std::string& what) {
    const std::vector<double> v = parse_list(s, what);
    if (v.size() != 2) throw ConfigError("--" + what + ": expected 'x,y'");
    return {v[0], v[1]};
}

struct Grid {
    double x0, x1, y0, y1;
    int nx, ny;
    std::vector<Vec2> points() const {
        std::vector<Vec2> p;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                p.push_back({nx > 1 ? x0 + (x1 - x0) * i / (nx - 1) : x0,
                             ny > 1 ? y0 + (y1 - y0) * j / (ny - 1) : y0});
        return p;
    }
};

Grid parse_grid(const std::string& s) {
    const std::vector<double> v = parse_list(s, "grid");
    if (v.size() != 6) throw ConfigError("--grid: expected x0,x1,y0,y1,nx,ny");
    Grid g{v[0], v[1], v[2], v[3], static_cast<int>(v[4]), static_cast<int>(v[5])};
    if (g.nx < 1 || g.ny < 1 || v[4] != g.nx || v[5] != g.ny)
        throw ConfigError("--grid: nx and ny must be positive integers");
    if (g.y0 < 0.0 || g.y1 < 0.0) throw ConfigError("--grid: the grid must lie in y >= 0");
    return g;
}

std::string json_to_string(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
    if (j.is_number()) return j.is_number_float() ? fmt(j.get<double>()) : j.dump();
    if (j.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < j.size(); ++i) s += (i ? "," : "") + json_to_string(j[i]);
        return s;
    }
    throw ConfigError("config: unsupported value " + j.dump());
}

// Options of one subcommand. Values resolve as flag, then config file, then default.
class Options {
public:
    explicit Options(CLI::App* app) : app_(app) {
        app_->add_option("--config", config_path_, "JSON file with option values; flags win");
    }
    void add(const std::string& name, const std::string& help) {
        opts_[name] = app_->add_option("--" + name, raw_[name], help);
    }
    void flag(const std::string& name, const std::string& help) {
        flags_[name] = app_->add_flag("--" + name, help);
    }
    void load_config() {
        if (config_path_.empty()) return;
        std::ifstream f(config_path_);
        if (!f) throw ConfigError("cannot read config file '" + config_path_ + "'");
        try {
            config_ = json::parse(f);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        if (!config_.is_object()) throw ConfigError("config: top level must be an object");
        for (auto it = config_.begin(); it != config_.end(); ++it)
            if (!opts_.count(it.key()) && !flags_.count(it.key()))
                throw ConfigError("config: unknown key '" + it.key() + "'");
    }
    bool given(const std::string& name) const {
        return (opts_.count(name) && opts_.at(name)->count() > 0) || config_.contains(name);
    }
    std::string get(const std::string& name, const std::string& def) const {
        if (opts_.at(name)->count() > 0) return raw_.at(name);
        if (config_.contains(name)) return json_to_string(config_[name]);
        return def;
    }
    bool get_flag(const std::string& name) const {
        if (flags_.at(name)->count() > 0) return true;
        if (config_.contains(name)) {
            if (!config_[name].is_boolean()) throw ConfigError("config: '" + name + "' must be a boolean");
            return config_[name].get<bool>();
        }
        return false;
    }

private:
    CLI::App* app_;
    std::string config_path_;
    json config_;
    std::map<std::string, std::string> raw_;
    std::map<std::string, CLI::Option*> opts_;
    std::map<std::string, CLI::Option*> flags_;
};

using Params = std::vector<std::pair<std::string, std::string>>;

void write_header(std::ostream& os, const std::string& command, const Params& params) {
    os << "# impedance " << kVersion << "\n# command=" << command << "\n";
    for (const auto& [k, v] : params) os << "# " << k << "=" << v << "\n";
}

std::string cstr(cplx z) { return fmt(z.real()) + "," + fmt(z.imag()); }

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f.precision(17);
    return f;
}

// ------------------------------------------------------------ greens

struct SuiteResult {
    std::string name;
    double value;
    double threshold;
    bool ok() const { return value <= threshold; }
};

std::vector<SuiteResult> greens_selftest(const Medium& m, double tol, std::uint64_t seed) {
    const EvalConfig cfg = make_eval_config(m, tol);
    const HybridGreens hg(m, cfg);
    std::vector<SuiteResult> res;

    double worst = 0.0;
    for (double y0 : {1e-4, 1e-2, 1.0, 5.0})
        for (int i = 0; i < 40; ++i) {
            const Vec2 x{-3.0 + 6.0 * i / 39.0, 0.0}, x0{0.0, y0};
            if (x.x == x0.x) continue;
            const cplx g = hg.value(x, x0);
            const Grad2 d = hg.grad(x, x0);
            worst = std::max(worst, std::abs(-d.dy - kI * m.alpha * g) / (std::abs(m.k) * std::abs(g)));
        }
    res.push_back({"impedance_residual", worst, 1e-9});

    Lcg64 rng(seed);
    worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Vec2 a{rng.uniform(-3, 3), rng.uniform(0.01, 5)}, b{rng.uniform(-3, 3), rng.uniform(0.01, 5)};
        const cplx g1 = hg.value(a, b), g2 = hg.value(b, a);
        worst = std::max(worst, std::abs(g1 - g2) / std::abs(g1));
    }
    res.push_back({"reciprocity", worst, 1e-9});

    worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double Y = rng.uniform(0.5, 10.0), f = rng.uniform();
        const Vec2 x{rng.uniform(-3, 3), f * Y}, x0{rng.uniform(-3, 3), (1.0 - f) * Y};
        if (!(x0.y > 0.0)) continue;
        const ContourRule oc = sommerfeld_oracle_contour(m, Y);
        const OracleValue o = sommerfeld_scattered(x, x0, m, oc);
        worst = std::max(worst, std::abs(hg.scattered(x, x0).value - o.value));
    }
    res.push_back({"oracle_equivalence", worst, 1e-10});
    return res;
}

int cmd_greens(const Options& o, std::ostream& out, const std::vector<std::string>& point_args) {
    Medium m;
    m.k = parse_complex(o.get("k", "10.2"), "k");
    m.alpha = parse_complex(o.get("alpha", "2.04"), "alpha");
    m.C = parse_double(o.get("capC", "1"), "capC");
    const double tol = parse_double(o.get("tol", "1e-11"), "tol");
    const auto seed = static_cast<std::uint64_t>(parse_int(o.get("seed", "1"), "seed"));
    try {
        validate_medium(m);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(tol > 0.0)) throw ConfigError("--tol must be positive");

    if (o.get_flag("selftest")) {
        bool all = true;
        for (const SuiteResult& s : greens_selftest(m, tol, seed)) {
            out << s.name << " max_deviation=" << fmt(s.value, 3) << " threshold=" << fmt(s.threshold, 3)
                << (s.ok() ? " ok" : " FAILED") << "\n";
            all = all && s.ok();
        }
        return all ? kExitOk : kExitFailed;
    }

    const Vec2 src = parse_vec2(o.get("source", "0,5"), "source");
    if (!(src.y > 0.0)) throw ConfigError("--source needs y > 0");
    const bool gradient = o.get_flag("gradient");
    const bool strict = o.get_flag("strict");
    std::vector<Vec2> pts;
    const bool explicit_points = !point_args.empty();
    for (const std::string& p : point_args) {
        pts.push_back(parse_vec2(p, "point"));
        if (pts.back().y < 0.0) throw ConfigError("--point must have y >= 0");
    }
    const std::string grid_spec = o.get("grid", "-10,10,0,10,200,200");
    if (!explicit_points) pts = parse_grid(grid_spec).points();

    const EvalConfig cfg = make_eval_config(m, tol);
    const HybridGreens hg(m, cfg);
    Params params{{"k", cstr(m.k)}, {"alpha", cstr(m.alpha)}, {"capC", fmt(m.C)},
                  {"source", fmt(src.x) + "," + fmt(src.y)}, {"tol", fmt(tol)},
                  {"contour_t_max", fmt(cfg.contour.t_max)}, {"contour_nodes", std::to_string(cfg.contour.count())}};
    if (!explicit_points) params.push_back({"grid", grid_spec});

    std::ostringstream csv;
    csv.precision(17);
    write_header(csv, "greens", params);
    csv << "x,y,re,im" << (gradient ? ",re_gx,im_gx,re_gy,im_gy" : "") << "\n";
    double worst_residual = 0.0;
    for (const Vec2& x : pts) {
        csv << fmt(x.x) << "," << fmt(x.y) << ",";
        if (x.x == src.x && x.y == src.y) {
            csv << "nan,nan" << (gradient ? ",nan,nan,nan,nan" : "") << "\n";
            continue;
        }
        const cplx g = hg.value(x, src);
        csv << cstr(g);
        if (gradient || x.y == 0.0) {
            const Grad2 d = hg.grad(x, src);
            if (gradient) csv << "," << cstr(d.dx) << "," << cstr(d.dy);
            if (x.y == 0.0)
                worst_residual = std::max(worst_residual, std::abs(-d.dy - kI * m.alpha * g) / (std::abs(m.k) * std::abs(g)));
        }
        csv << "\n";
    }

    const std::string outp = o.get("out", explicit_points ? "" : "greens");
    if (explicit_points) {
        for (const Vec2& x : pts) {
            if (x.x == src.x && x.y == src.y) continue;
            const cplx g = hg.value(x, src);
            out << fmt(x.x, 12) << "," << fmt(x.y, 12) << "," << fmt(g.real(), 12) << "," << fmt(g.imag(), 12) << "\n";
        }
    }
    if (!outp.empty()) {
        std::ofstream f = open_out(outp + ".csv");
        f << csv.str();
        out << "wrote " << outp << ".csv (" << pts.size() << " points)\n";
    }
    if (worst_residual > 0.0) out << "interface_residual_max=" << fmt(worst_residual, 3) << "\n";
    if (hg.endpoint_warning()) {
        out << "warning: contour endpoint magnitude above the accuracy target\n";
        if (strict) return kExitStrict;
    }
    return kExitOk;
}

// ------------------------------------------------------------ scatter / converge

struct ScatterSetup {
    ScatterProblem problem;
    std::string curve;
    Vec2 target;
    double gmres_tol;
    int max_iter;
    Params params;
};

ScatterSetup scatter_setup(const Options& o) {
    ScatterSetup s;
    s.curve = o.get("curve", "flower");
    ParametricCurve curve;
    try {
        curve = builtin_curve(s.curve);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const bool open = curve.kind == CurveKind::open;
    // Default experiment parameters per curve.
    std::string dk = "10.2", da = "2.04", dsrc = "-2,2", dtarget = "0,5";
    if (s.curve == "perturb1") dk = "5.7", da = "0.855", dsrc = "3,3", dtarget = "-2,4";
    if (s.curve == "perturb2") dk = "31.7", da = "5.389", dsrc = "3.5,4", dtarget = "-2,5";
    const std::string kind_s = o.get("kind", open ? "perturbed" : "dirichlet");
    ProblemKind kind;
    try {
        kind = parse_problem_kind(kind_s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    Medium m;
    m.k = parse_complex(o.get("k", dk), "k");
    m.alpha = parse_complex(o.get("alpha", da), "alpha");
    m.C = parse_double(o.get("capC", "1"), "capC");
    const int n = parse_int(o.get("n", open ? "4000" : (s.curve == "flower_near" ? "1500" : "500")), "n");
    QbxConfig q;
    q.order = parse_int(o.get("qbx-order", s.curve == "flower_near" ? "20" : "16"), "qbx-order");
    if (q.order < 1 || q.order > 50) throw ConfigError("--qbx-order must be in 1..50");
    s.gmres_tol = parse_double(o.get("gmres-tol", "1e-10"), "gmres-tol");
    s.max_iter = parse_int(o.get("max-iter", "500"), "max-iter");
    if (s.max_iter < 1) throw ConfigError("--max-iter must be positive");
    const double tol = parse_double(o.get("tol", "1e-11"), "tol");
    if (!(s.gmres_tol > 0.0) || !(tol > 0.0)) throw ConfigError("tolerances must be positive");
    s.target = parse_vec2(o.get("target", dtarget), "target");
    try {
        validate_medium(m);
        s.problem = make_problem(kind, s.curve, n, m, parse_vec2(o.get("source", dsrc), "source"), q);
        s.problem.eval_tol = tol;
        if (o.given("interior-source"))
            s.problem.interior_source = parse_vec2(o.get("interior-source", ""), "interior-source");
        validate_problem(s.problem);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const ScatterProblem& p = s.problem;
    s.params = {{"kind", to_string(kind)}, {"curve", s.curve}, {"n", std::to_string(n)},
                {"k", cstr(m.k)}, {"alpha", cstr(m.alpha)}, {"capC", fmt(m.C)},
                {"source", fmt(p.source.x) + "," + fmt(p.source.y)},
                {"qbx_order", std::to_string(q.order)}, {"qbx_radius", fmt(q.radius_factor) + "h"},
                {"gmres_tol", fmt(s.gmres_tol)}, {"max_iter", std::to_string(s.max_iter)}, {"tol", fmt(tol)},
                {"target", fmt(s.target.x) + "," + fmt(s.target.y)}};
    if (p.interior_source)
        s.params.push_back({"interior_source", fmt(p.interior_source->x) + "," + fmt(p.interior_source->y)});
    return s;
}

// Whether x lies in the physical region (outside the obstacle, above the interface).
bool in_domain(const DiscreteBoundary& b, Vec2 x) {
    if (x.y < 0.0) return false;
    if (!b.closed()) return !(x.x >= b.curve.t0 && x.x <= b.curve.t1 && x.y <= b.curve.position(x.x).y);
    double wind = 0.0;
    for (int j = 0; j < b.n; ++j) {
        const Vec2 a = b.points[j] - x, c = b.points[(j + 1) % b.n] - x;
        wind += std::atan2(a.x * c.y - a.y * c.x, a.x * c.x + a.y * c.y);
    }
    return std::abs(wind) < kPi;
}

int cmd_scatter(const Options& o, std::ostream& out) {
    const ScatterSetup s = scatter_setup(o);
    const ScatterProblem& p = s.problem;
    std::vector<Vec2> grid_pts;
    std::string grid_spec;
    if (o.given("grid")) {
        grid_spec = o.get("grid", "");
        grid_pts = parse_grid(grid_spec).points();
    }
    const std::string prefix = o.get("out", "scatter");

    const SolveResult r = solve(p, s.gmres_tol, s.max_iter);
    const FieldSample t = eval_field(p, r, {s.target}).front();
    const DiscreteBoundary& b = p.boundary;

    std::ofstream dens = open_out(prefix + "_density.csv");
    write_header(dens, "scatter", s.params);
    dens << "t,arclength,re_sigma,im_sigma\n";
    double arc = 0.0;
    for (int j = 0; j < b.n; ++j) {
        if (j > 0) arc += 0.5 * (b.speed[j - 1] + b.speed[j]) * b.dt;
        dens << fmt(b.t[j]) << "," << fmt(arc) << "," << cstr(r.density[j]) << "\n";
    }

    if (!grid_pts.empty()) {
        std::vector<Vec2> inside;
        std::vector<int> where(grid_pts.size(), -1);
        for (std::size_t i = 0; i < grid_pts.size(); ++i)
            if (in_domain(b, grid_pts[i]) && std::hypot(grid_pts[i].x - p.source.x, grid_pts[i].y - p.source.y) > 0.0) {
                where[i] = static_cast<int>(inside.size());
                inside.push_back(grid_pts[i]);
            }
        const std::vector<FieldSample> f = eval_field(p, r, inside);
        std::ofstream g = open_out(prefix + "_field.csv");
        Params gp = s.params;
        gp.push_back({"grid", grid_spec});
        write_header(g, "scatter", gp);
        g << "x,y,re,im\n";
        for (std::size_t i = 0; i < grid_pts.size(); ++i) {
            g << fmt(grid_pts[i].x) << "," << fmt(grid_pts[i].y) << ",";
            if (where[i] < 0)
                g << "nan,nan\n";
            else
                g << cstr(f[where[i]].total) << "\n";
        }
    }

    json rep;
    rep["version"] = kVersion;
    for (const auto& [k, v] : s.params) rep["parameters"][k] = v;
    rep["n"] = b.n;
    rep["iterations"] = r.iterations;
    rep["residual"] = r.residual;
    rep["converged"] = r.converged;
    rep["sigma_l2"] = r.sigma_l2;
    rep["target"] = {s.target.x, s.target.y};
    rep["target_value"] = {t.total.real(), t.total.imag()};
    if (p.interior_source) {
        const cplx exact = -t.incident;
        rep["relative_error"] = std::abs(t.scattered - exact) / std::abs(exact);
    }
    std::ofstream js = open_out(prefix + "_report.json");
    js << rep.dump(2) << "\n";

    out << "n=" << b.n << " iterations=" << r.iterations << " residual=" << fmt(r.residual, 3)
        << " sigma_l2=" << fmt(r.sigma_l2, 6) << " u(" << fmt(s.target.x, 6) << "," << fmt(s.target.y, 6)
        << ")=" << fmt(t.total.real(), 12) << "," << fmt(t.total.imag(), 12) << "\n";
    if (p.interior_source) out << "relative_error=" << fmt(rep["relative_error"].get<double>(), 3) << "\n";
    out << "assembly_seconds=" << fmt(r.assembly_seconds, 3) << " solve_seconds=" << fmt(r.solve_seconds, 3) << "\n";
    if (r.resonance_suspect) out << "warning: iteration count suggests a near-resonant wavenumber\n";
    if (!r.converged) {
        out << "GMRES did not reach the tolerance\n";
        return kExitNoConvergence;
    }
    if (r.resonance_suspect && o.get_flag("strict")) return kExitStrict;
    return kExitOk;
}

int cmd_converge(const Options& o, std::ostream& out) {
    ScatterSetup s = scatter_setup(o);
    std::vector<int> ns;
    for (double v : parse_list(o.get("ns", "250,500,1000"), "ns")) {
        if (v != std::floor(v)) throw ConfigError("--ns: integers expected");
        ns.push_back(static_cast<int>(v));
    }
    if (ns.empty()) throw ConfigError("--ns: empty list");
    const std::string prefix = o.get("out", "converge");

    struct Run {
        ScatterProblem p;
        SolveResult r;
        cplx u;
    };
    std::vector<Run> runs;
    bool all_converged = true;
    for (int n : ns) {
        Run run;
        run.p = s.problem;
        try {
            run.p.boundary = discretize(builtin_curve(s.curve), n);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        run.r = solve(run.p, s.gmres_tol, s.max_iter);
        all_converged = all_converged && run.r.converged;
        run.u = eval_field(run.p, run.r, {s.target}).front().total;
        out << "n=" << n << " iterations=" << run.r.iterations << " sigma_l2=" << fmt(run.r.sigma_l2, 8)
            << " seconds=" << fmt(run.r.assembly_seconds + run.r.solve_seconds, 3) << "\n";
        runs.push_back(std::move(run));
    }

    Params params = s.params;
    params.erase(std::remove_if(params.begin(), params.end(), [](const auto& kv) { return kv.first == "n"; }),
                 params.end());
    params.push_back({"ns", o.get("ns", "250,500,1000")});
    std::ofstream f = open_out(prefix + ".csv");
    write_header(f, "converge", params);
    f << "n,iterations,sigma_l2,density_change,target_change,re_u,im_u\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const Run& c = runs[i];
        std::string dchg = "nan", tchg = "nan";
        if (i + 1 < runs.size()) {
            const Run& fne = runs[i + 1];
            double num = 0.0, den = 0.0;
            const DiscreteBoundary& bc = c.p.boundary;
            for (int j = 0; j < bc.n; ++j) {
                const cplx ref = interpolate_density(fne.p.boundary, fne.r.density, bc.t[j]);
                num += bc.weights[j] * std::norm(c.r.density[j] - ref);
                den += bc.weights[j] * std::norm(ref);
            }
            dchg = fmt(std::sqrt(num / den));
            tchg = fmt(std::abs(c.u - fne.u) / std::abs(fne.u));
        }
        f << c.p.boundary.n << "," << c.r.iterations << "," << fmt(c.r.sigma_l2) << "," << dchg << "," << tchg << ","
          << cstr(c.u) << "\n";
        out << "n=" << c.p.boundary.n << " density_change=" << dchg << " target_change=" << tchg << "\n";
    }
    return all_converged ? kExitOk : kExitNoConvergence;
}

// ------------------------------------------------------------ bench

int cmd_bench(const Options& o, std::ostream& out) {
    const std::vector<double> sizes_d = parse_list(o.get("sizes", "100,200,400,800,1600,3200,6400"), "sizes");
    const std::string region = o.get("region", "both");
    if (region != "far" && region != "near" && region != "both") throw ConfigError("--region: far, near or both");
    Medium m;
    m.k = parse_complex(o.get("k", "10.2"), "k");
    m.alpha = parse_complex(o.get("alpha", "2.04"), "alpha");
    m.C = parse_double(o.get("capC", "1"), "capC");
    try {
        validate_medium(m);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const double image_eps = parse_double(o.get("image-eps", "1e-10"), "image-eps");
    const int backend_max = parse_int(o.get("backend-max", "800"), "backend-max");
    const double tol = parse_double(o.get("tol", "1e-11"), "tol");
    const auto seed = static_cast<std::uint64_t>(parse_int(o.get("seed", "1"), "seed"));
    const bool skip_backend = o.get_flag("skip-backend");
    const std::string prefix = o.get("out", "bench");
    const EvalConfig cfg = make_eval_config(m, tol);
    const HybridGreens hg(m, cfg);

    std::ofstream f = open_out(prefix + ".csv");
    write_header(f, "bench",
                 {{"k", cstr(m.k)}, {"alpha", cstr(m.alpha)}, {"capC", fmt(m.C)}, {"image_eps", fmt(image_eps)},
                  {"seed", std::to_string(seed)}, {"rng", "lcg64 a=6364136223846793005 c=1442695040888963407"},
                  {"contour_nodes", std::to_string(cfg.contour.count())}});
    f << "region,N,M,m_image,m_image_eps,t_backend,t_sommerfeld,t_total,spot_deviation\n";
    out << "region     N     M   m_image  m_image_eps  t_backend  t_sommerfeld  t_total  spot_dev\n";

    ImagePolicy eps_policy;
    eps_policy.eps = image_eps;
    eps_policy.scale_by_log_eps = true;
    bool spot_ok = true;
    std::vector<std::string> regions = region == "both" ? std::vector<std::string>{"far", "near"}
                                                        : std::vector<std::string>{region};
    for (const std::string& reg : regions)
        for (double sd : sizes_d) {
            const int N = static_cast<int>(sd);
            if (N < 1) throw ConfigError("--sizes: positive integers expected");
            Lcg64 rng(seed);
            const double ylo = reg == "far" ? 2.0 : 0.0, yhi = reg == "far" ? 3.0 : 1.0;
            SourceBatch batch;
            std::vector<Vec2> targets;
            for (int i = 0; i < N; ++i) {
                double y = rng.uniform(ylo, yhi);
                if (y == 0.0) y = 0.5 * yhi;
                batch.locations.push_back({rng.uniform(-1, 1), y});
                batch.strengths.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
            }
            for (int i = 0; i < N; ++i) targets.push_back({rng.uniform(-1, 1), rng.uniform(ylo, yhi)});
            const long m_img = expand_images(batch, m).image_count();
            const long m_img_eps = expand_images(batch, m, eps_policy).image_count();

            double t_som = 1e300;
            for (int rep = 0; rep < 3; ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                const std::vector<cplx> u = sommerfeld_batch(batch, targets, m, cfg.contour);
                t_som = std::min(t_som, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
            std::string t_back = "nan", t_tot = "nan", spot = "nan";
            if (!skip_backend && N <= backend_max) {
                const BatchResult br = eval_potential_batch(batch, targets, m, cfg, DirectBackend());
                t_back = fmt(br.t_backend, 4);
                t_tot = fmt(br.t_total, 4);
                double dev = 0.0, scale = 0.0;
                for (int c = 0; c < 10; ++c) {
                    const int l = static_cast<int>(rng.uniform() * N);
                    cplx ref = 0.0;
                    for (int j = 0; j < N; ++j) ref += batch.strengths[j] * hg.value(targets[l], batch.locations[j]);
                    dev = std::max(dev, std::abs(ref - br.values[l]));
                    scale = std::max(scale, std::abs(ref));
                }
                spot = fmt(dev / scale, 3);
                spot_ok = spot_ok && dev / scale <= 1e-10;
            }
            f << reg << "," << N << "," << N << "," << m_img << "," << m_img_eps << "," << t_back << ","
              << fmt(t_som, 4) << "," << t_tot << "," << spot << "\n";
            char line[256];
            std::snprintf(line, sizeof line, "%-6s %5d %5d %9ld %12ld %10s %13.4g %8s %9s\n", reg.c_str(), N, N,
                          m_img, m_img_eps, t_back.c_str(), t_som, t_tot.c_str(), spot.c_str());
            out << line;
        }
    if (!spot_ok) {
        out << "spot check against hybrid_greens exceeded 1e-10\n";
        return kExitFailed;
    }
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Impedance half-space Helmholtz Green's functions and scattering solvers"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    auto physical = [](Options& o) {
        o.add("k", "wavenumber, 're' or 're,im'");
        o.add("alpha", "impedance parameter, 're' or 're,im'");
        o.add("capC", "length C of the real image segment");
        o.add("tol", "kernel evaluation tolerance");
        o.add("seed", "seed of the 64-bit LCG");
        o.add("out", "output file prefix");
    };

    CLI::App* greens = app.add_subcommand("greens", "evaluate the impedance Green's function");
    Options og(greens);
    physical(og);
    og.add("source", "source location x,y");
    og.add("grid", "x0,x1,y0,y1,nx,ny");
    std::vector<std::string> point_args;
    greens->add_option("--point", point_args, "evaluation point x,y (repeatable)");
    og.flag("gradient", "also write the gradient");
    og.flag("strict", "turn accuracy warnings into exit code 3");
    og.flag("selftest", "run the residual, reciprocity and oracle suites");

    auto problem = [&](Options& o) {
        physical(o);
        o.add("kind", "dirichlet, neumann or perturbed");
        o.add("curve", "flower, flower_near, perturb1 or perturb2");
        o.add("n", "number of boundary nodes");
        o.add("source", "incident point source x,y");
        o.add("interior-source", "x,y inside the obstacle: exactness test with a known solution");
        o.add("qbx-order", "QBX expansion order p");
        o.add("gmres-tol", "GMRES relative residual tolerance");
        o.add("max-iter", "GMRES iteration cap");
        o.add("target", "field sample point x,y for the report");
        o.flag("strict", "turn accuracy warnings into exit code 3");
    };
    CLI::App* scatter = app.add_subcommand("scatter", "solve a scattering problem");
    Options os(scatter);
    problem(os);
    os.add("grid", "field grid x0,x1,y0,y1,nx,ny");

    CLI::App* converge = app.add_subcommand("converge", "self-convergence study over several n");
    Options oc(converge);
    problem(oc);
    oc.add("ns", "comma separated list of node counts");

    CLI::App* bench = app.add_subcommand("bench", "batched evaluation timings");
    Options ob(bench);
    physical(ob);
    ob.add("sizes", "comma separated N = M values");
    ob.add("region", "far, near or both");
    ob.add("image-eps", "eps of the log-scaled image count that is reported alongside");
    ob.add("backend-max", "largest size for which the direct point-sum backend is run");
    ob.flag("skip-backend", "time only the separated Sommerfeld sum");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(kVersion) + "\n" : app.help());
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (greens->parsed()) {
            og.load_config();
            return cmd_greens(og, out, point_args);
        }
        if (scatter->parsed()) {
            os.load_config();
            return cmd_scatter(os, out);
        }
        if (converge->parsed()) {
            oc.load_config();
            return cmd_converge(oc, out);
        }
        if (bench->parsed()) {
            ob.load_config();
            return cmd_bench(ob, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailed;
    }
    return kExitConfig;
}

}  // namespace impedance::cli
