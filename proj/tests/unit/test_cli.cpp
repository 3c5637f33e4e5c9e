#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli_app.hpp"
#include "impedance/greens.hpp"

using namespace impedance;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "impedance_cli");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("impedance_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("greens --point with alpha = 0 prints the two-term value to 12 digits") {
    const Run r = run({"greens", "--k", "10.2", "--alpha", "0", "--source", "0,5", "--point", "1,2"});
    REQUIRE(r.code == cli::kExitOk);
    double x, y, re, im;
    char c;
    std::istringstream line(r.out);
    line >> x >> c >> y >> c >> re >> c >> im;
    const cplx two = gk_free({1, 2}, {0, 5}, 10.2) + gk_free({1, 2}, {0, -5}, 10.2);
    CHECK(std::abs(cplx(re, im) - two) < 1e-12);
}

TEST_CASE("greens --selftest passes for the default medium") {
    const Run r = run({"greens", "--selftest"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("reciprocity") != std::string::npos);
    CHECK(r.out.find("FAILED") == std::string::npos);
}

TEST_CASE("greens grid file: header, columns and interface residual") {
    const fs::path d = scratch_dir("grid");
    const Run r = run({"greens", "--grid", "-10,10,0,10,21,3", "--gradient", "--out", (d / "g").string()});
    REQUIRE(r.code == cli::kExitOk);
    const std::string csv = slurp(d / "g.csv");
    CHECK(csv.rfind("# impedance 0.1.0\n", 0) == 0);
    CHECK(csv.find("# k=10.2,0\n") != std::string::npos);
    CHECK(csv.find("\nx,y,re,im,re_gx,im_gx,re_gy,im_gy\n") != std::string::npos);
    const auto pos = r.out.find("interface_residual_max=");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(r.out.substr(pos + 23)) <= 1e-9);
}

TEST_CASE("invalid input maps to exit code 2") {
    CHECK(run({"greens", "--k", "-3"}).code == cli::kExitConfig);
    CHECK(run({"greens", "--source", "0,-1", "--point", "1,1"}).code == cli::kExitConfig);
    CHECK(run({"greens", "--grid", "0,1,0,1,0,3"}).code == cli::kExitConfig);
    CHECK(run({"greens", "--no-such-flag"}).code == cli::kExitConfig);
    CHECK(run({"scatter", "--curve", "teapot"}).code == cli::kExitConfig);
    CHECK(run({"scatter", "--curve", "flower", "--kind", "perturbed"}).code == cli::kExitConfig);
    CHECK(run({}).code == cli::kExitConfig);
}

TEST_CASE("config file values apply and flags override them") {
    const fs::path d = scratch_dir("config");
    std::ofstream(d / "c.json") << R"({"k": 5.7, "alpha": [0.855, 0], "source": "0,2"})";
    const Run a = run({"greens", "--config", (d / "c.json").string(), "--point", "1,1"});
    const Run b = run({"greens", "--k", "5.7", "--alpha", "0.855", "--source", "0,2", "--point", "1,1"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const Run c = run({"greens", "--config", (d / "c.json").string(), "--k", "10.2", "--point", "1,1"});
    const Run e = run({"greens", "--k", "10.2", "--alpha", "0.855", "--source", "0,2", "--point", "1,1"});
    CHECK(c.out == e.out);
    std::ofstream(d / "bad.json") << R"({"wavenumber": 3})";
    CHECK(run({"greens", "--config", (d / "bad.json").string()}).code == cli::kExitConfig);
    CHECK(run({"greens", "--config", (d / "missing.json").string()}).code == cli::kExitConfig);
}

TEST_CASE("scatter writes density, field and report, deterministically") {
    const fs::path d = scratch_dir("scatter");
    const std::vector<std::string> args{"scatter", "--kind", "dirichlet", "--curve", "flower", "--n", "200",
                                        "--interior-source", "1.1,2.0", "--grid", "-1,3,0,4,5,5"};
    auto with_out = [&](const std::string& p) {
        std::vector<std::string> a = args;
        a.push_back("--out");
        a.push_back((d / p).string());
        return a;
    };
    REQUIRE(run(with_out("a")).code == cli::kExitOk);
    REQUIRE(run(with_out("b")).code == cli::kExitOk);
    for (const char* suffix : {"_density.csv", "_field.csv", "_report.json"})
        CHECK(slurp(d / (std::string("a") + suffix)) == slurp(d / (std::string("b") + suffix)));
    const std::string dens = slurp(d / "a_density.csv");
    CHECK(dens.find("\nt,arclength,re_sigma,im_sigma\n") != std::string::npos);
    const auto rep = nlohmann::json::parse(slurp(d / "a_report.json"));
    CHECK(rep["n"] == 200);
    CHECK(rep["converged"] == true);
    CHECK(rep["relative_error"].get<double>() <= 1e-8);
    CHECK(rep["parameters"]["curve"] == "flower");
    // Grid nodes inside the obstacle are marked, not evaluated.
    CHECK(slurp(d / "a_field.csv").find("nan,nan") != std::string::npos);
}

TEST_CASE("scatter reports GMRES failure with exit code 4") {
    const fs::path d = scratch_dir("noconv");
    const Run r = run({"scatter", "--n", "150", "--max-iter", "5", "--out", (d / "x").string()});
    CHECK(r.code == cli::kExitNoConvergence);
}

TEST_CASE("converge with a repeated n reports zero change") {
    const fs::path d = scratch_dir("converge");
    const Run r = run({"converge", "--ns", "150,150", "--out", (d / "c").string()});
    REQUIRE(r.code == cli::kExitOk);
    const std::string csv = slurp(d / "c.csv");
    CHECK(csv.find("\n150,") != std::string::npos);
    CHECK(r.out.find("density_change=0 target_change=0") != std::string::npos);
}

TEST_CASE("bench reports both image counts and a clean spot check") {
    const fs::path d = scratch_dir("bench");
    const Run r = run({"bench", "--sizes", "100", "--region", "far", "--out", (d / "b").string()});
    REQUIRE(r.code == cli::kExitOk);
    const std::string csv = slurp(d / "b.csv");
    CHECK(csv.find("# rng=lcg64") != std::string::npos);
    CHECK(csv.find("\nfar,100,100,") != std::string::npos);
    CHECK(csv.find(",12900,") != std::string::npos);
}
