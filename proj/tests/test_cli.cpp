#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "varigeo/cli.hpp"
#include "varigeo/problemfile.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using varigeo::cli::Options;
using varigeo::cli::run;

namespace {

std::string problems(const std::string& name) {
    return std::string(PROBLEMS_DIR) + "/" + name;
}

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(const std::string& command, const std::string& file,
               Options opts = {}) {
    std::ostringstream out, err;
    int code = run(command, file, opts, out, err);
    return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
    std::string path = "cli_tmp_" + name;
    std::ofstream f(path);
    f << text;
    return path;
}

}  // namespace

TEST_CASE("problem file parsing") {
    using varigeo::problemfile::parse_problem;
    using varigeo::problemfile::FileError;
    auto p = parse_problem(
        "[chart]\n"
        "coords = \"t:time, q:position, v:velocity\"  # roles\n"
        "params = \"g\"\n"
        "[params]\ng = 0.5\n"
        "[model]\nlagrangian = \"v^2/2\"\n"
        "[constraints]\nI0 = [\"q - 1\", \"v\"]\n"
        "[integrate]\nx0 = \"t=0, q=1, v=0\"\nspan = 2.5\n");
    CHECK(p.chart.dim() == 3);
    CHECK(p.params.at("g") == 0.5);
    CHECK(p.I0.size() == 2);
    CHECK(p.span == 2.5);
    REQUIRE(p.x0.has_value());
    CHECK(p.x0->at("q") == 1.0);

    CHECK_THROWS_AS(parse_problem("coords = \"t:time\"\n"), FileError);
    CHECK_THROWS_AS(parse_problem("[chart]\ncoords = \"t:clock\"\n"), FileError);
    CHECK_THROWS_AS(parse_problem("[chart]\ncoords = \"t:time\"\n[x]\nbroken\n"),
                    FileError);
}

TEST_CASE("derive reports unique dynamics") {
    auto r = run_cli("derive", problems("damped_oscillator.toml"));
    CHECK(r.code == 0);
    CHECK(r.out.find("\"verdict\": \"unique\"") != std::string::npos);
    CHECK(r.out.find("\"-g*v - q\"") != std::string::npos);
    CHECK(r.out.find("\"seed\": 20240817") != std::string::npos);
    CHECK(r.out.find("\"trials\": 8") != std::string::npos);
}

TEST_CASE("derive is deterministic") {
    auto a = run_cli("derive", problems("cocontact_oscillator.toml"));
    auto b = run_cli("derive", problems("cocontact_oscillator.toml"));
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("classify surfaces the structure flags") {
    auto r = run_cli("classify", problems("damped_oscillator.toml"));
    CHECK(r.code == 0);
    CHECK(r.out.find("\"hessian_regular\": true") != std::string::npos);
    CHECK(r.out.find("\"lcs\": true") != std::string::npos);

    std::string vs = write_temp(
        "vs.toml",
        "[chart]\ncoords = \"t:time, q:position, v:velocity, s:action\"\n"
        "[model]\nlagrangian = \"v*s\"\n");
    auto rv = run_cli("classify", vs);
    CHECK(rv.code == 0);
    CHECK(rv.out.find("eta_L: Reeb nonexistent") != std::string::npos);
    CHECK(rv.out.find("precontact: fails (see discrepancy note)") !=
          std::string::npos);
}

TEST_CASE("inconsistent dynamics exit 5 but still report") {
    auto r = run_cli("derive", problems("inconsistent_tv.toml"));
    CHECK(r.code == 5);
    CHECK(r.out.find("\"verdict\": \"inconsistent\"") != std::string::npos);
    CHECK(r.out.find("\"witness\"") != std::string::npos);
}

TEST_CASE("integrate writes CSV matching the closed form") {
    Options opts;
    opts.out = "cli_vs_report.json";
    auto r = run_cli("integrate", problems("vs_gauge.toml"), opts);
    REQUIRE(r.code == 0);
    std::ifstream csv("cli_vs_report.csv");
    REQUIRE(csv.good());
    std::string line, last;
    std::getline(csv, line);
    CHECK(line.substr(0, 8) == "t,q,v,s,");
    while (std::getline(csv, line))
        if (!line.empty()) last = line;
    // s column: s0 e^t with s0 = 1
    std::istringstream row(last);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    CHECK(std::fabs(vals[3] - std::exp(vals[0])) / std::exp(vals[0]) < 1e-5);
}

TEST_CASE("gauge freedom without pinning exits 6") {
    std::string nogauge = write_temp(
        "nogauge.toml",
        "[chart]\ncoords = \"t:time, q:position, v:velocity, s:action\"\n"
        "[model]\nlagrangian = \"v*s\"\n"
        "[pipeline]\nstage = \"herglotz\"\n"
        "[integrate]\nx0 = \"t=0, q=0, v=1, s=1\"\n");
    auto r = run_cli("integrate", nogauge);
    CHECK(r.code == 6);
    CHECK(r.err.find("gauge freedom requires pinning") != std::string::npos);
}

TEST_CASE("verify modes pass and corrupt is caught") {
    CHECK(run_cli("verify", problems("cocontact_oscillator.toml")).code == 0);
    CHECK(run_cli("verify", problems("unified_oscillator.toml")).code == 0);
    auto r = run_cli("verify", problems("unified_oscillator.toml"));
    CHECK(r.out.find("pq - v") != std::string::npos);
    CHECK(run_cli("verify", problems("damped_oscillator.toml")).code == 0);

    std::string corrupt = write_temp(
        "corrupt.toml",
        "[chart]\ncoords = \"t:time, q:position, p:momentum, s:action\"\n"
        "[model]\nhamiltonian = \"p^2/2 + q^2/2\"\n"
        "[verify]\nmode = \"cocontact-pair\"\ncorrupt = true\n");
    auto rc = run_cli("verify", corrupt);
    CHECK(rc.code == 7);
}

TEST_CASE("input errors exit 2") {
    std::string bad = write_temp(
        "bad.toml",
        "[chart]\ncoords = \"t:time, q:position, v:velocity\"\n"
        "[model]\nlagrangian = \"v^2/2 +\"\n");
    CHECK(run_cli("derive", bad).code == 2);

    std::string notime = write_temp(
        "notime.toml",
        "[chart]\ncoords = \"q:position, v:velocity\"\n"
        "[model]\nlagrangian = \"v^2/2\"\n");
    CHECK(run_cli("derive", notime).code == 2);

    CHECK(run_cli("derive", "does_not_exist.toml").code == 2);
    CHECK(run_cli("frobnicate", problems("vs_gauge.toml")).code == 2);
}

TEST_CASE("opaque Hamiltonian derives the symbolic field") {
    std::string sym = write_temp(
        "symH.toml",
        "[chart]\ncoords = \"t:time, q:position, p:momentum, s:action\"\n"
        "[model]\nhamiltonian = \"D(Hf)\"\nfunctions = [\"Hf(q,p,s)\"]\n"
        "[pipeline]\nstage = \"cocontact\"\n");
    auto r = run_cli("derive", sym);
    CHECK(r.code == 0);
    CHECK(r.out.find("D(Hf,p)") != std::string::npos);
}
