#pragma once

// Problem-file ingestion.  Files use a small TOML subset: [section] headers
// and key = value lines, where a value is a quoted string, a number, a bool,
// or a single-line array of quoted strings.  Expression values hold the same
// surface syntax the parser module accepts.
//
//   [chart]
//   coords = "t:time, q:position, v:velocity, s:action"
//   params = "g"
//
//   [params]
//   g = 0.2
//
//   [model]
//   lagrangian = "v^2/2 - q^2/2 - g*s"
//
//   [pipeline]
//   stage = "herglotz"        # lagrangian | herglotz | modified | cocontact
//                             # | unified
//   [constraints]
//   I0 = ["..."]
//   I1nh = ["..."]
//
//   [gauge]
//   v = "1"
//
//   [integrate]
//   x0 = "t=0, q=1, v=0, s=0"
//   span = 10.0
//   step = 0.001
//
//   [monitors]
//   energy = "drift: (q^2+v^2)/2"
//   dissipation = "residual: ..."
//
//   [verify]
//   mode = "cocontact-pair"   # | variation-pair | absorption
//                             # | herglotz-absorption
//   corrupt = false

#include "varigeo/excalc.hpp"

#include <optional>

namespace varigeo::problemfile {

struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProblemFile {
    excalc::Chart chart;
    std::map<std::string, double> params;
    std::optional<std::string> lagrangian;
    std::optional<std::string> hamiltonian;
    std::vector<std::string> functions;  // declared opaque, "name(dep,dep)"
    std::vector<std::string> I0;
    std::vector<std::string> I1nh;
    std::string stage = "lagrangian";
    std::map<std::string, std::string> gauge;    // coordinate -> value text
    std::map<std::string, std::string> monitors; // name -> "kind: expr"
    std::optional<std::map<std::string, double>> x0;
    double span = 1.0;
    double step = 1e-3;
    std::string verify_mode;
    bool corrupt = false;
};

ProblemFile load_problem(const std::string& path);
ProblemFile parse_problem(const std::string& text);

}  // namespace varigeo::problemfile
