#pragma once

// Deterministic random generators shared by the property suites.

#include "varigeo/excalc.hpp"

#include <random>

namespace fuzz {

using varigeo::excalc::Chart;
using varigeo::excalc::DiffForm;
using varigeo::excalc::VecField;
using varigeo::symexpr::Expr;
using varigeo::symexpr::sym;

using Rng = std::mt19937_64;

// small random polynomial over the given symbols
inline Expr poly(Rng& rng, const std::vector<std::string>& vars,
                 int terms = 3, int max_deg = 2) {
    std::uniform_int_distribution<int> coeff(-4, 4);
    std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
    std::uniform_int_distribution<int> deg(0, max_deg);
    std::uniform_int_distribution<int> nvars(0, 2);
    Expr e;
    for (int i = 0; i < terms; ++i) {
        Expr m(static_cast<long long>(coeff(rng)));
        int k = nvars(rng);
        for (int j = 0; j < k; ++j) {
            int d = deg(rng);
            if (d > 0) m = m * sym(vars[pick(rng)]).pow(d);
        }
        e += m;
    }
    return e;
}

inline std::vector<std::string> names(const Chart& chart) {
    std::vector<std::string> out;
    for (auto& c : chart.coords()) out.push_back(c.name);
    return out;
}

// random form of the given degree with 1-3 sparse terms
inline DiffForm form(Rng& rng, const Chart& chart, int degree, int terms = 2) {
    auto vars = names(chart);
    int n = static_cast<int>(chart.dim());
    std::uniform_int_distribution<int> idx(0, n - 1);
    std::map<std::vector<int>, Expr> table;
    for (int k = 0; k < terms; ++k) {
        std::set<int> tuple;
        while (static_cast<int>(tuple.size()) < degree) tuple.insert(idx(rng));
        std::vector<int> key(tuple.begin(), tuple.end());
        table[key] = table.count(key) ? table[key] + poly(rng, vars)
                                      : poly(rng, vars);
    }
    return DiffForm(degree, std::move(table));
}

inline VecField field(Rng& rng, const Chart& chart) {
    auto vars = names(chart);
    std::map<std::string, Expr> comps;
    for (auto& v : vars) comps[v] = poly(rng, vars, 2, 2);
    return VecField(std::move(comps));
}

}  // namespace fuzz
