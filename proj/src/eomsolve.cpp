#include "varigeo/eomsolve.hpp"

#include <sstream>

namespace varigeo::eomsolve {

using excalc::Role;
using excalc::iota;
using excalc::solve_linear;
using geomech::GVProblem;
using geomech::tau_form;
using geomech::time_coord;
using symexpr::is_zero;
using symexpr::sym;
using symexpr::ZeroVerdict;

std::string verdict_label(Verdict v) {
    switch (v) {
        case Verdict::Unique: return "unique";
        case Verdict::Gauge: return "gauge";
        case Verdict::Inconsistent: return "inconsistent";
        case Verdict::ConstrainedSurface: return "constrained-surface";
    }
    return "?";
}

namespace {

struct LinearSystem {
    std::vector<std::vector<Expr>> A;
    std::vector<Expr> b;
};

// Row <alpha, Z> = target for a 1-form alpha.
void add_one_form_row(LinearSystem& sys, const Chart& chart,
                      const DiffForm& alpha, const Expr& target) {
    std::size_t n = chart.dim();
    std::vector<Expr> row(n);
    for (std::size_t i = 0; i < n; ++i)
        row[i] = alpha.coeff({static_cast<int>(i)});
    sys.A.push_back(std::move(row));
    sys.b.push_back(target);
}

// Basis of variation fields xi for the contraction rows i_Z i_xi Omega.
std::vector<VecField> variation_fields(const Chart& chart,
                                       geomech::VariationClass variations,
                                       const std::vector<DiffForm>& I1nh,
                                       const LinSolveOptions& opts) {
    if (variations == geomech::VariationClass::AdmissibleReduced) {
        // vertical fields annihilating every nonholonomic form
        std::vector<DiffForm> ann{tau_form(chart)};
        for (auto& f : I1nh) ann.push_back(f);
        return excalc::kernel_basis(chart, ann, opts);
    }
    std::vector<VecField> out;
    int t = chart.index(time_coord(chart));
    for (int j = 0; j < static_cast<int>(chart.dim()); ++j) {
        if (variations == geomech::VariationClass::Vertical && j == t)
            continue;
        out.push_back(VecField::basis(chart.name(j)));
    }
    return out;
}

// Rows (i_xi Omega)(Z) = -(i_xi rhs) for the equation i_Z Omega = rhs.
void add_two_form_rows(LinearSystem& sys, const Chart& chart,
                       const DiffForm& Omega, const DiffForm& rhs,
                       const std::vector<VecField>& fields) {
    std::size_t n = chart.dim();
    for (auto& xi : fields) {
        DiffForm beta = iota(chart, xi, Omega);
        std::vector<Expr> row(n);
        for (std::size_t i = 0; i < n; ++i)
            row[i] = beta.coeff({static_cast<int>(i)});
        sys.A.push_back(std::move(row));
        sys.b.push_back(rhs.is_structural_zero()
                            ? Expr()
                            : -iota(chart, xi, rhs).scalar_value());
    }
}

Expr apply_subs(const Expr& e, const std::map<std::string, Expr>& subs) {
    return subs.empty() ? e : e.substitute(subs);
}

// Solve g = 0 for one chart coordinate in which g is linear with a decidedly
// nonzero coefficient.  Momenta (appended last) are preferred.
std::optional<std::pair<std::string, Expr>> eliminate_coordinate(
    const Chart& chart, const Expr& g, const LinSolveOptions& opts) {
    for (int i = static_cast<int>(chart.dim()) - 1; i >= 0; --i) {
        const std::string& c = chart.name(i);
        Expr dg = g.derivative(c);
        if (dg.is_structural_zero()) continue;
        if (!dg.derivative(c).is_structural_zero()) continue;  // not linear
        if (is_zero(dg, opts.zero) != ZeroVerdict::NonZero) continue;
        // g linear in c: the replacement c - g/dg is c-free
        return std::make_pair(c, sym(c) - g / dg);
    }
    return std::nullopt;
}

Dynamics classify_solution(const Chart& chart, LinearSystem sys,
                           const LinSolveOptions& opts,
                           std::string provenance) {
    Dynamics dyn;
    dyn.provenance = std::move(provenance);

    auto res = solve_linear(sys.A, sys.b, opts, &chart);
    if (!res.consistent) {
        dyn.verdict = Verdict::Inconsistent;
        dyn.witness = res.witness;
        return dyn;
    }

    std::map<std::string, Expr> subs;
    if (!res.residuals.empty()) {
        // one propagation pass: each residual cuts the surface g = 0 and
        // contributes a tangency row Z(g) = 0
        dyn.secondary = res.residuals;
        for (auto& g : dyn.secondary)
            if (auto sub = eliminate_coordinate(chart, g, opts))
                subs.emplace(sub->first, sub->second);
        for (auto& row : sys.A)
            for (auto& e : row) e = apply_subs(e, subs);
        for (auto& e : sys.b) e = apply_subs(e, subs);
        for (auto& g : dyn.secondary) {
            std::vector<Expr> row(chart.dim());
            for (std::size_t i = 0; i < chart.dim(); ++i)
                row[i] = apply_subs(g.derivative(chart.name(i)), subs);
            sys.A.push_back(std::move(row));
            sys.b.push_back(Expr());
        }
        res = solve_linear(sys.A, sys.b, opts, &chart);
        if (!res.consistent) {
            dyn.verdict = Verdict::Inconsistent;
            dyn.witness = res.witness;
            return dyn;
        }
        if (!res.residuals.empty()) {
            dyn.verdict = Verdict::ConstrainedSurface;
            for (auto& g : res.residuals) dyn.secondary.push_back(g);
        }
    }

    std::map<std::string, Expr> comps;
    for (std::size_t i = 0; i < chart.dim(); ++i)
        comps.emplace(chart.name(i), res.particular[i]);
    dyn.Z = VecField(std::move(comps));
    for (auto& k : res.kernel) {
        std::map<std::string, Expr> kc;
        for (std::size_t i = 0; i < chart.dim(); ++i)
            kc.emplace(chart.name(i), k[i]);
        dyn.gauge.emplace_back(std::move(kc));
    }
    if (dyn.verdict != Verdict::ConstrainedSurface)
        dyn.verdict = dyn.gauge.empty() ? Verdict::Unique : Verdict::Gauge;
    return dyn;
}

std::vector<DiffForm> all_constraint_forms(const GVProblem& p) {
    std::vector<DiffForm> forms =
        geomech::lift_function_constraints(p.chart, p.constraints.I0);
    for (auto& f : p.constraints.I1nh) forms.push_back(f);
    for (auto& f : p.constraints.I1vak) forms.push_back(f);
    return forms;
}

}  // namespace

Dynamics derive_dynamics(const GVProblem& p, const LinSolveOptions& opts) {
    LinearSystem sys;
    add_one_form_row(sys, p.chart, tau_form(p.chart), Expr(1LL));
    for (auto& alpha : all_constraint_forms(p))
        add_one_form_row(sys, p.chart, alpha, Expr());
    add_two_form_rows(sys, p.chart, p.Omega, DiffForm(1),
                      variation_fields(p.chart, p.variations,
                                       p.constraints.I1nh, opts));
    return classify_solution(p.chart, std::move(sys), opts,
                             p.provenance.empty() ? "derive_dynamics"
                                                  : p.provenance);
}

Dynamics derive_modified(const Chart& chart,
                         const geomech::ModifiedStructure& m,
                         const LinSolveOptions& opts) {
    LinearSystem sys;
    add_one_form_row(sys, chart, tau_form(chart), Expr(1LL));
    add_two_form_rows(sys, chart, m.omega, m.rhs,
                      variation_fields(chart,
                                       geomech::VariationClass::Vertical, {},
                                       opts));
    return classify_solution(chart, std::move(sys), opts,
                             "modified-precosymplectic");
}

Dynamics herglotz_el(const Chart& chart, const Expr& L, const DiffForm& eta,
                     const std::vector<Expr>& I0, const LinSolveOptions& opts) {
    auto s = chart.unique_with_role(Role::Action);
    if (!s) throw EomError("chart needs exactly one action coordinate");
    LinearSystem sys;
    add_one_form_row(sys, chart, tau_form(chart), Expr(1LL));
    add_one_form_row(sys, chart, eta, Expr());
    for (auto& kappa : geomech::cartan_forms(chart))
        add_one_form_row(sys, chart, kappa, Expr());
    for (auto& df : geomech::lift_function_constraints(chart, I0))
        add_one_form_row(sys, chart, df, Expr());
    // dL/dq^j - Z(dL/dv^j) + (dL/ds)(dL/dv^j) = 0
    Expr Ls = L.derivative(*s);
    for (auto& [q, v] : geomech::qv_pairs(chart)) {
        Expr Lv = L.derivative(v);
        std::vector<Expr> row(chart.dim());
        for (std::size_t i = 0; i < chart.dim(); ++i)
            row[i] = Lv.derivative(chart.name(i));
        sys.A.push_back(std::move(row));
        sys.b.push_back(L.derivative(q) + Ls * Lv);
    }
    return classify_solution(chart, std::move(sys), opts, "herglotz_el");
}

TransversalityReduction check_transversality_reduction(
    const Chart& chart, const DiffForm& omega, const DiffForm& sigma_t,
    const std::vector<DiffForm>& constraints, const VecField& R_t,
    const LinSolveOptions& opts) {
    LinearSystem sys;
    // X vertical
    add_one_form_row(sys, chart, tau_form(chart), Expr());
    add_two_form_rows(sys, chart, omega, sigma_t,
                      variation_fields(chart,
                                       geomech::VariationClass::AllFields, {},
                                       opts));
    // i_{R_t - X} alpha = 0, i.e. <alpha, X> = i_{R_t} alpha
    for (auto& alpha : constraints)
        add_one_form_row(sys, chart, alpha,
                         iota(chart, R_t, alpha).scalar_value());
    auto res = solve_linear(sys.A, sys.b, opts, &chart);
    TransversalityReduction out;
    if (!res.consistent || !res.residuals.empty()) {
        out.exists = false;
        out.witness = res.witness
                          ? res.witness
                          : (res.residuals.empty()
                                 ? std::optional<Expr>()
                                 : std::optional<Expr>(res.residuals[0]));
        return out;
    }
    out.exists = true;
    std::map<std::string, Expr> comps;
    for (std::size_t i = 0; i < chart.dim(); ++i)
        comps.emplace(chart.name(i), res.particular[i]);
    out.X = VecField(std::move(comps));
    return out;
}

namespace {

std::map<std::string, Expr> secondary_subs(const Chart& chart,
                                           const std::vector<Expr>& secondary,
                                           const LinSolveOptions& opts) {
    std::map<std::string, Expr> subs;
    for (auto& g : secondary)
        if (auto sub = eliminate_coordinate(chart, g, opts))
            subs.emplace(sub->first, sub->second);
    return subs;
}

// Does d lie in the span (with function coefficients) of the gauge fields?
bool in_gauge_span(const Chart& chart, const std::vector<Expr>& d,
                   const std::vector<VecField>& gauge,
                   const LinSolveOptions& opts) {
    bool trivial = true;
    for (auto& e : d)
        if (!e.is_structural_zero()) trivial = false;
    if (trivial) return true;
    if (gauge.empty()) return false;
    std::vector<std::vector<Expr>> A(chart.dim(),
                                     std::vector<Expr>(gauge.size()));
    for (std::size_t i = 0; i < chart.dim(); ++i)
        for (std::size_t k = 0; k < gauge.size(); ++k)
            A[i][k] = gauge[k].comp(chart.name(i));
    auto res = solve_linear(A, d, opts, &chart);
    return res.consistent && res.residuals.empty();
}

}  // namespace

EquivalenceVerdict verify_equivalence(const GVProblem& a, const GVProblem& b,
                                      const LinSolveOptions& opts) {
    EquivalenceVerdict out;
    Dynamics da = derive_dynamics(a, opts);
    Dynamics db = derive_dynamics(b, opts);
    if (da.verdict != db.verdict) {
        out.detail = "verdicts differ: " + verdict_label(da.verdict) + " vs " +
                     verdict_label(db.verdict);
        return out;
    }
    if (da.verdict == Verdict::Inconsistent) {
        out.pass = true;
        out.detail = "both inconsistent";
        return out;
    }
    if (a.chart.dim() != b.chart.dim() ||
        a.chart.coords().size() != b.chart.coords().size()) {
        out.detail = "charts differ";
        return out;
    }
    auto subs = secondary_subs(a.chart, da.secondary, opts);
    for (auto& [name, repl] : secondary_subs(b.chart, db.secondary, opts))
        subs.emplace(name, repl);
    std::vector<Expr> d(a.chart.dim());
    for (std::size_t i = 0; i < a.chart.dim(); ++i) {
        const std::string& c = a.chart.name(i);
        d[i] = apply_subs(da.Z.comp(c) - db.Z.comp(c), subs);
    }
    std::vector<VecField> gauge = da.gauge;
    for (auto& g : db.gauge) gauge.push_back(g);
    if (!in_gauge_span(a.chart, d, gauge, opts)) {
        out.detail = "particular solutions differ beyond gauge";
        return out;
    }
    out.pass = true;
    out.detail = "verdict " + verdict_label(da.verdict) +
                 ", solutions agree modulo gauge";
    return out;
}

EquivalenceVerdict project_and_compare(const GVProblem& ext,
                                       const Dynamics& ext_dyn,
                                       const Dynamics& base_dyn,
                                       const CoordMap& proj,
                                       const LinSolveOptions& opts) {
    EquivalenceVerdict out;
    if (ext_dyn.verdict == Verdict::Inconsistent ||
        base_dyn.verdict == Verdict::Inconsistent) {
        out.detail = "inconsistent dynamics cannot be projected";
        return out;
    }
    const Chart& base = proj.target();
    auto subs = secondary_subs(ext.chart, ext_dyn.secondary, opts);
    std::vector<Expr> d(base.dim());
    for (std::size_t i = 0; i < base.dim(); ++i) {
        const std::string& c = base.name(i);
        // projection is the identity on base coordinates, so the pushforward
        // of Z is componentwise restriction to the constraint surface
        d[i] = apply_subs(ext_dyn.Z.comp(c), subs) - base_dyn.Z.comp(c);
    }
    if (!in_gauge_span(base, d, base_dyn.gauge, opts)) {
        out.detail = "projected dynamics differ beyond base gauge";
        return out;
    }
    // constant-offset freedom in absorbed action momenta: the flow must be
    // invariant under translating them
    std::ostringstream detail;
    detail << "projection matches base dynamics";
    for (auto& c : ext.chart.coords()) {
        if (c.role != Role::ActionMomentum) continue;
        for (auto& zc : ext.chart.coords()) {
            Expr dep = apply_subs(ext_dyn.Z.comp(zc.name), subs)
                           .derivative(c.name);
            if (!dep.is_structural_zero()) {
                out.detail = "flow depends on action momentum " + c.name;
                return out;
            }
        }
        detail << "; constant offset in " << c.name << " preserved";
    }
    out.pass = true;
    out.detail = detail.str();
    return out;
}

std::vector<Expr> solution_residuals(const GVProblem& p, const VecField& Z,
                                     const std::vector<Expr>& secondary) {
    LinSolveOptions opts;
    auto subs = secondary_subs(p.chart, secondary, opts);
    std::vector<Expr> rows;
    rows.push_back(iota(p.chart, Z, tau_form(p.chart)).scalar_value() -
                   Expr(1LL));
    for (auto& alpha : all_constraint_forms(p))
        rows.push_back(iota(p.chart, Z, alpha).scalar_value());
    for (auto& xi : variation_fields(p.chart, p.variations,
                                     p.constraints.I1nh, opts))
        rows.push_back(
            iota(p.chart, Z, iota(p.chart, xi, p.Omega)).scalar_value());
    for (auto& r : rows) r = apply_subs(r, subs);
    return rows;
}

}  // namespace varigeo::eomsolve
