#include "varigeo/cli.hpp"

#include "varigeo/eomsolve.hpp"
#include "varigeo/parser.hpp"
#include "varigeo/problemfile.hpp"
#include "varigeo/simulate.hpp"

#include <fstream>
#include <iostream>

#include "json.hpp"

namespace varigeo::cli {

using excalc::Chart;
using excalc::DiffForm;
using excalc::LinSolveOptions;
using excalc::Role;
using excalc::VecField;
using eomsolve::Dynamics;
using eomsolve::Verdict;
using geomech::GVProblem;
using problemfile::ProblemFile;
using symexpr::Expr;
using symexpr::sym;
using json = nlohmann::ordered_json;

namespace {

struct CliError : std::runtime_error {
    CliError(const std::string& msg, int exit_code)
        : std::runtime_error(msg), code(exit_code) {}
    int code;
};

void declare_functions(const ProblemFile& p) {
    for (auto& f : p.functions) {
        auto open = f.find('(');
        if (open == std::string::npos || f.back() != ')')
            throw CliError("function declaration '" + f +
                               "' must look like name(dep,dep)",
                           2);
        std::string name = f.substr(0, open);
        std::vector<std::string> deps;
        std::string body = f.substr(open + 1, f.size() - open - 2);
        std::string cur;
        for (char c : body + ",") {
            if (c == ',') {
                if (!cur.empty()) deps.push_back(cur);
                cur.clear();
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                cur += c;
            }
        }
        symexpr::register_function(name, std::move(deps));
    }
}

std::vector<Expr> gauge_constraints(const ProblemFile& p) {
    std::vector<Expr> out;
    for (auto& [coord, text] : p.gauge) {
        if (!p.chart.has(coord))
            throw CliError("gauge pins unknown coordinate " + coord, 2);
        out.push_back(sym(coord) - parser::parse_expr(text, p.chart));
    }
    return out;
}

std::vector<Expr> parse_I0(const ProblemFile& p) {
    std::vector<Expr> out;
    for (auto& text : p.I0) out.push_back(parser::parse_expr(text, p.chart));
    for (auto& g : gauge_constraints(p)) out.push_back(g);
    return out;
}

json field_json(const Chart& chart, const VecField& v) {
    json out = json::object();
    for (auto& c : chart.coords()) out[c.name] = v.comp(c.name).str();
    return out;
}

json dynamics_json(const Chart& chart, const Dynamics& d) {
    json out;
    out["verdict"] = eomsolve::verdict_label(d.verdict);
    if (d.verdict != Verdict::Inconsistent) out["Z"] = field_json(chart, d.Z);
    json gauge = json::array();
    for (auto& g : d.gauge) gauge.push_back(field_json(chart, g));
    out["gauge"] = gauge;
    json sec = json::array();
    for (auto& g : d.secondary) sec.push_back(g.str());
    out["secondary"] = sec;
    if (d.witness) out["witness"] = d.witness->str();
    out["provenance"] = d.provenance;
    return out;
}

json reeb_json(const Chart& chart, const geomech::ReebCertificate& c) {
    json out;
    out["exists"] = c.exists;
    if (c.exists) {
        out["representative"] = field_json(chart, c.representative);
        json ker = json::array();
        for (auto& k : c.kernel) ker.push_back(field_json(chart, k));
        out["kernel"] = ker;
    } else if (c.witness) {
        out["witness"] = c.witness->str();
    }
    return out;
}

// Everything derive/integrate need from a pipeline stage.
struct Derived {
    Chart chart;                        // active (possibly extended) chart
    Dynamics dyn;
    std::optional<DiffForm> Omega;
    std::optional<DiffForm> eta;
    std::optional<DiffForm> sigma_t;
    std::vector<DiffForm> incidence;    // constraint forms checked at x0
    json forms = json::object();
};

Expr require_lagrangian(const ProblemFile& p) {
    if (!p.lagrangian) throw CliError("stage needs model.lagrangian", 2);
    return parser::parse_expr(*p.lagrangian, p.chart);
}

// eta = H dt + ds - p_i dq^i with positions and momenta paired in order
DiffForm cocontact_eta(const Chart& chart, const Expr& H) {
    auto s = chart.unique_with_role(Role::Action);
    if (!s) throw CliError("cocontact stage needs an action coordinate", 2);
    auto qs = chart.names_with_role(Role::Position);
    auto ps = chart.names_with_role(Role::Momentum);
    if (qs.empty() || qs.size() != ps.size())
        throw CliError("cocontact stage needs paired position/momentum", 2);
    DiffForm eta = DiffForm::d_coord(chart, geomech::time_coord(chart)) * H +
                   DiffForm::d_coord(chart, *s);
    for (std::size_t i = 0; i < qs.size(); ++i)
        eta -= DiffForm::d_coord(chart, qs[i]) * sym(ps[i]);
    return eta;
}

Derived run_stage(const ProblemFile& p, const LinSolveOptions& lopts) {
    Derived out;
    out.chart = p.chart;
    std::vector<Expr> I0 = parse_I0(p);
    std::vector<DiffForm> I1nh;
    for (auto& text : p.I1nh)
        I1nh.push_back(parser::parse_form(text, p.chart));

    if (p.stage == "lagrangian") {
        Expr L = require_lagrangian(p);
        DiffForm Omega =
            excalc::ext_d(p.chart, geomech::poincare_cartan(p.chart, L));
        GVProblem prob{p.chart, Omega,
                       {I0, I1nh, geomech::cartan_forms(p.chart)},
                       geomech::VariationClass::Vertical, "lagrangian"};
        out.dyn = eomsolve::derive_dynamics(prob, lopts);
        out.Omega = Omega;
        out.sigma_t = excalc::iota(p.chart, VecField::basis(
                                       geomech::time_coord(p.chart)),
                                   Omega);
        out.incidence = geomech::cartan_forms(p.chart);
        out.forms["Omega"] = Omega.str(p.chart);
    } else if (p.stage == "herglotz") {
        Expr L = require_lagrangian(p);
        DiffForm eta = geomech::herglotz_constraint(p.chart, L);
        out.dyn = eomsolve::herglotz_el(p.chart, L, eta, I0, lopts);
        out.eta = eta;
        // unified 2-form for the dissipation monitor
        auto rs = geomech::reeb_solve(
            p.chart,
            {{eta, DiffForm::scalar(Expr(1LL))},
             {geomech::tau_form(p.chart), DiffForm::scalar(Expr())}},
            lopts);
        if (rs.exists) {
            DiffForm Obar = geomech::omega_bar_mixed(p.chart, L, {eta},
                                                     {rs.representative},
                                                     lopts);
            out.Omega = Obar;
            out.sigma_t = excalc::iota(
                p.chart, VecField::basis(geomech::time_coord(p.chart)), Obar);
            out.forms["Omega_bar"] = Obar.str(p.chart);
        }
        out.incidence = geomech::cartan_forms(p.chart);
        out.incidence.push_back(eta);
        out.forms["eta"] = eta.str(p.chart);
    } else if (p.stage == "modified") {
        Expr L = require_lagrangian(p);
        auto mod = geomech::modified_precosymplectic(p.chart, L);
        out.dyn = eomsolve::derive_modified(p.chart, mod, lopts);
        out.Omega = mod.omega;
        out.sigma_t = mod.sigma_t;
        out.forms["omega"] = mod.omega.str(p.chart);
        out.forms["sigma_t"] = mod.sigma_t.str(p.chart);
    } else if (p.stage == "cocontact") {
        if (!p.hamiltonian)
            throw CliError("cocontact stage needs model.hamiltonian", 2);
        Expr H = parser::parse_expr(*p.hamiltonian, p.chart);
        DiffForm eta = cocontact_eta(p.chart, H);
        auto s = *p.chart.unique_with_role(Role::Action);
        DiffForm sigma_s =
            DiffForm::d_coord(p.chart, geomech::time_coord(p.chart)) *
            H.derivative(s);
        DiffForm Obar = excalc::ext_d(p.chart, eta) +
                        excalc::wedge(sigma_s, eta);
        GVProblem prob{p.chart, Obar, {I0, {eta}, {}},
                       geomech::VariationClass::Vertical, "cocontact"};
        out.dyn = eomsolve::derive_dynamics(prob, lopts);
        out.Omega = Obar;
        out.eta = eta;
        out.sigma_t = excalc::iota(
            p.chart, VecField::basis(geomech::time_coord(p.chart)), Obar);
        out.incidence = {eta};
        out.forms["eta"] = eta.str(p.chart);
        out.forms["Omega_bar"] = Obar.str(p.chart);
    } else if (p.stage == "unified") {
        Expr L = require_lagrangian(p);
        geomech::AbsorptionResult abs;
        if (p.chart.unique_with_role(Role::Action)) {
            DiffForm eta = geomech::herglotz_constraint(p.chart, L);
            abs = geomech::absorb_mixed(p.chart, L, {eta}, lopts);
            out.eta = eta;
        } else {
            abs = geomech::absorb_holonomy(p.chart, L);
        }
        // gauge/I0 constraints live on the base chart; indices match the
        // extension, so they remain valid
        GVProblem prob{abs.extended, abs.Omega_U, {I0, {}, {}},
                       geomech::VariationClass::Vertical, "unified"};
        out.chart = abs.extended;
        out.dyn = eomsolve::derive_dynamics(prob, lopts);
        out.Omega = abs.Omega_U;
        out.sigma_t = excalc::iota(
            abs.extended, VecField::basis(geomech::time_coord(abs.extended)),
            abs.Omega_U);
        out.forms["Omega_U"] = abs.Omega_U.str(abs.extended);
    } else {
        throw CliError("unknown pipeline stage '" + p.stage + "'", 2);
    }
    return out;
}

json classify_json(const ProblemFile& p, const LinSolveOptions& lopts) {
    Expr L = require_lagrangian(p);
    auto rep = geomech::classify(p.chart, L, lopts);
    json out;
    out["hessian_regular"] = rep.hessian_regular;
    out["cosymplectic"] = symexpr::verdict_name(rep.cosymplectic);
    out["cosymplectic_summary"] =
        rep.cosymplectic == symexpr::ZeroVerdict::NonZero
            ? "cosymplectic: yes"
            : "cosymplectic: no (degenerate)";
    out["cosym_reeb"] = reeb_json(p.chart, rep.cosym_reeb);
    if (rep.contact) {
        out["contact"] = symexpr::verdict_name(*rep.contact);
        out["contact_reeb"] = reeb_json(p.chart, *rep.contact_reeb);
        out["contact_reeb_summary"] =
            rep.contact_reeb->exists ? "eta_L: Reeb exists"
                                     : "eta_L: Reeb nonexistent";
        out["restricted_rank"] = *rep.restricted_rank;
        out["precontact"] = *rep.precontact;
        out["precontact_summary"] =
            *rep.precontact ? "precontact: holds"
                            : "precontact: fails (see discrepancy note)";
        out["precontact_note"] = rep.precontact_note;
        out["premulticontact_sufficient"] =
            reeb_json(p.chart, *rep.premulticontact_sufficient);
        json sr;
        auto pre = geomech::premulticontact_reeb(p.chart, L, lopts);
        sr = reeb_json(pre.surface_chart, pre.surface_reeb);
        out["surface_reeb"] = sr;
        out["lcs"] = *rep.lcs;
    }
    out["autonomous"] = rep.autonomous;
    return out;
}

// Negative control: a sign flip would leave the homogeneous contraction
// rows unchanged, so inject a dt ^ dq term that genuinely alters the
// dynamics.
DiffForm corrupt_form(const Chart& chart, const DiffForm& form) {
    auto qs = chart.names_with_role(Role::Position);
    if (qs.empty()) throw CliError("cannot corrupt: no position coordinate", 2);
    return form + excalc::wedge(
                      DiffForm::d_coord(chart, geomech::time_coord(chart)),
                      DiffForm::d_coord(chart, qs.front()));
}

json verify_json(const ProblemFile& p, const LinSolveOptions& lopts,
                 bool& pass) {
    json out;
    auto record = [&](const std::string& name,
                      const eomsolve::EquivalenceVerdict& v) {
        out[name] = json{{"pass", v.pass}, {"detail", v.detail}};
        pass = pass && v.pass;
    };
    pass = true;
    if (p.verify_mode == "cocontact-pair" ||
        p.verify_mode == "variation-pair") {
        if (!p.hamiltonian)
            throw CliError("verify mode needs model.hamiltonian", 2);
        Expr H = parser::parse_expr(*p.hamiltonian, p.chart);
        DiffForm eta = cocontact_eta(p.chart, H);
        auto s = *p.chart.unique_with_role(Role::Action);
        DiffForm sigma_s =
            DiffForm::d_coord(p.chart, geomech::time_coord(p.chart)) *
            H.derivative(s);
        DiffForm Obar = excalc::ext_d(p.chart, eta) +
                        excalc::wedge(sigma_s, eta);
        if (p.corrupt) Obar = corrupt_form(p.chart, Obar);
        GVProblem reduced{p.chart, excalc::ext_d(p.chart, eta),
                          {{}, {eta}, {}},
                          geomech::VariationClass::AdmissibleReduced,
                          "admissible"};
        GVProblem bar{p.chart, Obar, {{}, {eta}, {}},
                      geomech::VariationClass::Vertical, "omega-bar"};
        if (p.verify_mode == "cocontact-pair") {
            record("cocontact_pair",
                   eomsolve::verify_equivalence(reduced, bar, lopts));
        } else {
            GVProblem all = bar;
            all.variations = geomech::VariationClass::AllFields;
            record("variation_pair",
                   eomsolve::verify_equivalence(bar, all, lopts));
        }
    } else if (p.verify_mode == "absorption" ||
               p.verify_mode == "herglotz-absorption") {
        Expr L = require_lagrangian(p);
        geomech::AbsorptionResult abs;
        Dynamics base;
        if (p.verify_mode == "absorption") {
            DiffForm Omega =
                excalc::ext_d(p.chart, geomech::poincare_cartan(p.chart, L));
            GVProblem pb{p.chart, Omega,
                         {{}, {}, geomech::cartan_forms(p.chart)},
                         geomech::VariationClass::Vertical, "base"};
            base = eomsolve::derive_dynamics(pb, lopts);
            abs = geomech::absorb_holonomy(p.chart, L);
        } else {
            DiffForm eta = geomech::herglotz_constraint(p.chart, L);
            base = eomsolve::herglotz_el(p.chart, L, eta, {}, lopts);
            abs = geomech::absorb_mixed(p.chart, L, {eta}, lopts);
        }
        DiffForm OU = p.corrupt ? corrupt_form(abs.extended, abs.Omega_U)
                                : abs.Omega_U;
        GVProblem pu{abs.extended, OU, {{}, {}, {}},
                     geomech::VariationClass::Vertical, "unified"};
        Dynamics du = eomsolve::derive_dynamics(pu, lopts);
        auto proj = geomech::absorption_projection(abs, p.chart);
        record("absorption",
               eomsolve::project_and_compare(pu, du, base, proj, lopts));
        json sec = json::array();
        for (auto& g : du.secondary) sec.push_back(g.str());
        out["secondary"] = sec;
    } else {
        throw CliError("unknown or missing verify.mode", 2);
    }
    return out;
}

std::string csv_path_for(const std::string& file,
                         const std::optional<std::string>& out) {
    std::string base = out ? *out : file;
    auto slash = base.find_last_of('/');
    auto dot = base.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        base = base.substr(0, dot);
    if (!out) {
        // default next to the working directory, not the input
        auto s = base.find_last_of('/');
        if (s != std::string::npos) base = base.substr(s + 1);
    }
    return base + ".csv";
}

void emit(const json& report, const Options& opts, std::ostream& out) {
    if (opts.out) {
        std::ofstream f(*opts.out);
        if (!f) throw CliError("cannot write " + *opts.out, 2);
        f << report.dump(2) << "\n";
    } else {
        out << report.dump(2) << "\n";
    }
}

}  // namespace

int run(const std::string& command, const std::string& file,
        const Options& opts, std::ostream& out, std::ostream& err) {
    try {
        ProblemFile p = problemfile::load_problem(file);
        declare_functions(p);
        LinSolveOptions lopts;
        lopts.zero.seed = opts.seed;
        lopts.zero.trials = opts.trials;

        json report;
        report["command"] = command;
        report["seed"] = opts.seed;
        report["trials"] = opts.trials;
        report["stage"] = p.stage;

        if (command == "classify") {
            report["classification"] = classify_json(p, lopts);
            emit(report, opts, out);
            return 0;
        }
        if (command == "verify") {
            bool pass = false;
            report["verify"] = verify_json(p, lopts, pass);
            report["pass"] = pass;
            emit(report, opts, out);
            return pass ? 0 : 7;
        }

        Derived d = run_stage(p, lopts);
        report["forms"] = d.forms;
        report["dynamics"] = dynamics_json(d.chart, d.dyn);

        if (command == "derive") {
            emit(report, opts, out);
            return d.dyn.verdict == Verdict::Inconsistent ? 5 : 0;
        }
        if (command != "integrate")
            throw CliError("unknown command '" + command + "'", 2);

        if (d.dyn.verdict == Verdict::Inconsistent) {
            emit(report, opts, out);
            return 5;
        }
        if (d.dyn.verdict == Verdict::Gauge)
            throw CliError("gauge freedom requires pinning", 6);
        if (!p.x0) throw CliError("integrate needs [integrate] x0", 2);

        simulate::MonitorSpec spec;
        if (d.sigma_t)
            spec.add_form_residual("sigma_t", d.chart, d.dyn.Z, *d.sigma_t);
        for (auto& [name, text] : p.monitors) {
            auto colon = text.find(':');
            if (colon == std::string::npos)
                throw CliError("monitor '" + name +
                                   "' must be 'residual: expr' or 'drift: expr'",
                               2);
            std::string kind = text.substr(0, colon);
            Expr e = parser::parse_expr(text.substr(colon + 1), p.chart);
            if (kind == "residual")
                spec.add_residual(name, e);
            else if (kind == "drift")
                spec.add_drift(name, e);
            else
                throw CliError("monitor kind '" + kind + "' unknown", 2);
        }

        simulate::IntegrateOptions io;
        simulate::Point x0 = *p.x0;
        double t0 = 0;
        if (auto it = x0.find(geomech::time_coord(p.chart)); it != x0.end())
            t0 = it->second;
        io.t_end = t0 + p.span;
        io.h = p.step;
        io.I0 = parse_I0(p);
        for (auto& g : d.dyn.secondary) io.I0.push_back(g);
        io.incidence = d.incidence;
        // extended-chart momenta default to their constraint values
        for (auto& c : d.chart.coords())
            if (!x0.count(c.name)) x0[c.name] = 0.0;

        auto traj = simulate::integrate(d.chart, d.dyn.Z, p.params, x0, io,
                                        spec);
        std::string csv = csv_path_for(file, opts.out);
        std::ofstream cf(csv);
        if (!cf) throw CliError("cannot write " + csv, 2);
        cf << traj.csv();

        report["trajectory"] = json{{"csv", csv},
                                    {"steps", traj.states.size()},
                                    {"step_size", p.step},
                                    {"span", p.span}};
        json maxima = json::object();
        for (auto& [name, m] : simulate::monitor_maxima(traj)) maxima[name] = m;
        report["monitor_maxima"] = maxima;
        emit(report, opts, out);
        return 0;
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return e.code;
    } catch (const geomech::HypothesisError& e) {
        err << "hypothesis failure: " << e.what() << "\n";
        return 3;
    } catch (const excalc::RankUndecidedError& e) {
        err << "rank undecided: " << e.what() << "\n";
        return 4;
    } catch (const parser::ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const problemfile::FileError& e) {
        err << "problem file error: " << e.what() << "\n";
        return 2;
    } catch (const excalc::ChartError& e) {
        err << "chart error: " << e.what() << "\n";
        return 2;
    } catch (const excalc::FormError& e) {
        err << "form error: " << e.what() << "\n";
        return 2;
    } catch (const geomech::GeomechError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const eomsolve::EomError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const simulate::SimError& e) {
        err << "simulation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace varigeo::cli
