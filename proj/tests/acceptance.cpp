// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Closed-form oracles are frozen inline; symbolic checks are
// structural equalities on canonical forms.

#include "varigeo/eomsolve.hpp"
#include "varigeo/simulate.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <random>

#include "fuzz.hpp"

using namespace varigeo;
using namespace varigeo::eomsolve;
using namespace varigeo::geomech;
using excalc::Chart;
using excalc::CoordMap;
using excalc::DiffForm;
using excalc::VecField;
using symexpr::Expr;
using symexpr::sym;

namespace {

int failures = 0;

void criterion(int n, const std::string& what, const std::function<bool()>& f) {
    bool ok = false;
    std::string note;
    try {
        ok = f();
    } catch (const std::exception& e) {
        note = std::string(" (") + e.what() + ")";
    }
    std::cout << "criterion " << n << " [" << what << "]: "
              << (ok ? "PASS" : "FAIL") << note << "\n";
    if (!ok) ++failures;
}

bool require(bool cond) {
    if (!cond) throw std::runtime_error("check failed");
    return true;
}

Chart tqv() {
    return Chart(
        {{"t", Role::Time}, {"q", Role::Position}, {"v", Role::Velocity}});
}
Chart tqvs(std::vector<std::string> params = {}) {
    return Chart({{"t", Role::Time},
                  {"q", Role::Position},
                  {"v", Role::Velocity},
                  {"s", Role::Action}},
                 std::move(params));
}
Chart tqps() {
    return Chart({{"t", Role::Time},
                  {"q", Role::Position},
                  {"p", Role::Momentum},
                  {"s", Role::Action}});
}

Expr damped_L() {
    return sym("v") * sym("v") / Expr(2) - sym("q") * sym("q") / Expr(2) -
           sym("g") * sym("s");
}

DiffForm cocontact_eta(const Chart& ch, const Expr& H) {
    return DiffForm::d_coord(ch, "t") * H + DiffForm::d_coord(ch, "s") -
           DiffForm::d_coord(ch, "q") * sym("p");
}

DiffForm cocontact_bar(const Chart& ch, const Expr& H) {
    DiffForm eta = cocontact_eta(ch, H);
    DiffForm sigma_s = DiffForm::d_coord(ch, "t") * H.derivative("s");
    return excalc::ext_d(ch, eta) + excalc::wedge(sigma_s, eta);
}

// 1. cocontact Hamiltonian golden field for symbolic H
bool c1() {
    Chart ch = tqps();
    symexpr::register_function("H", {"q", "p", "s"});
    Expr H = Expr::deriv("H");
    DiffForm eta = cocontact_eta(ch, H);
    DiffForm sigma_s = DiffForm::d_coord(ch, "t") * Expr::deriv("H", {"s"});
    DiffForm Obar = excalc::ext_d(ch, eta) + excalc::wedge(sigma_s, eta);
    GVProblem p{ch, Obar, {{}, {eta}, {}}, VariationClass::Vertical,
                "cocontact"};
    Dynamics d = derive_dynamics(p);
    require(d.verdict == Verdict::Unique);
    Expr Hp = Expr::deriv("H", {"p"});
    require(d.Z.comp("t") == Expr(1));
    require(d.Z.comp("q") == Hp);
    require(d.Z.comp("p") ==
            -(Expr::deriv("H", {"q"}) + sym("p") * Expr::deriv("H", {"s"})));
    require(d.Z.comp("s") == sym("p") * Hp - H);
    return true;
}

// 2. regular Lagrangian: symbolic golden field + numeric oscillator
bool c2() {
    Chart ch = tqv();
    symexpr::register_function("Lg", {"t", "q", "v"});
    DiffForm Om = excalc::ext_d(ch, poincare_cartan(ch, Expr::deriv("Lg")));
    GVProblem ps{ch, Om, {{}, {}, cartan_forms(ch)}, VariationClass::Vertical,
                 "lagrangian"};
    Dynamics ds = derive_dynamics(ps);
    require(ds.verdict == Verdict::Unique);
    Expr W = Expr(1) / Expr::deriv("Lg", {"v", "v"});
    require(ds.Z.comp("q") == sym("v"));
    require(ds.Z.comp("v") ==
            W * (Expr::deriv("Lg", {"q"}) -
                 sym("v") * Expr::deriv("Lg", {"q", "v"}) -
                 Expr::deriv("Lg", {"t", "v"})));

    Expr L = sym("v") * sym("v") / Expr(2) - sym("q") * sym("q") / Expr(2);
    GVProblem pn{ch, excalc::ext_d(ch, poincare_cartan(ch, L)),
                 {{}, {}, cartan_forms(ch)}, VariationClass::Vertical,
                 "lagrangian"};
    Dynamics dn = derive_dynamics(pn);
    require(dn.verdict == Verdict::Unique);
    require(dn.Z.comp("t") == Expr(1));
    require(dn.Z.comp("q") == sym("v"));
    require(dn.Z.comp("v") == -sym("q"));
    return true;
}

// 3. L = tv: Reeb-nonexistent pair, i_{d/dt} omega = 0, inconsistent dynamics
bool c3() {
    Chart ch = tqv();
    Expr L = sym("t") * sym("v");
    auto rep = classify(ch, L);
    require(!rep.cosym_reeb.exists);
    auto m = modified_precosymplectic(ch, L);
    require(excalc::iota(ch, VecField::basis("t"), m.omega)
                .is_structural_zero());
    Dynamics d = derive_modified(ch, m);
    require(d.verdict == Verdict::Inconsistent);
    return true;
}

// 4. L = vs: no contact Reeb, gauge dim 1 with sdot = vs, pinned integration
bool c4() {
    Chart ch = tqvs();
    Expr L = sym("v") * sym("s");
    auto rep = classify(ch, L);
    require(rep.contact_reeb.has_value() && !rep.contact_reeb->exists);
    Dynamics g = herglotz_el(ch, L, herglotz_constraint(ch, L));
    require(g.verdict == Verdict::Gauge);
    require(g.gauge.size() == 1);
    require(g.Z.comp("s") == sym("v") * sym("s"));

    Dynamics d = herglotz_el(ch, L, herglotz_constraint(ch, L),
                             {sym("v") - Expr(1)});
    require(d.verdict == Verdict::Unique);
    simulate::IntegrateOptions io;
    io.t_end = 10.0;
    io.h = 1e-3;
    io.I0 = {sym("v") - Expr(1)};
    auto traj = simulate::integrate(
        ch, d.Z, {}, {{"t", 0.0}, {"q", 0.0}, {"v", 1.0}, {"s", 1.0}}, io);
    double sN = traj.states.back()[3];
    require(std::fabs(sN - std::exp(10.0)) / std::exp(10.0) < 1e-5);
    return true;
}

// 5. L = s v^a + v^b: sufficient condition infeasible, surface Reeb -d/dq^b
bool c5() {
    Chart ch({{"t", Role::Time},
              {"qa", Role::Position},
              {"qb", Role::Position},
              {"va", Role::Velocity},
              {"vb", Role::Velocity},
              {"s", Role::Action}});
    auto pre = premulticontact_reeb(ch, sym("s") * sym("va") + sym("vb"));
    require(!pre.tangent_family.exists);
    require(pre.surface_reeb.exists);
    require(pre.surface_reeb.representative.comp("qb") == Expr(-1));
    require(pre.surface_reeb.representative.comp("qa").is_structural_zero());
    require(pre.surface_reeb.representative.comp("s").is_structural_zero());
    return true;
}

// 6. equivalence theorems on the worked pairs
bool c6() {
    // transversality: vertical vs all variations for a Hamiltonian GVP
    Chart chh(
        {{"t", Role::Time}, {"q", Role::Position}, {"p", Role::Momentum}});
    symexpr::register_function("Hh", {"q", "p"});
    DiffForm theta = DiffForm::d_coord(chh, "q") * sym("p");
    DiffForm Oh =
        excalc::wedge(excalc::ext_d(chh, DiffForm::scalar(Expr::deriv("Hh"))),
                      DiffForm::d_coord(chh, "t")) -
        excalc::ext_d(chh, theta);
    GVProblem hv{chh, Oh, {{}, {}, {}}, VariationClass::Vertical, "ham"};
    GVProblem ha = hv;
    ha.variations = VariationClass::AllFields;
    require(verify_equivalence(hv, ha).pass);

    // nonholonomic reduction pair for the cocontact Hamiltonian
    Chart ch = tqps();
    symexpr::register_function("H", {"q", "p", "s"});
    Expr H = Expr::deriv("H");
    DiffForm eta = cocontact_eta(ch, H);
    GVProblem reduced{ch, excalc::ext_d(ch, eta), {{}, {eta}, {}},
                      VariationClass::AdmissibleReduced, "admissible"};
    GVProblem bar{ch, cocontact_bar(ch, H), {{}, {eta}, {}},
                  VariationClass::Vertical, "omega-bar"};
    require(verify_equivalence(reduced, bar).pass);
    GVProblem all = bar;
    all.variations = VariationClass::AllFields;
    require(verify_equivalence(bar, all).pass);

    // regular action-dependent pair: dTheta_L vs the mixed omega-bar
    Chart chs = tqvs({"g"});
    Expr Lc = damped_L();
    DiffForm etaL = herglotz_constraint(chs, Lc);
    DiffForm dth = excalc::ext_d(chs, poincare_cartan(chs, Lc));
    DiffForm barL =
        omega_bar_mixed(chs, Lc, {etaL}, {VecField::basis("s")});
    GVProblem a{chs, dth, {{}, {etaL}, cartan_forms(chs)},
                VariationClass::AdmissibleReduced, "theta"};
    GVProblem b{chs, barL, {{}, {etaL}, cartan_forms(chs)},
                VariationClass::Vertical, "omega-bar"};
    require(verify_equivalence(a, b).pass);

    // absorption pairs
    Chart chl = tqv();
    Expr Lf = sym("v") * sym("v") / Expr(2);
    auto abs = absorb_holonomy(chl, Lf);
    GVProblem unified{abs.extended, abs.Omega_U, {{}, {}, {}},
                      VariationClass::Vertical, "unified"};
    Dynamics du = derive_dynamics(unified);
    GVProblem base{chl, excalc::ext_d(chl, poincare_cartan(chl, Lf)),
                   {{}, {}, cartan_forms(chl)}, VariationClass::Vertical,
                   "base"};
    Dynamics db = derive_dynamics(base);
    require(project_and_compare(unified, du, db,
                                absorption_projection(abs, chl))
                .pass);

    Dynamics hbase = herglotz_el(chs, Lc, etaL);
    auto absm = absorb_mixed(chs, Lc, {etaL});
    GVProblem um{absm.extended, absm.Omega_U, {{}, {}, {}},
                 VariationClass::Vertical, "herglotz-unified"};
    Dynamics dum = derive_dynamics(um);
    auto verdict = project_and_compare(um, dum, hbase,
                                       absorption_projection(absm, chs));
    require(verdict.pass);
    require(verdict.detail.find("constant offset") != std::string::npos);
    return true;
}

// 7. algebra property suite, 1000 fuzzed instances per identity
bool c7() {
    Chart ch = tqvs();
    fuzz::Rng rng(20240817);
    for (int i = 0; i < 1000; ++i) {
        DiffForm a = fuzz::form(rng, ch, i % 3);
        require(excalc::ext_d(ch, excalc::ext_d(ch, a)).is_structural_zero());
    }
    for (int i = 0; i < 1000; ++i) {
        DiffForm a = fuzz::form(rng, ch, 1 + i % 2);
        VecField X = fuzz::field(rng, ch);
        DiffForm lhs = excalc::lie(ch, X, a);
        DiffForm rhs = excalc::iota(ch, X, excalc::ext_d(ch, a)) +
                       excalc::ext_d(ch, excalc::iota(ch, X, a));
        require((lhs - rhs).is_structural_zero());
    }
    for (int i = 0; i < 1000; ++i) {
        int p = i % 3, q = (i / 3) % 2 + 1;
        DiffForm a = fuzz::form(rng, ch, p);
        DiffForm b = fuzz::form(rng, ch, q);
        DiffForm flip = excalc::wedge(b, a);
        if ((p * q) % 2 == 1) flip = -flip;
        require((excalc::wedge(a, b) - flip).is_structural_zero());
    }
    Chart src = tqv();
    Chart tgt(
        {{"t", Role::Time}, {"x", Role::Position}, {"y", Role::Velocity}});
    auto vars = fuzz::names(src);
    for (int i = 0; i < 1000; ++i) {
        CoordMap m(src, tgt,
                   {{"t", sym("t")},
                    {"x", fuzz::poly(rng, vars)},
                    {"y", fuzz::poly(rng, vars)}});
        DiffForm a = fuzz::form(rng, tgt, i % 2);
        require((m.pullback(excalc::ext_d(tgt, a)) -
                 excalc::ext_d(src, m.pullback(a)))
                    .is_structural_zero());
    }
    return true;
}

// 8. i_Z sigma_t residual along flows + RK4 order ratio
bool c8() {
    // conservative oscillator, sigma_t from the Poincare-Cartan 2-form
    Chart ch = tqv();
    Expr L = sym("v") * sym("v") / Expr(2) - sym("q") * sym("q") / Expr(2);
    DiffForm Om = excalc::ext_d(ch, poincare_cartan(ch, L));
    GVProblem p{ch, Om, {{}, {}, cartan_forms(ch)}, VariationClass::Vertical,
                "lagrangian"};
    Dynamics d = derive_dynamics(p);
    require(d.verdict == Verdict::Unique);
    DiffForm sigma_t = excalc::iota(ch, VecField::basis("t"), Om);
    simulate::MonitorSpec spec;
    spec.add_form_residual("sigma_t", ch, d.Z, sigma_t);
    simulate::IntegrateOptions io;
    io.t_end = 10.0;
    io.h = 1e-3;
    auto traj = simulate::integrate(ch, d.Z, {},
                                    {{"t", 0.0}, {"q", 1.0}, {"v", 0.0}}, io,
                                    spec);
    require(simulate::monitor_maxima(traj)["sigma_t"] < 1e-10);

    // damped oscillator, sigma_t from the mixed omega-bar
    Chart chs = tqvs({"g"});
    Expr Lc = damped_L();
    DiffForm etaL = herglotz_constraint(chs, Lc);
    Dynamics hd = herglotz_el(chs, Lc, etaL);
    require(hd.verdict == Verdict::Unique);
    DiffForm barL = omega_bar_mixed(chs, Lc, {etaL}, {VecField::basis("s")});
    simulate::MonitorSpec spec2;
    spec2.add_form_residual("sigma_t", chs, hd.Z,
                            excalc::iota(chs, VecField::basis("t"), barL));
    auto traj2 = simulate::integrate(
        chs, hd.Z, {{"g", 0.2}},
        {{"t", 0.0}, {"q", 1.0}, {"v", 0.0}, {"s", 0.0}}, io, spec2);
    require(simulate::monitor_maxima(traj2)["sigma_t"] < 1e-10);

    // RK4 order on the endpoint error
    io.h = 2e-3;
    auto coarse = simulate::integrate(ch, d.Z, {},
                                      {{"t", 0.0}, {"q", 1.0}, {"v", 0.0}}, io);
    io.h = 1e-3;
    auto fine = simulate::integrate(ch, d.Z, {},
                                    {{"t", 0.0}, {"q", 1.0}, {"v", 0.0}}, io);
    double e1 = std::fabs(coarse.states.back()[1] - std::cos(10.0));
    double e2 = std::fabs(fine.states.back()[1] - std::cos(10.0));
    require(e1 / e2 > 16.0 * 0.8 && e1 / e2 < 16.0 * 1.2);
    return true;
}

// 9. dissipation law for the damped contact oscillator
bool c9() {
    Chart chs = tqvs({"g"});
    Expr Lc = damped_L();
    Dynamics d = herglotz_el(chs, Lc, herglotz_constraint(chs, Lc));
    require(d.verdict == Verdict::Unique);
    double gamma = 0.2;
    simulate::MonitorSpec spec;
    Expr E = (sym("q") * sym("q") + sym("v") * sym("v")) / Expr(2);
    spec.add_residual("dissipation",
                      d.Z.apply(E) + sym("g") * sym("v") * sym("v"));
    simulate::IntegrateOptions io;
    io.t_end = 10.0;
    io.h = 1e-3;
    double w = std::sqrt(1 - gamma * gamma / 4);
    auto traj = simulate::integrate(
        chs, d.Z, {{"g", gamma}},
        {{"t", 0.0}, {"q", 1.0}, {"v", -gamma / 2}, {"s", 0.0}}, io, spec);
    require(simulate::monitor_maxima(traj)["dissipation"] < 1e-8);
    double worst = 0;
    for (auto& row : traj.states) {
        double exact = std::exp(-gamma * row[0] / 2) * std::cos(w * row[0]);
        worst = std::max(worst, std::fabs(row[1] - exact));
    }
    require(worst < 1e-4);
    return true;
}

// 10. conformal structure of the absorbed 2-form on fuzzed Lagrangians
bool c10() {
    Chart ch = tqvs();
    fuzz::Rng rng(20240818);
    std::vector<std::string> vars{"t", "q", "v", "s"};
    for (int i = 0; i < 20; ++i) {
        Expr L = fuzz::poly(rng, vars, 4, 2) + sym("v") * sym("v") / Expr(2);
        auto abs = absorb_mixed(ch, L, {herglotz_constraint(ch, L)});
        require(abs.Omega_check.has_value());
        const Chart& E = abs.extended;
        std::string ps = abs.eta_momenta.at(0);
        require((excalc::ext_d(E, *abs.Omega_check) -
                 excalc::wedge(DiffForm::d_coord(E, ps), *abs.Omega_check))
                    .is_structural_zero());
        require(excalc::lie(E, VecField::basis(ps), *abs.Omega_check)
                    .is_structural_zero());
    }
    return true;
}

}  // namespace

int main() {
    criterion(1, "cocontact Hamiltonian golden field", c1);
    criterion(2, "regular Lagrangian golden field", c2);
    criterion(3, "L = tv singular suite", c3);
    criterion(4, "L = vs singular suite", c4);
    criterion(5, "L = s*va + vb surface Reeb", c5);
    criterion(6, "dynamical equivalence suite", c6);
    criterion(7, "exterior algebra property suite", c7);
    criterion(8, "flow invariants and RK4 order", c8);
    criterion(9, "dissipation law", c9);
    criterion(10, "conformal absorbed 2-form", c10);
    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
