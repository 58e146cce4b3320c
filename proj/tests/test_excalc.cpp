#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "varigeo/excalc.hpp"
#include "varigeo/parser.hpp"

#include "fuzz.hpp"

using namespace varigeo::excalc;
using varigeo::symexpr::Expr;
using varigeo::symexpr::sym;
using varigeo::parser::parse_form;

namespace {
Chart tqv() {
    return Chart(
        {{"t", Role::Time}, {"q", Role::Position}, {"v", Role::Velocity}});
}
Chart tqvs() {
    return Chart({{"t", Role::Time},
                  {"q", Role::Position},
                  {"v", Role::Velocity},
                  {"s", Role::Action}});
}
}  // namespace

TEST_CASE("wedge basics") {
    Chart ch = tqv();
    DiffForm dt = DiffForm::d_coord(ch, "t");
    DiffForm dq = DiffForm::d_coord(ch, "q");
    DiffForm dv = DiffForm::d_coord(ch, "v");

    DiffForm dtdq = wedge(dt, dq);
    CHECK(dtdq.degree() == 2);
    CHECK(dtdq.coeff({0, 1}) == Expr(1));
    CHECK(wedge(dq, dt) == -dtdq);

    // kappa = dq - v dt: dt ^ kappa ^ i_{d/dt}(d kappa) spans the volume
    // (d kappa = dt^dv shares dt, so the literal triple wedge vanishes)
    DiffForm kappa = dq - dt * sym("v");
    CHECK(wedge(wedge(dt, kappa), ext_d(ch, kappa)).is_structural_zero());
    DiffForm vol = wedge(wedge(dt, kappa),
                         iota(ch, VecField::basis("t"), ext_d(ch, kappa)));
    CHECK(vol == wedge(wedge(dt, dq), dv));
    // scalar wedge is plain multiplication
    CHECK(wedge(DiffForm::scalar(sym("q")), dv) == dv * sym("q"));
}

TEST_CASE("exterior derivative basics") {
    Chart ch = tqvs();
    CHECK(ext_d(ch, DiffForm::scalar(sym("q"))) == DiffForm::d_coord(ch, "q"));
    DiffForm sdq = DiffForm::d_coord(ch, "q") * sym("s");
    CHECK(ext_d(ch, sdq) ==
          wedge(DiffForm::d_coord(ch, "s"), DiffForm::d_coord(ch, "q")));
    DiffForm etaL = DiffForm::d_coord(ch, "s") -
                    DiffForm::d_coord(ch, "q") * sym("s");
    CHECK(ext_d(ch, etaL) ==
          -wedge(DiffForm::d_coord(ch, "s"), DiffForm::d_coord(ch, "q")));
}

TEST_CASE("interior product basics") {
    Chart ch = tqv();
    DiffForm dqdv =
        wedge(DiffForm::d_coord(ch, "q"), DiffForm::d_coord(ch, "v"));
    CHECK(iota(ch, VecField::basis("q"), dqdv) == DiffForm::d_coord(ch, "v"));
    VecField X(std::map<std::string, Expr>{{"q", sym("v")}, {"v", sym("t")}});
    DiffForm fdq = DiffForm::d_coord(ch, "q") * sym("t");
    CHECK(iota(ch, X, fdq) == DiffForm::scalar(sym("t") * sym("v")));
    CHECK(iota(ch, X, iota(ch, X, dqdv)).is_structural_zero());
    CHECK_THROWS_AS(iota(ch, X, DiffForm::scalar(sym("q"))), FormError);
}

TEST_CASE("Lie derivative basics") {
    Chart ch = tqv();
    DiffForm tdq = DiffForm::d_coord(ch, "q") * sym("t");
    CHECK(lie(ch, VecField::basis("t"), tdq) == DiffForm::d_coord(ch, "q"));
    CHECK(lie(ch, VecField::basis("q"), DiffForm::scalar(Expr(5))).is_structural_zero());
    CHECK(lie(ch, VecField::basis("q"), DiffForm::d_coord(ch, "q")).is_structural_zero());
}

TEST_CASE("pullback basics") {
    // iota* of (ds - p dq^a - dq^b) along p_i = dL/dv^i for L = s v^a + v^b
    Chart surf({{"t", Role::Time},
                {"qa", Role::Position},
                {"qb", Role::Position},
                {"s", Role::Action}});
    Chart full({{"t", Role::Time},
                {"qa", Role::Position},
                {"qb", Role::Position},
                {"s", Role::Action},
                {"pa", Role::Momentum},
                {"pb", Role::Momentum}});
    CoordMap inc(surf, full,
                 {{"t", sym("t")},
                  {"qa", sym("qa")},
                  {"qb", sym("qb")},
                  {"s", sym("s")},
                  {"pa", sym("s")},
                  {"pb", Expr(1)}});
    DiffForm etac = DiffForm::d_coord(full, "s") -
                    DiffForm::d_coord(full, "qa") * sym("pa") -
                    DiffForm::d_coord(full, "qb") * sym("pb");
    CHECK(inc.pullback(etac) ==
          DiffForm::d_coord(surf, "s") -
              DiffForm::d_coord(surf, "qa") * sym("s") -
              DiffForm::d_coord(surf, "qb"));

    Chart ch = tqv();
    CoordMap ident(ch, ch, {{"t", sym("t")}, {"q", sym("q")}, {"v", sym("v")}});
    DiffForm w = wedge(DiffForm::d_coord(ch, "t"), DiffForm::d_coord(ch, "q")) *
                 sym("v");
    CHECK(ident.pullback(w) == w);

    // dp pulled back along p = v is dv
    Chart tgt({{"t", Role::Time}, {"q", Role::Position}, {"p", Role::Momentum}});
    CoordMap m(ch, tgt, {{"t", sym("t")}, {"q", sym("q")}, {"p", sym("v")}});
    CHECK(m.pullback(DiffForm::d_coord(tgt, "p")) == DiffForm::d_coord(ch, "v"));
}

TEST_CASE("form literals") {
    Chart ch = tqvs();
    CHECK(parse_form("ds - s*dq", ch) ==
          DiffForm::d_coord(ch, "s") - DiffForm::d_coord(ch, "q") * sym("s"));
    CHECK(parse_form("dt^dq", ch) ==
          wedge(DiffForm::d_coord(ch, "t"), DiffForm::d_coord(ch, "q")));
    // '^' between scalars is still exponentiation
    CHECK(parse_form("v^2*dt", ch) ==
          DiffForm::d_coord(ch, "t") * (sym("v") * sym("v")));
}

TEST_CASE("kernel and annihilator bases") {
    Chart qvs({{"q", Role::Position}, {"v", Role::Velocity}, {"s", Role::Action}});
    DiffForm etaL = DiffForm::d_coord(qvs, "s") -
                    DiffForm::d_coord(qvs, "q") * sym("s");
    auto ker = kernel_basis(qvs, {etaL});
    REQUIRE(ker.size() == 2);
    for (auto& k : ker) CHECK(iota(qvs, k, etaL).is_structural_zero());
    // spans {d/dv, s d/ds + d/dq} up to scaling
    bool has_dv = false, has_mixed = false;
    for (auto& k : ker) {
        if (k == VecField::basis("v")) has_dv = true;
        if (!k.comp("q").is_structural_zero() &&
            k.comp("s") == k.comp("q") * sym("s"))
            has_mixed = true;
    }
    CHECK(has_dv);
    CHECK(has_mixed);

    auto ker2 = kernel_basis(qvs, {ext_d(qvs, etaL)});
    REQUIRE(ker2.size() == 1);
    CHECK(ker2[0] == VecField::basis("v"));

    Chart ch = tqv();
    auto ker3 = kernel_basis(ch, {DiffForm::d_coord(ch, "t")});
    REQUIRE(ker3.size() == 2);

    auto ann = annihilator_basis(ch, {VecField::basis("q")});
    CHECK(ann.size() == 2);
    for (auto& a : ann)
        CHECK(iota(ch, VecField::basis("q"), a).is_structural_zero());
}

TEST_CASE("solve_linear classification") {
    Chart ch = tqv();
    LinSolveOptions opts;
    // unique
    auto r = solve_linear({{sym("v"), Expr(0)}, {Expr(0), Expr(2)}},
                          {sym("q"), sym("t")}, opts, &ch);
    REQUIRE(r.consistent);
    CHECK(r.particular[0] == sym("q") / sym("v"));
    CHECK(r.particular[1] == sym("t") / Expr(2));
    CHECK(r.kernel.empty());
    // coordinate-free contradiction
    auto r2 = solve_linear({{Expr(1)}, {Expr(1)}}, {Expr(0), Expr(1)}, opts, &ch);
    CHECK(!r2.consistent);
    REQUIRE(r2.witness.has_value());
    // coordinate-dependent leftover row becomes a residual
    auto r3 = solve_linear({{Expr(1)}, {Expr(0)}}, {Expr(0), sym("q")}, opts, &ch);
    CHECK(r3.consistent);
    REQUIRE(r3.residuals.size() == 1);
    CHECK(r3.residuals[0] == sym("q"));
    // undecidable pivot fails loudly
    Expr pyth = varigeo::symexpr::Expr::call(varigeo::symexpr::Fn::Sin, sym("q")).pow(2) +
                varigeo::symexpr::Expr::call(varigeo::symexpr::Fn::Cos, sym("q")).pow(2) -
                Expr(1);
    CHECK_THROWS_AS(solve_linear({{pyth}}, {Expr(1)}, opts, &ch),
                    RankUndecidedError);
}

TEST_CASE("d after d vanishes on fuzzed forms") {
    Chart ch = tqvs();
    fuzz::Rng rng(1001);
    for (int i = 0; i < 1000; ++i) {
        DiffForm a = fuzz::form(rng, ch, i % 3);
        CHECK(ext_d(ch, ext_d(ch, a)).is_structural_zero());
    }
}

TEST_CASE("Cartan formula on fuzzed inputs") {
    Chart ch = tqvs();
    fuzz::Rng rng(1002);
    for (int i = 0; i < 300; ++i) {
        DiffForm a = fuzz::form(rng, ch, 1 + i % 2);
        VecField X = fuzz::field(rng, ch);
        DiffForm lhs = lie(ch, X, a);
        DiffForm rhs = iota(ch, X, ext_d(ch, a)) + ext_d(ch, iota(ch, X, a));
        CHECK((lhs - rhs).is_structural_zero());
    }
}

TEST_CASE("graded commutativity on fuzzed forms") {
    Chart ch = tqvs();
    fuzz::Rng rng(1003);
    for (int i = 0; i < 300; ++i) {
        int p = i % 3, q = (i / 3) % 2 + 1;
        DiffForm a = fuzz::form(rng, ch, p);
        DiffForm b = fuzz::form(rng, ch, q);
        DiffForm flip = wedge(b, a);
        if ((p * q) % 2 == 1) flip = -flip;
        CHECK((wedge(a, b) - flip).is_structural_zero());
    }
}

TEST_CASE("pullback commutes with d on fuzzed maps") {
    Chart src = tqv();
    Chart tgt({{"t", Role::Time}, {"x", Role::Position}, {"y", Role::Velocity}});
    fuzz::Rng rng(1004);
    auto vars = fuzz::names(src);
    for (int i = 0; i < 300; ++i) {
        CoordMap m(src, tgt,
                   {{"t", sym("t")},
                    {"x", fuzz::poly(rng, vars)},
                    {"y", fuzz::poly(rng, vars)}});
        DiffForm a = fuzz::form(rng, tgt, i % 2);
        CHECK((m.pullback(ext_d(tgt, a)) - ext_d(src, m.pullback(a)))
                  .is_structural_zero());
    }
}

TEST_CASE("iota is Expr-linear in the field") {
    Chart ch = tqvs();
    fuzz::Rng rng(1005);
    auto vars = fuzz::names(ch);
    for (int i = 0; i < 100; ++i) {
        DiffForm a = fuzz::form(rng, ch, 2);
        VecField X = fuzz::field(rng, ch);
        Expr f = fuzz::poly(rng, vars);
        CHECK((iota(ch, X * f, a) - iota(ch, X, a) * f).is_structural_zero());
    }
}
