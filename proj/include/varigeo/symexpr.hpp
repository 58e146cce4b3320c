#pragma once

// Symbolic scalar expressions over chart coordinates.
//
// Expressions are kept in a canonical rational normal form: a pair of
// multivariate polynomials (numerator, denominator) with exact rational
// coefficients, over a set of interned "atoms".  An atom is a coordinate or
// parameter symbol, a unary function application (sin, cos, tan, exp, log),
// a fractional power of a canonical expression, or an opaque partial
// derivative D(f, x1, ..., xk) of a declared function f.  Monomial exponents
// are positive rationals, so sqrt(x)*sqrt(x) collapses to x and fractional
// powers need no special casing downstream.
//
// Equality is field equality (cross-multiplied polynomial identity), which
// is decidable for this fragment.  No trig/exp identities are applied;
// transcendental cancellations fall back to probabilistic zero testing.
//
// All values are immutable and safe to share across threads.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace varigeo::symexpr {

using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

enum class Fn { Sin, Cos, Tan, Exp, Log };

std::string fn_name(Fn f);

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using AtomId = std::int32_t;

// Monomial: sorted (atom, exponent) pairs, exponents > 0.
using Mono = std::vector<std::pair<AtomId, Rat>>;

struct MonoLess {
    bool operator()(const Mono& a, const Mono& b) const;
};

using Poly = std::map<Mono, Rat, MonoLess>;

// Evaluation environment.  Opaque atoms (D(f,...) applications) have no
// closed form; callers that need them evaluated supply per-atom values.
struct EvalEnv {
    std::map<std::string, double> symbols;
    std::map<AtomId, double> opaque;  // values for Deriv atoms
};

class Expr {
public:
    Expr();  // zero
    Expr(long long n);
    explicit Expr(const Rat& r);

    static Expr symbol(const std::string& name);
    static Expr call(Fn f, const Expr& arg);
    // Opaque function value (partials empty) or partial derivative.
    static Expr deriv(const std::string& fname, std::vector<std::string> partials = {});

    bool is_structural_zero() const;
    bool is_rational() const;
    Rat rational_value() const;  // throws unless is_rational()

    Expr operator+(const Expr&) const;
    Expr operator-(const Expr&) const;
    Expr operator*(const Expr&) const;
    Expr operator/(const Expr&) const;  // throws on structurally-zero divisor
    Expr operator-() const;
    Expr& operator+=(const Expr& o) { return *this = *this + o; }
    Expr& operator-=(const Expr& o) { return *this = *this - o; }
    Expr& operator*=(const Expr& o) { return *this = *this * o; }

    Expr pow(long long n) const;
    Expr pow(const Rat& e) const;

    // Field equality: num_a * den_b == num_b * den_a as polynomials.
    bool operator==(const Expr&) const;
    bool operator!=(const Expr& o) const { return !(*this == o); }

    // Exact partial derivative with respect to a symbol.
    Expr derivative(const std::string& x) const;

    // Symbol-for-expression substitution.  Opaque Deriv atoms are left
    // untouched; substituting under them is undefined.
    Expr substitute(const std::map<std::string, Expr>& repl) const;

    double eval(const EvalEnv& env) const;  // throws EvalError
    double eval(const std::map<std::string, double>& point) const;

    // All symbol names occurring anywhere (inside calls and powers too).
    std::set<std::string> symbols() const;
    bool depends_on(const std::string& name) const;
    // Names of opaque functions whose derivatives occur in the expression.
    std::set<std::string> opaque_functions() const;
    // Atom ids of opaque Deriv atoms (for eval environments).
    std::set<AtomId> opaque_atoms() const;

    std::string str() const;  // grammar-conformant canonical text

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

private:
    Expr(Poly n, Poly d);
    void normalize();
    Poly num_, den_;
    friend struct ExprAccess;
};

// Declared opaque functions and their coordinate dependencies.  Derivatives
// of f with respect to anything outside deps(f) vanish.
void register_function(const std::string& name, std::vector<std::string> deps);
bool is_registered_function(const std::string& name);
const std::vector<std::string>& function_deps(const std::string& name);

// ---- probabilistic zero test --------------------------------------------

enum class ZeroVerdict { Zero, NonZero, Unknown };

struct ZeroTestOptions {
    int trials = 8;
    double tolerance = 1e-9;
    std::uint64_t seed = 20240817ull;
};

// Zero iff the canonical form is structurally 0.  NonZero as soon as one
// random evaluation exceeds the tolerance.  Unknown when every draw lands in
// a singular locus, or when the expression evaluates below tolerance
// everywhere without being structurally zero (no verdict is safe then).
ZeroVerdict is_zero(const Expr& e, const ZeroTestOptions& opt = {});

std::string verdict_name(ZeroVerdict v);

// Convenience builders.
inline Expr sym(const std::string& n) { return Expr::symbol(n); }
Expr sqrt(const Expr& e);

}  // namespace varigeo::symexpr
