#pragma once

// Exterior calculus on a single adapted chart.
//
// A Chart is an ordered list of named coordinates with roles (time, position,
// velocity, ...), plus parameter symbols and declared opaque functions.
// Differential forms are sparse: degree plus a map from strictly increasing
// coordinate-index tuples to scalar coefficients; structurally zero
// coefficients are purged on construction.

#include "varigeo/symexpr.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace varigeo::excalc {

using symexpr::Expr;
using symexpr::Rat;
using symexpr::ZeroTestOptions;
using symexpr::ZeroVerdict;

struct ChartError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// A symbolic pivot whose vanishing could not be decided; callers surface this
// as a hard failure rather than guessing a rank.
struct RankUndecidedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Role { Time, Position, Velocity, Action, Auxiliary, Momentum, ActionMomentum };

std::string role_name(Role r);

struct Coord {
    std::string name;
    Role role;
};

class VecField;

class Chart {
public:
    Chart() = default;
    Chart(std::vector<Coord> coords, std::vector<std::string> params = {});

    const std::vector<Coord>& coords() const { return coords_; }
    const std::vector<std::string>& params() const { return params_; }
    std::size_t dim() const { return coords_.size(); }

    bool has(const std::string& name) const;
    bool has_param(const std::string& name) const;
    int index(const std::string& name) const;  // throws if absent
    const std::string& name(int i) const { return coords_.at(i).name; }
    Role role(int i) const { return coords_.at(i).role; }

    std::vector<std::string> names_with_role(Role r) const;
    std::optional<std::string> unique_with_role(Role r) const;

    // New chart with extra coordinates appended (order preserved).
    Chart extended_with(std::vector<Coord> extra) const;

    // True when the expression involves only chart coordinates, parameters,
    // and opaque functions declared over chart coordinates.
    bool covers(const Expr& e) const;

private:
    void validate() const;
    std::vector<Coord> coords_;
    std::vector<std::string> params_;
};

// Sparse exterior form of homogeneous degree on a chart.  Keys are strictly
// increasing coordinate-index tuples; degree 0 uses the empty tuple.
class DiffForm {
public:
    DiffForm() : degree_(0) {}
    explicit DiffForm(int degree) : degree_(degree) {}
    DiffForm(int degree, std::map<std::vector<int>, Expr> terms);

    static DiffForm scalar(const Expr& e);
    // The coordinate differential d<name>.
    static DiffForm d_coord(const Chart& chart, const std::string& name);

    int degree() const { return degree_; }
    bool is_structural_zero() const { return terms_.empty(); }
    const std::map<std::vector<int>, Expr>& terms() const { return terms_; }

    Expr coeff(const std::vector<int>& idx) const;  // zero if absent
    Expr scalar_value() const;  // degree 0 only

    DiffForm operator+(const DiffForm&) const;
    DiffForm operator-(const DiffForm&) const;
    DiffForm operator-() const;
    DiffForm operator*(const Expr& s) const;
    DiffForm& operator+=(const DiffForm& o) { return *this = *this + o; }
    DiffForm& operator-=(const DiffForm& o) { return *this = *this - o; }

    // Structural equality of canonical coefficients.
    bool operator==(const DiffForm&) const;
    bool operator!=(const DiffForm& o) const { return !(*this == o); }

    std::string str(const Chart& chart) const;

private:
    void set(std::vector<int> idx, const Expr& e);
    int degree_;
    std::map<std::vector<int>, Expr> terms_;
    friend DiffForm wedge(const DiffForm&, const DiffForm&);
    friend DiffForm ext_d(const Chart&, const DiffForm&);
    friend DiffForm iota(const Chart&, const VecField&, const DiffForm&);
    friend class CoordMap;
};

// Vector field: coefficient of each coordinate direction (sparse).
class VecField {
public:
    VecField() = default;
    explicit VecField(std::map<std::string, Expr> comps);

    static VecField basis(const std::string& coord);  // d/d<coord>

    const std::map<std::string, Expr>& comps() const { return comps_; }
    Expr comp(const std::string& coord) const;  // zero if absent

    VecField operator+(const VecField&) const;
    VecField operator-(const VecField&) const;
    VecField operator*(const Expr& s) const;
    bool operator==(const VecField&) const;
    bool operator!=(const VecField& o) const { return !(*this == o); }

    // Directional derivative of a scalar.
    Expr apply(const Expr& f) const;

    std::string str() const;

private:
    std::map<std::string, Expr> comps_;
};

DiffForm wedge(const DiffForm& a, const DiffForm& b);
DiffForm ext_d(const Chart& chart, const DiffForm& w);
DiffForm iota(const Chart& chart, const VecField& v, const DiffForm& w);
// Cartan formula: L_v = iota(v) d + d iota(v).
DiffForm lie(const Chart& chart, const VecField& v, const DiffForm& w);

// Smooth map between charts, given per-target-coordinate expressions in the
// source chart's coordinates.  pullback transports forms from target to
// source (d phi^y substituted for dy).
class CoordMap {
public:
    CoordMap(Chart source, Chart target, std::map<std::string, Expr> images);

    const Chart& source() const { return source_; }
    const Chart& target() const { return target_; }
    const Expr& image(const std::string& target_coord) const;

    DiffForm pullback(const DiffForm& w) const;

private:
    Chart source_, target_;
    std::map<std::string, Expr> images_;
};

// ---- symbolic linear algebra --------------------------------------------

struct LinSolveOptions {
    ZeroTestOptions zero;
};

struct LinSolveResult {
    bool consistent = true;
    // One particular solution (free variables pinned to zero); empty when
    // inconsistent.
    std::vector<Expr> particular;
    // Basis of the homogeneous kernel.
    std::vector<std::vector<Expr>> kernel;
    // Residual rows 0 = r discovered during elimination that involve the
    // unknowns' base coordinates: candidate secondary constraints.
    std::vector<Expr> residuals;
    // When inconsistent: a row that reduced to 0 = nonzero.
    std::optional<Expr> witness;
};

// Solve A x = b over the expression field.  Pivot decisions use the
// probabilistic zero test; an Unknown verdict raises RankUndecidedError.
// Rows reducing to 0 = r with r not identically zero are classified as
// inconsistency witnesses when r is free of the given chart's coordinates,
// and as residual constraints otherwise.
LinSolveResult solve_linear(const std::vector<std::vector<Expr>>& A,
                            const std::vector<Expr>& b,
                            const LinSolveOptions& opts,
                            const Chart* chart = nullptr);

// Basis of vector fields contracting every given form (degree 1 or 2) to
// zero.
std::vector<VecField> kernel_basis(const Chart& chart,
                                   const std::vector<DiffForm>& one_forms,
                                   const LinSolveOptions& opts = {});

// Basis of 1-forms annihilating every given vector field.
std::vector<DiffForm> annihilator_basis(const Chart& chart,
                                        const std::vector<VecField>& fields,
                                        const LinSolveOptions& opts = {});

}  // namespace varigeo::excalc
