#include "varigeo/excalc.hpp"

#include <algorithm>
#include <sstream>

namespace varigeo::excalc {

std::string role_name(Role r) {
    switch (r) {
        case Role::Time: return "time";
        case Role::Position: return "position";
        case Role::Velocity: return "velocity";
        case Role::Action: return "action";
        case Role::Auxiliary: return "auxiliary";
        case Role::Momentum: return "momentum";
        case Role::ActionMomentum: return "action_momentum";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Chart

Chart::Chart(std::vector<Coord> coords, std::vector<std::string> params)
    : coords_(std::move(coords)), params_(std::move(params)) {
    validate();
}

void Chart::validate() const {
    if (coords_.empty()) throw ChartError("chart has no coordinates");
    std::set<std::string> seen;
    for (auto& c : coords_) {
        if (c.name.empty()) throw ChartError("empty coordinate name");
        if (!seen.insert(c.name).second)
            throw ChartError("duplicate coordinate: " + c.name);
    }
    for (auto& p : params_) {
        if (!seen.insert(p).second)
            throw ChartError("parameter collides with another name: " + p);
    }
    // "d" + coordinate is reserved for the coordinate differential in the
    // surface syntax; no name may shadow one.
    for (auto& c : coords_) {
        if (seen.count("d" + c.name))
            throw ChartError("name shadows differential d" + c.name);
    }
}

bool Chart::has(const std::string& name) const {
    return std::any_of(coords_.begin(), coords_.end(),
                       [&](const Coord& c) { return c.name == name; });
}

bool Chart::has_param(const std::string& name) const {
    return std::find(params_.begin(), params_.end(), name) != params_.end();
}

int Chart::index(const std::string& name) const {
    for (std::size_t i = 0; i < coords_.size(); ++i)
        if (coords_[i].name == name) return static_cast<int>(i);
    throw ChartError("no such coordinate: " + name);
}

std::vector<std::string> Chart::names_with_role(Role r) const {
    std::vector<std::string> out;
    for (auto& c : coords_)
        if (c.role == r) out.push_back(c.name);
    return out;
}

std::optional<std::string> Chart::unique_with_role(Role r) const {
    auto v = names_with_role(r);
    if (v.size() == 1) return v.front();
    return std::nullopt;
}

Chart Chart::extended_with(std::vector<Coord> extra) const {
    std::vector<Coord> all = coords_;
    all.insert(all.end(), extra.begin(), extra.end());
    return Chart(std::move(all), params_);
}

bool Chart::covers(const Expr& e) const {
    for (auto& s : e.symbols()) {
        if (!has(s) && !has_param(s)) return false;
    }
    for (auto& f : e.opaque_functions()) {
        for (auto& dep : symexpr::function_deps(f)) {
            if (!has(dep) && !has_param(dep)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// DiffForm

DiffForm::DiffForm(int degree, std::map<std::vector<int>, Expr> terms)
    : degree_(degree) {
    if (degree < 0) throw FormError("negative form degree");
    for (auto& [idx, e] : terms) {
        if (static_cast<int>(idx.size()) != degree)
            throw FormError("index tuple length does not match degree");
        for (std::size_t i = 0; i + 1 < idx.size(); ++i)
            if (idx[i] >= idx[i + 1])
                throw FormError("index tuple not strictly increasing");
        if (!e.is_structural_zero()) terms_.emplace(idx, e);
    }
}

DiffForm DiffForm::scalar(const Expr& e) {
    DiffForm f(0);
    if (!e.is_structural_zero()) f.terms_.emplace(std::vector<int>{}, e);
    return f;
}

DiffForm DiffForm::d_coord(const Chart& chart, const std::string& name) {
    DiffForm f(1);
    f.terms_.emplace(std::vector<int>{chart.index(name)}, Expr(1LL));
    return f;
}

Expr DiffForm::coeff(const std::vector<int>& idx) const {
    auto it = terms_.find(idx);
    return it == terms_.end() ? Expr() : it->second;
}

Expr DiffForm::scalar_value() const {
    if (degree_ != 0) throw FormError("scalar_value on nonzero degree");
    return coeff({});
}

void DiffForm::set(std::vector<int> idx, const Expr& e) {
    if (e.is_structural_zero())
        terms_.erase(idx);
    else
        terms_.insert_or_assign(std::move(idx), e);
}

DiffForm DiffForm::operator+(const DiffForm& o) const {
    if (is_structural_zero()) return o;
    if (o.is_structural_zero()) return *this;
    if (degree_ != o.degree_) throw FormError("degree mismatch in sum");
    DiffForm r = *this;
    for (auto& [idx, e] : o.terms_) r.set(idx, r.coeff(idx) + e);
    return r;
}

DiffForm DiffForm::operator-() const {
    DiffForm r = *this;
    for (auto& [idx, e] : r.terms_) e = -e;
    return r;
}

DiffForm DiffForm::operator-(const DiffForm& o) const { return *this + (-o); }

DiffForm DiffForm::operator*(const Expr& s) const {
    DiffForm r(degree_);
    if (s.is_structural_zero()) return r;
    for (auto& [idx, e] : terms_) r.terms_.emplace(idx, e * s);
    return r;
}

bool DiffForm::operator==(const DiffForm& o) const {
    if (is_structural_zero() && o.is_structural_zero()) return true;
    if (degree_ != o.degree_) return false;
    if (terms_.size() != o.terms_.size()) return false;
    for (auto& [idx, e] : terms_) {
        auto it = o.terms_.find(idx);
        if (it == o.terms_.end() || !(e == it->second)) return false;
    }
    return true;
}

std::string DiffForm::str(const Chart& chart) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [idx, e] : terms_) {
        if (!first) os << " + ";
        first = false;
        std::string c = e.str();
        if (idx.empty()) {
            os << c;
            continue;
        }
        bool trivial = e.is_rational() && e.rational_value() == 1;
        if (!trivial) os << "(" << c << ")*";
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (i) os << "^";
            os << "d" << chart.name(idx[i]);
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// VecField

VecField::VecField(std::map<std::string, Expr> comps) {
    for (auto& [k, e] : comps)
        if (!e.is_structural_zero()) comps_.emplace(k, e);
}

VecField VecField::basis(const std::string& coord) {
    return VecField({{coord, Expr(1LL)}});
}

Expr VecField::comp(const std::string& coord) const {
    auto it = comps_.find(coord);
    return it == comps_.end() ? Expr() : it->second;
}

VecField VecField::operator+(const VecField& o) const {
    std::map<std::string, Expr> r = comps_;
    for (auto& [k, e] : o.comps_) {
        auto it = r.find(k);
        if (it == r.end())
            r.emplace(k, e);
        else
            it->second += e;
    }
    return VecField(std::move(r));
}

VecField VecField::operator-(const VecField& o) const {
    return *this + o * Expr(-1LL);
}

VecField VecField::operator*(const Expr& s) const {
    std::map<std::string, Expr> r;
    for (auto& [k, e] : comps_) r.emplace(k, e * s);
    return VecField(std::move(r));
}

bool VecField::operator==(const VecField& o) const {
    std::set<std::string> keys;
    for (auto& [k, e] : comps_) keys.insert(k);
    for (auto& [k, e] : o.comps_) keys.insert(k);
    for (auto& k : keys)
        if (!(comp(k) == o.comp(k))) return false;
    return true;
}

Expr VecField::apply(const Expr& f) const {
    Expr r;
    for (auto& [k, e] : comps_) r += e * f.derivative(k);
    return r;
}

std::string VecField::str() const {
    if (comps_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [k, e] : comps_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << e.str() << ")*@" << k;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Operations

namespace {

// Merge two strictly increasing tuples; returns sign of the shuffle, or 0 if
// they share an index.
int merge_indices(const std::vector<int>& a, const std::vector<int>& b,
                  std::vector<int>& out) {
    out.clear();
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    int sign = 1;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return 0;
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else {
            // b[j] jumps over the remaining a-entries
            if ((a.size() - i) % 2 == 1) sign = -sign;
            out.push_back(b[j++]);
        }
    }
    while (i < a.size()) out.push_back(a[i++]);
    while (j < b.size()) out.push_back(b[j++]);
    return sign;
}

// Insert index k into a strictly increasing tuple; returns sign, 0 if present.
int insert_index(const std::vector<int>& idx, int k, std::vector<int>& out) {
    out.clear();
    out.reserve(idx.size() + 1);
    int sign = 1;
    bool placed = false;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] == k) return 0;
        if (!placed && idx[i] > k) {
            out.push_back(k);
            placed = true;
        }
        if (!placed) sign = -sign;
        out.push_back(idx[i]);
    }
    if (!placed) out.push_back(k);
    return sign;
}

}  // namespace

DiffForm wedge(const DiffForm& a, const DiffForm& b) {
    DiffForm r(a.degree() + b.degree());
    for (auto& [ia, ea] : a.terms()) {
        for (auto& [ib, eb] : b.terms()) {
            std::vector<int> merged;
            int sign = merge_indices(ia, ib, merged);
            if (sign == 0) continue;
            Expr c = ea * eb;
            if (sign < 0) c = -c;
            r.set(merged, r.coeff(merged) + c);
        }
    }
    return r;
}

DiffForm ext_d(const Chart& chart, const DiffForm& w) {
    DiffForm r(w.degree() + 1);
    for (auto& [idx, e] : w.terms()) {
        for (int i = 0; i < static_cast<int>(chart.dim()); ++i) {
            Expr de = e.derivative(chart.name(i));
            if (de.is_structural_zero()) continue;
            std::vector<int> ext;
            int sign = insert_index(idx, i, ext);
            if (sign == 0) continue;
            if (sign < 0) de = -de;
            r.set(ext, r.coeff(ext) + de);
        }
    }
    return r;
}

DiffForm iota(const Chart& chart, const VecField& v, const DiffForm& w) {
    if (w.degree() == 0) throw FormError("interior product of a 0-form");
    DiffForm r(w.degree() - 1);
    for (auto& [idx, e] : w.terms()) {
        for (std::size_t j = 0; j < idx.size(); ++j) {
            Expr vc = v.comp(chart.name(idx[j]));
            if (vc.is_structural_zero()) continue;
            Expr c = vc * e;
            if (j % 2 == 1) c = -c;
            std::vector<int> rest;
            rest.reserve(idx.size() - 1);
            for (std::size_t k = 0; k < idx.size(); ++k)
                if (k != j) rest.push_back(idx[k]);
            r.set(rest, r.coeff(rest) + c);
        }
    }
    return r;
}

DiffForm lie(const Chart& chart, const VecField& v, const DiffForm& w) {
    if (w.degree() == 0) return DiffForm::scalar(v.apply(w.scalar_value()));
    return iota(chart, v, ext_d(chart, w)) + ext_d(chart, iota(chart, v, w));
}

// ---------------------------------------------------------------------------
// CoordMap

CoordMap::CoordMap(Chart source, Chart target, std::map<std::string, Expr> images)
    : source_(std::move(source)), target_(std::move(target)), images_(std::move(images)) {
    for (auto& c : target_.coords()) {
        auto it = images_.find(c.name);
        if (it == images_.end())
            throw ChartError("coordinate map missing image for " + c.name);
        if (!source_.covers(it->second))
            throw ChartError("image of " + c.name + " not over source chart");
    }
}

const Expr& CoordMap::image(const std::string& target_coord) const {
    auto it = images_.find(target_coord);
    if (it == images_.end()) throw ChartError("no image for " + target_coord);
    return it->second;
}

DiffForm CoordMap::pullback(const DiffForm& w) const {
    std::map<std::string, Expr> subst;
    for (auto& [k, e] : images_) subst.emplace(k, e);

    // d(phi^y) for each target coordinate, computed once.
    std::vector<DiffForm> dphi;
    dphi.reserve(target_.dim());
    for (std::size_t i = 0; i < target_.dim(); ++i)
        dphi.push_back(ext_d(source_, DiffForm::scalar(image(target_.name(i)))));

    DiffForm r(w.degree());
    for (auto& [idx, e] : w.terms()) {
        DiffForm term = DiffForm::scalar(e.substitute(subst));
        for (int i : idx) term = wedge(term, dphi[static_cast<std::size_t>(i)]);
        r += term;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Linear solve

namespace {

bool pivot_nonzero(const Expr& e, const LinSolveOptions& opts) {
    if (e.is_structural_zero()) return false;
    switch (symexpr::is_zero(e, opts.zero)) {
        case ZeroVerdict::Zero: return false;
        case ZeroVerdict::NonZero: return true;
        case ZeroVerdict::Unknown:
            throw RankUndecidedError("pivot candidate undecided: " + e.str());
    }
    return false;
}

}  // namespace

LinSolveResult solve_linear(const std::vector<std::vector<Expr>>& A,
                            const std::vector<Expr>& b,
                            const LinSolveOptions& opts,
                            const Chart* chart) {
    const std::size_t m = A.size();
    const std::size_t n = m ? A[0].size() : 0;
    for (auto& row : A)
        if (row.size() != n) throw std::invalid_argument("ragged matrix");
    if (b.size() != m) throw std::invalid_argument("rhs size mismatch");

    // augmented working copy
    std::vector<std::vector<Expr>> R(m, std::vector<Expr>(n + 1));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) R[i][j] = A[i][j];
        R[i][n] = b[i];
    }

    std::vector<int> pivot_col;  // per pivot row
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < m; ++c) {
        std::size_t p = m;
        for (std::size_t i = r; i < m; ++i) {
            if (pivot_nonzero(R[i][c], opts)) {
                p = i;
                break;
            }
        }
        if (p == m) continue;
        std::swap(R[r], R[p]);
        // scale pivot row to leading 1
        Expr inv = Expr(1LL) / R[r][c];
        for (std::size_t j = c; j <= n; ++j) R[r][j] = R[r][j] * inv;
        // eliminate everywhere else (full RREF)
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r || R[i][c].is_structural_zero()) continue;
            Expr f = R[i][c];
            for (std::size_t j = c; j <= n; ++j) R[i][j] -= f * R[r][j];
        }
        pivot_col.push_back(static_cast<int>(c));
        ++r;
    }

    LinSolveResult out;
    // classify leftover rows
    for (std::size_t i = r; i < m; ++i) {
        const Expr& res = R[i][n];
        if (res.is_structural_zero()) continue;
        bool coord_dep = false;
        if (chart) {
            for (auto& co : chart->coords())
                if (res.depends_on(co.name)) {
                    coord_dep = true;
                    break;
                }
        }
        if (coord_dep) {
            out.residuals.push_back(res);
        } else {
            switch (symexpr::is_zero(res, opts.zero)) {
                case ZeroVerdict::Zero: break;
                case ZeroVerdict::NonZero:
                    out.consistent = false;
                    if (!out.witness) out.witness = res;
                    break;
                case ZeroVerdict::Unknown:
                    throw RankUndecidedError("residual undecided: " + res.str());
            }
        }
    }

    std::vector<bool> is_pivot(n, false);
    for (int c : pivot_col) is_pivot[static_cast<std::size_t>(c)] = true;

    if (out.consistent) {
        out.particular.assign(n, Expr());
        for (std::size_t k = 0; k < pivot_col.size(); ++k)
            out.particular[static_cast<std::size_t>(pivot_col[k])] = R[k][n];
    }
    for (std::size_t f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Expr> v(n, Expr());
        v[f] = Expr(1LL);
        for (std::size_t k = 0; k < pivot_col.size(); ++k)
            v[static_cast<std::size_t>(pivot_col[k])] = -R[k][f];
        out.kernel.push_back(std::move(v));
    }
    return out;
}

std::vector<VecField> kernel_basis(const Chart& chart,
                                   const std::vector<DiffForm>& one_forms,
                                   const LinSolveOptions& opts) {
    const std::size_t n = chart.dim();
    std::vector<std::vector<Expr>> A;
    for (auto& a : one_forms) {
        if (a.degree() == 1) {
            std::vector<Expr> row(n);
            for (std::size_t i = 0; i < n; ++i)
                row[i] = a.coeff({static_cast<int>(i)});
            A.push_back(std::move(row));
        } else if (a.degree() == 2) {
            // one row per free slot j: sum_i X^i a(e_i, e_j) = 0
            for (int j = 0; j < static_cast<int>(n); ++j) {
                std::vector<Expr> row(n);
                for (int i = 0; i < static_cast<int>(n); ++i) {
                    if (i < j) row[i] = a.coeff({i, j});
                    else if (i > j) row[i] = -a.coeff({j, i});
                }
                A.push_back(std::move(row));
            }
        } else {
            throw FormError("kernel_basis expects forms of degree 1 or 2");
        }
    }
    auto res = solve_linear(A, std::vector<Expr>(A.size(), Expr()), opts, &chart);
    std::vector<VecField> out;
    for (auto& v : res.kernel) {
        std::map<std::string, Expr> comps;
        for (std::size_t i = 0; i < n; ++i)
            if (!v[i].is_structural_zero()) comps.emplace(chart.name(i), v[i]);
        out.emplace_back(std::move(comps));
    }
    return out;
}

std::vector<DiffForm> annihilator_basis(const Chart& chart,
                                        const std::vector<VecField>& fields,
                                        const LinSolveOptions& opts) {
    const std::size_t n = chart.dim();
    std::vector<std::vector<Expr>> A;
    for (auto& v : fields) {
        std::vector<Expr> row(n);
        for (std::size_t i = 0; i < n; ++i) row[i] = v.comp(chart.name(i));
        A.push_back(std::move(row));
    }
    auto res = solve_linear(A, std::vector<Expr>(A.size(), Expr()), opts, &chart);
    std::vector<DiffForm> out;
    for (auto& v : res.kernel) {
        std::map<std::vector<int>, Expr> terms;
        for (std::size_t i = 0; i < n; ++i)
            if (!v[i].is_structural_zero())
                terms.emplace(std::vector<int>{static_cast<int>(i)}, v[i]);
        out.emplace_back(1, std::move(terms));
    }
    return out;
}

}  // namespace varigeo::excalc
