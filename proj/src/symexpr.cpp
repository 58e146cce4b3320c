#include "varigeo/symexpr.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <random>
#include <sstream>
#include <unordered_map>

namespace varigeo::symexpr {

std::string fn_name(Fn f) {
    switch (f) {
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Tan: return "tan";
        case Fn::Exp: return "exp";
        case Fn::Log: return "log";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Atom table

namespace {

struct AtomData {
    enum class Kind : std::uint8_t { Symbol, Call, Deriv, Power } kind;
    std::string name;                    // Symbol / Deriv function name
    Fn fn{Fn::Sin};                      // Call
    std::shared_ptr<const Expr> sub;     // Call argument or Power base
    std::vector<std::string> partials;   // Deriv (sorted)
    Rat exponent;                        // Power, in (0,1)
    std::string key;                     // canonical identity + sort key
};

class AtomTable {
public:
    static AtomTable& instance() {
        static AtomTable t;
        return t;
    }

    AtomId intern(AtomData&& d) {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = index_.find(d.key);
        if (it != index_.end()) return it->second;
        atoms_.push_back(std::move(d));
        AtomId id = static_cast<AtomId>(atoms_.size() - 1);
        index_.emplace(atoms_.back().key, id);
        return id;
    }

    const AtomData& get(AtomId id) const {
        std::lock_guard<std::mutex> lk(mu_);
        return atoms_[static_cast<std::size_t>(id)];
    }

    bool less(AtomId a, AtomId b) const {
        if (a == b) return false;
        std::lock_guard<std::mutex> lk(mu_);
        return atoms_[static_cast<std::size_t>(a)].key <
               atoms_[static_cast<std::size_t>(b)].key;
    }

private:
    mutable std::mutex mu_;
    std::deque<AtomData> atoms_;  // deque: stable references
    std::unordered_map<std::string, AtomId> index_;
};

struct FunctionRegistry {
    static FunctionRegistry& instance() {
        static FunctionRegistry r;
        return r;
    }
    std::mutex mu;
    std::map<std::string, std::vector<std::string>> deps;
};

bool rat_is_int(const Rat& r) { return denominator(r) == 1; }

long long rat_to_ll(const Rat& r) {
    return numerator(r).convert_to<long long>();
}

}  // namespace

void register_function(const std::string& name, std::vector<std::string> deps) {
    auto& r = FunctionRegistry::instance();
    std::lock_guard<std::mutex> lk(r.mu);
    r.deps[name] = std::move(deps);
}

bool is_registered_function(const std::string& name) {
    auto& r = FunctionRegistry::instance();
    std::lock_guard<std::mutex> lk(r.mu);
    return r.deps.count(name) != 0;
}

const std::vector<std::string>& function_deps(const std::string& name) {
    auto& r = FunctionRegistry::instance();
    std::lock_guard<std::mutex> lk(r.mu);
    auto it = r.deps.find(name);
    if (it == r.deps.end()) throw ExprError("unknown opaque function: " + name);
    return it->second;
}

// ---------------------------------------------------------------------------
// Monomial order: lexicographic over atoms (ascending key), higher exponent
// of an earlier atom sorts first; the constant monomial sorts last.

bool MonoLess::operator()(const Mono& a, const Mono& b) const {
    auto& tab = AtomTable::instance();
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first != b[j].first) {
            return tab.less(a[i].first, b[j].first);
        }
        if (a[i].second != b[j].second) return a[i].second > b[j].second;
        ++i;
        ++j;
    }
    return i < a.size();  // longer (more factors of earlier atoms) first
}

// ---------------------------------------------------------------------------
// Polynomial helpers

namespace {

Poly poly_const(const Rat& c) {
    Poly p;
    if (c != 0) p.emplace(Mono{}, c);
    return p;
}

Poly poly_one() { return poly_const(Rat(1)); }

bool poly_is_const(const Poly& p) {
    return p.empty() || (p.size() == 1 && p.begin()->first.empty());
}

void poly_add_term(Poly& p, const Mono& m, const Rat& c) {
    if (c == 0) return;
    auto [it, inserted] = p.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) p.erase(it);
    }
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r = a;
    for (auto& [m, c] : b) poly_add_term(r, m, c);
    return r;
}

Poly poly_neg(const Poly& a) {
    Poly r = a;
    for (auto& [m, c] : r) c = -c;
    return r;
}

Mono mono_mul(const Mono& a, const Mono& b) {
    auto& tab = AtomTable::instance();
    Mono r;
    r.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && tab.less(a[i].first, b[j].first))) {
            r.push_back(a[i++]);
        } else if (i == a.size() || tab.less(b[j].first, a[i].first)) {
            r.push_back(b[j++]);
        } else {
            Rat e = a[i].second + b[j].second;
            if (e != 0) r.emplace_back(a[i].first, e);
            ++i;
            ++j;
        }
    }
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r;
    for (auto& [ma, ca] : a)
        for (auto& [mb, cb] : b) poly_add_term(r, mono_mul(ma, mb), ca * cb);
    return r;
}

Poly poly_scale(const Poly& a, const Rat& c) {
    Poly r;
    if (c == 0) return r;
    for (auto& [m, k] : a) r.emplace(m, k * c);
    return r;
}

// a / b if b's leading monomial divides a's termwise; nullopt otherwise.
bool mono_divides(const Mono& d, const Mono& m) {
    std::size_t j = 0;
    for (auto& [atom, exp] : d) {
        while (j < m.size() && m[j].first != atom) ++j;
        if (j == m.size() || m[j].second < exp) return false;
    }
    return true;
}

Mono mono_div(const Mono& m, const Mono& d) {
    Mono r;
    std::size_t j = 0;
    for (auto& [atom, exp] : m) {
        Rat e = exp;
        if (j < d.size() && d[j].first == atom) {
            e -= d[j].second;
            ++j;
        }
        if (e != 0) r.emplace_back(atom, e);
    }
    // d's atoms are a subset of m's when mono_divides holds, but they may be
    // interleaved; redo properly if the fast path missed entries.
    if (j != d.size()) {
        r.clear();
        std::map<AtomId, Rat> acc;
        for (auto& [a, e] : m) acc[a] += e;
        for (auto& [a, e] : d) acc[a] -= e;
        Mono tmp;
        for (auto& [a, e] : acc)
            if (e != 0) tmp.emplace_back(a, e);
        auto& tab = AtomTable::instance();
        std::sort(tmp.begin(), tmp.end(), [&](auto& x, auto& y) {
            return tab.less(x.first, y.first);
        });
        r = tmp;
    }
    return r;
}

std::optional<Poly> poly_exact_div(const Poly& a, const Poly& b) {
    if (b.empty()) return std::nullopt;
    Poly q, r = a;
    const auto& blead = *b.begin();
    int guard = 0;
    while (!r.empty()) {
        if (++guard > 4096) return std::nullopt;
        const auto& rlead = *r.begin();
        if (!mono_divides(blead.first, rlead.first)) return std::nullopt;
        Mono qm = mono_div(rlead.first, blead.first);
        Rat qc = rlead.second / blead.second;
        poly_add_term(q, qm, qc);
        Poly sub;
        for (auto& [m, c] : b) poly_add_term(sub, mono_mul(qm, m), qc * c);
        r = poly_add(r, poly_neg(sub));
    }
    return q;
}

std::string rat_str(const Rat& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

// exact integer n-th root, if it exists
std::optional<Int> exact_root(const Int& v, unsigned n) {
    if (v < 0) return std::nullopt;
    if (v == 0 || v == 1) return v;
    Int lo = 1, hi = v;
    while (lo < hi) {
        Int mid = (lo + hi + 1) / 2;
        Int p = 1;
        bool over = false;
        for (unsigned k = 0; k < n; ++k) {
            p *= mid;
            if (p > v) {
                over = true;
                break;
            }
        }
        if (over)
            hi = mid - 1;
        else
            lo = mid;
    }
    Int p = 1;
    for (unsigned k = 0; k < n; ++k) p *= lo;
    if (p == v) return lo;
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr construction / normalization

Expr::Expr() : num_(), den_(poly_one()) {}
Expr::Expr(long long n) : num_(poly_const(Rat(n))), den_(poly_one()) {}
Expr::Expr(const Rat& r) : num_(poly_const(r)), den_(poly_one()) {}
Expr::Expr(Poly n, Poly d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

// Private-ctor access helper.
struct ExprAccess {
    static Expr make(Poly n, Poly d) { return Expr(std::move(n), std::move(d)); }
    static Expr atom(AtomId id) {
        Poly n;
        n.emplace(Mono{{id, Rat(1)}}, Rat(1));
        return Expr(std::move(n), poly_one());
    }
    static Expr atom_pow(AtomId id, const Rat& e) {
        if (e <= 0) throw ExprError("atom_pow: nonpositive exponent");
        Poly n;
        n.emplace(Mono{{id, e}}, Rat(1));
        return Expr(std::move(n), poly_one());
    }
};

Expr Expr::symbol(const std::string& name) {
    if (name.empty()) throw ExprError("empty symbol name");
    AtomData d;
    d.kind = AtomData::Kind::Symbol;
    d.name = name;
    d.key = "s:" + name;
    return ExprAccess::atom(AtomTable::instance().intern(std::move(d)));
}

Expr Expr::call(Fn f, const Expr& arg) {
    // exact special values only
    if (arg.is_rational()) {
        Rat v = arg.rational_value();
        if (v == 0) {
            switch (f) {
                case Fn::Sin:
                case Fn::Tan: return Expr(0);
                case Fn::Cos:
                case Fn::Exp: return Expr(1LL);
                case Fn::Log: throw ExprError("log(0)");
            }
        }
        if (v == 1 && f == Fn::Log) return Expr(0);
    }
    AtomData d;
    d.kind = AtomData::Kind::Call;
    d.fn = f;
    d.sub = std::make_shared<Expr>(arg);
    d.key = "f:" + fn_name(f) + ":" + arg.str();
    return ExprAccess::atom(AtomTable::instance().intern(std::move(d)));
}

Expr Expr::deriv(const std::string& fname, std::vector<std::string> partials) {
    std::sort(partials.begin(), partials.end());
    AtomData d;
    d.kind = AtomData::Kind::Deriv;
    d.name = fname;
    d.partials = std::move(partials);
    d.key = "g:" + fname;
    for (auto& p : d.partials) d.key += ":" + p;
    return ExprAccess::atom(AtomTable::instance().intern(std::move(d)));
}

namespace {
Expr power_atom(const Expr& base, const Rat& frac) {
    AtomData d;
    d.kind = AtomData::Kind::Power;
    d.sub = std::make_shared<Expr>(base);
    d.exponent = frac;
    d.key = "w:" + base.str() + "#" + rat_str(frac);
    return ExprAccess::atom(AtomTable::instance().intern(std::move(d)));
}
}  // namespace

namespace {

// A power atom raised to an exponent whose product with the atom's own
// fractional exponent is an integer can be expanded back into its base,
// e.g. ((x+y)^(1/2))^2 -> x+y.
bool poly_has_reducible_power(const Poly& p) {
    auto& tab = AtomTable::instance();
    for (auto& [m, c] : p) {
        (void)c;
        for (auto& [atom, e] : m) {
            const AtomData& a = tab.get(atom);
            if (a.kind == AtomData::Kind::Power && rat_is_int(e * a.exponent))
                return true;
        }
    }
    return false;
}

Expr expand_power_atoms(const Poly& p) {
    auto& tab = AtomTable::instance();
    Expr total;
    for (auto& [m, c] : p) {
        Expr term{c};
        for (auto& [atom, e] : m) {
            const AtomData& a = tab.get(atom);
            if (a.kind == AtomData::Kind::Power && rat_is_int(e * a.exponent)) {
                term = term * a.sub->pow(rat_to_ll(e * a.exponent));
            } else {
                term = term * ExprAccess::atom_pow(atom, e);
            }
        }
        total += term;
    }
    return total;
}

}  // namespace

void Expr::normalize() {
    if (den_.empty()) throw ExprError("division by structural zero");
    if (poly_has_reducible_power(num_) || poly_has_reducible_power(den_)) {
        Expr r = expand_power_atoms(num_) / expand_power_atoms(den_);
        num_ = std::move(r.num_);
        den_ = std::move(r.den_);
        return;
    }
    if (num_.empty()) {
        den_ = poly_one();
        return;
    }
    // strip common monomial content of all terms (num and den together)
    {
        std::map<AtomId, Rat> content;
        bool first = true;
        auto fold = [&](const Poly& p) {
            for (auto& [m, c] : p) {
                (void)c;
                if (first) {
                    for (auto& [a, e] : m) content[a] = e;
                    first = false;
                } else {
                    std::map<AtomId, Rat> cur;
                    for (auto& [a, e] : m) cur[a] = e;
                    for (auto it = content.begin(); it != content.end();) {
                        auto f2 = cur.find(it->first);
                        if (f2 == cur.end()) {
                            it = content.erase(it);
                        } else {
                            if (f2->second < it->second) it->second = f2->second;
                            ++it;
                        }
                    }
                }
            }
        };
        fold(num_);
        fold(den_);
        if (!content.empty()) {
            Mono g;
            for (auto& [a, e] : content) g.emplace_back(a, e);
            auto& tab = AtomTable::instance();
            std::sort(g.begin(), g.end(),
                      [&](auto& x, auto& y) { return tab.less(x.first, y.first); });
            Poly nn, nd;
            for (auto& [m, c] : num_) nn.emplace(mono_div(m, g), c);
            for (auto& [m, c] : den_) nd.emplace(mono_div(m, g), c);
            num_ = std::move(nn);
            den_ = std::move(nd);
        }
    }
    if (!poly_is_const(den_)) {
        if (auto q = poly_exact_div(num_, den_)) {
            num_ = std::move(*q);
            den_ = poly_one();
        }
    }
    // make denominator leading coefficient 1
    Rat lead = den_.begin()->second;
    if (lead != 1) {
        num_ = poly_scale(num_, Rat(1) / lead);
        den_ = poly_scale(den_, Rat(1) / lead);
    }
}

bool Expr::is_structural_zero() const { return num_.empty(); }

bool Expr::is_rational() const {
    return poly_is_const(num_) && poly_is_const(den_);
}

Rat Expr::rational_value() const {
    if (!is_rational()) throw ExprError("not a rational constant");
    Rat n = num_.empty() ? Rat(0) : num_.begin()->second;
    Rat d = den_.begin()->second;
    return n / d;
}

// ---------------------------------------------------------------------------
// Arithmetic

Expr Expr::operator+(const Expr& o) const {
    if (is_structural_zero()) return o;
    if (o.is_structural_zero()) return *this;
    if (den_ == o.den_)
        return ExprAccess::make(poly_add(num_, o.num_), den_);
    return ExprAccess::make(
        poly_add(poly_mul(num_, o.den_), poly_mul(o.num_, den_)),
        poly_mul(den_, o.den_));
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

Expr Expr::operator-() const {
    Expr r = *this;
    r.num_ = poly_neg(r.num_);
    return r;
}

Expr Expr::operator*(const Expr& o) const {
    if (is_structural_zero() || o.is_structural_zero()) return Expr();
    return ExprAccess::make(poly_mul(num_, o.num_), poly_mul(den_, o.den_));
}

Expr Expr::operator/(const Expr& o) const {
    if (o.is_structural_zero()) throw ExprError("division by structural zero");
    if (is_structural_zero()) return Expr();
    return ExprAccess::make(poly_mul(num_, o.den_), poly_mul(den_, o.num_));
}

Expr Expr::pow(long long n) const {
    if (n == 0) return Expr(1LL);
    if (n < 0) return Expr(1LL) / pow(-n);
    Expr r(1LL), b = *this;
    long long k = n;
    while (k > 0) {
        if (k & 1) r = r * b;
        b = b * b;
        k >>= 1;
    }
    return r;
}

Expr Expr::pow(const Rat& e) const {
    if (rat_is_int(e)) return pow(rat_to_ll(e));
    if (e < 0) return Expr(1LL) / pow(-e);
    if (is_structural_zero()) return Expr();
    // single-term numerator over constant denominator: distribute over atoms
    const bool single = num_.size() == 1 && poly_is_const(den_);
    if (single) {
        const auto& [m, c0] = *num_.begin();
        Rat c = c0 / den_.begin()->second;
        Expr r(1LL);
        for (auto& [atom, exp] : m) {
            Rat ne = exp * e;
            if (rat_is_int(ne)) {
                r = r * ExprAccess::atom(atom).pow(rat_to_ll(ne));
            } else {
                r = r * ExprAccess::atom_pow(atom, ne);
            }
        }
        // coefficient root
        if (c != 1) {
            if (c < 0) throw ExprError("fractional power of negative constant");
            unsigned q = denominator(e).convert_to<unsigned>();
            auto rn = exact_root(numerator(c), q);
            auto rd = exact_root(denominator(c), q);
            if (rn && rd) {
                Rat root(*rn, *rd);
                Expr cpow(1LL);
                Int p = numerator(e);
                Expr base(root);
                cpow = base.pow(p.convert_to<long long>());
                r = r * cpow;
            } else {
                Int ip = numerator(e) / denominator(e);
                Rat frac = e - Rat(ip);
                r = r * Expr(c).pow(Rat(ip)) * power_atom(Expr(c), frac);
            }
        }
        return r;
    }
    Int ip = numerator(e) / denominator(e);
    Rat frac = e - Rat(ip);
    Expr r = pow(ip.convert_to<long long>());
    if (frac != 0) r = r * power_atom(*this, frac);
    return r;
}

bool Expr::operator==(const Expr& o) const {
    if (num_ == o.num_ && den_ == o.den_) return true;
    return poly_mul(num_, o.den_) == poly_mul(o.num_, den_);
}

Expr sqrt(const Expr& e) { return e.pow(Rat(1, 2)); }

// ---------------------------------------------------------------------------
// Derivative

namespace {

Expr datom(AtomId id, const std::string& x);

Expr dmono(const Mono& m, const Rat& coeff, const std::string& x) {
    Expr total;
    for (std::size_t i = 0; i < m.size(); ++i) {
        Expr da = datom(m[i].first, x);
        if (da.is_structural_zero()) continue;
        Expr term(coeff);
        for (std::size_t j = 0; j < m.size(); ++j) {
            Expr a = ExprAccess::atom(m[j].first);
            if (j == i) {
                term = term * Expr(m[i].second) * a.pow(m[i].second - 1) * da;
            } else {
                term = term * a.pow(m[j].second);
            }
        }
        total += term;
    }
    return total;
}

Expr dpoly(const Poly& p, const std::string& x) {
    Expr total;
    for (auto& [m, c] : p) total += dmono(m, c, x);
    return total;
}

Expr poly_as_expr(const Poly& p) { return ExprAccess::make(p, poly_one()); }

Expr datom(AtomId id, const std::string& x) {
    const AtomData& a = AtomTable::instance().get(id);
    switch (a.kind) {
        case AtomData::Kind::Symbol:
            return a.name == x ? Expr(1LL) : Expr();
        case AtomData::Kind::Call: {
            Expr darg = a.sub->derivative(x);
            if (darg.is_structural_zero()) return Expr();
            Expr outer;
            switch (a.fn) {
                case Fn::Sin: outer = Expr::call(Fn::Cos, *a.sub); break;
                case Fn::Cos: outer = -Expr::call(Fn::Sin, *a.sub); break;
                case Fn::Tan: {
                    Expr t = Expr::call(Fn::Tan, *a.sub);
                    outer = Expr(1LL) + t * t;
                    break;
                }
                case Fn::Exp: outer = Expr::call(Fn::Exp, *a.sub); break;
                case Fn::Log: outer = Expr(1LL) / *a.sub; break;
            }
            return outer * darg;
        }
        case AtomData::Kind::Deriv: {
            const auto& deps = function_deps(a.name);
            if (std::find(deps.begin(), deps.end(), x) == deps.end()) return Expr();
            auto partials = a.partials;
            partials.push_back(x);
            return Expr::deriv(a.name, std::move(partials));
        }
        case AtomData::Kind::Power: {
            Expr dbase = a.sub->derivative(x);
            if (dbase.is_structural_zero()) return Expr();
            return Expr(a.exponent) * a.sub->pow(a.exponent - 1) * dbase;
        }
    }
    return Expr();
}

}  // namespace

Expr Expr::derivative(const std::string& x) const {
    Expr n = poly_as_expr(num_);
    Expr d = poly_as_expr(den_);
    Expr dn = dpoly(num_, x);
    if (poly_is_const(den_)) return dn / d;
    Expr dd = dpoly(den_, x);
    return (dn * d - n * dd) / (d * d);
}

// ---------------------------------------------------------------------------
// Substitution

namespace {
Expr subst_atom(AtomId id, const std::map<std::string, Expr>& repl) {
    const AtomData& a = AtomTable::instance().get(id);
    switch (a.kind) {
        case AtomData::Kind::Symbol: {
            auto it = repl.find(a.name);
            return it != repl.end() ? it->second : ExprAccess::atom(id);
        }
        case AtomData::Kind::Call:
            return Expr::call(a.fn, a.sub->substitute(repl));
        case AtomData::Kind::Deriv:
            return ExprAccess::atom(id);
        case AtomData::Kind::Power:
            return a.sub->substitute(repl).pow(a.exponent);
    }
    return ExprAccess::atom(id);
}

Expr subst_poly(const Poly& p, const std::map<std::string, Expr>& repl) {
    Expr total;
    for (auto& [m, c] : p) {
        Expr term{c};
        for (auto& [atom, exp] : m) term = term * subst_atom(atom, repl).pow(exp);
        total += term;
    }
    return total;
}
}  // namespace

Expr Expr::substitute(const std::map<std::string, Expr>& repl) const {
    if (repl.empty()) return *this;
    return subst_poly(num_, repl) / subst_poly(den_, repl);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {
double eval_atom(AtomId id, const EvalEnv& env);

double eval_poly(const Poly& p, const EvalEnv& env) {
    double total = 0.0;
    for (auto& [m, c] : p) {
        double term = c.convert_to<double>();
        for (auto& [atom, exp] : m) {
            double base = eval_atom(atom, env);
            double e = exp.convert_to<double>();
            double v;
            if (rat_is_int(exp)) {
                v = std::pow(base, static_cast<double>(rat_to_ll(exp)));
            } else {
                if (base < 0) throw EvalError("fractional power of negative value");
                v = std::pow(base, e);
            }
            term *= v;
        }
        total += term;
    }
    return total;
}

double eval_atom(AtomId id, const EvalEnv& env) {
    const AtomData& a = AtomTable::instance().get(id);
    switch (a.kind) {
        case AtomData::Kind::Symbol: {
            auto it = env.symbols.find(a.name);
            if (it == env.symbols.end())
                throw EvalError("no value for symbol '" + a.name + "'");
            return it->second;
        }
        case AtomData::Kind::Call: {
            double v = a.sub->eval(env);
            switch (a.fn) {
                case Fn::Sin: return std::sin(v);
                case Fn::Cos: return std::cos(v);
                case Fn::Tan: {
                    double r = std::tan(v);
                    if (!std::isfinite(r)) throw EvalError("tan pole");
                    return r;
                }
                case Fn::Exp: return std::exp(v);
                case Fn::Log:
                    if (v <= 0) throw EvalError("log of nonpositive value");
                    return std::log(v);
            }
            return 0.0;
        }
        case AtomData::Kind::Deriv: {
            auto it = env.opaque.find(id);
            if (it == env.opaque.end())
                throw EvalError("no value for opaque atom D(" + a.name + ",...)");
            return it->second;
        }
        case AtomData::Kind::Power: {
            double b = a.sub->eval(env);
            if (b < 0) throw EvalError("fractional power of negative value");
            return std::pow(b, a.exponent.convert_to<double>());
        }
    }
    return 0.0;
}
}  // namespace

double Expr::eval(const EvalEnv& env) const {
    double n = eval_poly(num_, env);
    double d = eval_poly(den_, env);
    if (d == 0.0 || !std::isfinite(d)) throw EvalError("denominator vanishes");
    double r = n / d;
    if (!std::isfinite(r)) throw EvalError("non-finite value");
    return r;
}

double Expr::eval(const std::map<std::string, double>& point) const {
    EvalEnv env;
    env.symbols = point;
    return eval(env);
}

// ---------------------------------------------------------------------------
// Symbol / atom collection

namespace {
void collect_atoms(const Poly& p, std::set<AtomId>& out);

void collect_from_atom(AtomId id, std::set<AtomId>& out) {
    if (!out.insert(id).second) return;
    const AtomData& a = AtomTable::instance().get(id);
    if (a.sub) {
        collect_atoms(a.sub->num(), out);
        collect_atoms(a.sub->den(), out);
    }
}

void collect_atoms(const Poly& p, std::set<AtomId>& out) {
    for (auto& [m, c] : p) {
        (void)c;
        for (auto& [atom, e] : m) {
            (void)e;
            collect_from_atom(atom, out);
        }
    }
}

std::set<AtomId> all_atoms(const Expr& e) {
    std::set<AtomId> out;
    collect_atoms(e.num(), out);
    collect_atoms(e.den(), out);
    return out;
}
}  // namespace

std::set<std::string> Expr::symbols() const {
    std::set<std::string> out;
    for (AtomId id : all_atoms(*this)) {
        const AtomData& a = AtomTable::instance().get(id);
        if (a.kind == AtomData::Kind::Symbol) out.insert(a.name);
    }
    return out;
}

bool Expr::depends_on(const std::string& name) const {
    for (AtomId id : all_atoms(*this)) {
        const AtomData& a = AtomTable::instance().get(id);
        if (a.kind == AtomData::Kind::Symbol && a.name == name) return true;
        if (a.kind == AtomData::Kind::Deriv) {
            const auto& deps = function_deps(a.name);
            if (std::find(deps.begin(), deps.end(), name) != deps.end()) return true;
        }
    }
    return false;
}

std::set<std::string> Expr::opaque_functions() const {
    std::set<std::string> out;
    for (AtomId id : all_atoms(*this)) {
        const AtomData& a = AtomTable::instance().get(id);
        if (a.kind == AtomData::Kind::Deriv) out.insert(a.name);
    }
    return out;
}

std::set<AtomId> Expr::opaque_atoms() const {
    std::set<AtomId> out;
    for (AtomId id : all_atoms(*this)) {
        const AtomData& a = AtomTable::instance().get(id);
        if (a.kind == AtomData::Kind::Deriv) out.insert(id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string atom_str(AtomId id) {
    const AtomData& a = AtomTable::instance().get(id);
    switch (a.kind) {
        case AtomData::Kind::Symbol: return a.name;
        case AtomData::Kind::Call: return fn_name(a.fn) + "(" + a.sub->str() + ")";
        case AtomData::Kind::Deriv: {
            if (a.partials.empty()) return a.name;
            std::string s = "D(" + a.name;
            for (auto& p : a.partials) s += "," + p;
            return s + ")";
        }
        case AtomData::Kind::Power:
            return "(" + a.sub->str() + ")^(" + rat_str(a.exponent) + ")";
    }
    return "?";
}

std::string mono_str(const Mono& m) {
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) s += "*";
        s += atom_str(m[i].first);
        if (m[i].second != 1) {
            if (rat_is_int(m[i].second) && m[i].second > 0) {
                s += "^" + rat_str(m[i].second);
            } else {
                s += "^(" + rat_str(m[i].second) + ")";
            }
        }
    }
    return s;
}

std::string poly_str(const Poly& p) {
    if (p.empty()) return "0";
    std::string s;
    bool first = true;
    for (auto& [m, c] : p) {
        Rat ac = c < 0 ? Rat(-c) : c;
        std::string coeff = rat_str(ac);
        std::string ms = mono_str(m);
        std::string term;
        if (ms.empty()) {
            term = coeff;
        } else if (ac == 1) {
            term = ms;
        } else {
            term = coeff + "*" + ms;
        }
        if (first) {
            s = (c < 0 ? "-" : "") + term;
            first = false;
        } else {
            s += (c < 0 ? " - " : " + ") + term;
        }
    }
    return s;
}

}  // namespace

std::string Expr::str() const {
    if (poly_is_const(den_)) return poly_str(num_);
    std::string n = poly_str(num_);
    std::string d = poly_str(den_);
    return "(" + n + ")/(" + d + ")";
}

// ---------------------------------------------------------------------------
// Probabilistic zero test

std::string verdict_name(ZeroVerdict v) {
    switch (v) {
        case ZeroVerdict::Zero: return "Zero";
        case ZeroVerdict::NonZero: return "NonZero";
        case ZeroVerdict::Unknown: return "Unknown";
    }
    return "?";
}

ZeroVerdict is_zero(const Expr& e, const ZeroTestOptions& opt) {
    if (e.is_structural_zero()) return ZeroVerdict::Zero;
    if (e.is_rational()) return ZeroVerdict::NonZero;

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> mag(0.1, 3.0);
    std::bernoulli_distribution sign(0.5);
    auto draw = [&] { return (sign(rng) ? 1.0 : -1.0) * mag(rng); };

    auto syms = e.symbols();
    auto opaque = e.opaque_atoms();

    int evaluated_small = 0;
    for (int t = 0; t < opt.trials; ++t) {
        EvalEnv env;
        for (auto& s : syms) env.symbols[s] = draw();
        for (auto id : opaque) env.opaque[id] = draw();
        try {
            double v = e.eval(env);
            if (std::abs(v) > opt.tolerance) return ZeroVerdict::NonZero;
            ++evaluated_small;
        } catch (const EvalError&) {
            // singular locus; fresh seeds next trial
        }
    }
    // Every successful draw was below tolerance without structural zero, or
    // every draw was singular: no safe verdict either way.
    (void)evaluated_small;
    return ZeroVerdict::Unknown;
}

}  // namespace varigeo::symexpr
