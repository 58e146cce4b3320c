#include "varigeo/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace varigeo::simulate {

using excalc::iota;

CompiledField::CompiledField(const Chart& chart, const VecField& Z,
                             const std::map<std::string, double>& params)
    : chart_(chart), params_(params) {
    for (std::size_t i = 0; i < chart_.dim(); ++i) {
        Expr c = Z.comp(chart_.name(i));
        if (!c.opaque_functions().empty())
            throw SimError("component for " + chart_.name(i) +
                           " contains undeclared opaque functions: " + c.str());
        comps_.push_back(std::move(c));
    }
}

double CompiledField::eval(const Expr& e, const std::vector<double>& state) const {
    std::map<std::string, double> point = params_;
    for (std::size_t i = 0; i < chart_.dim(); ++i)
        point[chart_.name(i)] = state[i];
    try {
        return e.eval(point);
    } catch (const symexpr::EvalError& err) {
        std::ostringstream os;
        os << "singular-locus evaluation (" << err.what() << ") at state";
        for (std::size_t i = 0; i < chart_.dim(); ++i)
            os << " " << chart_.name(i) << "=" << state[i];
        throw SimError(os.str());
    }
}

std::vector<double> CompiledField::operator()(
    const std::vector<double>& state) const {
    std::vector<double> out(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i)
        out[i] = eval(comps_[i], state);
    return out;
}

void MonitorSpec::add_form_residual(const std::string& name, const Chart& chart,
                                    const VecField& Z, const DiffForm& form) {
    add_residual(name, iota(chart, Z, form).scalar_value());
}

std::string Trajectory::csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i)
        os << (i ? "," : "") << columns[i];
    for (auto& [name, series] : channels) {
        (void)series;
        os << "," << name;
    }
    os << "\n";
    char buf[40];
    for (std::size_t k = 0; k < states.size(); ++k) {
        for (std::size_t i = 0; i < states[k].size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", states[k][i]);
            os << (i ? "," : "") << buf;
        }
        for (auto& [name, series] : channels) {
            (void)name;
            std::snprintf(buf, sizeof buf, "%.17g", series[k]);
            os << "," << buf;
        }
        os << "\n";
    }
    return os.str();
}

namespace {

// One Newton step onto the joint zero set of the constraints: solve
// (J J^T) lambda = -g and move along J^T lambda.
void newton_project(const CompiledField& f, const std::vector<Expr>& I0,
                    const Chart& chart, std::vector<double>& x) {
    std::size_t m = I0.size(), n = chart.dim();
    std::vector<double> g(m);
    std::vector<std::vector<double>> J(m, std::vector<double>(n));
    for (std::size_t a = 0; a < m; ++a) {
        g[a] = f.eval(I0[a], x);
        for (std::size_t i = 0; i < n; ++i)
            J[a][i] = f.eval(I0[a].derivative(chart.name(i)), x);
    }
    // normal system, dense Gaussian elimination (m is tiny)
    std::vector<std::vector<double>> M(m, std::vector<double>(m + 1));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) s += J[a][i] * J[b][i];
            M[a][b] = s;
        }
        M[a][m] = -g[a];
    }
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < m; ++r)
            if (std::fabs(M[r][c]) > std::fabs(M[piv][c])) piv = r;
        std::swap(M[c], M[piv]);
        if (std::fabs(M[c][c]) < 1e-14)
            throw SimError("degenerate constraint Jacobian at x0");
        for (std::size_t r = 0; r < m; ++r) {
            if (r == c) continue;
            double fct = M[r][c] / M[c][c];
            for (std::size_t k = c; k <= m; ++k) M[r][k] -= fct * M[c][k];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double dx = 0;
        for (std::size_t a = 0; a < m; ++a) dx += J[a][i] * M[a][m] / M[a][a];
        x[i] += dx;
    }
}

}  // namespace

Trajectory integrate(const Chart& chart, const VecField& Z,
                     const std::map<std::string, double>& params,
                     const Point& x0, const IntegrateOptions& opts,
                     const MonitorSpec& spec) {
    if (opts.h <= 0) throw SimError("step size must be positive");
    CompiledField f(chart, Z, params);

    std::vector<double> x(chart.dim());
    for (std::size_t i = 0; i < chart.dim(); ++i) {
        auto it = x0.find(chart.name(i));
        if (it == x0.end())
            throw SimError("x0 misses coordinate " + chart.name(i));
        x[i] = it->second;
    }

    double worst = 0;
    for (auto& g : opts.I0) worst = std::max(worst, std::fabs(f.eval(g, x)));
    if (worst > opts.check_tol) {
        if (worst >= opts.project_tol)
            throw SimError("x0 violates constraints by " +
                           std::to_string(worst));
        newton_project(f, opts.I0, chart, x);
    }
    for (auto& form : opts.incidence) {
        Expr r = iota(chart, Z, form).scalar_value();
        if (std::fabs(f.eval(r, x)) > opts.check_tol)
            throw SimError("x0 violates a constraint-form incidence");
    }

    int t_idx = -1;
    for (std::size_t i = 0; i < chart.dim(); ++i)
        if (chart.role(static_cast<int>(i)) == excalc::Role::Time)
            t_idx = static_cast<int>(i);
    if (t_idx < 0) throw SimError("chart has no time coordinate");

    Trajectory traj;
    for (std::size_t i = 0; i < chart.dim(); ++i)
        traj.columns.push_back(chart.name(i));
    for (auto& [name, ch] : spec.channels) {
        (void)ch;
        traj.channels[name] = {};
    }

    std::map<std::string, double> base;
    auto record = [&](const std::vector<double>& st) {
        traj.states.push_back(st);
        for (auto& [name, ch] : spec.channels) {
            double v = f.eval(ch.value, st);
            if (ch.kind == MonitorChannel::Kind::Drift) {
                if (traj.states.size() == 1) base[name] = v;
                v -= base[name];
            }
            traj.channels[name].push_back(v);
        }
    };

    record(x);
    const double h = opts.h;
    while (x[t_idx] < opts.t_end - h / 2) {
        std::vector<double> k1 = f(x), y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + h / 2 * k1[i];
        std::vector<double> k2 = f(y);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + h / 2 * k2[i];
        std::vector<double> k3 = f(y);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + h * k3[i];
        std::vector<double> k4 = f(y);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        record(x);
    }
    return traj;
}

std::map<std::string, double> monitor_maxima(const Trajectory& traj) {
    std::map<std::string, double> out;
    for (auto& [name, series] : traj.channels) {
        double m = 0;
        for (double v : series) m = std::max(m, std::fabs(v));
        out[name] = m;
    }
    return out;
}

}  // namespace varigeo::simulate
