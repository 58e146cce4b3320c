#pragma once

// Numeric side: compile a solved vector field into a callable right-hand
// side, integrate with fixed-step classical RK4, and track residual/drift
// channels along the trajectory.

#include "varigeo/excalc.hpp"

#include <functional>

namespace varigeo::simulate {

using excalc::Chart;
using excalc::DiffForm;
using excalc::VecField;
using symexpr::Expr;

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Point = std::map<std::string, double>;

// Vector field with numeric parameter values bound; state vectors are
// ordered by chart index.
class CompiledField {
public:
    CompiledField(const Chart& chart, const VecField& Z,
                  const std::map<std::string, double>& params);

    const Chart& chart() const { return chart_; }
    // derivative of the state; throws SimError on singular-locus evaluation
    std::vector<double> operator()(const std::vector<double>& state) const;
    // scalar evaluation helper used by monitors and constraint checks
    double eval(const Expr& e, const std::vector<double>& state) const;

private:
    Chart chart_;
    std::map<std::string, double> params_;
    std::vector<Expr> comps_;
};

struct MonitorChannel {
    enum class Kind { Residual, Drift } kind;
    Expr value;
};

struct MonitorSpec {
    std::map<std::string, MonitorChannel> channels;

    void add_residual(const std::string& name, const Expr& e) {
        channels[name] = {MonitorChannel::Kind::Residual, e};
    }
    // drift channels report deviation from the initial value
    void add_drift(const std::string& name, const Expr& e) {
        channels[name] = {MonitorChannel::Kind::Drift, e};
    }
    // pairing of a 1-form with the dynamics, e.g. the dissipation residual
    // i_Z sigma_t or the constraint incidence i_Z eta
    void add_form_residual(const std::string& name, const Chart& chart,
                           const VecField& Z, const DiffForm& form);
};

struct Trajectory {
    std::vector<std::string> columns;             // chart coordinate names
    std::vector<std::vector<double>> states;      // one row per step
    std::map<std::string, std::vector<double>> channels;

    std::string csv() const;  // header + rows, 17 significant digits
};

struct IntegrateOptions {
    double t_end = 1.0;          // integrate until t reaches t0 + span
    double h = 1e-3;
    std::vector<Expr> I0;        // function constraints x0 must satisfy
    std::vector<DiffForm> incidence;  // 1-forms paired with Z, checked at x0
    double check_tol = 1e-10;
    double project_tol = 1e-6;   // Newton projection threshold for I0
};

// Classical RK4 from x0 (a full chart point).  x0 is validated against I0
// (single Newton projection when the violation is below project_tol) and the
// incidence forms; monitor channels are evaluated at every accepted step.
Trajectory integrate(const Chart& chart, const VecField& Z,
                     const std::map<std::string, double>& params,
                     const Point& x0, const IntegrateOptions& opts,
                     const MonitorSpec& spec = {});

// Maximum absolute value per channel.
std::map<std::string, double> monitor_maxima(const Trajectory& traj);

}  // namespace varigeo::simulate
