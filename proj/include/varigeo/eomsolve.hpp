#pragma once

// Equation-of-motion derivation: assemble the contraction conditions on an
// unknown vector field Z into a linear system over the expression field,
// solve it, and classify the outcome (unique dynamics, gauge freedom,
// secondary constraints, or inconsistency).  Also certifies the
// dynamical-equivalence statements on concrete instances.

#include "varigeo/geomech.hpp"

namespace varigeo::eomsolve {

using excalc::Chart;
using excalc::CoordMap;
using excalc::DiffForm;
using excalc::LinSolveOptions;
using excalc::VecField;
using symexpr::Expr;

struct EomError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Verdict { Unique, Gauge, Inconsistent, ConstrainedSurface };

std::string verdict_label(Verdict v);

struct Dynamics {
    Verdict verdict = Verdict::Inconsistent;
    VecField Z;                    // particular solution when one exists
    std::vector<VecField> gauge;   // kernel basis of the homogeneous system
    std::vector<Expr> secondary;   // constraints found during propagation
    std::optional<Expr> witness;   // inconsistent row, when Inconsistent
    std::string provenance;
};

// Solve i_Z tau = 1, i_Z alpha = 0 for every constraint form (I0 lifted to
// differentials first), and i_Z i_xi Omega = 0 over the variation basis
// (Vertical drops the d/dt direction).  One constraint-propagation pass:
// residual rows become secondary constraints, are used to eliminate a
// coordinate each, and tangency rows Z(g) = 0 are appended before re-solving.
Dynamics derive_dynamics(const geomech::GVProblem& p,
                         const LinSolveOptions& opts = {});

// Field equations of the modified precosymplectic pair:
// i_Z tau = 1, i_Z omega = rhs (component rows, d/dt direction dropped).
Dynamics derive_modified(const Chart& chart,
                         const geomech::ModifiedStructure& m,
                         const LinSolveOptions& opts = {});

// Generalized Euler-Lagrange rows
//   dL/dq^j - Z(dL/dv^j) + (dL/ds)(dL/dv^j) = 0
// together with i_Z eta = 0, i_Z kappa^i = 0, i_Z tau = 1 and any extra
// function constraints (e.g. gauge pinnings) lifted to differentials.
Dynamics herglotz_el(const Chart& chart, const Expr& L, const DiffForm& eta,
                     const std::vector<Expr>& I0 = {},
                     const LinSolveOptions& opts = {});

struct TransversalityReduction {
    bool exists = false;
    VecField X;                   // vertical witness with i_X omega = sigma_t
    std::optional<Expr> witness;  // infeasible row otherwise
};

// Solve i_X omega = sigma_t over vertical X subject to i_{R_t - X} alpha = 0
// for every constraint 1-form.
TransversalityReduction check_transversality_reduction(
    const Chart& chart, const DiffForm& omega, const DiffForm& sigma_t,
    const std::vector<DiffForm>& constraints, const VecField& R_t,
    const LinSolveOptions& opts = {});

struct EquivalenceVerdict {
    bool pass = false;
    std::string detail;
};

// Derive both problems and require matching verdicts plus particular
// solutions that agree modulo the gauge kernels and each problem's
// secondary-constraint surface.
EquivalenceVerdict verify_equivalence(const geomech::GVProblem& a,
                                      const geomech::GVProblem& b,
                                      const LinSolveOptions& opts = {});

// Push the extended dynamics through proj (restricted to the surface cut out
// by its secondary constraints) and compare with the base dynamics modulo
// the base gauge kernel.  Action-momentum coordinates are additionally
// checked for translation invariance: solutions differing by a constant
// offset in them project to the same base solution.
EquivalenceVerdict project_and_compare(const geomech::GVProblem& ext,
                                       const Dynamics& ext_dyn,
                                       const Dynamics& base_dyn,
                                       const CoordMap& proj,
                                       const LinSolveOptions& opts = {});

// Row residuals of the contraction system evaluated at Z (i_Z tau - 1, every
// i_Z alpha, every i_Z i_xi Omega), after substituting the given secondary
// constraints; all structurally zero for a valid solution.
std::vector<Expr> solution_residuals(const geomech::GVProblem& p,
                                     const VecField& Z,
                                     const std::vector<Expr>& secondary = {});

}  // namespace varigeo::eomsolve
