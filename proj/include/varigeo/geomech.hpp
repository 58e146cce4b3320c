#pragma once

// Geometric structures for variational problems on an adapted chart:
// Poincaré–Cartan data, Reeb-type solves, modified 2-forms, constraint
// absorption, compatibility checks, and structure classification.

#include "varigeo/excalc.hpp"

#include <optional>
#include <variant>

namespace varigeo::geomech {

using excalc::Chart;
using excalc::CoordMap;
using excalc::DiffForm;
using excalc::LinSolveOptions;
using excalc::Role;
using excalc::VecField;
using symexpr::Expr;
using symexpr::ZeroVerdict;

struct GeomechError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// A theorem hypothesis (co-orientation, compatibility, normalization) failed
// or could not be certified.
struct HypothesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class VariationClass { AllFields, Vertical, AdmissibleReduced };

std::string variation_class_name(VariationClass v);

struct ConstraintSet {
    std::vector<Expr> I0;       // function constraints
    std::vector<DiffForm> I1nh; // nonholonomic 1-forms
    std::vector<DiffForm> I1vak;// vakonomic 1-forms (normally Cartan forms)
};

struct GVProblem {
    Chart chart;
    DiffForm Omega;  // degree 2
    ConstraintSet constraints;
    VariationClass variations = VariationClass::Vertical;
    std::string provenance;
};

// ---- chart helpers -------------------------------------------------------

// Ordered (position, velocity) coordinate name pairs; throws on mismatch.
std::vector<std::pair<std::string, std::string>> qv_pairs(const Chart& chart);
std::string time_coord(const Chart& chart);  // unique Time-role name
DiffForm tau_form(const Chart& chart);       // dt

// ---- Poincaré–Cartan data ------------------------------------------------

// kappa^i = dq^i - v^i dt, one per position/velocity pair.
std::vector<DiffForm> cartan_forms(const Chart& chart);

// E_L = (dL/dv^i) v^i - L.
Expr lagrangian_energy(const Chart& chart, const Expr& L);

// Theta_L = L dt + (dL/dv^i) kappa^i.
DiffForm poincare_cartan(const Chart& chart, const Expr& L);

struct SingularCertificate {
    Expr determinant;  // the vanishing minor
};

using HessianInverse =
    std::variant<std::vector<std::vector<Expr>>, SingularCertificate>;

// W^{ij} with W^{ij} d2L/dv^j dv^k = delta^i_k, or a certificate that the
// velocity Hessian is singular.  Undecided determinant raises
// RankUndecidedError.
HessianInverse hessian_inverse(const Chart& chart, const Expr& L,
                               const LinSolveOptions& opts = {});

// eta = ds + E_L dt - (dL/dv^i) dq^i  (requires an Action coordinate s).
DiffForm herglotz_constraint(const Chart& chart, const Expr& L);

// ---- transversality ------------------------------------------------------

struct SplitResult {
    DiffForm omega;    // Omega + sigma_t ^ tau
    DiffForm sigma_t;  // i_{R_t} Omega
};

// Decompose Omega = omega - sigma_t ^ tau; requires i_{R_t} tau = 1.
SplitResult split_transversal(const Chart& chart, const DiffForm& Omega,
                              const VecField& R_t);

// ---- Reeb-type solves ----------------------------------------------------

// One contraction condition on the unknown field R: either
// (1-form, scalar target): i_R form = target, or
// (2-form, 1-form target): i_R form = target row-wise.
struct ReebEquation {
    DiffForm form;
    DiffForm target;
};

struct ReebCertificate {
    bool exists = false;
    VecField representative;         // free components pinned to zero
    std::vector<VecField> kernel;    // added freedom
    std::optional<Expr> witness;     // inconsistent row when !exists
};

ReebCertificate reeb_solve(const Chart& chart,
                           const std::vector<ReebEquation>& equations,
                           const LinSolveOptions& opts = {});

// ---- nonholonomic / mixed constructions ---------------------------------

// Omega + sum_a (i_{R_a} Omega) ^ eta^a.  Checks i_{R_a}tau = 0,
// i_{R_a}eta^b = delta, and co-orientation tau ^ /\ eta != 0.
DiffForm omega_bar_nonholonomic(const Chart& chart, const DiffForm& Omega,
                                const std::vector<DiffForm>& etas,
                                const std::vector<VecField>& reebs,
                                const LinSolveOptions& opts = {});

// df for each function constraint, to be appended to I1nh.
std::vector<DiffForm> lift_function_constraints(const Chart& chart,
                                                const std::vector<Expr>& I0);

struct CompatibilityReport {
    bool compatible = false;
    bool shape_ok = false;       // eta^a = ds^a + b dq + h dt + c du
    ZeroVerdict volume;          // tau ^ /\eta ^ /\(kappa^i ^ dkappa^i)
    bool vertical_annihilated = false;  // i_{d/dv} eta = 0
    std::string witness;         // failing identity, human-readable
};

CompatibilityReport compatibility_check(const Chart& chart,
                                        const std::vector<DiffForm>& etas,
                                        const std::vector<DiffForm>& kappas,
                                        const LinSolveOptions& opts = {});

// dTheta_L + sum_a (i_{R_a} dTheta_L) ^ eta^a; requires compatibility and
// the R_a normalization.
DiffForm omega_bar_mixed(const Chart& chart, const Expr& L,
                         const std::vector<DiffForm>& etas,
                         const std::vector<VecField>& reebs,
                         const LinSolveOptions& opts = {});

// ---- absorption ----------------------------------------------------------

struct AbsorptionResult {
    Chart extended;            // chart + momenta
    DiffForm Omega_U;
    std::vector<std::string> momenta;        // p_i names, paired with q order
    std::vector<std::string> eta_momenta;    // p_alpha names
    std::optional<DiffForm> eta_check;       // action-dependent case only
    std::optional<DiffForm> Omega_check;
};

// Extend by momenta p_i; Omega_U = dL ^ tau + d(p_i kappa^i).
AbsorptionResult absorb_holonomy(const Chart& chart, const Expr& L);

// Extend by p_i and p_alpha; Omega_U = dL ^ dt + d(p_i kappa^i)
// + dp_alpha ^ eta^alpha.  For a single Action coordinate s also builds
// eta_check = ds - p_i kappa^i - L dt and
// Omega_check = -d(eta_check) + dp_s ^ eta_check.
AbsorptionResult absorb_mixed(const Chart& chart, const Expr& L,
                              const std::vector<DiffForm>& etas,
                              const LinSolveOptions& opts = {});

// Projection dropping the absorbed momenta (identity on base coordinates).
CoordMap absorption_projection(const AbsorptionResult& abs, const Chart& base);

// ---- singular time-dependent structure -----------------------------------

struct ModifiedStructure {
    DiffForm omega;    // -omega_L - (d2L/dt dv^i) dt ^ dq^i
    DiffForm sigma_t;  // dE_L - R_t(E_L) tau + (d2L/dt dv^i) dq^i
    VecField R_t;      // d/dt
    DiffForm rhs;      // dE_L - R_t(E_L) tau + Lie_{R_t}((dL/dv^i) dq^i)
};

ModifiedStructure modified_precosymplectic(const Chart& chart, const Expr& L);

// ---- singular action-dependent structure ---------------------------------

struct PremulticontactReport {
    // Sufficient condition g^i d2L/dv^i dv^j + d2L/ds dv^j = 0: family
    // R = d/ds + g^i d/dv^i (+ free d/dp_s) when solvable.
    ReebCertificate tangent_family;
    // Direct Reeb solve for the restriction of eta_check to the surface
    // p_i = dL/dv^i (conclusive test; the sufficient condition is not
    // necessary).
    ReebCertificate surface_reeb;
    DiffForm surface_eta;  // the restricted 1-form
    Chart surface_chart;
};

PremulticontactReport premulticontact_reeb(const Chart& chart, const Expr& L,
                                           const LinSolveOptions& opts = {});

// ---- classification ------------------------------------------------------

struct StructureReport {
    bool hessian_regular = false;
    std::optional<std::vector<std::vector<Expr>>> hessian_inv;
    ZeroVerdict cosymplectic = ZeroVerdict::Unknown;  // tau ^ omega_L^n
    ReebCertificate cosym_reeb;                       // for (omega_L, tau)
    // contact data, present when the chart has an Action coordinate
    std::optional<ZeroVerdict> contact;               // eta_L ^ (d eta_L)^n
    std::optional<ReebCertificate> contact_reeb;      // for (eta_L, d eta_L)
    std::optional<int> restricted_rank;               // rank of d eta_L on ker eta_L
    std::optional<bool> precontact;                   // rank>0 together with Reeb existence
    std::string precontact_note;
    std::optional<ReebCertificate> premulticontact_sufficient;
    std::optional<ReebCertificate> surface_reeb;
    std::optional<bool> lcs;                          // dOmega_check = dp_s ^ Omega_check
    bool autonomous = false;  // Lie_{d/dt} omega = 0 and Lie_{d/dt} sigma_t = 0
};

StructureReport classify(const Chart& chart, const Expr& L,
                         const LinSolveOptions& opts = {});

}  // namespace varigeo::geomech
