#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bidomain/discretization.hpp"
#include "bidomain/mesh.hpp"
#include "bidomain/model.hpp"
#include "bidomain/sparse.hpp"
#include "bidomain/stepper.hpp"

namespace bidomain {

// ---------------------------------------------------------------- source shift

/// Solves (A_i + A_e) u = load(f1 - f2) on the B space (natural condition on
/// Gamma, zero on the outer boundary) and extends by zero into D. Returns a
/// U-block vector, so its jump is the B-side trace.
Vector solve_source_shift(const Mesh& mesh, const DofMap& dofs, const Operators& ops,
                          const SpaceTimeFn& f1, const SpaceTimeFn& f2, double t,
                          const CgOptions& opts);

/// q = -alpha ([u]^{n+1} - [u]^n) / dt - beta [u]^{n+1}, nodewise on the jump pairs.
Vector interface_charge_source(std::span<const double> jump_prev, std::span<const double> jump_next,
                               double alpha, double beta, double dt);

// --------------------------------------------------------------------- lifting

struct LiftingSolution {
  Vector w;  // B space
  Vector r;  // jump pairs
  Vector W;  // U block
  double norm_x = 0.0;  // (|grad W|^2_B + |grad W|^2_D + |[W]|^2_Gamma)^{1/2}
};

/// W in the broken space with [W] = r solving
///   (A_i + A_e) W_B (+) A_d W_D = -A_i w   against jump-free test functions.
LiftingSolution solve_lifting(const DofMap& dofs, const Operators& ops, std::span<const double> w,
                              std::span<const double> r, const CgOptions& opts);

/// r -> discrete harmonic extension into B (unit coefficient), B-space vector
/// equal to r at the Gamma dofs and zero on the outer boundary.
Vector harmonic_extension(const DofMap& dofs, const Operators& ops, std::span<const double> r,
                          const CgOptions& opts);

/// ||r||^2_{L2(Gamma)} + |grad E_h r|^2_B
double half_norm_sq(const DofMap& dofs, const Operators& ops, std::span<const double> r,
                    const CgOptions& opts);

// --------------------------------------------------------------- bilinear form

struct FormArgument {
  Vector w;  // B space
  Vector r;  // jump pairs
};

/// a((w,r),(wb,s)) = (w+W)^T A_i (wb+Wb) + W^T A_e Wb + W_D^T A_d Wb_D + beta r^T M_Gamma s
double bilinear_form(const DofMap& dofs, const Operators& ops, double beta, const FormArgument& x,
                     const FormArgument& y, const CgOptions& opts);
double bilinear_form(const DofMap& dofs, const Operators& ops, double beta,
                     const LiftingSolution& x, const LiftingSolution& y);

struct CoercivityResult {
  double c_min = 0.0;
  std::size_t dimension = 0;  // num_v + num_jumps
  double form_asymmetry = 0.0;  // max |a(e_i,e_j) - a(e_j,e_i)| / max |a|
  std::size_t eigen_iterations = 0;
};

inline CgOptions tight_cg_options() {
  CgOptions o;
  o.tol = 1e-13;
  return o;
}

/// Smallest eigenvalue of a(x,x) relative to ||w||^2_{H1(B)} + ||r||^2_{1/2,h}.
CoercivityResult coercivity_estimate(const DofMap& dofs, const Operators& ops, double beta,
                                     const CgOptions& opts = tight_cg_options(),
                                     const EigenOptions& eig = {});

// ---------------------------------------------------------- shifted equivalence

struct EquivalenceResult {
  double max_discrepancy = 0.0;  // max_n |V_A - V_B| + |U_A - U_B| (Euclidean)
  double reference_scale = 0.0;  // max_n |V_A| + |U_A|
  double relative() const { return reference_scale > 0.0 ? max_discrepancy / reference_scale : max_discrepancy; }
  bool bitwise_equal = false;
  std::size_t steps = 0;
};

/// Runs the direct scheme and the source-shifted scheme (f2 replaced by f1,
/// interface charge q from the shift, initial jump s0 - [u~(0)]) and compares
/// the reconstruction V = v, U = u + u~. Requires config.ionic == false.
EquivalenceResult shifted_equivalence_check(const Mesh& mesh, const Conductivities& sigma,
                                            const StepperConfig& config, const InitialData& init,
                                            const SourceSet& sources);

// ----------------------------------------------------------------- energy terms

/// Vertex-rule approximation of the squared L2 norm of f over a region.
double region_l2_sq(const Mesh& mesh, Region region, const SpaceFn& f);

struct EnergyReport {
  double sup_v_sq = 0.0;
  double int_grad_v_sq = 0.0;   // sum_{n>=1} dt |grad V^n|^2_B
  double int_grad_ub_sq = 0.0;
  double int_grad_ud_sq = 0.0;
  double sup_jump_sq = 0.0;
  double int_jump_sq = 0.0;     // sum_{n>=1} dt |[U^n]|^2_Gamma
  double lhs = 0.0;
  double data = 0.0;            // |f1|^2 + |f2|^2 + |v0|^2 + |s0|^2 + 1
  double ratio = 0.0;           // lhs / data, 0 when lhs == 0
};

/// Data functional for the energy inequality. Source norms are taken over
/// B x (0, T) with the vertex rule in space and the right-point rule in time.
double energy_data_functional(const Mesh& mesh, const DofMap& dofs, const Operators& ops,
                              const SourceSet& sources, const InitialData& init, double dt,
                              std::size_t steps);

EnergyReport energy_report(const Trajectory& tr, double dt, double data);

/// Smooth random space-time field sum_k c_k sin(k1 pi x) sin(k2 pi y) (1 + d_k t),
/// with the y factor dropped when dim == 1. Deterministic for a given seed.
SpaceTimeFn random_smooth_field(std::uint64_t seed, double amplitude, int dim, int modes = 3);

// ------------------------------------------------------------------------- MMS

/// Exact fields per region with the derivatives needed to build sources.
/// Conductivities are constants; Gamma is a straight line with constant normal.
struct ManufacturedSolution {
  SpaceTimeFn v, v_t, v_lap;
  SpaceTimeFn ub, ub_t, ub_lap;
  SpaceTimeFn ud, ud_t, ud_lap;
  std::function<Point(const Point&, double)> v_grad, ub_grad, ud_grad;
  Point normal{-1.0, 0.0};
};

/// V* = e^{-t} sin(pi x / s), U_B* = (1 + t) x / (2 s), U_D* = -cos(t) (1 - x) / (2 (1 - s)).
ManufacturedSolution mms_interval(double split);
/// V* = e^{-t} sin(pi x / (2 s)) sin(pi y), U_B* = (1 + t) x sin(pi y),
/// U_D* = cos(t) (1 - x) sin(pi y).
ManufacturedSolution mms_split_rectangle(double split);

/// Sources that make the manufactured fields an exact solution of the linear
/// (ionic off) system with the given constants.
SourceSet mms_sources(const ManufacturedSolution& m, double sigma_i, double sigma_e, double sigma_d,
                      double alpha, double beta);

/// L2 error of a P1 field on one region (Gauss quadrature, Dirichlet vertices read as 0).
double region_l2_error(const Mesh& mesh, const DofMap& dofs, Region region,
                       std::span<const double> values, const SpaceFn& exact);

struct MmsLevel {
  Mesh mesh;
  double dt;
  double scale;  // h for spatial ladders, dt for temporal ones
};

struct MmsRow {
  double scale = 0.0;
  double dt = 0.0;
  std::size_t dofs = 0;
  double err_v = 0.0;  // L2(B) at T
  double err_u = 0.0;  // broken L2 at T
  double rate_v = 0.0; // against the previous row; 0 on the first
  double rate_u = 0.0;
};

struct MmsStudy {
  ManufacturedSolution solution;
  double sigma_i = 1.0, sigma_e = 1.0, sigma_d = 1.0;
  double alpha = 1.0, beta = 1.0;
  double T = 0.1;
  double tol = 1e-12;
  std::vector<MmsLevel> levels;
};

std::vector<MmsRow> mms_convergence(const MmsStudy& study);

// ------------------------------------------------------------ stability study

struct StabilityRow {
  double delta = 0.0;
  double dt = 0.0;
  double amplification = 0.0;  // sup_n |dV^n|_M / delta
};

/// Paired runs from v0 and v0 + delta p, with p scaled so that |dV^0|_M = delta.
/// The returned rows are ordered delta-major.
std::vector<StabilityRow> stability_study(const Mesh& mesh, const Conductivities& sigma,
                                          const StepperConfig& config, const InitialData& init,
                                          const SourceSet& sources, const SpaceFn& perturbation,
                                          const std::vector<double>& deltas,
                                          const std::vector<double>& dts);

// ------------------------------------------------------------------ beta limit

struct BetaRow {
  double beta = 0.0;
  double jump_norm = 0.0;          // ||[U]||_{L2(Gamma x (0,T))}
  double distance_to_perfect = 0.0;  // discrete L2(0,T) of |V-Vp|_M + |U-Up|_{broken M}
};

struct BetaStudy {
  std::vector<BetaRow> rows;
  double slope = 0.0;  // least-squares slope of log jump_norm against log beta
};

/// Needs at least two beta values (ConfigError otherwise).
BetaStudy beta_limit_study(const Mesh& mesh, const Conductivities& sigma,
                           const StepperConfig& config, const InitialData& init,
                           const SourceSet& sources, const std::vector<double>& betas);

/// Least-squares slope of y against x.
double fitted_slope(std::span<const double> x, std::span<const double> y);

}  // namespace bidomain
