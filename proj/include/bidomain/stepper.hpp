#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "bidomain/discretization.hpp"
#include "bidomain/mesh.hpp"
#include "bidomain/model.hpp"
#include "bidomain/sparse.hpp"
#include "bidomain/transmission.hpp"

namespace bidomain {

/// Resistive: the RC interface law. Perfect: [U] = 0 is enforced and the
/// interface terms disappear (the classical bidomain/diffusion coupling).
enum class Coupling { Resistive, Perfect };

struct StepperConfig {
  double dt = 1e-3;
  double T = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  CgOptions solver{};
  bool ionic = true;
  IonicModel model = default_ionic_model();
  Coupling coupling = Coupling::Resistive;
  /// Keep every k-th state in the trajectory (the final state is always
  /// kept). 0 keeps only the initial and final states.
  std::size_t snapshot_every = 1;

  /// Throws ConfigError.
  void validate() const;
};

/// Additional per-step loads in dof coordinates: `v` on the V block, `u` on
/// the U block. Used by the source-shifted scheme.
struct StepLoads {
  Vector v;
  Vector u;
};

struct SourceSet {
  SpaceTimeFn f1, f2;  // on B
  SpaceTimeFn f_d;     // on D
  SpaceTimeFn g_flux1; // imposed sigma_i grad(u1) . nu on Gamma
  SpaceTimeFn g_flux2; // imposed mismatch sigma_e grad(u2) . nu - sigma_d grad(u_D) . nu
  SpaceTimeFn q_gamma; // source in the RC law
  /// Called with the index of the step being taken (n -> n+1) and t^{n+1}.
  std::function<StepLoads(std::size_t n, double t_next)> extra;
};

struct InitialData {
  SpaceFn v0;
  SpaceFn s0;
  SpaceFn w_in;  // defaults to 0
};

struct State {
  double t = 0.0;
  std::size_t step = 0;
  Vector V;  // B space
  Vector U;  // [U_B | U_D]
  Vector w;  // gating at the V dofs
};

struct StepDiagnostics {
  double t = 0.0;
  std::size_t cg_iterations = 0;
  double cg_residual = 0.0;
  double v_sq = 0.0;       // ||V||^2_{L2(B)}
  double jump_sq = 0.0;    // ||[U]||^2_{L2(Gamma)}
  double grad_v_sq = 0.0;  // ||grad V||^2_{L2(B)}
  double grad_ub_sq = 0.0;
  double grad_ud_sq = 0.0;
  double energy = 0.0;     // v_sq/2 + alpha jump_sq/2
};

struct Trajectory {
  std::vector<State> states;
  /// One entry per time level, the initial state included.
  std::vector<StepDiagnostics> diagnostics;
  const State& final_state() const { return states.back(); }
};

/// Backward Euler for diffusion and interface terms, explicit ionic current
/// with the gating variable advanced exactly beforehand, one symmetric solve
/// for (V, U) per step.
class Stepper {
 public:
  Stepper(const Mesh& mesh, const Conductivities& sigma, StepperConfig config);

  const Mesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const Operators& operators() const { return ops_; }
  const StepperConfig& config() const { return config_; }
  const SparseMatrix& system_matrix() const { return system_; }

  /// V(0) = nodal v0, U(0) from the elliptic problem at t = 0 with [U] = s0.
  State initialize(const InitialData& init, const SourceSet& sources) const;
  /// Same with nodal data: V0 on the B space, s0 on the jump pairs, w0 on the V dofs.
  State initialize_nodal(Vector v0, std::span<const double> s0, Vector w0,
                         const SourceSet& sources) const;

  State step(const State& s, const SourceSet& sources, StepDiagnostics* diag = nullptr) const;

  Trajectory run(const InitialData& init, const SourceSet& sources) const;
  Trajectory run_from(State s, const SourceSet& sources) const;

  StepDiagnostics diagnose(const State& s) const;
  std::size_t step_count() const;

  /// Right side of the U rows of the step system without the G terms.
  Vector u_volume_rhs(const SourceSet& sources, double t) const;

 private:
  Mesh mesh_;
  DofMap dofs_;
  Operators ops_;
  StepperConfig config_;
  SparseMatrix system_;
  std::unique_ptr<JumpElimination> perfect_;
  SparseMatrix reduced_;
  SparseMatrix broken_;
};

}  // namespace bidomain
