#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bidomain/mesh.hpp"

namespace bidomain {

enum class ConductivityRegion : std::uint8_t { BIntra, BExtra, D };

Region region_of(ConductivityRegion r);

/// Per-cell scalar conductivity on one region, bounded in [c0, C0].
class ConductivityField {
 public:
  /// Values are indexed by mesh cell; entries for cells outside the region are
  /// ignored. Throws ConfigError if a region value leaves [c0, C0] or c0 <= 0.
  ConductivityField(const Mesh& mesh, ConductivityRegion region, std::vector<double> values,
                    double c0, double C0);

  static ConductivityField constant(const Mesh& mesh, ConductivityRegion region, double value);

  ConductivityRegion region() const { return region_; }
  double operator[](Index cell) const { return values_[cell]; }
  double lower_bound() const { return c0_; }
  double upper_bound() const { return C0_; }
  bool is_constant() const { return constant_; }
  /// Only meaningful when is_constant().
  double value() const { return constant_value_; }

  ConductivityField scaled(double factor) const;

 private:
  ConductivityField() = default;
  ConductivityRegion region_ = ConductivityRegion::BIntra;
  std::vector<double> values_;
  double c0_ = 0.0, C0_ = 0.0;
  bool constant_ = false;
  double constant_value_ = 0.0;
};

/// sigma_i, sigma_e on B and sigma_d on D.
struct Conductivities {
  ConductivityField intra;
  ConductivityField extra;
  ConductivityField damaged;

  static Conductivities constant(const Mesh& mesh, double sigma_i, double sigma_e, double sigma_d);
  Conductivities scaled(double factor) const;
};

using ScalarFn = std::function<double(double)>;

/// Affine-in-gating Hodgkin-Huxley type membrane model:
///   g(p, q) = a(p) (q - 1) + b(p) q,     I_ion(p, q) = h1(p) + h2(p) q.
/// a, b must be non-negative, bounded and Lipschitz; h1 Lipschitz; h2 bounded
/// and Lipschitz. The declared constants are used in stability bounds.
struct IonicModel {
  std::string name;
  ScalarFn a, b, h1, h2;
  double lip_a = 0.0, lip_b = 0.0, lip_h1 = 0.0, lip_h2 = 0.0;
  double bound_a = 0.0, bound_b = 0.0, bound_h2 = 0.0;

  double g(double p, double q) const { return a(p) * (q - 1.0) + b(p) * q; }
};

/// a = 0.5/(1+e^-p), b = 0.5/(1+e^p), h1 = tanh, h2 = 1.
IonicModel default_ionic_model();
/// h1(p) = p, h2 = 0, a = b = 0.5. The current is linear in p.
IonicModel linear_ionic_model();
/// h1(p) = clamp(p, -1, 1)^3, h2(p) = 1/(1+p^2), gating as in the default model.
IonicModel cubic_clipped_ionic_model();

/// Name -> factory. Custom models can be added with register_ionic_model().
IonicModel make_ionic_model(const std::string& name);
void register_ionic_model(const std::string& name, std::function<IonicModel()> factory);
std::vector<std::string> ionic_model_names();

/// h1(V) + h2(V) w.
inline double ionic_current(const IonicModel& m, double V, double w) {
  return m.h1(V) + m.h2(V) * w;
}

/// Exact flow of dw/dt = a(V) - (a(V)+b(V)) w over dt with V frozen.
double gating_exact_step(const IonicModel& m, double w, double V, double dt);

/// Result in [0, 1]; w_in given per sample.
struct LipschitzSample {
  std::vector<double> v1;  // piecewise-constant trajectory, one value per step
  std::vector<double> v2;
  double w_in = 0.0;
};

/// max over samples of ||I(V1,w1) - I(V2,w2)|| / ||V1 - V2|| in the discrete
/// L2(0,T) norm, with w advanced by gating_exact_step and the current sampled
/// after each gating update. Samples with V1 == V2 are skipped.
double composed_lipschitz_probe(const IonicModel& m, std::span<const LipschitzSample> samples,
                                double dt);

/// Upper bound for the probe:
///   L_h1 + L_h2 + M_h2 (L_a + L_b) sqrt(T (T + dt) / 2).
double composed_lipschitz_bound(const IonicModel& m, double T, double dt);

/// Largest sampled |f(x)-f(y)|/|x-y| over a uniform grid on [lo, hi].
double sampled_lipschitz(const ScalarFn& f, double lo, double hi, int n);

}  // namespace bidomain
