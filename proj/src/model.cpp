#include "bidomain/model.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "bidomain/errors.hpp"

namespace bidomain {

Region region_of(ConductivityRegion r) {
  return r == ConductivityRegion::D ? Region::D : Region::B;
}

ConductivityField::ConductivityField(const Mesh& mesh, ConductivityRegion region,
                                     std::vector<double> values, double c0, double C0)
    : region_(region), values_(std::move(values)), c0_(c0), C0_(C0) {
  if (!(c0 > 0.0) || !(c0 <= C0)) throw ConfigError("conductivity: need 0 < c0 <= C0");
  if (values_.size() != mesh.num_cells())
    throw ConfigError("conductivity: one value per mesh cell required");
  const Region target = region_of(region);
  bool first = true;
  constant_ = true;
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (mesh.cells()[c].region != target) continue;
    double v = values_[c];
    if (!(v >= c0 && v <= C0))
      throw ConfigError("conductivity: cell " + std::to_string(c) + " value " + std::to_string(v) +
                        " outside [c0, C0]");
    if (first) constant_value_ = v, first = false;
    constant_ = constant_ && v == constant_value_;
  }
}

ConductivityField ConductivityField::constant(const Mesh& mesh, ConductivityRegion region,
                                              double value) {
  return ConductivityField(mesh, region, std::vector<double>(mesh.num_cells(), value), value,
                           value);
}

ConductivityField ConductivityField::scaled(double factor) const {
  ConductivityField out = *this;
  for (auto& v : out.values_) v *= factor;
  out.c0_ *= factor;
  out.C0_ *= factor;
  out.constant_value_ *= factor;
  return out;
}

Conductivities Conductivities::constant(const Mesh& mesh, double sigma_i, double sigma_e,
                                        double sigma_d) {
  return {ConductivityField::constant(mesh, ConductivityRegion::BIntra, sigma_i),
          ConductivityField::constant(mesh, ConductivityRegion::BExtra, sigma_e),
          ConductivityField::constant(mesh, ConductivityRegion::D, sigma_d)};
}

Conductivities Conductivities::scaled(double factor) const {
  return {intra.scaled(factor), extra.scaled(factor), damaged.scaled(factor)};
}

namespace {

double logistic(double p) { return 1.0 / (1.0 + std::exp(-p)); }

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, std::function<IonicModel()>>& registry() {
  static std::map<std::string, std::function<IonicModel()>> r = {
      {"default", default_ionic_model},
      {"linear", linear_ionic_model},
      {"cubic", cubic_clipped_ionic_model},
  };
  return r;
}

}  // namespace

IonicModel default_ionic_model() {
  IonicModel m;
  m.name = "default";
  m.a = [](double p) { return 0.5 * logistic(p); };
  m.b = [](double p) { return 0.5 * logistic(-p); };
  m.h1 = [](double p) { return std::tanh(p); };
  m.h2 = [](double) { return 1.0; };
  // logistic' <= 1/4
  m.lip_a = m.lip_b = 0.125;
  m.lip_h1 = 1.0;
  m.lip_h2 = 0.0;
  m.bound_a = m.bound_b = 0.5;
  m.bound_h2 = 1.0;
  return m;
}

IonicModel linear_ionic_model() {
  IonicModel m;
  m.name = "linear";
  m.a = [](double) { return 0.5; };
  m.b = [](double) { return 0.5; };
  m.h1 = [](double p) { return p; };
  m.h2 = [](double) { return 0.0; };
  m.lip_a = m.lip_b = 0.0;
  m.lip_h1 = 1.0;
  m.lip_h2 = 0.0;
  m.bound_a = m.bound_b = 0.5;
  m.bound_h2 = 0.0;
  return m;
}

IonicModel cubic_clipped_ionic_model() {
  IonicModel m = default_ionic_model();
  m.name = "cubic";
  m.h1 = [](double p) {
    double c = std::clamp(p, -1.0, 1.0);
    return c * c * c;
  };
  m.h2 = [](double p) { return 1.0 / (1.0 + p * p); };
  m.lip_h1 = 3.0;
  // |d/dp 1/(1+p^2)| peaks at p = 1/sqrt(3) with value 3 sqrt(3) / 8
  m.lip_h2 = 3.0 * std::sqrt(3.0) / 8.0;
  m.bound_h2 = 1.0;
  return m;
}

IonicModel make_ionic_model(const std::string& name) {
  std::lock_guard lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) throw ConfigError("unknown ionic model '" + name + "'");
  return it->second();
}

void register_ionic_model(const std::string& name, std::function<IonicModel()> factory) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

std::vector<std::string> ionic_model_names() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

double gating_exact_step(const IonicModel& m, double w, double V, double dt) {
  const double a = m.a(V), b = m.b(V);
  const double rate = a + b;
  if (rate <= 0.0 || dt <= 0.0) return w;
  const double w_inf = a / rate;
  const double decay = std::exp(-rate * dt);
  // convex combination of w and w_inf
  return std::clamp(w * decay + w_inf * (1.0 - decay), 0.0, 1.0);
}

double composed_lipschitz_probe(const IonicModel& m, std::span<const LipschitzSample> samples,
                                double dt) {
  double best = 0.0;
  for (const auto& s : samples) {
    const std::size_t n = std::min(s.v1.size(), s.v2.size());
    double w1 = s.w_in, w2 = s.w_in;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      w1 = gating_exact_step(m, w1, s.v1[k], dt);
      w2 = gating_exact_step(m, w2, s.v2[k], dt);
      const double di = ionic_current(m, s.v1[k], w1) - ionic_current(m, s.v2[k], w2);
      const double dv = s.v1[k] - s.v2[k];
      num += dt * di * di;
      den += dt * dv * dv;
    }
    if (den == 0.0) continue;
    best = std::max(best, std::sqrt(num / den));
  }
  return best;
}

double composed_lipschitz_bound(const IonicModel& m, double T, double dt) {
  return m.lip_h1 + m.lip_h2 + m.bound_h2 * (m.lip_a + m.lip_b) * std::sqrt(T * (T + dt) / 2.0);
}

double sampled_lipschitz(const ScalarFn& f, double lo, double hi, int n) {
  double best = 0.0;
  double prev_x = lo, prev_f = f(lo);
  for (int k = 1; k <= n; ++k) {
    double x = lo + (hi - lo) * k / n;
    double fx = f(x);
    best = std::max(best, std::abs(fx - prev_f) / (x - prev_x));
    prev_x = x, prev_f = fx;
  }
  return best;
}

}  // namespace bidomain
