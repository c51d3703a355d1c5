#include "grl/policy.hpp"

#include <algorithm>
#include <cmath>

#include "grl/error.hpp"

namespace grl {

PolicySnapshot::PolicySnapshot(std::size_t n_features, std::size_t n_candidates,
                               double temperature, std::uint64_t seed)
    : n_features_(n_features),
      n_candidates_(n_candidates),
      temperature_(temperature),
      seed_(seed),
      theta_(n_features * n_candidates, 0.0) {
  if (n_features == 0 || n_candidates == 0) {
    throw ValidationError("policy needs at least one feature and one candidate");
  }
  if (!(temperature > 0.0)) throw ValidationError("temperature must be > 0");
}

std::vector<double> PolicySnapshot::logits(std::span<const double> x) const {
  if (x.size() != n_features_) throw ValidationError("feature size mismatch");
  std::vector<double> z(n_candidates_, 0.0);
  for (std::size_t f = 0; f < n_features_; ++f) {
    if (x[f] == 0.0) continue;
    const double* row = theta_.data() + f * n_candidates_;
    for (std::size_t m = 0; m < n_candidates_; ++m) z[m] += x[f] * row[m];
  }
  return z;
}

std::vector<double> PolicySnapshot::log_probabilities(std::span<const double> x) const {
  std::vector<double> z = logits(x);
  double hi = -HUGE_VAL;
  for (double& v : z) {
    v /= temperature_;
    hi = std::max(hi, v);
  }
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - hi);
  const double lse = hi + std::log(sum);
  for (double& v : z) v -= lse;
  return z;
}

std::vector<double> PolicySnapshot::probabilities(std::span<const double> x) const {
  std::vector<double> p = log_probabilities(x);
  for (double& v : p) v = std::exp(v);
  return p;
}

std::size_t PolicySnapshot::greedy(std::span<const double> x) const {
  const auto z = logits(x);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

void PolicySnapshot::clamp(double bound) {
  for (double& v : theta_) v = std::clamp(v, -bound, bound);
}

}  // namespace grl
