#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace grl {

// Contextual softmax policy over a fixed number of candidate slots. Logits
// are x^T theta for a context feature vector x; probabilities are
// softmax(logits / temperature). Both sampling and log-probabilities use the
// tempered distribution.
class PolicySnapshot {
 public:
  PolicySnapshot() = default;
  PolicySnapshot(std::size_t n_features, std::size_t n_candidates,
                 double temperature, std::uint64_t seed = 0);

  std::size_t n_features() const { return n_features_; }
  std::size_t n_candidates() const { return n_candidates_; }
  double temperature() const { return temperature_; }
  std::uint64_t seed() const { return seed_; }

  double& at(std::size_t feature, std::size_t candidate) {
    return theta_[feature * n_candidates_ + candidate];
  }
  double at(std::size_t feature, std::size_t candidate) const {
    return theta_[feature * n_candidates_ + candidate];
  }

  // Row-major [feature][candidate].
  std::span<double> theta() { return theta_; }
  std::span<const double> theta() const { return theta_; }

  std::vector<double> logits(std::span<const double> x) const;
  std::vector<double> log_probabilities(std::span<const double> x) const;
  std::vector<double> probabilities(std::span<const double> x) const;

  // Argmax of the logits; ties go to the lowest index.
  std::size_t greedy(std::span<const double> x) const;

  // Clamps every parameter into [-bound, bound].
  void clamp(double bound);

  bool operator==(const PolicySnapshot&) const = default;

 private:
  std::size_t n_features_ = 0;
  std::size_t n_candidates_ = 0;
  double temperature_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<double> theta_;
};

}  // namespace grl
