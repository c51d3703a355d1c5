#include "grl/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "grl/error.hpp"

namespace grl {

KlMode parse_kl_mode(std::string_view name) {
  if (name == "unbiased") return KlMode::unbiased;
  if (name == "stable") return KlMode::stable;
  throw ValidationError("unknown kl_mode: " + std::string(name));
}

std::string_view to_string(KlMode mode) {
  return mode == KlMode::unbiased ? "unbiased" : "stable";
}

ClipForm parse_clip_form(std::string_view name) {
  if (name == "ratio") return ClipForm::ratio;
  if (name == "canonical") return ClipForm::canonical;
  throw ValidationError("unknown clip_form: " + std::string(name));
}

std::string_view to_string(ClipForm form) {
  return form == ClipForm::ratio ? "ratio" : "canonical";
}

void validate(const GrpoConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  if (!(cfg.beta >= 0.0)) throw ValidationError("beta must be >= 0");
  if (!(cfg.std_guard > 0.0)) throw ValidationError("std_guard must be > 0");
  if (cfg.group_size < 2) throw ValidationError("group_size must be >= 2");
  if (cfg.mu < 1) throw ValidationError("mu must be >= 1");
}

std::vector<double> normalize_rewards(std::span<const double> rewards,
                                      double std_guard) {
  if (rewards.size() < 2) throw ValidationError("group too small");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / n);
  std::vector<double> out(rewards.size(), 0.0);
  if (sd < std_guard) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

double clipped_ratio(double logp_theta, double logp_old, double epsilon) {
  const double ratio = std::exp(logp_theta - logp_old);
  return std::min(ratio, std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon));
}

double kl_unbiased(double logp_ref, double logp_theta) {
  const double log_r = logp_ref - logp_theta;
  // expm1 keeps r - log r - 1 exact at and near log r = 0.
  return std::expm1(log_r) - log_r;
}

double kl_stable(double logp_ref, double logp_theta) {
  const double log_r = logp_ref - logp_theta;
  return 0.5 * log_r * log_r;
}

double kl_estimate(double logp_ref, double logp_theta, KlMode mode) {
  return mode == KlMode::unbiased ? kl_unbiased(logp_ref, logp_theta)
                                  : kl_stable(logp_ref, logp_theta);
}

std::vector<double> advantage(const RolloutGroup& group, const GrpoConfig& cfg) {
  const std::size_t g = group.size();
  if (group.logp_theta.size() != g || group.logp_old.size() != g) {
    throw ValidationError("rollout group arrays differ in length");
  }
  std::vector<double> a = normalize_rewards(group.rewards, cfg.std_guard);
  for (std::size_t i = 0; i < g; ++i) {
    if (cfg.clip_form == ClipForm::ratio) {
      a[i] *= clipped_ratio(group.logp_theta[i], group.logp_old[i], cfg.epsilon);
    } else {
      const double ratio = std::exp(group.logp_theta[i] - group.logp_old[i]);
      const double clipped = std::clamp(ratio, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
      a[i] = std::min(ratio * a[i], clipped * a[i]);
    }
  }
  return a;
}

void compute_group(RolloutGroup& group, const GrpoConfig& cfg) {
  const std::size_t g = group.size();
  if (group.logp_ref.size() != g) {
    throw ValidationError("rollout group arrays differ in length");
  }
  group.advantages = advantage(group, cfg);
  group.kl.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    group.kl[i] = kl_estimate(group.logp_ref[i], group.logp_theta[i], cfg.kl_mode);
  }
}

double grpo_objective(const RolloutGroup& group, const GrpoConfig& cfg) {
  const std::size_t g = group.size();
  if (group.advantages.size() != g || group.kl.size() != g || g == 0) {
    throw ValidationError("grpo_objective: group not computed");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < g; ++i) sum += group.advantages[i] - cfg.beta * group.kl[i];
  return sum / static_cast<double>(g);
}

}  // namespace grl
