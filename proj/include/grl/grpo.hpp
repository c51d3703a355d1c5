#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace grl {

enum class KlMode { unbiased, stable };

// `ratio` applies min(ratio, clip(ratio)) to the ratio and then scales by the
// normalized reward. `canonical` is the PPO form min(ratio*A, clip(ratio)*A),
// kept for ablations.
enum class ClipForm { ratio, canonical };

KlMode parse_kl_mode(std::string_view name);
std::string_view to_string(KlMode mode);
ClipForm parse_clip_form(std::string_view name);
std::string_view to_string(ClipForm form);

struct GrpoConfig {
  double epsilon = 0.2;
  double beta = 0.04;
  KlMode kl_mode = KlMode::stable;
  double std_guard = 1e-8;
  int group_size = 7;
  int mu = 1;
  ClipForm clip_form = ClipForm::ratio;
};

// Throws ValidationError on the first violated bound.
void validate(const GrpoConfig& cfg);

// G sampled outputs for one query. Log-probabilities are per whole output.
struct RolloutGroup {
  std::vector<std::size_t> choices;  // sampled candidate index per output
  std::vector<double> logp_theta;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
  std::vector<double> rewards;
  std::vector<double> advantages;  // filled by compute_group
  std::vector<double> kl;          // filled by compute_group

  std::size_t size() const { return rewards.size(); }
};

// (r - mean) / std with the population std. All zeros when std < std_guard.
// Throws ValidationError("group too small") for fewer than two rewards.
std::vector<double> normalize_rewards(std::span<const double> rewards,
                                      double std_guard = 1e-8);

// min(ratio, clip(ratio, 1 - eps, 1 + eps)), ratio = exp(logp_theta - logp_old).
double clipped_ratio(double logp_theta, double logp_old, double epsilon);

// r - log r - 1 with r = pi_ref / pi_theta.
double kl_unbiased(double logp_ref, double logp_theta);

// (log r)^2 / 2.
double kl_stable(double logp_ref, double logp_theta);

double kl_estimate(double logp_ref, double logp_theta, KlMode mode);

std::vector<double> advantage(const RolloutGroup& group, const GrpoConfig& cfg);

// Fills group.advantages and group.kl.
void compute_group(RolloutGroup& group, const GrpoConfig& cfg);

// (1/G) sum_i (A_i - beta * KL_i). Expects compute_group to have run.
double grpo_objective(const RolloutGroup& group, const GrpoConfig& cfg);

}  // namespace grl
