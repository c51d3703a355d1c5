#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grl/grpo.hpp"
#include "grl/policy.hpp"
#include "grl/reward.hpp"
#include "grl/rng.hpp"
#include "grl/toy_env.hpp"

namespace grl {

// 3e-6 is tuned for 7B-parameter models; the toy policy needs a far larger
// step. Both are kept so runs can name which one they use.
inline constexpr double kLargeModelLearningRate = 3e-6;
inline constexpr double kToyLearningRate = 0.05;

enum class InitMode {
  uniform,      // all-zero logits
  adversarial,  // per-context decoy slot favoured by the reference policy
};

InitMode parse_init_mode(std::string_view name);
std::string_view to_string(InitMode mode);

struct TrainConfig {
  int group_size = 7;
  double lr = kToyLearningRate;
  int batch_size = 256;
  int steps = 300;
  double temperature = 0.9;
  double beta = 0.04;
  double epsilon = 0.2;
  int mu = 1;
  KlMode kl_mode = KlMode::stable;
  ClipForm clip_form = ClipForm::ratio;
  double std_guard = 1e-8;
  RewardConfig reward;
  EnvConfig env;
  InitMode init = InitMode::uniform;
  double decoy_logit = 3.0;
  double param_bound = 50.0;
  int threads = 1;

  GrpoConfig grpo() const;

  // Same as the defaults except for the 7B learning rate.
  static TrainConfig large_model_preset();
};

void validate(const TrainConfig& cfg);

// Largest |log pi_ref(o) - log pi_theta(o)| reachable inside the parameter
// box: 4 * |x|_1 * param_bound / temperature, with |x|_1 = 2.
double log_ratio_bound(const TrainConfig& cfg);

struct SampledGroup {
  RolloutGroup group;
  std::vector<RewardBreakdown> breakdowns;
};

// Draws G candidates from `policy`. logp_theta and logp_old both hold the
// sampling policy's log-probabilities; logp_ref uses `ref` (or `policy` when
// null). Rewards come from parsing each sampled text.
SampledGroup sample_rollouts(const PolicySnapshot& policy, const ToyTask& task,
                             int group_size, Rng& rng,
                             const RewardConfig& reward = {},
                             const PolicySnapshot* ref = nullptr);

// Gradient over theta (row-major, same shape as policy.theta()) of
// (1/G) sum_i (A_i - beta KL_i) for the sampled choices, with the normalized
// rewards held constant. Ratios use `old`, KL uses `ref`.
std::vector<double> surrogate_gradient(const RolloutGroup& group,
                                       std::span<const double> features,
                                       const PolicySnapshot& policy,
                                       const PolicySnapshot& old,
                                       const PolicySnapshot& ref,
                                       const GrpoConfig& cfg);

struct StepRecord {
  int step = 0;
  double mean_reward = 0.0;
  double format_rate = 0.0;
  double accuracy_rate = 0.0;
  double mean_kl = 0.0;
  double max_kl = 0.0;
  double objective = 0.0;
};

struct TrainLog {
  std::vector<StepRecord> records;
  PolicySnapshot policy;  // final parameters
};

PolicySnapshot initial_policy(const TrainConfig& cfg, std::uint64_t seed);

// The reference policy is `initial` and never changes. Each step snapshots
// old <- current, samples one group per batch slot under old, then takes mu
// ascent steps.
TrainLog train(const TrainConfig& cfg, std::span<const ToyTask> tasks,
               const PolicySnapshot& initial, std::uint64_t seed);

// Generates the training split from cfg.env and the seed, then trains.
TrainLog train(const TrainConfig& cfg, std::uint64_t seed);

enum class EvalMode {
  greedy,    // argmax candidate per instance
  expected,  // policy-weighted average over candidates
};

struct PolicyMetrics {
  std::size_t n = 0;
  double em = 0.0;
  double f1 = 0.0;
  double format_rate = 0.0;
  double relevance_full_rate = 0.0;
  double mean_reward = 0.0;
};

// Throws ValidationError("no instances") on an empty span.
PolicyMetrics evaluate_policy(const PolicySnapshot& policy,
                              std::span<const ToyTask> tasks,
                              EvalMode mode = EvalMode::greedy,
                              const RewardConfig& reward = {});

}  // namespace grl
