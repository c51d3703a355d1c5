#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "grl/prompt_codec.hpp"

namespace grl {

// How the accuracy component scores the extracted answer. `em` is the
// default; the others exist for reward-type ablations.
enum class AccuracyMode { em, f1, judge_stub };

AccuracyMode parse_accuracy_mode(std::string_view name);
std::string_view to_string(AccuracyMode mode);

struct RewardWeights {
  double format = 1.0;
  double accuracy = 1.0;
  double relevance = 1.0;
  double bonus = 1.0;
};

struct RewardConfig {
  RewardWeights weights;
  double bonus_value = 10.0;
  AccuracyMode accuracy_mode = AccuracyMode::em;
};

struct RewardBreakdown {
  double format = 0.0;
  double accuracy = 0.0;
  double relevance = 0.0;
  double bonus = 0.0;
  double total = 0.0;
};

double format_reward(const StructuredResponse& resp);

// Normalized exact match against any gold.
double accuracy_reward(std::string_view answer,
                       const std::vector<std::string>& gold_answers);

// 1 on set equality, 0.5 on partial overlap (including supersets), 0 when
// disjoint. An empty prediction is disjoint.
double relevance_reward(const std::set<int>& pred, const std::set<int>& gold);

// `bonus_value` iff all three components are exactly 1.
double bonus_reward(double format, double accuracy, double relevance,
                    double bonus_value = 10.0);

RewardBreakdown total_reward(const QAInstance& instance,
                             const StructuredResponse& resp,
                             const RewardConfig& config = {});

}  // namespace grl
