#include "grl/reward.hpp"

#include <algorithm>

#include "grl/error.hpp"
#include "grl/judge.hpp"
#include "grl/metrics.hpp"

namespace grl {

AccuracyMode parse_accuracy_mode(std::string_view name) {
  if (name == "em") return AccuracyMode::em;
  if (name == "f1") return AccuracyMode::f1;
  if (name == "judge-stub") return AccuracyMode::judge_stub;
  throw ValidationError("unknown accuracy mode: " + std::string(name));
}

std::string_view to_string(AccuracyMode mode) {
  switch (mode) {
    case AccuracyMode::em:
      return "em";
    case AccuracyMode::f1:
      return "f1";
    case AccuracyMode::judge_stub:
      return "judge-stub";
  }
  return "em";
}

double format_reward(const StructuredResponse& resp) {
  return resp.format_valid ? 1.0 : 0.0;
}

double accuracy_reward(std::string_view answer,
                       const std::vector<std::string>& gold_answers) {
  return exact_match(answer, gold_answers);
}

double relevance_reward(const std::set<int>& pred, const std::set<int>& gold) {
  if (pred == gold) return 1.0;
  const bool overlap = std::any_of(pred.begin(), pred.end(),
                                   [&](int id) { return gold.count(id) > 0; });
  return overlap ? 0.5 : 0.0;
}

double bonus_reward(double format, double accuracy, double relevance,
                    double bonus_value) {
  return (format == 1.0 && accuracy == 1.0 && relevance == 1.0) ? bonus_value
                                                                  : 0.0;
}

RewardBreakdown total_reward(const QAInstance& instance,
                             const StructuredResponse& resp,
                             const RewardConfig& config) {
  RewardBreakdown b;
  b.format = format_reward(resp);
  switch (config.accuracy_mode) {
    case AccuracyMode::em:
      b.accuracy = accuracy_reward(resp.answer, instance.gold_answers);
      break;
    case AccuracyMode::f1:
      b.accuracy = f1_score(resp.answer, instance.gold_answers);
      break;
    case AccuracyMode::judge_stub: {
      StubJudgeClient stub;
      b.accuracy =
          judge(instance.gold_answers, resp.answer, stub).verdict == Verdict::yes
              ? 1.0
              : 0.0;
      break;
    }
  }
  b.relevance = relevance_reward(resp.relevance_ids, instance.gold_relevance);
  b.bonus = bonus_reward(b.format, b.accuracy, b.relevance, config.bonus_value);
  const auto& w = config.weights;
  b.total = w.format * b.format + w.accuracy * b.accuracy +
            w.relevance * b.relevance + w.bonus * b.bonus;
  return b;
}

}  // namespace grl
