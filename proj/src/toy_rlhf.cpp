#include "grl/toy_rlhf.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "grl/error.hpp"
#include "grl/metrics.hpp"

namespace grl {
namespace {

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t m = 0; m < probs.size(); ++m) {
    if (probs[m] <= 0.0) continue;
    last_positive = m;
    acc += probs[m];
    if (u < acc) return m;
  }
  return last_positive;
}

// d/d(log pi) of the advantage factor for one output.
double advantage_slope(double ratio, double normalized, const GrpoConfig& cfg) {
  if (cfg.clip_form == ClipForm::ratio || normalized >= 0.0) {
    return ratio <= 1.0 + cfg.epsilon ? normalized * ratio : 0.0;
  }
  // canonical, negative advantage: n * max(ratio, clip(ratio))
  return ratio >= 1.0 - cfg.epsilon ? normalized * ratio : 0.0;
}

// d/d(log pi_theta) of the KL estimate.
double kl_slope(double logp_ref, double logp_theta, KlMode mode) {
  const double log_r = logp_ref - logp_theta;
  return mode == KlMode::unbiased ? -std::expm1(log_r) : -log_r;
}

constexpr std::size_t kDecoyKind = 15;

}  // namespace

InitMode parse_init_mode(std::string_view name) {
  if (name == "uniform") return InitMode::uniform;
  if (name == "adversarial") return InitMode::adversarial;
  throw ValidationError("unknown init mode: " + std::string(name));
}

std::string_view to_string(InitMode mode) {
  return mode == InitMode::uniform ? "uniform" : "adversarial";
}

GrpoConfig TrainConfig::grpo() const {
  GrpoConfig g;
  g.epsilon = epsilon;
  g.beta = beta;
  g.kl_mode = kl_mode;
  g.std_guard = std_guard;
  g.group_size = group_size;
  g.mu = mu;
  g.clip_form = clip_form;
  return g;
}

TrainConfig TrainConfig::large_model_preset() {
  TrainConfig cfg;
  cfg.lr = kLargeModelLearningRate;
  return cfg;
}

void validate(const TrainConfig& cfg) {
  validate(cfg.grpo());
  validate(cfg.env);
  if (!(cfg.lr > 0.0)) throw ValidationError("lr must be > 0");
  if (cfg.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (cfg.steps < 0) throw ValidationError("steps must be >= 0");
  if (!(cfg.temperature > 0.0)) throw ValidationError("temperature must be > 0");
  if (!(cfg.param_bound > 0.0)) throw ValidationError("param_bound must be > 0");
  if (cfg.threads < 1) throw ValidationError("threads must be >= 1");
}

double log_ratio_bound(const TrainConfig& cfg) {
  return 4.0 * 2.0 * cfg.param_bound / cfg.temperature;
}

SampledGroup sample_rollouts(const PolicySnapshot& policy, const ToyTask& task,
                             int group_size, Rng& rng, const RewardConfig& reward,
                             const PolicySnapshot* ref) {
  if (group_size < 2) throw ValidationError("group too small");
  if (policy.n_candidates() != task.candidates.texts.size()) {
    throw ValidationError("policy and candidate space differ in size");
  }
  const auto logp = policy.log_probabilities(task.features);
  const auto logp_ref = ref ? ref->log_probabilities(task.features) : logp;
  std::vector<double> probs(logp.size());
  std::transform(logp.begin(), logp.end(), probs.begin(),
                 [](double v) { return std::exp(v); });

  const int k = static_cast<int>(task.instance.references.size());
  SampledGroup out;
  auto& g = out.group;
  for (int i = 0; i < group_size; ++i) {
    const std::size_t o = sample_index(probs, rng);
    g.choices.push_back(o);
    g.logp_theta.push_back(logp[o]);
    g.logp_old.push_back(logp[o]);
    g.logp_ref.push_back(logp_ref[o]);
    const auto b =
        total_reward(task.instance, parse_response(task.candidates.texts[o], k), reward);
    g.rewards.push_back(b.total);
    out.breakdowns.push_back(b);
  }
  return out;
}

std::vector<double> surrogate_gradient(const RolloutGroup& group,
                                       std::span<const double> features,
                                       const PolicySnapshot& policy,
                                       const PolicySnapshot& old,
                                       const PolicySnapshot& ref,
                                       const GrpoConfig& cfg) {
  const std::size_t g = group.size();
  if (group.choices.size() != g) throw ValidationError("rollout group arrays differ in length");
  const std::size_t m_count = policy.n_candidates();
  const auto normalized = normalize_rewards(group.rewards, cfg.std_guard);
  const auto logp = policy.log_probabilities(features);
  const auto logp_old = old.log_probabilities(features);
  const auto logp_ref = ref.log_probabilities(features);

  // Gradient w.r.t. log pi of each sampled output, folded into a gradient
  // over the logits: d log pi(o) / d z_m = (1[m = o] - pi_m) / T.
  std::vector<double> grad_logits(m_count, 0.0);
  double coeff_sum = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t o = group.choices[i];
    const double ratio = std::exp(logp[o] - logp_old[o]);
    const double c = (advantage_slope(ratio, normalized[i], cfg) -
                      cfg.beta * kl_slope(logp_ref[o], logp[o], cfg.kl_mode)) /
                     static_cast<double>(g);
    grad_logits[o] += c;
    coeff_sum += c;
  }
  const double inv_t = 1.0 / policy.temperature();
  for (std::size_t m = 0; m < m_count; ++m) {
    grad_logits[m] = (grad_logits[m] - coeff_sum * std::exp(logp[m])) * inv_t;
  }

  std::vector<double> grad(policy.n_features() * m_count, 0.0);
  for (std::size_t f = 0; f < policy.n_features(); ++f) {
    if (features[f] == 0.0) continue;
    for (std::size_t m = 0; m < m_count; ++m) {
      grad[f * m_count + m] = features[f] * grad_logits[m];
    }
  }
  return grad;
}

PolicySnapshot initial_policy(const TrainConfig& cfg, std::uint64_t seed) {
  PolicySnapshot p(static_cast<std::size_t>(cfg.env.n_contexts) + 1, kCandidateCount,
                   cfg.temperature, seed);
  if (cfg.init == InitMode::adversarial) {
    // The reference strongly prefers a zero-reward reply (broken relevance
    // list, wrong answer) in every context. Training drives it towards zero
    // probability under the policy while the reference keeps it likely.
    for (int c = 0; c < cfg.env.n_contexts; ++c) {
      const auto perm = slot_permutation(static_cast<std::size_t>(c));
      const auto decoy = static_cast<std::size_t>(
          std::find(perm.begin(), perm.end(), kDecoyKind) - perm.begin());
      p.at(1 + static_cast<std::size_t>(c), decoy) = cfg.decoy_logit;
    }
    p.clamp(cfg.param_bound);
  }
  return p;
}

TrainLog train(const TrainConfig& cfg, std::span<const ToyTask> tasks,
               const PolicySnapshot& initial, std::uint64_t seed) {
  validate(cfg);
  if (tasks.empty()) throw ValidationError("no instances");
  const GrpoConfig gcfg = cfg.grpo();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const std::uint64_t rollout_base = substream_seed(seed, "rollout");

  TrainLog log;
  PolicySnapshot current = initial;
  const PolicySnapshot& ref = initial;

  std::vector<SampledGroup> groups(batch);
  std::vector<std::size_t> picks(batch);
  std::vector<std::vector<double>> grads(batch);
  std::vector<double> objectives(batch);

  for (int step = 0; step < cfg.steps; ++step) {
    const PolicySnapshot old = current;
    parallel_for(batch, cfg.threads, [&](std::size_t b) {
      Rng rng(substream_seed(rollout_base, "slot",
                             static_cast<std::uint64_t>(step) * batch + b));
      picks[b] = static_cast<std::size_t>(rng.below(tasks.size()));
      groups[b] = sample_rollouts(old, tasks[picks[b]], cfg.group_size, rng,
                                  cfg.reward, &ref);
    });

    StepRecord rec;
    rec.step = step;
    double samples = 0.0;
    for (const auto& sg : groups) {
      for (const auto& br : sg.breakdowns) {
        rec.mean_reward += br.total;
        rec.format_rate += br.format;
        rec.accuracy_rate += br.accuracy == 1.0 ? 1.0 : 0.0;
        samples += 1.0;
      }
    }
    rec.mean_reward /= samples;
    rec.format_rate /= samples;
    rec.accuracy_rate /= samples;

    for (int inner = 0; inner < cfg.mu; ++inner) {
      parallel_for(batch, cfg.threads, [&](std::size_t b) {
        RolloutGroup& grp = groups[b].group;
        const ToyTask& task = tasks[picks[b]];
        const auto logp = current.log_probabilities(task.features);
        for (std::size_t i = 0; i < grp.size(); ++i) grp.logp_theta[i] = logp[grp.choices[i]];
        compute_group(grp, gcfg);
        objectives[b] = grpo_objective(grp, gcfg);
        grads[b] = surrogate_gradient(grp, task.features, current, old, ref, gcfg);
      });

      std::vector<double> total(current.theta().size(), 0.0);
      double objective = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < total.size(); ++j) total[j] += grads[b][j];
        objective += objectives[b];
      }
      if (inner == 0) rec.objective = objective / static_cast<double>(batch);
      // KL is logged over every inner pass; later passes see the drifted policy.
      for (const auto& sg : groups) {
        for (double v : sg.group.kl) {
          rec.mean_kl += v;
          rec.max_kl = std::max(rec.max_kl, v);
        }
      }
      auto theta = current.theta();
      const double scale = cfg.lr / static_cast<double>(batch);
      for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += scale * total[j];
      current.clamp(cfg.param_bound);
    }
    rec.mean_kl /= samples * static_cast<double>(cfg.mu);
    log.records.push_back(rec);
  }
  log.policy = std::move(current);
  return log;
}

TrainLog train(const TrainConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const auto tasks = gen_dataset(seed, "train", cfg.env.n_train, cfg.env);
  return train(cfg, tasks, initial_policy(cfg, seed), seed);
}

PolicyMetrics evaluate_policy(const PolicySnapshot& policy,
                              std::span<const ToyTask> tasks, EvalMode mode,
                              const RewardConfig& reward) {
  if (tasks.empty()) throw ValidationError("no instances");
  PolicyMetrics out;
  out.n = tasks.size();
  for (const auto& task : tasks) {
    const int k = static_cast<int>(task.instance.references.size());
    std::vector<double> weights(task.candidates.texts.size(), 0.0);
    if (mode == EvalMode::greedy) {
      weights[policy.greedy(task.features)] = 1.0;
    } else {
      weights = policy.probabilities(task.features);
    }
    for (std::size_t m = 0; m < weights.size(); ++m) {
      if (weights[m] == 0.0) continue;
      const auto resp = parse_response(task.candidates.texts[m], k);
      const auto b = total_reward(task.instance, resp, reward);
      out.em += weights[m] * exact_match(resp.answer, task.instance.gold_answers);
      out.f1 += weights[m] * f1_score(resp.answer, task.instance.gold_answers);
      out.format_rate += weights[m] * b.format;
      out.relevance_full_rate += weights[m] * (b.relevance == 1.0 ? 1.0 : 0.0);
      out.mean_reward += weights[m] * b.total;
    }
  }
  const double n = static_cast<double>(out.n);
  out.em /= n;
  out.f1 /= n;
  out.format_rate /= n;
  out.relevance_full_rate /= n;
  out.mean_reward /= n;
  return out;
}

}  // namespace grl
