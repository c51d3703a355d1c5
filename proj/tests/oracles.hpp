#pragma once

// Independent reference implementations used by both the unit suites and the
// acceptance binary. Each one is written from the rule statement, without
// calling into the code it checks.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "grl/grpo.hpp"
#include "grl/policy.hpp"
#include "grl/toy_rlhf.hpp"

namespace oracle {

// Subset of {1..n} encoded as a bitmask.
inline std::set<int> subset(unsigned mask, int n = 5) {
  std::set<int> s;
  for (int i = 0; i < n; ++i)
    if (mask & (1u << i)) s.insert(i + 1);
  return s;
}

inline double relevance(unsigned pred, unsigned gold) {
  if (pred == gold) return 1.0;
  if (pred & gold) return 0.5;
  return 0.0;
}

// Rule-by-rule normalization for ASCII text: lower, strip punctuation other
// than '_', drop article words (split on whitespace and '_'), then '_' to
// space, collapse, trim.
inline std::string normalize_ascii(const std::string& text) {
  std::string s;
  for (unsigned char c : text) s += static_cast<char>(std::tolower(c));
  std::string no_punct;
  for (char c : s)
    if (!(std::ispunct(static_cast<unsigned char>(c)) && c != '_')) no_punct += c;
  std::vector<std::string> pieces;  // words and separators, in order
  std::string cur;
  for (char c : no_punct) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '_') {
      pieces.push_back(cur);
      pieces.push_back(std::string(1, c));
      cur.clear();
    } else {
      cur += c;
    }
  }
  pieces.push_back(cur);
  std::string kept;
  for (const auto& p : pieces)
    if (p != "a" && p != "an" && p != "the") kept += p;
  for (char& c : kept)
    if (c == '_') c = ' ';
  std::istringstream in(kept);
  std::string w, out;
  while (in >> w) out += (out.empty() ? "" : " ") + w;
  return out;
}

inline std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline double f1(const std::string& pred, const std::string& gold) {
  const auto p = words(normalize_ascii(pred));
  const auto g = words(normalize_ascii(gold));
  if (p.empty() && g.empty()) return 1.0;
  std::map<std::string, int> cp, cg;
  for (const auto& w : p) ++cp[w];
  for (const auto& w : g) ++cg[w];
  int common = 0;
  for (const auto& [w, n] : cp) {
    auto it = cg.find(w);
    if (it != cg.end()) common += std::min(n, it->second);
  }
  if (common == 0) return 0.0;
  const double prec = static_cast<double>(common) / static_cast<double>(p.size());
  const double rec = static_cast<double>(common) / static_cast<double>(g.size());
  return 2 * prec * rec / (prec + rec);
}

// The surrogate objective as a function of the current parameters, with the
// normalized rewards frozen at their on-policy values.
inline double surrogate(const grl::RolloutGroup& base, std::span<const double> x,
                        const grl::PolicySnapshot& policy,
                        const grl::PolicySnapshot& old,
                        const grl::PolicySnapshot& ref,
                        const grl::GrpoConfig& cfg) {
  const auto lp = policy.log_probabilities(x);
  const auto lo = old.log_probabilities(x);
  const auto lr = ref.log_probabilities(x);
  const auto norm = grl::normalize_rewards(base.rewards, cfg.std_guard);
  double total = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const std::size_t o = base.choices[i];
    const double ratio = std::exp(lp[o] - lo[o]);
    const double clipped = std::clamp(ratio, 1 - cfg.epsilon, 1 + cfg.epsilon);
    double a = 0.0;
    if (cfg.clip_form == grl::ClipForm::ratio) {
      a = std::min(ratio, clipped) * norm[i];
    } else {
      a = std::min(ratio * norm[i], clipped * norm[i]);
    }
    const double d = lr[o] - lp[o];
    const double kl = cfg.kl_mode == grl::KlMode::stable ? 0.5 * d * d
                                                         : std::exp(d) - d - 1;
    total += a - cfg.beta * kl;
  }
  return total / static_cast<double>(base.size());
}

inline std::vector<double> finite_difference(const grl::RolloutGroup& group,
                                             std::span<const double> x,
                                             const grl::PolicySnapshot& policy,
                                             const grl::PolicySnapshot& old,
                                             const grl::PolicySnapshot& ref,
                                             const grl::GrpoConfig& cfg,
                                             double h = 1e-5) {
  std::vector<double> g(policy.theta().size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    grl::PolicySnapshot plus = policy, minus = policy;
    plus.theta()[j] += h;
    minus.theta()[j] -= h;
    g[j] = (surrogate(group, x, plus, old, ref, cfg) -
            surrogate(group, x, minus, old, ref, cfg)) /
           (2 * h);
  }
  return g;
}

}  // namespace oracle
