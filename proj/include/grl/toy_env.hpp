#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "grl/prompt_codec.hpp"

namespace grl {

// Finite stand-in for a generator's output space: every candidate is a full
// raw reply text. Slot meaning (which response strategy sits where) depends
// on the instance's context bucket, so a policy has to condition on it.
struct CandidateSpace {
  std::vector<std::string> texts;
  std::size_t correct_index = 0;  // the unique candidate worth 13
  std::size_t context = 0;
};

struct ToyTask {
  QAInstance instance;
  CandidateSpace candidates;
  std::vector<double> features;  // [1, one_hot(context)]
};

struct EnvConfig {
  int n_refs = 10;
  int n_hops = 2;
  int n_contexts = 4;
  int n_train = 256;
  int n_eval = 128;
};

void validate(const EnvConfig& env);

inline constexpr std::size_t kCandidateCount = 16;

// How one candidate slot answers: which IDs it cites, which entity it names,
// and whether (and how) the three-section structure is broken.
enum class CiteStrategy { gold, gold_minus_one, gold_plus_distractor, distractors, none };
enum class AnswerStrategy { correct, bridge };
enum class FormatStrategy { valid, missing_analysis, reversed, unbracketed };

struct CandidateKind {
  CiteStrategy cite;
  AnswerStrategy answer;
  FormatStrategy format;
};

// The 16 kinds in canonical order; kind 0 is the fully-correct reply.
const std::vector<CandidateKind>& candidate_kinds();

// Canonical kind index held by each slot for a context bucket.
std::vector<std::size_t> slot_permutation(std::size_t context);

// Deterministic in (seed, n_refs, n_hops, n_contexts). Requires
// 2 <= n_hops <= 4 and n_hops <= n_refs <= 20.
ToyTask gen_instance(std::uint64_t seed, int n_refs, int n_hops,
                     int n_contexts = 4);

std::vector<double> context_features(std::size_t context, int n_contexts);

// `count` tasks seeded from the "env-gen" substream of `master_seed`;
// different `split` names give disjoint instance streams.
std::vector<ToyTask> gen_dataset(std::uint64_t master_seed, std::string_view split,
                                 int count, const EnvConfig& env);

}  // namespace grl
