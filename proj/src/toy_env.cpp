#include "grl/toy_env.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "grl/error.hpp"
#include "grl/rng.hpp"

namespace grl {
namespace {

constexpr std::array<std::string_view, 24> kGiven = {
    "Alvar", "Brisa",  "Corin", "Dalia", "Emric", "Fenna", "Galen", "Hesper",
    "Ilsa",  "Joren",  "Kesia", "Lovis", "Marek", "Nelda", "Orrin", "Petra",
    "Quill", "Rosalin", "Soren", "Talia", "Ulric", "Vesna", "Wendel", "Yara"};

constexpr std::array<std::string_view, 24> kFamily = {
    "Ashdown", "Belcourt", "Carrow",  "Dunmore",  "Ellery",  "Fairholm",
    "Grayle",  "Harlan",   "Ivers",   "Kestrel",  "Lomax",   "Marchetti",
    "Norwood", "Oakes",    "Pryce",   "Quenby",   "Rowntree", "Sallow",
    "Thorne",  "Umber",    "Vance",   "Whitlock", "Yelland", "Zeller"};

constexpr std::array<std::string_view, 12> kCities = {
    "Arlen", "Brevik", "Calder", "Dorran", "Estmoor", "Felding",
    "Garrow", "Halden", "Istra", "Jorvale", "Kelmsby", "Lunholt"};

struct Relation {
  std::string_view noun;  // "the mentor of X"
  std::string_view verb;  // "X was mentored by Y."
};

constexpr std::array<Relation, 8> kRelations = {{
    {"mentor", "was mentored by"},
    {"spouse", "is married to"},
    {"employer", "worked for"},
    {"rival", "had a long rivalry with"},
    {"teacher", "studied under"},
    {"successor", "was succeeded by"},
    {"patron", "was sponsored by"},
    {"biographer", "was profiled by"},
}};

constexpr std::array<std::string_view, 8> kFiller = {
    "is remembered for a series of public lectures",
    "kept detailed travel journals",
    "served briefly on a municipal council",
    "collected early printed maps",
    "published a short memoir late in life",
    "trained as a surveyor before changing careers",
    "helped found a regional library",
    "won a minor prize for essay writing"};

struct Paragraph {
  std::string title;
  std::string text;
};

std::string make_name(Rng& rng, std::set<std::string>& used) {
  while (true) {
    std::string name = std::string(kGiven[rng.below(kGiven.size())]) + " " +
                       std::string(kFamily[rng.below(kFamily.size())]);
    if (used.insert(name).second) return name;
  }
}

Paragraph person_paragraph(Rng& rng, const std::string& person,
                           const Relation& rel, const std::string& other) {
  Paragraph p;
  p.title = person;
  p.text = person + ": " + person + " was born in " +
           std::string(kCities[rng.below(kCities.size())]) + ". " + person + " " +
           std::string(rel.verb) + " " + other + ". " + person + " " +
           std::string(kFiller[rng.below(kFiller.size())]) + ".";
  return p;
}

std::string cite_list(const std::set<int>& ids) {
  std::string s;
  bool first = true;
  for (int id : ids) {
    s += first ? "" : ", ";
    s += std::to_string(id);
    first = false;
  }
  return s;
}

std::string analysis_text(const std::set<int>& ids, const std::string& answer) {
  if (ids.empty()) return "No reference was needed. The answer is " + answer + ".";
  std::string s;
  for (int id : ids) {
    s += "Reference " + std::to_string(id) + " supplies one link of the chain. ";
  }
  s += "Combining them, the answer is " + answer + ".";
  return s;
}

std::string render_candidate(const CandidateKind& kind, const std::set<int>& ids,
                             const std::string& answer) {
  const std::string analysis = analysis_text(ids, answer);
  switch (kind.format) {
    case FormatStrategy::valid:
      return render_response(ids, analysis, answer);
    case FormatStrategy::missing_analysis:
      return "<relevance>[" + cite_list(ids) + "]</relevance><answer>" + answer +
             "</answer>";
    case FormatStrategy::reversed:
      return "<answer>" + answer + "</answer><analysis>" + analysis +
             "</analysis><relevance>[" + cite_list(ids) + "]</relevance>";
    case FormatStrategy::unbracketed:
      return "<relevance>" + cite_list(ids) + "</relevance><analysis>" + analysis +
             "</analysis><answer>" + answer + "</answer>";
  }
  return {};
}

}  // namespace

void validate(const EnvConfig& env) {
  if (env.n_hops < 2 || env.n_hops > 4) throw ValidationError("n_hops must be in 2..4");
  if (env.n_refs < env.n_hops || env.n_refs > 20) {
    throw ValidationError("n_refs must be in n_hops..20");
  }
  if (env.n_contexts < 1) throw ValidationError("n_contexts must be >= 1");
  if (env.n_train < 1) throw ValidationError("n_train must be >= 1");
  if (env.n_eval < 1) throw ValidationError("n_eval must be >= 1");
}

const std::vector<CandidateKind>& candidate_kinds() {
  using C = CiteStrategy;
  using A = AnswerStrategy;
  using F = FormatStrategy;
  static const std::vector<CandidateKind> kinds = {
      {C::gold, A::correct, F::valid},
      {C::gold, A::bridge, F::valid},
      {C::gold_minus_one, A::correct, F::valid},
      {C::gold_minus_one, A::bridge, F::valid},
      {C::gold_plus_distractor, A::correct, F::valid},
      {C::gold_plus_distractor, A::bridge, F::valid},
      {C::distractors, A::correct, F::valid},
      {C::distractors, A::bridge, F::valid},
      {C::none, A::correct, F::valid},
      {C::none, A::bridge, F::valid},
      {C::gold, A::correct, F::missing_analysis},
      {C::gold, A::bridge, F::missing_analysis},
      {C::gold, A::correct, F::reversed},
      {C::gold, A::bridge, F::reversed},
      {C::gold, A::correct, F::unbracketed},
      {C::gold, A::bridge, F::unbracketed},
  };
  return kinds;
}

std::vector<std::size_t> slot_permutation(std::size_t context) {
  std::vector<std::size_t> perm(kCandidateCount);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng rng(substream_seed(0x5107ULL, "slot-permutation", context));
  rng.shuffle(perm);
  return perm;
}

std::vector<double> context_features(std::size_t context, int n_contexts) {
  std::vector<double> x(static_cast<std::size_t>(n_contexts) + 1, 0.0);
  x[0] = 1.0;
  x[1 + context] = 1.0;
  return x;
}

ToyTask gen_instance(std::uint64_t seed, int n_refs, int n_hops, int n_contexts) {
  EnvConfig env;
  env.n_refs = n_refs;
  env.n_hops = n_hops;
  env.n_contexts = n_contexts;
  validate(env);

  Rng rng(seed);
  std::set<std::string> used;

  // Chain e0 -> e1 -> ... -> e_hops; the paragraph about e_{j-1} states hop j.
  std::vector<std::string> chain;
  for (int j = 0; j <= n_hops; ++j) chain.push_back(make_name(rng, used));
  std::vector<std::size_t> rel_idx(kRelations.size());
  for (std::size_t i = 0; i < rel_idx.size(); ++i) rel_idx[i] = i;
  rng.shuffle(rel_idx);

  std::vector<Paragraph> facts;
  for (int j = 1; j <= n_hops; ++j) {
    facts.push_back(person_paragraph(rng, chain[j - 1], kRelations[rel_idx[j - 1]],
                                     chain[j]));
  }
  std::vector<Paragraph> distractors;
  for (int d = 0; d < n_refs - n_hops; ++d) {
    const std::string subject = make_name(rng, used);
    const std::string object = make_name(rng, used);
    distractors.push_back(
        person_paragraph(rng, subject, kRelations[rng.below(kRelations.size())], object));
  }

  // Place the chain paragraphs at random positions.
  std::vector<int> positions(static_cast<std::size_t>(n_refs));
  for (int i = 0; i < n_refs; ++i) positions[static_cast<std::size_t>(i)] = i;
  rng.shuffle(positions);
  std::vector<Paragraph> paragraphs(static_cast<std::size_t>(n_refs));
  std::set<int> gold;
  std::vector<int> chain_ids;
  for (int j = 0; j < n_hops; ++j) {
    const int pos = positions[static_cast<std::size_t>(j)];
    paragraphs[static_cast<std::size_t>(pos)] = facts[static_cast<std::size_t>(j)];
    gold.insert(pos + 1);
    chain_ids.push_back(pos + 1);
  }
  std::vector<int> distractor_ids;
  for (int d = 0; d < n_refs - n_hops; ++d) {
    const int pos = positions[static_cast<std::size_t>(n_hops + d)];
    paragraphs[static_cast<std::size_t>(pos)] = distractors[static_cast<std::size_t>(d)];
    distractor_ids.push_back(pos + 1);
  }

  ToyTask task;
  QAInstance& inst = task.instance;
  inst.id = "toy-" + std::to_string(seed);
  std::string question = "Who is the ";
  for (int j = n_hops; j >= 1; --j) {
    question += std::string(kRelations[rel_idx[j - 1]].noun);
    question += j > 1 ? " of the " : " of ";
  }
  question += chain[0] + "?";
  inst.question = std::move(question);
  for (const auto& p : paragraphs) inst.references.push_back(p.text);
  inst.gold_answers = {chain[static_cast<std::size_t>(n_hops)]};
  inst.gold_relevance = gold;
  inst.hop_count = n_hops;

  // Citation sets per strategy. Without enough distractors, an ID past the
  // end stands in; it can only ever be disjoint from gold.
  const int beyond = n_refs + 1;
  std::set<int> minus_one = gold;
  minus_one.erase(chain_ids.back());
  std::set<int> plus_one = gold;
  plus_one.insert(distractor_ids.empty() ? beyond : distractor_ids.front());
  std::set<int> disjoint;
  for (std::size_t d = 0; d < distractor_ids.size() && disjoint.size() < gold.size(); ++d) {
    disjoint.insert(distractor_ids[d]);
  }
  if (disjoint.empty()) disjoint.insert(beyond);

  const std::string& correct = chain[static_cast<std::size_t>(n_hops)];
  const std::string& bridge = chain[static_cast<std::size_t>(n_hops - 1)];

  auto ids_for = [&](CiteStrategy c) -> const std::set<int>& {
    static const std::set<int> empty;
    switch (c) {
      case CiteStrategy::gold:
        return gold;
      case CiteStrategy::gold_minus_one:
        return minus_one;
      case CiteStrategy::gold_plus_distractor:
        return plus_one;
      case CiteStrategy::distractors:
        return disjoint;
      case CiteStrategy::none:
        return empty;
    }
    return empty;
  };

  const std::size_t context = splitmix64(seed ^ 0xc0ffeeULL) % static_cast<std::uint64_t>(n_contexts);
  const auto perm = slot_permutation(context);
  const auto& kinds = candidate_kinds();
  task.candidates.context = context;
  task.candidates.texts.resize(kCandidateCount);
  for (std::size_t slot = 0; slot < kCandidateCount; ++slot) {
    const auto& kind = kinds[perm[slot]];
    const std::string& answer = kind.answer == AnswerStrategy::correct ? correct : bridge;
    task.candidates.texts[slot] = render_candidate(kind, ids_for(kind.cite), answer);
    if (perm[slot] == 0) task.candidates.correct_index = slot;
  }
  task.features = context_features(context, n_contexts);
  return task;
}

std::vector<ToyTask> gen_dataset(std::uint64_t master_seed, std::string_view split,
                                 int count, const EnvConfig& env) {
  validate(env);
  std::vector<ToyTask> out;
  out.reserve(static_cast<std::size_t>(count));
  const std::uint64_t base = substream_seed(master_seed, "env-gen");
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed =
        substream_seed(base, split, static_cast<std::uint64_t>(i));
    out.push_back(gen_instance(seed, env.n_refs, env.n_hops, env.n_contexts));
  }
  return out;
}

}  // namespace grl
