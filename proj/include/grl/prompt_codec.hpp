#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace grl {

// One question with its numbered references and gold targets. Reference at
// position i (0-based) carries ID i + 1.
struct QAInstance {
  std::string id;
  std::string question;
  std::vector<std::string> references;
  std::vector<std::string> gold_answers;
  std::set<int> gold_relevance;
  int hop_count = 0;
};

// Throws ValidationError naming the first violated invariant.
void validate(const QAInstance& instance);

struct StructuredResponse {
  std::set<int> relevance_ids;
  std::string analysis;
  std::string answer;
  bool format_valid = false;
  std::string raw;
};

// The fixed prompt template with {question} and {references} placeholders.
std::string_view prompt_template();

// References rendered as "1. text\n2. text...".
std::string render_references(const std::vector<std::string>& references);

std::string build_prompt(const QAInstance& instance);

// Parses a model reply. Never throws: malformed text yields
// format_valid == false with best-effort analysis/answer extraction.
// `k` is the number of references; IDs outside 1..k are kept as-is.
StructuredResponse parse_response(std::string_view raw, int k);

// Renders a well-formed three-section reply, e.g.
// "<relevance>[1,5]</relevance><analysis>...</analysis><answer>...</answer>".
std::string render_response(const std::set<int>& relevance_ids,
                            std::string_view analysis, std::string_view answer);

}  // namespace grl
