#include "grl/prompt_codec.hpp"

#include <array>
#include <charconv>
#include <cstddef>
#include <optional>

#include "grl/error.hpp"

namespace grl {
namespace {

constexpr std::string_view kTemplate =
    "A conversation between User and Assistant. The user asks a question and "
    "gives some references. The assistant should answer the question based on "
    "the references.\n"
    "\n"
    "User's input will always contain:\n"
    "<question>[ the question to answer ]</question>\n"
    "<references>[ references starting with numbers ]</references>\n"
    "\n"
    "Assistant's response must contain EXACTLY three sections:\n"
    "<relevance>[list ONLY reference numbers that provide useful information "
    "in square brackets, e.g. [1,5]]</relevance>\n"
    "<analysis>[ combine information from relevant references to build the "
    "answer. Explicitly mention which references support each claim "
    "]</analysis>\n"
    "<answer>[ answer with ONLY a short phrase or single word. no explanations "
    "]</answer>\n"
    "\n"
    "User:\n"
    "<question>{question}</question>\n"
    "<references>{references}</references>";

constexpr std::string_view kQuestionSlot = "{question}";
constexpr std::string_view kReferencesSlot = "{references}";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

struct Tag {
  std::string_view open;
  std::string_view close;
};

constexpr std::array<Tag, 3> kSections = {{
    {"<relevance>", "</relevance>"},
    {"<analysis>", "</analysis>"},
    {"<answer>", "</answer>"},
}};

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

// Body of the first open..close pair, if the close follows the open.
std::optional<std::string_view> first_body(std::string_view raw, const Tag& tag) {
  const auto open = raw.find(tag.open);
  if (open == std::string_view::npos) return std::nullopt;
  const auto start = open + tag.open.size();
  const auto close = raw.find(tag.close, start);
  if (close == std::string_view::npos) return std::nullopt;
  return raw.substr(start, close - start);
}

void skip_spaces(std::string_view s, std::size_t& i) {
  while (i < s.size() && is_space(s[i])) ++i;
}

// "[1, 5]", "[]", " [ 2 ,3 ] ". Returns nullopt on any deviation, including
// integers that do not fit in an int.
std::optional<std::set<int>> parse_id_list(std::string_view body) {
  std::size_t i = 0;
  skip_spaces(body, i);
  if (i >= body.size() || body[i] != '[') return std::nullopt;
  ++i;
  std::set<int> ids;
  skip_spaces(body, i);
  if (i < body.size() && body[i] == ']') {
    ++i;
  } else {
    while (true) {
      skip_spaces(body, i);
      const char* first = body.data() + i;
      const char* last = body.data() + body.size();
      if (first != last && *first == '+') return std::nullopt;
      int value = 0;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc{} || ptr == first) return std::nullopt;
      ids.insert(value);
      i = static_cast<std::size_t>(ptr - body.data());
      skip_spaces(body, i);
      if (i >= body.size()) return std::nullopt;
      if (body[i] == ',') {
        ++i;
        continue;
      }
      if (body[i] == ']') {
        ++i;
        break;
      }
      return std::nullopt;
    }
  }
  skip_spaces(body, i);
  if (i != body.size()) return std::nullopt;
  return ids;
}

}  // namespace

void validate(const QAInstance& instance) {
  if (instance.references.empty()) {
    throw ValidationError("instance " + instance.id + ": references is empty");
  }
  if (instance.gold_answers.empty()) {
    throw ValidationError("instance " + instance.id + ": gold_answers is empty");
  }
  if (instance.gold_relevance.empty()) {
    throw ValidationError("instance " + instance.id +
                          ": gold_relevance is empty");
  }
  const int k = static_cast<int>(instance.references.size());
  for (int id : instance.gold_relevance) {
    if (id < 1 || id > k) {
      throw ValidationError("instance " + instance.id + ": relevance id " +
                            std::to_string(id) + " outside 1.." +
                            std::to_string(k));
    }
  }
  if (instance.hop_count != static_cast<int>(instance.gold_relevance.size())) {
    throw ValidationError("instance " + instance.id +
                          ": hop_count does not match gold_relevance size");
  }
}

std::string_view prompt_template() { return kTemplate; }

std::string render_references(const std::vector<std::string>& references) {
  std::string out;
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (i > 0) out += '\n';
    out += std::to_string(i + 1);
    out += ". ";
    out += references[i];
  }
  return out;
}

std::string build_prompt(const QAInstance& instance) {
  std::string out;
  std::string_view rest = kTemplate;
  const auto q = rest.find(kQuestionSlot);
  out.append(rest.substr(0, q));
  out.append(instance.question);
  rest.remove_prefix(q + kQuestionSlot.size());
  const auto r = rest.find(kReferencesSlot);
  out.append(rest.substr(0, r));
  out.append(render_references(instance.references));
  rest.remove_prefix(r + kReferencesSlot.size());
  out.append(rest);
  return out;
}

StructuredResponse parse_response(std::string_view raw, int /*k*/) {
  StructuredResponse resp;
  resp.raw = std::string(raw);

  if (auto a = first_body(raw, kSections[1])) resp.analysis = std::string(trim(*a));
  if (auto a = first_body(raw, kSections[2])) resp.answer = std::string(trim(*a));

  // Every tag exactly once, anywhere in the text.
  for (const auto& tag : kSections) {
    if (count_occurrences(raw, tag.open) != 1 ||
        count_occurrences(raw, tag.close) != 1) {
      return resp;
    }
  }
  // Strict ordering: open < close for each section, sections in sequence.
  std::size_t cursor = 0;
  std::array<std::string_view, 3> bodies;
  for (std::size_t s = 0; s < kSections.size(); ++s) {
    const auto open = raw.find(kSections[s].open);
    const auto close = raw.find(kSections[s].close);
    if (open < cursor || close < open + kSections[s].open.size()) return resp;
    bodies[s] = raw.substr(open + kSections[s].open.size(),
                           close - open - kSections[s].open.size());
    cursor = close + kSections[s].close.size();
  }
  auto ids = parse_id_list(bodies[0]);
  if (!ids) return resp;

  resp.relevance_ids = std::move(*ids);
  resp.analysis = std::string(trim(bodies[1]));
  resp.answer = std::string(trim(bodies[2]));
  resp.format_valid = true;
  return resp;
}

std::string render_response(const std::set<int>& relevance_ids,
                            std::string_view analysis, std::string_view answer) {
  std::string out = "<relevance>[";
  bool first = true;
  for (int id : relevance_ids) {
    if (!first) out += ',';
    out += std::to_string(id);
    first = false;
  }
  out += "]</relevance><analysis>";
  out += analysis;
  out += "</analysis><answer>";
  out += answer;
  out += "</answer>";
  return out;
}

}  // namespace grl
