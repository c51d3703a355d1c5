#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "grl/prompt_codec.hpp"

namespace grl {

struct RawParagraph {
  std::string title;
  std::vector<std::string> sentences;
};

struct SupportingFact {
  std::string title;
  int sentence_index = 0;
  // Set when the source identifies the paragraph by position (MuSiQue's
  // is_supporting flags); 0-based.
  std::optional<std::size_t> paragraph_index;
};

struct RawRecord {
  std::string id;
  std::string question;
  std::vector<RawParagraph> paragraphs;
  std::vector<std::string> answers;
  std::vector<SupportingFact> supporting_facts;
};

// hotpotqa: {_id, question, answer, context: [[title, [sent...]]...],
//            supporting_facts: [[title, idx]...]}
// 2wiki: same layout as hotpotqa (2WikiMultiHopQA release).
// musique: {id, question, answer, answer_aliases?,
//           paragraphs: [{idx?, title, paragraph_text, is_supporting}]}
// auto: musique when "paragraphs" is present, else hotpotqa.
enum class Schema { auto_detect, hotpotqa, two_wiki, musique };

Schema parse_schema(std::string_view name);
std::string_view to_string(Schema schema);

// `line_no` is used only for error messages.
RawRecord parse_record(std::string_view line, Schema schema = Schema::auto_detect,
                       std::size_t line_no = 0);

// 1-based IDs of the paragraphs named by supporting facts.
std::set<int> gold_relevance(const RawRecord& record);

int hop_count(const RawRecord& record);

// "title: sentence sentence ..."
std::string paragraph_text(const RawParagraph& paragraph);

QAInstance to_instance(const RawRecord& record);

// Table-style corpus statistics.
struct CorpusSummary {
  std::string dataset;
  std::string split;
  std::size_t size = 0;
  std::size_t min_paragraphs = 0;
  std::size_t max_paragraphs = 0;
  std::map<int, std::size_t> hop_histogram;
  double avg_hops = 0.0;
};

CorpusSummary summarize(const std::vector<QAInstance>& instances,
                        std::string dataset = {}, std::string split = {});

// Plain-text table with columns Dataset, Split, Data Size, # Paragraphs,
// 1-hop..4-hop, 5+-hop, Avg. Hops.
std::string format_summary_table(const std::vector<CorpusSummary>& rows);

// Seeded uniform subsample of `k` positions out of `n`, in ascending order.
// k >= n returns every position.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::uint64_t seed);

// Canonical instance file: one JSON object per line.
std::string instance_to_json(const QAInstance& instance);
QAInstance instance_from_json(std::string_view line, std::size_t line_no = 0);

std::vector<QAInstance> read_instances(std::istream& in);

}  // namespace grl
