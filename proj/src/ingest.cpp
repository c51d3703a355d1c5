#include "grl/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <sstream>

#include "grl/error.hpp"
#include "grl/rng.hpp"
#include "json.hpp"

namespace grl {
namespace {

using nlohmann::json;

const json& require(const json& obj, std::string_view key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line_no, "missing field: " + std::string(key));
  return *it;
}

std::string require_string(const json& obj, std::string_view key, std::size_t line_no) {
  const auto& v = require(obj, key, line_no);
  if (!v.is_string()) throw ParseError(line_no, "field " + std::string(key) + " must be a string");
  return v.get<std::string>();
}

// Scalar or list answer, plus optional aliases; deduplicated in order.
std::vector<std::string> read_answers(const json& obj, std::size_t line_no) {
  std::vector<std::string> out;
  auto add = [&](const json& v) {
    if (!v.is_string()) throw ParseError(line_no, "answers must be strings");
    auto s = v.get<std::string>();
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  };
  const json* answer = nullptr;
  if (auto it = obj.find("answers"); it != obj.end()) {
    answer = &*it;
  } else {
    answer = &require(obj, "answer", line_no);
  }
  if (answer->is_array()) {
    for (const auto& v : *answer) add(v);
  } else {
    add(*answer);
  }
  if (auto it = obj.find("answer_aliases"); it != obj.end()) {
    if (!it->is_array()) throw ParseError(line_no, "answer_aliases must be a list");
    for (const auto& v : *it) add(v);
  }
  if (out.empty()) throw ParseError(line_no, "answer list is empty");
  return out;
}

std::string read_id(const json& obj, std::size_t line_no) {
  for (const char* key : {"_id", "id"}) {
    if (auto it = obj.find(key); it != obj.end()) {
      if (it->is_string()) return it->get<std::string>();
      if (it->is_number_integer()) return std::to_string(it->get<long long>());
      throw ParseError(line_no, std::string("field ") + key + " must be a string");
    }
  }
  throw ParseError(line_no, "missing field: id");
}

RawRecord parse_hotpot(const json& obj, std::size_t line_no) {
  RawRecord r;
  r.id = read_id(obj, line_no);
  r.question = require_string(obj, "question", line_no);
  r.answers = read_answers(obj, line_no);
  const auto& ctx = require(obj, "context", line_no);
  if (!ctx.is_array()) throw ParseError(line_no, "context must be a list");
  for (const auto& p : ctx) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_array()) {
      throw ParseError(line_no, "context entries must be [title, [sentences]]");
    }
    RawParagraph para;
    para.title = p[0].get<std::string>();
    for (const auto& s : p[1]) {
      if (!s.is_string()) throw ParseError(line_no, "sentences must be strings");
      para.sentences.push_back(s.get<std::string>());
    }
    r.paragraphs.push_back(std::move(para));
  }
  const auto& facts = require(obj, "supporting_facts", line_no);
  if (!facts.is_array()) throw ParseError(line_no, "supporting_facts must be a list");
  for (const auto& f : facts) {
    if (!f.is_array() || f.size() != 2 || !f[0].is_string() || !f[1].is_number_integer()) {
      throw ParseError(line_no, "supporting_facts entries must be [title, index]");
    }
    r.supporting_facts.push_back({f[0].get<std::string>(), f[1].get<int>(), std::nullopt});
  }
  return r;
}

RawRecord parse_musique(const json& obj, std::size_t line_no) {
  RawRecord r;
  r.id = read_id(obj, line_no);
  r.question = require_string(obj, "question", line_no);
  r.answers = read_answers(obj, line_no);
  const auto& paras = require(obj, "paragraphs", line_no);
  if (!paras.is_array()) throw ParseError(line_no, "paragraphs must be a list");
  for (std::size_t i = 0; i < paras.size(); ++i) {
    const auto& p = paras[i];
    if (!p.is_object()) throw ParseError(line_no, "paragraphs entries must be objects");
    RawParagraph para;
    para.title = require_string(p, "title", line_no);
    para.sentences.push_back(require_string(p, "paragraph_text", line_no));
    const auto& sup = require(p, "is_supporting", line_no);
    if (!sup.is_boolean()) throw ParseError(line_no, "is_supporting must be a boolean");
    if (sup.get<bool>()) r.supporting_facts.push_back({para.title, 0, i});
    r.paragraphs.push_back(std::move(para));
  }
  return r;
}

}  // namespace

Schema parse_schema(std::string_view name) {
  if (name == "auto") return Schema::auto_detect;
  if (name == "hotpotqa") return Schema::hotpotqa;
  if (name == "2wiki") return Schema::two_wiki;
  if (name == "musique") return Schema::musique;
  throw ValidationError("unknown schema: " + std::string(name));
}

std::string_view to_string(Schema schema) {
  switch (schema) {
    case Schema::auto_detect:
      return "auto";
    case Schema::hotpotqa:
      return "hotpotqa";
    case Schema::two_wiki:
      return "2wiki";
    case Schema::musique:
      return "musique";
  }
  return "auto";
}

RawRecord parse_record(std::string_view line, Schema schema, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed record: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "record must be a JSON object");
  if (schema == Schema::auto_detect) {
    schema = obj.contains("paragraphs") ? Schema::musique : Schema::hotpotqa;
  }
  RawRecord r = schema == Schema::musique ? parse_musique(obj, line_no)
                                          : parse_hotpot(obj, line_no);
  if (r.paragraphs.empty()) throw ParseError(line_no, "record has no paragraphs");
  return r;
}

std::set<int> gold_relevance(const RawRecord& record) {
  std::set<int> ids;
  std::vector<std::string> missing;
  for (const auto& fact : record.supporting_facts) {
    if (fact.paragraph_index) {
      if (*fact.paragraph_index >= record.paragraphs.size()) {
        throw ValidationError("record " + record.id + ": supporting paragraph index " +
                              std::to_string(*fact.paragraph_index) + " out of range");
      }
      ids.insert(static_cast<int>(*fact.paragraph_index) + 1);
      continue;
    }
    std::vector<int> hits;
    for (std::size_t i = 0; i < record.paragraphs.size(); ++i) {
      if (record.paragraphs[i].title == fact.title) hits.push_back(static_cast<int>(i) + 1);
    }
    if (hits.empty()) {
      if (std::find(missing.begin(), missing.end(), fact.title) == missing.end()) {
        missing.push_back(fact.title);
      }
    } else if (hits.size() > 1) {
      throw ValidationError("record " + record.id + ": supporting-fact title '" +
                            fact.title + "' names several paragraphs");
    } else {
      ids.insert(hits.front());
    }
  }
  if (!missing.empty()) {
    std::string msg = "record " + record.id + ": supporting-fact title not in paragraphs:";
    for (const auto& t : missing) msg += " '" + t + "'";
    throw ValidationError(msg);
  }
  return ids;
}

int hop_count(const RawRecord& record) {
  return static_cast<int>(gold_relevance(record).size());
}

std::string paragraph_text(const RawParagraph& paragraph) {
  std::string text = paragraph.title + ":";
  for (const auto& s : paragraph.sentences) {
    // Source sentences often carry their own leading space.
    std::string_view v = s;
    while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
    while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
    if (v.empty()) continue;
    text += ' ';
    text += v;
  }
  return text;
}

QAInstance to_instance(const RawRecord& record) {
  QAInstance inst;
  inst.id = record.id;
  inst.question = record.question;
  for (const auto& p : record.paragraphs) inst.references.push_back(paragraph_text(p));
  inst.gold_answers = record.answers;
  inst.gold_relevance = gold_relevance(record);
  inst.hop_count = static_cast<int>(inst.gold_relevance.size());
  validate(inst);
  return inst;
}

CorpusSummary summarize(const std::vector<QAInstance>& instances, std::string dataset,
                        std::string split) {
  CorpusSummary s;
  s.dataset = std::move(dataset);
  s.split = std::move(split);
  s.size = instances.size();
  if (instances.empty()) return s;
  s.min_paragraphs = instances.front().references.size();
  s.max_paragraphs = s.min_paragraphs;
  long total_hops = 0;
  for (const auto& inst : instances) {
    s.min_paragraphs = std::min(s.min_paragraphs, inst.references.size());
    s.max_paragraphs = std::max(s.max_paragraphs, inst.references.size());
    ++s.hop_histogram[inst.hop_count];
    total_hops += inst.hop_count;
  }
  s.avg_hops = static_cast<double>(total_hops) / static_cast<double>(s.size);
  return s;
}

std::string format_summary_table(const std::vector<CorpusSummary>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-8s %9s %12s %6s %6s %6s %6s %7s %9s\n", "Dataset",
                "Split", "Data Size", "# Paragraphs", "1-hop", "2-hop", "3-hop", "4-hop",
                "5+-hop", "Avg. Hops");
  out << buf;
  for (const auto& r : rows) {
    auto hops = [&](int h) {
      auto it = r.hop_histogram.find(h);
      return it == r.hop_histogram.end() ? std::size_t{0} : it->second;
    };
    std::size_t more = 0;
    for (const auto& [h, n] : r.hop_histogram) {
      if (h >= 5) more += n;
    }
    const std::string paras =
        r.min_paragraphs == r.max_paragraphs
            ? std::to_string(r.max_paragraphs)
            : std::to_string(r.min_paragraphs) + "-" + std::to_string(r.max_paragraphs);
    std::snprintf(buf, sizeof buf, "%-16s %-8s %9zu %12s %6zu %6zu %6zu %6zu %7zu %9.2f\n",
                  r.dataset.c_str(), r.split.c_str(), r.size, paras.c_str(), hops(1),
                  hops(2), hops(3), hops(4), more, r.avg_hops);
    out << buf;
  }
  return out.str();
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k >= n) return idx;
  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + rng.below(n - i)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string instance_to_json(const QAInstance& instance) {
  json j = {
      {"id", instance.id},
      {"question", instance.question},
      {"references", instance.references},
      {"gold_answers", instance.gold_answers},
      {"gold_relevance", std::vector<int>(instance.gold_relevance.begin(),
                                          instance.gold_relevance.end())},
      {"hop_count", instance.hop_count},
  };
  return j.dump();
}

QAInstance instance_from_json(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed instance: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "instance must be a JSON object");
  QAInstance inst;
  try {
    inst.id = require_string(obj, "id", line_no);
    inst.question = require_string(obj, "question", line_no);
    inst.references = require(obj, "references", line_no).get<std::vector<std::string>>();
    inst.gold_answers = require(obj, "gold_answers", line_no).get<std::vector<std::string>>();
    for (int id : require(obj, "gold_relevance", line_no).get<std::vector<int>>()) {
      inst.gold_relevance.insert(id);
    }
    inst.hop_count = require(obj, "hop_count", line_no).get<int>();
  } catch (const json::exception& e) {
    throw ParseError(line_no, std::string("bad instance field: ") + e.what());
  }
  try {
    validate(inst);
  } catch (const ValidationError& e) {
    throw ParseError(line_no, e.what());
  }
  return inst;
}

std::vector<QAInstance> read_instances(std::istream& in) {
  std::vector<QAInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(instance_from_json(line, line_no));
  }
  return out;
}

}  // namespace grl
