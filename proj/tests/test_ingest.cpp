#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "grl/error.hpp"
#include "grl/ingest.hpp"
#include "json.hpp"

using namespace grl;
using nlohmann::json;

namespace {

std::vector<std::string> fixture_lines(const std::string& name) {
  std::ifstream in(std::string(GRL_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

std::vector<QAInstance> fixture_instances(const std::string& name, Schema schema) {
  std::vector<QAInstance> out;
  std::size_t n = 0;
  for (const auto& line : fixture_lines(name)) out.push_back(to_instance(parse_record(line, schema, ++n)));
  return out;
}

json hotpot_record() {
  return json{{"_id", "x1"},
              {"question", "Where?"},
              {"answer", "Paris"},
              {"context", json::array({json::array({"A", json::array({"a0.", " a1."})}),
                                       json::array({"B", json::array({"b0."})}),
                                       json::array({"C", json::array({"c0."})})})},
              {"supporting_facts", json::array({json::array({"A", 0}), json::array({"C", 0})})}};
}

}  // namespace

TEST_CASE("hotpot-style fixture with ten paragraphs") {
  const auto lines = fixture_lines("hotpot_small.jsonl");
  const auto r = parse_record(lines[0], Schema::hotpotqa, 1);
  CHECK(r.paragraphs.size() == 10);
  CHECK(r.id == "h1");
  CHECK(r.answers == std::vector<std::string>{"Paris"});
  CHECK(gold_relevance(r) == std::set<int>{2, 7});
  CHECK(hop_count(r) == 2);  // two facts share paragraph 2
}

TEST_CASE("scalar and list answers") {
  auto j = hotpot_record();
  CHECK(parse_record(j.dump()).answers == std::vector<std::string>{"Paris"});
  j["answer"] = json::array({"Paris", "paris city"});
  CHECK(parse_record(j.dump()).answers.size() == 2);
}

TEST_CASE("missing fields are named") {
  auto j = hotpot_record();
  j.erase("question");
  CHECK_THROWS_WITH_AS(parse_record(j.dump()), "missing field: question", ValidationError);
  CHECK_THROWS_AS(parse_record("{not json", Schema::hotpotqa, 4), ParseError);
  try {
    parse_record(j.dump(), Schema::hotpotqa, 7);
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
}

TEST_CASE("gold relevance maps titles to 1-based positions") {
  RawRecord r;
  for (const char* t : {"P1", "P2", "P3", "P4", "P5", "P6", "P7"}) r.paragraphs.push_back({t, {"s."}});
  r.supporting_facts = {{"P2", 0, {}}, {"P7", 1, {}}};
  CHECK(gold_relevance(r) == std::set<int>{2, 7});
  r.supporting_facts = {{"P3", 0, {}}, {"P3", 2, {}}};
  CHECK(gold_relevance(r) == std::set<int>{3});
  CHECK(hop_count(r) == 1);
  r.supporting_facts = {{"X", 0, {}}};
  CHECK_THROWS_AS(gold_relevance(r), ValidationError);
}

TEST_CASE("hop counts") {
  RawRecord r;
  for (const char* t : {"A", "B", "C", "D", "E"}) r.paragraphs.push_back({t, {"s."}});
  r.supporting_facts = {{"A", 0, {}}, {"C", 0, {}}};
  CHECK(hop_count(r) == 2);
  r.supporting_facts = {{"A", 0, {}}, {"B", 0, {}}, {"D", 0, {}}, {"E", 0, {}}};
  CHECK(hop_count(r) == 4);
}

TEST_CASE("record becomes a valid instance in source order") {
  const auto r = parse_record(hotpot_record().dump());
  const auto q = to_instance(r);
  CHECK_NOTHROW(validate(q));
  CHECK(q.references.size() == 3);
  CHECK(q.references[0] == "A: a0. a1.");
  CHECK(q.references[1] == paragraph_text(r.paragraphs[1]));
  CHECK(q.hop_count == hop_count(r));
  CHECK(q.gold_relevance == std::set<int>{1, 3});
}

TEST_CASE("musique paragraphs and aliases") {
  const auto lines = fixture_lines("musique_small.jsonl");
  const auto r = parse_record(lines[2]);  // auto-detected
  CHECK(r.paragraphs.size() == 20);
  CHECK(r.answers == std::vector<std::string>{"Oslo", "Christiania"});
  CHECK(gold_relevance(r) == std::set<int>{2, 3, 6, 9});
  CHECK(hop_count(r) == 4);
  CHECK(to_instance(r).references[0] == "4hop__3 Doc 0: Text of document 0 for 4hop__3.");
}

TEST_CASE("two-wiki layout with four-hop rows") {
  const auto lines = fixture_lines("twowiki_small.jsonl");
  const auto r = parse_record(lines[1], Schema::two_wiki, 2);
  CHECK(hop_count(r) == 4);
  CHECK(r.answers == std::vector<std::string>{"John Doe", "J. Doe"});
}

TEST_CASE("corpus of 2, 2, 3 hops averages 2.33") {
  const auto inst = fixture_instances("hotpot_small.jsonl", Schema::hotpotqa);
  const auto s = summarize(inst, "hotpot", "dev");
  CHECK(s.size == 3);
  CHECK(s.hop_histogram == std::map<int, std::size_t>{{2, 2}, {3, 1}});
  CHECK(s.avg_hops == doctest::Approx(7.0 / 3.0));
  CHECK(std::abs(s.avg_hops - 2.33) <= 0.01);
  CHECK(s.min_paragraphs == 10);
  CHECK(s.max_paragraphs == 10);
  const auto table = format_summary_table({s});
  CHECK(table.find("2.33") != std::string::npos);
  CHECK(table.find("Avg. Hops") != std::string::npos);
}

TEST_CASE("fixture histograms") {
  const auto w = summarize(fixture_instances("twowiki_small.jsonl", Schema::two_wiki));
  CHECK(w.hop_histogram == std::map<int, std::size_t>{{2, 2}, {4, 2}});
  CHECK(w.avg_hops == 3.0);
  const auto m = summarize(fixture_instances("musique_small.jsonl", Schema::musique));
  CHECK(m.hop_histogram == std::map<int, std::size_t>{{2, 1}, {3, 1}, {4, 1}});
  CHECK(m.avg_hops == 3.0);
  CHECK(m.max_paragraphs == 20);
}

TEST_CASE("seeded subsample") {
  const auto a = sample_indices(100, 10, 42);
  CHECK(a == sample_indices(100, 10, 42));
  CHECK(a.size() == 10);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 10);
  CHECK(a != sample_indices(100, 10, 43));
  CHECK(sample_indices(5, 9, 1) == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("instance json round-trip") {
  const auto q = to_instance(parse_record(hotpot_record().dump()));
  const auto line = instance_to_json(q);
  const auto back = instance_from_json(line);
  CHECK(back.id == q.id);
  CHECK(back.references == q.references);
  CHECK(back.gold_relevance == q.gold_relevance);
  CHECK(back.hop_count == q.hop_count);
  std::istringstream in(line + "\n" + line + "\n");
  CHECK(read_instances(in).size() == 2);
  CHECK_THROWS_AS(instance_from_json("{\"id\":\"x\"}", 3), ValidationError);
}

TEST_CASE("schema names") {
  CHECK(parse_schema("2wiki") == Schema::two_wiki);
  CHECK(to_string(Schema::musique) == "musique");
  CHECK_THROWS_AS(parse_schema("squad"), ValidationError);
}
