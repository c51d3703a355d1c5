#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "grl/cli.hpp"
#include "grl/error.hpp"
#include "grl/ingest.hpp"
#include "json.hpp"

using namespace grl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("grl_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string fixture(const std::string& name) { return std::string(GRL_FIXTURE_DIR) + "/" + name; }

json last_json_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty() && line.front() == '{') last = line;
  return json::parse(last);
}

}  // namespace

TEST_CASE("ingest summarizes the fixture") {
  TempDir d;
  const auto r = cli({"ingest", "--input", fixture("hotpot_small.jsonl"), "--output", d / "inst.jsonl",
                      "--dataset", "hotpot", "--split", "dev"});
  REQUIRE(r.code == kExitOk);
  const auto s = last_json_line(r.out);
  CHECK(s["size"] == 3);
  CHECK(s["hop_histogram"]["2"] == 2);
  CHECK(s["hop_histogram"]["3"] == 1);
  std::ifstream in(d / "inst.jsonl");
  CHECK(read_instances(in).size() == 3);
}

TEST_CASE("ingest sampling is deterministic") {
  TempDir d;
  REQUIRE(cli({"ingest", "--input", fixture("twowiki_small.jsonl"), "--output", d / "a", "--sample", "2",
               "--seed", "5", "--schema", "2wiki"}).code == 0);
  REQUIRE(cli({"ingest", "--input", fixture("twowiki_small.jsonl"), "--output", d / "b", "--sample", "2",
               "--seed", "5", "--schema", "2wiki"}).code == 0);
  CHECK(slurp(d / "a") == slurp(d / "b"));
  std::ifstream in(d / "a");
  CHECK(read_instances(in).size() == 2);
}

TEST_CASE("ingest error exit codes") {
  TempDir d;
  CHECK(cli({"ingest", "--input", d / "missing.jsonl", "--output", d / "o"}).code == kExitIo);
  write(d / "bad.jsonl", "{\"_id\": \"x\"}\n");
  const auto r = cli({"ingest", "--input", d / "bad.jsonl", "--output", d / "o"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("line 1") != std::string::npos);
  CHECK(r.err.find("missing field") != std::string::npos);
}

TEST_CASE("train writes identical logs for a repeated seed") {
  TempDir d;
  auto config = [&](const std::string& log) {
    return json{{"seed", 3}, {"steps", 12}, {"log_path", log}, {"batch_size", 16},
                {"env", {{"n_train", 16}, {"n_eval", 8}}}};
  };
  write(d / "a.json", config(d / "a.log").dump());
  write(d / "b.json", config(d / "b.log").dump());
  REQUIRE(cli({"train", "--config", d / "a.json"}).code == 0);
  REQUIRE(cli({"train", "--config", d / "b.json"}).code == 0);
  const auto a = slurp(d / "a.log");
  const auto b = slurp(d / "b.log");
  CHECK_FALSE(a.empty());
  // headers differ only by log_path
  CHECK(a.substr(a.find('\n')) == b.substr(b.find('\n')));
  CHECK(slurp(d / "a.log.policy.json") == slurp(d / "b.log.policy.json"));

  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  CHECK(json::parse(line)["type"] == "header");
  int steps = 0;
  while (std::getline(in, line)) {
    const auto rec = json::parse(line);
    CHECK(rec.contains("mean_kl"));
    CHECK(rec.contains("objective"));
    ++steps;
  }
  CHECK(steps == 12);
}

TEST_CASE("train config errors") {
  TempDir d;
  write(d / "c.json", json{{"seed", 1}, {"log_path", d / "x.log"}}.dump());
  auto r = cli({"train", "--config", d / "c.json"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("missing config key: steps") != std::string::npos);

  write(d / "c.json", json{{"seed", 1}, {"steps", 1}, {"log_path", d / "x.log"}, {"gamma", 1}}.dump());
  r = cli({"train", "--config", d / "c.json"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("unknown config key: gamma") != std::string::npos);

  write(d / "c.json", "{ not json");
  CHECK(cli({"train", "--config", d / "c.json"}).code == kExitValidation);
  CHECK(cli({"train", "--config", d / "nope.json"}).code == kExitIo);

  write(d / "blocker", "a file, not a directory");
  write(d / "c.json", json{{"seed", 1}, {"steps", 1}, {"log_path", d / "blocker/x.log"}}.dump());
  CHECK(cli({"train", "--config", d / "c.json"}).code == kExitIo);
}

TEST_CASE("run config keys") {
  const auto cfg = parse_run_config(json{{"seed", 9},
                                         {"steps", 4},
                                         {"log_path", "l"},
                                         {"kl_mode", "unbiased"},
                                         {"group_size", 5},
                                         {"reward_weights", {{"bonus", 0.0}}},
                                         {"env", {{"n_hops", 3}}},
                                         {"init", "adversarial"}});
  CHECK(cfg.seed == 9);
  CHECK(cfg.train.kl_mode == KlMode::unbiased);
  CHECK(cfg.train.group_size == 5);
  CHECK(cfg.train.reward.weights.bonus == 0.0);
  CHECK(cfg.train.env.n_hops == 3);
  CHECK(cfg.policy_path == "l.policy.json");

  const auto big = parse_run_config(json{{"seed", 1}, {"steps", 1}, {"log_path", "l"}, {"preset", "large-model"}});
  CHECK(big.train.lr == kLargeModelLearningRate);
  CHECK_THROWS_AS(parse_run_config(json{{"seed", 1}, {"steps", 1}, {"log_path", "l"}, {"beta", "x"}}),
                  ValidationError);
}

TEST_CASE("policy json round-trip") {
  PolicySnapshot p(3, 4, 0.9, 17);
  p.at(2, 1) = -0.125;
  CHECK(policy_from_json(to_json(p)) == p);
}

TEST_CASE("score on all-correct toy replies averages 13") {
  TempDir d;
  REQUIRE(cli({"toy-gen", "--output", d / "inst.jsonl", "--responses", d / "resp.jsonl", "--count", "6",
               "--seed", "2"}).code == 0);
  const auto r = cli({"score", "--responses", d / "resp.jsonl", "--instances", d / "inst.jsonl",
                      "--report", d / "report.json"});
  REQUIRE(r.code == 0);
  const auto agg = last_json_line(r.out);
  CHECK(agg["mean_total"].get<double>() == 13.0);
  CHECK(agg["format_rate"].get<double>() == 1.0);
  CHECK(fs::exists(d / "report.json"));
}

TEST_CASE("score on malformed replies") {
  TempDir d;
  REQUIRE(cli({"toy-gen", "--output", d / "inst.jsonl", "--count", "3", "--seed", "2"}).code == 0);
  std::ifstream in(d / "inst.jsonl");
  const auto inst = read_instances(in);
  std::string resp;
  for (const auto& q : inst) resp += json{{"id", q.id}, {"response", "no tags at all"}}.dump() + "\n";
  write(d / "bad.jsonl", resp);
  auto r = cli({"score", "--responses", d / "bad.jsonl", "--instances", d / "inst.jsonl"});
  REQUIRE(r.code == 0);
  CHECK(last_json_line(r.out)["mean_total"].get<double>() == 0.0);

  // answer extracted, structure broken: only the accuracy component survives
  resp.clear();
  for (const auto& q : inst)
    resp += json{{"id", q.id}, {"response", "<answer>" + q.gold_answers[0] + "</answer>"}}.dump() + "\n";
  write(d / "acc.jsonl", resp);
  r = cli({"score", "--responses", d / "acc.jsonl", "--instances", d / "inst.jsonl"});
  REQUIRE(r.code == 0);
  const auto agg = last_json_line(r.out);
  CHECK(agg["mean_total"].get<double>() == agg["accuracy_rate"].get<double>());
  CHECK(agg["mean_total"].get<double>() == 1.0);
}

TEST_CASE("score id mismatch fails") {
  TempDir d;
  REQUIRE(cli({"toy-gen", "--output", d / "inst.jsonl", "--count", "2"}).code == 0);
  write(d / "r.jsonl", json{{"id", "nobody"}, {"response", "x"}}.dump() + "\n");
  const auto r = cli({"score", "--responses", d / "r.jsonl", "--instances", d / "inst.jsonl"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("unmatched ids") != std::string::npos);
}

TEST_CASE("eval with golds equal to predictions") {
  TempDir d;
  write(d / "p.jsonl", json{{"id", "1"}, {"prediction", "Paris"}, {"golds", {"paris"}}}.dump() + "\n" +
                           json{{"id", "2"}, {"prediction", "The Eiffel Tower"}, {"golds", {"Eiffel Tower"}}}.dump() + "\n");
  const auto r = cli({"eval", "--predictions", d / "p.jsonl", "--metrics", "em,f1"});
  REQUIRE(r.code == 0);
  const auto rep = last_json_line(r.out);
  CHECK(rep["em"].get<double>() == 1.0);
  CHECK(rep["f1"].get<double>() == 1.0);
}

TEST_CASE("eval F1 on half-overlap fixture") {
  TempDir d;
  write(d / "p.jsonl",
        json{{"id", "1"}, {"prediction", "barack obama"}, {"golds", {"obama"}}}.dump() + "\n" +
            json{{"id", "2"}, {"prediction", "in Paris, France"}, {"golds", {"Paris"}}}.dump() + "\n");
  const auto r = cli({"eval", "--predictions", d / "p.jsonl"});
  REQUIRE(r.code == 0);
  const auto rep = last_json_line(r.out);
  CHECK(rep["em"].get<double>() == 0.0);
  CHECK(rep["f1"].get<double>() == doctest::Approx((2.0 / 3.0 + 0.5) / 2));
}

TEST_CASE("eval with the stub judge") {
  TempDir d;
  write(d / "p.jsonl",
        json{{"id", "1"}, {"prediction", "I believe it is Paris."}, {"golds", {"Paris"}}}.dump() + "\n" +
            json{{"id", "2"}, {"prediction", "London"}, {"golds", {"Paris"}}}.dump() + "\n" +
            json{{"id", "3"}, {"prediction", "rome, italy"}, {"golds", {"Milan", "Rome"}}}.dump() + "\n" +
            json{{"id", "4"}, {"prediction", "no idea"}, {"golds", {"Oslo"}}}.dump() + "\n");
  const auto r = cli({"eval", "--predictions", d / "p.jsonl", "--metrics", "lj"});
  REQUIRE(r.code == 0);
  const auto rep = last_json_line(r.out);
  CHECK(rep["lj"].get<double>() == 0.5);
  CHECK(rep["complete"] == true);
}

TEST_CASE("eval against an unreachable judge reports an incomplete run") {
  TempDir d;
  write(d / "p.jsonl", json{{"id", "1"}, {"prediction", "Paris"}, {"golds", {"Paris"}}}.dump() + "\n");
  const auto r = cli({"eval", "--predictions", d / "p.jsonl", "--metrics", "em,lj", "--judge-url",
                      "http://127.0.0.1:1", "--judge-attempts", "2", "--judge-backoff-ms", "1",
                      "--judge-timeout", "1", "--report", d / "rep.json"});
  CHECK(r.code == kExitIo);
  const auto rep = json::parse(slurp(d / "rep.json"));
  CHECK(rep["complete"] == false);
  CHECK(rep["em"].get<double>() == 1.0);
}

TEST_CASE("eval on structured replies against instances") {
  TempDir d;
  REQUIRE(cli({"toy-gen", "--output", d / "inst.jsonl", "--responses", d / "resp.jsonl", "--count", "4"}).code == 0);
  std::ifstream in(d / "resp.jsonl");
  std::string preds;
  for (std::string line; std::getline(in, line);) {
    const auto j = json::parse(line);
    preds += json{{"id", j["id"]}, {"prediction", j["response"]}}.dump() + "\n";
  }
  write(d / "p.jsonl", preds);
  const auto r = cli({"eval", "--predictions", d / "p.jsonl", "--instances", d / "inst.jsonl", "--structured"});
  REQUIRE(r.code == 0);
  CHECK(last_json_line(r.out)["em"].get<double>() == 1.0);
}

TEST_CASE("usage errors") {
  CHECK(cli({}).code == kExitValidation);
  CHECK(cli({"bogus"}).code == kExitValidation);
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({"eval", "--predictions", "/nonexistent/p.jsonl"}).code == kExitIo);
  TempDir d;
  CHECK(cli({"toy-gen", "--output", d / "x", "--slot", "99", "--responses", d / "y"}).code == kExitValidation);
}
