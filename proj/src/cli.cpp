#include "grl/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "grl/error.hpp"
#include "grl/ingest.hpp"
#include "grl/judge.hpp"
#include "grl/metrics.hpp"

namespace grl {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

// Non-blank lines with their 1-based numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.emplace_back(n, line);
  }
  return lines;
}

json parse_json_line(const std::string& line, std::size_t line_no) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ParseError(line_no, "record must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed record: ") + e.what());
  }
}

std::string string_field(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(line_no, std::string("missing field: ") + key);
  if (!it->is_string()) throw ParseError(line_no, std::string("field ") + key + " must be a string");
  return it->get<std::string>();
}

std::map<std::string, QAInstance> load_instances_by_id(const std::string& path) {
  std::map<std::string, QAInstance> out;
  for (const auto& [n, line] : read_lines(path)) {
    auto inst = instance_from_json(line, n);
    const std::string id = inst.id;
    if (!out.emplace(id, std::move(inst)).second) {
      throw ParseError(n, "duplicate instance id: " + id);
    }
  }
  return out;
}

std::string list_ids(const std::vector<std::string>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size() && i < 10; ++i) s += (i ? ", " : "") + ids[i];
  if (ids.size() > 10) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string input;
  std::string output;
  std::string schema = "auto";
  std::size_t sample = 0;  // 0 keeps every record
  std::uint64_t seed = 0;
  std::string dataset;
  std::string split;
  std::string summary_path;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const Schema schema = parse_schema(a.schema);
  const auto lines = read_lines(a.input);
  std::vector<QAInstance> all;
  all.reserve(lines.size());
  for (const auto& [n, line] : lines) {
    const RawRecord rec = parse_record(line, schema, n);
    try {
      all.push_back(to_instance(rec));
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(n, e.what());
    }
  }
  std::vector<QAInstance> kept;
  if (a.sample == 0) {
    kept = std::move(all);
  } else {
    for (std::size_t i :
         sample_indices(all.size(), a.sample, substream_seed(a.seed, "ingest-sample"))) {
      kept.push_back(all[i]);
    }
  }
  auto file = open_output(a.output);
  for (const auto& inst : kept) file << instance_to_json(inst) << '\n';
  if (!file) throw IoError("write failed: " + a.output);

  const std::string dataset = a.dataset.empty()
                                  ? std::filesystem::path(a.input).stem().string()
                                  : a.dataset;
  const auto summary = summarize(kept, dataset, a.split.empty() ? "-" : a.split);
  out << format_summary_table({summary});
  json hist = json::object();
  for (const auto& [h, n] : summary.hop_histogram) hist[std::to_string(h)] = n;
  json j = {{"dataset", summary.dataset},       {"split", summary.split},
            {"size", summary.size},             {"min_paragraphs", summary.min_paragraphs},
            {"max_paragraphs", summary.max_paragraphs}, {"hop_histogram", hist},
            {"avg_hops", summary.avg_hops}};
  out << j.dump() << '\n';
  if (!a.summary_path.empty()) {
    auto sf = open_output(a.summary_path);
    sf << j.dump() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- train

int cmd_train(const std::string& config_path, std::ostream& out) {
  auto in = open_input(config_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  const RunConfig cfg = parse_run_config(j);
  const TrainLog log = train(cfg.train, cfg.seed);

  {
    auto file = open_output(cfg.log_path);
    write_train_log(file, cfg, log);
    if (!file) throw IoError("write failed: " + cfg.log_path);
  }
  {
    auto file = open_output(cfg.policy_path);
    file << to_json(log.policy).dump() << '\n';
    if (!file) throw IoError("write failed: " + cfg.policy_path);
  }

  const auto heldout = gen_dataset(cfg.seed, "eval", cfg.train.env.n_eval, cfg.train.env);
  const auto metrics = evaluate_policy(log.policy, heldout, EvalMode::greedy, cfg.train.reward);
  double max_kl = 0.0;
  for (const auto& r : log.records) max_kl = std::max(max_kl, r.mean_kl);
  out << "steps " << log.records.size() << "  held-out greedy: EM " << fixed(metrics.em)
      << "  F1 " << fixed(metrics.f1) << "  format " << fixed(metrics.format_rate)
      << "  relevance " << fixed(metrics.relevance_full_rate) << "  max mean-KL "
      << fixed(max_kl) << '\n';
  json summary = {{"type", "summary"}, {"heldout", to_json(metrics)},
                  {"max_mean_kl", max_kl}, {"log_path", cfg.log_path},
                  {"policy_path", cfg.policy_path}};
  out << summary.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- score

int cmd_score(const std::string& responses_path, const std::string& instances_path,
              const std::string& report_path, std::ostream& out) {
  const auto instances = load_instances_by_id(instances_path);
  struct Row {
    std::string id;
    RewardBreakdown b;
  };
  std::vector<Row> rows;
  std::vector<std::string> unmatched;
  std::map<std::string, bool> seen;
  for (const auto& [n, line] : read_lines(responses_path)) {
    const json j = parse_json_line(line, n);
    const std::string id = string_field(j, "id", n);
    const std::string response = string_field(j, "response", n);
    auto it = instances.find(id);
    if (it == instances.end()) {
      unmatched.push_back(id);
      continue;
    }
    seen[id] = true;
    const auto resp =
        parse_response(response, static_cast<int>(it->second.references.size()));
    rows.push_back({id, total_reward(it->second, resp)});
  }
  for (const auto& [id, inst] : instances) {
    if (!seen.count(id)) unmatched.push_back(id);
  }
  if (!unmatched.empty()) throw ValidationError("unmatched ids: " + list_ids(unmatched));
  if (rows.empty()) throw ValidationError("no responses");

  double total = 0, format = 0, accuracy = 0, full = 0, partial = 0, none = 0;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %6s %8s %9s %5s %6s\n", "id", "format", "accuracy",
                "relevance", "bonus", "total");
  out << buf;
  json per_id = json::array();
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-24s %6.0f %8.0f %9.1f %5.0f %6.1f\n", r.id.c_str(),
                  r.b.format, r.b.accuracy, r.b.relevance, r.b.bonus, r.b.total);
    out << buf;
    total += r.b.total;
    format += r.b.format;
    accuracy += r.b.accuracy;
    full += r.b.relevance == 1.0;
    partial += r.b.relevance == 0.5;
    none += r.b.relevance == 0.0;
    per_id.push_back({{"id", r.id},
                      {"format", r.b.format},
                      {"accuracy", r.b.accuracy},
                      {"relevance", r.b.relevance},
                      {"bonus", r.b.bonus},
                      {"total", r.b.total}});
  }
  const double n = static_cast<double>(rows.size());
  json agg = {{"n", rows.size()},
              {"mean_total", total / n},
              {"format_rate", format / n},
              {"accuracy_rate", accuracy / n},
              {"relevance_full_rate", full / n},
              {"relevance_partial_rate", partial / n},
              {"relevance_none_rate", none / n}};
  out << "mean total " << fixed(total / n) << "  format " << fixed(format / n)
      << "  relevance full/partial/none " << fixed(full / n) << "/" << fixed(partial / n)
      << "/" << fixed(none / n) << '\n';
  out << agg.dump() << '\n';
  if (!report_path.empty()) {
    auto file = open_output(report_path);
    file << json{{"per_id", per_id}, {"aggregate", agg}}.dump(2) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string predictions;
  std::string instances;
  std::string metrics = "em,f1";
  bool structured = false;
  std::string judge_url;
  LiveJudgeSettings judge;
  std::string report_path;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  bool want_em = false, want_f1 = false, want_lj = false;
  {
    std::stringstream ss(a.metrics);
    std::string m;
    while (std::getline(ss, m, ',')) {
      if (m == "em") want_em = true;
      else if (m == "f1") want_f1 = true;
      else if (m == "lj") want_lj = true;
      else if (!m.empty()) throw ValidationError("unknown metric: " + m);
    }
  }
  std::map<std::string, QAInstance> instances;
  if (!a.instances.empty()) instances = load_instances_by_id(a.instances);

  struct Item {
    std::string id;
    std::string prediction;  // text scored by EM/F1
    std::string response;    // text shown to the judge
    std::vector<std::string> golds;
  };
  std::vector<Item> items;
  std::vector<std::string> unmatched;
  for (const auto& [n, line] : read_lines(a.predictions)) {
    const json j = parse_json_line(line, n);
    Item it;
    it.id = string_field(j, "id", n);
    it.response = string_field(j, "prediction", n);
    it.prediction = it.response;
    if (auto g = j.find("golds"); g != j.end()) {
      if (!g->is_array() || g->empty()) throw ParseError(n, "golds must be a nonempty list");
      for (const auto& v : *g) {
        if (!v.is_string()) throw ParseError(n, "golds must be strings");
        it.golds.push_back(v.get<std::string>());
      }
    } else if (auto inst = instances.find(it.id); inst != instances.end()) {
      it.golds = inst->second.gold_answers;
    } else {
      unmatched.push_back(it.id);
      continue;
    }
    if (a.structured) it.prediction = parse_response(it.response, 1).answer;
    items.push_back(std::move(it));
  }
  if (!unmatched.empty()) throw ValidationError("unmatched ids: " + list_ids(unmatched));
  if (items.empty()) throw ValidationError("no predictions");

  double em = 0.0, f1 = 0.0;
  for (const auto& it : items) {
    if (want_em) em += exact_match(it.prediction, it.golds);
    if (want_f1) f1 += f1_score(it.prediction, it.golds);
  }
  const double n = static_cast<double>(items.size());

  json report = {{"n", items.size()}, {"complete", true}};
  if (want_em) report["em"] = em / n;
  if (want_f1) report["f1"] = f1 / n;

  bool complete = true;
  if (want_lj) {
    std::unique_ptr<JudgeClient> client;
    int workers = 1;
    if (a.judge_url.empty()) {
      client = std::make_unique<StubJudgeClient>();
    } else {
      LiveJudgeSettings s = a.judge;
      s.base_url = a.judge_url;
      workers = s.max_in_flight;
      client = std::make_unique<LiveJudgeClient>(s);
    }
    std::vector<std::optional<Verdict>> verdicts(items.size());
    std::vector<std::string> errors(items.size());
    std::map<std::pair<std::vector<std::string>, std::string>, Verdict> memo;
    std::mutex memo_mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < items.size(); i = next++) {
        const auto key = std::make_pair(items[i].golds, items[i].response);
        {
          std::lock_guard lock(memo_mu);
          if (auto m = memo.find(key); m != memo.end()) {
            verdicts[i] = m->second;
            continue;
          }
        }
        try {
          const auto v = judge(items[i].golds, items[i].response, *client);
          verdicts[i] = v.verdict;
          std::lock_guard lock(memo_mu);
          memo.emplace(key, v.verdict);
        } catch (const Error& e) {
          errors[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < workers && t < static_cast<int>(items.size()); ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::size_t judged = 0, yes = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (verdicts[i]) {
        ++judged;
        yes += *verdicts[i] == Verdict::yes;
      } else {
        err << "judge failed for " << items[i].id << ": " << errors[i] << '\n';
      }
    }
    complete = judged == items.size();
    report["lj"] = judged ? static_cast<double>(yes) / static_cast<double>(judged) : 0.0;
    report["lj_judged"] = judged;
    report["lj_source"] = a.judge_url.empty() ? "stub" : "live";
    report["complete"] = complete;
  }

  out << "n " << items.size();
  if (want_em) out << "  EM " << fixed(report["em"].get<double>());
  if (want_f1) out << "  F1 " << fixed(report["f1"].get<double>());
  if (want_lj) out << "  LJ " << fixed(report["lj"].get<double>());
  if (!complete) out << "  (incomplete)";
  out << '\n' << report.dump() << '\n';
  if (!a.report_path.empty()) {
    auto file = open_output(a.report_path);
    file << report.dump(2) << '\n';
  }
  return complete ? kExitOk : kExitIo;
}

// ---------------------------------------------------------------- toy-gen

struct ToyGenArgs {
  std::uint64_t seed = 0;
  int count = 8;
  int n_refs = 10;
  int n_hops = 2;
  std::string output;
  std::string responses;
  std::string slot = "correct";
};

int cmd_toy_gen(const ToyGenArgs& a, std::ostream& out) {
  EnvConfig env;
  env.n_refs = a.n_refs;
  env.n_hops = a.n_hops;
  const auto tasks = gen_dataset(a.seed, "toy-gen", a.count, env);
  auto file = open_output(a.output);
  for (const auto& t : tasks) file << instance_to_json(t.instance) << '\n';
  if (!a.responses.empty()) {
    auto rf = open_output(a.responses);
    for (const auto& t : tasks) {
      std::size_t m = t.candidates.correct_index;
      if (a.slot != "correct") {
        m = static_cast<std::size_t>(std::stoul(a.slot));
        if (m >= t.candidates.texts.size()) throw ValidationError("slot out of range");
      }
      rf << json{{"id", t.instance.id}, {"response", t.candidates.texts[m]}}.dump() << '\n';
    }
  }
  out << "wrote " << tasks.size() << " instances to " << a.output << '\n';
  return kExitOk;
}

// Keys accepted in a train config, beyond the required three.
const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "seed", "steps", "log_path", "policy_path", "preset", "group_size", "lr",
      "batch_size", "temperature", "beta", "epsilon", "mu", "kl_mode", "clip_form",
      "std_guard", "accuracy_reward", "reward_weights", "bonus_value", "env", "init",
      "decoy_logit", "param_bound", "threads"};
  return keys;
}

template <typename T>
void read_opt(const json& j, const char* key, T& dst) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      dst = it->get<T>();
    } catch (const json::exception&) {
      throw ValidationError(std::string("config key ") + key + " has the wrong type");
    }
  }
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto& known = known_config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError("unknown config key: " + key);
    }
  }
  for (const char* key : {"seed", "steps", "log_path"}) {
    if (!j.contains(key)) throw ValidationError(std::string("missing config key: ") + key);
  }
  RunConfig cfg;
  read_opt(j, "preset", cfg.preset);
  if (cfg.preset == "large-model") {
    cfg.train = TrainConfig::large_model_preset();
  } else if (cfg.preset != "toy") {
    throw ValidationError("unknown preset: " + cfg.preset);
  }
  TrainConfig& t = cfg.train;
  read_opt(j, "seed", cfg.seed);
  read_opt(j, "steps", t.steps);
  read_opt(j, "log_path", cfg.log_path);
  cfg.policy_path = cfg.log_path + ".policy.json";
  read_opt(j, "policy_path", cfg.policy_path);
  read_opt(j, "group_size", t.group_size);
  read_opt(j, "lr", t.lr);
  read_opt(j, "batch_size", t.batch_size);
  read_opt(j, "temperature", t.temperature);
  read_opt(j, "beta", t.beta);
  read_opt(j, "epsilon", t.epsilon);
  read_opt(j, "mu", t.mu);
  read_opt(j, "std_guard", t.std_guard);
  read_opt(j, "decoy_logit", t.decoy_logit);
  read_opt(j, "param_bound", t.param_bound);
  read_opt(j, "threads", t.threads);
  read_opt(j, "bonus_value", t.reward.bonus_value);
  std::string s;
  if (j.contains("kl_mode")) {
    read_opt(j, "kl_mode", s);
    t.kl_mode = parse_kl_mode(s);
  }
  if (j.contains("clip_form")) {
    read_opt(j, "clip_form", s);
    t.clip_form = parse_clip_form(s);
  }
  if (j.contains("accuracy_reward")) {
    read_opt(j, "accuracy_reward", s);
    t.reward.accuracy_mode = parse_accuracy_mode(s);
  }
  if (j.contains("init")) {
    read_opt(j, "init", s);
    t.init = parse_init_mode(s);
  }
  if (auto w = j.find("reward_weights"); w != j.end()) {
    if (!w->is_object()) throw ValidationError("reward_weights must be an object");
    for (const auto& [key, value] : w->items()) {
      if (key != "format" && key != "accuracy" && key != "relevance" && key != "bonus") {
        throw ValidationError("unknown config key: reward_weights." + key);
      }
    }
    read_opt(*w, "format", t.reward.weights.format);
    read_opt(*w, "accuracy", t.reward.weights.accuracy);
    read_opt(*w, "relevance", t.reward.weights.relevance);
    read_opt(*w, "bonus", t.reward.weights.bonus);
  }
  if (auto e = j.find("env"); e != j.end()) {
    if (!e->is_object()) throw ValidationError("env must be an object");
    for (const auto& [key, value] : e->items()) {
      if (key != "n_refs" && key != "n_hops" && key != "n_contexts" && key != "n_train" &&
          key != "n_eval") {
        throw ValidationError("unknown config key: env." + key);
      }
    }
    read_opt(*e, "n_refs", t.env.n_refs);
    read_opt(*e, "n_hops", t.env.n_hops);
    read_opt(*e, "n_contexts", t.env.n_contexts);
    read_opt(*e, "n_train", t.env.n_train);
    read_opt(*e, "n_eval", t.env.n_eval);
  }
  if (cfg.log_path.empty()) throw ValidationError("log_path must not be empty");
  validate(t);
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  return {
      {"seed", cfg.seed},
      {"steps", t.steps},
      {"log_path", cfg.log_path},
      {"policy_path", cfg.policy_path},
      {"preset", cfg.preset},
      {"group_size", t.group_size},
      {"lr", t.lr},
      {"batch_size", t.batch_size},
      {"temperature", t.temperature},
      {"beta", t.beta},
      {"epsilon", t.epsilon},
      {"mu", t.mu},
      {"kl_mode", to_string(t.kl_mode)},
      {"clip_form", to_string(t.clip_form)},
      {"std_guard", t.std_guard},
      {"accuracy_reward", to_string(t.reward.accuracy_mode)},
      {"reward_weights",
       {{"format", t.reward.weights.format},
        {"accuracy", t.reward.weights.accuracy},
        {"relevance", t.reward.weights.relevance},
        {"bonus", t.reward.weights.bonus}}},
      {"bonus_value", t.reward.bonus_value},
      {"env",
       {{"n_refs", t.env.n_refs},
        {"n_hops", t.env.n_hops},
        {"n_contexts", t.env.n_contexts},
        {"n_train", t.env.n_train},
        {"n_eval", t.env.n_eval}}},
      {"init", to_string(t.init)},
      {"decoy_logit", t.decoy_logit},
      {"param_bound", t.param_bound},
      {"threads", t.threads},
  };
}

json to_json(const PolicySnapshot& policy) {
  std::vector<double> theta(policy.theta().begin(), policy.theta().end());
  return {{"n_features", policy.n_features()},
          {"n_candidates", policy.n_candidates()},
          {"temperature", policy.temperature()},
          {"seed", policy.seed()},
          {"theta", theta}};
}

PolicySnapshot policy_from_json(const json& j) {
  try {
    PolicySnapshot p(j.at("n_features").get<std::size_t>(),
                     j.at("n_candidates").get<std::size_t>(),
                     j.at("temperature").get<double>(), j.at("seed").get<std::uint64_t>());
    const auto theta = j.at("theta").get<std::vector<double>>();
    if (theta.size() != p.theta().size()) throw ValidationError("policy theta has wrong size");
    std::copy(theta.begin(), theta.end(), p.theta().begin());
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad policy file: ") + e.what());
  }
}

json to_json(const StepRecord& r) {
  return {{"type", "step"},          {"step", r.step},
          {"mean_reward", r.mean_reward}, {"format_rate", r.format_rate},
          {"accuracy_rate", r.accuracy_rate}, {"mean_kl", r.mean_kl},
          {"max_kl", r.max_kl},      {"objective", r.objective}};
}

json to_json(const PolicyMetrics& m) {
  return {{"n", m.n},
          {"em", m.em},
          {"f1", m.f1},
          {"format_rate", m.format_rate},
          {"relevance_full_rate", m.relevance_full_rate},
          {"mean_reward", m.mean_reward}};
}

void write_train_log(std::ostream& out, const RunConfig& cfg, const TrainLog& log) {
  out << json{{"type", "header"}, {"config", to_json(cfg)}}.dump() << '\n';
  for (const auto& r : log.records) out << to_json(r).dump() << '\n';
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured-response RL kernel: ingest, train, score, eval"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert dataset records to instances");
  ingest_cmd->add_option("--input", ingest.input, "Line-delimited dataset records")->required();
  ingest_cmd->add_option("--output", ingest.output, "Canonical instance file")->required();
  ingest_cmd->add_option("--schema", ingest.schema, "auto|hotpotqa|2wiki|musique");
  ingest_cmd->add_option("--sample", ingest.sample, "Keep a seeded uniform subset");
  ingest_cmd->add_option("--seed", ingest.seed, "Master seed");
  ingest_cmd->add_option("--dataset", ingest.dataset, "Dataset name for the summary");
  ingest_cmd->add_option("--split", ingest.split, "Split name for the summary");
  ingest_cmd->add_option("--summary", ingest.summary_path, "Write the summary as JSON");

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "Train the toy policy with GRPO");
  train_cmd->add_option("--config", config_path, "Run config (JSON)")->required();

  std::string responses, instances, score_report;
  auto* score_cmd = app.add_subcommand("score", "Reward a file of structured responses");
  score_cmd->add_option("--responses", responses, "{id, response} per line")->required();
  score_cmd->add_option("--instances", instances, "Canonical instance file")->required();
  score_cmd->add_option("--report", score_report, "Write the full report as JSON");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "EM / F1 / LLM-judge evaluation");
  eval_cmd->add_option("--predictions", eval.predictions, "{id, prediction[, golds]} per line")
      ->required();
  eval_cmd->add_option("--instances", eval.instances, "Canonical instance file");
  eval_cmd->add_option("--metrics", eval.metrics, "Comma list of em,f1,lj");
  eval_cmd->add_flag("--structured", eval.structured,
                     "Score the <answer> section of each prediction");
  eval_cmd->add_option("--judge-url", eval.judge_url, "Chat-completions base URL (stub if unset)");
  eval_cmd->add_option("--judge-path", eval.judge.path, "Request path");
  eval_cmd->add_option("--judge-model", eval.judge.model, "Judge model name");
  eval_cmd->add_option("--judge-key-env", eval.judge.api_key_env, "Env var holding the API key");
  eval_cmd->add_option("--judge-timeout", eval.judge.timeout_seconds, "Seconds per request");
  eval_cmd->add_option("--judge-attempts", eval.judge.max_attempts, "Attempts per request");
  eval_cmd->add_option("--judge-backoff-ms", eval.judge.retry_backoff_ms, "Retry backoff");
  eval_cmd->add_option("--judge-concurrency", eval.judge.max_in_flight, "Requests in flight");
  eval_cmd->add_option("--report", eval.report_path, "Write the report as JSON");

  ToyGenArgs toy;
  auto* toy_cmd = app.add_subcommand("toy-gen", "Write synthetic toy instances");
  toy_cmd->add_option("--output", toy.output, "Instance file")->required();
  toy_cmd->add_option("--responses", toy.responses, "Also write one candidate reply per id");
  toy_cmd->add_option("--slot", toy.slot, "'correct' or a candidate slot index");
  toy_cmd->add_option("--seed", toy.seed, "Master seed");
  toy_cmd->add_option("--count", toy.count, "Number of instances");
  toy_cmd->add_option("--n-refs", toy.n_refs, "References per instance");
  toy_cmd->add_option("--n-hops", toy.n_hops, "Hops per instance");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out);
    if (*train_cmd) return cmd_train(config_path, out);
    if (*score_cmd) return cmd_score(responses, instances, score_report, out);
    if (*eval_cmd) return cmd_eval(eval, out, err);
    if (*toy_cmd) return cmd_toy_gen(toy, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace grl
