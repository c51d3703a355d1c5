#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "grl/toy_rlhf.hpp"

namespace grl {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Parsed `train` config file. Keys "seed", "steps" and "log_path" are
// required; everything else defaults.
struct RunConfig {
  TrainConfig train;
  std::uint64_t seed = 0;
  std::string log_path;
  std::string policy_path;
  std::string preset = "toy";
};

RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

nlohmann::json to_json(const PolicySnapshot& policy);
PolicySnapshot policy_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StepRecord& rec);
nlohmann::json to_json(const PolicyMetrics& m);

// Header line (resolved config) followed by one line per step.
void write_train_log(std::ostream& out, const RunConfig& cfg, const TrainLog& log);

// Entry point behind the `grl` binary. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace grl
