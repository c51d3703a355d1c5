#pragma once

#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "grl/error.hpp"

namespace grl {

enum class Verdict { yes, no };
enum class VerdictSource { live, stub };

struct JudgeVerdict {
  Verdict verdict = Verdict::no;
  std::string raw_reply;
  VerdictSource source = VerdictSource::stub;
};

// Transport failure after all attempts. Retryable by the caller.
class JudgeTransportError : public IoError {
 public:
  JudgeTransportError(int attempts, const std::string& what)
      : IoError(what + " (after " + std::to_string(attempts) + " attempt" +
                (attempts == 1 ? "" : "s") + ")"),
        attempts_(attempts) {}

  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

// The reply did not start with "yes" or "no".
class AmbiguousVerdict : public ValidationError {
 public:
  explicit AmbiguousVerdict(const std::string& reply)
      : ValidationError("ambiguous verdict: '" + reply + "'") {}
};

struct JudgeRequest {
  std::vector<std::string> golds;
  std::string model_response;
  std::string prompt;  // rendered judge template
  double temperature = 0.0;
};

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  // Returns the raw reply text.
  virtual std::string complete(const JudgeRequest& request) = 0;
  virtual VerdictSource source() const = 0;
};

// Offline judge: replies "yes" iff some nonempty normalized gold occurs as a
// substring of the normalized response.
class StubJudgeClient final : public JudgeClient {
 public:
  std::string complete(const JudgeRequest& request) override;
  VerdictSource source() const override { return VerdictSource::stub; }
};

struct LiveJudgeSettings {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o-2024-11-20";
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_seconds = 30.0;
  int max_attempts = 3;
  int retry_backoff_ms = 500;
  int max_in_flight = 4;
};

// Chat-completions client. Thread-safe; at most `max_in_flight` requests are
// outstanding at once across all calling threads.
class LiveJudgeClient final : public JudgeClient {
 public:
  explicit LiveJudgeClient(LiveJudgeSettings settings);

  std::string complete(const JudgeRequest& request) override;
  VerdictSource source() const override { return VerdictSource::live; }

  const LiveJudgeSettings& settings() const { return settings_; }

 private:
  LiveJudgeSettings settings_;
  std::string api_key_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

// "[a, b, c]"
std::string render_gold_list(const std::vector<std::string>& golds);

std::string render_judge_prompt(const std::vector<std::string>& golds,
                                std::string_view model_response);

// First alphabetic token, lowercased, must be "yes" or "no".
Verdict parse_verdict(std::string_view reply);

JudgeVerdict judge(const std::vector<std::string>& golds,
                   std::string_view model_response, JudgeClient& client);

}  // namespace grl
