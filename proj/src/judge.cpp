#include "grl/judge.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

#include "grl/metrics.hpp"

namespace grl {
namespace {

constexpr std::string_view kJudgeHead =
    "*************Consider a knowledge Q&A RAG task to test the capability of "
    "a testing model, the correct answer list is:*************\n";
constexpr std::string_view kJudgeMiddle =
    "\n*************Here is the model's response:*************\n";
constexpr std::string_view kJudgeTail =
    "\n*************Please check if the model's answer is correct. As long as "
    "the model's answer hits any item (or synonym) in the correct answer list, "
    "it can be considered correct. You only need to answer \"yes\" or "
    "\"no\".*************";

// Release the in-flight slot on every exit path.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

std::string StubJudgeClient::complete(const JudgeRequest& request) {
  const std::string response = normalize_answer(request.model_response);
  for (const auto& g : request.golds) {
    const std::string gold = normalize_answer(g);
    if (!gold.empty() && response.find(gold) != std::string::npos) return "yes";
  }
  return "no";
}

LiveJudgeClient::LiveJudgeClient(LiveJudgeSettings settings)
    : settings_(std::move(settings)) {
  if (settings_.max_attempts < 1) {
    throw ValidationError("judge: max_attempts must be >= 1");
  }
  if (settings_.max_in_flight < 1) {
    throw ValidationError("judge: max_in_flight must be >= 1");
  }
  if (!settings_.api_key_env.empty()) {
    if (const char* key = std::getenv(settings_.api_key_env.c_str())) {
      api_key_ = key;
    }
  }
  slots_ = std::make_unique<std::counting_semaphore<>>(settings_.max_in_flight);
}

std::string LiveJudgeClient::complete(const JudgeRequest& request) {
  nlohmann::json body = {
      {"model", settings_.model},
      {"temperature", request.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"},
                                           {"content", request.prompt}}})},
  };
  const std::string payload = body.dump();

  SlotGuard slot(*slots_);
  std::string last_error = "no attempt made";
  for (int attempt = 1; attempt <= settings_.max_attempts; ++attempt) {
    if (attempt > 1 && settings_.retry_backoff_ms > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(settings_.retry_backoff_ms * (attempt - 1)));
    }
    httplib::Client cli(settings_.base_url);
    if (!cli.is_valid()) {
      throw JudgeTransportError(attempt, "judge: invalid base url '" +
                                             settings_.base_url + "'");
    }
    const auto timeout = std::chrono::duration<double>(settings_.timeout_seconds);
    cli.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_read_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_write_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    httplib::Headers headers;
    if (!api_key_.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }
    auto res = cli.Post(settings_.path, headers, payload, "application/json");
    if (!res) {
      last_error = "judge: request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "judge: HTTP " + std::to_string(res->status);
      if (retryable_status(res->status)) continue;
      throw JudgeTransportError(attempt, last_error);
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw JudgeTransportError(attempt,
                                std::string("judge: malformed reply body: ") + e.what());
    }
  }
  throw JudgeTransportError(settings_.max_attempts, last_error);
}

std::string render_gold_list(const std::vector<std::string>& golds) {
  std::string out = "[";
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (i > 0) out += ", ";
    out += golds[i];
  }
  out += "]";
  return out;
}

std::string render_judge_prompt(const std::vector<std::string>& golds,
                                std::string_view model_response) {
  std::string out(kJudgeHead);
  out += render_gold_list(golds);
  out += kJudgeMiddle;
  out += model_response;
  out += kJudgeTail;
  return out;
}

Verdict parse_verdict(std::string_view reply) {
  std::size_t i = 0;
  auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
  while (i < reply.size() && !alpha(reply[i])) ++i;
  std::string token;
  while (i < reply.size() && alpha(reply[i])) {
    token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(reply[i]))));
    ++i;
  }
  if (token == "yes") return Verdict::yes;
  if (token == "no") return Verdict::no;
  throw AmbiguousVerdict(std::string(reply));
}

JudgeVerdict judge(const std::vector<std::string>& golds,
                   std::string_view model_response, JudgeClient& client) {
  JudgeRequest request;
  request.golds = golds;
  request.model_response = std::string(model_response);
  request.prompt = render_judge_prompt(golds, model_response);
  request.temperature = 0.0;
  JudgeVerdict v;
  v.raw_reply = client.complete(request);
  v.verdict = parse_verdict(v.raw_reply);
  v.source = client.source();
  return v;
}

}  // namespace grl
