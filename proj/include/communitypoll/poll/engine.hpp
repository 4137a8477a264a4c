#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "communitypoll/impact/context.hpp"
#include "communitypoll/poll/provider.hpp"
#include "communitypoll/survey/answers.hpp"
#include "communitypoll/survey/questionnaire.hpp"
#include "communitypoll/synth/agents.hpp"

namespace communitypoll::poll {

enum class ParseStatus { kOk, kFailed };

struct SurveyResponse {
  std::string agent_id;
  std::map<std::string, survey::NormalizedAnswer> answers;
  ParseStatus parse_status = ParseStatus::kFailed;
  int retry_count = 0;
  std::string error;  // last failure reason when parse_status is failed
};

struct RunPollConfig {
  std::string model_name = "mock-1";
  std::size_t batch_size = 200;
  int max_retries = 2;       // per-agent re-asks for invalid output
  int max_inflight = 4;      // outstanding batch jobs
  int provider_attempts = 5; // submit retries on provider failure
  double backoff_base_ms = 50.0;
  double backoff_jitter = 0.25;
  std::uint64_t seed = 0;    // jitter stream only; answer determinism is the provider's
  std::optional<std::filesystem::path> run_dir;  // persistence root, optional in tests
};

struct PollStats {
  std::size_t total = 0;
  std::size_t ok = 0;
  std::size_t failed = 0;
  long long input_tokens = 0;
  long long output_tokens = 0;
  double cost_usd = 0.0;
};

// Extracts the first JSON object from the text (code fences and surrounding
// prose are ignored), maps keys to question ids and validates every answer.
// Throws ParseError when the object is absent, a key is unknown, an answer is
// invalid, or any of the 13 questions is missing.
std::map<std::string, survey::NormalizedAnswer> parse_response(const std::string& raw_text,
                                                               const survey::Questionnaire& q);

// Polls every agent through the provider in batches, retrying invalid or
// failed responses up to max_retries with the same prompt. Responses that
// exhaust retries come back with parse_status=failed and are excluded from
// aggregation downstream. Raw payloads are persisted verbatim before parsing.
std::vector<SurveyResponse> run_poll(const std::vector<synth::AgentProfile>& agents,
                                     const impact::RegionalContext& context,
                                     const survey::Questionnaire& q, Provider& provider,
                                     const RunPollConfig& config, PollStats* stats = nullptr);

// Rebuilds SurveyResponses from a previously persisted raw results file; the
// outcome matches the original run exactly.
std::vector<SurveyResponse> reprocess_raw(const std::filesystem::path& raw_file,
                                          const survey::Questionnaire& q);

std::string responses_to_jsonl(const std::vector<SurveyResponse>& responses);
std::vector<SurveyResponse> responses_from_jsonl(const std::string& text);

std::string agent_custom_id(std::size_t index);

}  // namespace communitypoll::poll
