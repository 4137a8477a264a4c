#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "communitypoll/poll/provider.hpp"
#include "communitypoll/survey/questionnaire.hpp"

namespace communitypoll::poll {

// Per-question behavior. Weights are relative; options absent from the map
// are never chosen. Quota mode converts weights into exact per-option counts
// (largest remainder over the expected agent count) and deals them out
// through a seeded shuffle, so aggregate frequencies are exact.
struct QuestionBehavior {
  std::vector<std::pair<std::string, double>> weights;
  bool quota = false;
  std::vector<std::pair<std::string, double>> texts;  // open-text questions
};

struct FaultPlan {
  // First response for every agent is unparseable prose; retries succeed.
  bool malformed_json_once = false;
  // Agents with index % modulo == 0 time out on their first attempt.
  int timeout_once_modulo = 0;
  // Agents with index % modulo == 0 persistently over-select on one question.
  std::string overselect_question;
  int overselect_modulo = 1;
  // Wrap every m-th agent's JSON in markdown code fences (0 = never).
  int fence_modulo = 3;
};

struct TopicBehavior {
  // Needle (matched case-insensitively in the response text) -> key phrase.
  std::vector<std::pair<std::string, std::string>> lexicon;
  // Theme label -> member phrases.
  std::vector<std::pair<std::string, std::vector<std::string>>> themes;
};

struct MockBehavior {
  std::map<std::string, QuestionBehavior> questions;
  FaultPlan faults;
  TopicBehavior topic;
  std::string other_payload = "Local hiring commitments";
};

MockBehavior mock_behavior_from_json(const std::string& json_text);
std::string mock_behavior_to_json(const MockBehavior& behavior);

// Deterministic seed-driven provider. Answers depend only on (seed,
// custom_id, question); fault behavior additionally depends on how many
// times the agent has been asked, which is what the retry path exercises.
class MockProvider : public Provider {
 public:
  MockProvider(survey::Questionnaire questionnaire, MockBehavior behavior, std::uint64_t seed,
               std::size_t expected_agents);

  std::string submit(const std::vector<ProviderRequest>& batch) override;
  JobStatus poll(const std::string& handle) override;
  std::vector<ProviderResult> fetch(const std::string& handle) override;

 private:
  std::string answer_for(const std::string& question_id, const survey::Question& question,
                         std::size_t agent_index, const std::string& custom_id) const;
  std::string survey_json(const std::string& custom_id, std::size_t agent_index) const;
  ProviderResult respond(const ProviderRequest& request);

  survey::Questionnaire questionnaire_;
  MockBehavior behavior_;
  std::uint64_t seed_;
  std::size_t expected_agents_;

  // Quota assignments per question, built lazily: option index per agent.
  mutable std::map<std::string, std::vector<std::size_t>> quota_assignments_;

  std::mutex mutex_;
  std::map<std::string, std::vector<ProviderRequest>> jobs_;
  std::map<std::string, int> polls_seen_;
  std::map<std::string, int> attempts_;  // per custom_id
  int next_job_ = 0;
};

}  // namespace communitypoll::poll
