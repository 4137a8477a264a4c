#pragma once

#include <string>
#include <vector>

#include "communitypoll/poll/provider.hpp"

namespace communitypoll::analytics {

struct Theme {
  std::string label;
  long long response_count = 0;
  double percent = 0.0;  // over analyzed responses; themes can sum past 100
};

struct TopicReport {
  std::vector<Theme> themes;  // descending by count
  std::vector<std::vector<std::string>> phrase_extractions;  // per response, <= 3 each
  std::size_t n_responses = 0;
  std::size_t n_failed = 0;  // extraction failures (provider or parse)
};

struct LdtaConfig {
  std::string model_name = "mock-1";
  std::size_t max_themes = 10;
  std::size_t batch_size = 200;
};

// Three stages: per-response key-phrase extraction (at most three phrases)
// through the batch provider, one theme-aggregation call over the distinct
// phrases, then a deterministic count of responses touching each theme.
TopicReport ldta(const std::vector<std::string>& open_texts, poll::Provider& provider,
                 const LdtaConfig& config);

std::string topic_report_to_json(const TopicReport& report);
TopicReport topic_report_from_json(const std::string& text);

}  // namespace communitypoll::analytics
