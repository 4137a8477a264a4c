#include "communitypoll/analytics/ldta.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/text.hpp"

namespace communitypoll::analytics {

using nlohmann::json;

namespace {

std::string phrase_prompt(const std::string& response_text) {
  std::ostringstream out;
  out << "Extract at most three short key phrases capturing the main concerns or priorities in "
         "the survey response below. Respond in JSON as {\"phrases\": [\"...\"]}.\n\n"
      << "Response:\n"
      << response_text;
  return out.str();
}

std::string theme_prompt(const std::vector<std::string>& phrases, std::size_t max_themes) {
  std::ostringstream out;
  out << "Group the key phrases below into at most " << max_themes
      << " overarching themes. Respond in JSON as {\"themes\": [{\"label\": \"...\", "
         "\"phrases\": [\"...\"]}]} where each phrase is assigned to the themes it belongs "
         "to.\n\n"
      << "Phrases:\n";
  for (const auto& phrase : phrases) out << "- " << phrase << "\n";
  return out.str();
}

std::optional<json> first_json(const std::string& text) {
  auto start = text.find('{');
  if (start == std::string::npos) return std::nullopt;
  try {
    return json::parse(text.substr(start));
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::vector<poll::ProviderResult> run_job(poll::Provider& provider,
                                          const std::vector<poll::ProviderRequest>& batch) {
  std::string handle = provider.submit(batch);
  poll::JobStatus status = provider.poll(handle);
  while (status == poll::JobStatus::kQueued || status == poll::JobStatus::kRunning) {
    status = provider.poll(handle);
  }
  if (status == poll::JobStatus::kFailed) {
    throw ProviderError("topic analysis batch failed");
  }
  return provider.fetch(handle);
}

}  // namespace

TopicReport ldta(const std::vector<std::string>& open_texts, poll::Provider& provider,
                 const LdtaConfig& config) {
  TopicReport report;
  report.n_responses = open_texts.size();
  report.phrase_extractions.assign(open_texts.size(), {});
  if (open_texts.empty()) return report;

  // Stage 1: batched per-response phrase extraction.
  for (std::size_t offset = 0; offset < open_texts.size(); offset += config.batch_size) {
    std::vector<poll::ProviderRequest> batch;
    for (std::size_t i = offset; i < open_texts.size() && i < offset + config.batch_size; ++i) {
      poll::ProviderRequest request;
      request.custom_id = "ldta-phrase-" + std::to_string(i);
      request.user_text = phrase_prompt(open_texts[i]);
      request.model_name = config.model_name;
      batch.push_back(std::move(request));
    }
    std::vector<poll::ProviderResult> results;
    try {
      results = run_job(provider, batch);
    } catch (const ProviderError&) {
      report.n_failed += batch.size();
      continue;  // partial report
    }
    for (const auto& result : results) {
      std::size_t index = std::stoull(result.custom_id.substr(result.custom_id.rfind('-') + 1));
      if (result.status != poll::ResultStatus::kOk) {
        ++report.n_failed;
        continue;
      }
      auto doc = first_json(result.raw_text);
      if (!doc || !doc->contains("phrases") || !(*doc)["phrases"].is_array()) {
        ++report.n_failed;
        continue;
      }
      std::vector<std::string> phrases;
      for (const auto& p : (*doc)["phrases"]) {
        if (!p.is_string()) continue;
        std::string phrase = trim(p.get<std::string>());
        if (phrase.empty()) continue;
        bool dup = false;
        for (const auto& existing : phrases) dup = dup || iequals(existing, phrase);
        if (!dup) phrases.push_back(phrase);
        if (phrases.size() == 3) break;  // hard cap per response
      }
      report.phrase_extractions[index] = std::move(phrases);
    }
  }

  // Stage 2: one aggregation call over the distinct phrases.
  std::vector<std::string> distinct;
  for (const auto& phrases : report.phrase_extractions) {
    for (const auto& phrase : phrases) {
      bool dup = false;
      for (const auto& existing : distinct) dup = dup || iequals(existing, phrase);
      if (!dup) distinct.push_back(phrase);
    }
  }
  if (distinct.empty()) return report;

  std::map<std::string, std::vector<std::string>> theme_members;  // lowercase phrase -> labels
  std::vector<std::string> theme_order;
  {
    poll::ProviderRequest request;
    request.custom_id = "ldta-themes";
    request.user_text = theme_prompt(distinct, config.max_themes);
    request.model_name = config.model_name;
    std::vector<poll::ProviderResult> results;
    try {
      results = run_job(provider, {request});
    } catch (const ProviderError&) {
      ++report.n_failed;
      return report;
    }
    if (results.empty() || results.front().status != poll::ResultStatus::kOk) {
      ++report.n_failed;
      return report;
    }
    auto doc = first_json(results.front().raw_text);
    if (!doc || !doc->contains("themes")) {
      ++report.n_failed;
      return report;
    }
    for (const auto& theme : (*doc)["themes"]) {
      if (theme_order.size() >= config.max_themes) break;
      std::string label = theme.at("label").get<std::string>();
      theme_order.push_back(label);
      for (const auto& phrase : theme.at("phrases")) {
        theme_members[to_lower(trim(phrase.get<std::string>()))].push_back(label);
      }
    }
  }

  // Stage 3: deterministic counting. A response touches a theme when any of
  // its phrases belongs to it, so cumulative percentages can exceed 100.
  std::map<std::string, long long> counts;
  for (const auto& phrases : report.phrase_extractions) {
    std::set<std::string> touched;
    for (const auto& phrase : phrases) {
      auto it = theme_members.find(to_lower(phrase));
      if (it == theme_members.end()) continue;
      for (const auto& label : it->second) touched.insert(label);
    }
    for (const auto& label : touched) counts[label] += 1;
  }
  for (const auto& label : theme_order) {
    Theme theme;
    theme.label = label;
    theme.response_count = counts[label];
    theme.percent =
        100.0 * static_cast<double>(theme.response_count) / static_cast<double>(open_texts.size());
    report.themes.push_back(std::move(theme));
  }
  std::stable_sort(report.themes.begin(), report.themes.end(),
                   [](const Theme& a, const Theme& b) { return a.response_count > b.response_count; });
  return report;
}

std::string topic_report_to_json(const TopicReport& report) {
  json themes = json::array();
  for (const auto& theme : report.themes) {
    themes.push_back({{"label", theme.label},
                      {"response_count", theme.response_count},
                      {"percent", theme.percent}});
  }
  json doc{{"themes", themes},
           {"phrase_extractions", report.phrase_extractions},
           {"n_responses", report.n_responses},
           {"n_failed", report.n_failed}};
  return doc.dump(2) + "\n";
}

TopicReport topic_report_from_json(const std::string& text) {
  json doc = json::parse(text);
  TopicReport report;
  for (const auto& t : doc.at("themes")) {
    report.themes.push_back(Theme{t.at("label").get<std::string>(),
                                  t.at("response_count").get<long long>(),
                                  t.at("percent").get<double>()});
  }
  report.phrase_extractions =
      doc.at("phrase_extractions").get<std::vector<std::vector<std::string>>>();
  report.n_responses = doc.at("n_responses").get<std::size_t>();
  report.n_failed = doc.at("n_failed").get<std::size_t>();
  return report;
}

}  // namespace communitypoll::analytics
