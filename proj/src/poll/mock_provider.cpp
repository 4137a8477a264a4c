#include "communitypoll/poll/mock_provider.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>
#include <sstream>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/rng.hpp"
#include "communitypoll/common/text.hpp"

namespace communitypoll::poll {

using nlohmann::json;
using survey::Question;
using survey::QuestionKind;

MockBehavior mock_behavior_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mock behavior profile: invalid JSON: ") + e.what());
  }
  MockBehavior behavior;
  if (doc.contains("other_payload")) {
    behavior.other_payload = doc.at("other_payload").get<std::string>();
  }
  if (doc.contains("questions")) {
    for (const auto& [qid, spec] : doc.at("questions").items()) {
      QuestionBehavior qb;
      if (spec.contains("weights")) {
        for (const auto& [option, weight] : spec.at("weights").items()) {
          qb.weights.emplace_back(option, weight.get<double>());
        }
      }
      qb.quota = spec.value("quota", false);
      if (spec.contains("texts")) {
        for (const auto& item : spec.at("texts")) {
          qb.texts.emplace_back(item.at("text").get<std::string>(),
                                item.value("weight", 1.0));
        }
      }
      behavior.questions[qid] = std::move(qb);
    }
  }
  if (doc.contains("faults")) {
    const auto& f = doc.at("faults");
    behavior.faults.malformed_json_once = f.value("malformed_json_once", false);
    behavior.faults.timeout_once_modulo = f.value("timeout_once_modulo", 0);
    behavior.faults.overselect_question = f.value("overselect_question", std::string());
    behavior.faults.overselect_modulo = f.value("overselect_modulo", 1);
    behavior.faults.fence_modulo = f.value("fence_modulo", 3);
  }
  if (doc.contains("topic")) {
    const auto& t = doc.at("topic");
    if (t.contains("lexicon")) {
      for (const auto& item : t.at("lexicon")) {
        behavior.topic.lexicon.emplace_back(item.at(0).get<std::string>(),
                                            item.at(1).get<std::string>());
      }
    }
    if (t.contains("themes")) {
      for (const auto& item : t.at("themes")) {
        behavior.topic.themes.emplace_back(item.at(0).get<std::string>(),
                                           item.at(1).get<std::vector<std::string>>());
      }
    }
  }
  return behavior;
}

std::string mock_behavior_to_json(const MockBehavior& behavior) {
  json questions = json::object();
  for (const auto& [qid, qb] : behavior.questions) {
    json weights = json::object();
    for (const auto& [option, weight] : qb.weights) weights[option] = weight;
    json texts = json::array();
    for (const auto& [text, weight] : qb.texts) {
      texts.push_back({{"text", text}, {"weight", weight}});
    }
    json entry = json::object();
    if (!qb.weights.empty()) entry["weights"] = weights;
    if (qb.quota) entry["quota"] = true;
    if (!qb.texts.empty()) entry["texts"] = texts;
    questions[qid] = entry;
  }
  json lexicon = json::array();
  for (const auto& [needle, phrase] : behavior.topic.lexicon) {
    lexicon.push_back(json::array({needle, phrase}));
  }
  json themes = json::array();
  for (const auto& [label, phrases] : behavior.topic.themes) {
    themes.push_back(json::array({label, phrases}));
  }
  json doc{{"questions", questions},
           {"other_payload", behavior.other_payload},
           {"faults",
            {{"malformed_json_once", behavior.faults.malformed_json_once},
             {"timeout_once_modulo", behavior.faults.timeout_once_modulo},
             {"overselect_question", behavior.faults.overselect_question},
             {"overselect_modulo", behavior.faults.overselect_modulo},
             {"fence_modulo", behavior.faults.fence_modulo}}},
           {"topic", {{"lexicon", lexicon}, {"themes", themes}}}};
  return doc.dump(2) + "\n";
}

namespace {

std::size_t parse_agent_index(const std::string& custom_id) {
  auto pos = custom_id.find_last_of('-');
  if (pos == std::string::npos) return 0;
  try {
    return static_cast<std::size_t>(std::stoull(custom_id.substr(pos + 1)));
  } catch (const std::exception&) {
    return 0;
  }
}

std::vector<std::pair<std::string, double>> effective_weights(const Question& question,
                                                              const QuestionBehavior* qb) {
  if (qb && !qb->weights.empty()) return qb->weights;
  std::vector<std::pair<std::string, double>> weights;
  for (const auto& option : question.options) {
    if (option == survey::kOtherOption) continue;  // unweighted mocks skip free-form picks
    weights.emplace_back(option, 1.0);
  }
  return weights;
}

// Largest-remainder allocation of n slots over the weights.
std::vector<std::size_t> quota_counts(const std::vector<std::pair<std::string, double>>& weights,
                                      std::size_t n) {
  double total = 0.0;
  for (const auto& [option, w] : weights) total += w;
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double exact = weights[i].second / total * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
    counts[remainders[k % remainders.size()].second] += 1;
  }
  return counts;
}

// Weighted draw without replacement of k distinct option indices.
std::vector<std::size_t> draw_distinct(const std::vector<std::pair<std::string, double>>& weights,
                                       std::size_t k, std::mt19937_64& rng) {
  std::vector<double> live;
  for (const auto& [option, w] : weights) live.push_back(w);
  std::vector<std::size_t> chosen;
  for (std::size_t round = 0; round < k; ++round) {
    double total = 0.0;
    for (double w : live) total += w;
    if (total <= 0.0) break;
    double u = canonical(rng) * total;
    double running = 0.0;
    std::size_t pick = live.size() - 1;
    for (std::size_t i = 0; i < live.size(); ++i) {
      running += live[i];
      if (u < running) {
        pick = i;
        break;
      }
    }
    chosen.push_back(pick);
    live[pick] = 0.0;
  }
  return chosen;
}

constexpr const char* kResponseMarker = "Response:\n";
constexpr const char* kPhraseListMarker = "Phrases:\n";

}  // namespace

MockProvider::MockProvider(survey::Questionnaire questionnaire, MockBehavior behavior,
                           std::uint64_t seed, std::size_t expected_agents)
    : questionnaire_(std::move(questionnaire)),
      behavior_(std::move(behavior)),
      seed_(seed),
      expected_agents_(expected_agents) {
  questionnaire_.validate();
}

std::string MockProvider::answer_for(const std::string& question_id, const Question& question,
                                     std::size_t agent_index,
                                     const std::string& custom_id) const {
  const QuestionBehavior* qb = nullptr;
  if (auto it = behavior_.questions.find(question_id); it != behavior_.questions.end()) {
    qb = &it->second;
  }
  std::mt19937_64 rng(mix_seed(mix_seed(seed_, custom_id), mix_seed(7, question_id)));

  if (question.kind == QuestionKind::kOpenText) {
    std::vector<std::pair<std::string, double>> texts;
    if (qb && !qb->texts.empty()) {
      texts = qb->texts;
    } else {
      texts = {{"Protect our water supply and keep utility bills affordable.", 2.0},
               {"Make sure local people get the jobs.", 1.0},
               {survey::kNoThoughtsOption, 1.0}};
    }
    double total = 0.0;
    for (const auto& [text, w] : texts) total += w;
    double u = canonical(rng) * total;
    double running = 0.0;
    for (const auto& [text, w] : texts) {
      running += w;
      if (u < running) return text;
    }
    return texts.back().first;
  }

  auto weights = effective_weights(question, qb);
  if (weights.empty()) {
    throw ConfigError("mock behavior: no selectable options for " + question_id);
  }

  if (qb && qb->quota && expected_agents_ > 0) {
    auto it = quota_assignments_.find(question_id);
    if (it == quota_assignments_.end()) {
      auto counts = quota_counts(weights, expected_agents_);
      std::vector<std::size_t> assignment;
      assignment.reserve(expected_agents_);
      for (std::size_t i = 0; i < counts.size(); ++i) {
        assignment.insert(assignment.end(), counts[i], i);
      }
      std::mt19937_64 shuffle_rng(mix_seed(seed_, question_id));
      for (std::size_t i = assignment.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(canonical(shuffle_rng) * static_cast<double>(i));
        std::swap(assignment[i - 1], assignment[j]);
      }
      it = quota_assignments_.emplace(question_id, std::move(assignment)).first;
    }
    if (agent_index < it->second.size()) {
      return weights[it->second[agent_index]].first;
    }
  }

  std::size_t k = 1;
  if (question.kind == QuestionKind::kMultiSelectMax3) {
    k = 1 + static_cast<std::size_t>(canonical(rng) * 3.0);  // uniform 1..3
  }
  auto chosen = draw_distinct(weights, k, rng);
  std::vector<std::string> labels;
  for (std::size_t idx : chosen) {
    const std::string& option = weights[idx].first;
    if (option == survey::kOtherOption) {
      labels.push_back(std::string(survey::kOtherOption) + ": " + behavior_.other_payload);
    } else {
      labels.push_back(option);
    }
  }
  return join(labels, ", ");
}

std::string MockProvider::survey_json(const std::string& custom_id,
                                      std::size_t agent_index) const {
  json answers = json::object();
  bool overselect =
      !behavior_.faults.overselect_question.empty() && behavior_.faults.overselect_modulo > 0 &&
      agent_index % static_cast<std::size_t>(behavior_.faults.overselect_modulo) == 0;
  for (const auto& question : questionnaire_.questions) {
    if (overselect && question.id == behavior_.faults.overselect_question) {
      // Four distinct selections: one more than the instrument allows.
      std::vector<std::string> labels;
      for (const auto& option : question.options) {
        if (option == survey::kOtherOption) continue;
        labels.push_back(option);
        if (labels.size() == 4) break;
      }
      answers[question.id] = join(labels, ", ");
      continue;
    }
    answers[question.id] = answer_for(question.id, question, agent_index, custom_id);
  }
  return answers.dump();
}

ProviderResult MockProvider::respond(const ProviderRequest& request) {
  int attempt = 0;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    attempt = attempts_[request.custom_id]++;
  }
  std::size_t agent_index = parse_agent_index(request.custom_id);

  ProviderResult result;
  result.custom_id = request.custom_id;
  result.status = ResultStatus::kOk;

  if (request.custom_id.rfind("ldta-themes", 0) == 0) {
    // Group the listed phrases under the configured themes.
    std::vector<std::string> phrases;
    auto pos = request.user_text.find(kPhraseListMarker);
    if (pos != std::string::npos) {
      std::istringstream lines(request.user_text.substr(pos + std::string(kPhraseListMarker).size()));
      std::string line;
      while (std::getline(lines, line)) {
        if (line.rfind("- ", 0) == 0) phrases.push_back(trim(line.substr(2)));
      }
    }
    json themes = json::array();
    for (const auto& [label, members] : behavior_.topic.themes) {
      std::vector<std::string> present;
      for (const auto& member : members) {
        for (const auto& phrase : phrases) {
          if (iequals(phrase, member)) {
            present.push_back(member);
            break;
          }
        }
      }
      if (!present.empty()) {
        themes.push_back({{"label", label}, {"phrases", present}});
      }
    }
    result.raw_text = json{{"themes", themes}}.dump();
  } else if (request.custom_id.rfind("ldta-phrase-", 0) == 0) {
    std::string text = request.user_text;
    if (auto pos = text.rfind(kResponseMarker); pos != std::string::npos) {
      text = text.substr(pos + std::string(kResponseMarker).size());
    }
    std::string lower = to_lower(text);
    json phrases = json::array();
    for (const auto& [needle, phrase] : behavior_.topic.lexicon) {
      if (phrases.size() == 3) break;
      if (lower.find(to_lower(needle)) != std::string::npos) {
        phrases.push_back(phrase);
      }
    }
    result.raw_text = json{{"phrases", phrases}}.dump();
  } else {
    // Survey request.
    if (behavior_.faults.timeout_once_modulo > 0 && attempt == 0 &&
        agent_index % static_cast<std::size_t>(behavior_.faults.timeout_once_modulo) == 0) {
      result.status = ResultStatus::kTimeout;
      result.raw_text = "";
    } else if (behavior_.faults.malformed_json_once && attempt == 0) {
      result.raw_text = "As this resident I would say... (no structured answer provided)";
    } else {
      std::string body = survey_json(request.custom_id, agent_index);
      if (behavior_.faults.fence_modulo > 0 &&
          agent_index % static_cast<std::size_t>(behavior_.faults.fence_modulo) == 0) {
        body = "```json\n" + body + "\n```";
      }
      result.raw_text = body;
    }
  }

  result.input_tokens =
      static_cast<long long>((request.system_text.size() + request.user_text.size()) / 4);
  result.output_tokens = static_cast<long long>(result.raw_text.size() / 4);
  result.cost_usd = 0.0;
  return result;
}

std::string MockProvider::submit(const std::vector<ProviderRequest>& batch) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::string handle = "mock-job-" + std::to_string(next_job_++);
  jobs_[handle] = batch;
  polls_seen_[handle] = 0;
  return handle;
}

JobStatus MockProvider::poll(const std::string& handle) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = jobs_.find(handle);
  if (it == jobs_.end()) return JobStatus::kFailed;
  // First poll reports the job still running, exercising the wait loop.
  if (polls_seen_[handle]++ == 0) return JobStatus::kRunning;
  return JobStatus::kDone;
}

std::vector<ProviderResult> MockProvider::fetch(const std::string& handle) {
  std::vector<ProviderRequest> batch;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = jobs_.find(handle);
    if (it == jobs_.end()) {
      throw ProviderError("mock provider: unknown job handle " + handle);
    }
    batch = it->second;
  }
  std::vector<ProviderResult> results;
  results.reserve(batch.size());
  for (const auto& request : batch) {
    results.push_back(respond(request));
  }
  return results;
}

}  // namespace communitypoll::poll
