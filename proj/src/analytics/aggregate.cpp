#include "communitypoll/analytics/aggregate.hpp"

#include <algorithm>
#include <json.hpp>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/text.hpp"

namespace communitypoll::analytics {

using nlohmann::json;

std::vector<AggregateResult> aggregate(const std::vector<poll::SurveyResponse>& responses,
                                       const survey::Questionnaire& q) {
  q.validate();
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  for (const auto& response : responses) {
    if (response.parse_status == poll::ParseStatus::kOk) {
      ++n_ok;
    } else {
      ++n_failed;
    }
  }
  if (n_ok == 0) {
    throw DomainError("aggregate: zero parse-ok responses");
  }

  std::vector<AggregateResult> results;
  for (const auto& question : q.questions) {
    AggregateResult result;
    result.question_id = question.id;
    result.question_text = question.text;
    result.kind = question.kind;
    result.n_ok = n_ok;
    result.n_failed = n_failed;
    for (const auto& option : question.options) {
      result.options.push_back(OptionCount{option, 0, 0.0, 0.0});
    }

    for (const auto& response : responses) {
      if (response.parse_status != poll::ParseStatus::kOk) continue;
      auto it = response.answers.find(question.id);
      if (it == response.answers.end()) continue;  // cannot happen for ok responses
      const auto& answer = it->second;
      for (const auto& selected : answer.selected) {
        for (auto& option : result.options) {
          if (option.label == selected) {
            option.count += 1;
            break;
          }
        }
      }
      if (answer.other_text) result.other_texts.push_back(*answer.other_text);
    }

    for (auto& option : result.options) {
      option.percent = 100.0 * static_cast<double>(option.count) / static_cast<double>(n_ok);
      option.percent_rounded = round1(option.percent);
    }
    // Payloads sort lexicographically so the aggregate is a pure function of
    // the response multiset, not of arrival order.
    std::sort(result.other_texts.begin(), result.other_texts.end());
    results.push_back(std::move(result));
  }
  return results;
}

double net_support(const AggregateResult& overall_attitude) {
  long long support = 0;
  long long oppose = 0;
  bool saw_support = false;
  bool saw_oppose = false;
  for (const auto& option : overall_attitude.options) {
    if (option.label == "Strongly Support" || option.label == "Support") {
      support += option.count;
      saw_support = true;
    } else if (option.label == "Oppose" || option.label == "Strongly Oppose") {
      oppose += option.count;
      saw_oppose = true;
    }
  }
  if (!saw_support || !saw_oppose) {
    throw DomainError("net_support: aggregate lacks support/oppose options");
  }
  if (overall_attitude.n_ok == 0) {
    throw DomainError("net_support: aggregate has no responses");
  }
  return 100.0 * static_cast<double>(support - oppose) /
         static_cast<double>(overall_attitude.n_ok);
}

const AggregateResult& find_aggregate(const std::vector<AggregateResult>& aggregates,
                                      const std::string& question_id) {
  for (const auto& a : aggregates) {
    if (a.question_id == question_id) return a;
  }
  throw DomainError("no aggregate for question " + question_id);
}

std::string aggregates_to_json(const std::vector<AggregateResult>& aggregates,
                               double net_support_percent) {
  json questions = json::array();
  for (const auto& a : aggregates) {
    json options = json::array();
    for (const auto& option : a.options) {
      options.push_back({{"label", option.label},
                         {"count", option.count},
                         {"percent", option.percent},
                         {"percent_rounded", option.percent_rounded}});
    }
    questions.push_back({{"id", a.question_id},
                         {"text", a.question_text},
                         {"kind", survey::kind_name(a.kind)},
                         {"options", options},
                         {"other_texts", a.other_texts},
                         {"n_ok", a.n_ok},
                         {"n_failed", a.n_failed}});
  }
  json doc{{"questions", questions}, {"net_support_percent", net_support_percent}};
  return doc.dump(2) + "\n";
}

std::vector<AggregateResult> aggregates_from_json(const std::string& text,
                                                  double* net_support_percent) {
  json doc = json::parse(text);
  if (net_support_percent) {
    *net_support_percent = doc.at("net_support_percent").get<double>();
  }
  std::vector<AggregateResult> aggregates;
  for (const auto& item : doc.at("questions")) {
    AggregateResult a;
    a.question_id = item.at("id").get<std::string>();
    a.question_text = item.at("text").get<std::string>();
    a.kind = survey::kind_from_name(item.at("kind").get<std::string>());
    for (const auto& o : item.at("options")) {
      a.options.push_back(OptionCount{o.at("label").get<std::string>(),
                                      o.at("count").get<long long>(),
                                      o.at("percent").get<double>(),
                                      o.at("percent_rounded").get<double>()});
    }
    a.other_texts = item.at("other_texts").get<std::vector<std::string>>();
    a.n_ok = item.at("n_ok").get<std::size_t>();
    a.n_failed = item.at("n_failed").get<std::size_t>();
    aggregates.push_back(std::move(a));
  }
  return aggregates;
}

}  // namespace communitypoll::analytics
