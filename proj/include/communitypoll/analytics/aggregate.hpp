#pragma once

#include <string>
#include <vector>

#include "communitypoll/poll/engine.hpp"
#include "communitypoll/survey/questionnaire.hpp"

namespace communitypoll::analytics {

struct OptionCount {
  std::string label;
  long long count = 0;
  double percent = 0.0;          // count / n_ok * 100, exact
  double percent_rounded = 0.0;  // one decimal, ties to even
};

struct AggregateResult {
  std::string question_id;
  std::string question_text;
  survey::QuestionKind kind = survey::QuestionKind::kSingleSelect;
  std::vector<OptionCount> options;        // questionnaire order
  std::vector<std::string> other_texts;    // payloads collected under "Other"
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

// Frequencies over parse-ok responses only, option order preserved from the
// questionnaire. Throws DomainError when no response parsed successfully.
std::vector<AggregateResult> aggregate(const std::vector<poll::SurveyResponse>& responses,
                                       const survey::Questionnaire& q);

// (Strongly Support% + Support%) - (Oppose% + Strongly Oppose%) of the
// overall-attitude question, computed from exact counts.
double net_support(const AggregateResult& overall_attitude);

const AggregateResult& find_aggregate(const std::vector<AggregateResult>& aggregates,
                                      const std::string& question_id);

std::string aggregates_to_json(const std::vector<AggregateResult>& aggregates,
                               double net_support_percent);
std::vector<AggregateResult> aggregates_from_json(const std::string& text,
                                                  double* net_support_percent = nullptr);

}  // namespace communitypoll::analytics
