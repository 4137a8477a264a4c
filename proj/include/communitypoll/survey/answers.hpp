#pragma once

#include <optional>
#include <string>
#include <vector>

#include "communitypoll/survey/questionnaire.hpp"

namespace communitypoll::survey {

struct NormalizedAnswer {
  std::string question_id;
  // Canonical option labels; single-select carries exactly one entry.
  std::vector<std::string> selected;
  // Payload attached to "Other (please specify)".
  std::optional<std::string> other_text;
  // Open-text answers keep the verbatim response.
  std::optional<std::string> free_text;
};

bool operator==(const NormalizedAnswer& a, const NormalizedAnswer& b);

// Matches raw answer text against the question contract:
//   single_select    exactly one option, case-insensitive, whitespace-trimmed
//   multi_select     comma-separated, 1..3 distinct options
//   open_text        verbatim text preserved
// "Other (please specify)" tokens may carry a payload after a colon.
// Throws ParseError for empty, unmatched, or over-selected answers.
NormalizedAnswer validate_answer(const Question& question, const std::string& raw);
NormalizedAnswer validate_answer(const Question& question, const std::vector<std::string>& raw);

}  // namespace communitypoll::survey
