#pragma once

#include <string>
#include <vector>

namespace communitypoll::survey {

enum class QuestionKind { kSingleSelect, kMultiSelectMax3, kOpenText };

inline constexpr const char* kOtherOption = "Other (please specify)";
inline constexpr const char* kNoThoughtsOption = "No additional thoughts";

struct Question {
  std::string id;  // q01..q13
  std::string text;
  QuestionKind kind = QuestionKind::kSingleSelect;
  std::vector<std::string> options;

  void validate() const;
  bool has_option(const std::string& label) const;
};

struct Questionnaire {
  std::vector<Question> questions;

  void validate() const;  // exactly 13 questions, unique ids, one open-text
  const Question& by_id(const std::string& id) const;
};

// The built-in 13-question community instrument.
const Questionnaire& default_questionnaire();

std::string questionnaire_to_json(const Questionnaire& q);
Questionnaire questionnaire_from_json(const std::string& json_text);

std::string kind_name(QuestionKind kind);
QuestionKind kind_from_name(const std::string& name);

}  // namespace communitypoll::survey
