#include "communitypoll/survey/answers.hpp"

#include <algorithm>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/text.hpp"

namespace communitypoll::survey {

bool operator==(const NormalizedAnswer& a, const NormalizedAnswer& b) {
  return a.question_id == b.question_id && a.selected == b.selected &&
         a.other_text == b.other_text && a.free_text == b.free_text;
}

namespace {

struct TokenMatch {
  std::string canonical;
  std::optional<std::string> payload;
};

// Case-insensitive exact match after trimming; "Other" tokens may carry a
// payload after a colon. No fuzzy repair here: invalid answers go back to the
// provider for a retry instead.
TokenMatch match_token(const Question& question, const std::string& token) {
  std::string t = trim(token);
  if (t.empty()) {
    throw ParseError("question " + question.id + ": empty selection");
  }
  for (const auto& option : question.options) {
    if (iequals(t, option)) return {option, std::nullopt};
  }
  if (question.has_option(kOtherOption)) {
    std::string lower = to_lower(t);
    for (const std::string& prefix : {to_lower(kOtherOption), std::string("other")}) {
      if (lower.rfind(prefix, 0) != 0) continue;
      std::string rest = trim(t.substr(prefix.size()));
      if (rest.empty()) return {kOtherOption, std::nullopt};
      if (rest.front() == ':') return {kOtherOption, trim(rest.substr(1))};
    }
  }
  throw ParseError("question " + question.id + ": no option matches '" + t + "'");
}

NormalizedAnswer validate_select(const Question& question,
                                 const std::vector<std::string>& tokens) {
  NormalizedAnswer answer;
  answer.question_id = question.id;
  for (const auto& token : tokens) {
    TokenMatch match = match_token(question, token);
    bool seen = std::find(answer.selected.begin(), answer.selected.end(), match.canonical) !=
                answer.selected.end();
    if (!seen) answer.selected.push_back(match.canonical);
    if (match.payload) answer.other_text = match.payload;
  }
  if (answer.selected.empty()) {
    throw ParseError("question " + question.id + ": missing answer");
  }
  if (question.kind == QuestionKind::kSingleSelect && answer.selected.size() != 1) {
    throw ParseError("question " + question.id + ": expected exactly one selection, got " +
                     std::to_string(answer.selected.size()));
  }
  if (question.kind == QuestionKind::kMultiSelectMax3 && answer.selected.size() > 3) {
    throw ParseError("question " + question.id + ": over-selection (" +
                     std::to_string(answer.selected.size()) + " options, at most 3 allowed)");
  }
  return answer;
}

NormalizedAnswer validate_open_text(const Question& question, const std::string& raw) {
  std::string t = trim(raw);
  if (t.empty()) {
    throw ParseError("question " + question.id + ": missing answer");
  }
  NormalizedAnswer answer;
  answer.question_id = question.id;
  answer.free_text = raw;
  if (iequals(t, kNoThoughtsOption)) {
    answer.selected = {kNoThoughtsOption};
    return answer;
  }
  answer.selected = {kOtherOption};
  std::string lower = to_lower(t);
  std::string prefix = to_lower(kOtherOption);
  if (lower.rfind(prefix, 0) == 0) {
    std::string rest = trim(t.substr(prefix.size()));
    if (!rest.empty() && rest.front() == ':') rest = trim(rest.substr(1));
    answer.other_text = rest.empty() ? t : rest;
  } else {
    answer.other_text = t;
  }
  return answer;
}

}  // namespace

NormalizedAnswer validate_answer(const Question& question, const std::string& raw) {
  if (question.kind == QuestionKind::kOpenText) {
    return validate_open_text(question, raw);
  }
  if (trim(raw).empty()) {
    throw ParseError("question " + question.id + ": missing answer");
  }
  if (question.kind == QuestionKind::kSingleSelect) {
    // A lone option may legitimately contain commas only if it is canonical;
    // try the whole string before treating commas as separators.
    for (const auto& option : question.options) {
      if (iequals(trim(raw), option)) {
        return validate_select(question, {raw});
      }
    }
  }
  return validate_select(question, split(raw, ','));
}

NormalizedAnswer validate_answer(const Question& question, const std::vector<std::string>& raw) {
  if (question.kind == QuestionKind::kOpenText) {
    return validate_open_text(question, raw.empty() ? std::string() : raw.front());
  }
  if (raw.empty()) {
    throw ParseError("question " + question.id + ": missing answer");
  }
  return validate_select(question, raw);
}

}  // namespace communitypoll::survey
