#include "communitypoll/survey/prompts.hpp"

#include <sstream>

#include "communitypoll/common/errors.hpp"

namespace communitypoll::survey {

std::string render_questionnaire_text(const Questionnaire& q) {
  q.validate();
  std::ostringstream out;
  for (std::size_t i = 0; i < q.questions.size(); ++i) {
    const Question& question = q.questions[i];
    if (i) out << "\n";
    out << (i + 1) << ". " << question.text << "\n";
    for (const auto& option : question.options) {
      out << "- " << option << "\n";
    }
  }
  return out.str();
}

std::string render_user_prompt(const synth::AgentProfile& agent, const Questionnaire& q) {
  auto require = [&](const std::string& value, const char* field) -> const std::string& {
    if (value.empty()) {
      throw RenderError(std::string("user prompt: agent missing attribute ") + field);
    }
    return value;
  };

  std::ostringstream out;
  out << "ASSUME THE ROLE of this resident: " << require(agent.age_group, "age_group") << ", "
      << require(agent.sex, "sex") << ", " << require(agent.race, "race") << ", "
      << require(agent.ethnicity, "ethnicity") << ", "
      << require(agent.education_level, "education_level") << " education, "
      << require(agent.marital_status, "marital_status") << ", "
      << require(agent.language_at_home, "language_at_home") << ", "
      << require(agent.citizenship, "citizenship") << ", "
      << require(agent.employment_status, "employment_status") << ", "
      << require(agent.household_income, "household_income") << " household yearly income, "
      << require(agent.housing, "housing") << ", household has "
      << require(agent.vehicles, "vehicles") << "\n\n";

  out << "Put yourself completely in this person's position. Answer ALL questions from your "
         "perspective:\n\n";
  out << render_questionnaire_text(q) << "\n";
  out << "Give short, clear answers. Be honest and share your real thoughts even if they're "
         "critical.\n\n";
  out << "Please respond in JSON format with the following structure:\n{\n";
  out << "    \"" << q.questions.front().id << "\": \"your_answer\",\n";
  out << "    \"" << q.questions[1].id << "\": \"your_answer\",\n";
  out << "    ...\n}\n";
  return out.str();
}

PromptPair build_prompt_pair(const std::string& regional_context_text,
                             const synth::AgentProfile& agent, const Questionnaire& q) {
  if (regional_context_text.empty()) {
    throw RenderError("prompt pair: empty regional context");
  }
  return PromptPair{regional_context_text, render_user_prompt(agent, q)};
}

}  // namespace communitypoll::survey
