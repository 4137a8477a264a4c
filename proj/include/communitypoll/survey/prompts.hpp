#pragma once

#include <string>

#include "communitypoll/survey/questionnaire.hpp"
#include "communitypoll/synth/agents.hpp"

namespace communitypoll::survey {

// The constant system message (regional context) plus the per-agent user
// message. The system text is identical for every agent in a run so providers
// can cache it.
struct PromptPair {
  std::string system_text;
  std::string user_text;
};

// Numbered questions with one option per line, as embedded in the user prompt.
std::string render_questionnaire_text(const Questionnaire& q);

// Role-assumption block, agent attributes in fixed order, the questionnaire,
// and the JSON response instruction. Throws RenderError if the agent is
// missing an attribute.
std::string render_user_prompt(const synth::AgentProfile& agent, const Questionnaire& q);

PromptPair build_prompt_pair(const std::string& regional_context_text,
                             const synth::AgentProfile& agent, const Questionnaire& q);

}  // namespace communitypoll::survey
