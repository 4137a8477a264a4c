#include "communitypoll/survey/questionnaire.hpp"

#include <json.hpp>
#include <set>

#include "communitypoll/common/errors.hpp"

namespace communitypoll::survey {

using nlohmann::json;

void Question::validate() const {
  if (id.empty() || text.empty()) throw SchemaError("question missing id or text");
  if (kind == QuestionKind::kOpenText) {
    if (options.size() != 2) {
      throw SchemaError("question " + id + ": open-text questions carry exactly two options");
    }
    return;
  }
  if (options.size() < 2) {
    throw SchemaError("question " + id + ": select questions need at least two options");
  }
}

bool Question::has_option(const std::string& label) const {
  for (const auto& o : options) {
    if (o == label) return true;
  }
  return false;
}

void Questionnaire::validate() const {
  if (questions.size() != 13) {
    throw SchemaError("questionnaire must contain exactly 13 questions, has " +
                      std::to_string(questions.size()));
  }
  std::set<std::string> ids;
  int open_text = 0;
  for (const auto& q : questions) {
    q.validate();
    if (!ids.insert(q.id).second) throw SchemaError("duplicate question id " + q.id);
    if (q.kind == QuestionKind::kOpenText) ++open_text;
  }
  if (open_text != 1) {
    throw SchemaError("questionnaire must contain exactly one open-text question");
  }
}

const Question& Questionnaire::by_id(const std::string& id) const {
  for (const auto& q : questions) {
    if (q.id == id) return q;
  }
  throw DomainError("questionnaire has no question " + id);
}

namespace {

Questionnaire build_default() {
  Questionnaire q;
  auto add = [&q](const char* id, QuestionKind kind, const char* text,
                  std::vector<std::string> options) {
    q.questions.push_back(Question{id, text, kind, std::move(options)});
  };

  add("q01", QuestionKind::kSingleSelect,
      "What do you think will be the overall economic impact of this data center on the local "
      "community? Select the one option that best represents your view.",
      {"Very Positive", "Positive", "Mixed", "Negative", "Very Negative", "Unsure"});

  add("q02", QuestionKind::kMultiSelectMax3,
      "Which economic benefits are most important for your community? Select up to three that "
      "you consider most important. Separate your answers with a comma only.",
      {"Job Creation", "Tax Revenue", "Infrastructure Upgrades", "Business Growth",
       "Property Values", "Economic Diversity", kOtherOption});

  add("q03", QuestionKind::kMultiSelectMax3,
      "What economic costs or burdens concern you the most about this data center? Select up to "
      "three that you consider most important. Separate your answers with a comma only.",
      {"Higher Utility Bills", "Property Tax Increases", "Job Competition",
       "Housing Cost Inflation", "Public Service Strain", "Benefits to Outsiders",
       "No Major Concerns", kOtherOption});

  add("q04", QuestionKind::kSingleSelect,
      "How worried are you about the potential environmental impacts of the data center? Select "
      "the one option that best represents your view.",
      {"Very Worried", "Worried", "Neutral", "Unconcerned", "Very Unconcerned"});

  add("q05", QuestionKind::kMultiSelectMax3,
      "Which potential environmental impacts of this data center concern you the most? Select "
      "up to three that you consider most important. Separate your answers with a comma only.",
      {"Water Consumption", "Carbon Emissions", "Air Pollution", "Grid Impact",
       "Heat Generation", "Noise", "No Major Concerns", kOtherOption});

  add("q06", QuestionKind::kMultiSelectMax3,
      "What environmental protections should be required for this data center? Select up to "
      "three that you consider most important. Separate your answers with a comma only.",
      {"Water Conservation", "Renewable Energy", "Air Quality Monitoring", "Noise Limits",
       "Green Building", "Environmental Transparency", "No Special Requirements", kOtherOption});

  add("q07", QuestionKind::kSingleSelect,
      "If given the opportunity to participate in planning discussions for the data center "
      "project, would you be willing to participate? Select the one option that best represents "
      "your view.",
      {"Very Willing", "Willing", "Neutral", "Unwilling", "Very Unwilling"});

  add("q08", QuestionKind::kSingleSelect,
      "How much do you trust the government and relevant departments' ability to regulate data "
      "center operations? Select the one option that best represents your view.",
      {"Very Trusted", "Trusted", "Neutral", "Distrusted", "Very Distrusted"});

  add("q09", QuestionKind::kMultiSelectMax3,
      "Which sources of information would you trust most for this project? Select up to three "
      "that you consider most important. Separate your answers with a comma only.",
      {"Environmental Groups", "Local Government", "Community Organizations",
       "Academic Research", "Developer Information", "Federal/State Agencies", "Local Media",
       kOtherOption});

  add("q10", QuestionKind::kSingleSelect,
      "How do you expect this data center to personally affect you and your household? Select "
      "the one option that best represents your view.",
      {"Very Positive", "Positive", "Mixed", "No Impact", "Negative", "Very Negative", "Other"});

  add("q11", QuestionKind::kMultiSelectMax3,
      "What would make you more supportive of this data center project? Select up to three that "
      "you consider most important. Separate your answers with a comma only.",
      {"Already Support", "Lower Utility Bills", "Environmental Protections",
       "Local Job Guarantees", "Community Compensation", "Stricter Oversight", "Smaller Scale",
       "Nothing Would Help", kOtherOption});

  add("q12", QuestionKind::kSingleSelect,
      "Would you support or oppose a data center built near your community? Select the one "
      "option that best represents your view.",
      {"Strongly Support", "Support", "Neutral", "Oppose", "Strongly Oppose"});

  add("q13", QuestionKind::kOpenText,
      "What is the most important thing decision-makers should know about your views on this "
      "data center project? Share your key message or main concern.",
      {kNoThoughtsOption, kOtherOption});

  q.validate();
  return q;
}

}  // namespace

const Questionnaire& default_questionnaire() {
  static const Questionnaire q = build_default();
  return q;
}

std::string kind_name(QuestionKind kind) {
  switch (kind) {
    case QuestionKind::kSingleSelect:
      return "single_select";
    case QuestionKind::kMultiSelectMax3:
      return "multi_select_max3";
    case QuestionKind::kOpenText:
      return "open_text";
  }
  throw DomainError("unknown question kind");
}

QuestionKind kind_from_name(const std::string& name) {
  if (name == "single_select") return QuestionKind::kSingleSelect;
  if (name == "multi_select_max3") return QuestionKind::kMultiSelectMax3;
  if (name == "open_text") return QuestionKind::kOpenText;
  throw SchemaError("unknown question kind '" + name + "'");
}

std::string questionnaire_to_json(const Questionnaire& q) {
  json out = json::array();
  for (const auto& question : q.questions) {
    out.push_back({{"id", question.id},
                   {"text", question.text},
                   {"kind", kind_name(question.kind)},
                   {"options", question.options}});
  }
  return json{{"questions", out}}.dump(2) + "\n";
}

Questionnaire questionnaire_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("questionnaire: invalid JSON: ") + e.what());
  }
  Questionnaire q;
  for (const auto& item : doc.at("questions")) {
    Question question;
    question.id = item.at("id").get<std::string>();
    question.text = item.at("text").get<std::string>();
    question.kind = kind_from_name(item.at("kind").get<std::string>());
    question.options = item.at("options").get<std::vector<std::string>>();
    q.questions.push_back(std::move(question));
  }
  q.validate();
  return q;
}

}  // namespace communitypoll::survey
