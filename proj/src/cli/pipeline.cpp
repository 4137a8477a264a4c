#include "communitypoll/cli/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "communitypoll/analytics/aggregate.hpp"
#include "communitypoll/analytics/ldta.hpp"
#include "communitypoll/census/client.hpp"
#include "communitypoll/census/variables.hpp"
#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/common/rng.hpp"
#include "communitypoll/common/text.hpp"
#include "communitypoll/conformal/conformal.hpp"
#include "communitypoll/impact/context.hpp"
#include "communitypoll/poll/engine.hpp"
#include "communitypoll/poll/mock_provider.hpp"
#include "communitypoll/survey/prompts.hpp"
#include "communitypoll/synth/synthesize.hpp"

namespace communitypoll::cli {

using nlohmann::json;

namespace {

constexpr const char* kStageIngest = "ingest";
constexpr const char* kStageSynthesize = "synthesize";
constexpr const char* kStageContext = "context";
constexpr const char* kStagePoll = "poll";
constexpr const char* kStageAnalyze = "analyze";
constexpr const char* kStageCalibrate = "calibrate";
constexpr const char* kStageReport = "report";

std::string now_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

struct StageContext {
  const RunConfig& config;
  std::filesystem::path run_dir;
  RunManifest manifest;
};

StageContext open_stage(const RunConfig& config) {
  StageContext ctx{config, config.output_dir, {}};
  std::filesystem::create_directories(ctx.run_dir);
  ctx.manifest = load_manifest(ctx.run_dir);
  return ctx;
}

void require_stage(const StageContext& ctx, const std::string& stage,
                   const std::string& missing_what) {
  if (!ctx.manifest.stage_ready(stage, ctx.config.config_hash, ctx.run_dir)) {
    throw StageOrderError(missing_what + " missing: run '" + stage + "' first");
  }
}

bool already_done(const StageContext& ctx, const std::string& stage, bool force) {
  if (force) return false;
  return ctx.manifest.stage_ready(stage, ctx.config.config_hash, ctx.run_dir);
}

void finalize_stage(StageContext& ctx, const std::string& stage,
                    const std::vector<std::string>& artifacts,
                    std::chrono::steady_clock::time_point started) {
  StageRecord record;
  record.completed = true;
  record.config_hash = ctx.config.config_hash;
  record.artifacts = artifacts;
  record.finished_at = now_utc();
  record.duration_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  ctx.manifest.config_hash = ctx.config.config_hash;
  ctx.manifest.seed = ctx.config.seed;
  ctx.manifest.model = ctx.config.poll.model_name;
  ctx.manifest.stages[stage] = std::move(record);
  save_manifest(ctx.run_dir, ctx.manifest);
}

struct IngestArtifacts {
  std::vector<census::MarginalTable> ipf_tables;  // partition applied to age
  census::MarginalTable marital_male;
  census::MarginalTable marital_female;
  census::MarginalTable enrollment;
  census::MarginalTable attainment;
  bool age_partitioned = false;
};

std::string ingest_to_json(const IngestArtifacts& artifacts) {
  json doc{{"ipf_tables", json::parse(census::marginals_to_json(artifacts.ipf_tables)).at("tables")},
           {"marital_male", json::parse(census::marginals_to_json({artifacts.marital_male})).at("tables").at(0)},
           {"marital_female", json::parse(census::marginals_to_json({artifacts.marital_female})).at("tables").at(0)},
           {"enrollment", json::parse(census::marginals_to_json({artifacts.enrollment})).at("tables").at(0)},
           {"attainment", json::parse(census::marginals_to_json({artifacts.attainment})).at("tables").at(0)},
           {"age_partitioned", artifacts.age_partitioned}};
  return doc.dump(2) + "\n";
}

census::MarginalTable table_from_json(const json& item) {
  census::MarginalTable t;
  t.dimension_name = item.at("dimension").get<std::string>();
  t.categories = item.at("categories").get<std::vector<std::string>>();
  t.counts = item.at("counts").get<std::vector<long long>>();
  t.total = item.at("total").get<long long>();
  t.validate();
  return t;
}

IngestArtifacts ingest_from_json(const std::string& text) {
  json doc = json::parse(text);
  IngestArtifacts artifacts;
  for (const auto& item : doc.at("ipf_tables")) {
    artifacts.ipf_tables.push_back(table_from_json(item));
  }
  artifacts.marital_male = table_from_json(doc.at("marital_male"));
  artifacts.marital_female = table_from_json(doc.at("marital_female"));
  artifacts.enrollment = table_from_json(doc.at("enrollment"));
  artifacts.attainment = table_from_json(doc.at("attainment"));
  artifacts.age_partitioned = doc.at("age_partitioned").get<bool>();
  return artifacts;
}

IngestArtifacts load_ingest(const StageContext& ctx) {
  return ingest_from_json(read_text_file(ctx.run_dir / "marginals.json"));
}

census::CountyProfile load_profile(const StageContext& ctx) {
  return census::county_profile_from_json(read_text_file(ctx.run_dir / "county_profile.json"));
}

survey::Questionnaire load_questionnaire(const RunConfig& config) {
  if (config.questionnaire_file) {
    return survey::questionnaire_from_json(
        read_text_file(config.resolve(*config.questionnaire_file)));
  }
  return survey::default_questionnaire();
}

poll::MockBehavior default_mock_behavior() {
  poll::MockBehavior behavior;
  behavior.topic.lexicon = {{"water", "water supply"},
                            {"utility", "utility costs"},
                            {"bill", "utility costs"},
                            {"job", "local jobs"},
                            {"hiring", "local jobs"}};
  behavior.topic.themes = {{"Water Resource Protection", {"water supply"}},
                           {"Utility Costs", {"utility costs"}},
                           {"Local Jobs & Employment", {"local jobs"}}};
  return behavior;
}

std::unique_ptr<poll::Provider> make_provider(const RunConfig& config,
                                              const survey::Questionnaire& questionnaire) {
  if (config.poll.provider == "mock") {
    poll::MockBehavior behavior = default_mock_behavior();
    if (config.poll.behavior_profile) {
      behavior = poll::mock_behavior_from_json(
          read_text_file(config.resolve(*config.poll.behavior_profile)));
      if (behavior.topic.lexicon.empty()) behavior.topic = default_mock_behavior().topic;
    }
    return std::make_unique<poll::MockProvider>(questionnaire, behavior,
                                                mix_seed(config.seed, "provider"),
                                                config.agent_count);
  }
  // The provider contract supports hosted batch vendors, but this build ships
  // only the deterministic mock; live runs need an adapter binary.
  throw ProviderError("provider 'live' is not available in this build; use provider \"mock\"");
}

std::string slugify(const std::string& text) {
  std::string slug;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      slug.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!slug.empty() && slug.back() != '_') {
      slug.push_back('_');
    }
  }
  while (!slug.empty() && slug.back() == '_') slug.pop_back();
  if (slug.size() > 40) slug.resize(40);
  return slug;
}

std::string csv_quote(const std::string& value) {
  bool needs_quotes = value.find_first_of(",\"\n") != std::string::npos;
  if (!needs_quotes) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  quoted += "\"";
  return quoted;
}

}  // namespace

bool RunManifest::stage_ready(const std::string& stage, const std::string& hash,
                              const std::filesystem::path& run_dir) const {
  auto it = stages.find(stage);
  if (it == stages.end()) return false;
  const StageRecord& record = it->second;
  if (!record.completed || record.config_hash != hash) return false;
  for (const auto& artifact : record.artifacts) {
    if (!std::filesystem::exists(run_dir / artifact)) return false;
  }
  return true;
}

RunManifest load_manifest(const std::filesystem::path& run_dir) {
  RunManifest manifest;
  auto path = run_dir / "manifest.json";
  if (!std::filesystem::exists(path)) return manifest;
  json doc = json::parse(read_text_file(path));
  manifest.config_hash = doc.value("config_hash", std::string());
  manifest.seed = doc.value("seed", std::uint64_t{0});
  manifest.model = doc.value("model", std::string());
  if (doc.contains("stages")) {
    for (const auto& [name, record] : doc.at("stages").items()) {
      StageRecord r;
      r.completed = record.value("completed", false);
      r.config_hash = record.value("config_hash", std::string());
      r.artifacts = record.value("artifacts", std::vector<std::string>());
      r.finished_at = record.value("finished_at", std::string());
      r.duration_ms = record.value("duration_ms", 0.0);
      manifest.stages[name] = std::move(r);
    }
  }
  return manifest;
}

void save_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest) {
  json stages = json::object();
  for (const auto& [name, record] : manifest.stages) {
    stages[name] = {{"completed", record.completed},
                    {"config_hash", record.config_hash},
                    {"artifacts", record.artifacts},
                    {"finished_at", record.finished_at},
                    {"duration_ms", record.duration_ms}};
  }
  json doc{{"config_hash", manifest.config_hash},
           {"seed", manifest.seed},
           {"model", manifest.model},
           {"stages", stages}};
  write_text_file_atomic(run_dir / "manifest.json", doc.dump(2) + "\n");
}

RunLock::RunLock(const std::filesystem::path& run_dir) {
  std::filesystem::create_directories(run_dir);
  path_ = run_dir / ".lock";
  if (std::filesystem::exists(path_)) {
    // A pid whose process is gone marks a stale lock from a crashed command.
    std::string pid_text = trim(read_text_file(path_));
    bool stale = true;
    if (!pid_text.empty()) {
      stale = !std::filesystem::exists("/proc/" + pid_text);
    }
    if (!stale) {
      throw Error("run directory " + run_dir.string() + " is locked by pid " + pid_text);
    }
    std::filesystem::remove(path_);
  }
  std::ofstream out(path_, std::ios::binary);
  out << getpid() << "\n";
}

RunLock::~RunLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

StageOutcome cmd_ingest(const RunConfig& config, bool force) {
  auto ctx = open_stage(config);
  RunLock lock(ctx.run_dir);
  if (already_done(ctx, kStageIngest, force)) return StageOutcome::kSkipped;
  auto started = std::chrono::steady_clock::now();

  census::ResponseCache cache(config.resolve(config.census.cache_dir));
  if (config.census.fixture_dir) {
    census::install_fixtures(config.resolve(*config.census.fixture_dir) / "index.json", cache);
  }
  std::shared_ptr<census::HttpClient> http;
  if (config.census.live) http = census::make_live_http_client();
  census::AcsClient client(http, cache);

  census::AcsQuery query{config.region.acs_year, config.region.state_fips,
                         config.region.county_fips};
  auto fetched = client.fetch_marginals(query, census::default_variable_sets());

  IngestArtifacts artifacts;
  for (auto& table : fetched) {
    if (table.dimension_name == census::kMaritalStatusMale) {
      artifacts.marital_male = table;
    } else if (table.dimension_name == census::kMaritalStatusFemale) {
      artifacts.marital_female = table;
    } else if (table.dimension_name == census::kEducationEnrollment) {
      artifacts.enrollment = table;
    } else if (table.dimension_name == census::kEducationLevel) {
      artifacts.attainment = table;
    }
  }
  // Joint dimensions in fit order, with the adult partition applied to age.
  for (const auto& name : census::ipf_dimension_order()) {
    for (auto& table : fetched) {
      if (table.dimension_name != name) continue;
      if (name == census::kAgeGroup) {
        auto partition = census::partition_age_bracket(table);
        artifacts.age_partitioned = partition.partitioned;
        artifacts.ipf_tables.push_back(std::move(partition.table));
      } else {
        artifacts.ipf_tables.push_back(table);
      }
    }
  }

  auto profile = client.fetch_county_profile(query);
  if (!config.region.county_name.empty()) profile.county_name = config.region.county_name;
  if (!config.region.state_name.empty()) profile.state_name = config.region.state_name;

  write_text_file_atomic(ctx.run_dir / "marginals.json", ingest_to_json(artifacts));
  write_text_file_atomic(ctx.run_dir / "county_profile.json",
                         census::county_profile_to_json(profile));
  finalize_stage(ctx, kStageIngest, {"marginals.json", "county_profile.json"}, started);
  return StageOutcome::kRan;
}

StageOutcome cmd_synthesize(const RunConfig& config, bool force) {
  auto ctx = open_stage(config);
  RunLock lock(ctx.run_dir);
  if (already_done(ctx, kStageSynthesize, force)) return StageOutcome::kSkipped;
  require_stage(ctx, kStageIngest, "marginal tables artifact");
  auto started = std::chrono::steady_clock::now();

  auto artifacts = load_ingest(ctx);
  synth::SynthesisInputs inputs{artifacts.ipf_tables, artifacts.marital_male,
                                artifacts.marital_female, artifacts.enrollment,
                                artifacts.attainment};
  synth::SynthesisConfig synth_config{config.synthesis.ipf, config.synthesis.alpha,
                                      config.synthesis.retry_cap,
                                      config.synthesis.marital_adjustment};
  auto result = synth::synthesize(inputs, synth_config, config.agent_count);

  synth::write_population(ctx.run_dir / "population.tsv", result.agents, config.config_hash,
                          result.seed_used);
  json reports = json::array();
  for (const auto& r : result.fit_reports) {
    reports.push_back({{"dimension", r.dimension},
                       {"display_name", census::display_name(r.dimension)},
                       {"chi_square", r.chi_square},
                       {"degrees_of_freedom", r.degrees_of_freedom},
                       {"p_value", r.p_value},
                       {"pass", r.pass},
                       {"merged_bins", r.merged_bins}});
  }
  json fit{{"alpha", config.synthesis.alpha},
           {"attempts", result.attempts},
           {"seed_used", result.seed_used},
           {"ipf_iterations", result.ipf_report.iterations},
           {"ipf_converged", result.ipf_report.converged},
           {"ipf_max_gap", result.ipf_report.max_gap},
           {"reports", reports}};
  write_text_file_atomic(ctx.run_dir / "fit_report.json", fit.dump(2) + "\n");
  finalize_stage(ctx, kStageSynthesize, {"population.tsv", "fit_report.json"}, started);
  return StageOutcome::kRan;
}

StageOutcome cmd_context(const RunConfig& config, bool force) {
  auto ctx = open_stage(config);
  RunLock lock(ctx.run_dir);
  if (already_done(ctx, kStageContext, force)) return StageOutcome::kSkipped;
  require_stage(ctx, kStageSynthesize, "population artifact");
  auto started = std::chrono::steady_clock::now();

  auto profile = load_profile(ctx);
  impact::StateContext state{config.region.state_name, config.region.acs_year,
                             config.region.state_dc_energy_mwh};
  auto regional = impact::build_regional_context(config.project, profile, state);

  json impact_doc{{"annual_energy_mwh", regional.impact.annual_energy_mwh},
                  {"it_energy_mwh", regional.impact.it_energy_mwh},
                  {"onsite_water_ml", regional.impact.onsite_water_ml},
                  {"offsite_water_ml", regional.impact.offsite_water_ml},
                  {"carbon_mst", regional.impact.carbon_mst},
                  {"pollutants_st", regional.impact.pollutants_st}};
  write_text_file_atomic(ctx.run_dir / "context.txt", regional.rendered_text);
  write_text_file_atomic(ctx.run_dir / "impact.json", impact_doc.dump(2) + "\n");
  finalize_stage(ctx, kStageContext, {"context.txt", "impact.json"}, started);
  return StageOutcome::kRan;
}

StageOutcome cmd_poll(const RunConfig& config, bool force) {
  auto ctx = open_stage(config);
  RunLock lock(ctx.run_dir);
  if (already_done(ctx, kStagePoll, force)) return StageOutcome::kSkipped;
  require_stage(ctx, kStageSynthesize, "population artifact");
  require_stage(ctx, kStageContext, "regional context artifact");
  auto started = std::chrono::steady_clock::now();

  auto population = synth::read_population(ctx.run_dir / "population.tsv");
  auto questionnaire = load_questionnaire(config);
  auto provider = make_provider(config, questionnaire);

  impact::RegionalContext regional;
  regional.rendered_text = read_text_file(ctx.run_dir / "context.txt");

  poll::RunPollConfig poll_config;
  poll_config.model_name = config.poll.model_name;
  poll_config.batch_size = config.poll.batch_size;
  poll_config.max_retries = config.poll.max_retries;
  poll_config.max_inflight = config.poll.max_inflight;
  poll_config.provider_attempts = config.poll.provider_attempts;
  poll_config.backoff_base_ms = config.poll.backoff_base_ms;
  poll_config.seed = config.seed;
  poll_config.run_dir = ctx.run_dir;

  poll::PollStats stats;
  auto responses = poll::run_poll(population.agents, regional, questionnaire, *provider,
                                  poll_config, &stats);
  (void)responses;  // persisted by run_poll

  json stats_doc{{"total", stats.total},
                 {"ok", stats.ok},
                 {"failed", stats.failed},
                 {"input_tokens", stats.input_tokens},
                 {"output_tokens", stats.output_tokens},
                 {"cost_usd", stats.cost_usd},
                 {"model", config.poll.model_name}};
  write_text_file_atomic(ctx.run_dir / "poll_stats.json", stats_doc.dump(2) + "\n");
  finalize_stage(ctx, kStagePoll,
                 {"requests.jsonl", "raw_results.jsonl", "responses.jsonl", "poll_stats.json"},
                 started);
  return StageOutcome::kRan;
}

StageOutcome cmd_analyze(const RunConfig& config, bool force) {
  auto ctx = open_stage(config);
  RunLock lock(ctx.run_dir);
  if (already_done(ctx, kStageAnalyze, force)) return StageOutcome::kSkipped;
  require_stage(ctx, kStagePoll, "poll responses artifact");
  auto started = std::chrono::steady_clock::now();

  auto questionnaire = load_questionnaire(config);
  auto responses = poll::responses_from_jsonl(read_text_file(ctx.run_dir / "responses.jsonl"));
  auto aggregates = analytics::aggregate(responses, questionnaire);

  std::string overall_id;
  for (const auto& question : questionnaire.questions) {
    if (question.kind == survey::QuestionKind::kSingleSelect &&
        question.has_option("Strongly Support")) {
      overall_id = question.id;
    }
  }
  double net = overall_id.empty()
                   ? 0.0
                   : analytics::net_support(analytics::find_aggregate(aggregates, overall_id));
  write_text_file_atomic(ctx.run_dir / "aggregates.json",
                         analytics::aggregates_to_json(aggregates, net));

  std::vector<std::string> artifacts = {"aggregates.json"};
  if (config.analysis.ldta) {
    std::vector<std::string> open_texts;
    std::string open_id;
    for (const auto& question : questionnaire.questions) {
      if (question.kind == survey::QuestionKind::kOpenText) open_id = question.id;
    }
    for (const auto& response : responses) {
      if (response.parse_status != poll::ParseStatus::kOk) continue;
      auto it = response.answers.find(open_id);
      if (it == response.answers.end() || !it->second.free_text) continue;
      open_texts.push_back(*it->second.free_text);
    }
    auto provider = make_provider(config, questionnaire);
    analytics::LdtaConfig ldta_config{config.poll.model_name, config.analysis.max_themes, 200};
    auto report = analytics::ldta(open_texts, *provider, ldta_config);
    write_text_file_atomic(ctx.run_dir / "topic_report.json",
                           analytics::topic_report_to_json(report));
    artifacts.push_back("topic_report.json");
  }
  finalize_stage(ctx, kStageAnalyze, artifacts, started);
  return StageOutcome::kRan;
}

StageOutcome cmd_calibrate(const RunConfig& config, bool force) {
  auto ctx = open_stage(config);
  RunLock lock(ctx.run_dir);
  if (already_done(ctx, kStageCalibrate, force)) return StageOutcome::kSkipped;
  require_stage(ctx, kStageAnalyze, "aggregates artifact");
  auto started = std::chrono::steady_clock::now();

  if (!config.calibration.pairs_file) {
    throw ConfigError("calibration requires /calibration/pairs_file");
  }
  auto pairs =
      conformal::read_calibration_pairs(config.resolve(*config.calibration.pairs_file));
  if (pairs.empty()) {
    throw DomainError("calibration pairs file holds no usable rows");
  }

  // Pooled by default; per-question groups fall back to the pooled model when
  // a question has no calibration rows of its own.
  conformal::ConformalModel pooled = conformal::calibrate(pairs, config.calibration.alpha);
  std::map<std::string, conformal::ConformalModel> per_question;
  if (config.calibration.grouping == "per_question") {
    std::map<std::string, std::vector<conformal::CalibrationPair>> grouped;
    for (const auto& pair : pairs) grouped[pair.question_id].push_back(pair);
    for (const auto& [qid, group] : grouped) {
      per_question[qid] = conformal::calibrate(group, config.calibration.alpha);
    }
  }

  auto aggregates =
      analytics::aggregates_from_json(read_text_file(ctx.run_dir / "aggregates.json"));
  std::ostringstream intervals;
  intervals << "question_id,option,y_hat,lo,hi\n";
  for (const auto& aggregate : aggregates) {
    const conformal::ConformalModel* model = &pooled;
    if (auto it = per_question.find(aggregate.question_id); it != per_question.end()) {
      model = &it->second;
    }
    for (const auto& option : aggregate.options) {
      double y_hat = option.percent / 100.0;
      auto interval = conformal::predict_interval(*model, y_hat);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", y_hat, interval.lo, interval.hi);
      intervals << aggregate.question_id << "," << csv_quote(option.label) << "," << buf << "\n";
    }
  }

  json models = json::array();
  auto model_json = [](const std::string& group, const conformal::ConformalModel& model) {
    json doc{{"group", group}, {"n", model.n}, {"alpha", model.alpha}};
    if (std::isinf(model.q_hat)) {
      doc["q_hat"] = nullptr;
      doc["vacuous"] = true;
    } else {
      doc["q_hat"] = model.q_hat;
      doc["vacuous"] = false;
    }
    return doc;
  };
  models.push_back(model_json("pooled", pooled));
  for (const auto& [qid, model] : per_question) models.push_back(model_json(qid, model));
  json doc{{"alpha", config.calibration.alpha},
           {"grouping", config.calibration.grouping},
           {"models", models}};
  write_text_file_atomic(ctx.run_dir / "conformal.json", doc.dump(2) + "\n");
  write_text_file_atomic(ctx.run_dir / "intervals.csv", intervals.str());
  finalize_stage(ctx, kStageCalibrate, {"conformal.json", "intervals.csv"}, started);
  return StageOutcome::kRan;
}

namespace {

void emit_top3(std::ostringstream& out, const std::vector<analytics::AggregateResult>& aggregates,
               const std::string& question_id, const std::string& title) {
  auto found = std::find_if(aggregates.begin(), aggregates.end(), [&](const auto& a) {
    return a.question_id == question_id;
  });
  if (found == aggregates.end()) return;  // custom instruments may renumber
  const auto& aggregate = *found;
  std::vector<analytics::OptionCount> options = aggregate.options;
  std::stable_sort(options.begin(), options.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  out << title << ": ";
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < options.size() && i < 3; ++i) {
    parts.push_back(options[i].label + " (" + format_percent(options[i].percent) + "%)");
  }
  out << join(parts, ", ") << "\n";
}

}  // namespace

StageOutcome cmd_report(const RunConfig& config, bool force) {
  auto ctx = open_stage(config);
  RunLock lock(ctx.run_dir);
  if (already_done(ctx, kStageReport, force)) return StageOutcome::kSkipped;
  require_stage(ctx, kStageAnalyze, "aggregates artifact");
  auto started = std::chrono::steady_clock::now();

  double net = 0.0;
  auto aggregates =
      analytics::aggregates_from_json(read_text_file(ctx.run_dir / "aggregates.json"), &net);
  auto questionnaire = load_questionnaire(config);

  std::optional<analytics::TopicReport> topics;
  if (std::filesystem::exists(ctx.run_dir / "topic_report.json")) {
    topics = analytics::topic_report_from_json(read_text_file(ctx.run_dir / "topic_report.json"));
  }

  std::filesystem::path report_dir = ctx.run_dir / "report";
  std::filesystem::path charts_dir = report_dir / "charts";
  std::filesystem::create_directories(charts_dir);
  std::vector<std::string> artifacts;

  // Machine-readable aggregate table.
  {
    std::ostringstream csv;
    csv << "question_id,option,count,percent\n";
    for (const auto& aggregate : aggregates) {
      for (const auto& option : aggregate.options) {
        csv << aggregate.question_id << "," << csv_quote(option.label) << "," << option.count
            << "," << format_percent(option.percent) << "\n";
      }
    }
    write_text_file_atomic(report_dir / "aggregates.csv", csv.str());
    artifacts.push_back("report/aggregates.csv");
  }

  // One chart-data file per question, plus topics and net support.
  for (const auto& aggregate : aggregates) {
    std::ostringstream csv;
    csv << "option,count,percent\n";
    for (const auto& option : aggregate.options) {
      csv << csv_quote(option.label) << "," << option.count << ","
          << format_percent(option.percent) << "\n";
    }
    std::string name = aggregate.question_id + "_" + slugify(aggregate.question_text) + ".csv";
    write_text_file_atomic(charts_dir / name, csv.str());
    artifacts.push_back("report/charts/" + name);
  }
  {
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "net_support_percent," << format_number(net, 1) << "\n";
    write_text_file_atomic(charts_dir / "net_support.csv", csv.str());
    artifacts.push_back("report/charts/net_support.csv");
  }
  if (topics) {
    std::ostringstream csv;
    csv << "theme,response_count,percent\n";
    for (const auto& theme : topics->themes) {
      csv << csv_quote(theme.label) << "," << theme.response_count << ","
          << format_percent(theme.percent) << "\n";
    }
    write_text_file_atomic(charts_dir / "topics.csv", csv.str());
    artifacts.push_back("report/charts/topics.csv");
  }
  if (std::filesystem::exists(ctx.run_dir / "intervals.csv")) {
    std::filesystem::copy_file(ctx.run_dir / "intervals.csv", report_dir / "intervals.csv",
                               std::filesystem::copy_options::overwrite_existing);
    artifacts.push_back("report/intervals.csv");
  }

  // Plain-text summary.
  {
    std::ostringstream out;
    const auto& first = aggregates.front();
    out << "Community Poll Report\n";
    out << "=====================\n";
    out << "Region: " << config.region.county_name << " County, " << config.region.state_name
        << "\n";
    out << "Model: " << config.poll.model_name << "\n";
    out << "Agents polled: " << (first.n_ok + first.n_failed) << " (ok: " << first.n_ok
        << ", failed: " << first.n_failed << ")\n\n";

    std::string overall_id;
    for (const auto& question : questionnaire.questions) {
      if (question.kind == survey::QuestionKind::kSingleSelect &&
          question.has_option("Strongly Support")) {
        overall_id = question.id;
      }
    }
    if (!overall_id.empty()) {
      const auto& overall = analytics::find_aggregate(aggregates, overall_id);
      out << "Overall attitude:\n";
      for (const auto& option : overall.options) {
        out << "  " << option.label << ": " << format_percent(option.percent) << "%\n";
      }
      out << "Net support: " << (net >= 0 ? "+" : "") << format_number(net, 1) << "%\n\n";
    }

    emit_top3(out, aggregates, "q02", "Top economic benefits");
    emit_top3(out, aggregates, "q03", "Top economic concerns");
    emit_top3(out, aggregates, "q05", "Top environmental concerns");
    emit_top3(out, aggregates, "q06", "Top environmental protections");
    emit_top3(out, aggregates, "q09", "Top information sources");
    emit_top3(out, aggregates, "q11", "Top support conditions");
    out << "\n";

    if (topics && !topics->themes.empty()) {
      out << "Topic analysis (themes over " << topics->n_responses << " open-text responses):\n";
      std::size_t rank = 1;
      for (const auto& theme : topics->themes) {
        out << "  " << rank++ << ". " << theme.label << ": " << format_percent(theme.percent)
            << "% (" << theme.response_count << " responses)\n";
      }
    } else {
      out << "Topic analysis: skipped\n";
    }
    write_text_file_atomic(report_dir / "summary.txt", out.str());
    artifacts.push_back("report/summary.txt");
  }

  finalize_stage(ctx, kStageReport, artifacts, started);
  return StageOutcome::kRan;
}

}  // namespace communitypoll::cli
