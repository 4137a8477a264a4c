#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/poll/engine.hpp"
#include "communitypoll/poll/mock_provider.hpp"
#include "support.hpp"

using namespace communitypoll;
using namespace communitypoll::poll;
using communitypoll::survey::default_questionnaire;

namespace {

std::vector<synth::AgentProfile> make_agents(std::size_t n) {
  return std::vector<synth::AgentProfile>(n, testsupport::golden_agent());
}

impact::RegionalContext context_stub() {
  impact::RegionalContext context;
  context.rendered_text = "REGIONAL CONTEXT";
  return context;
}

RunPollConfig fast_config(std::size_t agents) {
  RunPollConfig config;
  config.batch_size = std::max<std::size_t>(1, agents / 3);
  config.backoff_base_ms = 0.1;
  return config;
}

MockProvider make_mock(MockBehavior behavior, std::uint64_t seed, std::size_t agents) {
  return MockProvider(default_questionnaire(), std::move(behavior), seed, agents);
}

// Always fails submission; used by the hard-failure path.
class DeadProvider : public Provider {
 public:
  std::string submit(const std::vector<ProviderRequest>&) override {
    throw ProviderError("gateway unreachable");
  }
  JobStatus poll(const std::string&) override { return JobStatus::kFailed; }
  std::vector<ProviderResult> fetch(const std::string&) override { return {}; }
};

// Drops one custom_id from the result set.
class DroppingProvider : public Provider {
 public:
  explicit DroppingProvider(MockProvider& inner) : inner_(inner) {}
  std::string submit(const std::vector<ProviderRequest>& batch) override {
    return inner_.submit(batch);
  }
  JobStatus poll(const std::string& handle) override { return inner_.poll(handle); }
  std::vector<ProviderResult> fetch(const std::string& handle) override {
    auto results = inner_.fetch(handle);
    if (!results.empty()) results.pop_back();
    return results;
  }

 private:
  MockProvider& inner_;
};

}  // namespace

TEST_CASE("parse accepts fenced and bare JSON identically") {
  const auto& q = default_questionnaire();
  std::string body =
      R"({"q01":"Mixed","q02":"Tax Revenue","q03":"Higher Utility Bills","q04":"Worried",)"
      R"("q05":"Water Consumption","q06":"Water Conservation","q07":"Willing","q08":"Neutral",)"
      R"("q09":"Academic Research","q10":"Mixed","q11":"Stricter Oversight","q12":"Neutral",)"
      R"("q13":"Protect the water."})";
  auto bare = parse_response(body, q);
  auto fenced = parse_response("```json\n" + body + "\n```", q);
  auto chatty = parse_response("Here is my answer:\n" + body + "\nHope that helps!", q);
  CHECK(bare.size() == 13);
  CHECK(bare.at("q01").selected == fenced.at("q01").selected);
  CHECK(bare.at("q13").free_text == chatty.at("q13").free_text);
}

TEST_CASE("parse rejects missing questions, unknown keys, and non-JSON") {
  const auto& q = default_questionnaire();
  CHECK_THROWS_AS(parse_response("no structure here at all", q), ParseError);

  std::string missing_q13 =
      R"({"q01":"Mixed","q02":"Tax Revenue","q03":"Higher Utility Bills","q04":"Worried",)"
      R"("q05":"Water Consumption","q06":"Water Conservation","q07":"Willing","q08":"Neutral",)"
      R"("q09":"Academic Research","q10":"Mixed","q11":"Stricter Oversight","q12":"Neutral"})";
  try {
    parse_response(missing_q13, q);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("q13") != std::string::npos);
  }

  std::string unknown_key = missing_q13;
  unknown_key.back() = ',';
  unknown_key += R"("q99":"x"})";
  try {
    parse_response(unknown_key, q);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("q99") != std::string::npos);
  }
}

TEST_CASE("mock provider output is a pure function of its seed") {
  auto agents = make_agents(25);
  auto run = [&](std::uint64_t seed) {
    auto provider = make_mock(MockBehavior{}, seed, agents.size());
    auto responses =
        run_poll(agents, context_stub(), default_questionnaire(), provider, fast_config(25));
    return responses_to_jsonl(responses);
  };
  CHECK(run(7) == run(7));
  CHECK(run(7) != run(8));
}

TEST_CASE("degenerate weights pin every answer") {
  MockBehavior behavior;
  behavior.questions["q12"].weights = {{"Neutral", 1.0}};
  auto agents = make_agents(40);
  auto provider = make_mock(behavior, 3, agents.size());
  auto responses =
      run_poll(agents, context_stub(), default_questionnaire(), provider, fast_config(40));
  for (const auto& response : responses) {
    REQUIRE(response.parse_status == ParseStatus::kOk);
    CHECK(response.answers.at("q12").selected == std::vector<std::string>{"Neutral"});
  }
}

TEST_CASE("sampled weights land within three standard errors") {
  MockBehavior behavior;
  behavior.questions["q12"].weights = {
      {"Support", 0.5}, {"Neutral", 0.3}, {"Oppose", 0.2}};
  const std::size_t n = 10000;
  auto agents = make_agents(n);
  auto provider = make_mock(behavior, 11, n);
  RunPollConfig config = fast_config(n);
  config.batch_size = 2000;
  auto responses = run_poll(agents, context_stub(), default_questionnaire(), provider, config);

  std::map<std::string, int> counts;
  for (const auto& response : responses) {
    counts[response.answers.at("q12").selected[0]] += 1;
  }
  const std::pair<const char*, double> expected[] = {
      {"Support", 0.5}, {"Neutral", 0.3}, {"Oppose", 0.2}};
  for (const auto& [label, p] : expected) {
    double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(counts[label] / static_cast<double>(n) - p) <= 3.0 * se);
  }
}

TEST_CASE("quota mode hits its per-option counts exactly") {
  MockBehavior behavior;
  behavior.questions["q12"].quota = true;
  behavior.questions["q12"].weights = {{"Strongly Support", 96},
                                       {"Support", 340},
                                       {"Neutral", 542},
                                       {"Oppose", 17},
                                       {"Strongly Oppose", 5}};
  const std::size_t n = 1000;
  auto agents = make_agents(n);
  auto provider = make_mock(behavior, 20250930, n);
  auto responses =
      run_poll(agents, context_stub(), default_questionnaire(), provider, fast_config(n));
  std::map<std::string, int> counts;
  for (const auto& response : responses) {
    counts[response.answers.at("q12").selected[0]] += 1;
  }
  CHECK(counts["Neutral"] == 542);
  CHECK(counts["Support"] == 340);
  CHECK(counts["Strongly Support"] == 96);
  CHECK(counts["Oppose"] == 17);
  CHECK(counts["Strongly Oppose"] == 5);
}

TEST_CASE("a thousand mock agents all parse cleanly") {
  auto agents = make_agents(1000);
  auto provider = make_mock(MockBehavior{}, 99, agents.size());
  PollStats stats;
  auto responses = run_poll(agents, context_stub(), default_questionnaire(), provider,
                            fast_config(1000), &stats);
  CHECK(stats.ok == 1000);
  CHECK(stats.failed == 0);
  for (const auto& response : responses) {
    CHECK(response.parse_status == ParseStatus::kOk);
    CHECK(response.answers.size() == 13);
    CHECK(response.retry_count == 0);
  }
}

TEST_CASE("malformed first responses recover with one retry each") {
  MockBehavior behavior;
  behavior.faults.malformed_json_once = true;
  auto agents = make_agents(60);
  auto provider = make_mock(behavior, 5, agents.size());
  PollStats stats;
  auto responses = run_poll(agents, context_stub(), default_questionnaire(), provider,
                            fast_config(60), &stats);
  CHECK(stats.ok == 60);
  CHECK(stats.failed == 0);
  for (const auto& response : responses) {
    CHECK(response.parse_status == ParseStatus::kOk);
    CHECK(response.retry_count == 1);
  }
}

TEST_CASE("first-attempt timeouts are retried transparently") {
  MockBehavior behavior;
  behavior.faults.timeout_once_modulo = 4;  // every fourth agent times out once
  auto agents = make_agents(40);
  auto provider = make_mock(behavior, 6, agents.size());
  auto responses =
      run_poll(agents, context_stub(), default_questionnaire(), provider, fast_config(40));
  for (std::size_t i = 0; i < responses.size(); ++i) {
    CHECK(responses[i].parse_status == ParseStatus::kOk);
    CHECK(responses[i].retry_count == (i % 4 == 0 ? 1 : 0));
  }
}

TEST_CASE("persistent over-selection exhausts retries and is excluded with exact counts") {
  MockBehavior behavior;
  behavior.faults.overselect_question = "q03";
  behavior.faults.overselect_modulo = 10;  // agents 0, 10, 20, ...
  auto agents = make_agents(100);
  auto provider = make_mock(behavior, 13, agents.size());
  PollStats stats;
  auto responses = run_poll(agents, context_stub(), default_questionnaire(), provider,
                            fast_config(100), &stats);
  CHECK(stats.failed == 10);
  CHECK(stats.ok == 90);
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (i % 10 == 0) {
      CHECK(responses[i].parse_status == ParseStatus::kFailed);
      CHECK(responses[i].retry_count == 2);
      CHECK(responses[i].error.find("over-selection") != std::string::npos);
    } else {
      CHECK(responses[i].parse_status == ParseStatus::kOk);
    }
  }
}

TEST_CASE("raw payloads persist verbatim and reprocess to the same responses") {
  auto dir = testsupport::scratch_dir("poll-raw");
  MockBehavior behavior;
  behavior.faults.malformed_json_once = true;
  auto agents = make_agents(30);
  auto provider = make_mock(behavior, 21, agents.size());
  RunPollConfig config = fast_config(30);
  config.run_dir = dir;
  auto responses = run_poll(agents, context_stub(), default_questionnaire(), provider, config);

  REQUIRE(std::filesystem::exists(dir / "raw_results.jsonl"));
  REQUIRE(std::filesystem::exists(dir / "requests.jsonl"));
  REQUIRE(std::filesystem::exists(dir / "responses.jsonl"));

  auto reprocessed = reprocess_raw(dir / "raw_results.jsonl", default_questionnaire());
  CHECK(responses_to_jsonl(reprocessed) == responses_to_jsonl(responses));

  // The persisted normalized file parses back to the same content.
  auto loaded = responses_from_jsonl(read_text_file(dir / "responses.jsonl"));
  CHECK(responses_to_jsonl(loaded) == responses_to_jsonl(responses));
  std::filesystem::remove_all(dir);
}

TEST_CASE("provider hard failure persists partial results then raises") {
  auto dir = testsupport::scratch_dir("poll-dead");
  DeadProvider provider;
  auto agents = make_agents(10);
  RunPollConfig config = fast_config(10);
  config.run_dir = dir;
  config.provider_attempts = 2;
  config.backoff_base_ms = 0.1;
  CHECK_THROWS_AS(
      run_poll(agents, context_stub(), default_questionnaire(), provider, config),
      ProviderError);
  CHECK(std::filesystem::exists(dir / "requests.jsonl"));  // requests written up front
  std::filesystem::remove_all(dir);
}

TEST_CASE("a dropped custom_id is a provider contract violation") {
  auto agents = make_agents(8);
  auto inner = make_mock(MockBehavior{}, 2, agents.size());
  DroppingProvider provider(inner);
  RunPollConfig config = fast_config(8);
  config.provider_attempts = 1;
  CHECK_THROWS_AS(
      run_poll(agents, context_stub(), default_questionnaire(), provider, config),
      ProviderError);
}

TEST_CASE("mock behavior profiles round-trip through JSON") {
  auto text = read_text_file(testsupport::fixtures_dir() / "mock" / "taylor_behavior.json");
  auto behavior = mock_behavior_from_json(text);
  CHECK(behavior.questions.at("q12").quota);
  CHECK(behavior.questions.at("q13").texts.size() == 5);
  CHECK(behavior.topic.themes.size() == 3);
  auto round = mock_behavior_from_json(mock_behavior_to_json(behavior));
  CHECK(round.questions.at("q12").weights == behavior.questions.at("q12").weights);
  CHECK(round.topic.lexicon == behavior.topic.lexicon);
}
