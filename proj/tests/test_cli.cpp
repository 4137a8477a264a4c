#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "communitypoll/cli/config.hpp"
#include "communitypoll/cli/pipeline.hpp"
#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/common/hash.hpp"
#include "support.hpp"

using namespace communitypoll;
using namespace communitypoll::cli;

namespace {

std::filesystem::path config_path() {
  return testsupport::fixtures_dir() / "config" / "taylor_mock.json";
}

RunConfig test_config(const std::filesystem::path& work_dir, std::size_t agents = 120) {
  ConfigOverrides overrides;
  overrides.cache_dir = work_dir / "cache";
  overrides.output_dir = work_dir / "run";
  RunConfig config = load_run_config(config_path(), overrides);
  config.agent_count = agents;
  config.analysis.ldta = true;
  return config;
}

void run_all_stages(const RunConfig& config) {
  cmd_ingest(config, false);
  cmd_synthesize(config, false);
  cmd_context(config, false);
  cmd_poll(config, false);
  cmd_analyze(config, false);
  cmd_calibrate(config, false);
  cmd_report(config, false);
}

int run_cli(const std::string& args) {
  std::string command = std::string(CLI_BIN) + " " + args + " >/dev/null 2>&1";
  int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("the baseline config loads with documented defaults") {
  auto dir = testsupport::scratch_dir("cli-config");
  auto config = test_config(dir);
  CHECK(config.region.state_fips == "48");
  CHECK(config.region.county_fips == "441");
  CHECK(config.seed == 20250930);
  CHECK(config.poll.provider == "mock");
  CHECK(config.synthesis.ipf.max_iterations == 10);
  CHECK(config.synthesis.ipf.epsilon == doctest::Approx(1e-9));
  CHECK(config.calibration.alpha == doctest::Approx(0.1));
  CHECK_FALSE(config.config_hash.empty());

  // Hash is stable across loads and ignores directory overrides.
  auto again = load_run_config(config_path(), ConfigOverrides{});
  CHECK(again.config_hash == config.config_hash);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config parse errors carry line and column") {
  auto dir = testsupport::scratch_dir("cli-badjson");
  auto bad = dir / "bad.json";
  write_text_file_atomic(bad, "{\n  \"region\": {\n");
  try {
    load_run_config(bad, ConfigOverrides{});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.json:3") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("schema violations name the offending key path") {
  auto require_failure = [](const std::string& body, const std::string& needle) {
    try {
      run_config_from_json(body, "cfg");
      FAIL("expected ConfigError for ", needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  std::string base = read_text_file(config_path());

  // Missing seed.
  auto doc = nlohmann::json::parse(base);
  doc.erase("seed");
  require_failure(doc.dump(), "/seed");

  doc = nlohmann::json::parse(base);
  doc["agent_count"] = 0;
  require_failure(doc.dump(), "/agent_count");

  doc = nlohmann::json::parse(base);
  doc["calibration"]["alpha"] = 1.5;
  require_failure(doc.dump(), "/calibration/alpha");

  doc = nlohmann::json::parse(base);
  doc["region"]["state_fips"] = "4";
  require_failure(doc.dump(), "/region/state_fips");

  doc = nlohmann::json::parse(base);
  doc["poll"]["provider"] = "carrier-pigeon";
  require_failure(doc.dump(), "/poll/provider");
}

TEST_CASE("stages refuse to run before their prerequisites") {
  auto dir = testsupport::scratch_dir("cli-order");
  auto config = test_config(dir);
  try {
    cmd_poll(config, false);
    FAIL("expected StageOrderError");
  } catch (const StageOrderError& e) {
    CHECK(std::string(e.what()).find("population artifact missing") != std::string::npos);
  }
  CHECK_THROWS_AS(cmd_synthesize(config, false), StageOrderError);
  CHECK_THROWS_AS(cmd_report(config, false), StageOrderError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("the full mock pipeline runs and each stage is idempotent") {
  auto dir = testsupport::scratch_dir("cli-full");
  auto config = test_config(dir);
  run_all_stages(config);

  for (const char* artifact :
       {"marginals.json", "county_profile.json", "population.tsv", "fit_report.json",
        "context.txt", "impact.json", "requests.jsonl", "raw_results.jsonl", "responses.jsonl",
        "aggregates.json", "topic_report.json", "conformal.json", "intervals.csv",
        "report/summary.txt", "report/aggregates.csv", "report/charts/net_support.csv"}) {
    CHECK(std::filesystem::exists(config.output_dir / artifact));
  }

  // Idempotence: a second analyze is a no-op with an untouched manifest.
  auto manifest_before = read_text_file(config.output_dir / "manifest.json");
  CHECK(cmd_analyze(config, false) == StageOutcome::kSkipped);
  CHECK(read_text_file(config.output_dir / "manifest.json") == manifest_before);
  CHECK(cmd_analyze(config, true) == StageOutcome::kRan);
  std::filesystem::remove_all(dir);
}

TEST_CASE("two identical runs produce byte-identical report bundles") {
  auto dir_a = testsupport::scratch_dir("cli-det-a");
  auto dir_b = testsupport::scratch_dir("cli-det-b");
  auto config_a = test_config(dir_a);
  auto config_b = test_config(dir_b);
  run_all_stages(config_a);
  run_all_stages(config_b);

  for (const char* artifact :
       {"population.tsv", "responses.jsonl", "aggregates.json", "topic_report.json",
        "intervals.csv", "report/summary.txt", "report/aggregates.csv",
        "report/charts/net_support.csv", "report/charts/topics.csv"}) {
    CHECK(read_text_file(config_a.output_dir / artifact) ==
          read_text_file(config_b.output_dir / artifact));
  }
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("the summary reports attitude, net support, and topics") {
  auto dir = testsupport::scratch_dir("cli-summary");
  auto config = test_config(dir, 200);
  run_all_stages(config);
  auto summary = read_text_file(config.output_dir / "report" / "summary.txt");
  CHECK(summary.find("Overall attitude:") != std::string::npos);
  CHECK(summary.find("Neutral: ") != std::string::npos);
  CHECK(summary.find("Net support: ") != std::string::npos);
  CHECK(summary.find("Top economic benefits: ") != std::string::npos);
  CHECK(summary.find("Topic analysis") != std::string::npos);
  CHECK(summary.find("Water Resource Protection") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("disabling ldta marks topic analysis as skipped") {
  auto dir = testsupport::scratch_dir("cli-noldta");
  auto config = test_config(dir, 60);
  config.analysis.ldta = false;
  cmd_ingest(config, false);
  cmd_synthesize(config, false);
  cmd_context(config, false);
  cmd_poll(config, false);
  cmd_analyze(config, false);
  cmd_report(config, false);
  auto summary = read_text_file(config.output_dir / "report" / "summary.txt");
  CHECK(summary.find("Topic analysis: skipped") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a stale population hash invalidates downstream stages") {
  auto dir = testsupport::scratch_dir("cli-stale");
  auto config = test_config(dir, 60);
  cmd_ingest(config, false);
  cmd_synthesize(config, false);
  // Simulate a config change: the recorded stage hashes no longer match.
  auto changed = config;
  changed.config_hash = sha256_hex("different");
  CHECK_THROWS_AS(cmd_context(changed, false), StageOrderError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a missing artifact fails the manifest readiness check") {
  auto dir = testsupport::scratch_dir("cli-missing");
  auto config = test_config(dir, 60);
  cmd_ingest(config, false);
  std::filesystem::remove(config.output_dir / "marginals.json");
  CHECK_THROWS_AS(cmd_synthesize(config, false), StageOrderError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("the run lock excludes concurrent commands") {
  auto dir = testsupport::scratch_dir("cli-lock");
  auto run_dir = dir / "run";
  std::filesystem::create_directories(run_dir);
  {
    RunLock lock(run_dir);
    CHECK_THROWS_AS([&] { RunLock inner(run_dir); }(), Error);
  }
  // Released on destruction; a stale lock from a dead pid is reclaimed.
  write_text_file_atomic(run_dir / ".lock", "999999999\n");
  RunLock reclaimed(run_dir);
  std::filesystem::remove_all(dir);
}

TEST_CASE("the binary maps error classes onto exit codes") {
  auto dir = testsupport::scratch_dir("cli-exit");
  auto cache = dir / "cache";
  auto out = dir / "run";
  std::string base = " --config " + config_path().string() + " --cache-dir " + cache.string() +
                     " --out " + out.string();

  // Stage order first: poll before synthesize.
  CHECK(run_cli("poll" + base) == 3);
  // Happy path.
  CHECK(run_cli("ingest" + base) == 0);
  // Config error: malformed config file.
  auto bad = dir / "bad.json";
  write_text_file_atomic(bad, "{ not json");
  CHECK(run_cli("ingest --config " + bad.string()) == 2);
  // Provider error: live provider is not registered in this build. Relative
  // fixture paths are rewritten because the copy lives outside fixtures/.
  auto doc = nlohmann::json::parse(read_text_file(config_path()));
  doc["poll"]["provider"] = "live";
  doc["census"]["fixture_dir"] = (testsupport::fixtures_dir() / "census").string();
  doc["poll"]["behavior_profile"] =
      (testsupport::fixtures_dir() / "mock" / "taylor_behavior.json").string();
  doc["calibration"]["pairs_file"] =
      (testsupport::fixtures_dir() / "calibration" / "pairs_taylor.csv").string();
  auto live = dir / "live.json";
  write_text_file_atomic(live, doc.dump());
  CHECK(run_cli("synthesize" + base) == 0);
  CHECK(run_cli("context" + base) == 0);
  std::string live_base = " --config " + live.string() + " --cache-dir " + cache.string() +
                          " --out " + out.string();
  CHECK(run_cli("poll" + live_base) == 3);  // different config hash: stage order error
  // Re-run the chain under the live config so only the provider blocks.
  auto live_out = dir / "live-run";
  std::string live_chain = " --config " + live.string() + " --cache-dir " + cache.string() +
                           " --out " + live_out.string();
  CHECK(run_cli("ingest" + live_chain) == 0);
  CHECK(run_cli("synthesize" + live_chain) == 0);
  CHECK(run_cli("context" + live_chain) == 0);
  CHECK(run_cli("poll" + live_chain) == 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("rerunning a completed stage through the binary is a no-op") {
  auto dir = testsupport::scratch_dir("cli-noop");
  std::string base = " --config " + config_path().string() + " --cache-dir " +
                     (dir / "cache").string() + " --out " + (dir / "run").string();
  CHECK(run_cli("ingest" + base) == 0);
  auto manifest_before = read_text_file(dir / "run" / "manifest.json");
  CHECK(run_cli("ingest" + base) == 0);
  CHECK(read_text_file(dir / "run" / "manifest.json") == manifest_before);
  std::filesystem::remove_all(dir);
}
