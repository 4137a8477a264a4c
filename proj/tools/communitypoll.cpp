#include <CLI11.hpp>
#include <iostream>

#include "communitypoll/cli/config.hpp"
#include "communitypoll/cli/pipeline.hpp"
#include "communitypoll/common/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitStageOrder = 3;
constexpr int kExitProvider = 4;

using StageFn = communitypoll::cli::StageOutcome (*)(const communitypoll::cli::RunConfig&, bool);

struct StageSpec {
  const char* name;
  const char* description;
  StageFn fn;
};

const StageSpec kStages[] = {
    {"ingest", "Fetch county marginals and profile from the ACS API or cache",
     communitypoll::cli::cmd_ingest},
    {"synthesize", "Fit the joint distribution and sample the agent population",
     communitypoll::cli::cmd_synthesize},
    {"context", "Compute project impacts and render the regional context prompt",
     communitypoll::cli::cmd_context},
    {"poll", "Survey every agent through the configured provider",
     communitypoll::cli::cmd_poll},
    {"analyze", "Aggregate answers and run topic analysis over open text",
     communitypoll::cli::cmd_analyze},
    {"calibrate", "Fit a conformal threshold and emit prediction intervals",
     communitypoll::cli::cmd_calibrate},
    {"report", "Emit the report bundle (summary, tables, chart data)",
     communitypoll::cli::cmd_report},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"communitypoll: synthetic-population opinion polling pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string cache_dir;
  std::string out_dir;
  bool force = false;

  StageFn selected = nullptr;
  for (const auto& stage : kStages) {
    CLI::App* sub = app.add_subcommand(stage.name, stage.description);
    sub->add_option("--config", config_path, "Run configuration file")->required();
    sub->add_option("--cache-dir", cache_dir, "Override the census cache directory");
    sub->add_option("--out", out_dir, "Override the run output directory");
    sub->add_flag("--force", force, "Re-run the stage even when up to date");
    sub->callback([&selected, fn = stage.fn]() { selected = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    communitypoll::cli::ConfigOverrides overrides;
    if (!cache_dir.empty()) overrides.cache_dir = cache_dir;
    if (!out_dir.empty()) overrides.output_dir = out_dir;
    auto config = communitypoll::cli::load_run_config(config_path, overrides);
    auto outcome = selected(config, force);
    if (outcome == communitypoll::cli::StageOutcome::kSkipped) {
      std::cout << "up to date (config hash " << config.config_hash.substr(0, 12)
                << "); use --force to re-run\n";
    } else {
      std::cout << "done\n";
    }
    return kExitOk;
  } catch (const communitypoll::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const communitypoll::StageOrderError& e) {
    std::cerr << "stage order error: " << e.what() << "\n";
    return kExitStageOrder;
  } catch (const communitypoll::ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
