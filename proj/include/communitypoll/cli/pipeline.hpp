#pragma once

#include <map>
#include <string>

#include "communitypoll/cli/config.hpp"

namespace communitypoll::cli {

struct StageRecord {
  bool completed = false;
  std::string config_hash;
  std::vector<std::string> artifacts;  // paths relative to the run directory
  std::string finished_at;             // ISO-8601 UTC
  double duration_ms = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string model;
  std::map<std::string, StageRecord> stages;

  // Completed under the given config hash and with all artifacts on disk.
  bool stage_ready(const std::string& stage, const std::string& config_hash,
                   const std::filesystem::path& run_dir) const;
};

RunManifest load_manifest(const std::filesystem::path& run_dir);
void save_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);

enum class StageOutcome { kRan, kSkipped };

// Pipeline stages, in order. Each command verifies its prerequisite stages,
// runs idempotently (an unchanged config hash is a no-op without force), and
// finalizes artifacts atomically before updating the manifest.
StageOutcome cmd_ingest(const RunConfig& config, bool force);
StageOutcome cmd_synthesize(const RunConfig& config, bool force);
StageOutcome cmd_context(const RunConfig& config, bool force);
StageOutcome cmd_poll(const RunConfig& config, bool force);
StageOutcome cmd_analyze(const RunConfig& config, bool force);
StageOutcome cmd_calibrate(const RunConfig& config, bool force);
StageOutcome cmd_report(const RunConfig& config, bool force);

// Serializes whole-run commands: at most one command may hold a run
// directory at a time.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& run_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace communitypoll::cli
