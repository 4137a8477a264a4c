#pragma once

#include <optional>
#include <string>
#include <vector>

namespace communitypoll::poll {

struct ProviderRequest {
  std::string custom_id;
  std::string system_text;
  std::string user_text;
  std::string model_name;
  // Unset fields fall back to the provider's own defaults.
  std::optional<double> temperature;
  std::optional<int> max_output_tokens;
};

enum class ResultStatus { kOk, kProviderError, kTimeout };

struct ProviderResult {
  std::string custom_id;
  std::string raw_text;
  ResultStatus status = ResultStatus::kOk;
  long long input_tokens = 0;
  long long output_tokens = 0;
  double cost_usd = 0.0;
};

enum class JobStatus { kQueued, kRunning, kDone, kFailed };

// Batch-shaped provider contract: submit a batch, poll the handle, fetch the
// results once done. Matches the asynchronous batch APIs of the major vendors
// without binding to any SDK.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string submit(const std::vector<ProviderRequest>& batch) = 0;
  virtual JobStatus poll(const std::string& handle) = 0;
  virtual std::vector<ProviderResult> fetch(const std::string& handle) = 0;
};

std::string status_name(ResultStatus status);
ResultStatus status_from_name(const std::string& name);

}  // namespace communitypoll::poll
