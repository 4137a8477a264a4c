#include "communitypoll/poll/provider.hpp"

#include "communitypoll/common/errors.hpp"

namespace communitypoll::poll {

std::string status_name(ResultStatus status) {
  switch (status) {
    case ResultStatus::kOk:
      return "ok";
    case ResultStatus::kProviderError:
      return "provider_error";
    case ResultStatus::kTimeout:
      return "timeout";
  }
  throw DomainError("unknown result status");
}

ResultStatus status_from_name(const std::string& name) {
  if (name == "ok") return ResultStatus::kOk;
  if (name == "provider_error") return ResultStatus::kProviderError;
  if (name == "timeout") return ResultStatus::kTimeout;
  throw SchemaError("unknown result status '" + name + "'");
}

}  // namespace communitypoll::poll
