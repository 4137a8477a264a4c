#include "communitypoll/census/types.hpp"

#include <numeric>
#include <regex>

#include "communitypoll/common/errors.hpp"

namespace communitypoll::census {

void AcsVariableSet::validate() const {
  if (variable_codes.empty() || variable_codes.size() != category_labels.size()) {
    throw SchemaError("variable set '" + dimension +
                      "': codes and labels must have equal, nonzero length");
  }
  static const std::regex code_pattern("DP[0-9]{2}_[0-9]{4}E");
  for (const auto& code : variable_codes) {
    if (!std::regex_match(code, code_pattern)) {
      throw SchemaError("variable set '" + dimension + "': malformed ACS code " + code);
    }
  }
}

void MarginalTable::validate() const {
  if (categories.size() != counts.size() || categories.empty()) {
    throw SchemaError("marginal table '" + dimension_name + "': category/count size mismatch");
  }
  long long sum = 0;
  for (long long c : counts) {
    if (c < 0) {
      throw DomainError("marginal table '" + dimension_name + "': negative count");
    }
    sum += c;
  }
  if (sum != total) {
    throw DomainError("marginal table '" + dimension_name + "': counts sum " +
                      std::to_string(sum) + " != total " + std::to_string(total));
  }
}

std::size_t MarginalTable::index_of(const std::string& category) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == category) return i;
  }
  throw DomainError("marginal table '" + dimension_name + "': no category '" + category + "'");
}

void CountyProfile::validate() const {
  if (population <= 0 || total_households <= 0) {
    throw SchemaError("invalid census payload: nonpositive population or household count");
  }
  const double pcts[] = {male_pct,   female_pct, white_pct,    black_pct,
                         aian_pct,   asian_pct,  nhpi_pct,     other_race_pct,
                         hispanic_pct, computer_pct, graduate_pct, bachelor_or_higher_pct,
                         homeownership_rate};
  for (double p : pcts) {
    if (p < 0.0 || p > 100.0) {
      throw SchemaError("invalid census payload: percentage out of [0,100]");
    }
  }
}

bool operator==(const MarginalTable& a, const MarginalTable& b) {
  return a.dimension_name == b.dimension_name && a.categories == b.categories &&
         a.counts == b.counts && a.total == b.total;
}

}  // namespace communitypoll::census
