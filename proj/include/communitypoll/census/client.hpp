#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "communitypoll/census/types.hpp"

namespace communitypoll::census {

// Minimal HTTP seam so tests can run without a network.
class HttpClient {
 public:
  virtual ~HttpClient() = default;
  // Returns the response body for a GET to https://{host}{path_and_query},
  // or nullopt when the host is unreachable.
  virtual std::optional<std::string> get(const std::string& host, const std::string& path) = 0;
};

// TLS client against the live Census API. Reads CENSUS_API_KEY if present.
std::unique_ptr<HttpClient> make_live_http_client();

// Content-addressed payload cache: one file per request, holding the verbatim
// API response. Writes are temp-then-rename.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  static std::string request_key(int year, const std::string& state_fips,
                                 const std::string& county_fips,
                                 const std::vector<std::string>& codes);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& payload) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

// Copies fixture payloads (described by an index file) into a cache directory
// under their content-addressed names, enabling fully offline runs.
void install_fixtures(const std::filesystem::path& index_file, const ResponseCache& cache);

struct AcsQuery {
  int year = 2023;
  std::string state_fips;   // 2 digits
  std::string county_fips;  // 3 digits
};

class AcsClient {
 public:
  AcsClient(std::shared_ptr<HttpClient> http, ResponseCache cache);

  // One MarginalTable per variable set, in input order. Served from cache
  // when possible; live responses are cached before parsing.
  std::vector<MarginalTable> fetch_marginals(const AcsQuery& query,
                                             const std::vector<AcsVariableSet>& sets);

  CountyProfile fetch_county_profile(const AcsQuery& query);

 private:
  std::string fetch_payload(const AcsQuery& query, const std::vector<std::string>& codes);

  std::shared_ptr<HttpClient> http_;
  ResponseCache cache_;
};

struct PartitionResult {
  MarginalTable table;
  bool partitioned = false;  // false when the 15-19 bracket was absent
};

// Replaces the "15 to 19 years" category with "18 to 19 years" holding 2/5 of
// its count (rounded half-up); the discarded minor share leaves the total.
PartitionResult partition_age_bracket(const MarginalTable& table);

// Categorywise sum of the per-sex marital tables, i.e. the combined
// marital_status marginal.
MarginalTable combine_marital_tables(const MarginalTable& male, const MarginalTable& female);

// JSON round-trip for stage artifacts.
std::string marginals_to_json(const std::vector<MarginalTable>& tables);
std::vector<MarginalTable> marginals_from_json(const std::string& json_text);
std::string county_profile_to_json(const CountyProfile& profile);
CountyProfile county_profile_from_json(const std::string& json_text);

}  // namespace communitypoll::census
