#include "communitypoll/census/client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "communitypoll/census/variables.hpp"
#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/common/hash.hpp"
#include "communitypoll/common/text.hpp"

namespace communitypoll::census {

using nlohmann::json;

namespace {

constexpr const char* kApiHost = "api.census.gov";

class LiveHttpClient : public HttpClient {
 public:
  std::optional<std::string> get(const std::string& host, const std::string& path) override {
    httplib::SSLClient client(host);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto res = client.Get(path.c_str());
    if (!res || res->status != 200) {
      return std::nullopt;
    }
    return res->body;
  }
};

std::string build_path(const AcsQuery& query, const std::vector<std::string>& codes) {
  std::string path = "/data/" + std::to_string(query.year) + "/acs/acs5/profile?get=";
  path += join(codes, "%2C");
  path += "&for=county:" + query.county_fips + "&in=state:" + query.state_fips;
  if (const char* key = std::getenv("CENSUS_API_KEY"); key && *key) {
    path += "&key=" + std::string(key);
  }
  return path;
}

// ACS payloads are a JSON array of arrays: header row of codes, then one data
// row per geography (we request a single county).
std::map<std::string, std::string> parse_payload_row(const std::string& payload,
                                                     const std::vector<std::string>& codes) {
  json doc;
  try {
    doc = json::parse(payload);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("census payload is not valid JSON: ") + e.what());
  }
  if (!doc.is_array() || doc.size() < 2 || !doc[0].is_array() || !doc[1].is_array()) {
    throw SchemaError("census payload is not an array-of-arrays with a header row");
  }
  const json& header = doc[0];
  const json& row = doc[1];
  if (header.size() != row.size()) {
    throw SchemaError("census payload header/row length mismatch");
  }
  std::map<std::string, std::string> values;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string key = header[i].get<std::string>();
    values[key] = row[i].is_null() ? std::string() : row[i].get<std::string>();
  }
  for (const auto& code : codes) {
    if (code == "NAME") continue;
    if (values.find(code) == values.end()) {
      throw SchemaError("census payload missing variable " + code);
    }
  }
  return values;
}

long long to_count(const std::string& raw, const std::string& code) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("census variable " + code + " is not an integer: '" + raw + "'");
  }
}

double to_real(const std::string& raw, const std::string& code) {
  try {
    std::size_t pos = 0;
    double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("census variable " + code + " is not numeric: '" + raw + "'");
  }
}

}  // namespace

std::unique_ptr<HttpClient> make_live_http_client() {
  return std::make_unique<LiveHttpClient>();
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string ResponseCache::request_key(int year, const std::string& state_fips,
                                       const std::string& county_fips,
                                       const std::vector<std::string>& codes) {
  std::string canonical =
      std::to_string(year) + "|" + state_fips + "|" + county_fips + "|" + join(codes, ",");
  return sha256_hex(canonical);
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  auto path = dir_ / (key + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_text_file(path);
}

void ResponseCache::store(const std::string& key, const std::string& payload) const {
  write_text_file_atomic(dir_ / (key + ".json"), payload);
}

void install_fixtures(const std::filesystem::path& index_file, const ResponseCache& cache) {
  json index;
  try {
    index = json::parse(read_text_file(index_file));
  } catch (const json::exception& e) {
    throw SchemaError("fixture index " + index_file.string() + ": " + e.what());
  }
  auto base = index_file.parent_path();
  for (const auto& entry : index.at("requests")) {
    std::vector<std::string> codes = entry.at("codes").get<std::vector<std::string>>();
    std::string key = ResponseCache::request_key(entry.at("year").get<int>(),
                                                 entry.at("state").get<std::string>(),
                                                 entry.at("county").get<std::string>(), codes);
    std::string payload = read_text_file(base / entry.at("file").get<std::string>());
    cache.store(key, payload);
  }
}

AcsClient::AcsClient(std::shared_ptr<HttpClient> http, ResponseCache cache)
    : http_(std::move(http)), cache_(std::move(cache)) {}

std::string AcsClient::fetch_payload(const AcsQuery& query,
                                     const std::vector<std::string>& codes) {
  std::string key = ResponseCache::request_key(query.year, query.state_fips, query.county_fips,
                                               codes);
  if (auto cached = cache_.lookup(key)) {
    return *cached;
  }
  std::optional<std::string> body;
  if (http_) {
    body = http_->get(kApiHost, build_path(query, codes));
  }
  if (!body) {
    throw FetchError("census API unreachable and no cached response for request " + key);
  }
  cache_.store(key, *body);
  return *body;
}

std::vector<MarginalTable> AcsClient::fetch_marginals(const AcsQuery& query,
                                                      const std::vector<AcsVariableSet>& sets) {
  std::vector<MarginalTable> tables;
  tables.reserve(sets.size());
  for (const auto& set : sets) {
    set.validate();
    std::vector<std::string> codes = {"NAME"};
    codes.insert(codes.end(), set.variable_codes.begin(), set.variable_codes.end());
    auto values = parse_payload_row(fetch_payload(query, codes), codes);

    MarginalTable table;
    table.dimension_name = set.dimension;
    table.categories = set.category_labels;
    long long total = 0;
    for (const auto& code : set.variable_codes) {
      long long count = to_count(values.at(code), code);
      if (count < 0) {
        throw SchemaError("census variable " + code + " has negative count");
      }
      table.counts.push_back(count);
      total += count;
    }
    table.total = total;
    table.validate();
    tables.push_back(std::move(table));
  }
  return tables;
}

CountyProfile AcsClient::fetch_county_profile(const AcsQuery& query) {
  const auto& codes = county_profile_codes();
  auto values = parse_payload_row(fetch_payload(query, codes), codes);

  auto count = [&](const char* code) { return to_count(values.at(code), code); };
  auto real = [&](const char* code) { return to_real(values.at(code), code); };

  CountyProfile p;
  if (auto it = values.find("NAME"); it != values.end()) {
    // "Taylor County, Texas" -> county "Taylor", state "Texas"
    auto parts = split(it->second, ',');
    if (parts.size() == 2) {
      std::string county = trim(parts[0]);
      replace_all(county, " County", "");
      p.county_name = county;
      p.state_name = trim(parts[1]);
    }
  }

  p.population = count("DP05_0001E");
  if (p.population <= 0) {
    throw SchemaError("invalid census payload: nonpositive population");
  }
  p.median_age = real("DP05_0018E");
  double pop = static_cast<double>(p.population);
  p.male_pct = 100.0 * static_cast<double>(count("DP05_0002E")) / pop;
  p.female_pct = 100.0 * static_cast<double>(count("DP05_0003E")) / pop;
  p.white_pct = 100.0 * static_cast<double>(count("DP05_0069E")) / pop;
  p.black_pct = 100.0 * static_cast<double>(count("DP05_0070E")) / pop;
  p.aian_pct = 100.0 * static_cast<double>(count("DP05_0071E")) / pop;
  p.asian_pct = 100.0 * static_cast<double>(count("DP05_0072E")) / pop;
  p.nhpi_pct = 100.0 * static_cast<double>(count("DP05_0073E")) / pop;
  p.other_race_pct = 100.0 * static_cast<double>(count("DP05_0074E")) / pop;
  p.hispanic_pct = 100.0 * static_cast<double>(count("DP05_0076E")) / pop;

  p.total_households = count("DP02_0001E");
  if (p.total_households <= 0) {
    throw SchemaError("invalid census payload: nonpositive household count");
  }
  p.avg_household_size = real("DP02_0016E");

  long long attainment_total = 0;
  for (int n = 60; n <= 66; ++n) {
    char code[16];
    std::snprintf(code, sizeof(code), "DP02_%04dE", n);
    attainment_total += to_count(values.at(code), code);
  }
  long long bachelors = count("DP02_0065E");
  long long graduate = count("DP02_0066E");
  if (attainment_total > 0) {
    p.bachelor_or_higher_pct =
        100.0 * static_cast<double>(bachelors + graduate) / static_cast<double>(attainment_total);
    p.graduate_pct = 100.0 * static_cast<double>(graduate) / static_cast<double>(attainment_total);
  }
  p.computer_pct = 100.0 * static_cast<double>(count("DP02_0153E")) /
                   static_cast<double>(p.total_households);

  p.median_household_income = count("DP03_0062E");
  p.per_capita_income = count("DP03_0088E");

  // Top three employment sectors by worker count.
  const auto& sets = default_variable_sets();
  const AcsVariableSet* employment = nullptr;
  for (const auto& s : sets) {
    if (s.dimension == kEmploymentStatus) employment = &s;
  }
  std::vector<std::pair<long long, std::string>> industries;
  for (int n = 33; n <= 45; ++n) {
    char code[16];
    std::snprintf(code, sizeof(code), "DP03_%04dE", n);
    std::string label = employment->category_labels[static_cast<std::size_t>(n - 33)];
    industries.emplace_back(to_count(values.at(code), code), label);
  }
  std::stable_sort(industries.begin(), industries.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i < industries.size() && i < 3; ++i) {
    p.top_industries.push_back(industries[i].second);
  }

  long long occupied = count("DP04_0045E");
  long long owner = count("DP04_0046E");
  if (occupied > 0) {
    p.homeownership_rate = 100.0 * static_cast<double>(owner) / static_cast<double>(occupied);
  }
  p.median_home_value = count("DP04_0089E");
  p.median_rent = count("DP04_0134E");

  p.validate();
  return p;
}

PartitionResult partition_age_bracket(const MarginalTable& table) {
  PartitionResult result{table, false};
  static const std::string bracket = "15 to 19 years";
  for (std::size_t i = 0; i < result.table.categories.size(); ++i) {
    if (result.table.categories[i] != bracket) continue;
    long long original = result.table.counts[i];
    // Uniform within the 5-year bracket: two of five years are adult.
    long long adult_share = static_cast<long long>(std::floor(0.4 * static_cast<double>(original) + 0.5));
    result.table.categories[i] = "18 to 19 years";
    result.table.counts[i] = adult_share;
    result.table.total -= original - adult_share;
    result.partitioned = true;
    result.table.validate();
    return result;
  }
  return result;
}

MarginalTable combine_marital_tables(const MarginalTable& male, const MarginalTable& female) {
  if (male.categories != female.categories) {
    throw DomainError("per-sex marital tables disagree on categories");
  }
  MarginalTable combined;
  combined.dimension_name = kMaritalStatus;
  combined.categories = male.categories;
  for (std::size_t i = 0; i < male.counts.size(); ++i) {
    combined.counts.push_back(male.counts[i] + female.counts[i]);
  }
  combined.total = male.total + female.total;
  combined.validate();
  return combined;
}

std::string marginals_to_json(const std::vector<MarginalTable>& tables) {
  json out = json::array();
  for (const auto& t : tables) {
    out.push_back({{"dimension", t.dimension_name},
                   {"categories", t.categories},
                   {"counts", t.counts},
                   {"total", t.total}});
  }
  return json{{"tables", out}}.dump(2) + "\n";
}

std::vector<MarginalTable> marginals_from_json(const std::string& json_text) {
  json doc = json::parse(json_text);
  std::vector<MarginalTable> tables;
  for (const auto& item : doc.at("tables")) {
    MarginalTable t;
    t.dimension_name = item.at("dimension").get<std::string>();
    t.categories = item.at("categories").get<std::vector<std::string>>();
    t.counts = item.at("counts").get<std::vector<long long>>();
    t.total = item.at("total").get<long long>();
    t.validate();
    tables.push_back(std::move(t));
  }
  return tables;
}

std::string county_profile_to_json(const CountyProfile& p) {
  json out{{"county_name", p.county_name},
           {"state_name", p.state_name},
           {"population", p.population},
           {"median_age", p.median_age},
           {"male_pct", p.male_pct},
           {"female_pct", p.female_pct},
           {"white_pct", p.white_pct},
           {"black_pct", p.black_pct},
           {"aian_pct", p.aian_pct},
           {"asian_pct", p.asian_pct},
           {"nhpi_pct", p.nhpi_pct},
           {"other_race_pct", p.other_race_pct},
           {"hispanic_pct", p.hispanic_pct},
           {"total_households", p.total_households},
           {"avg_household_size", p.avg_household_size},
           {"bachelor_or_higher_pct", p.bachelor_or_higher_pct},
           {"graduate_pct", p.graduate_pct},
           {"computer_pct", p.computer_pct},
           {"median_household_income", p.median_household_income},
           {"per_capita_income", p.per_capita_income},
           {"top_industries", p.top_industries},
           {"homeownership_rate", p.homeownership_rate},
           {"median_home_value", p.median_home_value},
           {"median_rent", p.median_rent}};
  return out.dump(2) + "\n";
}

CountyProfile county_profile_from_json(const std::string& json_text) {
  json doc = json::parse(json_text);
  CountyProfile p;
  p.county_name = doc.at("county_name").get<std::string>();
  p.state_name = doc.at("state_name").get<std::string>();
  p.population = doc.at("population").get<long long>();
  p.median_age = doc.at("median_age").get<double>();
  p.male_pct = doc.at("male_pct").get<double>();
  p.female_pct = doc.at("female_pct").get<double>();
  p.white_pct = doc.at("white_pct").get<double>();
  p.black_pct = doc.at("black_pct").get<double>();
  p.aian_pct = doc.at("aian_pct").get<double>();
  p.asian_pct = doc.at("asian_pct").get<double>();
  p.nhpi_pct = doc.at("nhpi_pct").get<double>();
  p.other_race_pct = doc.at("other_race_pct").get<double>();
  p.hispanic_pct = doc.at("hispanic_pct").get<double>();
  p.total_households = doc.at("total_households").get<long long>();
  p.avg_household_size = doc.at("avg_household_size").get<double>();
  p.bachelor_or_higher_pct = doc.at("bachelor_or_higher_pct").get<double>();
  p.graduate_pct = doc.at("graduate_pct").get<double>();
  p.computer_pct = doc.at("computer_pct").get<double>();
  p.median_household_income = doc.at("median_household_income").get<long long>();
  p.per_capita_income = doc.at("per_capita_income").get<long long>();
  p.top_industries = doc.at("top_industries").get<std::vector<std::string>>();
  p.homeownership_rate = doc.at("homeownership_rate").get<double>();
  p.median_home_value = doc.at("median_home_value").get<long long>();
  p.median_rent = doc.at("median_rent").get<long long>();
  p.validate();
  return p;
}

}  // namespace communitypoll::census
