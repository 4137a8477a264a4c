#include "communitypoll/poll/engine.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/common/rng.hpp"
#include "communitypoll/survey/prompts.hpp"

namespace communitypoll::poll {

using nlohmann::json;

std::string agent_custom_id(std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "agent-%06zu", index);
  return std::string(buf);
}

namespace {

// First top-level JSON object in the text, tolerant of fences and prose.
std::optional<std::string> extract_json_object(const std::string& text) {
  std::size_t start = text.find('{');
  if (start == std::string::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

struct AgentSlot {
  std::size_t index = 0;
  ProviderRequest request;
  SurveyResponse response;
  std::vector<ProviderResult> attempts;
  bool settled = false;
};

void append_lines(const std::optional<std::filesystem::path>& path, const std::string& text) {
  if (!path) return;
  std::filesystem::create_directories(path->parent_path().empty() ? "." : path->parent_path());
  std::ofstream out(*path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot append to " + path->string());
  out << text;
}

std::string raw_result_line(const ProviderResult& result, int attempt) {
  json line{{"custom_id", result.custom_id},
            {"status", status_name(result.status)},
            {"raw_text", result.raw_text},
            {"input_tokens", result.input_tokens},
            {"output_tokens", result.output_tokens},
            {"cost_usd", result.cost_usd},
            {"attempt", attempt}};
  return line.dump() + "\n";
}

json answer_to_json(const survey::NormalizedAnswer& answer) {
  json a{{"selected", answer.selected}};
  if (answer.other_text) a["other_text"] = *answer.other_text;
  if (answer.free_text) a["free_text"] = *answer.free_text;
  return a;
}

survey::NormalizedAnswer answer_from_json(const std::string& question_id, const json& a) {
  survey::NormalizedAnswer answer;
  answer.question_id = question_id;
  answer.selected = a.at("selected").get<std::vector<std::string>>();
  if (a.contains("other_text")) answer.other_text = a.at("other_text").get<std::string>();
  if (a.contains("free_text")) answer.free_text = a.at("free_text").get<std::string>();
  return answer;
}

class Backoff {
 public:
  Backoff(double base_ms, double jitter, std::uint64_t seed)
      : base_ms_(base_ms), jitter_(jitter), rng_(seed) {}

  void wait(int attempt) {
    double factor = std::pow(2.0, attempt);
    double jitter = 1.0 + jitter_ * canonical(rng_);
    auto ms = static_cast<long long>(base_ms_ * factor * jitter);
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  }

 private:
  double base_ms_;
  double jitter_;
  std::mt19937_64 rng_;
};

}  // namespace

std::map<std::string, survey::NormalizedAnswer> parse_response(const std::string& raw_text,
                                                               const survey::Questionnaire& q) {
  auto object_text = extract_json_object(raw_text);
  if (!object_text) {
    throw ParseError("no JSON object found in response");
  }
  json doc;
  try {
    doc = json::parse(*object_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("response JSON malformed: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError("response JSON is not an object");
  }

  std::map<std::string, survey::NormalizedAnswer> answers;
  for (const auto& [key, value] : doc.items()) {
    const survey::Question* question = nullptr;
    for (const auto& candidate : q.questions) {
      if (candidate.id == key) {
        question = &candidate;
        break;
      }
    }
    if (!question) {
      throw ParseError("unknown answer key '" + key + "'");
    }
    if (value.is_string()) {
      answers[key] = survey::validate_answer(*question, value.get<std::string>());
    } else if (value.is_array()) {
      std::vector<std::string> items;
      for (const auto& element : value) {
        if (!element.is_string()) {
          throw ParseError("question " + key + ": array answer must hold strings");
        }
        items.push_back(element.get<std::string>());
      }
      answers[key] = survey::validate_answer(*question, items);
    } else {
      throw ParseError("question " + key + ": unsupported answer type");
    }
  }
  for (const auto& question : q.questions) {
    if (answers.find(question.id) == answers.end()) {
      throw ParseError("missing answer for question " + question.id);
    }
  }
  return answers;
}

std::vector<SurveyResponse> run_poll(const std::vector<synth::AgentProfile>& agents,
                                     const impact::RegionalContext& context,
                                     const survey::Questionnaire& q, Provider& provider,
                                     const RunPollConfig& config, PollStats* stats) {
  if (agents.empty()) throw DomainError("run_poll: no agents");
  q.validate();

  std::optional<std::filesystem::path> requests_path, raw_path, responses_path;
  if (config.run_dir) {
    std::filesystem::create_directories(*config.run_dir);
    requests_path = *config.run_dir / "requests.jsonl";
    raw_path = *config.run_dir / "raw_results.jsonl";
    responses_path = *config.run_dir / "responses.jsonl";
    std::filesystem::remove(*requests_path);
    std::filesystem::remove(*raw_path);
  }

  std::vector<AgentSlot> slots(agents.size());
  {
    std::ostringstream request_lines;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      AgentSlot& slot = slots[i];
      slot.index = i;
      slot.request.custom_id = agent_custom_id(i);
      slot.request.system_text = context.rendered_text;
      slot.request.user_text = survey::render_user_prompt(agents[i], q);
      slot.request.model_name = config.model_name;
      slot.response.agent_id = slot.request.custom_id;
      json line{{"custom_id", slot.request.custom_id},
                {"model", slot.request.model_name},
                {"system_text", slot.request.system_text},
                {"user_text", slot.request.user_text}};
      request_lines << line.dump() << "\n";
    }
    if (requests_path) write_text_file_atomic(*requests_path, request_lines.str());
  }

  Backoff backoff(config.backoff_base_ms, config.backoff_jitter, mix_seed(config.seed, 99));
  PollStats local_stats;
  local_stats.total = agents.size();

  auto wait_and_fetch = [&](const std::string& handle) -> std::vector<ProviderResult> {
    JobStatus status = provider.poll(handle);
    int waits = 0;
    while (status == JobStatus::kQueued || status == JobStatus::kRunning) {
      if (waits > 0) backoff.wait(std::min(waits, 6));
      ++waits;
      status = provider.poll(handle);
    }
    if (status == JobStatus::kFailed) {
      throw ProviderError("batch job failed: " + handle);
    }
    return provider.fetch(handle);
  };

  // Round 0 asks everyone; later rounds re-ask only the agents whose last
  // answer was invalid, with the identical prompt.
  std::vector<std::size_t> pending(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) pending[i] = i;

  for (int round = 0; round <= config.max_retries && !pending.empty(); ++round) {
    std::vector<std::vector<ProviderRequest>> batches;
    for (std::size_t off = 0; off < pending.size(); off += config.batch_size) {
      std::vector<ProviderRequest> batch;
      for (std::size_t j = off; j < pending.size() && j < off + config.batch_size; ++j) {
        batch.push_back(slots[pending[j]].request);
      }
      batches.push_back(std::move(batch));
    }

    // At most max_inflight outstanding batch jobs; collection happens in
    // submission order so results stay deterministic. A failed submit or
    // fetch re-runs the whole window batch with exponential backoff.
    std::vector<ProviderResult> round_results;
    try {
      std::size_t next = 0;
      std::vector<std::pair<std::string, std::size_t>> inflight;  // handle -> batch index
      auto drain = [&]() {
        for (const auto& [first_handle, batch_idx] : inflight) {
          std::string handle = first_handle;
          for (int attempt = 0;; ++attempt) {
            try {
              auto results = wait_and_fetch(handle);
              for (auto& r : results) round_results.push_back(std::move(r));
              break;
            } catch (const ProviderError&) {
              if (attempt + 1 >= config.provider_attempts) throw;
              backoff.wait(attempt);
              handle = provider.submit(batches[batch_idx]);
            }
          }
        }
        inflight.clear();
      };
      while (next < batches.size()) {
        std::string handle;
        for (int attempt = 0;; ++attempt) {
          try {
            handle = provider.submit(batches[next]);
            break;
          } catch (const ProviderError&) {
            if (attempt + 1 >= config.provider_attempts) throw;
            backoff.wait(attempt);
          }
        }
        inflight.emplace_back(handle, next);
        ++next;
        if (inflight.size() >= static_cast<std::size_t>(config.max_inflight)) drain();
      }
      drain();
    } catch (const ProviderError&) {
      // Persist whatever arrived before surfacing the failure.
      std::ostringstream lines;
      for (const auto& r : round_results) lines << raw_result_line(r, round);
      append_lines(raw_path, lines.str());
      throw;
    }

    std::ostringstream raw_lines;
    for (const auto& result : round_results) raw_lines << raw_result_line(result, round);
    append_lines(raw_path, raw_lines.str());

    std::vector<std::size_t> still_pending;
    std::map<std::string, const ProviderResult*> by_id;
    for (const auto& result : round_results) by_id[result.custom_id] = &result;
    for (std::size_t idx : pending) {
      AgentSlot& slot = slots[idx];
      auto it = by_id.find(slot.request.custom_id);
      if (it == by_id.end()) {
        throw ProviderError("provider dropped request " + slot.request.custom_id);
      }
      const ProviderResult& result = *it->second;
      local_stats.input_tokens += result.input_tokens;
      local_stats.output_tokens += result.output_tokens;
      local_stats.cost_usd += result.cost_usd;
      slot.response.retry_count = round;
      if (result.status != ResultStatus::kOk) {
        slot.response.error = "provider status " + status_name(result.status);
        still_pending.push_back(idx);
        continue;
      }
      try {
        slot.response.answers = parse_response(result.raw_text, q);
        slot.response.parse_status = ParseStatus::kOk;
        slot.response.error.clear();
        slot.settled = true;
      } catch (const ParseError& e) {
        slot.response.error = e.what();
        still_pending.push_back(idx);
      }
    }
    pending = std::move(still_pending);
  }

  std::vector<SurveyResponse> responses;
  responses.reserve(slots.size());
  for (auto& slot : slots) {
    if (!slot.settled) slot.response.parse_status = ParseStatus::kFailed;
    if (slot.response.parse_status == ParseStatus::kOk) {
      ++local_stats.ok;
    } else {
      ++local_stats.failed;
    }
    responses.push_back(std::move(slot.response));
  }

  if (responses_path) {
    write_text_file_atomic(*responses_path, responses_to_jsonl(responses));
  }
  if (stats) *stats = local_stats;
  return responses;
}

std::vector<SurveyResponse> reprocess_raw(const std::filesystem::path& raw_file,
                                          const survey::Questionnaire& q) {
  std::istringstream in(read_text_file(raw_file));
  std::string line;
  // Attempts per agent, in arrival order.
  std::map<std::string, std::vector<std::pair<ResultStatus, std::string>>> attempts;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json doc = json::parse(line);
    std::string id = doc.at("custom_id").get<std::string>();
    if (attempts.find(id) == attempts.end()) order.push_back(id);
    attempts[id].emplace_back(status_from_name(doc.at("status").get<std::string>()),
                              doc.at("raw_text").get<std::string>());
  }
  std::sort(order.begin(), order.end());

  std::vector<SurveyResponse> responses;
  for (const auto& id : order) {
    SurveyResponse response;
    response.agent_id = id;
    int round = 0;
    for (const auto& [status, raw] : attempts[id]) {
      response.retry_count = round++;
      if (status != ResultStatus::kOk) {
        response.error = "provider status " + status_name(status);
        continue;
      }
      try {
        response.answers = parse_response(raw, q);
        response.parse_status = ParseStatus::kOk;
        response.error.clear();
        break;
      } catch (const ParseError& e) {
        response.error = e.what();
      }
    }
    responses.push_back(std::move(response));
  }
  return responses;
}

std::string responses_to_jsonl(const std::vector<SurveyResponse>& responses) {
  std::ostringstream out;
  for (const auto& response : responses) {
    json answers = json::object();
    for (const auto& [qid, answer] : response.answers) {
      answers[qid] = answer_to_json(answer);
    }
    json line{{"agent_id", response.agent_id},
              {"parse_status", response.parse_status == ParseStatus::kOk ? "ok" : "failed"},
              {"retry_count", response.retry_count},
              {"answers", answers}};
    if (!response.error.empty()) line["error"] = response.error;
    out << line.dump() << "\n";
  }
  return out.str();
}

std::vector<SurveyResponse> responses_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<SurveyResponse> responses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json doc = json::parse(line);
    SurveyResponse response;
    response.agent_id = doc.at("agent_id").get<std::string>();
    response.parse_status =
        doc.at("parse_status").get<std::string>() == "ok" ? ParseStatus::kOk : ParseStatus::kFailed;
    response.retry_count = doc.at("retry_count").get<int>();
    if (doc.contains("error")) response.error = doc.at("error").get<std::string>();
    for (const auto& [qid, a] : doc.at("answers").items()) {
      response.answers[qid] = answer_from_json(qid, a);
    }
    responses.push_back(std::move(response));
  }
  return responses;
}

}  // namespace communitypoll::poll
