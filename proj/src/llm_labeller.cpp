#include "qrelcmp/llm_labeller.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "qrelcmp/text.hpp"

namespace qrelcmp {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view default_prompt_template() {
  return R"(You are a search quality rater judging how well a passage answers a web search query.

Use this scale:
3 = perfectly relevant: the passage is dedicated to the query and contains the exact answer.
2 = highly relevant: the passage has some answer for the query, but it may be unclear or hidden among extraneous information.
1 = related: the passage seems related to the query but does not answer it.
0 = irrelevant: the passage has nothing to do with the query.

Query: {query}

Passage: {document}

Reply with a single integer from 0 to 3 and nothing else.)";
}

void LabellerConfig::validate() const {
  if (prompt_template.find("{query}") == std::string::npos ||
      prompt_template.find("{document}") == std::string::npos) {
    throw ConfigError("prompt template must contain both {query} and {document}");
  }
  if (scale_max < 1) throw ConfigError("grade scale maximum must be >= 1");
  if (endpoint.empty()) throw ConfigError("labeller endpoint is empty");
  if (timeout_seconds <= 0.0) throw ConfigError("request timeout must be positive");
  if (max_retries < 0) throw ConfigError("max retries must be >= 0");
  if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
}

std::string render_prompt(std::string_view prompt_template, std::string_view query,
                          std::string_view document) {
  static constexpr std::string_view kQuery = "{query}";
  static constexpr std::string_view kDocument = "{document}";
  std::string out;
  out.reserve(prompt_template.size() + query.size() + document.size());
  std::size_t i = 0;
  while (i < prompt_template.size()) {
    const auto rest = prompt_template.substr(i);
    if (rest.starts_with(kQuery)) {
      out += query;
      i += kQuery.size();
    } else if (rest.starts_with(kDocument)) {
      out += document;
      i += kDocument.size();
    } else {
      out.push_back(prompt_template[i++]);
    }
  }
  return out;
}

GradeExtraction extract_grade(std::string_view response, int scale_max) {
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; };
  std::optional<long long> first_out_of_range;
  std::size_t i = 0;
  while (i < response.size()) {
    if (!std::isdigit(static_cast<unsigned char>(response[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < response.size() && std::isdigit(static_cast<unsigned char>(response[j]))) ++j;
    const bool glued_before = i > 0 && is_word(response[i - 1]);
    const bool glued_after = j < response.size() && is_word(response[j]);
    if (!glued_before && !glued_after) {
      const bool negative = i > 0 && response[i - 1] == '-' && (i < 2 || !is_word(response[i - 2]));
      long long value = std::numeric_limits<long long>::max();
      std::from_chars(response.data() + i, response.data() + j, value);
      if (negative) value = -value;
      if (value >= 0 && value <= scale_max) return {static_cast<int>(value), false};
      if (!first_out_of_range) first_out_of_range = value;
    }
    i = j;
  }
  if (first_out_of_range) {
    return {static_cast<int>(std::clamp<long long>(*first_out_of_range, 0, scale_max)), true};
  }
  throw LabelParseError("no integer grade in response", std::string(response));
}

RateLimiter::RateLimiter(double requests_per_second) {
  if (requests_per_second > 0.0) {
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / requests_per_second));
  }
}

void RateLimiter::acquire() {
  if (interval_ == std::chrono::steady_clock::duration::zero()) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    slot = std::max(std::chrono::steady_clock::now(), next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

namespace {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

Labeller::Labeller(LabellerConfig config) : config_(std::move(config)), limiter_(config_.rate_limit) {
  config_.validate();
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
      api_key_ = key;
    }
  }
}

Labeller::~Labeller() = default;

fs::path Labeller::cache_path(const std::string& prompt) const {
  const auto key = sha256_hex(config_.model + '\0' + prompt);
  return config_.cache_dir / key.substr(0, 2) / (key + ".json");
}

std::string Labeller::complete(const std::string& prompt) {
  const auto endpoint = split_endpoint(config_.endpoint);
  json body = {{"model", config_.model},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", 0}};
  const std::string payload = body.dump();

  httplib::Client client(endpoint.scheme_host_port);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * (1 << std::min(attempt - 1, 6)));
    limiter_.acquire();
    ++requests_;
    auto res = client.Post(endpoint.path, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      auto reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("malformed completion: ") + e.what();
    }
  }
  throw TransportError("request to " + config_.endpoint + " failed after " +
                       std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

LabelledPair Labeller::label(const std::string& topic_id, const std::string& doc_id,
                             std::string_view query_text, std::string_view doc_text) {
  if (query_text.empty() || doc_text.empty()) {
    throw ValidationError("empty query or document text for (" + topic_id + ", " + doc_id + ")");
  }
  const auto prompt = render_prompt(config_.prompt_template, query_text, doc_text);
  const auto path = cache_path(prompt);

  LabelledPair pair{topic_id, doc_id, 0, {}, false, false};
  if (fs::exists(path)) {
    try {
      auto entry = json::parse(text::read_file(path));
      pair.raw_response = entry.at("response").get<std::string>();
      pair.cached = true;
    } catch (const json::exception&) {
      // unreadable cache entry: fetch again and overwrite it
    }
  }
  if (!pair.cached) {
    pair.raw_response = complete(prompt);
    fs::create_directories(path.parent_path());
    json entry = {{"model", config_.model}, {"response", pair.raw_response}};
    text::write_file_atomic(path, entry.dump() + "\n");
  }
  const auto grade = extract_grade(pair.raw_response, config_.scale_max);
  pair.grade = grade.grade;
  pair.clamped = grade.clamped;
  return pair;
}

LabelledPair label_pair(std::string_view query_text, std::string_view doc_text,
                        const LabellerConfig& config) {
  Labeller labeller(config);
  return labeller.label("", "", query_text, doc_text);
}

LabellingError::LabellingError(std::vector<LabelFailure> failures)
    : Error(std::to_string(failures.size()) + " pair(s) failed to label" +
            (failures.empty() ? std::string()
                              : "; first: (" + failures.front().topic_id + ", " +
                                    failures.front().doc_id + "): " + failures.front().message)),
      failures_(std::move(failures)) {}

LabelBatchResult label_qrels(const std::vector<LabelInput>& inputs, const LabellerConfig& config,
                             const LabelBatchOptions& options) {
  LabelBatchResult result;
  result.qrels = Qrels(QrelsRole::candidate, config.scale_max);
  {
    Qrels universe(QrelsRole::candidate, 0);
    for (const auto& in : inputs) universe.add(in.topic_id, in.doc_id, 0);
  }
  if (inputs.empty()) return result;

  Labeller labeller(config);
  std::vector<std::optional<LabelledPair>> labelled(inputs.size());
  std::vector<std::optional<LabelFailure>> failed(inputs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      const auto& in = inputs[i];
      try {
        labelled[i] = labeller.label(in.topic_id, in.doc_id, in.query_text, in.doc_text);
      } catch (const LabelParseError& e) {
        failed[i] = LabelFailure{in.topic_id, in.doc_id, e.what(), e.raw_response()};
      } catch (const Error& e) {
        failed[i] = LabelFailure{in.topic_id, in.doc_id, e.what(), {}};
      }
      const std::size_t finished = ++done;
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(finished, inputs.size());
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const unsigned n = std::min<std::size_t>(config.concurrency, inputs.size());
    for (unsigned t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
  }

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (failed[i]) {
      result.failures.push_back(std::move(*failed[i]));
      continue;
    }
    const auto& pair = *labelled[i];
    result.cache_hits += pair.cached;
    result.clamped += pair.clamped;
    result.qrels.add(pair.topic_id, pair.doc_id, pair.grade);
  }
  result.network_requests = labeller.network_requests();
  if (!result.failures.empty() && !options.skip_failures) throw LabellingError(result.failures);
  return result;
}

namespace {

std::map<std::string, std::string> read_query_tsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read queries file: " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

std::map<std::pair<std::string, std::string>, std::string> read_doc_tsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read documents file: " + path.string());
  std::map<std::pair<std::string, std::string>, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t1 = line.find('\t');
    if (t1 == std::string::npos) continue;
    const auto t2 = line.find('\t', t1 + 1);
    if (t2 == std::string::npos) continue;
    out[{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1)}] = line.substr(t2 + 1);
  }
  return out;
}

}  // namespace

std::vector<LabelInput> load_label_inputs(const Qrels& pairs, const fs::path& queries_tsv,
                                          const fs::path& docs_tsv) {
  const auto queries = read_query_tsv(queries_tsv);
  const auto docs = read_doc_tsv(docs_tsv);
  std::vector<LabelInput> inputs;
  inputs.reserve(pairs.size());
  for (const auto& [topic, judgments] : pairs.topics()) {
    auto q = queries.find(topic);
    if (q == queries.end()) throw InputError("no query text for topic " + topic);
    for (const auto& [doc, grade] : judgments) {
      auto d = docs.find({topic, doc});
      if (d == docs.end()) {
        throw InputError("no document text for (" + topic + ", " + doc + ")");
      }
      inputs.push_back(LabelInput{topic, doc, q->second, d->second});
    }
  }
  return inputs;
}

}  // namespace qrelcmp
