#pragma once

// Zero-shot relevance labelling through an OpenAI-compatible chat-completion
// endpoint. Responses are cached on disk, one content-addressed file per
// (prompt, model), so interrupted runs resume without repeating requests.
// Nothing else in the library depends on this module.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrelcmp/errors.hpp"
#include "qrelcmp/trec_io.hpp"

namespace qrelcmp {

/// The endpoint could not be reached or kept failing after all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The completion contained no integer grade.
class LabelParseError : public Error {
 public:
  LabelParseError(const std::string& what, std::string raw_response)
      : Error(what), raw_response_(std::move(raw_response)) {}
  const std::string& raw_response() const noexcept { return raw_response_; }

 private:
  std::string raw_response_;
};

/// Reconstruction of a TREC-DL style zero-shot grading prompt; not the exact
/// wording of any published prompt. Override it through the config.
std::string_view default_prompt_template();

struct LabellerConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "llama3";
  std::string prompt_template{default_prompt_template()};
  int scale_max = 3;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  std::chrono::milliseconds retry_backoff{500};
  std::filesystem::path cache_dir = ".qrelcmp-cache";
  /// Requests per second across all workers; <= 0 disables the limit.
  double rate_limit = 0.0;
  unsigned concurrency = 4;
  /// Environment variable holding a bearer token, if any.
  std::string api_key_env = "QRELCMP_API_KEY";

  void validate() const;
};

struct LabelledPair {
  std::string topic_id;
  std::string doc_id;
  int grade = 0;
  std::string raw_response;
  bool cached = false;
  /// The only integer found was outside [0, scale_max] and was clamped.
  bool clamped = false;
};

/// Substitutes `{query}` and `{document}` in one pass.
std::string render_prompt(std::string_view prompt_template, std::string_view query,
                          std::string_view document);

struct GradeExtraction {
  int grade = 0;
  bool clamped = false;
};

/// First integer token within [0, scale_max]. If every integer token is out of
/// range the first one is clamped. Throws LabelParseError if there is none.
GradeExtraction extract_grade(std::string_view response, int scale_max);

/// Spaces request issue times at least 1/rate apart across all threads.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second);
  void acquire();

 private:
  std::mutex mutex_;
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
};

/// Thread-safe labeller bound to one configuration.
class Labeller {
 public:
  explicit Labeller(LabellerConfig config);
  ~Labeller();
  Labeller(const Labeller&) = delete;
  Labeller& operator=(const Labeller&) = delete;

  LabelledPair label(const std::string& topic_id, const std::string& doc_id,
                     std::string_view query_text, std::string_view doc_text);

  std::size_t network_requests() const noexcept { return requests_.load(); }
  const LabellerConfig& config() const noexcept { return config_; }

 private:
  std::string complete(const std::string& prompt);
  std::filesystem::path cache_path(const std::string& prompt) const;

  LabellerConfig config_;
  RateLimiter limiter_;
  std::atomic<std::size_t> requests_{0};
  std::optional<std::string> api_key_;
};

LabelledPair label_pair(std::string_view query_text, std::string_view doc_text,
                        const LabellerConfig& config);

struct LabelInput {
  std::string topic_id;
  std::string doc_id;
  std::string query_text;
  std::string doc_text;
};

struct LabelFailure {
  std::string topic_id;
  std::string doc_id;
  std::string message;
  std::string raw_response;
};

/// Raised when some pairs failed and failures were not to be skipped.
class LabellingError : public Error {
 public:
  explicit LabellingError(std::vector<LabelFailure> failures);
  const std::vector<LabelFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<LabelFailure> failures_;
};

struct LabelBatchOptions {
  bool skip_failures = false;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct LabelBatchResult {
  Qrels qrels{QrelsRole::candidate};
  std::vector<LabelFailure> failures;
  std::size_t network_requests = 0;
  std::size_t cache_hits = 0;
  std::size_t clamped = 0;
};

/// Labels every input pair with up to `config.concurrency` requests in flight.
LabelBatchResult label_qrels(const std::vector<LabelInput>& inputs, const LabellerConfig& config,
                             const LabelBatchOptions& options = {});

/// Pairs to label are the judged pairs of `pairs`; query texts come from a
/// `topic \t text` TSV and document texts from a `topic \t doc \t text` TSV.
/// Throws InputError when a text is missing.
std::vector<LabelInput> load_label_inputs(const Qrels& pairs,
                                          const std::filesystem::path& queries_tsv,
                                          const std::filesystem::path& docs_tsv);

}  // namespace qrelcmp
