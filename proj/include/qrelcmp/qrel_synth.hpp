#pragma once

// Candidate qrels derived from ground truth: percentage sampling of relevant
// judgments and the popularity-biased labeller. Both keep the judged
// (topic, doc) universe of the input and only change grades.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qrelcmp/trec_io.hpp"

namespace qrelcmp {

struct SamplingConfig {
  double fraction = 1.0;
  std::size_t repetitions = 10;
  std::uint64_t master_seed = 0;
  /// Judgments with grade >= this form the relevant pool.
  int relevant_threshold = 1;
  /// Sample round(f * |R_t|) within each topic instead of one global pool.
  bool stratified = false;

  void validate() const;
};

/// Keeps exactly round(fraction * |R|) relevant judgments (uniformly, without
/// replacement) with their grades; the other relevant judgments become 0.
Qrels percentage_sample(const Qrels& gt, const SamplingConfig& config,
                        std::size_t repetition_index);

enum class PopularityFractionMode {
  per_topic_from_gt,  ///< p_t = relevant fraction of topic t
  global_from_gt,     ///< p = relevant fraction over all judgments
  explicit_value,     ///< p given in the config
};

struct PopularityConfig {
  std::size_t depth = 100;
  PopularityFractionMode mode = PopularityFractionMode::per_topic_from_gt;
  double explicit_fraction = 0.0;
  int relevant_threshold = 1;

  void validate() const;
};

struct PopularityResult {
  Qrels qrels;
  /// Judged topics that no run covers; all their labels are 0.
  std::vector<std::string> uncovered_topics;
};

/// Labels as relevant (grade 1) the ceil(p_t * N_t) judged documents of each
/// topic retrieved by the most systems within the top `depth`, ties broken by
/// doc id ascending; every other judged document gets grade 0.
PopularityResult popularity_biased(const Qrels& gt, const RunSet& runs,
                                   const PopularityConfig& config);

/// Number of documents the popularity labeller marks relevant on a topic.
std::size_t popularity_quota(double fraction, std::size_t judged);

}  // namespace qrelcmp
