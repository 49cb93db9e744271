#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qrelcmp/trec_io.hpp"

namespace qrelcmp {

enum class Gain {
  linear,       ///< g(r) = r
  exponential,  ///< g(r) = 2^r - 1
};

struct MeasureSpec {
  int cutoff = 10;
  Gain gain = Gain::linear;

  /// Throws ConfigError unless cutoff >= 1.
  void validate() const;
};

double gain_value(int grade, Gain gain);

/// nDCG@k of a normalized ranking. Unjudged documents have grade 0; the ideal
/// DCG uses every judged document of the topic. Returns 0 when no document of
/// the topic has a positive grade.
double ndcg_at_k(std::span<const RankedDoc> ranking, const TopicJudgments& judgments,
                 const MeasureSpec& spec);
double ndcg_at_k(std::span<const std::string> ranking, const TopicJudgments& judgments,
                 const MeasureSpec& spec);

/// Systems x topics table of per-topic scores, row-major.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  /// Throws ValidationError on duplicate labels or out-of-range values.
  ScoreMatrix(std::vector<std::string> system_tags, std::vector<std::string> topic_ids,
              std::vector<double> values);

  std::size_t systems() const noexcept { return system_tags_.size(); }
  std::size_t topics() const noexcept { return topic_ids_.size(); }
  const std::vector<std::string>& system_tags() const noexcept { return system_tags_; }
  const std::vector<std::string>& topic_ids() const noexcept { return topic_ids_; }

  double at(std::size_t system, std::size_t topic) const noexcept {
    return values_[system * topic_ids_.size() + topic];
  }
  std::span<const double> row(std::size_t system) const noexcept {
    return {values_.data() + system * topic_ids_.size(), topic_ids_.size()};
  }
  /// Left-to-right mean of one row.
  double row_mean(std::size_t system) const noexcept;
  std::vector<double> row_means() const;

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

 private:
  std::vector<std::string> system_tags_;
  std::vector<std::string> topic_ids_;
  std::vector<double> values_;
};

/// Scores every system of `runs` on every topic of `qrels`. A system without a
/// ranking for a topic scores 0 on it. Throws ConfigError when no run topic is
/// judged.
ScoreMatrix score_matrix(const RunSet& runs, const Qrels& qrels, const MeasureSpec& spec);

using SystemMeans = std::map<std::string, double>;

SystemMeans mean_scores(const ScoreMatrix& matrix);

/// Header `system,<topic ids...>`, one row per system, 6 decimals.
void write_score_csv(const ScoreMatrix& matrix, std::ostream& out);

}  // namespace qrelcmp
