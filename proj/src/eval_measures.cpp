#include "qrelcmp/eval_measures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <set>

#include "qrelcmp/errors.hpp"
#include "qrelcmp/text.hpp"

namespace qrelcmp {

void MeasureSpec::validate() const {
  if (cutoff < 1) throw ConfigError("nDCG cutoff must be >= 1, got " + std::to_string(cutoff));
}

double gain_value(int grade, Gain gain) {
  if (grade <= 0) return 0.0;
  return gain == Gain::linear ? static_cast<double>(grade) : std::exp2(grade) - 1.0;
}

namespace {

double discount(std::size_t rank) { return std::log2(static_cast<double>(rank) + 1.0); }

double ideal_dcg(const TopicJudgments& judgments, const MeasureSpec& spec) {
  std::vector<int> grades;
  grades.reserve(judgments.size());
  for (const auto& [doc, grade] : judgments) {
    if (grade > 0) grades.push_back(grade);
  }
  std::sort(grades.begin(), grades.end(), std::greater<>());
  const std::size_t depth = std::min<std::size_t>(grades.size(), spec.cutoff);
  double idcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) idcg += gain_value(grades[i], spec.gain) / discount(i + 1);
  return idcg;
}

template <class DocIdOf>
double ndcg_impl(std::size_t length, DocIdOf doc_id_of, const TopicJudgments& judgments,
                 const MeasureSpec& spec) {
  const double idcg = ideal_dcg(judgments, spec);
  if (idcg <= 0.0) return 0.0;
  const std::size_t depth = std::min<std::size_t>(length, spec.cutoff);
  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = judgments.find(doc_id_of(i));
    if (it != judgments.end()) dcg += gain_value(it->second, spec.gain) / discount(i + 1);
  }
  return std::clamp(dcg / idcg, 0.0, 1.0);
}

}  // namespace

double ndcg_at_k(std::span<const RankedDoc> ranking, const TopicJudgments& judgments,
                 const MeasureSpec& spec) {
  return ndcg_impl(
      ranking.size(), [&](std::size_t i) -> const std::string& { return ranking[i].doc_id; },
      judgments, spec);
}

double ndcg_at_k(std::span<const std::string> ranking, const TopicJudgments& judgments,
                 const MeasureSpec& spec) {
  return ndcg_impl(
      ranking.size(), [&](std::size_t i) -> const std::string& { return ranking[i]; }, judgments,
      spec);
}

ScoreMatrix::ScoreMatrix(std::vector<std::string> system_tags, std::vector<std::string> topic_ids,
                         std::vector<double> values)
    : system_tags_(std::move(system_tags)),
      topic_ids_(std::move(topic_ids)),
      values_(std::move(values)) {
  if (values_.size() != system_tags_.size() * topic_ids_.size()) {
    throw ValidationError("score matrix has " + std::to_string(values_.size()) +
                          " values for a " + std::to_string(system_tags_.size()) + "x" +
                          std::to_string(topic_ids_.size()) + " shape");
  }
  if (std::set<std::string>(system_tags_.begin(), system_tags_.end()).size() !=
      system_tags_.size()) {
    throw ValidationError("duplicate system tag in score matrix");
  }
  if (std::set<std::string>(topic_ids_.begin(), topic_ids_.end()).size() != topic_ids_.size()) {
    throw ValidationError("duplicate topic id in score matrix");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("score outside [0,1] in score matrix");
  }
}

double ScoreMatrix::row_mean(std::size_t system) const noexcept {
  if (topic_ids_.empty()) return 0.0;
  double sum = 0.0;
  for (double v : row(system)) sum += v;
  return sum / static_cast<double>(topic_ids_.size());
}

std::vector<double> ScoreMatrix::row_means() const {
  std::vector<double> means(systems());
  for (std::size_t s = 0; s < systems(); ++s) means[s] = row_mean(s);
  return means;
}

ScoreMatrix score_matrix(const RunSet& runs, const Qrels& qrels, const MeasureSpec& spec) {
  spec.validate();
  if (runs.empty()) throw ConfigError("no runs to evaluate");
  if (qrels.empty()) throw ConfigError("qrels are empty");

  bool overlap = false;
  for (const auto& [tag, run] : runs.runs()) {
    for (const auto& [topic, ranking] : run.topics) {
      if (qrels.topic(topic) != nullptr) {
        overlap = true;
        break;
      }
    }
    if (overlap) break;
  }
  if (!overlap) throw ConfigError("no topic appears in both the runs and the qrels");

  auto tags = runs.system_tags();
  auto topics = qrels.topic_ids();
  std::vector<double> values(tags.size() * topics.size(), 0.0);
  for (std::size_t s = 0; s < tags.size(); ++s) {
    const Run& run = *runs.find(tags[s]);
    for (std::size_t t = 0; t < topics.size(); ++t) {
      auto ranking = run.topics.find(topics[t]);
      if (ranking == run.topics.end()) continue;
      values[s * topics.size() + t] = ndcg_at_k(ranking->second, *qrels.topic(topics[t]), spec);
    }
  }
  return ScoreMatrix(std::move(tags), std::move(topics), std::move(values));
}

SystemMeans mean_scores(const ScoreMatrix& matrix) {
  SystemMeans means;
  for (std::size_t s = 0; s < matrix.systems(); ++s) {
    means.emplace(matrix.system_tags()[s], matrix.row_mean(s));
  }
  return means;
}

void write_score_csv(const ScoreMatrix& matrix, std::ostream& out) {
  out << "system";
  for (const auto& topic : matrix.topic_ids()) out << ',' << text::csv_field(topic);
  out << '\n';
  for (std::size_t s = 0; s < matrix.systems(); ++s) {
    out << text::csv_field(matrix.system_tags()[s]);
    for (double v : matrix.row(s)) out << ',' << text::format_fixed(v, 6);
    out << '\n';
  }
}

}  // namespace qrelcmp
