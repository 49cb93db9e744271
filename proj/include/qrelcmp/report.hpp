#pragma once

// End-to-end pipelines behind the command-line tool: compare two qrel sets,
// sweep sampling fractions, generate candidate qrels, export score matrices.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrelcmp/discrim_metrics.hpp"
#include "qrelcmp/eval_measures.hpp"
#include "qrelcmp/llm_labeller.hpp"
#include "qrelcmp/qrel_synth.hpp"
#include "qrelcmp/sig_test.hpp"
#include "qrelcmp/trec_io.hpp"

namespace qrelcmp {

struct PipelineOptions {
  MeasureSpec measure;
  SigTestConfig sig;
  KappaOptions kappa;
  /// Digits after the point in CSV output; < 0 prints full precision.
  int decimals = 4;
  int max_grade = Qrels::kDefaultMaxGrade;
  unsigned workers = 1;
};

/// Everything computed for one (ground truth, candidate) comparison.
struct Comparison {
  ScoreMatrix gt_scores;
  ScoreMatrix cand_scores;
  SignificanceSet gt_sig;
  SignificanceSet cand_sig;
  SystemMeans means_gt;
  SystemMeans means_cand;
  DiscrimReport report;
};

/// Ground-truth side of a comparison, reusable across many candidates.
struct GroundTruthEvaluation {
  ScoreMatrix scores;
  SignificanceSet sig;
  SystemMeans means;
};

GroundTruthEvaluation evaluate_ground_truth(const RunSet& runs, const Qrels& gt,
                                            const PipelineOptions& options);

Comparison compare_qrels(const RunSet& runs, const Qrels& gt, const Qrels& cand,
                         const PipelineOptions& options);
Comparison compare_qrels(const RunSet& runs, const GroundTruthEvaluation& gt_eval,
                         const Qrels& gt, const Qrels& cand, const PipelineOptions& options);

enum class ErrorClass { TP, TN, FP, FN };
std::string_view to_string(ErrorClass c);

/// Per pair: means under both qrels, p-values, significance, error class.
std::string pairs_csv(const Comparison& comparison, int decimals);

struct RunSource {
  std::filesystem::path dir;
  RunDirOptions options;
};

struct CompareRequest {
  RunSource runs;
  std::filesystem::path gt_qrels;
  std::filesystem::path cand_qrels;
  std::filesystem::path out_dir;
  ReportRowLabels labels;
};

/// Loads inputs, compares, and writes report.csv, report.json and pairs.csv.
Comparison run_compare(const CompareRequest& request, const PipelineOptions& options);

/// Metrics tracked per sweep cell, in column order.
inline constexpr std::array<std::string_view, 13> kSweepMetrics = {
    "kappa", "tau", "delta_sens", "p1", "r1", "p2", "r2", "bac", "mcc", "tp", "tn", "fp", "fn"};

Rate metric_value(const DiscrimReport& report, std::string_view metric);

struct MetricSummary {
  double mean = 0.0;
  /// Population variance over the repetitions where the metric is defined.
  double variance = 0.0;
  std::size_t defined = 0;
};

struct SweepCell {
  double fraction = 0.0;
  std::size_t repetition = 0;
  DiscrimReport report;
};

struct FractionSummary {
  double fraction = 0.0;
  std::map<std::string, MetricSummary, std::less<>> metrics;
};

struct SweepResult {
  std::vector<double> fractions;
  std::size_t repetitions = 0;
  std::vector<SweepCell> cells;  ///< fraction-major, repetition-minor
  std::vector<FractionSummary> summaries;
};

struct SweepSpec {
  std::vector<double> fractions;
  std::size_t repetitions = 10;
  std::uint64_t seed = 0;
  int relevant_threshold = 1;
  bool stratified = false;
};

/// Cells run concurrently on `options.workers` threads; results do not depend
/// on the worker count.
SweepResult sweep(const RunSet& runs, const Qrels& gt, const SweepSpec& spec,
                  const PipelineOptions& options);

std::vector<FractionSummary> summarize_sweep(const std::vector<SweepCell>& cells,
                                             const std::vector<double>& fractions);

std::string sweep_csv(const SweepResult& result, int decimals);
std::string sweep_summary_csv(const SweepResult& result, int decimals);

struct SweepRequest {
  RunSource runs;
  std::filesystem::path gt_qrels;
  std::filesystem::path out_dir;
  SweepSpec spec;
};

/// Writes sweep.csv and sweep_summary.csv.
SweepResult run_sweep(const SweepRequest& request, const PipelineOptions& options);

/// Writes scores.csv for one qrel set.
ScoreMatrix run_evaluate(const RunSource& runs, const std::filesystem::path& qrels,
                         const std::filesystem::path& out_dir, const PipelineOptions& options);

/// `<method>_<param>_<rep>.qrels`
std::string generated_qrels_name(std::string_view method, std::string_view param,
                                 std::size_t repetition);

std::vector<std::filesystem::path> generate_sampled(const Qrels& gt, const SamplingConfig& config,
                                                    const std::filesystem::path& out_dir);

struct GeneratedPopularity {
  std::filesystem::path path;
  std::vector<std::string> uncovered_topics;
};

GeneratedPopularity generate_popularity(const Qrels& gt, const RunSet& runs,
                                        const PopularityConfig& config,
                                        const std::filesystem::path& out_dir);

struct GeneratedLlm {
  std::filesystem::path path;
  LabelBatchResult batch;
};

GeneratedLlm generate_llm(const std::vector<LabelInput>& inputs, const LabellerConfig& config,
                          const LabelBatchOptions& batch_options,
                          const std::filesystem::path& out_dir);

/// Loads runs, throwing InputError naming the directory when unusable.
RunSet load_runs(const RunSource& source);

}  // namespace qrelcmp
