#pragma once

// Agreement between the significance outcomes of ground-truth and candidate
// qrels, treated as a binary classification of system pairs
// (significant = positive class).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "qrelcmp/eval_measures.hpp"
#include "qrelcmp/sig_test.hpp"
#include "qrelcmp/trec_io.hpp"

namespace qrelcmp {

/// A rate whose denominator may be zero; nullopt marks "undefined".
using Rate = std::optional<double>;

struct ConfusionCounts {
  std::uint64_t tp = 0;  ///< significant under both
  std::uint64_t tn = 0;  ///< non-significant under both
  std::uint64_t fp = 0;  ///< Type I: significant only under the candidate
  std::uint64_t fn = 0;  ///< Type II: significant only under the ground truth

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct PrecisionRecall {
  Rate precision;
  Rate recall;
};

/// Throws ValidationError, listing the differing tags, when the two sets do
/// not cover the same systems. Systems are matched by tag, not position.
ConfusionCounts confusion(const SignificanceSet& gt, const SignificanceSet& cand);

/// Precision and recall of significant differences: tp/(tp+fp), tp/(tp+fn).
PrecisionRecall sig_precision_recall(const ConfusionCounts& c);
/// Precision and recall of non-significant differences: tn/(tn+fn), tn/(tn+fp).
PrecisionRecall nonsig_precision_recall(const ConfusionCounts& c);

Rate balanced_accuracy(const ConfusionCounts& c);
/// Mean of the two class recalls; undefined if either is.
Rate balanced_accuracy(Rate sig_recall, Rate nonsig_recall);

struct FlaggedValue {
  double value = 0.0;
  /// Set when a degenerate denominator forced the conventional value.
  bool degenerate = false;
};

/// Matthews correlation; 0 (flagged) when any marginal is empty.
FlaggedValue mcc(const ConfusionCounts& c);

/// Fraction of all pairs that are significant.
double sensitivity(const SignificanceSet& set);
double delta_sensitivity(const SignificanceSet& gt, const SignificanceSet& cand);

struct KappaOptions {
  /// Ground-truth grades >= this are relevant.
  int threshold = 2;
  /// Threshold for the candidate labels. When unset it equals `threshold`,
  /// except for binary candidate qrels (highest grade <= 1), which use 1.
  std::optional<int> cand_threshold;
};

/// Cohen's kappa on binarized labels over the (topic, doc) pairs judged in
/// both qrels. If chance agreement is 1, kappa is 1 when observed agreement
/// is 1 and 0 otherwise, flagged. Throws ValidationError on an empty
/// intersection.
FlaggedValue cohen_kappa(const Qrels& gt, const Qrels& cand, const KappaOptions& options = {});

/// Tau-b between the rankings of systems by mean score. Undefined when either
/// ranking is entirely tied. Throws ValidationError on different system sets
/// or fewer than two systems.
Rate kendall_tau(const SystemMeans& means_gt, const SystemMeans& means_cand);

struct DiscrimReport {
  ConfusionCounts counts;
  std::uint64_t s_gt = 0;
  std::uint64_t ns_gt = 0;
  std::uint64_t s_cand = 0;
  std::uint64_t total_pairs = 0;

  Rate p1, r1;  ///< significant differences
  Rate p2, r2;  ///< non-significant differences
  Rate bac;
  FlaggedValue mcc;
  FlaggedValue kappa;
  Rate tau;
  double sens_gt = 0.0;
  double sens_cand = 0.0;
  double delta_sens = 0.0;
};

/// Report from confusion counts alone (kappa, tau and sensitivities zeroed).
DiscrimReport report_from_counts(const ConfusionCounts& c);

DiscrimReport full_report(const SignificanceSet& gt_sig, const SignificanceSet& cand_sig,
                          const Qrels& gt_qrels, const Qrels& cand_qrels,
                          const SystemMeans& means_gt, const SystemMeans& means_cand,
                          const KappaOptions& kappa_options = {});

/// Rendering of report rows. `decimals` < 0 prints full precision; undefined
/// rates print as "undefined" in CSV and null in JSON.
struct ReportRowLabels {
  std::string dataset;
  std::string qrels;
};

std::string report_csv_header();
std::string report_csv_row(const DiscrimReport& report, const ReportRowLabels& labels,
                           int decimals = 4);
std::string report_json(const DiscrimReport& report, const ReportRowLabels& labels);

std::string format_rate(const Rate& rate, int decimals = 4);

}  // namespace qrelcmp
