#include "qrelcmp/discrim_metrics.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qrelcmp/errors.hpp"
#include "qrelcmp/text.hpp"

namespace qrelcmp {

namespace {

Rate ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string describe_difference(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end());
  std::set<std::string> sb(b.begin(), b.end());
  std::string only_a, only_b;
  for (const auto& t : sa) {
    if (!sb.contains(t)) only_a += (only_a.empty() ? "" : ", ") + t;
  }
  for (const auto& t : sb) {
    if (!sa.contains(t)) only_b += (only_b.empty() ? "" : ", ") + t;
  }
  return "only in ground truth: [" + only_a + "]; only in candidate: [" + only_b + "]";
}

}  // namespace

ConfusionCounts confusion(const SignificanceSet& gt, const SignificanceSet& cand) {
  const auto& tags = gt.system_tags();
  std::vector<std::size_t> to_cand(tags.size());
  bool same = gt.systems() == cand.systems();
  for (std::size_t i = 0; same && i < tags.size(); ++i) {
    auto idx = cand.index_of(tags[i]);
    if (!idx) {
      same = false;
    } else {
      to_cand[i] = *idx;
    }
  }
  if (!same) {
    throw ValidationError("significance sets cover different systems: " +
                          describe_difference(tags, cand.system_tags()));
  }

  ConfusionCounts c;
  for (const auto& pair : gt.pairs()) {
    const bool s_gt = gt.significant(pair.a, pair.b);
    const bool s_cand = cand.significant(to_cand[pair.a], to_cand[pair.b]);
    if (s_gt && s_cand) {
      ++c.tp;
    } else if (s_gt) {
      ++c.fn;
    } else if (s_cand) {
      ++c.fp;
    } else {
      ++c.tn;
    }
  }
  return c;
}

PrecisionRecall sig_precision_recall(const ConfusionCounts& c) {
  return {ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn)};
}

PrecisionRecall nonsig_precision_recall(const ConfusionCounts& c) {
  return {ratio(c.tn, c.tn + c.fn), ratio(c.tn, c.tn + c.fp)};
}

Rate balanced_accuracy(Rate sig_recall, Rate nonsig_recall) {
  if (!sig_recall || !nonsig_recall) return std::nullopt;
  return (*sig_recall + *nonsig_recall) / 2.0;
}

Rate balanced_accuracy(const ConfusionCounts& c) {
  return balanced_accuracy(sig_precision_recall(c).recall, nonsig_precision_recall(c).recall);
}

FlaggedValue mcc(const ConfusionCounts& c) {
  const std::uint64_t pred_pos = c.tp + c.fp;
  const std::uint64_t true_pos = c.tp + c.fn;
  const std::uint64_t true_neg = c.tn + c.fp;
  const std::uint64_t pred_neg = c.tn + c.fn;
  if (pred_pos == 0 || true_pos == 0 || true_neg == 0 || pred_neg == 0) return {0.0, true};
  using wide = long double;
  const wide num = static_cast<wide>(c.tp) * c.tn - static_cast<wide>(c.fp) * c.fn;
  const wide den = std::sqrt(static_cast<wide>(pred_pos) * true_pos * true_neg * pred_neg);
  return {static_cast<double>(num / den), false};
}

double sensitivity(const SignificanceSet& set) {
  if (set.pair_count() == 0) return 0.0;
  return static_cast<double>(set.significant_count()) / static_cast<double>(set.pair_count());
}

double delta_sensitivity(const SignificanceSet& gt, const SignificanceSet& cand) {
  if (gt.pair_count() != cand.pair_count()) {
    throw ValidationError("significance sets cover different systems: " +
                          describe_difference(gt.system_tags(), cand.system_tags()));
  }
  return std::abs(sensitivity(gt) - sensitivity(cand));
}

FlaggedValue cohen_kappa(const Qrels& gt, const Qrels& cand, const KappaOptions& options) {
  const int gt_threshold = options.threshold;
  const int cand_threshold =
      options.cand_threshold.value_or(cand.highest_grade() <= 1 ? 1 : options.threshold);

  // agreement table [gt label][cand label]
  std::uint64_t table[2][2] = {{0, 0}, {0, 0}};
  for (const auto& [topic, judgments] : gt.topics()) {
    const auto* cand_topic = cand.topic(topic);
    if (cand_topic == nullptr) continue;
    for (const auto& [doc, grade] : judgments) {
      auto it = cand_topic->find(doc);
      if (it == cand_topic->end()) continue;
      ++table[grade >= gt_threshold ? 1 : 0][it->second >= cand_threshold ? 1 : 0];
    }
  }
  const std::uint64_t n = table[0][0] + table[0][1] + table[1][0] + table[1][1];
  if (n == 0) throw ValidationError("no (topic, doc) pair is judged in both qrels");

  const double total = static_cast<double>(n);
  const double p_o = static_cast<double>(table[0][0] + table[1][1]) / total;
  double p_e = 0.0;
  for (int label = 0; label < 2; ++label) {
    const double gt_marginal = static_cast<double>(table[label][0] + table[label][1]) / total;
    const double cand_marginal = static_cast<double>(table[0][label] + table[1][label]) / total;
    p_e += gt_marginal * cand_marginal;
  }
  if (p_e >= 1.0) return {p_o >= 1.0 ? 1.0 : 0.0, true};
  return {(p_o - p_e) / (1.0 - p_e), false};
}

Rate kendall_tau(const SystemMeans& means_gt, const SystemMeans& means_cand) {
  if (means_gt.size() != means_cand.size()) {
    throw ValidationError("kendall tau needs the same systems on both sides");
  }
  std::vector<double> x, y;
  for (const auto& [tag, value] : means_gt) {
    auto it = means_cand.find(tag);
    if (it == means_cand.end()) {
      throw ValidationError("system '" + tag + "' missing from candidate means");
    }
    x.push_back(value);
    y.push_back(it->second);
  }
  if (x.size() < 2) throw ValidationError("kendall tau needs at least 2 systems");

  std::int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++ties_x;
      if (dy == 0.0) ++ties_y;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const auto n0 = static_cast<std::int64_t>(x.size() * (x.size() - 1) / 2);
  const double den = std::sqrt(static_cast<double>(n0 - ties_x) * static_cast<double>(n0 - ties_y));
  if (den == 0.0) return std::nullopt;
  return static_cast<double>(concordant - discordant) / den;
}

DiscrimReport report_from_counts(const ConfusionCounts& c) {
  DiscrimReport r;
  r.counts = c;
  r.s_gt = c.tp + c.fn;
  r.ns_gt = c.tn + c.fp;
  r.s_cand = c.tp + c.fp;
  r.total_pairs = c.total();
  auto sig = sig_precision_recall(c);
  auto nonsig = nonsig_precision_recall(c);
  r.p1 = sig.precision;
  r.r1 = sig.recall;
  r.p2 = nonsig.precision;
  r.r2 = nonsig.recall;
  r.bac = balanced_accuracy(r.r1, r.r2);
  r.mcc = mcc(c);
  return r;
}

DiscrimReport full_report(const SignificanceSet& gt_sig, const SignificanceSet& cand_sig,
                          const Qrels& gt_qrels, const Qrels& cand_qrels,
                          const SystemMeans& means_gt, const SystemMeans& means_cand,
                          const KappaOptions& kappa_options) {
  DiscrimReport r = report_from_counts(confusion(gt_sig, cand_sig));
  r.kappa = cohen_kappa(gt_qrels, cand_qrels, kappa_options);
  r.tau = kendall_tau(means_gt, means_cand);
  r.sens_gt = sensitivity(gt_sig);
  r.sens_cand = sensitivity(cand_sig);
  r.delta_sens = delta_sensitivity(gt_sig, cand_sig);
  return r;
}

std::string format_rate(const Rate& rate, int decimals) {
  if (!rate) return "undefined";
  return decimals < 0 ? text::format_shortest(*rate) : text::format_fixed(*rate, decimals);
}

std::string report_csv_header() {
  return "dataset,qrels,kappa,tau,delta_sens,p1,r1,p2,r2,bac,mcc,fp,fn,tp,tn,"
         "s_gt,ns_gt,s_cand,total_pairs,sens_gt,sens_cand,mcc_degenerate,kappa_degenerate";
}

std::string report_csv_row(const DiscrimReport& r, const ReportRowLabels& labels, int decimals) {
  auto num = [decimals](double v) { return format_rate(v, decimals); };
  std::ostringstream row;
  row << text::csv_field(labels.dataset) << ',' << text::csv_field(labels.qrels) << ','
      << num(r.kappa.value) << ',' << format_rate(r.tau, decimals) << ',' << num(r.delta_sens)
      << ',' << format_rate(r.p1, decimals) << ',' << format_rate(r.r1, decimals) << ','
      << format_rate(r.p2, decimals) << ',' << format_rate(r.r2, decimals) << ','
      << format_rate(r.bac, decimals) << ',' << num(r.mcc.value) << ',' << r.counts.fp << ','
      << r.counts.fn << ',' << r.counts.tp << ',' << r.counts.tn << ',' << r.s_gt << ','
      << r.ns_gt << ',' << r.s_cand << ',' << r.total_pairs << ',' << num(r.sens_gt) << ','
      << num(r.sens_cand) << ',' << (r.mcc.degenerate ? "true" : "false") << ','
      << (r.kappa.degenerate ? "true" : "false");
  return row.str();
}

std::string report_json(const DiscrimReport& r, const ReportRowLabels& labels) {
  auto rate = [](const Rate& v) -> nlohmann::json {
    if (!v) return nullptr;
    return *v;
  };
  nlohmann::ordered_json j;
  j["dataset"] = labels.dataset;
  j["qrels"] = labels.qrels;
  j["kappa"] = r.kappa.value;
  j["kappa_degenerate"] = r.kappa.degenerate;
  j["tau"] = rate(r.tau);
  j["delta_sens"] = r.delta_sens;
  j["sens_gt"] = r.sens_gt;
  j["sens_cand"] = r.sens_cand;
  j["p1"] = rate(r.p1);
  j["r1"] = rate(r.r1);
  j["p2"] = rate(r.p2);
  j["r2"] = rate(r.r2);
  j["bac"] = rate(r.bac);
  j["mcc"] = r.mcc.value;
  j["mcc_degenerate"] = r.mcc.degenerate;
  j["tp"] = r.counts.tp;
  j["tn"] = r.counts.tn;
  j["fp"] = r.counts.fp;
  j["fn"] = r.counts.fn;
  j["s_gt"] = r.s_gt;
  j["ns_gt"] = r.ns_gt;
  j["s_cand"] = r.s_cand;
  j["total_pairs"] = r.total_pairs;
  return j.dump(2) + "\n";
}

}  // namespace qrelcmp
