#include "qrelcmp/report.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "qrelcmp/errors.hpp"
#include "qrelcmp/parallel.hpp"
#include "qrelcmp/text.hpp"

namespace qrelcmp {

namespace fs = std::filesystem;

namespace {

std::string num(double v, int decimals) {
  return decimals < 0 ? text::format_shortest(v) : text::format_fixed(v, decimals);
}

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory: " + dir.string());
}

Qrels load_qrels(const fs::path& path, QrelsRole role, int max_grade) {
  if (!fs::is_regular_file(path)) throw InputError("qrels file not found: " + path.string());
  return parse_qrels_file(path, {role, max_grade}).qrels;
}

}  // namespace

RunSet load_runs(const RunSource& source) { return load_run_dir(source.dir, source.options); }

GroundTruthEvaluation evaluate_ground_truth(const RunSet& runs, const Qrels& gt,
                                            const PipelineOptions& options) {
  auto sig_config = options.sig;
  sig_config.workers = options.workers;
  auto scores = score_matrix(runs, gt, options.measure);
  auto sig = tukey_hsd_pvalues(scores, sig_config);
  auto means = mean_scores(scores);
  return {std::move(scores), std::move(sig), std::move(means)};
}

Comparison compare_qrels(const RunSet& runs, const GroundTruthEvaluation& gt_eval,
                         const Qrels& gt, const Qrels& cand, const PipelineOptions& options) {
  auto sig_config = options.sig;
  sig_config.workers = options.workers;
  auto cand_scores = score_matrix(runs, cand, options.measure);
  auto cand_sig = tukey_hsd_pvalues(cand_scores, sig_config);
  auto means_cand = mean_scores(cand_scores);
  auto report = full_report(gt_eval.sig, cand_sig, gt, cand, gt_eval.means, means_cand,
                            options.kappa);
  return Comparison{gt_eval.scores, std::move(cand_scores), gt_eval.sig, std::move(cand_sig),
                    gt_eval.means, std::move(means_cand), std::move(report)};
}

Comparison compare_qrels(const RunSet& runs, const Qrels& gt, const Qrels& cand,
                         const PipelineOptions& options) {
  return compare_qrels(runs, evaluate_ground_truth(runs, gt, options), gt, cand, options);
}

std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::TP: return "TP";
    case ErrorClass::TN: return "TN";
    case ErrorClass::FP: return "FP";
    case ErrorClass::FN: return "FN";
  }
  return "?";
}

std::string pairs_csv(const Comparison& cmp, int decimals) {
  std::ostringstream out;
  out << "system_a,system_b,mean_gt_a,mean_gt_b,mean_cand_a,mean_cand_b,p_gt,p_cand,sig_gt,"
         "sig_cand,class\n";
  const auto& tags = cmp.gt_sig.system_tags();
  for (const auto& pair : cmp.gt_sig.pairs()) {
    const auto& a = tags[pair.a];
    const auto& b = tags[pair.b];
    const auto ca = *cmp.cand_sig.index_of(a);
    const auto cb = *cmp.cand_sig.index_of(b);
    const bool sig_gt = cmp.gt_sig.significant(pair.a, pair.b);
    const bool sig_cand = cmp.cand_sig.significant(ca, cb);
    const ErrorClass cls = sig_gt ? (sig_cand ? ErrorClass::TP : ErrorClass::FN)
                                  : (sig_cand ? ErrorClass::FP : ErrorClass::TN);
    out << text::csv_field(a) << ',' << text::csv_field(b) << ','
        << num(cmp.means_gt.at(a), decimals) << ',' << num(cmp.means_gt.at(b), decimals) << ','
        << num(cmp.means_cand.at(a), decimals) << ',' << num(cmp.means_cand.at(b), decimals)
        << ',' << num(cmp.gt_sig.p_value(pair.a, pair.b), decimals) << ','
        << num(cmp.cand_sig.p_value(ca, cb), decimals) << ',' << (sig_gt ? "true" : "false")
        << ',' << (sig_cand ? "true" : "false") << ',' << to_string(cls) << '\n';
  }
  return out.str();
}

Comparison run_compare(const CompareRequest& request, const PipelineOptions& options) {
  auto gt = load_qrels(request.gt_qrels, QrelsRole::ground_truth, options.max_grade);
  auto cand = load_qrels(request.cand_qrels, QrelsRole::candidate, options.max_grade);
  auto runs = load_runs(request.runs);
  auto cmp = compare_qrels(runs, gt, cand, options);

  ensure_out_dir(request.out_dir);
  text::write_file_atomic(request.out_dir / "report.csv",
                          report_csv_header() + "\n" +
                              report_csv_row(cmp.report, request.labels, options.decimals) + "\n");
  text::write_file_atomic(request.out_dir / "report.json", report_json(cmp.report, request.labels));
  text::write_file_atomic(request.out_dir / "pairs.csv", pairs_csv(cmp, options.decimals));
  return cmp;
}

Rate metric_value(const DiscrimReport& r, std::string_view metric) {
  if (metric == "kappa") return r.kappa.value;
  if (metric == "tau") return r.tau;
  if (metric == "delta_sens") return r.delta_sens;
  if (metric == "p1") return r.p1;
  if (metric == "r1") return r.r1;
  if (metric == "p2") return r.p2;
  if (metric == "r2") return r.r2;
  if (metric == "bac") return r.bac;
  if (metric == "mcc") return r.mcc.value;
  if (metric == "tp") return static_cast<double>(r.counts.tp);
  if (metric == "tn") return static_cast<double>(r.counts.tn);
  if (metric == "fp") return static_cast<double>(r.counts.fp);
  if (metric == "fn") return static_cast<double>(r.counts.fn);
  throw ConfigError("unknown metric '" + std::string(metric) + "'");
}

std::vector<FractionSummary> summarize_sweep(const std::vector<SweepCell>& cells,
                                             const std::vector<double>& fractions) {
  std::vector<FractionSummary> summaries;
  for (double f : fractions) {
    FractionSummary summary{f, {}};
    for (auto metric : kSweepMetrics) {
      std::vector<double> values;
      for (const auto& cell : cells) {
        if (cell.fraction != f) continue;
        if (auto v = metric_value(cell.report, metric)) values.push_back(*v);
      }
      MetricSummary s;
      s.defined = values.size();
      if (!values.empty()) {
        double sum = 0.0;
        for (double v : values) sum += v;
        s.mean = sum / static_cast<double>(values.size());
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.variance = sq / static_cast<double>(values.size());
      }
      summary.metrics.emplace(std::string(metric), s);
    }
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

SweepResult sweep(const RunSet& runs, const Qrels& gt, const SweepSpec& spec,
                  const PipelineOptions& options) {
  if (spec.fractions.empty()) throw ConfigError("sweep needs at least one fraction");
  if (spec.repetitions < 1) throw ConfigError("sweep needs at least one repetition");
  for (double f : spec.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("sweep fraction outside [0,1]: " + text::format_shortest(f));
  }
  const auto gt_eval = evaluate_ground_truth(runs, gt, options);

  SweepResult result;
  result.fractions = spec.fractions;
  result.repetitions = spec.repetitions;
  result.cells.resize(spec.fractions.size() * spec.repetitions);

  PipelineOptions cell_options = options;
  cell_options.workers = 1;
  parallel_chunks(result.cells.size(), options.workers,
                  [&](std::size_t begin, std::size_t end, std::size_t) {
                    for (std::size_t i = begin; i < end; ++i) {
                      const double f = spec.fractions[i / spec.repetitions];
                      const std::size_t rep = i % spec.repetitions;
                      SamplingConfig sampling{f, spec.repetitions, spec.seed,
                                              spec.relevant_threshold, spec.stratified};
                      auto cand = percentage_sample(gt, sampling, rep);
                      auto cmp = compare_qrels(runs, gt_eval, gt, cand, cell_options);
                      result.cells[i] = SweepCell{f, rep, std::move(cmp.report)};
                    }
                  });
  result.summaries = summarize_sweep(result.cells, result.fractions);
  return result;
}

std::string sweep_csv(const SweepResult& result, int decimals) {
  std::ostringstream out;
  out << "fraction,repetition";
  for (auto metric : kSweepMetrics) out << ',' << metric;
  out << ",sens_cand\n";
  for (const auto& cell : result.cells) {
    out << text::format_shortest(cell.fraction) << ',' << cell.repetition;
    for (auto metric : kSweepMetrics) {
      auto v = metric_value(cell.report, metric);
      const bool count = metric == "tp" || metric == "tn" || metric == "fp" || metric == "fn";
      out << ',' << (count ? std::to_string(static_cast<std::uint64_t>(*v)) : format_rate(v, decimals));
    }
    out << ',' << num(cell.report.sens_cand, decimals) << '\n';
  }
  return out.str();
}

std::string sweep_summary_csv(const SweepResult& result, int decimals) {
  std::ostringstream out;
  out << "fraction,metric,mean,variance,defined\n";
  for (const auto& summary : result.summaries) {
    for (auto metric : kSweepMetrics) {
      const auto& s = summary.metrics.find(metric)->second;
      out << text::format_shortest(summary.fraction) << ',' << metric << ',';
      if (s.defined == 0) {
        out << "undefined,undefined";
      } else {
        out << num(s.mean, decimals) << ',' << num(s.variance, decimals < 0 ? -1 : decimals + 2);
      }
      out << ',' << s.defined << '\n';
    }
  }
  return out.str();
}

SweepResult run_sweep(const SweepRequest& request, const PipelineOptions& options) {
  auto gt = load_qrels(request.gt_qrels, QrelsRole::ground_truth, options.max_grade);
  auto runs = load_runs(request.runs);
  auto result = sweep(runs, gt, request.spec, options);
  ensure_out_dir(request.out_dir);
  text::write_file_atomic(request.out_dir / "sweep.csv", sweep_csv(result, options.decimals));
  text::write_file_atomic(request.out_dir / "sweep_summary.csv",
                          sweep_summary_csv(result, options.decimals));
  return result;
}

ScoreMatrix run_evaluate(const RunSource& runs, const fs::path& qrels, const fs::path& out_dir,
                         const PipelineOptions& options) {
  auto q = load_qrels(qrels, QrelsRole::ground_truth, options.max_grade);
  auto matrix = score_matrix(load_runs(runs), q, options.measure);
  ensure_out_dir(out_dir);
  std::ostringstream csv;
  write_score_csv(matrix, csv);
  text::write_file_atomic(out_dir / "scores.csv", csv.str());
  return matrix;
}

std::string generated_qrels_name(std::string_view method, std::string_view param,
                                 std::size_t repetition) {
  std::string name(method);
  name += '_';
  for (char c : param) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    name.push_back(safe ? c : '-');
  }
  name += '_' + std::to_string(repetition) + ".qrels";
  return name;
}

std::vector<fs::path> generate_sampled(const Qrels& gt, const SamplingConfig& config,
                                       const fs::path& out_dir) {
  config.validate();
  ensure_out_dir(out_dir);
  std::vector<fs::path> written;
  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    auto path = out_dir / generated_qrels_name("sample", text::format_shortest(config.fraction), rep);
    text::write_file_atomic(path, serialize_qrels(percentage_sample(gt, config, rep)));
    written.push_back(std::move(path));
  }
  return written;
}

GeneratedPopularity generate_popularity(const Qrels& gt, const RunSet& runs,
                                        const PopularityConfig& config, const fs::path& out_dir) {
  auto result = popularity_biased(gt, runs, config);
  ensure_out_dir(out_dir);
  auto path = out_dir / generated_qrels_name("popularity", "d" + std::to_string(config.depth), 0);
  text::write_file_atomic(path, serialize_qrels(result.qrels));
  return {std::move(path), std::move(result.uncovered_topics)};
}

GeneratedLlm generate_llm(const std::vector<LabelInput>& inputs, const LabellerConfig& config,
                          const LabelBatchOptions& batch_options, const fs::path& out_dir) {
  auto batch = label_qrels(inputs, config, batch_options);
  ensure_out_dir(out_dir);
  auto path = out_dir / generated_qrels_name("llm", config.model, 0);
  text::write_file_atomic(path, serialize_qrels(batch.qrels));
  return {std::move(path), std::move(batch)};
}

}  // namespace qrelcmp
