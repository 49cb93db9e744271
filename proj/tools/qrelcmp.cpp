// qrelcmp: compare candidate qrels against ground truth by the agreement of
// their pairwise significance-test outcomes.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrelcmp/errors.hpp"
#include "qrelcmp/plot.hpp"
#include "qrelcmp/report.hpp"
#include "qrelcmp/text.hpp"

namespace fs = std::filesystem;
using namespace qrelcmp;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string runs_dir;
  bool tag_from_filename = false;
  std::string run_list;
  std::string out_dir = ".";
  double alpha = 0.05;
  std::uint64_t permutations = 10'000;
  std::uint64_t seed = 0;
  std::string mode = "sampled";
  std::uint64_t exhaustive_cap = 10'000'000;
  bool inclusive = false;
  int k = 10;
  std::string gain = "linear";
  int kappa_threshold = 2;
  int kappa_cand_threshold = -1;
  std::string precision = "4";
  unsigned workers = 1;
  int max_grade = Qrels::kDefaultMaxGrade;
};

void add_run_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--runs", f.runs_dir, "Directory with one TREC run file per system")->required();
  cmd->add_flag("--tag-from-filename", f.tag_from_filename,
                "Use the file name instead of the run tag column as system id");
  cmd->add_option("--run-list", f.run_list, "File listing the run files to use, one per line");
}

void add_pipeline_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--alpha", f.alpha, "Significance level")->capture_default_str();
  cmd->add_option("--permutations", f.permutations, "Permutations B of the randomised test")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  cmd->add_option("--mode", f.mode, "Null distribution: sampled or exhaustive")
      ->check(CLI::IsMember({"sampled", "exhaustive"}))
      ->capture_default_str();
  cmd->add_option("--exhaustive-cap", f.exhaustive_cap, "Largest (m!)^n enumerated")
      ->capture_default_str();
  cmd->add_flag("--inclusive", f.inclusive, "Significant when p <= alpha instead of p < alpha");
  cmd->add_option("--k", f.k, "nDCG cutoff")->capture_default_str();
  cmd->add_option("--gain", f.gain, "Gain function: linear or exponential")
      ->check(CLI::IsMember({"linear", "exponential"}))
      ->capture_default_str();
  cmd->add_option("--kappa-threshold", f.kappa_threshold,
                  "Ground-truth grade at or above which a label counts as relevant for kappa")
      ->capture_default_str();
  cmd->add_option("--kappa-cand-threshold", f.kappa_cand_threshold,
                  "Candidate threshold for kappa (default: same, or 1 for binary candidates)");
  cmd->add_option("--precision", f.precision, "Decimals in CSV output, or 'full'")
      ->capture_default_str();
  cmd->add_option("--workers", f.workers, "Worker threads")->capture_default_str();
  cmd->add_option("--max-grade", f.max_grade, "Largest admissible relevance grade")
      ->capture_default_str();
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->capture_default_str();
}

RunSource run_source(const CommonFlags& f) {
  RunSource src{f.runs_dir, {}};
  src.options.tag_from_filename = f.tag_from_filename;
  if (!f.run_list.empty()) {
    std::ifstream in(f.run_list);
    if (!in) throw InputError("cannot read run list: " + f.run_list);
    std::vector<std::string> names;
    for (std::string line; std::getline(in, line);) {
      auto fields = text::split_fields(line);
      if (!fields.empty()) names.emplace_back(fields.front());
    }
    src.options.run_list = std::move(names);
  }
  return src;
}

PipelineOptions pipeline_options(const CommonFlags& f) {
  PipelineOptions o;
  o.measure.cutoff = f.k;
  o.measure.gain = f.gain == "exponential" ? Gain::exponential : Gain::linear;
  o.sig.alpha = f.alpha;
  o.sig.permutations = f.permutations;
  o.sig.master_seed = f.seed;
  o.sig.mode = f.mode == "exhaustive" ? TestMode::exhaustive : TestMode::sampled;
  o.sig.exhaustive_cap = f.exhaustive_cap;
  o.sig.inclusive_threshold = f.inclusive;
  o.kappa.threshold = f.kappa_threshold;
  if (f.kappa_cand_threshold >= 0) o.kappa.cand_threshold = f.kappa_cand_threshold;
  o.workers = std::max(1u, f.workers);
  o.max_grade = f.max_grade;
  if (f.precision == "full") {
    o.decimals = -1;
  } else {
    auto d = text::parse_int(f.precision);
    if (!d || *d < 0 || *d > 17) throw ConfigError("--precision must be 0..17 or 'full'");
    o.decimals = static_cast<int>(*d);
  }
  o.measure.validate();
  o.sig.validate();
  return o;
}

void require_file(const std::string& path, std::string_view what) {
  if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " not found: " + path);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Merges `key = value` lines of a --config file into argv, right after the
// subcommand, for options the command line does not already set.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  auto cfg_it = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return a == "--config" || a.rfind("--config=", 0) == 0;
  });
  if (cfg_it == args.end()) return args;
  std::string cfg_path;
  if (*cfg_it == "--config") {
    if (cfg_it + 1 == args.end()) throw CLI::ArgumentMismatch("--config needs a file");
    cfg_path = *(cfg_it + 1);
    args.erase(cfg_it, cfg_it + 2);
  } else {
    cfg_path = cfg_it->substr(9);
    args.erase(cfg_it);
  }
  std::ifstream in(cfg_path);
  if (!in) throw InputError("config file not found: " + cfg_path);

  auto sub_it = std::find_if(args.begin() + 1, args.end(),
                             [&](const std::string& a) { return app.get_subcommand_no_throw(a); });
  if (sub_it == args.end()) return args;
  CLI::App* sub = app.get_subcommand(*sub_it);

  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#' || line[start] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(cfg_path, line_no, "expected key=value");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr) throw ConfigError(cfg_path + ": unknown key '" + key + "' for " + *sub_it);
    const bool on_cli = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (on_cli) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") extra.push_back(flag);
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(sub_it + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measure how well candidate qrels reproduce the significance conclusions of "
               "ground-truth qrels",
               "qrelcmp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.add_option("--config", "key=value file with defaults for the subcommand's flags");

  CommonFlags flags;
  std::string gt_path, cand_path, dataset = "dataset", label = "candidate";

  auto* compare = app.add_subcommand("compare", "Compare candidate qrels with ground truth");
  add_run_flags(compare, flags);
  add_pipeline_flags(compare, flags);
  compare->add_option("--gt", gt_path, "Ground-truth qrels")->required();
  compare->add_option("--cand", cand_path, "Candidate qrels")->required();
  compare->add_option("--dataset", dataset, "Dataset label in the report row");
  compare->add_option("--label", label, "Qrels label in the report row");

  std::string fractions = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  std::size_t repetitions = 10;
  int relevant_threshold = 1;
  bool stratified = false;
  auto* sweep = app.add_subcommand("sweep", "Percentage-sampling sweep of classification metrics");
  add_run_flags(sweep, flags);
  add_pipeline_flags(sweep, flags);
  sweep->add_option("--gt", gt_path, "Ground-truth qrels")->required();
  sweep->add_option("--fractions", fractions, "Comma-separated sampling fractions")
      ->capture_default_str();
  sweep->add_option("--repetitions", repetitions, "Repetitions per fraction")->capture_default_str();
  sweep->add_option("--relevant-threshold", relevant_threshold,
                    "Grade at or above which a judgment is in the sampled pool")
      ->capture_default_str();
  sweep->add_flag("--stratified", stratified, "Sample within each topic");

  std::string method;
  double fraction = 1.0;
  std::size_t depth = 100;
  std::string p_mode = "per-topic";
  double explicit_p = 0.0;
  LabellerConfig llm;
  std::string prompt_file, queries_path, docs_path;
  bool skip_failures = false;
  double llm_timeout = llm.timeout_seconds;
  auto* generate = app.add_subcommand("generate", "Generate candidate qrels");
  generate->add_option("method", method, "sample | popularity | llm")
      ->required()
      ->check(CLI::IsMember({"sample", "popularity", "llm"}));
  generate->add_option("--qrels", gt_path, "Ground-truth qrels (or the pairs to label for llm)")
      ->required();
  generate->add_option("--runs", flags.runs_dir, "Runs directory (popularity)");
  generate->add_flag("--tag-from-filename", flags.tag_from_filename, "System id from file name");
  generate->add_option("--run-list", flags.run_list, "File listing the run files to use");
  generate->add_option("--out-dir", flags.out_dir, "Output directory")->capture_default_str();
  generate->add_option("--max-grade", flags.max_grade, "Largest admissible relevance grade")
      ->capture_default_str();
  generate->add_option("--fraction", fraction, "Sampling fraction (sample)")->capture_default_str();
  generate->add_option("--repetitions", repetitions, "Samples to draw (sample)")
      ->capture_default_str();
  generate->add_option("--seed", flags.seed, "Master seed (sample)")->capture_default_str();
  generate->add_option("--relevant-threshold", relevant_threshold,
                       "Grade at or above which a judgment is relevant")
      ->capture_default_str();
  generate->add_flag("--stratified", stratified, "Sample within each topic (sample)");
  generate->add_option("--depth", depth, "Ranking depth counted (popularity)")->capture_default_str();
  generate->add_option("--p-mode", p_mode, "per-topic | global | explicit (popularity)")
      ->check(CLI::IsMember({"per-topic", "global", "explicit"}))
      ->capture_default_str();
  generate->add_option("--p", explicit_p, "Relevant fraction for --p-mode explicit");
  generate->add_option("--queries", queries_path, "TSV topic<TAB>query text (llm)");
  generate->add_option("--docs", docs_path, "TSV topic<TAB>doc<TAB>text (llm)");
  generate->add_option("--endpoint", llm.endpoint, "Chat-completion URL (llm)")->capture_default_str();
  generate->add_option("--model", llm.model, "Model identifier (llm)")->capture_default_str();
  generate->add_option("--prompt-file", prompt_file, "Prompt template with {query} and {document}");
  generate->add_option("--scale-max", llm.scale_max, "Largest grade (llm)")->capture_default_str();
  generate->add_option("--timeout", llm_timeout, "Request timeout in seconds (llm)")
      ->capture_default_str();
  generate->add_option("--retries", llm.max_retries, "Retries per request (llm)")
      ->capture_default_str();
  generate->add_option("--cache-dir", llm.cache_dir, "Response cache directory (llm)")
      ->capture_default_str();
  generate->add_option("--rate-limit", llm.rate_limit, "Requests per second, 0 = unlimited (llm)")
      ->capture_default_str();
  generate->add_option("--concurrency", llm.concurrency, "Requests in flight (llm)")
      ->capture_default_str();
  generate->add_option("--api-key-env", llm.api_key_env, "Environment variable with the API key")
      ->capture_default_str();
  generate->add_flag("--skip-failures", skip_failures, "Write qrels even if some pairs fail (llm)");

  std::string plot_input, plot_style = "auto", plot_out;
  auto* plot = app.add_subcommand("plot", "Render a pairs or sweep CSV as SVG");
  plot->add_option("csv", plot_input, "pairs.csv or sweep.csv written by this tool")->required();
  plot->add_option("--style", plot_style, "auto | scatter | sweep")
      ->check(CLI::IsMember({"auto", "scatter", "sweep"}))
      ->capture_default_str();
  plot->add_option("--out", plot_out, "Output SVG (default: input with .svg extension)");

  auto* evaluate = app.add_subcommand("evaluate", "Export the nDCG score matrix as CSV");
  add_run_flags(evaluate, flags);
  evaluate->add_option("--qrels", gt_path, "Qrels")->required();
  evaluate->add_option("--k", flags.k, "nDCG cutoff")->capture_default_str();
  evaluate->add_option("--gain", flags.gain, "linear | exponential")
      ->check(CLI::IsMember({"linear", "exponential"}))
      ->capture_default_str();
  evaluate->add_option("--max-grade", flags.max_grade, "Largest admissible relevance grade")
      ->capture_default_str();
  evaluate->add_option("--out-dir", flags.out_dir, "Output directory")->capture_default_str();

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(app, std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*compare) {
      require_file(gt_path, "ground-truth qrels");
      require_file(cand_path, "candidate qrels");
      auto options = pipeline_options(flags);
      auto cmp = run_compare({run_source(flags), gt_path, cand_path, flags.out_dir, {dataset, label}},
                             options);
      std::cout << report_csv_header() << '\n'
                << report_csv_row(cmp.report, {dataset, label}, options.decimals) << '\n';
      if (cmp.report.mcc.degenerate) std::cerr << "warning: MCC undefined (empty class), reported as 0\n";
      if (cmp.report.kappa.degenerate) std::cerr << "warning: kappa chance agreement is 1\n";
    } else if (*sweep) {
      require_file(gt_path, "ground-truth qrels");
      auto options = pipeline_options(flags);
      SweepSpec spec;
      for (const auto& item : split_list(fractions)) {
        auto f = text::parse_double(item);
        if (!f) throw ConfigError("bad fraction '" + item + "'");
        spec.fractions.push_back(*f);
      }
      spec.repetitions = repetitions;
      spec.seed = flags.seed;
      spec.relevant_threshold = relevant_threshold;
      spec.stratified = stratified;
      auto result = run_sweep({run_source(flags), gt_path, flags.out_dir, spec}, options);
      std::cout << sweep_summary_csv(result, options.decimals);
    } else if (*generate) {
      require_file(gt_path, "qrels");
      auto gt = parse_qrels_file(gt_path, {QrelsRole::ground_truth, flags.max_grade}).qrels;
      if (method == "sample") {
        SamplingConfig cfg{fraction, repetitions, flags.seed, relevant_threshold, stratified};
        for (const auto& p : generate_sampled(gt, cfg, flags.out_dir)) std::cout << p.string() << '\n';
      } else if (method == "popularity") {
        if (flags.runs_dir.empty()) throw ConfigError("generate popularity needs --runs");
        PopularityConfig cfg;
        cfg.depth = depth;
        cfg.mode = p_mode == "global"     ? PopularityFractionMode::global_from_gt
                   : p_mode == "explicit" ? PopularityFractionMode::explicit_value
                                          : PopularityFractionMode::per_topic_from_gt;
        cfg.explicit_fraction = explicit_p;
        cfg.relevant_threshold = relevant_threshold;
        auto out = generate_popularity(gt, load_runs(run_source(flags)), cfg, flags.out_dir);
        for (const auto& t : out.uncovered_topics) {
          std::cerr << "warning: no run covers topic " << t << "; all its labels are 0\n";
        }
        std::cout << out.path.string() << '\n';
      } else {
        require_file(queries_path, "queries TSV");
        require_file(docs_path, "documents TSV");
        if (!prompt_file.empty()) llm.prompt_template = text::read_file(prompt_file);
        llm.timeout_seconds = llm_timeout;
        LabelBatchOptions batch;
        batch.skip_failures = skip_failures;
        batch.progress = [](std::size_t done, std::size_t total) {
          if (done == total || done % 100 == 0) std::cerr << "labelled " << done << "/" << total << '\n';
        };
        auto inputs = load_label_inputs(gt, queries_path, docs_path);
        auto out = generate_llm(inputs, llm, batch, flags.out_dir);
        for (const auto& f : out.batch.failures) {
          std::cerr << "failed (" << f.topic_id << ", " << f.doc_id << "): " << f.message << '\n';
        }
        std::cerr << "requests: " << out.batch.network_requests
                  << ", cache hits: " << out.batch.cache_hits
                  << ", clamped: " << out.batch.clamped
                  << ", failures: " << out.batch.failures.size() << '\n';
        std::cout << out.path.string() << '\n';
      }
    } else if (*plot) {
      require_file(plot_input, "plot input");
      const PlotStyle style = plot_style == "scatter" ? PlotStyle::scatter
                              : plot_style == "sweep" ? PlotStyle::sweep
                                                      : PlotStyle::automatic;
      auto svg = render_plot(text::read_file(plot_input), style);
      fs::path out = plot_out.empty() ? fs::path(plot_input).replace_extension(".svg") : fs::path(plot_out);
      text::write_file_atomic(out, svg);
      std::cout << out.string() << '\n';
    } else if (*evaluate) {
      require_file(gt_path, "qrels");
      PipelineOptions options;
      options.measure.cutoff = flags.k;
      options.measure.gain = flags.gain == "exponential" ? Gain::exponential : Gain::linear;
      options.max_grade = flags.max_grade;
      auto m = run_evaluate(run_source(flags), gt_path, flags.out_dir, options);
      std::cout << (fs::path(flags.out_dir) / "scores.csv").string() << " (" << m.systems()
                << " systems x " << m.topics() << " topics)\n";
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LabellingError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& f : e.failures()) {
      std::cerr << "  (" << f.topic_id << ", " << f.doc_id << "): " << f.message << '\n';
    }
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return EXIT_SUCCESS;
}
