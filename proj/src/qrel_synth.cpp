#include "qrelcmp/qrel_synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "qrelcmp/errors.hpp"
#include "qrelcmp/rng.hpp"

namespace qrelcmp {

void SamplingConfig::validate() const {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("sampling fraction must be in [0,1]");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
}

void PopularityConfig::validate() const {
  if (depth < 1) throw ConfigError("popularity depth must be >= 1");
  if (mode == PopularityFractionMode::explicit_value &&
      !(explicit_fraction >= 0.0 && explicit_fraction <= 1.0)) {
    throw ConfigError("explicit popularity fraction must be in [0,1]");
  }
}

namespace {

using Judgment = std::pair<const std::string*, const std::string*>;  // topic, doc

// Partial Fisher-Yates: moves a uniform sample of `keep` items to the front.
void sample_front(std::vector<Judgment>& pool, std::size_t keep, rng::SplitMix64& gen) {
  for (std::size_t i = 0; i < keep; ++i) {
    const auto j = i + static_cast<std::size_t>(rng::bounded(gen, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
}

std::size_t sample_size(double fraction, std::size_t pool) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool)));
}

}  // namespace

Qrels percentage_sample(const Qrels& gt, const SamplingConfig& config,
                        std::size_t repetition_index) {
  config.validate();
  Qrels out(QrelsRole::candidate, gt.max_grade());
  for (const auto& [topic, judgments] : gt.topics()) {
    for (const auto& [doc, grade] : judgments) {
      out.add(topic, doc, grade < config.relevant_threshold ? grade : 0);
    }
  }

  auto retain = [&](std::vector<Judgment>& pool, rng::SplitMix64& gen) {
    const std::size_t keep = sample_size(config.fraction, pool.size());
    sample_front(pool, keep, gen);
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& [topic, doc] = pool[i];
      out.relabel(*topic, *doc, *gt.grade(*topic, *doc));
    }
  };

  if (config.stratified) {
    std::uint64_t topic_index = 0;
    for (const auto& [topic, judgments] : gt.topics()) {
      std::vector<Judgment> pool;
      for (const auto& [doc, grade] : judgments) {
        if (grade >= config.relevant_threshold) pool.emplace_back(&topic, &doc);
      }
      rng::SplitMix64 gen(
          rng::derive_seed(config.master_seed, {repetition_index, topic_index++}));
      retain(pool, gen);
    }
  } else {
    std::vector<Judgment> pool;
    for (const auto& [topic, judgments] : gt.topics()) {
      for (const auto& [doc, grade] : judgments) {
        if (grade >= config.relevant_threshold) pool.emplace_back(&topic, &doc);
      }
    }
    rng::SplitMix64 gen(rng::derive_seed(config.master_seed, {repetition_index}));
    retain(pool, gen);
  }
  return out;
}

std::size_t popularity_quota(double fraction, std::size_t judged) {
  const double exact = fraction * static_cast<double>(judged);
  // absorb representation error so that e.g. 0.3 * 10 selects 3, not 4
  const auto quota = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
  return std::min(quota, judged);
}

PopularityResult popularity_biased(const Qrels& gt, const RunSet& runs,
                                   const PopularityConfig& config) {
  config.validate();

  double global_fraction = config.explicit_fraction;
  if (config.mode == PopularityFractionMode::global_from_gt) {
    std::size_t relevant = 0;
    for (const auto& [topic, judgments] : gt.topics()) {
      for (const auto& [doc, grade] : judgments) relevant += grade >= config.relevant_threshold;
    }
    global_fraction =
        gt.empty() ? 0.0 : static_cast<double>(relevant) / static_cast<double>(gt.size());
  }

  PopularityResult result{Qrels(QrelsRole::candidate, std::max(1, gt.max_grade())), {}};
  for (const auto& [topic, judgments] : gt.topics()) {
    std::map<std::string, std::size_t> counts;
    for (const auto& [doc, grade] : judgments) counts.emplace(doc, 0);

    bool covered = false;
    for (const auto& [tag, run] : runs.runs()) {
      auto ranking = run.topics.find(topic);
      if (ranking == run.topics.end()) continue;
      covered = true;
      const std::size_t depth = std::min(config.depth, ranking->second.size());
      for (std::size_t i = 0; i < depth; ++i) {
        auto it = counts.find(ranking->second[i].doc_id);
        if (it != counts.end()) ++it->second;
      }
    }

    std::size_t quota = 0;
    if (!covered) {
      result.uncovered_topics.push_back(topic);
    } else if (config.mode == PopularityFractionMode::per_topic_from_gt) {
      quota = static_cast<std::size_t>(
          std::count_if(judgments.begin(), judgments.end(),
                        [&](const auto& j) { return j.second >= config.relevant_threshold; }));
    } else {
      quota = popularity_quota(global_fraction, judgments.size());
    }

    // counts is keyed by doc id, so a stable sort on count leaves ties in
    // ascending doc id order
    std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      result.qrels.add(topic, ordered[i].first, i < quota ? 1 : 0);
    }
  }
  return result;
}

}  // namespace qrelcmp
