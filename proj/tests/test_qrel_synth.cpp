#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qrelcmp/errors.hpp"
#include "qrelcmp/qrel_synth.hpp"
#include "qrelcmp/rng.hpp"

using namespace qrelcmp;

namespace {

Qrels graded_qrels(std::uint64_t seed, int topics, int docs) {
  rng::SplitMix64 gen(seed);
  Qrels q;
  for (int t = 1; t <= topics; ++t) {
    for (int d = 0; d < docs; ++d) {
      q.add(std::to_string(t), "D" + std::to_string(d), static_cast<int>(rng::bounded(gen, 4)));
    }
  }
  return q;
}

std::size_t count_at_least(const Qrels& q, int threshold) {
  std::size_t n = 0;
  for (const auto& [topic, judgments] : q.topics()) {
    for (const auto& [doc, grade] : judgments) n += grade >= threshold;
  }
  return n;
}

bool same_universe(const Qrels& a, const Qrels& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [topic, judgments] : a.topics()) {
    for (const auto& [doc, grade] : judgments) {
      if (!b.grade(topic, doc)) return false;
    }
  }
  return true;
}

Run ranked(const std::string& tag, const std::map<std::string, std::vector<std::string>>& lists) {
  Run run;
  run.system_tag = tag;
  for (const auto& [topic, list] : lists) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      run.topics[topic].push_back(
          {list[i], static_cast<double>(list.size() - i), static_cast<int>(i + 1)});
    }
  }
  return run;
}

}  // namespace

TEST_CASE("full and empty samples") {
  const auto gt = graded_qrels(1, 5, 20);
  SamplingConfig cfg;
  cfg.fraction = 1.0;
  auto full = percentage_sample(gt, cfg, 0);
  CHECK(full.topics() == gt.topics());
  CHECK(full.role() == QrelsRole::candidate);

  cfg.fraction = 0.0;
  auto none = percentage_sample(gt, cfg, 0);
  CHECK(same_universe(none, gt));
  CHECK(count_at_least(none, 1) == 0);
}

TEST_CASE("samples keep exactly round(f |R|) relevant judgments with original grades") {
  const auto gt = graded_qrels(2, 7, 13);
  const auto relevant = count_at_least(gt, 1);
  for (double f : {0.1, 0.25, 0.5, 0.77, 0.9}) {
    SamplingConfig cfg;
    cfg.fraction = f;
    for (bool stratified : {false, true}) {
      cfg.stratified = stratified;
      const auto s = percentage_sample(gt, cfg, 3);
      CHECK(same_universe(s, gt));
      std::size_t kept = 0;
      for (const auto& [topic, judgments] : s.topics()) {
        for (const auto& [doc, grade] : judgments) {
          const int original = *gt.grade(topic, doc);
          if (grade > 0) {
            ++kept;
            CHECK(grade == original);
          }
        }
      }
      if (!stratified) {
        CHECK(kept == static_cast<std::size_t>(std::llround(f * static_cast<double>(relevant))));
      } else {
        for (const auto& [topic, judgments] : gt.topics()) {
          std::size_t r = 0, k = 0;
          for (const auto& [doc, grade] : judgments) {
            r += grade >= 1;
            k += *s.grade(topic, doc) >= 1;
          }
          CHECK(k == static_cast<std::size_t>(std::llround(f * static_cast<double>(r))));
        }
      }
    }
  }
}

TEST_CASE("half of ten relevant documents") {
  Qrels gt;
  for (int d = 0; d < 10; ++d) gt.add("1", "R" + std::to_string(d), 2);
  for (int d = 0; d < 6; ++d) gt.add("1", "N" + std::to_string(d), 0);
  SamplingConfig cfg;
  cfg.fraction = 0.5;
  CHECK(count_at_least(percentage_sample(gt, cfg, 0), 1) == 5);
}

TEST_CASE("repetitions differ and fixed seeds repeat") {
  const auto gt = graded_qrels(3, 6, 30);
  SamplingConfig cfg;
  cfg.fraction = 0.5;
  cfg.master_seed = 99;
  const auto a = percentage_sample(gt, cfg, 0);
  CHECK(percentage_sample(gt, cfg, 0) == a);
  CHECK_FALSE(percentage_sample(gt, cfg, 1) == a);
  cfg.master_seed = 100;
  CHECK_FALSE(percentage_sample(gt, cfg, 0) == a);
}

TEST_CASE("relevant threshold two leaves grade one untouched") {
  const auto gt = graded_qrels(4, 3, 30);
  SamplingConfig cfg;
  cfg.fraction = 0.0;
  cfg.relevant_threshold = 2;
  const auto s = percentage_sample(gt, cfg, 0);
  for (const auto& [topic, judgments] : gt.topics()) {
    for (const auto& [doc, grade] : judgments) {
      CHECK(*s.grade(topic, doc) == (grade >= 2 ? 0 : grade));
    }
  }
}

TEST_CASE("sampling config validation") {
  SamplingConfig cfg;
  cfg.fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.fraction = 0.5;
  cfg.repetitions = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("popularity with a single system") {
  Qrels gt;
  gt.add("1", "A", 2);
  gt.add("1", "B", 0);
  gt.add("1", "C", 1);
  gt.add("1", "D", 0);
  RunSet runs;
  runs.add(ranked("s", {{"1", {"D", "X", "B"}}}));
  const auto out = popularity_biased(gt, runs, {}).qrels;
  CHECK(out.grade("1", "B") == 1);
  CHECK(out.grade("1", "D") == 1);
  CHECK(out.grade("1", "A") == 0);
  CHECK(out.grade("1", "C") == 0);
}

TEST_CASE("popularity count dominance and unretrieved tie order") {
  Qrels gt;
  gt.add("1", "X", 0);
  gt.add("1", "Y", 3);
  gt.add("1", "Z", 0);
  gt.add("1", "W", 0);
  RunSet runs;
  runs.add(ranked("a", {{"1", {"Y", "X"}}}));
  runs.add(ranked("b", {{"1", {"X"}}}));
  runs.add(ranked("c", {{"1", {"X"}}}));
  auto out = popularity_biased(gt, runs, {}).qrels;
  CHECK(out.grade("1", "X") == 1);
  CHECK(out.grade("1", "Y") == 0);

  // depth 1 drops system a's vote for X, which still leads two to one
  PopularityConfig shallow;
  shallow.depth = 1;
  out = popularity_biased(gt, runs, shallow).qrels;
  CHECK(out.grade("1", "X") == 1);
}

TEST_CASE("uncovered topics get all-zero labels") {
  Qrels gt;
  gt.add("1", "A", 1);
  gt.add("2", "B", 1);
  RunSet runs;
  runs.add(ranked("a", {{"1", {"A"}}}));
  const auto result = popularity_biased(gt, runs, {});
  CHECK(result.uncovered_topics == std::vector<std::string>{"2"});
  CHECK(result.qrels.grade("2", "B") == 0);
  CHECK(result.qrels.grade("1", "A") == 1);
}

TEST_CASE("popularity matches the count-sort-select oracle") {
  rng::SplitMix64 gen(17);
  for (int trial = 0; trial < 25; ++trial) {
    const auto gt = graded_qrels(100 + trial, 4, 20);
    RunSet runs;
    std::map<std::string, std::map<std::string, std::vector<std::string>>> lists;
    for (int s = 0; s < 5; ++s) {
      std::map<std::string, std::vector<std::string>> per_topic;
      for (int t = 1; t <= 4; ++t) {
        std::vector<std::string> docs;
        for (int d = 0; d < 30; ++d) docs.push_back("D" + std::to_string(d));
        rng::shuffle(std::span<std::string>(docs), gen);
        docs.resize(5 + rng::bounded(gen, 20));
        per_topic[std::to_string(t)] = docs;
      }
      const auto tag = "s" + std::to_string(s);
      lists[tag] = per_topic;
      runs.add(ranked(tag, per_topic));
    }
    PopularityConfig cfg;
    cfg.depth = 3 + rng::bounded(gen, 10);
    const auto out = popularity_biased(gt, runs, cfg).qrels;
    const auto expected = oracle::popularity(gt.topics(), lists, cfg.depth, 1);
    CHECK(out.topics() == expected);

    for (const auto& [topic, judgments] : gt.topics()) {
      const double n = static_cast<double>(judgments.size());
      double r_gt = 0, r_out = 0;
      for (const auto& [doc, grade] : judgments) {
        r_gt += grade >= 1;
        r_out += *out.grade(topic, doc);
      }
      CHECK(std::abs(r_gt / n - r_out / n) < 1.0 / n);
    }
  }
}

TEST_CASE("global and explicit popularity fractions") {
  const auto gt = graded_qrels(6, 3, 10);
  RunSet runs;
  runs.add(ranked("a", {{"1", {"D1"}}, {"2", {"D2"}}, {"3", {"D3"}}}));
  PopularityConfig cfg;
  cfg.mode = PopularityFractionMode::explicit_value;
  cfg.explicit_fraction = 0.3;
  const auto out = popularity_biased(gt, runs, cfg).qrels;
  for (const auto& topic : out.topic_ids()) {
    int selected = 0;
    for (const auto& [doc, grade] : *out.topic(topic)) selected += grade;
    CHECK(selected == 3);
  }

  cfg.mode = PopularityFractionMode::global_from_gt;
  const double p = static_cast<double>(count_at_least(gt, 1)) / static_cast<double>(gt.size());
  const auto global = popularity_biased(gt, runs, cfg).qrels;
  CHECK(count_at_least(global, 1) == 3 * popularity_quota(p, 10));
}

TEST_CASE("popularity_quota rounds up without representation drift") {
  CHECK(popularity_quota(0.3, 10) == 3);
  CHECK(popularity_quota(0.31, 10) == 4);
  CHECK(popularity_quota(0.0, 10) == 0);
  CHECK(popularity_quota(1.0, 7) == 7);
  CHECK(popularity_quota(0.1, 30) == 3);
}

TEST_CASE("popularity config validation") {
  PopularityConfig cfg;
  cfg.depth = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.depth = 10;
  cfg.mode = PopularityFractionMode::explicit_value;
  cfg.explicit_fraction = 2.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
