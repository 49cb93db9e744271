#include "qrelcmp/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qrelcmp/errors.hpp"
#include "qrelcmp/rng.hpp"
#include "qrelcmp/text.hpp"

namespace qrelcmp::synthetic {

namespace fs = std::filesystem;

namespace {

double standard_normal(rng::SplitMix64& gen) {
  const double u1 = 1.0 - rng::uniform01(gen);
  const double u2 = rng::uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int draw_grade(rng::SplitMix64& gen) {
  const double u = rng::uniform01(gen);
  if (u < 0.55) return 0;
  if (u < 0.75) return 1;
  if (u < 0.90) return 2;
  return 3;
}

std::string padded(std::size_t value, int width) {
  auto s = std::to_string(value);
  return std::string(s.size() < static_cast<std::size_t>(width) ? width - s.size() : 0, '0') + s;
}

}  // namespace

Collection make_collection(const CollectionSpec& spec) {
  if (spec.systems < 1 || spec.topics < 1 || spec.docs_per_topic < 1) {
    throw ConfigError("synthetic collection needs systems, topics and documents");
  }
  Collection c;
  std::vector<std::string> topic_ids;
  for (std::size_t t = 0; t < spec.topics; ++t) {
    const auto topic = std::to_string(101 + t);
    topic_ids.push_back(topic);
    c.queries[topic] = "synthetic information need number " + topic;
    rng::SplitMix64 gen(rng::derive_seed(spec.seed, {0, t}));
    for (std::size_t d = 0; d < spec.docs_per_topic; ++d) {
      const auto doc = "D" + topic + "-" + padded(d, 3);
      const int grade = draw_grade(gen);
      c.qrels.add(topic, doc, grade);
      c.documents[{topic, doc}] = "synthetic passage " + doc + " for topic " + topic;
    }
  }

  for (std::size_t s = 0; s < spec.systems; ++s) {
    const double skill =
        spec.systems == 1 ? spec.strongest_skill
                          : spec.weakest_skill + (spec.strongest_skill - spec.weakest_skill) *
                                                     static_cast<double>(s) /
                                                     static_cast<double>(spec.systems - 1);
    Run run;
    run.system_tag = "sys" + padded(s + 1, 2);
    for (std::size_t t = 0; t < spec.topics; ++t) {
      const auto& topic = topic_ids[t];
      rng::SplitMix64 gen(rng::derive_seed(spec.seed, {1, s, t}));
      auto& ranking = run.topics[topic];
      for (const auto& [doc, grade] : *c.qrels.topic(topic)) {
        ranking.push_back({doc, skill * grade + standard_normal(gen), 0});
      }
      for (std::size_t u = 0; u < spec.unjudged_per_topic; ++u) {
        ranking.push_back({"U" + topic + "-" + padded(u, 3), standard_normal(gen), 0});
      }
    }
    normalize_run(run);
    c.runs.add(std::move(run));
  }
  return c;
}

void write_collection(const Collection& c, const fs::path& dir) {
  fs::create_directories(dir / "runs");
  for (const auto& [tag, run] : c.runs.runs()) {
    std::ostringstream out;
    serialize_run(run, out);
    text::write_file_atomic(dir / "runs" / (tag + ".run"), out.str());
  }
  text::write_file_atomic(dir / "qrels.txt", serialize_qrels(c.qrels));
  std::ostringstream queries;
  for (const auto& [topic, q] : c.queries) queries << topic << '\t' << q << '\n';
  text::write_file_atomic(dir / "queries.tsv", queries.str());
  std::ostringstream docs;
  for (const auto& [key, body] : c.documents) docs << key.first << '\t' << key.second << '\t' << body << '\n';
  text::write_file_atomic(dir / "docs.tsv", docs.str());
}

}  // namespace qrelcmp::synthetic
