#pragma once

// Seeded synthetic test collections: graded qrels plus runs from systems of
// increasing effectiveness, so that some system pairs differ significantly.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qrelcmp/trec_io.hpp"

namespace qrelcmp::synthetic {

struct CollectionSpec {
  std::size_t systems = 5;
  std::size_t topics = 10;
  std::size_t docs_per_topic = 50;
  /// Unjudged documents mixed into each ranking.
  std::size_t unjudged_per_topic = 10;
  std::uint64_t seed = 1;
  /// Weight of the relevance grade in system scores, for the weakest and the
  /// strongest system; intermediate systems are spaced linearly.
  double weakest_skill = 0.1;
  double strongest_skill = 1.5;
};

struct Collection {
  RunSet runs;
  Qrels qrels;
  std::map<std::string, std::string> queries;
  std::map<std::pair<std::string, std::string>, std::string> documents;
};

Collection make_collection(const CollectionSpec& spec);

/// Writes runs/<tag>.run, qrels.txt, queries.tsv and docs.tsv under `dir`.
void write_collection(const Collection& collection, const std::filesystem::path& dir);

}  // namespace qrelcmp::synthetic
