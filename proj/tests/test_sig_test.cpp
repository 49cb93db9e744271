#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "qrelcmp/errors.hpp"
#include "qrelcmp/rng.hpp"
#include "qrelcmp/sig_test.hpp"

using namespace qrelcmp;

namespace {

std::vector<std::string> labels(std::size_t n, const char* prefix) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

ScoreMatrix matrix_of(const oracle::Matrix& rows) {
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return ScoreMatrix(labels(rows.size(), "s"), labels(rows[0].size(), "t"), flat);
}

// Dyadic cells keep every partial sum exact.
oracle::Matrix random_dyadic(rng::SplitMix64& gen, std::size_t m, std::size_t n) {
  oracle::Matrix x(m, std::vector<double>(n));
  for (auto& row : x) {
    for (auto& v : row) v = static_cast<double>(rng::bounded(gen, 1025)) / 1024.0;
  }
  return x;
}

SigTestConfig exhaustive() {
  SigTestConfig cfg;
  cfg.mode = TestMode::exhaustive;
  return cfg;
}

}  // namespace

TEST_CASE("constant matrix gives p = 1 everywhere") {
  ScoreMatrix m(labels(3, "s"), labels(4, "t"), std::vector<double>(12, 0.4));
  for (auto cfg : {SigTestConfig{}, exhaustive()}) {
    const auto set = tukey_hsd_pvalues(m, cfg);
    for (double p : set.p_values()) CHECK(p == 1.0);
    CHECK(set.significant_count() == 0);
  }
}

TEST_CASE("two-by-two exhaustive example") {
  const auto set = tukey_hsd_pvalues(matrix_of({{1, 1}, {0, 0}}), exhaustive());
  CHECK(set.p_value(0, 1) == 0.5);
  CHECK_FALSE(set.significant(0, 1));
}

TEST_CASE("exhaustive mode matches the recursive enumerator exactly") {
  rng::SplitMix64 gen(11);
  for (std::size_t m : {2u, 3u, 4u}) {
    for (std::size_t n = 1; n <= (m == 4 ? 3u : 5u); ++n) {
      const auto x = random_dyadic(gen, m, n);
      const auto set = tukey_hsd_pvalues(matrix_of(x), exhaustive());
      for (const auto& [pair, p] : oracle::tukey_exhaustive(x, kSpreadTieTolerance)) {
        CHECK(set.p_value(pair.first, pair.second) == p);
      }
    }
  }
}

TEST_CASE("m = 2 reduces to the paired randomisation test") {
  rng::SplitMix64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_dyadic(gen, 2, 3 + trial % 5);
    const auto set = tukey_hsd_pvalues(matrix_of(x), exhaustive());
    CHECK(set.p_value(0, 1) == oracle::paired_randomization(x[0], x[1], kSpreadTieTolerance));
  }
}

TEST_CASE("sampled p-values use the add-one convention and stay positive") {
  oracle::Matrix x{{1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0}};
  SigTestConfig cfg;
  cfg.permutations = 999;
  const auto set = tukey_hsd_pvalues(matrix_of(x), cfg);
  const double p = set.p_value(0, 1);
  CHECK(p > 0.0);
  // count is an integer in [0, B]
  const double count = p * 1000.0 - 1.0;
  CHECK(count == doctest::Approx(std::round(count)));
  // exact p is 2/1024; the sampled estimate should be small
  CHECK(p < 0.02);
}

TEST_CASE("sampled results are identical across worker counts") {
  rng::SplitMix64 gen(9);
  const auto x = random_dyadic(gen, 6, 20);
  SigTestConfig cfg;
  cfg.permutations = 3000;
  cfg.master_seed = 77;
  cfg.workers = 1;
  const auto one = tukey_hsd_pvalues(matrix_of(x), cfg);
  for (unsigned w : {2u, 3u, 8u}) {
    cfg.workers = w;
    CHECK(tukey_hsd_pvalues(matrix_of(x), cfg).p_values() == one.p_values());
  }
  cfg.master_seed = 78;
  CHECK(tukey_hsd_pvalues(matrix_of(x), cfg).p_values() != one.p_values());
}

TEST_CASE("larger observed differences never get larger p-values") {
  rng::SplitMix64 gen(21);
  const auto x = random_dyadic(gen, 5, 12);
  const auto m = matrix_of(x);
  SigTestConfig cfg;
  cfg.permutations = 2000;
  const auto set = tukey_hsd_pvalues(m, cfg);
  const auto means = m.row_means();
  for (const auto& p : set.pairs()) {
    for (const auto& q : set.pairs()) {
      if (std::abs(means[p.a] - means[p.b]) > std::abs(means[q.a] - means[q.b])) {
        CHECK(set.p_value(p.a, p.b) <= set.p_value(q.a, q.b));
      }
    }
  }
}

TEST_CASE("configuration errors") {
  ScoreMatrix single({"s"}, {"t"}, {0.5});
  CHECK_THROWS_AS(tukey_hsd_pvalues(single, {}), ConfigError);

  rng::SplitMix64 gen(1);
  auto cfg = exhaustive();
  cfg.exhaustive_cap = 1000;
  try {
    tukey_hsd_pvalues(matrix_of(random_dyadic(gen, 4, 4)), cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sampled") != std::string::npos);
  }

  SigTestConfig bad;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.permutations = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("exhaustive_assignment_count") {
  CHECK(exhaustive_assignment_count(3, 5, 10'000'000) == 7776u);
  CHECK(exhaustive_assignment_count(2, 20, 10'000'000) == 1048576u);
  CHECK_FALSE(exhaustive_assignment_count(5, 5, 10'000'000).has_value());
}

TEST_CASE("SignificanceSet partition follows the threshold") {
  SignificanceSet set({"a", "b", "c"}, {0.01, 0.05, 0.2}, 0.05);
  CHECK(set.significant(0, 1));
  CHECK(set.significant(1, 0));
  CHECK_FALSE(set.significant(0, 2));
  CHECK_FALSE(set.significant(1, 2));
  const auto part = significance_partition(set);
  CHECK(part.significant.size() == 1);
  CHECK(part.non_significant.size() == 2);

  SignificanceSet inclusive({"a", "b", "c"}, {0.01, 0.05, 0.2}, 0.05, true);
  CHECK(inclusive.significant(0, 2));
  CHECK(inclusive.significant_count() == 2);

  SignificanceSet all_zero({"a", "b", "c"}, {0.0, 0.0, 0.0}, 0.05);
  CHECK(significance_partition(all_zero).non_significant.empty());
}

TEST_CASE("pair_index enumerates pairs in row order") {
  std::size_t expected = 0;
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = a + 1; b < 6; ++b) {
      CHECK(SignificanceSet::pair_index(a, b, 6) == expected);
      CHECK(SignificanceSet::pair_index(b, a, 6) == expected);
      ++expected;
    }
  }
}

TEST_CASE("p-value CSV") {
  SignificanceSet set({"a", "b"}, {0.25}, 0.05);
  std::ostringstream out;
  write_pvalue_csv(set, out);
  CHECK(out.str() == "system_a,system_b,p_value,significant\na,b,0.25,false\n");
}
