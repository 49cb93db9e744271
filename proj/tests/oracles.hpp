#pragma once

// Independent reference implementations used only by tests. They share no
// code with the library paths they check: plain loops, recursion and full
// enumeration in place of the library's prefix sums, histograms and sorting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

/// nDCG@k straight from the definition, with ln-based discounts.
inline double ndcg(const std::vector<std::string>& ranking,
                   const std::map<std::string, int>& grades, int k, bool exponential) {
  auto gain = [&](int g) { return g <= 0 ? 0.0 : (exponential ? std::pow(2.0, g) - 1.0 : g); };
  auto disc = [](std::size_t i) { return std::log(static_cast<double>(i) + 2.0) / std::log(2.0); };
  double dcg = 0.0;
  for (std::size_t i = 0; i < ranking.size() && i < static_cast<std::size_t>(k); ++i) {
    auto it = grades.find(ranking[i]);
    dcg += gain(it == grades.end() ? 0 : it->second) / disc(i);
  }
  std::vector<int> ideal;
  for (const auto& [doc, g] : grades) ideal.push_back(g);
  std::sort(ideal.rbegin(), ideal.rend());
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal.size() && i < static_cast<std::size_t>(k); ++i) {
    idcg += gain(ideal[i]) / disc(i);
  }
  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

using Matrix = std::vector<std::vector<double>>;  // [system][topic]

/// Exhaustive randomised Tukey HSD by recursion over topics. Per-system sums
/// are recomputed from scratch for every complete assignment. Returns p-values
/// keyed by (a, b), a < b.
inline std::map<std::pair<std::size_t, std::size_t>, double> tukey_exhaustive(
    const Matrix& x, double tolerance) {
  const std::size_t m = x.size();
  const std::size_t n = x[0].size();
  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::size_t> p(m);
  for (std::size_t i = 0; i < m; ++i) p[i] = i;
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));

  std::vector<double> observed(m, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) sum += x[s][t];
    observed[s] = sum / static_cast<double>(n);
  }

  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> counts;
  std::uint64_t total = 0;
  std::vector<std::size_t> choice(n, 0);
  auto visit = [&](auto&& self, std::size_t t) -> void {
    if (t == n) {
      ++total;
      std::vector<double> means(m);
      for (std::size_t s = 0; s < m; ++s) {
        double sum = 0.0;
        for (std::size_t u = 0; u < n; ++u) sum += x[perms[choice[u]][s]][u];
        means[s] = sum / static_cast<double>(n);
      }
      const double spread = *std::max_element(means.begin(), means.end()) -
                            *std::min_element(means.begin(), means.end());
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
          if (spread >= std::abs(observed[a] - observed[b]) - tolerance) ++counts[{a, b}];
        }
      }
      return;
    }
    for (std::size_t c = 0; c < perms.size(); ++c) {
      choice[t] = c;
      self(self, t + 1);
    }
  };
  visit(visit, 0);

  std::map<std::pair<std::size_t, std::size_t>, double> out;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      out[{a, b}] = static_cast<double>(counts[{a, b}]) / static_cast<double>(total);
    }
  }
  return out;
}

/// Two-sided paired randomisation (sign-flip) test over all 2^n flips.
inline double paired_randomization(const std::vector<double>& x, const std::vector<double>& y,
                                   double tolerance) {
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t t = 0; t < n; ++t) d[t] = x[t] - y[t];
  double observed = 0.0;
  for (double v : d) observed += v;
  observed = std::abs(observed) / static_cast<double>(n);
  std::uint64_t hits = 0;
  const std::uint64_t flips = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < flips; ++mask) {
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t) s += ((mask >> t) & 1) ? -d[t] : d[t];
    if (std::abs(s) / static_cast<double>(n) >= observed - tolerance) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(flips);
}

/// Popularity labeller by explicit count, sort and select. Topics no run
/// covers are labelled all zero.
/// runs: system -> topic -> ranked doc ids.
inline std::map<std::string, std::map<std::string, int>> popularity(
    const std::map<std::string, std::map<std::string, int>>& gt,
    const std::map<std::string, std::map<std::string, std::vector<std::string>>>& runs,
    std::size_t depth, int relevant_threshold) {
  std::map<std::string, std::map<std::string, int>> out;
  for (const auto& [topic, docs] : gt) {
    std::vector<std::pair<long, std::string>> keyed;  // (-count, doc)
    std::size_t relevant = 0;
    bool covered = false;
    for (const auto& [sys, topics] : runs) covered = covered || topics.count(topic) > 0;
    for (const auto& [doc, grade] : docs) {
      long count = 0;
      for (const auto& [sys, topics] : runs) {
        auto it = topics.find(topic);
        if (it == topics.end()) continue;
        for (std::size_t i = 0; i < it->second.size() && i < depth; ++i) {
          if (it->second[i] == doc) ++count;
        }
      }
      keyed.emplace_back(-count, doc);
      if (covered && grade >= relevant_threshold) ++relevant;
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      out[topic][keyed[i].second] = i < relevant ? 1 : 0;
    }
  }
  return out;
}

/// Tau-b from an explicit list of all pairs.
inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  double c = 0, d = 0, tx = 0, ty = 0, pairs = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (i >= j) continue;
      pairs += 1;
      const int sx = (x[i] > x[j]) - (x[i] < x[j]);
      const int sy = (y[i] > y[j]) - (y[i] < y[j]);
      if (sx == 0) tx += 1;
      if (sy == 0) ty += 1;
      if (sx * sy > 0) c += 1;
      if (sx * sy < 0) d += 1;
    }
  }
  return (c - d) / std::sqrt((pairs - tx) * (pairs - ty));
}

}  // namespace oracle
