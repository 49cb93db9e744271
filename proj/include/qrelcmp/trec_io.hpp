#pragma once

// TREC run (six-column) and qrels (four-column) files.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qrelcmp {

struct RankedDoc {
  std::string doc_id;
  double score = 0.0;
  int rank = 0;

  friend bool operator==(const RankedDoc&, const RankedDoc&) = default;
};

using TopicRanking = std::vector<RankedDoc>;

/// One system's rankings keyed by topic id.
struct Run {
  std::string system_tag;
  std::map<std::string, TopicRanking> topics;

  friend bool operator==(const Run&, const Run&) = default;
};

/// Rankings of a fleet of systems, keyed (and therefore ordered) by tag.
class RunSet {
 public:
  /// Throws ValidationError if the tag is already present.
  void add(Run run);

  const Run* find(const std::string& system_tag) const;
  const std::map<std::string, Run>& runs() const noexcept { return runs_; }
  std::vector<std::string> system_tags() const;
  std::size_t size() const noexcept { return runs_.size(); }
  bool empty() const noexcept { return runs_.empty(); }

 private:
  std::map<std::string, Run> runs_;
};

/// Sorts every topic by (score desc, doc_id desc) and assigns ranks 1..n.
void normalize_run(Run& run);

/// Parses one run file. The tag column becomes the system tag unless
/// `tag_override` is given; a file mixing several tags without an override is
/// rejected. The result is normalized.
Run parse_run(std::istream& in, const std::optional<std::string>& tag_override = std::nullopt,
              std::string_view source = "<run>");
Run parse_run_file(const std::filesystem::path& path,
                   const std::optional<std::string>& tag_override = std::nullopt);

/// Writes `topic Q0 doc rank score tag`, topics in lexicographic order,
/// scores in shortest round-trip form.
void serialize_run(const Run& run, std::ostream& out);

struct RunDirOptions {
  bool tag_from_filename = false;
  /// When set, only these file names (relative to the directory) are loaded,
  /// in the given order.
  std::optional<std::vector<std::string>> run_list;
};

/// Every regular file in `dir` is one system.
RunSet load_run_dir(const std::filesystem::path& dir, const RunDirOptions& options = {});

enum class QrelsRole { ground_truth, candidate };

using TopicJudgments = std::map<std::string, int>;

/// Relevance grades keyed by (topic, doc).
class Qrels {
 public:
  static constexpr int kDefaultMaxGrade = 3;

  explicit Qrels(QrelsRole role = QrelsRole::ground_truth, int max_grade = kDefaultMaxGrade);

  /// Inserts a new judgment. Throws ValidationError on a duplicate pair or a
  /// grade outside [0, max_grade].
  void add(const std::string& topic_id, const std::string& doc_id, int grade);
  /// Overwrites the grade of an existing judgment.
  void relabel(const std::string& topic_id, const std::string& doc_id, int grade);

  std::optional<int> grade(const std::string& topic_id, const std::string& doc_id) const;
  const TopicJudgments* topic(const std::string& topic_id) const;
  const std::map<std::string, TopicJudgments>& topics() const noexcept { return topics_; }
  std::vector<std::string> topic_ids() const;

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  QrelsRole role() const noexcept { return role_; }
  int max_grade() const noexcept { return max_grade_; }
  int highest_grade() const;

  /// Same judged pairs with every grade reset to zero.
  Qrels with_zero_grades(QrelsRole role) const;

  friend bool operator==(const Qrels&, const Qrels&) = default;

 private:
  void check_grade(int grade, const std::string& topic_id, const std::string& doc_id) const;

  QrelsRole role_;
  int max_grade_;
  std::size_t size_ = 0;
  std::map<std::string, TopicJudgments> topics_;
};

struct QrelsParseOptions {
  QrelsRole role = QrelsRole::ground_truth;
  int max_grade = Qrels::kDefaultMaxGrade;
};

struct ParsedQrels {
  Qrels qrels;
  /// Number of negative grades clamped to zero.
  std::size_t clamped_negative = 0;
};

ParsedQrels parse_qrels(std::istream& in, const QrelsParseOptions& options = {},
                        std::string_view source = "<qrels>");
ParsedQrels parse_qrels_file(const std::filesystem::path& path,
                             const QrelsParseOptions& options = {});

/// `topic 0 doc grade`, sorted by (topic, doc), single spaces, newline-terminated.
void serialize_qrels(const Qrels& qrels, std::ostream& out);
std::string serialize_qrels(const Qrels& qrels);

}  // namespace qrelcmp
