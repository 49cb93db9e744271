#include "qrelcmp/trec_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "qrelcmp/errors.hpp"
#include "qrelcmp/text.hpp"

namespace qrelcmp {

namespace fs = std::filesystem;

void RunSet::add(Run run) {
  if (runs_.contains(run.system_tag)) {
    throw ValidationError("duplicate system tag '" + run.system_tag + "'");
  }
  auto tag = run.system_tag;
  runs_.emplace(std::move(tag), std::move(run));
}

const Run* RunSet::find(const std::string& system_tag) const {
  auto it = runs_.find(system_tag);
  return it == runs_.end() ? nullptr : &it->second;
}

std::vector<std::string> RunSet::system_tags() const {
  std::vector<std::string> tags;
  tags.reserve(runs_.size());
  for (const auto& [tag, run] : runs_) tags.push_back(tag);
  return tags;
}

void normalize_run(Run& run) {
  for (auto& [topic, ranking] : run.topics) {
    std::sort(ranking.begin(), ranking.end(), [](const RankedDoc& a, const RankedDoc& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.doc_id > b.doc_id;
    });
    int rank = 1;
    for (auto& doc : ranking) doc.rank = rank++;
  }
}

Run parse_run(std::istream& in, const std::optional<std::string>& tag_override,
              std::string_view source) {
  const std::string src(source);
  Run run;
  std::optional<std::string> file_tag;
  std::map<std::string, std::set<std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = text::split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 6) {
      throw ParseError(src, line_no,
                       "expected 6 columns (topic Q0 docid rank score tag), got " +
                           std::to_string(fields.size()));
    }
    auto rank = text::parse_int(fields[3]);
    if (!rank) throw ParseError(src, line_no, "non-numeric rank '" + std::string(fields[3]) + "'");
    auto score = text::parse_double(fields[4]);
    if (!score) {
      throw ParseError(src, line_no, "non-numeric score '" + std::string(fields[4]) + "'");
    }
    std::string tag(fields[5]);
    if (!tag_override) {
      if (!file_tag) {
        file_tag = tag;
      } else if (*file_tag != tag) {
        throw ParseError(src, line_no,
                         "run mixes system tags '" + *file_tag + "' and '" + tag + "'");
      }
    }
    std::string topic(fields[0]);
    std::string doc(fields[2]);
    if (!seen[topic].insert(doc).second) {
      throw ValidationError(src + ":" + std::to_string(line_no) + ": duplicate document '" + doc +
                            "' for topic '" + topic + "'");
    }
    run.topics[topic].push_back(RankedDoc{std::move(doc), *score, static_cast<int>(*rank)});
  }
  if (tag_override) {
    run.system_tag = *tag_override;
  } else if (file_tag) {
    run.system_tag = *file_tag;
  } else {
    throw ValidationError(src + ": empty run and no system tag given");
  }
  normalize_run(run);
  return run;
}

Run parse_run_file(const fs::path& path, const std::optional<std::string>& tag_override) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read run file: " + path.string());
  return parse_run(in, tag_override, path.string());
}

void serialize_run(const Run& run, std::ostream& out) {
  for (const auto& [topic, ranking] : run.topics) {
    for (const auto& doc : ranking) {
      out << topic << " Q0 " << doc.doc_id << ' ' << doc.rank << ' '
          << text::format_shortest(doc.score) << ' ' << run.system_tag << '\n';
    }
  }
}

RunSet load_run_dir(const fs::path& dir, const RunDirOptions& options) {
  if (!fs::is_directory(dir)) throw InputError("runs directory not found: " + dir.string());
  std::vector<fs::path> files;
  if (options.run_list) {
    for (const auto& name : *options.run_list) {
      auto p = dir / name;
      if (!fs::is_regular_file(p)) throw InputError("listed run file not found: " + p.string());
      files.push_back(p);
    }
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw InputError("no run files in " + dir.string());

  RunSet runs;
  for (const auto& file : files) {
    std::optional<std::string> tag;
    if (options.tag_from_filename) tag = file.filename().string();
    runs.add(parse_run_file(file, tag));
  }
  return runs;
}

Qrels::Qrels(QrelsRole role, int max_grade) : role_(role), max_grade_(max_grade) {
  if (max_grade < 0) throw ConfigError("maximum grade must be non-negative");
}

void Qrels::check_grade(int grade, const std::string& topic_id, const std::string& doc_id) const {
  if (grade < 0 || grade > max_grade_) {
    throw ValidationError("grade " + std::to_string(grade) + " for (" + topic_id + ", " + doc_id +
                          ") outside [0, " + std::to_string(max_grade_) + "]");
  }
}

void Qrels::add(const std::string& topic_id, const std::string& doc_id, int grade) {
  check_grade(grade, topic_id, doc_id);
  auto [it, inserted] = topics_[topic_id].emplace(doc_id, grade);
  if (!inserted) {
    throw ValidationError("duplicate judgment (" + topic_id + ", " + doc_id + ")");
  }
  ++size_;
}

void Qrels::relabel(const std::string& topic_id, const std::string& doc_id, int grade) {
  check_grade(grade, topic_id, doc_id);
  auto t = topics_.find(topic_id);
  if (t == topics_.end() || !t->second.contains(doc_id)) {
    throw ValidationError("no judgment (" + topic_id + ", " + doc_id + ") to relabel");
  }
  t->second[doc_id] = grade;
}

std::optional<int> Qrels::grade(const std::string& topic_id, const std::string& doc_id) const {
  auto t = topics_.find(topic_id);
  if (t == topics_.end()) return std::nullopt;
  auto d = t->second.find(doc_id);
  if (d == t->second.end()) return std::nullopt;
  return d->second;
}

const TopicJudgments* Qrels::topic(const std::string& topic_id) const {
  auto t = topics_.find(topic_id);
  return t == topics_.end() ? nullptr : &t->second;
}

std::vector<std::string> Qrels::topic_ids() const {
  std::vector<std::string> ids;
  ids.reserve(topics_.size());
  for (const auto& [topic, judgments] : topics_) ids.push_back(topic);
  return ids;
}

int Qrels::highest_grade() const {
  int highest = 0;
  for (const auto& [topic, judgments] : topics_) {
    for (const auto& [doc, grade] : judgments) highest = std::max(highest, grade);
  }
  return highest;
}

Qrels Qrels::with_zero_grades(QrelsRole role) const {
  Qrels out(role, max_grade_);
  out.topics_ = topics_;
  out.size_ = size_;
  for (auto& [topic, judgments] : out.topics_) {
    for (auto& [doc, grade] : judgments) grade = 0;
  }
  return out;
}

ParsedQrels parse_qrels(std::istream& in, const QrelsParseOptions& options,
                        std::string_view source) {
  const std::string src(source);
  ParsedQrels parsed{Qrels(options.role, options.max_grade), 0};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = text::split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 4) {
      throw ParseError(src, line_no,
                       "expected 4 columns (topic iteration docid grade), got " +
                           std::to_string(fields.size()));
    }
    auto grade = text::parse_int(fields[3]);
    if (!grade) throw ParseError(src, line_no, "non-integer grade '" + std::string(fields[3]) + "'");
    long long g = *grade;
    if (g < 0) {
      g = 0;
      ++parsed.clamped_negative;
    }
    if (g > options.max_grade) {
      throw ValidationError(src + ":" + std::to_string(line_no) + ": grade " + std::to_string(g) +
                            " exceeds maximum " + std::to_string(options.max_grade));
    }
    try {
      parsed.qrels.add(std::string(fields[0]), std::string(fields[2]), static_cast<int>(g));
    } catch (const ValidationError& e) {
      throw ValidationError(src + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return parsed;
}

ParsedQrels parse_qrels_file(const fs::path& path, const QrelsParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read qrels file: " + path.string());
  return parse_qrels(in, options, path.string());
}

void serialize_qrels(const Qrels& qrels, std::ostream& out) {
  for (const auto& [topic, judgments] : qrels.topics()) {
    for (const auto& [doc, grade] : judgments) {
      out << topic << " 0 " << doc << ' ' << grade << '\n';
    }
  }
}

std::string serialize_qrels(const Qrels& qrels) {
  std::ostringstream out;
  serialize_qrels(qrels, out);
  return out.str();
}

}  // namespace qrelcmp
