#include "qrelcmp/plot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "qrelcmp/errors.hpp"
#include "qrelcmp/text.hpp"

namespace qrelcmp {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;  // room for the legend
constexpr double kTop = 40.0;
constexpr double kBottom = 70.0;

std::string f2(double v) { return text::format_fixed(v, 2); }

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Axis {
  double lo, hi;
  double pixel_lo, pixel_hi;
  double map(double v) const { return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo); }
};

void open_svg(std::ostringstream& out, std::string_view title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" "
         "height=\"600\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  out << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Axis& x, const Axis& y, std::string_view x_label,
               std::string_view y_label, double tick_step) {
  out << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line class=\"axis\" x1=\"" << f2(x.pixel_lo) << "\" y1=\"" << f2(y.pixel_lo)
      << "\" x2=\"" << f2(x.pixel_hi) << "\" y2=\"" << f2(y.pixel_lo) << "\"/>\n";
  out << "<line class=\"axis\" x1=\"" << f2(x.pixel_lo) << "\" y1=\"" << f2(y.pixel_lo)
      << "\" x2=\"" << f2(x.pixel_lo) << "\" y2=\"" << f2(y.pixel_hi) << "\"/>\n";
  out << "</g>\n<g class=\"ticks\" fill=\"black\">\n";
  const int x_ticks = static_cast<int>(std::lround((x.hi - x.lo) / tick_step));
  for (int i = 0; i <= x_ticks; ++i) {
    const double v = x.lo + i * tick_step;
    out << "<text x=\"" << f2(x.map(v)) << "\" y=\"" << f2(y.pixel_lo + 18)
        << "\" text-anchor=\"middle\">" << text::format_fixed(v, 1) << "</text>\n";
  }
  const int y_ticks = static_cast<int>(std::lround((y.hi - y.lo) / tick_step));
  for (int i = 0; i <= y_ticks; ++i) {
    const double v = y.lo + i * tick_step;
    out << "<text x=\"" << f2(x.pixel_lo - 8) << "\" y=\"" << f2(y.map(v) + 4)
        << "\" text-anchor=\"end\">" << text::format_fixed(v, 1) << "</text>\n";
  }
  out << "</g>\n";
  out << "<text x=\"" << f2((x.pixel_lo + x.pixel_hi) / 2) << "\" y=\"" << f2(kHeight - 20)
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << f2((y.pixel_lo + y.pixel_hi) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << f2((y.pixel_lo + y.pixel_hi) / 2)
      << ")\">" << escape(y_label) << "</text>\n";
}

double round_up(double v, double step) { return std::ceil(v / step - 1e-9) * step; }

}  // namespace

std::string scatter_svg(const std::vector<ScatterPoint>& points,
                        const std::vector<ScatterOverlay>& overlays) {
  double top = 0.1;
  for (const auto& p : points) top = std::max({top, p.gt_mean, p.cand_mean});
  top = std::min(1.0, round_up(top, 0.1));
  const Axis x{0.0, top, kLeft, kWidth - kRight};
  const Axis y{0.0, top, kHeight - kBottom, kTop};

  std::map<std::string, const ScatterPoint*> by_name;
  for (const auto& p : points) by_name.emplace(p.system, &p);

  std::ostringstream out;
  open_svg(out, "Per-system mean score: ground truth vs candidate");
  draw_axes(out, x, y, "ground-truth mean", "candidate mean", top > 0.5 ? 0.2 : 0.1);
  out << "<line class=\"diagonal\" x1=\"" << f2(x.map(0)) << "\" y1=\"" << f2(y.map(0))
      << "\" x2=\"" << f2(x.map(top)) << "\" y2=\"" << f2(y.map(top))
      << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";

  out << "<g class=\"errors\" stroke-width=\"1.5\" opacity=\"0.7\">\n";
  for (const auto& o : overlays) {
    auto a = by_name.find(o.system_a);
    auto b = by_name.find(o.system_b);
    if (a == by_name.end() || b == by_name.end()) continue;
    out << "<line class=\"" << (o.type_one ? "fp" : "fn") << "\" x1=\""
        << f2(x.map(a->second->gt_mean)) << "\" y1=\"" << f2(y.map(a->second->cand_mean))
        << "\" x2=\"" << f2(x.map(b->second->gt_mean)) << "\" y2=\""
        << f2(y.map(b->second->cand_mean)) << "\" stroke=\""
        << (o.type_one ? "#d62728" : "#1f77b4") << "\"/>\n";
  }
  out << "</g>\n<g class=\"systems\" fill=\"black\">\n";
  for (const auto& p : points) {
    out << "<circle class=\"system\" cx=\"" << f2(x.map(p.gt_mean)) << "\" cy=\""
        << f2(y.map(p.cand_mean)) << "\" r=\"4\"><title>" << escape(p.system)
        << "</title></circle>\n";
  }
  out << "</g>\n";

  const double lx = kWidth - kRight + 20;
  out << "<g class=\"legend\">\n"
      << "<rect x=\"" << f2(lx) << "\" y=\"60\" width=\"14\" height=\"3\" fill=\"#d62728\"/>"
      << "<text x=\"" << f2(lx + 20) << "\" y=\"65\">Type I (FP)</text>\n"
      << "<rect x=\"" << f2(lx) << "\" y=\"80\" width=\"14\" height=\"3\" fill=\"#1f77b4\"/>"
      << "<text x=\"" << f2(lx + 20) << "\" y=\"85\">Type II (FN)</text>\n"
      << "</g>\n</svg>\n";
  return out.str();
}

std::string sweep_svg(const std::vector<Curve>& curves) {
  static const std::map<std::string, std::string, std::less<>> kColors = {
      {"p1", "#1f77b4"}, {"r1", "#ff7f0e"}, {"p2", "#2ca02c"},
      {"r2", "#d62728"}, {"bac", "#9467bd"}, {"mcc", "#8c564b"}};

  double low = 0.0;
  for (const auto& c : curves) {
    for (const auto& p : c.points) low = std::min(low, p.mean - p.variance);
  }
  low = std::max(-1.0, -round_up(-low, 0.2));
  const Axis x{0.0, 1.0, kLeft, kWidth - kRight};
  const Axis y{low, 1.0, kHeight - kBottom, kTop};

  std::ostringstream out;
  open_svg(out, "Classification metrics vs fraction of relevant judgments sampled");
  draw_axes(out, x, y, "fraction of relevant judgments sampled", "metric value", 0.2);

  double legend_y = 60.0;
  for (const auto& c : curves) {
    auto color = kColors.find(c.metric);
    const std::string stroke = color == kColors.end() ? "black" : color->second;
    out << "<g class=\"metric\" stroke=\"" << stroke << "\" fill=\"none\">\n";
    out << "<polyline class=\"metric-" << escape(c.metric) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      out << (i ? " " : "") << f2(x.map(c.points[i].fraction)) << ',' << f2(y.map(c.points[i].mean));
    }
    out << "\"/>\n";
    for (const auto& p : c.points) {
      const double px = x.map(p.fraction);
      const double lo = std::max(y.lo, p.mean - p.variance);
      const double hi = std::min(y.hi, p.mean + p.variance);
      out << "<line class=\"errbar\" x1=\"" << f2(px) << "\" y1=\"" << f2(y.map(lo)) << "\" x2=\""
          << f2(px) << "\" y2=\"" << f2(y.map(hi)) << "\"/>\n";
    }
    out << "</g>\n";
    out << "<rect x=\"" << f2(kWidth - kRight + 20) << "\" y=\"" << f2(legend_y)
        << "\" width=\"14\" height=\"3\" fill=\"" << stroke << "\"/><text x=\""
        << f2(kWidth - kRight + 40) << "\" y=\"" << f2(legend_y + 5) << "\">" << escape(c.metric)
        << "</text>\n";
    legend_y += 20.0;
  }
  out << "</svg>\n";
  return out.str();
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::ptrdiff_t column(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  }

  std::vector<std::string> missing(const std::vector<std::string_view>& required) const {
    std::vector<std::string> out;
    for (auto name : required) {
      if (column(name) < 0) out.emplace_back(name);
    }
    return out;
  }
};

Table read_table(std::string_view csv) {
  Table table;
  std::size_t pos = 0;
  bool first = true;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    auto line = csv.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty() || line == "\r") continue;
    auto fields = text::split_csv(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size()) {
        throw ValidationError("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

double cell_number(const std::string& s) {
  auto v = text::parse_double(s);
  if (!v) throw ValidationError("non-numeric CSV value '" + s + "'");
  return *v;
}

const std::vector<std::string_view> kScatterColumns = {
    "system_a", "system_b", "mean_gt_a", "mean_gt_b", "mean_cand_a", "mean_cand_b", "class"};

std::vector<std::string_view> sweep_columns() {
  std::vector<std::string_view> cols = {"fraction"};
  for (auto m : kPlottedMetrics) cols.push_back(m);
  return cols;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

std::string render_scatter(const Table& t) {
  if (auto miss = t.missing(kScatterColumns); !miss.empty()) {
    throw ValidationError("pairs CSV is missing columns: " + join(miss));
  }
  const auto a = t.column("system_a"), b = t.column("system_b");
  const auto ga = t.column("mean_gt_a"), gb = t.column("mean_gt_b");
  const auto ca = t.column("mean_cand_a"), cb = t.column("mean_cand_b");
  const auto cls = t.column("class");

  std::vector<ScatterPoint> points;
  std::map<std::string, std::size_t> seen;
  auto add_point = [&](const std::string& name, const std::string& g, const std::string& c) {
    if (seen.contains(name)) return;
    seen.emplace(name, points.size());
    points.push_back({name, cell_number(g), cell_number(c)});
  };
  std::vector<ScatterOverlay> overlays;
  for (const auto& row : t.rows) {
    add_point(row[a], row[ga], row[ca]);
    add_point(row[b], row[gb], row[cb]);
    if (row[cls] == "FP" || row[cls] == "FN") {
      overlays.push_back({row[a], row[b], row[cls] == "FP"});
    }
  }
  return scatter_svg(points, overlays);
}

std::string render_sweep(const Table& t) {
  if (auto miss = t.missing(sweep_columns()); !miss.empty()) {
    throw ValidationError("sweep CSV is missing columns: " + join(miss));
  }
  const auto fcol = t.column("fraction");
  std::vector<double> fractions;
  for (const auto& row : t.rows) {
    const double f = cell_number(row[fcol]);
    if (std::find(fractions.begin(), fractions.end(), f) == fractions.end()) fractions.push_back(f);
  }
  std::sort(fractions.begin(), fractions.end());

  std::vector<Curve> curves;
  for (auto metric : kPlottedMetrics) {
    const auto col = t.column(metric);
    Curve curve{std::string(metric), {}};
    for (double f : fractions) {
      std::vector<double> values;
      for (const auto& row : t.rows) {
        if (cell_number(row[fcol]) != f || row[col] == "undefined") continue;
        values.push_back(cell_number(row[col]));
      }
      if (values.empty()) continue;
      double sum = 0.0;
      for (double v : values) sum += v;
      const double mean = sum / static_cast<double>(values.size());
      double sq = 0.0;
      for (double v : values) sq += (v - mean) * (v - mean);
      curve.points.push_back({f, mean, sq / static_cast<double>(values.size())});
    }
    curves.push_back(std::move(curve));
  }
  return sweep_svg(curves);
}

}  // namespace

std::string render_plot(std::string_view csv, PlotStyle style) {
  const Table table = read_table(csv);
  if (style == PlotStyle::scatter) return render_scatter(table);
  if (style == PlotStyle::sweep) return render_sweep(table);
  if (table.column("system_a") >= 0) return render_scatter(table);
  if (table.column("fraction") >= 0) return render_sweep(table);
  throw ValidationError("unrecognised CSV schema; pairs plot needs [" +
                        join(table.missing(kScatterColumns)) + "], sweep plot needs [" +
                        join(table.missing(sweep_columns())) + "]");
}

}  // namespace qrelcmp
