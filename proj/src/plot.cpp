#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qipm/bench.hpp"

namespace qipm {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;  // room for the legend
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument("plot: unknown column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (first) {
      t.header = split_csv_line(line);
      first = false;
    } else {
      t.rows.push_back(split_csv_line(line));
    }
  }
  return t;
}

bool to_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0' && std::isfinite(out);
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
};

Axis make_axis(const std::vector<double>& values) {
  Axis a;
  if (values.empty()) return a;
  a.lo = *std::min_element(values.begin(), values.end());
  a.hi = *std::max_element(values.begin(), values.end());
  if (a.hi == a.lo) {
    const double pad = a.lo == 0.0 ? 1.0 : std::abs(a.lo) * 0.1;
    a.lo -= pad;
    a.hi += pad;
  }
  return a;
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "line") return PlotKind::line;
  if (name == "loglog") return PlotKind::loglog;
  throw std::invalid_argument("unknown plot kind '" + name + "' (expected line|loglog)");
}

std::string render_plot(const std::string& csv, const PlotSpec& spec) {
  const Table table = parse_csv(csv);
  if (table.header.empty()) throw std::invalid_argument("plot: CSV has no header");
  const std::size_t xcol = table.column(spec.x);
  std::vector<std::size_t> ycols;
  for (const auto& y : spec.y) ycols.push_back(table.column(y));
  const bool grouped = !spec.group.empty();
  const std::size_t gcol = grouped ? table.column(spec.group) : 0;
  const bool logs = spec.kind == PlotKind::loglog;

  std::vector<Series> series;
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < ycols.size(); ++k) {
    if (!grouped) {
      index[spec.y[k]] = series.size();
      series.push_back({spec.y[k], {}});
    }
  }
  for (const auto& row : table.rows) {
    double x = 0.0;
    if (xcol >= row.size() || !to_number(row[xcol], x)) continue;
    if (logs && !(x > 0.0)) continue;
    for (std::size_t k = 0; k < ycols.size(); ++k) {
      double y = 0.0;
      if (ycols[k] >= row.size() || !to_number(row[ycols[k]], y)) continue;
      if (logs && !(y > 0.0)) continue;
      std::string label = spec.y[k];
      if (grouped) label += " [" + (gcol < row.size() ? row[gcol] : std::string()) + "]";
      auto it = index.find(label);
      if (it == index.end()) {
        it = index.emplace(label, series.size()).first;
        series.push_back({label, {}});
      }
      series[it->second].points.emplace_back(logs ? std::log10(x) : x, logs ? std::log10(y) : y);
    }
  }

  std::vector<double> xs, ys;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xs.push_back(x);
      ys.push_back(y);
    }
  }
  const Axis ax = make_axis(xs);
  const Axis ay = make_axis(ys);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };
  auto tick_label = [&](double v) { return logs ? "1e" + num(v) : num(v); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
     << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    os << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(spec.title) << "</text>\n";
  }
  os << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(kLeft + pw)
     << "\" y2=\"" << num(kTop + ph) << "\"/>\n";
  os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
     << "\" y2=\"" << num(kTop + ph) << "\"/>\n";
  os << "</g>\n";
  os << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double vx = ax.lo + (ax.hi - ax.lo) * t / 4.0;
    const double vy = ay.lo + (ay.hi - ay.lo) * t / 4.0;
    os << "<text x=\"" << num(px(vx)) << "\" y=\"" << num(kTop + ph + 15)
       << "\" text-anchor=\"middle\">" << tick_label(vx) << "</text>\n";
    os << "<text x=\"" << num(kLeft - 5) << "\" y=\"" << num(py(vy) + 3)
       << "\" text-anchor=\"end\">" << tick_label(vy) << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
     << xml_escape(spec.x) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
    os << "<g class=\"series\" data-label=\"" << xml_escape(s.label) << "\">\n";
    if (s.points.size() >= 2) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        os << (i ? " " : "") << num(px(s.points[i].first)) << ',' << num(py(s.points[i].second));
      }
      os << "\"/>\n";
    }
    for (const auto& [x, y] : s.points) {
      os << "<circle class=\"marker\" cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y))
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    os << "</g>\n";
  }

  os << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(k);
    const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
    os << "<g class=\"legend-entry\"><rect x=\"" << num(kLeft + pw + 15) << "\" y=\"" << num(y - 8)
       << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/><text x=\""
       << num(kLeft + pw + 30) << "\" y=\"" << num(y) << "\">" << xml_escape(series[k].label)
       << "</text></g>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void emit_plot(const std::filesystem::path& csv_path, const PlotSpec& spec,
               const std::filesystem::path& svg_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw std::runtime_error("emit_plot: cannot read " + csv_path.string());
  std::ostringstream text;
  text << in.rdbuf();
  const std::string svg = render_plot(text.str(), spec);
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot: cannot write " + svg_path.string());
  out << svg;
}

}  // namespace qipm
