#ifndef BSGS_CLI_REPORT_HPP_
#define BSGS_CLI_REPORT_HPP_

// Tabular results and their CSV / JSON / SVG renderings. Numbers are
// written with 17 significant digits through std::to_chars, which ignores
// the process locale.

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace bsgs::cli {

/// Empty cells stand for absent values (e.g. a standard error with one replication).
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
      throw std::logic_error("table '" + name + "': row has " + std::to_string(row.size()) + " cells, expected " +
                             std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
  }
  std::size_t column(const std::string& c) const {
    const auto it = std::find(columns.begin(), columns.end(), c);
    if (it == columns.end()) throw std::out_of_range("table '" + name + "' has no column '" + c + "'");
    return std::size_t(it - columns.begin());
  }
};

/// Double or absent: NaN maps to an empty cell.
inline Cell num(double x) { return std::isnan(x) ? Cell{} : Cell{x}; }
inline Cell integer(std::int64_t x) { return Cell{x}; }
inline Cell text(std::string s) { return Cell{std::move(s)}; }

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct LinePlot {
  std::string name, title, x_label, y_label;
  std::vector<Series> series;
};

/// Predictive quantile bands over forecast origins plus realized outcomes.
struct FanChart {
  std::string name, title;
  std::vector<std::string> labels;
  std::vector<double> q05, q25, q50, q75, q95, outcome;
};

struct Report {
  std::vector<Table> tables;
  std::vector<LinePlot> lines;
  std::vector<FanChart> fans;
};

struct Formats {
  bool csv = true, json = true, svg = true;
};

inline Formats parse_formats(const std::vector<std::string>& names) {
  if (names.empty()) throw std::invalid_argument("formats: empty list");
  Formats f{false, false, false};
  for (const auto& n : names) {
    if (n == "csv") f.csv = true;
    else if (n == "json") f.json = true;
    else if (n == "svg") f.svg = true;
    else throw std::invalid_argument("formats: unknown format '" + n + "' (expected csv, json or svg)");
  }
  return f;
}

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string cell_to_csv(const Cell& c) {
  switch (c.index()) {
    case 0: return "";
    case 1: return format_double(std::get<double>(c));
    case 2: return std::to_string(std::get<std::int64_t>(c));
    default: return csv_escape(std::get<std::string>(c));
  }
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_escape(t.columns[i]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_to_csv(row[i]);
    out += "\n";
  }
  return out;
}

inline nlohmann::ordered_json cell_to_json(const Cell& c) {
  switch (c.index()) {
    case 0: return nullptr;
    case 1: {
      const double x = std::get<double>(c);
      // JSON has no infinities; they are kept as strings.
      if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
      return x;
    }
    case 2: return std::get<std::int64_t>(c);
    default: return std::get<std::string>(c);
  }
}

inline nlohmann::ordered_json to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["name"] = t.name;
  j["columns"] = t.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& c : row) r.push_back(cell_to_json(c));
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline Table table_from_json(const nlohmann::ordered_json& j) {
  Table t;
  t.name = j.at("name").get<std::string>();
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& r : j.at("rows")) {
    std::vector<Cell> row;
    for (const auto& c : r) {
      if (c.is_null()) row.emplace_back();
      else if (c.is_number_integer()) row.emplace_back(c.get<std::int64_t>());
      else if (c.is_number()) row.emplace_back(c.get<double>());
      else {
        const std::string s = c.get<std::string>();
        if (s == "inf") row.emplace_back(std::numeric_limits<double>::infinity());
        else if (s == "-inf") row.emplace_back(-std::numeric_limits<double>::infinity());
        else row.emplace_back(s);
      }
    }
    t.add(std::move(row));
  }
  return t;
}

inline std::vector<Table> read_json_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const auto j = nlohmann::ordered_json::parse(in);
  std::vector<Table> out;
  for (const auto& t : j.at("tables")) out.push_back(table_from_json(t));
  return out;
}

// ---------------------------------------------------------------- SVG

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fixed(double x, int digits = 2) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

// Maps data coordinates into a 640x400 frame with 60 px margins.
struct Frame {
  double x0, x1, y0, y1;
  static constexpr double W = 640, H = 400, M = 60;
  double px(double x) const { return M + (x - x0) / (x1 - x0) * (W - 2 * M); }
  double py(double y) const { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); }
};

inline Frame make_frame(double xmin, double xmax, double ymin, double ymax) {
  if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymax > ymin)) {
    const double pad = std::max(1e-3, 0.1 * std::abs(ymin));
    ymin -= pad;
    ymax += pad;
  }
  const double pad = 0.05 * (ymax - ymin);
  if (ymin >= 0.0 && ymin - pad < 0.0) ymin = 0.0; else ymin -= pad;
  return {xmin, xmax, ymin, ymax + pad};
}

inline std::string svg_open(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n"
         "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
         "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         xml_escape(title) + "</text>\n";
}

inline std::string axes(const Frame& f, const std::string& xl, const std::string& yl) {
  std::string s = "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"60\" y1=\"340\" x2=\"580\" y2=\"340\"/>\n<line x1=\"60\" y1=\"60\" x2=\"60\" y2=\"340\"/>\n</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = f.y0 + (f.y1 - f.y0) * k / 4.0;
    s += "<text x=\"54\" y=\"" + fixed(f.py(v) + 4) + "\" text-anchor=\"end\">" + fixed(v, 3) + "</text>\n";
    const double u = f.x0 + (f.x1 - f.x0) * k / 4.0;
    s += "<text x=\"" + fixed(f.px(u)) + "\" y=\"356\" text-anchor=\"middle\">" + fixed(u, 1) + "</text>\n";
  }
  s += "<text x=\"320\" y=\"384\" text-anchor=\"middle\">" + xml_escape(xl) + "</text>\n";
  s += "<text x=\"16\" y=\"200\" text-anchor=\"middle\" transform=\"rotate(-90 16 200)\">" + xml_escape(yl) +
       "</text>\n</g>\n";
  return s;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace detail

inline std::string render_svg(const LinePlot& p) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : p.series) {
    for (double x : s.x) { xmin = std::min(xmin, x); xmax = std::max(xmax, x); }
    for (double y : s.y) { ymin = std::min(ymin, y); ymax = std::max(ymax, y); }
  }
  const detail::Frame f = detail::make_frame(xmin, xmax, ymin, ymax);
  std::string out = detail::svg_open(p.title) + detail::axes(f, p.x_label, p.y_label);
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* colour = detail::kPalette[k % 6];
    out += "<polyline class=\"series\" data-label=\"" + detail::xml_escape(s.label) + "\" fill=\"none\" stroke=\"" +
           colour + "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out += (i ? " " : "") + detail::fixed(f.px(s.x[i])) + "," + detail::fixed(f.py(s.y[i]));
    }
    out += "\"/>\n";
    out += "<text x=\"470\" y=\"" + detail::fixed(70 + 14 * double(k)) + "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" +
           colour + "\">" + detail::xml_escape(s.label) + "</text>\n";
  }
  return out + "</svg>\n";
}

inline std::string render_svg(const FanChart& c) {
  const std::size_t n = c.q50.size();
  double ymin = 1e300, ymax = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    ymin = std::min({ymin, c.q05[i], c.outcome[i]});
    ymax = std::max({ymax, c.q95[i], c.outcome[i]});
  }
  const detail::Frame f = detail::make_frame(0.0, std::max(1.0, double(n) - 1.0), ymin, ymax);
  std::string out = detail::svg_open(c.title) + detail::axes(f, "forecast origin", "");
  auto band = [&](const std::vector<double>& lo, const std::vector<double>& hi, const char* opacity) {
    std::string s = "<polygon fill=\"#1f77b4\" fill-opacity=\"" + std::string(opacity) + "\" points=\"";
    for (std::size_t i = 0; i < n; ++i) s += detail::fixed(f.px(double(i))) + "," + detail::fixed(f.py(hi[i])) + " ";
    for (std::size_t i = n; i-- > 0;) s += detail::fixed(f.px(double(i))) + "," + detail::fixed(f.py(lo[i])) + (i ? " " : "");
    return s + "\"/>\n";
  };
  out += band(c.q05, c.q95, "0.2");
  out += band(c.q25, c.q75, "0.4");
  out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + detail::fixed(f.px(double(i))) + "," + detail::fixed(f.py(c.q50[i]));
  out += "\"/>\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += "<circle cx=\"" + detail::fixed(f.px(double(i))) + "\" cy=\"" + detail::fixed(f.py(c.outcome[i])) +
           "\" r=\"3\" fill=\"black\"><title>" + detail::xml_escape(i < c.labels.size() ? c.labels[i] : "") +
           "</title></circle>\n";
  }
  return out + "</svg>\n";
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Writes <dir>/<table>.csv, <dir>/report.json and <dir>/<plot>.svg as
/// requested. Returns the written paths in a fixed order.
inline std::vector<std::filesystem::path> emit_report(const Report& r, const std::filesystem::path& dir,
                                                       const Formats& formats) {
  if (r.tables.empty()) throw std::invalid_argument("emit_report: no tables");
  std::set<std::string> names;
  for (const auto& t : r.tables) {
    if (!names.insert(t.name).second) throw std::logic_error("emit_report: duplicate table '" + t.name + "'");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("output directory " + dir.string() + " is not writable" + (ec ? ": " + ec.message() : ""));
  }
  std::vector<std::filesystem::path> written;
  if (formats.csv) {
    for (const auto& t : r.tables) {
      written.push_back(dir / (t.name + ".csv"));
      write_file(written.back(), to_csv(t));
    }
  }
  if (formats.json) {
    nlohmann::ordered_json j;
    j["tables"] = nlohmann::ordered_json::array();
    for (const auto& t : r.tables) j["tables"].push_back(to_json(t));
    written.push_back(dir / "report.json");
    write_file(written.back(), j.dump(2) + "\n");
  }
  if (formats.svg) {
    for (const auto& p : r.lines) {
      written.push_back(dir / (p.name + ".svg"));
      write_file(written.back(), render_svg(p));
    }
    for (const auto& c : r.fans) {
      written.push_back(dir / (c.name + ".svg"));
      write_file(written.back(), render_svg(c));
    }
  }
  return written;
}

}  // namespace bsgs::cli

#endif  // BSGS_CLI_REPORT_HPP_
