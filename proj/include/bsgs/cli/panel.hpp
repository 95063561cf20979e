#ifndef BSGS_CLI_PANEL_HPP_
#define BSGS_CLI_PANEL_HPP_

// CSV ingestion for mixed monthly / quarterly panels.
//
// One row per month (or per quarter when every series is quarterly), ISO
// dates in the first column unless another is named. Quarterly series carry
// values in the last month of each quarter and blanks elsewhere.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsgs::cli {

enum class Frequency { Monthly, Quarterly };
enum class Transform { Level, LogDiff, GrowthAnnualized };

inline Frequency frequency_from_string(const std::string& s) {
  if (s == "monthly" || s == "M") return Frequency::Monthly;
  if (s == "quarterly" || s == "Q") return Frequency::Quarterly;
  throw std::invalid_argument("unknown frequency '" + s + "' (expected monthly or quarterly)");
}

inline Transform transform_from_string(const std::string& s) {
  if (s == "level") return Transform::Level;
  if (s == "logdiff") return Transform::LogDiff;
  if (s == "growth_ann") return Transform::GrowthAnnualized;
  throw std::invalid_argument("unknown transform code '" + s + "' (expected level, logdiff or growth_ann)");
}

struct SeriesSchema {
  Frequency frequency = Frequency::Monthly;
  Transform transform = Transform::Level;
};

struct PanelSchema {
  std::string date_column = "date";
  std::map<std::string, SeriesSchema> series;  // columns not listed are read as monthly levels
};

/// Year and month of a period; quarters are stored by their last month.
struct YearMonth {
  int year = 0, month = 0;
  int index() const { return year * 12 + month - 1; }
  int quarter() const { return (month - 1) / 3 + 1; }
  std::string iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
  }
  std::string quarter_label() const { return std::to_string(year) + "Q" + std::to_string(quarter()); }
};

inline YearMonth parse_date(const std::string& s, int row) {
  // YYYY-MM or YYYY-MM-DD
  auto fail = [&] { return std::invalid_argument("row " + std::to_string(row) + ": unparseable date '" + s + "'"); };
  if (s.size() != 7 && s.size() != 10) throw fail();
  if (s[4] != '-' || (s.size() == 10 && s[7] != '-')) throw fail();
  YearMonth ym;
  auto read = [&](std::size_t at, std::size_t len, int& v) {
    const auto r = std::from_chars(s.data() + at, s.data() + at + len, v);
    if (r.ec != std::errc() || r.ptr != s.data() + at + len) throw fail();
  };
  read(0, 4, ym.year);
  read(5, 2, ym.month);
  if (ym.month < 1 || ym.month > 12) throw fail();
  if (s.size() == 10) {
    int day = 0;
    read(8, 2, day);
    if (day < 1 || day > 31) throw fail();
  }
  return ym;
}

/// Quarter label "YYYYQn" or an ISO date, mapped to a quarter index.
inline int quarter_index(const std::string& s) {
  if (s.size() == 6 && (s[4] == 'Q' || s[4] == 'q')) {
    int year = 0;
    const auto r = std::from_chars(s.data(), s.data() + 4, year);
    const int q = s[5] - '0';
    if (r.ec != std::errc() || q < 1 || q > 4) throw std::invalid_argument("bad quarter label '" + s + "'");
    return year * 4 + q - 1;
  }
  const YearMonth ym = parse_date(s, 0);
  return ym.year * 4 + ym.quarter() - 1;
}

struct PanelSeries {
  std::string name;
  Frequency frequency = Frequency::Monthly;
  Transform transform = Transform::Level;
  // Native-frequency values after the transform, NaN where undefined.
  Eigen::VectorXd values;
};

/// Series aligned on a common quarterly calendar: quarter q covers months
/// 3q, 3q+1, 3q+2 of every monthly series.
struct Panel {
  std::vector<YearMonth> quarters;  // last month of each quarter
  std::vector<PanelSeries> series;
  bool monthly_rows = true;
  int m = 3;  // months per quarter, the alignment metadata

  int T() const { return int(quarters.size()); }
  const PanelSeries& get(const std::string& name) const {
    for (const auto& s : series)
      if (s.name == name) return s;
    throw std::invalid_argument("panel has no series '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& s : series)
      if (s.name == name) return true;
    return false;
  }
  std::string period_label(int q) const { return quarters[q].quarter_label(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
      else if (c == '"') quoted = false;
      else cur += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::optional<double> parse_value(const std::string& raw, const std::string& series, const std::string& date) {
  std::string s;
  for (char c : raw)
    if (c != ' ' && c != '\t') s += c;
  if (s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == ".") return std::nullopt;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("series '" + series + "' at " + date + ": unparseable value '" + raw + "'");
  }
  return v;
}

inline Eigen::VectorXd apply_transform(const Eigen::VectorXd& x, Transform t, Frequency f, const std::string& name) {
  if (t == Transform::Level) return x;
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
  const double scale = t == Transform::LogDiff ? 1.0 : (f == Frequency::Quarterly ? 400.0 : 1200.0);
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(x[i - 1])) continue;
    if (!(x[i] > 0.0) || !(x[i - 1] > 0.0)) {
      throw std::invalid_argument("series '" + name + "': log transform of a non-positive value");
    }
    out[i] = scale * std::log(x[i] / x[i - 1]);
  }
  return out;
}

}  // namespace detail

/// Reads the panel and applies transforms. Missing values are kept as NaN;
/// estimation_window() rejects them where they matter.
inline Panel load_panel(std::istream& in, const PanelSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("load_panel: empty file");
  const auto header = detail::split_csv_line(line);
  int date_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == schema.date_column) date_col = int(i);
  if (date_col < 0) throw std::invalid_argument("load_panel: no date column '" + schema.date_column + "'");
  for (const auto& [name, _] : schema.series) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw std::invalid_argument("load_panel: schema names series '" + name + "' absent from the header");
    }
  }

  std::vector<YearMonth> dates;
  std::vector<std::vector<std::string>> cells;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != header.size()) {
      throw std::invalid_argument("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(f.size()));
    }
    dates.push_back(parse_date(f[date_col], row));
    cells.push_back(std::move(f));
  }
  if (dates.size() < 2) throw std::invalid_argument("load_panel: need at least two rows");

  bool all_quarterly = true;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (int(i) == date_col) continue;
    const auto it = schema.series.find(header[i]);
    if (it == schema.series.end() || it->second.frequency != Frequency::Quarterly) all_quarterly = false;
  }
  const int step = dates[1].index() - dates[0].index();
  if (step != 1 && !(step == 3 && all_quarterly)) {
    throw std::invalid_argument("ragged frequencies: rows must be consecutive months (or quarters when every series is quarterly)");
  }
  for (std::size_t r = 1; r < dates.size(); ++r) {
    if (dates[r].index() - dates[r - 1].index() != step) {
      throw std::invalid_argument("ragged frequencies: date " + dates[r].iso() + " does not follow " + dates[r - 1].iso());
    }
  }

  Panel p;
  p.monthly_rows = step == 1;
  // Quarters fully covered by the rows.
  std::vector<int> q_rows;  // row index of each quarter's last month
  for (std::size_t r = 0; r < dates.size(); ++r) {
    if (dates[r].month % 3 != 0) continue;
    if (p.monthly_rows && r < 2) continue;
    q_rows.push_back(int(r));
    p.quarters.push_back(dates[r]);
  }
  if (p.quarters.empty()) throw std::invalid_argument("load_panel: no complete quarter in the file");
  if (!p.monthly_rows) {
    for (const auto& d : dates)
      if (d.month % 3 != 0) throw std::invalid_argument("quarterly rows must be dated in quarter-end months: " + d.iso());
  }

  const int Q = p.T();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (int(c) == date_col) continue;
    PanelSeries s;
    s.name = header[c];
    const auto it = schema.series.find(s.name);
    if (it != schema.series.end()) {
      s.frequency = it->second.frequency;
      s.transform = it->second.transform;
    }
    if (s.frequency == Frequency::Monthly && !p.monthly_rows) {
      throw std::invalid_argument("ragged frequencies: monthly series '" + s.name + "' in a quarterly file");
    }
    Eigen::VectorXd raw;
    if (s.frequency == Frequency::Quarterly) {
      raw.resize(Q);
      for (int q = 0; q < Q; ++q) {
        const auto v = detail::parse_value(cells[q_rows[q]][c], s.name, dates[q_rows[q]].iso());
        raw[q] = v ? *v : std::numeric_limits<double>::quiet_NaN();
      }
      if (p.monthly_rows) {
        for (std::size_t r = 0; r < dates.size(); ++r) {
          if (dates[r].month % 3 == 0) continue;
          if (detail::parse_value(cells[r][c], s.name, dates[r].iso())) {
            throw std::invalid_argument("ragged frequencies: quarterly series '" + s.name + "' has a value at " +
                                        dates[r].iso() + ", which is not a quarter-end month");
          }
        }
      }
    } else {
      raw.resize(3 * Q);
      for (int q = 0; q < Q; ++q) {
        for (int k = 0; k < 3; ++k) {
          const int r = q_rows[q] - 2 + k;
          const auto v = detail::parse_value(cells[r][c], s.name, dates[r].iso());
          raw[3 * q + k] = v ? *v : std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
    s.values = detail::apply_transform(raw, s.transform, s.frequency, s.name);
    p.series.push_back(std::move(s));
  }
  return p;
}

inline Panel load_panel(const std::string& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_panel: cannot open " + path);
  return load_panel(in, schema);
}

/// First and one-past-last quarter over which every named series is
/// observed. Leading NaNs (series start, transform loss) are trimmed; any
/// interior or trailing NaN is an error naming the series and date.
inline std::pair<int, int> estimation_window(const Panel& p, const std::vector<std::string>& names) {
  int first = 0;
  const int last = p.T();
  for (const auto& name : names) {
    const PanelSeries& s = p.get(name);
    const int per = s.frequency == Frequency::Monthly ? 3 : 1;
    int lead = 0;
    while (lead < s.values.size() && std::isnan(s.values[lead])) ++lead;
    if (lead == s.values.size()) throw std::invalid_argument("series '" + name + "' has no observations");
    first = std::max(first, (lead + per - 1) / per);
  }
  for (const auto& name : names) {
    const PanelSeries& s = p.get(name);
    const int per = s.frequency == Frequency::Monthly ? 3 : 1;
    for (Eigen::Index i = Eigen::Index(first) * per; i < s.values.size(); ++i) {
      if (std::isnan(s.values[i])) {
        const int q = int(i / per);
        YearMonth ym = p.quarters[q];
        if (per == 3) ym.month = ym.month - 2 + int(i % 3);
        throw std::invalid_argument("missing value in series '" + name + "' at " + ym.iso() + " (row for quarter " +
                                    p.period_label(q) + ")");
      }
    }
  }
  if (first >= last) throw std::invalid_argument("estimation window is empty");
  return {first, last};
}

}  // namespace bsgs::cli

#endif  // BSGS_CLI_PANEL_HPP_
