#ifndef BSGS_DESIGN_HPP_
#define BSGS_DESIGN_HPP_

// Regression design assembly: grouped blocks and MIDAS lag-polynomial bases.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsgs {

enum class BasisFamily { UMIDAS, Almon, RestrictedAlmon, Legendre, Bernstein, ChebyshevT, Fixed };

inline const char* to_string(BasisFamily f) {
  switch (f) {
    case BasisFamily::UMIDAS: return "umidas";
    case BasisFamily::Almon: return "almon";
    case BasisFamily::RestrictedAlmon: return "restricted_almon";
    case BasisFamily::Legendre: return "legendre";
    case BasisFamily::Bernstein: return "bernstein";
    case BasisFamily::ChebyshevT: return "chebyshev";
    case BasisFamily::Fixed: return "fixed";
  }
  return "unknown";
}

inline BasisFamily basis_family_from_string(const std::string& s) {
  for (auto f : {BasisFamily::UMIDAS, BasisFamily::Almon, BasisFamily::RestrictedAlmon,
                 BasisFamily::Legendre, BasisFamily::Bernstein, BasisFamily::ChebyshevT,
                 BasisFamily::Fixed}) {
    if (s == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown basis family '" + s + "'");
}

/// Lag-polynomial basis: row i holds phi_i(0..p_x).
struct BasisMatrix {
  Eigen::MatrixXd values;
  BasisFamily family = BasisFamily::UMIDAS;
  int g = 1;
  int p_x = 0;
};

namespace detail {

inline double lag_position(int u, int p_x) { return p_x == 0 ? 0.0 : double(u) / double(p_x); }

// Modified Gram-Schmidt on the rows, repeated once for numerical orthogonality.
inline void orthonormalize_rows(Eigen::MatrixXd& rows) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      for (Eigen::Index k = 0; k < i; ++k) {
        rows.row(i) -= rows.row(i).dot(rows.row(k)) * rows.row(k);
      }
      const double norm = rows.row(i).norm();
      if (!(norm > 1e-12)) throw std::invalid_argument("basis rows are linearly dependent on the lag grid");
      rows.row(i) /= norm;
    }
  }
}

}  // namespace detail

/// Almon monomials u^i on u = 0..p_x. The restricted form multiplies by
/// (u - p_x)(u - p_x + 1), so every row vanishes at the last two lags.
inline BasisMatrix almon_basis(int g, int p_x, bool restricted) {
  if (g < 1) throw std::invalid_argument("almon_basis: g must be >= 1");
  if (p_x < 0) throw std::invalid_argument("almon_basis: p_x must be >= 0");
  if (restricted && g < 3) throw std::invalid_argument("almon_basis: restricted Almon requires g >= 3");
  if (restricted && g > p_x - 1) {
    throw std::invalid_argument("almon_basis: restricted Almon requires g <= p_x - 1");
  }
  BasisMatrix b;
  b.family = restricted ? BasisFamily::RestrictedAlmon : BasisFamily::Almon;
  b.g = g;
  b.p_x = p_x;
  b.values.resize(g, p_x + 1);
  for (int u = 0; u <= p_x; ++u) {
    const double tail = restricted ? double(u - p_x) * double(u - p_x + 1) : 1.0;
    double power = 1.0;
    for (int i = 0; i < g; ++i) {
      b.values(i, u) = tail * power;
      power *= u;
    }
  }
  return b;
}

/// Orthonormal lag bases on the discrete lag grid. Legendre, Chebyshev and
/// Bernstein polynomials are evaluated at u/p_x and then orthonormalized with
/// respect to sum_u phi_i(u) phi_k(u); UMIDAS is the identity.
inline BasisMatrix orthogonal_basis(BasisFamily family, int g, int p_x) {
  if (p_x < 0) throw std::invalid_argument("orthogonal_basis: p_x must be >= 0");
  BasisMatrix b;
  b.family = family;
  b.p_x = p_x;
  if (family == BasisFamily::UMIDAS) {
    b.g = p_x + 1;
    b.values = Eigen::MatrixXd::Identity(p_x + 1, p_x + 1);
    return b;
  }
  if (family != BasisFamily::Legendre && family != BasisFamily::Bernstein &&
      family != BasisFamily::ChebyshevT) {
    throw std::invalid_argument(std::string("orthogonal_basis: unsupported family ") + to_string(family));
  }
  if (g < 1) throw std::invalid_argument("orthogonal_basis: g must be >= 1");
  if (p_x == 0 && g > 1) throw std::invalid_argument("orthogonal_basis: p_x = 0 admits only g = 1");
  if (g > p_x + 1) throw std::invalid_argument("orthogonal_basis: g exceeds the number of lags");
  b.g = g;
  b.values.resize(g, p_x + 1);
  for (int u = 0; u <= p_x; ++u) {
    const double x = detail::lag_position(u, p_x);
    if (family == BasisFamily::Bernstein) {
      const int n = g - 1;
      double binom = 1.0;
      for (int k = 0; k <= n; ++k) {
        b.values(k, u) = binom * std::pow(x, k) * std::pow(1.0 - x, n - k);
        binom = binom * (n - k) / (k + 1);
      }
      continue;
    }
    // Shifted three-term recurrences in s = 2x - 1.
    const double s = 2.0 * x - 1.0;
    double prev = 1.0, cur = s;
    b.values(0, u) = 1.0;
    if (g > 1) b.values(1, u) = s;
    for (int n = 1; n + 1 < g; ++n) {
      double next = family == BasisFamily::Legendre ? ((2.0 * n + 1.0) * s * cur - n * prev) / (n + 1.0)
                                                    : 2.0 * s * cur - prev;
      b.values(n + 1, u) = next;
      prev = cur;
      cur = next;
    }
  }
  detail::orthonormalize_rows(b.values);
  return b;
}

/// A single known weight row, e.g. true MIDAS weights.
inline BasisMatrix fixed_basis(const Eigen::VectorXd& weights) {
  if (weights.size() < 1) throw std::invalid_argument("fixed_basis: empty weights");
  BasisMatrix b;
  b.family = BasisFamily::Fixed;
  b.g = 1;
  b.p_x = int(weights.size()) - 1;
  b.values = weights.transpose();
  return b;
}

/// Contiguous column blocks, one per group.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (int s : sizes_) {
      if (s < 1) throw std::invalid_argument("Partition: group sizes must be positive");
      offsets_.push_back(offsets_.back() + s);
    }
  }

  int groups() const { return int(sizes_.size()); }
  int width() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int size(int j) const { return sizes_[j]; }
  int start(int j) const { return offsets_[j]; }
  int end(int j) const { return offsets_[j + 1]; }
  const std::vector<int>& sizes() const { return sizes_; }

  int group_of(int column) const {
    if (column < 0 || column >= width()) throw std::out_of_range("Partition: column out of range");
    int lo = 0, hi = groups() - 1;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (offsets_[mid] <= column) lo = mid; else hi = mid - 1;
    }
    return lo;
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
};

struct GroupedDesign {
  Eigen::VectorXd y;
  Eigen::MatrixXd Z;
  Partition partition;
  std::vector<std::string> group_labels;
  double horizon = 0.0;
  std::vector<std::optional<BasisMatrix>> basis_meta;
  // Per-column divisors applied by standardize_columns; empty when unscaled.
  Eigen::VectorXd column_scale;

  int T() const { return int(y.size()); }
  int width() const { return int(Z.cols()); }
  int groups() const { return partition.groups(); }
};

inline void validate(const GroupedDesign& d) {
  if (d.T() < 1) throw std::invalid_argument("design: T must be >= 1");
  if (d.Z.rows() != d.y.size()) throw std::invalid_argument("design: Z rows differ from length of y");
  if (d.partition.width() != d.Z.cols()) throw std::invalid_argument("design: partition does not cover Z");
  if (!d.y.allFinite() || !d.Z.allFinite()) throw std::invalid_argument("design: non-finite values");
}

inline GroupedDesign assemble_grouped_design(std::span<const Eigen::MatrixXd> blocks, const Eigen::VectorXd& y,
                                             double h, std::vector<std::string> labels = {}) {
  if (h < 0) throw std::invalid_argument("assemble_grouped_design: negative horizon");
  if (blocks.empty()) throw std::invalid_argument("assemble_grouped_design: no blocks");
  std::vector<int> sizes;
  Eigen::Index width = 0;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    if (blocks[j].rows() != y.size()) {
      throw std::invalid_argument("assemble_grouped_design: block " + std::to_string(j) + " has " +
                                  std::to_string(blocks[j].rows()) + " rows, expected " +
                                  std::to_string(y.size()));
    }
    sizes.push_back(int(blocks[j].cols()));
    width += blocks[j].cols();
  }
  GroupedDesign d;
  d.y = y;
  d.Z.resize(y.size(), width);
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    d.Z.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  d.partition = Partition(sizes);
  if (labels.empty()) {
    for (std::size_t j = 0; j < blocks.size(); ++j) labels.push_back("g" + std::to_string(j + 1));
  }
  if (labels.size() != blocks.size()) throw std::invalid_argument("assemble_grouped_design: label count");
  d.group_labels = std::move(labels);
  d.horizon = h;
  d.basis_meta.assign(blocks.size(), std::nullopt);
  validate(d);
  return d;
}

/// One high-frequency predictor. Observation k (1..m) of low-frequency
/// period t sits at values[m*t + k - 1]; values.size() must equal m * T.
struct HighFrequencySeries {
  std::string name;
  Eigen::VectorXd values;
  int m = 3;
  BasisMatrix basis;
};

class CalendarAlignmentError : public std::invalid_argument {
 public:
  CalendarAlignmentError(const std::string& series, int first_feasible)
      : std::invalid_argument("insufficient history for series '" + series +
                              "': first feasible low-frequency period is t=" + std::to_string(first_feasible)),
        series_(series),
        first_feasible_(first_feasible) {}
  const std::string& series() const { return series_; }
  int first_feasible() const { return first_feasible_; }

 private:
  std::string series_;
  int first_feasible_;
};

namespace detail {

inline int horizon_steps(double h, int m) {
  const double steps = h * m;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 || rounded < 0) {
    throw std::invalid_argument("horizon " + std::to_string(h) + " is not a multiple of 1/" + std::to_string(m));
  }
  return int(rounded);
}

inline int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

}  // namespace detail

/// First low-frequency period at which every MIDAS lag and AR lag exists.
inline int first_feasible_period(std::span<const HighFrequencySeries> panel, double h, int p_y) {
  int first = int(std::floor(h + 1e-12)) + p_y;
  for (const auto& s : panel) {
    const int hs = detail::horizon_steps(h, s.m);
    first = std::max(first, std::max(0, detail::ceil_div(hs + s.basis.p_x - s.m + 1, s.m)));
  }
  return first;
}

/// MIDAS design: block j holds Phi_i' x_{j, t-h} for each basis row i; a final
/// group of p_y autoregressive lags of y is appended when p_y > 0.
/// Rows run from first_period (default: first feasible) to the end of y.
inline GroupedDesign assemble_midas_design(const Eigen::VectorXd& y, std::span<const HighFrequencySeries> panel,
                                           double h, int p_y, std::optional<int> first_period = std::nullopt) {
  if (p_y < 0) throw std::invalid_argument("assemble_midas_design: p_y must be >= 0");
  if (panel.empty() && p_y == 0) throw std::invalid_argument("assemble_midas_design: empty design");
  const int T_lf = int(y.size());
  for (const auto& s : panel) {
    if (s.m < 1) throw std::invalid_argument("series '" + s.name + "': frequency ratio must be >= 1");
    if (s.values.size() != Eigen::Index(s.m) * T_lf) {
      throw std::invalid_argument("series '" + s.name + "': expected " + std::to_string(s.m * T_lf) +
                                  " high-frequency observations, got " + std::to_string(s.values.size()));
    }
    if (s.basis.values.cols() != s.basis.p_x + 1) throw std::invalid_argument("series '" + s.name + "': bad basis");
  }
  const int lag_floor = int(std::floor(h + 1e-12));
  int start = lag_floor + p_y;
  if (first_period) {
    start = *first_period;
    if (start < lag_floor + p_y) throw CalendarAlignmentError("y (autoregressive lags)", lag_floor + p_y);
  }
  for (const auto& s : panel) {
    const int hs = detail::horizon_steps(h, s.m);
    const int feasible = std::max(0, detail::ceil_div(hs + s.basis.p_x - s.m + 1, s.m));
    if (first_period && start < feasible) throw CalendarAlignmentError(s.name, feasible);
    start = std::max(start, feasible);
  }
  if (start >= T_lf) {
    throw CalendarAlignmentError(panel.empty() ? std::string("y") : panel.front().name, start);
  }
  const int rows = T_lf - start;
  std::vector<int> sizes;
  int width = 0;
  for (const auto& s : panel) {
    sizes.push_back(int(s.basis.values.rows()));
    width += int(s.basis.values.rows());
  }
  if (p_y > 0) {
    sizes.push_back(p_y);
    width += p_y;
  }
  GroupedDesign d;
  d.y = y.segment(start, rows);
  d.Z.resize(rows, width);
  int col = 0;
  for (const auto& s : panel) {
    const int hs = detail::horizon_steps(h, s.m);
    const int g = int(s.basis.values.rows());
    for (int r = 0; r < rows; ++r) {
      const int t = start + r;
      const int last = s.m * t + s.m - 1 - hs;
      for (int i = 0; i < g; ++i) {
        double acc = 0.0;
        for (int u = 0; u <= s.basis.p_x; ++u) acc += s.basis.values(i, u) * s.values[last - u];
        d.Z(r, col + i) = acc;
      }
    }
    col += g;
    d.group_labels.push_back(s.name);
    d.basis_meta.emplace_back(s.basis);
  }
  for (int k = 1; k <= p_y; ++k) {
    for (int r = 0; r < rows; ++r) d.Z(r, col + k - 1) = y[start + r - lag_floor - k];
  }
  if (p_y > 0) {
    d.group_labels.push_back("y_lags");
    d.basis_meta.emplace_back(std::nullopt);
  }
  d.partition = Partition(sizes);
  d.horizon = h;
  validate(d);
  return d;
}

/// Rescales every column to unit sample standard deviation; scales are kept
/// in column_scale so coefficients can be mapped back.
inline void standardize_columns(GroupedDesign& d) {
  d.column_scale.resize(d.Z.cols());
  for (Eigen::Index c = 0; c < d.Z.cols(); ++c) {
    const double mean = d.Z.col(c).mean();
    const double sd = std::sqrt((d.Z.col(c).array() - mean).square().sum() / std::max<Eigen::Index>(1, d.Z.rows() - 1));
    const double s = sd > 0 ? sd : 1.0;
    d.Z.col(c) /= s;
    d.column_scale[c] = s;
  }
}

/// Subset of rows [begin, begin + count).
inline GroupedDesign slice_rows(const GroupedDesign& d, int begin, int count) {
  GroupedDesign out = d;
  out.y = d.y.segment(begin, count);
  out.Z = d.Z.middleRows(begin, count);
  return out;
}

}  // namespace bsgs

#endif  // BSGS_DESIGN_HPP_
