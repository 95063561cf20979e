#ifndef BSGS_CLI_MODELS_HPP_
#define BSGS_CLI_MODELS_HPP_

// Designs built from a loaded panel. Every row remembers the quarter of its
// target so rolling exercises can slice by calendar.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "bsgs/cli/config.hpp"
#include "bsgs/cli/panel.hpp"
#include "bsgs/design.hpp"
#include "bsgs/dgp.hpp"

namespace bsgs::cli {

struct PanelDesign {
  GroupedDesign design;        // unscaled
  std::vector<int> row_quarter;  // panel quarter index of each row's target
  Eigen::VectorXd target;        // target over the panel quarters (NaN outside the window)
};

inline std::vector<std::string> regressor_names(const Panel& p, const ModelBlock& m) {
  if (!m.series.empty()) return m.series;
  std::vector<std::string> out;
  for (const auto& s : p.series)
    if (s.name != m.target) out.push_back(s.name);
  return out;
}

/// MIDAS design: every series monthly, one basis block per series, then
/// p_y lags of the quarterly target.
inline PanelDesign midas_panel_design(const Panel& p, const std::string& target, const std::vector<std::string>& series,
                                      BasisFamily basis, int basis_g, int p_x, int p_y, double h) {
  if (!p.monthly_rows) throw std::invalid_argument("midas design needs a monthly panel");
  const PanelSeries& y = p.get(target);
  if (y.frequency != Frequency::Quarterly) throw std::invalid_argument("target '" + target + "' must be quarterly");
  std::vector<std::string> names = series;
  names.push_back(target);
  for (const auto& s : series) {
    if (p.get(s).frequency != Frequency::Monthly) {
      throw std::invalid_argument("midas design: series '" + s + "' is not monthly");
    }
  }
  const auto [q0, q1] = estimation_window(p, names);
  const int n = q1 - q0;
  const BasisMatrix B = make_basis(basis, basis_g, p_x);
  std::vector<HighFrequencySeries> hf;
  for (const auto& s : series) hf.push_back({s, p.get(s).values.segment(3 * q0, 3 * n), 3, B});
  PanelDesign out;
  out.design = assemble_midas_design(y.values.segment(q0, n), hf, h, p_y);
  const int start = n - out.design.T();
  for (int r = 0; r < out.design.T(); ++r) out.row_quarter.push_back(q0 + start + r);
  out.target = y.values;
  return out;
}

/// Same-frequency design: regressors at t - lag, grouped by the map (one
/// group per series when it is empty), then p_y lags of the target.
inline PanelDesign grouped_panel_design(const Panel& p, const ModelBlock& m, const std::vector<std::string>& series) {
  const PanelSeries& y = p.get(m.target);
  if (m.lag < 0) throw std::invalid_argument("grouped design: lag must be >= 0");
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  if (m.groups.empty()) {
    for (const auto& s : series) groups.push_back({s, {s}});
  } else {
    for (const auto& [g, list] : m.groups) groups.push_back({g, list});
  }
  std::vector<std::string> names{m.target};
  for (const auto& [g, list] : groups) {
    for (const auto& s : list) {
      if (p.get(s).frequency != y.frequency) {
        throw std::invalid_argument("grouped design: series '" + s + "' differs in frequency from the target");
      }
      names.push_back(s);
    }
  }
  if (y.frequency != Frequency::Quarterly) throw std::invalid_argument("grouped design expects quarterly series");
  const auto [q0, q1] = estimation_window(p, names);
  const int skip = std::max(m.lag, m.p_y);
  const int rows = q1 - q0 - skip;
  if (rows < 2) throw std::invalid_argument("grouped design: too few complete quarters");
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<std::string> labels;
  for (const auto& [g, list] : groups) {
    Eigen::MatrixXd B(rows, list.size());
    for (std::size_t k = 0; k < list.size(); ++k) B.col(k) = p.get(list[k]).values.segment(q0 + skip - m.lag, rows);
    blocks.push_back(B);
    labels.push_back(g);
  }
  if (m.p_y > 0) {
    Eigen::MatrixXd L(rows, m.p_y);
    for (int k = 1; k <= m.p_y; ++k) L.col(k - 1) = y.values.segment(q0 + skip - k, rows);
    blocks.push_back(L);
    labels.push_back("y_lags");
  }
  PanelDesign out;
  out.design = assemble_grouped_design(blocks, y.values.segment(q0 + skip, rows), 0.0, labels);
  for (int r = 0; r < rows; ++r) out.row_quarter.push_back(q0 + skip + r);
  out.target = y.values;
  return out;
}

inline PanelDesign panel_design(const Panel& p, const ModelBlock& m, const std::vector<std::string>& series,
                                BasisFamily basis, double h) {
  if (m.design == "grouped") return grouped_panel_design(p, m, series);
  return midas_panel_design(p, m.target, series, basis, m.basis_g, m.p_x, m.p_y, h);
}

/// Divides train and test columns by the training standard deviations.
inline void standardize_pair(GroupedDesign& train, GroupedDesign& test) {
  standardize_columns(train);
  for (Eigen::Index c = 0; c < test.Z.cols(); ++c) test.Z.col(c) /= train.column_scale[c];
  test.column_scale = train.column_scale;
}

}  // namespace bsgs::cli

#endif  // BSGS_CLI_MODELS_HPP_
