#pragma once

// Gridded 2-D measurements (e.g. a field survey) and the smooth objective
// obtained as the posterior mean of a GP fitted to them.
//
// File layout: a header line `rows cols x_min x_max y_min y_max`, then
// rows × cols values in row-major order. Columns run along x and rows along
// y; each value sits at the center of its cell.

#include "rmes/bench/objectives.hpp"

#include <Eigen/Dense>

#include <istream>
#include <string>

namespace rmes::bench {

struct GridData {
  int rows = 0;
  int cols = 0;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  Eigen::MatrixXd values;  // rows × cols

  [[nodiscard]] Domain domain() const;
  [[nodiscard]] Eigen::Vector2d cell_center(int row, int col) const;
  /// One row per cell, in row-major order.
  [[nodiscard]] Eigen::MatrixXd cell_centers() const;
  [[nodiscard]] Eigen::VectorXd flat_values() const;
};

/// Throws ParseError carrying the offending line number.
[[nodiscard]] GridData parse_grid(std::istream& in, const std::string& source = "<grid>");
[[nodiscard]] GridData read_grid_file(const std::string& path);

/// Objective equal to the GP posterior mean over the grid data, with
/// hyperparameters chosen by maximum likelihood on a subset of cells.
[[nodiscard]] ObjectiveSpec dataset_objective(const GridData& grid, const std::string& name = "dataset_mean");
[[nodiscard]] ObjectiveSpec load_dataset_objective(const std::string& path);

}  // namespace rmes::bench
