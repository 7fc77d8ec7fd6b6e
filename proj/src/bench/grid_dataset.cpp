#include "rmes/bench/grid_dataset.hpp"

#include "rmes/errors.hpp"
#include "rmes/gp_core.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace rmes::bench {
namespace {

constexpr int kMleSubsetSize = 200;

struct Token {
  std::string text;
  std::size_t line;
};

double parse_real(const Token& t, const std::string& source) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(source, t.line, "expected a finite number, got '" + t.text + "'");
  }
  return v;
}

int parse_count(const Token& t, const std::string& source, const char* what) {
  int v = 0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || v < 1) {
    throw ParseError(source, t.line, std::string(what) + " must be a positive integer, got '" + t.text + "'");
  }
  return v;
}

}  // namespace

Domain GridData::domain() const { return Domain(Eigen::Vector2d(x_min, y_min), Eigen::Vector2d(x_max, y_max)); }

Eigen::Vector2d GridData::cell_center(int row, int col) const {
  return {x_min + (col + 0.5) * (x_max - x_min) / cols, y_min + (row + 0.5) * (y_max - y_min) / rows};
}

Eigen::MatrixXd GridData::cell_centers() const {
  Eigen::MatrixXd out(rows * cols, 2);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.row(r * cols + c) = cell_center(r, c).transpose();
  }
  return out;
}

Eigen::VectorXd GridData::flat_values() const {
  Eigen::VectorXd out(rows * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out[r * cols + c] = values(r, c);
  }
  return out;
}

GridData parse_grid(std::istream& in, const std::string& source) {
  std::vector<Token> header;
  std::vector<Token> body;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream words(line);
    std::string word;
    const bool is_header = header.empty();
    while (words >> word) (is_header ? header : body).push_back(Token{word, line_no});
  }
  if (header.empty()) throw ParseError(source, std::max<std::size_t>(line_no, 1), "missing header line");
  if (header.size() != 6) {
    throw ParseError(source, header.front().line, "header must be 'rows cols x_min x_max y_min y_max'");
  }

  GridData grid;
  grid.rows = parse_count(header[0], source, "rows");
  grid.cols = parse_count(header[1], source, "cols");
  grid.x_min = parse_real(header[2], source);
  grid.x_max = parse_real(header[3], source);
  grid.y_min = parse_real(header[4], source);
  grid.y_max = parse_real(header[5], source);
  if (!(grid.x_min < grid.x_max) || !(grid.y_min < grid.y_max)) {
    throw ParseError(source, header.front().line, "grid bounds must satisfy min < max");
  }

  const std::size_t expected = static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols);
  if (body.size() < expected) {
    throw ParseError(source, std::max<std::size_t>(line_no, 1),
                     "expected " + std::to_string(expected) + " values, found " + std::to_string(body.size()));
  }
  if (body.size() > expected) throw ParseError(source, body[expected].line, "unexpected value after the grid");
  grid.values.resize(grid.rows, grid.cols);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) grid.values(r, c) = parse_real(body[r * grid.cols + c], source);
  }
  return grid;
}

GridData read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grid file '" + path + "'");
  return parse_grid(in, path);
}

ObjectiveSpec dataset_objective(const GridData& grid, const std::string& name) {
  const Domain domain = grid.domain();
  const Eigen::MatrixXd inputs = grid.cell_centers();
  const Eigen::VectorXd raw = grid.flat_values();
  const double offset = raw.mean();
  const Eigen::VectorXd centered = raw.array() - offset;
  const double variance = centered.squaredNorm() / static_cast<double>(centered.size());

  KernelHyperparams hyper;
  hyper.lengthscales = 0.2 * domain.width();
  hyper.signal_variance = variance > 0.0 ? variance : 1.0;
  hyper.noise_variance = 1e-2 * hyper.signal_variance;
  if (variance > 0.0) {
    const int n = static_cast<int>(raw.size());
    const int m = std::min(n, kMleSubsetSize);
    Eigen::MatrixXd sub_x(m, 2);
    Eigen::VectorXd sub_y(m);
    for (int i = 0; i < m; ++i) {
      const int idx = static_cast<int>(static_cast<long long>(i) * n / m);
      sub_x.row(i) = inputs.row(idx);
      sub_y[i] = centered[idx];
    }
    MleConfig mle;
    mle.starts = 4;
    hyper = mle_fit(Dataset(domain, sub_x, sub_y), hyper, mle);
  }
  spdlog::debug("dataset objective: lengthscales ({}, {}), signal variance {}, noise variance {}",
                hyper.lengthscales[0], hyper.lengthscales[1], hyper.signal_variance, hyper.noise_variance);

  auto model = std::make_shared<const PosteriorModel>(fit(Dataset(domain, inputs, centered), hyper));
  return build_objective(
      name, ObjectiveKind::dataset_mean, domain,
      [model, offset](const Eigen::VectorXd& x) { return offset + model->posterior_mean(x); }, true, true);
}

ObjectiveSpec load_dataset_objective(const std::string& path) { return dataset_objective(read_grid_file(path)); }

}  // namespace rmes::bench
