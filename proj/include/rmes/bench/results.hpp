#pragma once

// Record output and per-iteration aggregation across repetitions.

#include "rmes/bench/bo_loop.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rmes::bench {

/// Decimal text with 17 significant digits.
[[nodiscard]] std::string format_real(double v);

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records, int dim);
/// Writes to `path`, replacing any existing file.
void write_records_csv(const std::string& path, const std::vector<RunRecord>& records, int dim);

struct IterationSummary {
  int iteration = 0;
  int repetitions = 0;
  double mean_simple_regret = 0.0;
  double mean_inference_regret = 0.0;
  double median_simple_regret = 0.0;
  double median_inference_regret = 0.0;
  /// log10 of the means after clipping below at 1e-12.
  double log10_simple_regret = 0.0;
  double log10_inference_regret = 0.0;
};

struct DistanceHistogram {
  std::vector<double> edges;  // bins + 1 edges from 0
  std::vector<int> counts;
};

struct AcquisitionSummary {
  AcquisitionKind acquisition = AcquisitionKind::rmes;
  std::vector<IterationSummary> iterations;
  /// Distances of BO queries (iteration >= 1) to the maximizer.
  DistanceHistogram distances;
};

struct ResultTable {
  std::vector<AcquisitionSummary> acquisitions;

  [[nodiscard]] const AcquisitionSummary* find(AcquisitionKind kind) const;
};

inline constexpr double kRegretClip = 1e-12;

/// Each repetition contributes the regrets of its last record at each
/// iteration; failed rows are ignored. Histogram bins span [0, max_distance],
/// or [0, largest observed distance] when max_distance is not given.
[[nodiscard]] ResultTable aggregate(const std::vector<RunRecord>& records, int histogram_bins = 20,
                                    std::optional<double> max_distance = std::nullopt);

void write_summary_csv(std::ostream& out, const ResultTable& table);

[[nodiscard]] double median(std::vector<double> values);

}  // namespace rmes::bench
