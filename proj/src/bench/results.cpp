#include "rmes/bench/results.hpp"

#include "rmes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace rmes::bench {

std::string format_real(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records, int dim) {
  out << "acquisition,repetition,iteration";
  for (int j = 1; j <= dim; ++j) out << ",x_" << j;
  out << ",y,simple_regret,inference_regret,distance_to_maximizer,wall_time_ms\n";
  for (const RunRecord& r : records) {
    if (r.x.size() != dim) throw InputError("record dimension does not match the CSV header");
    out << to_string(r.acquisition) << ',' << r.repetition << ',' << r.iteration;
    for (int j = 0; j < dim; ++j) out << ',' << format_real(r.x[j]);
    out << ',' << format_real(r.y) << ',' << format_real(r.simple_regret) << ',' << format_real(r.inference_regret)
        << ',' << format_real(r.distance_to_maximizer) << ',' << format_real(r.wall_time_ms) << '\n';
  }
}

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records, int dim) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open output file '" + path + "'");
  write_records_csv(out, records, dim);
  out.flush();
  if (!out) throw std::runtime_error("failed writing output file '" + path + "'");
}

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

const AcquisitionSummary* ResultTable::find(AcquisitionKind kind) const {
  for (const AcquisitionSummary& s : acquisitions) {
    if (s.acquisition == kind) return &s;
  }
  return nullptr;
}

ResultTable aggregate(const std::vector<RunRecord>& records, int histogram_bins, std::optional<double> max_distance) {
  if (records.empty()) throw InputError("aggregate needs at least one record");
  if (histogram_bins < 1) throw InputError("histogram needs at least one bin");

  std::vector<AcquisitionKind> order;
  // acquisition -> iteration -> repetition -> (SR, IR) of the last record
  std::map<AcquisitionKind, std::map<int, std::map<int, std::pair<double, double>>>> last;
  std::map<AcquisitionKind, std::vector<double>> distances;
  double largest = 0.0;
  for (const RunRecord& r : records) {
    if (std::find(order.begin(), order.end(), r.acquisition) == order.end()) order.push_back(r.acquisition);
    if (r.failed()) continue;
    last[r.acquisition][r.iteration][r.repetition] = {r.simple_regret, r.inference_regret};
    if (r.iteration >= 1 && std::isfinite(r.distance_to_maximizer)) {
      distances[r.acquisition].push_back(r.distance_to_maximizer);
      largest = std::max(largest, r.distance_to_maximizer);
    }
  }
  const double top = max_distance.value_or(largest > 0.0 ? largest : 1.0);

  ResultTable table;
  for (const AcquisitionKind kind : order) {
    AcquisitionSummary summary;
    summary.acquisition = kind;
    for (const auto& [iteration, by_rep] : last[kind]) {
      std::vector<double> sr;
      std::vector<double> ir;
      for (const auto& [rep, values] : by_rep) {
        sr.push_back(values.first);
        ir.push_back(values.second);
      }
      IterationSummary s;
      s.iteration = iteration;
      s.repetitions = static_cast<int>(sr.size());
      for (std::size_t i = 0; i < sr.size(); ++i) {
        s.mean_simple_regret += sr[i] / static_cast<double>(sr.size());
        s.mean_inference_regret += ir[i] / static_cast<double>(ir.size());
      }
      s.median_simple_regret = median(sr);
      s.median_inference_regret = median(ir);
      s.log10_simple_regret = std::log10(std::max(s.mean_simple_regret, kRegretClip));
      s.log10_inference_regret = std::log10(std::max(s.mean_inference_regret, kRegretClip));
      summary.iterations.push_back(s);
    }

    DistanceHistogram& hist = summary.distances;
    hist.counts.assign(histogram_bins, 0);
    for (int b = 0; b <= histogram_bins; ++b) hist.edges.push_back(top * b / histogram_bins);
    for (const double d : distances[kind]) {
      const int bin = std::clamp(static_cast<int>(d / top * histogram_bins), 0, histogram_bins - 1);
      ++hist.counts[bin];
    }
    table.acquisitions.push_back(std::move(summary));
  }
  return table;
}

void write_summary_csv(std::ostream& out, const ResultTable& table) {
  out << "acquisition,iteration,repetitions,mean_simple_regret,mean_inference_regret,median_simple_regret,"
         "median_inference_regret,log10_simple_regret,log10_inference_regret\n";
  for (const AcquisitionSummary& a : table.acquisitions) {
    for (const IterationSummary& s : a.iterations) {
      out << to_string(a.acquisition) << ',' << s.iteration << ',' << s.repetitions << ','
          << format_real(s.mean_simple_regret) << ',' << format_real(s.mean_inference_regret) << ','
          << format_real(s.median_simple_regret) << ',' << format_real(s.median_inference_regret) << ','
          << format_real(s.log10_simple_regret) << ',' << format_real(s.log10_inference_regret) << '\n';
    }
  }
}

}  // namespace rmes::bench
