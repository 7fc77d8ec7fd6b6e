#pragma once

#include <cstdint>
#include <vector>

namespace rmes {

/// Standard-normal draws shared by every max-value sample and every candidate
/// point during one acquisition optimization (common random numbers).
struct NuBlock {
  std::vector<double> samples;
  std::uint64_t seed = 0;

  [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
};

}  // namespace rmes
