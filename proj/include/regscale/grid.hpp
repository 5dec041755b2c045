#pragma once

#include <cstddef>
#include <vector>

namespace regscale {

/// Uniform midpoint grid on [0,1]: cell i is [i*ds, (i+1)*ds] with sample
/// point (i + 1/2)*ds.
struct Grid {
  std::size_t n = 0;
  double ds = 0.0;
  std::vector<double> midpoints;

  [[nodiscard]] double left_edge(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(n); }
  [[nodiscard]] std::size_t size() const { return n; }
};

/// Throws InputError for n == 0.
Grid make_grid(std::size_t n);

}  // namespace regscale
