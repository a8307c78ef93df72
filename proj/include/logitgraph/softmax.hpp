#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace logitgraph {

/// softmax(scale * v), shifted by the max coordinate so that exp() never
/// overflows. Every output entry is finite and the entries sum to 1 up to
/// rounding. `scale` may be 0 (uniform output).
inline std::vector<double> softmax(double scale, std::span<const double> v) {
  std::vector<double> out(v.size());
  if (v.empty()) return out;
  const double top = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out[k] = std::exp(scale * (v[k] - top));
    total += out[k];
  }
  for (double& o : out) o /= total;
  return out;
}

}  // namespace logitgraph
