#include "segmvs/em.hpp"

#include <limits>
#include <stdexcept>

namespace segmvs {

CostWeights em_update_weights(const std::array<double, 4>& meanTerms, const std::array<bool, 4>& active,
                              double eta) {
  int activeCount = 0;
  for (const bool a : active) activeCount += a ? 1 : 0;
  if (activeCount == 0) throw std::invalid_argument("em_update_weights: no active terms");
  if (eta * activeCount > 1.0 + 1e-12)
    throw std::invalid_argument("em_update_weights: eta * activeTerms > 1 is infeasible");

  double minMean = std::numeric_limits<double>::max();
  for (int k = 0; k < 4; ++k)
    if (active[size_t(k)]) minMean = std::min(minMean, meanTerms[size_t(k)]);

  std::array<bool, 4> minimal{};
  int minimalCount = 0;
  for (int k = 0; k < 4; ++k) {
    minimal[size_t(k)] = active[size_t(k)] && meanTerms[size_t(k)] <= minMean + 1e-12;
    minimalCount += minimal[size_t(k)] ? 1 : 0;
  }

  const double share = (1.0 - eta * (activeCount - minimalCount)) / minimalCount;
  std::array<double, 4> w{};
  for (int k = 0; k < 4; ++k)
    w[size_t(k)] = !active[size_t(k)] ? 0.0 : (minimal[size_t(k)] ? share : eta);
  return {w[0], w[1], w[2], w[3]};
}

}  // namespace segmvs
