#pragma once

#include "segmvs/cost.hpp"

#include <array>

namespace segmvs {

/// M-step of the weight optimization: minimize sum_k w_k * meanTerm_k subject
/// to sum w = 1 and each active w >= eta. The linear objective puts every
/// spare unit of weight on the minimal-mean term(s); exact ties share equally,
/// so equal means yield uniform weights. Inactive terms (no statistics this
/// pass) are pinned to 0 and excluded from the simplex. Throws when
/// eta * activeCount > 1.
CostWeights em_update_weights(const std::array<double, 4>& meanTerms, const std::array<bool, 4>& active,
                              double eta);

}  // namespace segmvs
