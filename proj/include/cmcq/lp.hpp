#pragma once

// Exact solver for the packing LPs that size bounds reduce to:
//
//   maximize   sum_{j in objective} x_j
//   subject to sum_{j in row} x_j <= 1   for every row
//              0 <= x_j <= 1
//
// A floating-point simplex proposes a basis, which is accepted only after an
// exact primal/dual feasibility check. Otherwise an exact primal simplex on a
// condensed dictionary runs (Dantzig pricing, Bland's rule once pivots stall);
// the origin is always a feasible start.

#include <cstddef>
#include <vector>

#include "cmcq/rational.hpp"

namespace cmcq {

struct PackingSolution {
  Rational value;
  std::vector<Rational> x;  // one entry per variable
};

PackingSolution solve_packing_lp(std::size_t num_vars, const std::vector<bool>& objective,
                                 const std::vector<std::vector<int>>& rows);

}  // namespace cmcq
