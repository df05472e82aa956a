#pragma once

#include <vector>

#include "bmtensor/tensor.hpp"

namespace bmtensor {

struct Assignment {
  /// column_of[i] = j assigns row i to column j.
  std::vector<Index> column_of;
  double cost = 0.0;
};

/// Exact minimum-cost perfect matching on a square cost matrix
/// (Hungarian algorithm with potentials, O(r^3)).
Assignment solve_assignment(const Matrix& cost);

}  // namespace bmtensor
