#include "bmtensor/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace bmtensor {

Assignment solve_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols())
    throw std::invalid_argument("solve_assignment: cost matrix must be square");
  if (!cost.allFinite())
    throw std::invalid_argument("solve_assignment: non-finite cost");
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();

  // 1-based potentials; match[j] is the row matched to column j, 0 = free.
  std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);

  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - row_pot[i0] - col_pot[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        // Strict comparison keeps the lowest column index on ties.
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          row_pot[match[j]] += delta;
          col_pot[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.column_of.assign(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) out.column_of[match[j] - 1] = j - 1;
  for (Index i = 0; i < n; ++i) out.cost += cost(i, out.column_of[i]);
  return out;
}

}  // namespace bmtensor
