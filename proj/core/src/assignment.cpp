#include "artic/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace artic::assignment {

namespace {

// Potentials formulation over a rows <= cols instance. 1-indexed internally;
// column 0 is the virtual start column of each augmentation phase.
Assignment solve_wide(const std::vector<double>& cost, int rows, int cols) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> match(cols + 1, 0);  // column -> row (0 = free)
  std::vector<int> way(cols + 1, 0);

  for (int i = 1; i <= rows; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> min_v(cols + 1, kInf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      int i0 = match[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        double cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
        if (cur < min_v[j]) {
          min_v[j] = cur;
          way[j] = j0;
        }
        if (min_v[j] < delta) {
          delta = min_v[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_v[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.row_to_col.assign(rows, -1);
  for (int j = 1; j <= cols; ++j) {
    if (match[j] != 0) {
      out.row_to_col[match[j] - 1] = j - 1;
      out.total_cost += cost[(match[j] - 1) * cols + (j - 1)];
    }
  }
  return out;
}

}  // namespace

Assignment solve(const std::vector<double>& cost, int rows, int cols) {
  if (rows < 0 || cols < 0 ||
      cost.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("assignment: cost matrix shape mismatch");
  }
  if (rows == 0 || cols == 0) {
    Assignment out;
    out.row_to_col.assign(rows, -1);
    return out;
  }
  if (rows <= cols) return solve_wide(cost, rows, cols);

  // Tall instance: solve the transpose, then invert the mapping.
  std::vector<double> transposed(cost.size());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      transposed[c * rows + r] = cost[r * cols + c];
    }
  }
  Assignment t = solve_wide(transposed, cols, rows);
  Assignment out;
  out.row_to_col.assign(rows, -1);
  out.total_cost = t.total_cost;
  for (int c = 0; c < cols; ++c) {
    if (t.row_to_col[c] >= 0) out.row_to_col[t.row_to_col[c]] = c;
  }
  return out;
}

}  // namespace artic::assignment
