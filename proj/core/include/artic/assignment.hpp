#pragma once

#include <vector>

namespace artic::assignment {

/// Result of a minimum-cost complete assignment of the smaller dimension:
/// `row_to_col[r]` is the matched column for row r, or -1 when rows exceed
/// columns and row r went unmatched. `total_cost` is the sum over matched
/// pairs and is minimal over all complete assignments of min(rows, cols)
/// pairs.
struct Assignment {
  std::vector<int> row_to_col;
  double total_cost = 0.0;
};

/// Kuhn-Munkres with potentials, O(n^2 m). `cost` is row-major rows x cols
/// with finite entries. Deterministic: equal-cost instances always produce
/// the same matching.
Assignment solve(const std::vector<double>& cost, int rows, int cols);

}  // namespace artic::assignment
