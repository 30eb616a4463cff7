#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mambatrack/core_types.hpp"

namespace mambatrack {

double iou(const BBox& a, const BBox& b);

struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Rows are predicted boxes, columns detections; entries 1 - IoU.
CostMatrix iou_cost(const std::vector<BBox>& predicted, const std::vector<BBox>& detections);

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (row, col), ascending row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
};

// Minimum-total-cost assignment covering min(rows, cols) pairs, O(n^2 m).
// Returns the column for each row, or -1 for rows left without one.
std::vector<int> solve_assignment(const CostMatrix& cost);

// Optimal assignment followed by gating: pairs costing more than `max_cost`
// are demoted to unmatched.
Assignment hungarian(const CostMatrix& cost, double max_cost);

}  // namespace mambatrack
