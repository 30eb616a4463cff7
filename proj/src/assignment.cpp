#include "mambatrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace mambatrack {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

CostMatrix iou_cost(const std::vector<BBox>& predicted, const std::vector<BBox>& detections) {
  CostMatrix c(predicted.size(), detections.size());
  for (std::size_t r = 0; r < predicted.size(); ++r)
    for (std::size_t k = 0; k < detections.size(); ++k)
      c(r, k) = 1.0 - iou(predicted[r], detections[k]);
  return c;
}

namespace {

// Shortest augmenting path with row/column potentials; requires rows <= cols.
std::vector<int> solve_wide(std::size_t n, std::size_t m,
                            const std::function<double(std::size_t, std::size_t)>& at) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  std::vector<double> min_slack(m + 1);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j)
    if (owner[j] != 0) row_to_col[owner[j] - 1] = static_cast<int>(j - 1);
  return row_to_col;
}

}  // namespace

std::vector<int> solve_assignment(const CostMatrix& cost) {
  for (double c : cost.data)
    if (!std::isfinite(c)) throw DomainError("solve_assignment: non-finite cost");
  if (cost.rows == 0 || cost.cols == 0) return std::vector<int>(cost.rows, -1);
  if (cost.rows <= cost.cols)
    return solve_wide(cost.rows, cost.cols, [&](std::size_t r, std::size_t c) { return cost(r, c); });
  const std::vector<int> col_to_row =
      solve_wide(cost.cols, cost.rows, [&](std::size_t r, std::size_t c) { return cost(c, r); });
  std::vector<int> row_to_col(cost.rows, -1);
  for (std::size_t c = 0; c < col_to_row.size(); ++c)
    if (col_to_row[c] >= 0) row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<int>(c);
  return row_to_col;
}

Assignment hungarian(const CostMatrix& cost, double max_cost) {
  const std::vector<int> row_to_col = solve_assignment(cost);
  Assignment a;
  std::vector<char> col_used(cost.cols, 0);
  for (std::size_t r = 0; r < cost.rows; ++r) {
    const int c = row_to_col[r];
    if (c >= 0 && cost(r, static_cast<std::size_t>(c)) <= max_cost) {
      a.matches.emplace_back(r, static_cast<std::size_t>(c));
      col_used[static_cast<std::size_t>(c)] = 1;
    } else {
      a.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < cost.cols; ++c)
    if (!col_used[c]) a.unmatched_cols.push_back(c);
  return a;
}

}  // namespace mambatrack
