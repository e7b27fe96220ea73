// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "polyband/errors.hpp"
#include "polyband/losses.hpp"

namespace polyband {

/// Result of bipartite matching: mapping[j] is the index of the prediction
/// assigned to ground-truth instance j. The mapping is a permutation of
/// 0..N-1.
struct MatchAssignment {
  std::vector<int> mapping;
  double total_cost = 0.0;
};

/// Matching cost matrix. Entry (j, k) is the fitting loss of prediction k
/// against ground truth j plus the focal cost of prediction k's confidence.
/// Rows of padded non-text instances are all zero, so unmatched predictions
/// land on padding for free.
inline std::vector<std::vector<double>> cost_matrix(
    std::span<const Detection> preds, std::span<const GtInstance> gts,
    const LossConfig& cfg, CurveLoss kind = CurveLoss::ShapeConstrained) {
  if (preds.size() != gts.size()) {
    throw ArgumentError("cost_matrix: predictions and padded ground truths "
                        "must have the same size N");
  }
  const std::size_t n = preds.size();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    if (gts[j].class_indicator == 0) continue;  // row stays zero
    for (std::size_t k = 0; k < n; ++k) {
      cost[j][k] =
          fit_loss(preds[k].band, gts[j], cfg, kind) +
          focal_cost(preds[k].confidence(), gts[j].class_indicator, cfg);
    }
  }
  return cost;
}

namespace detail {

/// Kuhn augmenting-path search on the tight-edge graph, used by the
/// lexicographic tie-break. row_match/col_match describe the current
/// matching; fixed columns are frozen by earlier rows.
inline bool augment(int row, const std::vector<std::vector<int>>& tight,
                    const std::vector<char>& col_fixed,
                    std::vector<int>& row_match, std::vector<int>& col_match,
                    std::vector<char>& visited) {
  for (int col : tight[row]) {
    if (col_fixed[col] || visited[col]) continue;
    visited[col] = 1;
    if (col_match[col] < 0 ||
        augment(col_match[col], tight, col_fixed, row_match, col_match,
                visited)) {
      row_match[row] = col;
      col_match[col] = row;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Minimum-total-cost perfect assignment of a square cost matrix, solved by
/// the O(N^3) shortest-augmenting-path form of the Hungarian algorithm.
///
/// Ties are broken deterministically: among all optimal assignments the
/// lexicographically smallest mapping is returned. By complementary
/// slackness every optimal assignment lies in the subgraph of edges whose
/// reduced cost (against the solver's final potentials) vanishes, so the
/// tie-break walks rows in order and greedily picks the smallest column
/// that still leaves the remaining tight subgraph perfectly matchable.
inline MatchAssignment hungarian_assign(
    const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != n) {
      throw ArgumentError("hungarian_assign: cost matrix must be square");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw ArgumentError("hungarian_assign: non-finite cost entry");
      }
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-indexed potentials and column assignment, rows added one at a time.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_match(n, -1), col_match(n, -1);
  for (int j = 1; j <= n; ++j) {
    row_match[p[j] - 1] = j - 1;
    col_match[j - 1] = p[j] - 1;
  }

  // Tight subgraph against the final dual potentials. The tolerance absorbs
  // accumulated floating-point slack in the reduced costs.
  double max_abs = 1.0;
  for (const auto& row : cost) {
    for (double c : row) max_abs = std::max(max_abs, std::abs(c));
  }
  const double tol = 1e-9 * max_abs;
  std::vector<std::vector<int>> tight(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (cost[r][c] - u[r + 1] - v[c + 1] <= tol) tight[r].push_back(c);
    }
  }

  // Lexicographic refinement: fix rows in order to the smallest feasible
  // tight column, repairing the rest of the matching after each swap.
  std::vector<char> col_fixed(n, 0);
  for (int r = 0; r < n; ++r) {
    const int current = row_match[r];
    for (int cand : tight[r]) {
      if (cand >= current) break;  // tight lists are in increasing order
      if (col_fixed[cand]) continue;
      const int displaced = col_match[cand];
      row_match[r] = cand;
      col_match[cand] = r;
      row_match[displaced] = -1;
      col_match[current] = -1;
      std::vector<char> visited(n, 0);
      visited[cand] = 1;
      if (detail::augment(displaced, tight, col_fixed, row_match, col_match,
                          visited)) {
        break;
      }
      // Rewiring failed: restore and try the next candidate column.
      row_match[displaced] = cand;
      col_match[cand] = displaced;
      row_match[r] = current;
      col_match[current] = r;
    }
    col_fixed[row_match[r]] = 1;
  }

  MatchAssignment out;
  out.mapping = row_match;
  for (int r = 0; r < n; ++r) out.total_cost += cost[r][row_match[r]];
  return out;
}

}  // namespace polyband
