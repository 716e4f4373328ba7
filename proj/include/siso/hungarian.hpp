#pragma once

#include <vector>

namespace siso {

/// Dense row-major score matrix.
struct ScoreMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    ScoreMatrix() = default;
    ScoreMatrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

/// One-to-one assignment maximising the summed score (Kuhn-Munkres).
/// Returns, per row, the assigned column or -1. Rectangular matrices are
/// padded internally with zero-score dummies.
std::vector<int> max_weight_assignment(const ScoreMatrix& scores);

/// Greedy one-to-one assignment: repeatedly take the highest remaining
/// score >= `min_score` (ties: lower row, then lower column).
std::vector<int> greedy_assignment(const ScoreMatrix& scores, double min_score);

}  // namespace siso
