#include "siso/hungarian.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace siso {

std::vector<int> max_weight_assignment(const ScoreMatrix& scores) {
    const int n = std::max(scores.rows, scores.cols);
    std::vector<int> result(static_cast<std::size_t>(scores.rows), -1);
    if (n == 0) return result;

    double top = 0.0;
    for (double v : scores.values) top = std::max(top, v);
    auto cost = [&](int r, int c) {
        const double s = (r < scores.rows && c < scores.cols) ? scores(r, c) : 0.0;
        return top - s;
    };

    // Potentials formulation, 1-based with a virtual column 0.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
    for (int j = 1; j <= n; ++j) {
        const int r = p[j] - 1;
        const int c = j - 1;
        if (r < scores.rows && c < scores.cols) result[static_cast<std::size_t>(r)] = c;
    }
    return result;
}

std::vector<int> greedy_assignment(const ScoreMatrix& scores, double min_score) {
    std::vector<std::tuple<double, int, int>> pairs;
    for (int r = 0; r < scores.rows; ++r) {
        for (int c = 0; c < scores.cols; ++c) {
            if (scores(r, c) >= min_score) pairs.emplace_back(scores(r, c), r, c);
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) < std::get<2>(b);
    });
    std::vector<int> result(static_cast<std::size_t>(scores.rows), -1);
    std::vector<char> col_used(static_cast<std::size_t>(scores.cols), 0);
    for (const auto& [s, r, c] : pairs) {
        if (result[static_cast<std::size_t>(r)] >= 0 || col_used[static_cast<std::size_t>(c)]) continue;
        result[static_cast<std::size_t>(r)] = c;
        col_used[static_cast<std::size_t>(c)] = 1;
    }
    return result;
}

}  // namespace siso
