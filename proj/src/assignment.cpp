#include "selectrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selectrack {

namespace {

void check_entry(double v) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("CostMatrix: entries must be finite or kInfeasible");
    }
}

bool feasible(double c, double gate) { return std::isfinite(c) && c <= gate; }

// Shortest augmenting path Hungarian method with dual potentials for an
// n x m matrix with n <= m. Returns col_of_row.
std::vector<std::size_t> hungarian(const std::vector<double>& a, std::size_t n, std::size_t m) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
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
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> col_of_row(n, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) col_of_row[p[j] - 1] = j - 1;
    }
    return col_of_row;
}

}  // namespace

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
    check_entry(fill);
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw std::invalid_argument("CostMatrix: value count does not match shape");
    }
    for (double v : values_) check_entry(v);
}

void CostMatrix::set(std::size_t r, std::size_t c, double value) {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("CostMatrix::set: index out of range");
    check_entry(value);
    values_[r * cols_ + c] = value;
}

Assignment solve(const CostMatrix& costs, double gate) {
    if (!std::isfinite(gate)) {
        throw std::invalid_argument("solve: gate must be finite");
    }
    const std::size_t rows = costs.rows();
    const std::size_t cols = costs.cols();

    std::vector<char> row_used(rows, 0), col_used(cols, 0);
    Assignment out;

    if (!costs.empty()) {
        const bool transpose = rows > cols;
        const std::size_t n = transpose ? cols : rows;
        const std::size_t m = transpose ? rows : cols;
        std::vector<double> clamped(n * m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double c = transpose ? costs(j, i) : costs(i, j);
                clamped[i * m + j] = feasible(c, gate) ? c : gate;
            }
        }
        const std::vector<std::size_t> col_of_row = hungarian(clamped, n, m);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = transpose ? col_of_row[i] : i;
            const std::size_t c = transpose ? i : col_of_row[i];
            if (feasible(costs(r, c), gate)) {
                out.matches.emplace_back(r, c);
                row_used[r] = 1;
                col_used[c] = 1;
            }
        }
        std::sort(out.matches.begin(), out.matches.end());
    }

    for (std::size_t r = 0; r < rows; ++r)
        if (!row_used[r]) out.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c)
        if (!col_used[c]) out.unmatched_cols.push_back(c);
    return out;
}

double assignment_objective(const CostMatrix& costs, const Assignment& result, double gate) {
    const std::size_t k = std::min(costs.rows(), costs.cols());
    double total = 0.0;
    for (const auto& [r, c] : result.matches) total += costs(r, c);
    total += static_cast<double>(k - result.matches.size()) * gate;
    return total;
}

}  // namespace selectrack
