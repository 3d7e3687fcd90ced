#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace selectrack {

/// Marker for pairs that may never be matched.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// Dense row-major cost matrix (rows = tracks, cols = detections). Entries
/// are finite or kInfeasible.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Throws std::invalid_argument if values.size() != rows * cols or any
    /// entry is NaN or -inf.
    CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    /// Checked write; rejects NaN and -inf.
    void set(std::size_t r, std::size_t c, double value);

    const std::vector<double>& values() const { return values_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (row, col), sorted by row
    std::vector<std::size_t> unmatched_rows;
    std::vector<std::size_t> unmatched_cols;
};

/// Gated minimum-cost assignment.
///
/// An entry is feasible when it is finite and <= gate. Leaving a row (of the
/// smaller side) unmatched costs exactly `gate`, so the solver minimises
///   sum over matches (cost - gate)
/// which never returns an infeasible pair. Rectangular inputs are handled by
/// solving over the smaller side. Scans run in index order with strict
/// comparisons, so ties resolve toward lower row and column indices and the
/// output is bit-reproducible.
///
/// Throws std::invalid_argument when gate is not finite.
Assignment solve(const CostMatrix& costs, double gate);

/// Objective value of an assignment under the same convention as solve():
/// matched costs plus `gate` for every unmatched index of the smaller side.
double assignment_objective(const CostMatrix& costs, const Assignment& result, double gate);

}  // namespace selectrack
