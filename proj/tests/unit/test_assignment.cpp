#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "selectrack/assignment.hpp"
#include "support/oracles.hpp"

using selectrack::Assignment;
using selectrack::CostMatrix;
using selectrack::kInfeasible;

namespace {

void expect_partition(const CostMatrix& m, const Assignment& a) {
    std::set<std::size_t> rows, cols;
    for (auto [r, c] : a.matches) {
        EXPECT_TRUE(rows.insert(r).second);
        EXPECT_TRUE(cols.insert(c).second);
    }
    for (auto r : a.unmatched_rows) EXPECT_TRUE(rows.insert(r).second);
    for (auto c : a.unmatched_cols) EXPECT_TRUE(cols.insert(c).second);
    EXPECT_EQ(rows.size(), m.rows());
    EXPECT_EQ(cols.size(), m.cols());
}

// Costs on a 1/16 grid keep every partial sum exact, so objective values can
// be compared with operator==.
CostMatrix random_grid_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::uniform_int_distribution<int> tick(0, 32);
    std::bernoulli_distribution infeasible(0.15);
    std::vector<double> v(rows * cols);
    for (auto& x : v) x = infeasible(rng) ? kInfeasible : tick(rng) / 16.0;
    return CostMatrix(rows, cols, std::move(v));
}

}  // namespace

TEST(Solve, SingleFeasibleCell) {
    const Assignment a = selectrack::solve(CostMatrix(1, 1, std::vector<double>{0.3}), 0.5);
    ASSERT_EQ(a.matches.size(), 1u);
    EXPECT_EQ(a.matches[0], std::make_pair(std::size_t{0}, std::size_t{0}));
    EXPECT_TRUE(a.unmatched_rows.empty());
    EXPECT_TRUE(a.unmatched_cols.empty());
}

TEST(Solve, TwoByTwoPicksDiagonal) {
    const CostMatrix m(2, 2, std::vector<double>{1, 2, 2, 1});
    ASSERT_EQ(selectrack::oracle::permutation_min(2, 2, m.values(), 10.0), 2.0);
    const Assignment a = selectrack::solve(m, 10.0);
    ASSERT_EQ(a.matches.size(), 2u);
    EXPECT_EQ(a.matches[0], std::make_pair(std::size_t{0}, std::size_t{0}));
    EXPECT_EQ(a.matches[1], std::make_pair(std::size_t{1}, std::size_t{1}));
    EXPECT_EQ(selectrack::assignment_objective(m, a, 10.0), 2.0);
}

TEST(Solve, GatedOut) {
    const Assignment a = selectrack::solve(CostMatrix(1, 1, std::vector<double>{0.9}), 0.5);
    EXPECT_TRUE(a.matches.empty());
    EXPECT_EQ(a.unmatched_rows, std::vector<std::size_t>{0});
    EXPECT_EQ(a.unmatched_cols, std::vector<std::size_t>{0});
}

TEST(Solve, EmptyMatrixLeavesEverythingUnmatched) {
    const Assignment a = selectrack::solve(CostMatrix(3, 0), 1.0);
    EXPECT_TRUE(a.matches.empty());
    EXPECT_EQ(a.unmatched_rows.size(), 3u);
    const Assignment b = selectrack::solve(CostMatrix(0, 2), 1.0);
    EXPECT_EQ(b.unmatched_cols.size(), 2u);
}

TEST(Solve, SentinelNeverMatched) {
    const CostMatrix m(2, 2, std::vector<double>{kInfeasible, 0.1, kInfeasible, 0.2});
    const Assignment a = selectrack::solve(m, 1.0);
    ASSERT_EQ(a.matches.size(), 1u);
    EXPECT_EQ(a.matches[0].second, 1u);
    EXPECT_EQ(a.matches[0].first, 0u);
}

TEST(Solve, CostAtGateIsFeasible) {
    const Assignment a = selectrack::solve(CostMatrix(1, 1, std::vector<double>{0.5}), 0.5);
    EXPECT_EQ(a.matches.size(), 1u);
}

TEST(Solve, RejectsBadInput) {
    EXPECT_THROW(selectrack::solve(CostMatrix(1, 1), kInfeasible), std::invalid_argument);
    EXPECT_THROW(CostMatrix(1, 2, std::vector<double>{0.0}), std::invalid_argument);
    EXPECT_THROW(CostMatrix(1, 1, std::vector<double>{std::nan("")}), std::invalid_argument);
    CostMatrix m(1, 1);
    EXPECT_THROW(m.set(0, 0, -kInfeasible), std::invalid_argument);
    EXPECT_THROW(m.set(1, 0, 0.0), std::out_of_range);
}

TEST(Solve, TiesResolveTowardLowIndices) {
    const CostMatrix m(3, 3, 0.25);
    const Assignment a = selectrack::solve(m, 1.0);
    ASSERT_EQ(a.matches.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a.matches[i].first, i);
        EXPECT_EQ(a.matches[i].second, i);
    }
    const CostMatrix wide(2, 4, 0.5);
    const Assignment b = selectrack::solve(wide, 1.0);
    ASSERT_EQ(b.matches.size(), 2u);
    EXPECT_EQ(b.matches[0].second, 0u);
    EXPECT_EQ(b.matches[1].second, 1u);
    EXPECT_EQ(b.unmatched_cols, (std::vector<std::size_t>{2, 3}));
}

TEST(SolveProperty, MatchesPermutationOracle) {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<std::size_t> dim(0, 6);
    std::uniform_int_distribution<int> gate_tick(4, 40);
    for (int trial = 0; trial < 600; ++trial) {
        const std::size_t r = dim(rng), c = dim(rng);
        const CostMatrix m = random_grid_matrix(rng, r, c);
        const double gate = gate_tick(rng) / 16.0;
        const Assignment a = selectrack::solve(m, gate);
        expect_partition(m, a);
        for (auto [i, j] : a.matches) ASSERT_LE(m(i, j), gate);
        ASSERT_EQ(selectrack::assignment_objective(m, a, gate),
                  selectrack::oracle::permutation_min(r, c, m.values(), gate))
            << "trial " << trial;
    }
}

TEST(SolveProperty, RowPermutationEquivariance) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> cost(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> dim(1, 7);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t r = dim(rng), c = dim(rng);
        std::vector<double> v(r * c);
        for (auto& x : v) x = cost(rng);
        std::vector<std::size_t> perm(r);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> pv(r * c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) pv[i * c + j] = v[perm[i] * c + j];
        const Assignment a = selectrack::solve(CostMatrix(r, c, v), 0.8);
        const Assignment b = selectrack::solve(CostMatrix(r, c, pv), 0.8);
        std::vector<std::pair<std::size_t, std::size_t>> mapped;
        for (auto [i, j] : b.matches) mapped.emplace_back(perm[i], j);
        std::sort(mapped.begin(), mapped.end());
        EXPECT_EQ(mapped, a.matches) << "trial " << trial;
    }
}

TEST(SolveProperty, Deterministic) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const CostMatrix m = random_grid_matrix(rng, 5, 6);
        const Assignment a = selectrack::solve(m, 1.0);
        const Assignment b = selectrack::solve(m, 1.0);
        EXPECT_EQ(a.matches, b.matches);
        EXPECT_EQ(a.unmatched_rows, b.unmatched_rows);
        EXPECT_EQ(a.unmatched_cols, b.unmatched_cols);
    }
}
