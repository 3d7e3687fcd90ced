#pragma once

// Brute-force reference implementations used by the unit and acceptance
// suites. Nothing here calls into the library code paths it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace selectrack::oracle {

struct Box {
    double x, y, w, h;
};

/// IoU of integer-aligned boxes by counting covered unit cells.
inline double pixel_iou(int ax, int ay, int aw, int ah, int bx, int by, int bw, int bh) {
    const int x0 = std::min(ax, bx), y0 = std::min(ay, by);
    const int x1 = std::max(ax + aw, bx + bw), y1 = std::max(ay + ah, by + bh);
    long inter = 0, uni = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const bool in_a = x >= ax && x < ax + aw && y >= ay && y < ay + ah;
            const bool in_b = x >= bx && x < bx + bw && y >= by && y < by + bh;
            inter += (in_a && in_b) ? 1 : 0;
            uni += (in_a || in_b) ? 1 : 0;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Continuous IoU written from the interval-overlap definition.
inline double naive_iou(const Box& a, const Box& b) {
    const double ox = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double oy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ox * oy;
    if (inter <= 0.0) return 0.0;
    return inter / (a.w * a.h + b.w * b.h - inter);
}

inline long double ars_long(long double wa, long double ha, long double wb, long double hb) {
    const long double pi = 3.141592653589793238462643383279502884L;
    const long double d = std::atan(wa / ha) - std::atan(wb / hb);
    return 1.0L - 4.0L / (pi * pi) * d * d;
}

/// Minimum over every injective map of the smaller side into the larger one
/// of sum_i min(c, gate), with +inf treated as infeasible (costs `gate`).
inline double permutation_min(std::size_t rows, std::size_t cols, const std::vector<double>& values,
                              double gate) {
    const bool transpose = rows > cols;
    const std::size_t n = transpose ? cols : rows;
    const std::size_t m = transpose ? rows : cols;
    auto at = [&](std::size_t i, std::size_t j) {
        const double c = transpose ? values[j * cols + i] : values[i * cols + j];
        return (std::isfinite(c) && c <= gate) ? c : gate;
    };
    if (n == 0) return 0.0;
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    // Enumerate permutations of all m columns; the first n entries give the
    // injection. Duplicate injections are harmless for a minimum.
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += at(i, perm[i]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Candidacy rule enumerated directly: returns -1 for risky, else the
/// candidate index.
inline int brute_force_label(const Box& det, const std::vector<Box>& tracks, double theta_iou,
                             bool ars_enabled, double theta_alpha) {
    std::vector<int> above;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        if (naive_iou(det, tracks[t]) > theta_iou) above.push_back(static_cast<int>(t));
    }
    if (above.size() != 1) return -1;
    const int c = above.front();
    if (!ars_enabled) return c;
    const double u = naive_iou(det, tracks[c]);
    const double v = static_cast<double>(ars_long(det.w, det.h, tracks[c].w, tracks[c].h));
    const double denom = (1.0 - u) + v;
    const double alpha = denom == 0.0 ? 0.0 : v / denom;
    return alpha < theta_alpha ? -1 : c;
}

/// Pairwise co-occurrence counts between identities, as used by IDF1.
struct IdentityCounts {
    std::vector<int> gt_ids;
    std::vector<int> pred_ids;
    std::vector<long> gt_len;
    std::vector<long> pred_len;
    std::vector<std::vector<long>> overlap;  // [g][p]
};

/// Best total overlap over every partial bijection between identities.
inline long best_bijection(const IdentityCounts& c) {
    const std::size_t ng = c.gt_ids.size(), np = c.pred_ids.size();
    long best = 0;
    std::vector<bool> used(np, false);
    auto rec = [&](auto&& self, std::size_t g, long acc) -> void {
        if (g == ng) {
            best = std::max(best, acc);
            return;
        }
        self(self, g + 1, acc);  // g left unmatched
        for (std::size_t p = 0; p < np; ++p) {
            if (used[p]) continue;
            used[p] = true;
            self(self, g + 1, acc + c.overlap[g][p]);
            used[p] = false;
        }
    };
    rec(rec, 0, 0);
    return best;
}

}  // namespace selectrack::oracle
