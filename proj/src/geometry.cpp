#include "selectrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace selectrack {

bool BBox::valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
           w > 0.0 && h > 0.0;
}

void require_valid(const BBox& box, const char* what) {
    if (!box.valid()) {
        throw std::invalid_argument(std::string(what) +
                                    ": box must be finite with positive width and height");
    }
}

double iou(const BBox& a, const BBox& b) {
    require_valid(a, "iou lhs");
    require_valid(b, "iou rhs");

    // Measured from the left/top edge of one box so identical boxes give an
    // exact 1; the pair is put in a fixed order so the result is symmetric.
    const bool swap = std::tie(b.x, b.y, b.w, b.h) < std::tie(a.x, a.y, a.w, a.h);
    const BBox& p = swap ? b : a;
    const BBox& q = swap ? a : b;
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    const double ix = std::min(p.w, dx + q.w) - std::max(0.0, dx);
    const double iy = std::min(p.h, dy + q.h) - std::max(0.0, dy);
    if (ix <= 0.0 || iy <= 0.0) {
        return 0.0;
    }
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double aspect_ratio_similarity(const BBox& a, const BBox& b) {
    require_valid(a, "ars lhs");
    require_valid(b, "ars rhs");

    constexpr double kScale = 4.0 / (std::numbers::pi * std::numbers::pi);
    const double d = std::atan(a.w / a.h) - std::atan(b.w / b.h);
    return std::clamp(1.0 - kScale * d * d, 0.0, 1.0);
}

double blended_alpha(double iou_value, double similarity) {
    if (!(iou_value >= 0.0 && iou_value <= 1.0)) {
        throw std::invalid_argument("blended_alpha: iou must lie in [0, 1]");
    }
    if (!(similarity >= 0.0 && similarity <= 1.0)) {
        throw std::invalid_argument("blended_alpha: similarity must lie in [0, 1]");
    }
    const double denom = (1.0 - iou_value) + similarity;
    if (denom == 0.0) {
        return 0.0;
    }
    return similarity / denom;
}

}  // namespace selectrack
