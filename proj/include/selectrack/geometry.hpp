#pragma once

namespace selectrack {

/// Axis-aligned box in pixels, top-left corner plus width/height
/// (the MOTChallenge convention).
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double center_x() const { return x + 0.5 * w; }
    double center_y() const { return y + 0.5 * h; }
    double aspect() const { return w / h; }

    /// True when every field is finite and both dimensions are positive.
    bool valid() const;

    bool operator==(const BBox&) const = default;
};

/// Throws std::invalid_argument naming `what` when the box is not valid.
void require_valid(const BBox& box, const char* what = "box");

/// Intersection over union. Touching edges give 0.
double iou(const BBox& a, const BBox& b);

/// Aspect-ratio similarity V from the complete-IoU formulation:
///   V = 1 - 4/pi^2 * (atan(w_a/h_a) - atan(w_b/h_b))^2
/// Lies in [0, 1] and equals 1 exactly when the aspect ratios match.
double aspect_ratio_similarity(const BBox& a, const BBox& b);

/// IoU-adaptive weighting of the aspect similarity: V / ((1 - IoU) + V).
/// The degenerate 0/0 case (IoU = 1, V = 0) is defined as 0 so that it
/// fails any positive threshold.
double blended_alpha(double iou_value, double similarity);

}  // namespace selectrack
