#pragma once

#include <algorithm>
#include <array>

namespace crosscam {

struct Vec2 {
    double x = 0, y = 0;
};

/// Axis-aligned box in pixel coordinates, corners (x1,y1) top-left inclusive.
struct BBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
    Vec2 center() const { return {0.5 * (x1 + x2), 0.5 * (y1 + y2)}; }

    std::array<Vec2, 4> corners() const {
        return {{{x1, y1}, {x2, y1}, {x2, y2}, {x1, y2}}};
    }

    bool valid() const { return x1 < x2 && y1 < y2; }
};

inline double iou(const BBox& a, const BBox& b) {
    const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (ix <= 0 || iy <= 0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

}  // namespace crosscam
