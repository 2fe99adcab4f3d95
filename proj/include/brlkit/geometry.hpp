#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace brlkit {

// Axis-aligned box, corner coordinates in image units. Zero-area boxes are
// invalid; parsers reject them before construction of downstream state.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    bool valid() const {
        return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
               std::isfinite(y2) && x1 < x2 && y1 < y2;
    }

    double area() const { return (x2 - x1) * (y2 - y1); }

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }

    bool operator==(const Box&) const = default;
};

inline void check_box(const Box& b, const char* what = "box") {
    if (!b.valid()) {
        throw std::invalid_argument(std::string(what) +
                                    ": degenerate or non-finite box");
    }
}

inline double intersection_area(const Box& a, const Box& b) {
    const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

// Intersection over union. Symmetric, 0 for disjoint boxes, 1 for identical.
inline double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    if (inter == 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

}  // namespace brlkit
