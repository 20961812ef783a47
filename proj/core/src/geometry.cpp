#include "ssg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssg::geom {

const char* to_string(SpatialRelation r) {
    switch (r) {
        case SpatialRelation::LeftRight: return "left-right";
        case SpatialRelation::AboveBelow: return "above-below";
        case SpatialRelation::InsideOutside: return "inside-outside";
    }
    return "?";
}

double intersection_area(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x2(), b.x2()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y2(), b.y2()) - std::max(a.y, b.y));
    return ix * iy;
}

double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

Box union_box(const Box& a, const Box& b) {
    const double x1 = std::min(a.x, b.x);
    const double y1 = std::min(a.y, b.y);
    const double x2 = std::max(a.x2(), b.x2());
    const double y2 = std::max(a.y2(), b.y2());
    return Box{x1, y1, x2 - x1, y2 - y1};
}

double containment_fraction(const Box& a, const Box& b) {
    const double area = a.area();
    return area > 0 ? intersection_area(a, b) / area : 0.0;
}

SpatialRelation spatial_relation(const Box& a, const Box& b, double theta_inside) {
    if (containment_fraction(a, b) >= theta_inside || containment_fraction(b, a) >= theta_inside)
        return SpatialRelation::InsideOutside;
    const double dcx = std::abs(a.cx() - b.cx());
    const double dcy = std::abs(a.cy() - b.cy());
    return dcx >= dcy ? SpatialRelation::LeftRight : SpatialRelation::AboveBelow;
}

std::array<double, 4> normalize_box(const Box& b, double frame_w, double frame_h) {
    if (frame_w <= 0 || frame_h <= 0)
        throw std::invalid_argument("normalize_box: degenerate frame");
    if (b.x < 0 || b.y < 0 || b.x2() > frame_w || b.y2() > frame_h)
        throw std::invalid_argument("normalize_box: box outside frame");
    return {b.cx() / frame_w, b.cy() / frame_h, b.w / frame_w, b.h / frame_h};
}

}  // namespace ssg::geom
