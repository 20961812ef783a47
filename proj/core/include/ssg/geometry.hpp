#pragma once

#include <array>

namespace ssg::geom {

// Axis-aligned box, top-left origin, pixel units.
struct Box {
    double x = 0, y = 0, w = 0, h = 0;

    double x2() const { return x + w; }
    double y2() const { return y + h; }
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }
    bool valid() const { return w > 0 && h > 0; }

    bool operator==(const Box&) const = default;
};

// 3-way relation between two boxes, read from the first box's perspective.
enum class SpatialRelation { LeftRight, AboveBelow, InsideOutside };

inline constexpr int kSpatialRelationCount = 3;

const char* to_string(SpatialRelation r);

double intersection_area(const Box& a, const Box& b);

// Intersection over union. Disjoint boxes give 0.
double iou(const Box& a, const Box& b);

// Smallest box containing both inputs.
Box union_box(const Box& a, const Box& b);

// area(a intersect b) / area(a).
double containment_fraction(const Box& a, const Box& b);

// InsideOutside when either box is mostly contained in the other
// (containment fraction >= theta_inside). Otherwise LeftRight when the
// center offset is predominantly horizontal, AboveBelow when vertical.
// An exact |dcx| == |dcy| tie resolves to LeftRight.
SpatialRelation spatial_relation(const Box& a, const Box& b, double theta_inside = 0.8);

// (cx/W, cy/H, w/W, h/H). Throws std::invalid_argument if the box leaves
// the frame or the frame is degenerate.
std::array<double, 4> normalize_box(const Box& b, double frame_w, double frame_h);

}  // namespace ssg::geom
