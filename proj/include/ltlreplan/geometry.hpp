#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <variant>

namespace ltlreplan {

using Point = Eigen::Vector2d;
using Box = Eigen::AlignedBox2d;

template <typename Scalar>
struct DiscT {
    Eigen::Matrix<Scalar, 2, 1> center;
    Scalar radius;
};
using Disc = DiscT<double>;

/// Absolute obstacle footprint.
using Footprint = std::variant<Box, Disc>;

inline Box make_box(const Point& min, const Point& max) { return Box(min, max); }

inline Box centered_box(const Point& center, const Point& size) {
    return Box(center - 0.5 * size, center + 0.5 * size);
}

template <typename Derived>
typename Derived::Scalar point_segment_distance(const Eigen::MatrixBase<Derived>& p, const Eigen::MatrixBase<Derived>& a,
                                                const Eigen::MatrixBase<Derived>& b) {
    using Scalar = typename Derived::Scalar;
    const auto ab = (b - a).eval();
    const Scalar len2 = ab.squaredNorm();
    if (len2 == Scalar(0)) return (p - a).norm();
    const Scalar t = std::clamp((p - a).dot(ab) / len2, Scalar(0), Scalar(1));
    return (p - (a + t * ab)).norm();
}

/// Liang-Barsky clip of segment ab against a closed box.
template <typename Scalar>
bool segment_intersects(const Eigen::AlignedBox<Scalar, 2>& box, const Eigen::Matrix<Scalar, 2, 1>& a,
                        const Eigen::Matrix<Scalar, 2, 1>& b) {
    Scalar t0 = 0, t1 = 1;
    const Eigen::Matrix<Scalar, 2, 1> d = b - a;
    for (int k = 0; k < 2; ++k) {
        if (d[k] == Scalar(0)) {
            if (a[k] < box.min()[k] || a[k] > box.max()[k]) return false;
            continue;
        }
        Scalar lo = (box.min()[k] - a[k]) / d[k];
        Scalar hi = (box.max()[k] - a[k]) / d[k];
        if (lo > hi) std::swap(lo, hi);
        t0 = std::max(t0, lo);
        t1 = std::min(t1, hi);
        if (t0 > t1) return false;
    }
    return true;
}

inline double distance(const Box& box, const Point& p) { return std::sqrt(box.squaredExteriorDistance(p)); }

inline double distance(const Disc& disc, const Point& p) { return std::max(0.0, (p - disc.center).norm() - disc.radius); }

inline double distance(const Footprint& f, const Point& p) {
    return std::visit([&](const auto& shape) { return distance(shape, p); }, f);
}

inline double segment_distance(const Box& box, const Point& a, const Point& b) {
    if (segment_intersects(box, a, b)) return 0.0;
    // Disjoint convex sets: the minimum is attained at an endpoint or a box corner.
    double best = std::min(distance(box, a), distance(box, b));
    for (int c = 0; c < 4; ++c) best = std::min(best, point_segment_distance(Point(box.corner(Box::CornerType(c))), a, b));
    return best;
}

inline double segment_distance(const Disc& disc, const Point& a, const Point& b) {
    return std::max(0.0, point_segment_distance(disc.center, a, b) - disc.radius);
}

inline double segment_distance(const Footprint& f, const Point& a, const Point& b) {
    return std::visit([&](const auto& shape) { return segment_distance(shape, a, b); }, f);
}

/// Closed-set overlap of a footprint and a box.
inline bool intersects(const Footprint& f, const Box& box) {
    if (const auto* b = std::get_if<Box>(&f)) return b->intersects(box);
    const Disc& d = std::get<Disc>(f);
    return box.squaredExteriorDistance(d.center) <= d.radius * d.radius;
}

inline Point center_of(const Footprint& f) {
    return std::visit(
        [](const auto& shape) -> Point {
            if constexpr (std::is_same_v<std::decay_t<decltype(shape)>, Box>) return shape.center();
            else return shape.center;
        },
        f);
}

/// Axis-aligned bounding box of the footprint grown by `margin`.
inline Box bounding_box(const Footprint& f, double margin = 0.0) {
    return std::visit(
        [&](const auto& shape) -> Box {
            if constexpr (std::is_same_v<std::decay_t<decltype(shape)>, Box>) {
                return Box(shape.min().array() - margin, shape.max().array() + margin);
            } else {
                const double r = shape.radius + margin;
                return Box(shape.center.array() - r, shape.center.array() + r);
            }
        },
        f);
}

}  // namespace ltlreplan
