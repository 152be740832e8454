#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace fhtmap {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Normalize an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::fmod(a + kPi, kTwoPi);
    if (r <= 0.0) r += kTwoPi;
    return r - kPi;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    friend bool operator==(const Point2&, const Point2&) = default;

    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }

/// Robot pose in the plane; theta kept in (-pi, pi].
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Point2 position() const { return {x, y}; }
    friend bool operator==(const Pose2&, const Pose2&) = default;
};

inline Pose2 make_pose(double x, double y, double theta) {
    return {x, y, wrap_angle(theta)};
}

/// Rigid SE(2) transform: p' = R(rotation) * p + translation.
struct Transform2 {
    Point2 translation{};
    double rotation = 0.0;

    static Transform2 identity() { return {}; }

    Point2 apply(Point2 p) const {
        const double c = std::cos(rotation);
        const double s = std::sin(rotation);
        return {c * p.x - s * p.y + translation.x,
                s * p.x + c * p.y + translation.y};
    }

    friend bool operator==(const Transform2&, const Transform2&) = default;
};

inline Transform2 make_transform(double tx, double ty, double rot) {
    return {{tx, ty}, wrap_angle(rot)};
}

/// Composition: (a * b) applies b first, then a.
inline Transform2 compose(const Transform2& a, const Transform2& b) {
    return {a.apply(b.translation), wrap_angle(a.rotation + b.rotation)};
}

inline Transform2 operator*(const Transform2& a, const Transform2& b) {
    return compose(a, b);
}

inline Transform2 inverse(const Transform2& t) {
    const double c = std::cos(t.rotation);
    const double s = std::sin(t.rotation);
    return {{-(c * t.translation.x + s * t.translation.y),
             -(-s * t.translation.x + c * t.translation.y)},
            wrap_angle(-t.rotation)};
}

inline Transform2 pose_to_transform(const Pose2& p) {
    return {{p.x, p.y}, p.theta};
}

inline Pose2 transform_to_pose(const Transform2& t) {
    return {t.translation.x, t.translation.y, wrap_angle(t.rotation)};
}

inline Pose2 apply(const Transform2& t, const Pose2& p) {
    Point2 q = t.apply({p.x, p.y});
    return {q.x, q.y, wrap_angle(t.rotation + p.theta)};
}

/// Axis-aligned rectangle in map-frame meters. Closed on all sides.
struct Rect {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    bool contains(Point2 p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Weighted mean direction of a set of angles.
inline double circular_mean(std::span<const double> angles,
                            std::span<const double> weights = {}) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        s += w * std::sin(angles[i]);
        c += w * std::cos(angles[i]);
    }
    return std::atan2(s, c);
}

/// Angle minimizing the sum of absolute wrapped deviations; candidates are
/// the inputs themselves (exact for finite sets). Ties pick the earliest.
inline double circular_median(std::span<const double> angles) {
    double best = angles.empty() ? 0.0 : angles[0];
    double best_cost = std::numeric_limits<double>::infinity();
    for (double cand : angles) {
        double cost = 0.0;
        for (double a : angles) cost += std::abs(wrap_angle(a - cand));
        if (cost < best_cost - 1e-15) {
            best_cost = cost;
            best = cand;
        }
    }
    return best;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

}  // namespace fhtmap
