#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fhtmap/geometry.hpp"
#include "fhtmap/raycast.hpp"

namespace fhtmap {

/// Scan points in the scan's own frame; no-return beams are dropped.
inline std::vector<Point2> scan_points(const LaserScan& scan) {
    std::vector<Point2> pts;
    pts.reserve(scan.size());
    for (std::size_t i = 0; i < scan.size(); ++i) {
        if (!scan.has_return(i)) continue;
        const double r = static_cast<double>(scan.ranges[i]);
        pts.push_back({r * std::cos(scan.angles[i]), r * std::sin(scan.angles[i])});
    }
    return pts;
}

struct IcpResult {
    Transform2 transform;  // maps current-frame points into the reference frame
    double rms = 0.0;      // inlier root-mean-square residual, meters
    int inliers = 0;
};

struct IcpConfig {
    double max_correspondence = 0.8;  // meters
    int max_iterations = 60;
    double tolerance = 1e-7;
    double rms_accept = 0.2;          // best candidate must beat this
    // wrong-place alignments tend to match only partial structure; demand a
    // majority overlap, then rank candidates by consensus size
    double min_inlier_fraction = 0.55;
    int min_points = 10;
};

namespace detail {

/// Uniform-bucket nearest neighbor over a fixed point set.
class PointHash {
public:
    PointHash(const std::vector<Point2>& pts, double cell) : pts_(pts), cell_(cell) {
        buckets_.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            buckets_[key(pts[i])].push_back(static_cast<int>(i));
    }

    /// Index of the nearest point within max_d, or -1.
    int nearest(Point2 q, double max_d) const {
        const std::int64_t kx = coord(q.x);
        const std::int64_t ky = coord(q.y);
        int best = -1;
        double best_d2 = max_d * max_d;
        for (std::int64_t dy = -1; dy <= 1; ++dy)
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                const auto it = buckets_.find(pack(kx + dx, ky + dy));
                if (it == buckets_.end()) continue;
                for (int idx : it->second) {
                    const double d2 = (pts_[static_cast<std::size_t>(idx)] - q).squared_norm();
                    if (d2 <= best_d2) {
                        best_d2 = d2;
                        best = idx;
                    }
                }
            }
        return best;
    }

private:
    std::int64_t coord(double v) const {
        return static_cast<std::int64_t>(std::floor(v / cell_));
    }
    static std::int64_t pack(std::int64_t x, std::int64_t y) {
        return (x << 32) ^ (y & 0xffffffffll);
    }
    std::int64_t key(Point2 p) const { return pack(coord(p.x), coord(p.y)); }

    const std::vector<Point2>& pts_;
    double cell_;
    std::unordered_map<std::int64_t, std::vector<int>> buckets_;
};

struct Refined {
    Transform2 t;
    double rms = std::numeric_limits<double>::infinity();
    int inliers = 0;
};

inline Refined icp_refine(const std::vector<Point2>& ref, const PointHash& hash,
                          const std::vector<Point2>& cur, Transform2 t,
                          const IcpConfig& cfg) {
    Refined out;
    const int need = std::max(
        cfg.min_points,
        static_cast<int>(cfg.min_inlier_fraction * static_cast<double>(cur.size())));
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        Point2 mean_c{}, mean_r{};
        std::vector<std::pair<Point2, Point2>> pairs;  // (current, reference)
        pairs.reserve(cur.size());
        for (const Point2& q : cur) {
            const Point2 p = t.apply(q);
            const int idx = hash.nearest(p, cfg.max_correspondence);
            if (idx < 0) continue;
            const Point2 r = ref[static_cast<std::size_t>(idx)];
            pairs.emplace_back(q, r);
            mean_c = mean_c + q;
            mean_r = mean_r + r;
        }
        if (static_cast<int>(pairs.size()) < need) return out;  // invalid candidate
        const double inv = 1.0 / static_cast<double>(pairs.size());
        mean_c = inv * mean_c;
        mean_r = inv * mean_r;
        double sxx = 0.0, sxy = 0.0;
        for (const auto& [q, r] : pairs) {
            const Point2 qc = q - mean_c;
            const Point2 rc = r - mean_r;
            sxx += dot(qc, rc);
            sxy += cross(qc, rc);
        }
        const double theta = std::atan2(sxy, sxx);
        const double c = std::cos(theta), s = std::sin(theta);
        Transform2 next;
        next.rotation = wrap_angle(theta);
        next.translation = {mean_r.x - (c * mean_c.x - s * mean_c.y),
                            mean_r.y - (s * mean_c.x + c * mean_c.y)};

        const double dt = (next.translation - t.translation).norm() +
                          std::abs(wrap_angle(next.rotation - t.rotation));
        t = next;
        if (dt < cfg.tolerance && iter > 0) break;
    }
    // final residual with the converged transform
    double sq = 0.0;
    int n = 0;
    for (const Point2& q : cur) {
        const Point2 p = t.apply(q);
        const int idx = hash.nearest(p, cfg.max_correspondence);
        if (idx < 0) continue;
        sq += (ref[static_cast<std::size_t>(idx)] - p).squared_norm();
        ++n;
    }
    if (n < need) return out;
    out.t = t;
    out.rms = std::sqrt(sq / static_cast<double>(n));
    out.inliers = n;
    return out;
}

}  // namespace detail

/// Global 2D scan alignment without an initial guess: point-to-point ICP
/// restarted from n_seeds rotations spread over (-pi, pi], translation
/// seeded by the centroid difference. Returns the lowest-RMS candidate.
/// Throws on insufficient points or when no candidate beats rms_accept.
inline IcpResult global_icp(const LaserScan& reference, const LaserScan& current,
                            int n_seeds, const IcpConfig& cfg = {}) {
    const std::vector<Point2> ref = scan_points(reference);
    const std::vector<Point2> cur = scan_points(current);
    if (static_cast<int>(ref.size()) < cfg.min_points ||
        static_cast<int>(cur.size()) < cfg.min_points)
        throw std::runtime_error("global_icp: insufficient overlap");

    const detail::PointHash hash(ref, cfg.max_correspondence);
    Point2 ref_mean{}, cur_mean{};
    for (const Point2& p : ref) ref_mean = ref_mean + p;
    for (const Point2& p : cur) cur_mean = cur_mean + p;
    ref_mean = (1.0 / static_cast<double>(ref.size())) * ref_mean;
    cur_mean = (1.0 / static_cast<double>(cur.size())) * cur_mean;

    // coarse pass per seed, then a tight-correspondence polish; candidates
    // are ranked by consensus size first (wrong locks onto symmetric
    // structure match fewer points), residual second
    IcpConfig tight = cfg;
    tight.max_correspondence = std::max(0.15, cfg.max_correspondence / 4.0);
    detail::Refined best;
    auto better = [](const detail::Refined& a, const detail::Refined& b) {
        if (a.inliers != b.inliers) return a.inliers > b.inliers;
        return a.rms < b.rms;
    };
    for (int k = 0; k < n_seeds; ++k) {
        const double theta = wrap_angle(-kPi + kTwoPi * (k + 1) / n_seeds);
        const double c = std::cos(theta), s = std::sin(theta);
        Transform2 seed;
        seed.rotation = theta;
        seed.translation = {ref_mean.x - (c * cur_mean.x - s * cur_mean.y),
                            ref_mean.y - (s * cur_mean.x + c * cur_mean.y)};
        detail::Refined cand = detail::icp_refine(ref, hash, cur, seed, cfg);
        if (cand.inliers > 0) cand = detail::icp_refine(ref, hash, cur, cand.t, tight);
        if (cand.inliers > 0 && cand.rms < cfg.rms_accept && better(cand, best))
            best = cand;
    }
    if (best.inliers == 0)
        throw std::runtime_error("global_icp: alignment failed");
    // final precision pass with very tight correspondences
    IcpConfig fine = cfg;
    fine.max_correspondence = std::max(0.08, cfg.max_correspondence / 10.0);
    const detail::Refined polished = detail::icp_refine(ref, hash, cur, best.t, fine);
    if (polished.inliers > 0) best = polished;
    return IcpResult{best.t, best.rms, best.inliers};
}

}  // namespace fhtmap
