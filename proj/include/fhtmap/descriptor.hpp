#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "fhtmap/geometry.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/raycast.hpp"

namespace fhtmap {

/// Unit-norm place descriptor. Components are non-negative and in [0,1].
struct Descriptor {
    std::vector<float> values;

    std::size_t dim() const { return values.size(); }
    friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

inline double dot(const Descriptor& a, const Descriptor& b) {
    double s = 0.0;
    const std::size_t n = std::min(a.values.size(), b.values.size());
    for (std::size_t i = 0; i < n; ++i)
        s += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
    return s;
}

/// Synthetic place descriptor: 4*D rays cast at fixed world-frame angles
/// feed two D/2-bin histograms (hit range / max_range, hit-cell texture).
/// Depends only on position, never on heading, and is fully deterministic.
inline Descriptor sense_descriptor(const World& world, Point2 position,
                                   double max_range, int dim) {
    if (dim < 4 || dim % 2 != 0)
        throw std::invalid_argument("sense_descriptor: dim must be even and >= 4");
    if (!world.truth.point_free(position))
        throw std::invalid_argument("sense_descriptor: position not in free space");

    const int half = dim / 2;
    const int n_rays = 4 * dim;
    std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
    for (int k = 0; k < n_rays; ++k) {
        const double angle = kTwoPi * k / n_rays;
        CellIndex hit{};
        const float r = cast_single_ray(world.truth, position, angle, max_range, &hit);
        if (r <= 0.0f) continue;  // no return: contributes nothing
        int rbin = static_cast<int>(static_cast<double>(r) / max_range * half);
        rbin = std::clamp(rbin, 0, half - 1);
        acc[static_cast<std::size_t>(rbin)] += 1.0;
        int tbin = static_cast<int>(static_cast<double>(world.texture_at(hit)) * half);
        tbin = std::clamp(tbin, 0, half - 1);
        acc[static_cast<std::size_t>(half + tbin)] += 1.0;
    }

    double sq = 0.0;
    for (double& v : acc) {
        v += 1e-6;  // floor keeps degenerate fully-open worlds off the zero vector
        sq += v * v;
    }
    const double inv = 1.0 / std::sqrt(sq);
    Descriptor d;
    d.values.resize(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
        d.values[static_cast<std::size_t>(i)] =
            static_cast<float>(acc[static_cast<std::size_t>(i)] * inv);
    return d;
}

}  // namespace fhtmap
