#pragma once

// Shared helpers for foresight tests and the acceptance suite.

#include <cmath>

#include "tvf/foresight.hpp"
#include "tvf/rng.hpp"
#include "tvf/simulator.hpp"
#include "tvf/tasks.hpp"

namespace tvf::testgen {

using tvf::make_equivariance_case;

inline EquivarianceCase make_case(std::uint64_t seed, const WorkspaceCalib& calib, int mask_side,
                                  bool pure_translation, int max_shift_px = 15) {
    return make_equivariance_case(seed, calib, mask_side, pure_translation, max_shift_px);
}

// sum of above-support height inside the square at `center`
inline double object_mass(const Observation& o, const PixelPose& center, int side) {
    const double support = boundary_median_support(o, center, side);
    const int half = side / 2;
    double mass = 0.0;
    for (int u = std::max(0, center.u - half); u <= std::min(o.rows() - 1, center.u + half); ++u) {
        for (int v = std::max(0, center.v - half); v <= std::min(o.cols() - 1, center.v + half); ++v) {
            mass += std::max(0.0, o.height(u, v) - support);
        }
    }
    return mass;
}

inline bool squares_disjoint(const PixelPose& a, const PixelPose& b, int side) {
    return std::max(std::abs(a.u - b.u), std::abs(a.v - b.v)) >= side;
}

}  // namespace tvf::testgen
