#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tvf/geometry.hpp"

namespace tvf {

inline constexpr int kChannels = 4;   // r, g, b, height
inline constexpr int kHeightChannel = 3;

// Top-down raster of the workspace: RGB in [0,1] plus per-pixel column height
// in meters. Also reused for patches (side x side crops) and scratch rasters,
// where the height channel may carry relative values.
class Observation {
public:
    Observation() = default;
    Observation(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols * kChannels, 0.0) {
        if (rows <= 0 || cols <= 0) {
            throw std::invalid_argument("observation: raster dimensions must be positive");
        }
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& at(int u, int v, int c) { return data_[idx(u, v, c)]; }
    double at(int u, int v, int c) const { return data_[idx(u, v, c)]; }
    double& height(int u, int v) { return at(u, v, kHeightChannel); }
    double height(int u, int v) const { return at(u, v, kHeightChannel); }
    bool in_bounds(int u, int v) const { return u >= 0 && u < rows_ && v >= 0 && v < cols_; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const Observation& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t idx(int u, int v, int c) const {
        return (static_cast<std::size_t>(u) * cols_ + v) * kChannels + c;
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline bool operator==(const Observation& a, const Observation& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.data() == b.data();
}

// Square binary mask marking a pick location.
struct PickMask {
    std::vector<std::uint8_t> mask;  // rows x cols, row-major
    int rows = 0;
    int cols = 0;
    PixelPose center;
    int side = 0;

    bool at(int u, int v) const { return mask[static_cast<std::size_t>(u) * cols + v] != 0; }
    long sum() const {
        long s = 0;
        for (auto m : mask) s += m;
        return s;
    }
};

// Full-size raster holding the rotated pick crop pasted at the place location;
// zero outside the side x side square at place_center.
struct PlacePatch {
    Observation patch;
    PixelPose place_center;
    double delta_theta = 0.0;
    int side = 0;
};

struct ChannelWeights {
    double r = 1.0;
    double g = 1.0;
    double b = 1.0;
    double height = 1.0;

    static ChannelWeights unit() { return {1.0, 1.0, 1.0, 1.0}; }
    // demo-evaluation loss weighting: height counted five times the color channels
    static ChannelWeights training() { return {1.0, 1.0, 1.0, 5.0}; }

    double weight(int c) const {
        switch (c) {
            case 0: return r;
            case 1: return g;
            case 2: return b;
            default: return height;
        }
    }
    double total() const { return r + g + b + height; }
};

namespace detail {

// Snap sample coordinates that are within epsilon of an integer so that
// integer-pixel motions reproduce the source raster bit-exactly.
inline double snap_coord(double f) {
    const double r = std::round(f);
    return std::fabs(f - r) < 1e-9 ? r : f;
}

}  // namespace detail

// Bilinear sample of one channel at continuous pixel coordinates; texels
// outside the raster contribute `fill`.
inline double bilinear_sample(const Observation& o, double fu, double fv, int c, double fill = 0.0) {
    fu = detail::snap_coord(fu);
    fv = detail::snap_coord(fv);
    const int u0 = static_cast<int>(std::floor(fu));
    const int v0 = static_cast<int>(std::floor(fv));
    const double au = fu - u0;
    const double av = fv - v0;
    double out = 0.0;
    for (int du = 0; du <= 1; ++du) {
        const double wu = du == 0 ? 1.0 - au : au;
        if (wu == 0.0) continue;
        for (int dv = 0; dv <= 1; ++dv) {
            const double wv = dv == 0 ? 1.0 - av : av;
            if (wv == 0.0) continue;
            const int u = u0 + du;
            const int v = v0 + dv;
            out += wu * wv * (o.in_bounds(u, v) ? o.at(u, v, c) : fill);
        }
    }
    return out;
}

// output(p) = input(g^-1 . p), evaluated at pixel centers in world coordinates,
// bilinear resampling, zero fill outside the source raster.
inline Observation warp_observation(const Observation& o, const PoseSE2& g, const WorkspaceCalib& calib) {
    if (o.rows() != calib.height_px || o.cols() != calib.width_px) {
        throw std::invalid_argument("observation.warp_observation: raster does not match calib");
    }
    Observation out(o.rows(), o.cols());
    for (int u = 0; u < o.rows(); ++u) {
        for (int v = 0; v < o.cols(); ++v) {
            const Vec2 w = calib.pixel_center(u, v);
            const Vec2 src = se2_inverse_apply_point(g, w);
            const Vec2 f = world_to_pixel_continuous(calib, src);
            for (int c = 0; c < kChannels; ++c) {
                out.at(u, v, c) = bilinear_sample(o, f.x, f.y, c);
            }
        }
    }
    return out;
}

// True where the backward-mapped sample point of warp_observation lies fully
// inside the source raster (no zero-fill contribution).
inline std::vector<std::uint8_t> warp_valid_mask(const PoseSE2& g, const WorkspaceCalib& calib) {
    std::vector<std::uint8_t> valid(static_cast<std::size_t>(calib.height_px) * calib.width_px, 0);
    for (int u = 0; u < calib.height_px; ++u) {
        for (int v = 0; v < calib.width_px; ++v) {
            const Vec2 w = calib.pixel_center(u, v);
            const Vec2 src = se2_inverse_apply_point(g, w);
            Vec2 f = world_to_pixel_continuous(calib, src);
            f.x = detail::snap_coord(f.x);
            f.y = detail::snap_coord(f.y);
            const bool ok = f.x >= 0.0 && f.x <= calib.height_px - 1.0 && f.y >= 0.0 && f.y <= calib.width_px - 1.0;
            valid[static_cast<std::size_t>(u) * calib.width_px + v] = ok ? 1 : 0;
        }
    }
    return valid;
}

namespace detail {

// Bilinear blend with the sample position given as an integer base texel plus
// fractions in [0, 1). Keeping the fractions in pivot-relative coordinates
// makes rotations bit-identical under integer translations of the pivot,
// which absolute coordinates would break by one ulp.
inline double bilinear_blend(const Observation& o, int u0, int v0, double au, double av, int c, double fill) {
    double out = 0.0;
    for (int du = 0; du <= 1; ++du) {
        const double wu = du == 0 ? 1.0 - au : au;
        if (wu == 0.0) continue;
        for (int dv = 0; dv <= 1; ++dv) {
            const double wv = dv == 0 ? 1.0 - av : av;
            if (wv == 0.0) continue;
            const int u = u0 + du;
            const int v = v0 + dv;
            out += wu * wv * (o.in_bounds(u, v) ? o.at(u, v, c) : fill);
        }
    }
    return out;
}

struct SplitCoord {
    int base;
    double frac;
};

inline SplitCoord split_coord(double rel) {
    const double snapped = snap_coord(rel);
    const double fl = std::floor(snapped);
    return {static_cast<int>(fl), snapped - fl};
}

template <typename Fill>
inline Observation rotate_relative(const Observation& o, int pivot_u, int pivot_v, double angle, Fill fill) {
    Observation out(o.rows(), o.cols());
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (int u = 0; u < o.rows(); ++u) {
        for (int v = 0; v < o.cols(); ++v) {
            const double du = u - pivot_u;
            const double dv = v - pivot_v;
            const SplitCoord su = split_coord(c * du + s * dv);
            const SplitCoord sv = split_coord(-s * du + c * dv);
            for (int ch = 0; ch < kChannels; ++ch) {
                out.at(u, v, ch) = bilinear_blend(o, pivot_u + su.base, pivot_v + sv.base, su.frac, sv.frac, ch, fill(ch));
            }
        }
    }
    return out;
}

}  // namespace detail

// Rigid rotation of the raster about a pivot pixel, zero fill. Content at
// pivot + d moves to pivot + R(angle) d.
inline Observation rotate_about_pivot(const Observation& o, const PixelPose& pivot, double angle) {
    if (!o.in_bounds(pivot.u, pivot.v)) {
        throw std::out_of_range("observation.rotate_about_pivot: pivot outside raster");
    }
    return detail::rotate_relative(o, pivot.u, pivot.v, angle, [](int) { return 0.0; });
}

// Same rotation but about the patch center with a constant fill color; used
// for template rotation where zero fill would contaminate correlation.
// Intended for odd-sided patches whose center is an exact pixel.
inline Observation rotate_about_center_filled(const Observation& o, double angle, const std::array<double, kChannels>& fill) {
    return detail::rotate_relative(o, (o.rows() - 1) / 2, (o.cols() - 1) / 2, angle, [&fill](int c) { return fill[c]; });
}

// side x side crop centered at `center`; out-of-bounds region zero-filled.
inline Observation crop_square(const Observation& o, const PixelPose& center, int side) {
    if (side <= 0 || side % 2 == 0) {
        throw std::invalid_argument("observation.crop_square: side must be odd and positive");
    }
    const int half = side / 2;
    Observation patch(side, side);
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            const int u = center.u - half + i;
            const int v = center.v - half + j;
            if (!o.in_bounds(u, v)) continue;
            for (int c = 0; c < kChannels; ++c) {
                patch.at(i, j, c) = o.at(u, v, c);
            }
        }
    }
    return patch;
}

// Overwrite dst with the patch centered at `center`; patch pixels falling
// outside dst are dropped.
inline void paste_patch(Observation& dst, const Observation& patch, const PixelPose& center) {
    const int half_u = patch.rows() / 2;
    const int half_v = patch.cols() / 2;
    for (int i = 0; i < patch.rows(); ++i) {
        for (int j = 0; j < patch.cols(); ++j) {
            const int u = center.u - half_u + i;
            const int v = center.v - half_v + j;
            if (!dst.in_bounds(u, v)) continue;
            for (int c = 0; c < kChannels; ++c) {
                dst.at(u, v, c) = patch.at(i, j, c);
            }
        }
    }
}

inline PickMask build_pick_mask(const PixelPose& p_pick, int side, int rows, int cols) {
    if (side <= 0 || side % 2 == 0) {
        throw std::invalid_argument("observation.build_pick_mask: side must be odd and positive");
    }
    PickMask m;
    m.rows = rows;
    m.cols = cols;
    m.center = p_pick;
    m.side = side;
    m.mask.assign(static_cast<std::size_t>(rows) * cols, 0);
    const int half = side / 2;
    const int u_lo = std::max(0, p_pick.u - half);
    const int u_hi = std::min(rows - 1, p_pick.u + half);
    const int v_lo = std::max(0, p_pick.v - half);
    const int v_hi = std::min(cols - 1, p_pick.v + half);
    for (int u = u_lo; u <= u_hi; ++u) {
        for (int v = v_lo; v <= v_hi; ++v) {
            m.mask[static_cast<std::size_t>(u) * cols + v] = 1;
        }
    }
    return m;
}

// Rotate o by delta_theta about p_pick, crop the side x side square at
// p_pick, paste it onto a zero raster at p_place.
inline PlacePatch build_place_patch(const Observation& o, const PixelPose& p_pick, const PixelPose& p_place,
                                    double delta_theta, int side) {
    if (!o.in_bounds(p_pick.u, p_pick.v) || !o.in_bounds(p_place.u, p_place.v)) {
        throw std::out_of_range("observation.build_place_patch: pick/place pixel outside raster");
    }
    const Observation rotated = rotate_about_pivot(o, p_pick, delta_theta);
    const Observation crop = crop_square(rotated, p_pick, side);
    PlacePatch out;
    out.patch = Observation(o.rows(), o.cols());
    paste_patch(out.patch, crop, p_place);
    out.place_center = p_place;
    out.delta_theta = delta_theta;
    out.side = side;
    return out;
}

// Weighted mean absolute difference: sum_c w_c * mean_p |a-b| / sum_c w_c.
inline double l1_distance(const Observation& a, const Observation& b, const ChannelWeights& w = ChannelWeights::unit()) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("observation.l1_distance: shape mismatch");
    }
    const std::size_t n = static_cast<std::size_t>(a.rows()) * a.cols();
    std::array<double, kChannels> acc{};
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t i = 0; i < da.size(); i += kChannels) {
        for (int c = 0; c < kChannels; ++c) {
            acc[c] += std::fabs(da[i + c] - db[i + c]);
        }
    }
    double weighted = 0.0;
    for (int c = 0; c < kChannels; ++c) {
        weighted += w.weight(c) * (acc[c] / static_cast<double>(n));
    }
    return weighted / w.total();
}

// Median height over the in-bounds boundary ring of the side x side square at
// `center`; estimates the support surface an object in the square rests on.
inline double boundary_median_support(const Observation& o, const PixelPose& center, int side) {
    const int half = side / 2;
    std::vector<double> ring;
    ring.reserve(4 * side);
    for (int i = -half; i <= half; ++i) {
        for (int j = -half; j <= half; ++j) {
            if (std::max(std::abs(i), std::abs(j)) != half) continue;
            const int u = center.u + i;
            const int v = center.v + j;
            if (!o.in_bounds(u, v)) continue;
            ring.push_back(o.height(u, v));
        }
    }
    if (ring.empty()) return 0.0;
    std::sort(ring.begin(), ring.end());
    const std::size_t n = ring.size();
    return n % 2 == 1 ? ring[n / 2] : 0.5 * (ring[n / 2 - 1] + ring[n / 2]);
}

// Height channel scaled by 1/max_height and clamped to [0,1] so color and
// height are commensurate in L1 values.
inline Observation normalize_height(const Observation& o, double max_height) {
    if (max_height <= 0.0) {
        throw std::invalid_argument("observation.normalize_height: max_height must be positive");
    }
    Observation out = o;
    auto& d = out.data();
    for (std::size_t i = kHeightChannel; i < d.size(); i += kChannels) {
        d[i] = std::clamp(d[i] / max_height, 0.0, 1.0);
    }
    return out;
}

}  // namespace tvf
