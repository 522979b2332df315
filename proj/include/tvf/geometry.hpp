#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace tvf {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.1415926535897932384626433832795;

// Normalize an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) {
        t += kTwoPi;
    }
    if (t >= kTwoPi) {
        t = 0.0;
    }
    return t;
}

// Minimal absolute angular difference on the circle, in [0, pi].
inline double angular_distance(double a, double b) {
    double d = std::fabs(wrap_angle(a) - wrap_angle(b));
    return d > kPi ? kTwoPi - d : d;
}

// Minimal angular difference after folding by a symmetry period (e.g. pi/2
// for square footprints). period <= 0 means no folding.
inline double angular_distance_mod(double a, double b, double period) {
    if (period <= 0.0) {
        return angular_distance(a, b);
    }
    double d = std::fmod(std::fabs(a - b), period);
    return std::min(d, period - d);
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Planar rigid pose. theta is stored normalized to [0, 2*pi).
struct PoseSE2 {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    PoseSE2() = default;
    PoseSE2(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

    static PoseSE2 identity() { return {}; }
    Vec2 translation() const { return {x, y}; }
};

// (R1*R2, R1*q2 + q1)
inline PoseSE2 se2_compose(const PoseSE2& g1, const PoseSE2& g2) {
    const double c = std::cos(g1.theta);
    const double s = std::sin(g1.theta);
    return PoseSE2(g1.x + c * g2.x - s * g2.y,
                   g1.y + s * g2.x + c * g2.y,
                   g1.theta + g2.theta);
}

inline PoseSE2 se2_inverse(const PoseSE2& g) {
    const double c = std::cos(g.theta);
    const double s = std::sin(g.theta);
    // R(-theta) * (-q)
    return PoseSE2(-(c * g.x + s * g.y), -(-s * g.x + c * g.y), -g.theta);
}

// R(theta)*p + q
inline Vec2 se2_apply_point(const PoseSE2& g, Vec2 p) {
    const double c = std::cos(g.theta);
    const double s = std::sin(g.theta);
    return {c * p.x - s * p.y + g.x, s * p.x + c * p.y + g.y};
}

inline Vec2 se2_inverse_apply_point(const PoseSE2& g, Vec2 p) {
    const double c = std::cos(g.theta);
    const double s = std::sin(g.theta);
    const double dx = p.x - g.x;
    const double dy = p.y - g.y;
    return {c * dx + s * dy, -s * dx + c * dy};
}

// Discretized pose: raster cell (u = row, v = col) plus a rotation bin in [0, R).
struct PixelPose {
    int u = 0;
    int v = 0;
    int rot_bin = 0;
};

inline bool operator==(const PixelPose& a, const PixelPose& b) {
    return a.u == b.u && a.v == b.v && a.rot_bin == b.rot_bin;
}

// Pixel grid over the tabletop workspace. Pixel (0,0) covers the square whose
// corner sits at `origin`; rows advance along +x, columns along +y.
struct WorkspaceCalib {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_pitch = 0.5 / 160.0;  // meters per pixel
    int height_px = 160;               // H (rows)
    int width_px = 160;                // W (cols)
    int rotation_bins = 36;            // R

    bool in_bounds(int u, int v) const {
        return u >= 0 && u < height_px && v >= 0 && v < width_px;
    }
    Vec2 pixel_center(int u, int v) const {
        return {origin_x + (u + 0.5) * pixel_pitch, origin_y + (v + 0.5) * pixel_pitch};
    }
    double extent_x() const { return height_px * pixel_pitch; }
    double extent_y() const { return width_px * pixel_pitch; }
    Vec2 center() const { return {origin_x + 0.5 * extent_x(), origin_y + 0.5 * extent_y()}; }
};

inline double bin_to_angle(const WorkspaceCalib& calib, int rot_bin) {
    return wrap_angle(kTwoPi * rot_bin / calib.rotation_bins);
}

// Nearest rotation bin; ties broken toward the lower bin index.
inline int angle_to_bin(const WorkspaceCalib& calib, double theta) {
    const double step = kTwoPi / calib.rotation_bins;
    const double f = wrap_angle(theta) / step;
    const int r = static_cast<int>(std::ceil(f - 0.5));
    return ((r % calib.rotation_bins) + calib.rotation_bins) % calib.rotation_bins;
}

// Continuous pixel coordinate of a world point (pixel centers at integers).
inline Vec2 world_to_pixel_continuous(const WorkspaceCalib& calib, Vec2 p) {
    return {(p.x - calib.origin_x) / calib.pixel_pitch - 0.5,
            (p.y - calib.origin_y) / calib.pixel_pitch - 0.5};
}

// Nearest-pixel rounding with ties broken toward the lower index.
inline int round_pixel(double f) {
    return static_cast<int>(std::ceil(f - 0.5));
}

inline PoseSE2 pixel_to_world(const WorkspaceCalib& calib, const PixelPose& p) {
    if (!calib.in_bounds(p.u, p.v)) {
        throw std::out_of_range("geometry.pixel_to_world: pixel (" + std::to_string(p.u) + "," +
                                std::to_string(p.v) + ") outside raster");
    }
    const Vec2 c = calib.pixel_center(p.u, p.v);
    return PoseSE2(c.x, c.y, bin_to_angle(calib, p.rot_bin));
}

inline PixelPose world_to_pixel(const WorkspaceCalib& calib, const PoseSE2& pose) {
    const Vec2 f = world_to_pixel_continuous(calib, pose.translation());
    PixelPose p;
    p.u = round_pixel(f.x);
    p.v = round_pixel(f.y);
    p.rot_bin = angle_to_bin(calib, pose.theta);
    if (!calib.in_bounds(p.u, p.v)) {
        throw std::out_of_range("geometry.world_to_pixel: pose (" + std::to_string(pose.x) + "," +
                                std::to_string(pose.y) + ") outside workspace");
    }
    return p;
}

}  // namespace tvf
