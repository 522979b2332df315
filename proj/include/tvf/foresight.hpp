#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tvf/observation.hpp"
#include "tvf/rng.hpp"
#include "tvf/simulator.hpp"

namespace tvf {

// Next-observation predictor f(o_t, a_t) -> o_{t+1}. Implementations must be
// pure in (o, a); sync_world lets state-tracking implementations re-anchor at
// the start of each real step.
class ForesightPredictor {
public:
    virtual ~ForesightPredictor() = default;
    virtual Observation predict(const Observation& o, const PickPlaceAction& a) const = 0;
    virtual void sync_world(const WorldState& /*world*/) {}
};

struct TransitionSample {
    Observation before;
    PickPlaceAction action;
    Observation after;
};

// Analytic cut-rotate-paste predictor. The square at p_pick is split into
// object content (height above the boundary-median support) and support; the
// object is rotated about p_pick, transported to p_place, and composited on
// top of the scene at the destination support height.
class GeometricForesight : public ForesightPredictor {
public:
    GeometricForesight(WorkspaceCalib calib, int mask_side, double height_eps = 0.002,
                       Color table_color = kTableColor)
        : calib_(calib), side_(mask_side), height_eps_(height_eps), table_(table_color) {
        if (side_ <= 0 || side_ % 2 == 0) {
            throw std::invalid_argument("foresight.geometric: mask side must be odd and positive");
        }
    }

    int mask_side() const { return side_; }

    Observation predict(const Observation& o, const PickPlaceAction& a) const override {
        const PixelPose pp = world_to_pixel(calib_, a.pick);
        const PixelPose lp = world_to_pixel(calib_, a.place);
        const double delta_theta = wrap_angle(a.place.theta - a.pick.theta);

        const PickMask mask = build_pick_mask(pp, side_, o.rows(), o.cols());
        const double support = boundary_median_support(o, pp, side_);

        Observation extracted(o.rows(), o.cols());
        Observation indicator(o.rows(), o.cols());
        const int half = side_ / 2;
        bool any_object = false;
        for (int u = std::max(0, pp.u - half); u <= std::min(o.rows() - 1, pp.u + half); ++u) {
            for (int v = std::max(0, pp.v - half); v <= std::min(o.cols() - 1, pp.v + half); ++v) {
                if (!mask.at(u, v)) continue;
                if (o.height(u, v) <= support + height_eps_) continue;
                any_object = true;
                extracted.at(u, v, 0) = o.at(u, v, 0);
                extracted.at(u, v, 1) = o.at(u, v, 1);
                extracted.at(u, v, 2) = o.at(u, v, 2);
                extracted.height(u, v) = o.height(u, v) - support;
                indicator.height(u, v) = 1.0;
            }
        }
        if (!any_object) {
            return o;  // nothing to cut: failed pick, mirror of the simulator
        }

        const Observation moved = build_place_patch(extracted, pp, lp, delta_theta, side_).patch;
        const Observation weights = build_place_patch(indicator, pp, lp, delta_theta, side_).patch;

        Observation out = o;
        for (int u = std::max(0, pp.u - half); u <= std::min(o.rows() - 1, pp.u + half); ++u) {
            for (int v = std::max(0, pp.v - half); v <= std::min(o.cols() - 1, pp.v + half); ++v) {
                if (indicator.height(u, v) == 0.0) continue;
                out.at(u, v, 0) = table_.r;
                out.at(u, v, 1) = table_.g;
                out.at(u, v, 2) = table_.b;
                out.height(u, v) = support;
            }
        }

        // landing support: highest cleared-scene column under the object body
        double dst_support = 0.0;
        for (int u = std::max(0, lp.u - half); u <= std::min(o.rows() - 1, lp.u + half); ++u) {
            for (int v = std::max(0, lp.v - half); v <= std::min(o.cols() - 1, lp.v + half); ++v) {
                if (weights.height(u, v) > 0.5) {
                    dst_support = std::max(dst_support, out.height(u, v));
                }
            }
        }

        // overlay: relative heights stay premultiplied (mass-preserving), rgb
        // is un-premultiplied so edge pixels keep the object color
        for (int u = std::max(0, lp.u - half); u <= std::min(o.rows() - 1, lp.u + half); ++u) {
            for (int v = std::max(0, lp.v - half); v <= std::min(o.cols() - 1, lp.v + half); ++v) {
                const double w = weights.height(u, v);
                if (w <= 1e-6) continue;
                const double top = dst_support + moved.height(u, v);
                if (top < out.height(u, v)) continue;  // an existing column sticks out above
                out.at(u, v, 0) = std::clamp(moved.at(u, v, 0) / w, 0.0, 1.0);
                out.at(u, v, 1) = std::clamp(moved.at(u, v, 1) / w, 0.0, 1.0);
                out.at(u, v, 2) = std::clamp(moved.at(u, v, 2) / w, 0.0, 1.0);
                out.height(u, v) = top;
            }
        }
        return out;
    }

private:
    WorkspaceCalib calib_;
    int side_;
    double height_eps_;
    Color table_;
};

namespace detail {

inline std::uint64_t hash_observation(const Observation& o) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t bits) {
        h ^= bits;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(o.rows()));
    mix(static_cast<std::uint64_t>(o.cols()));
    for (double d : o.data()) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, sizeof(bits));
        mix(bits);
    }
    return h;
}

}  // namespace detail

// Ground-truth predictor: replays actions through the simulator from the
// synced world state. Used to isolate planner quality from foresight error.
// Imagined observations are keyed by content so multi-step lookahead works
// without touching the real rollout.
class OracleForesight : public ForesightPredictor {
public:
    OracleForesight() = default;
    explicit OracleForesight(const WorldState& world) { sync_world(world); }

    void sync_world(const WorldState& world) override {
        states_.clear();
        root_ = world;
        synced_ = true;
        remember(render(world), world);
    }

    Observation predict(const Observation& o, const PickPlaceAction& a) const override {
        if (!synced_) {
            throw std::runtime_error("foresight.oracle_predict: predictor not synced to a world state");
        }
        const WorldState* w = lookup(o);
        if (w == nullptr) {
            ++stale_lookups_;  // divergence from every tracked state: fall back to the root
            w = &root_;
        }
        const WorldState next = apply_action(*w, a);
        Observation out = render(next);
        remember(out, next);
        return out;
    }

    long stale_lookups() const { return stale_lookups_; }

private:
    void remember(const Observation& o, const WorldState& w) const {
        states_[detail::hash_observation(o)].emplace_back(o, w);
    }

    const WorldState* lookup(const Observation& o) const {
        const auto it = states_.find(detail::hash_observation(o));
        if (it == states_.end()) return nullptr;
        for (const auto& [obs, world] : it->second) {
            if (obs == o) return &world;
        }
        return nullptr;
    }

    mutable std::unordered_map<std::uint64_t, std::vector<std::pair<Observation, WorldState>>> states_;
    WorldState root_;
    bool synced_ = false;
    mutable long stale_lookups_ = 0;
};

// Apply the same rigid transform to observation, action, and next observation.
inline TransitionSample augment_transition(const TransitionSample& s, const PoseSE2& g, const WorkspaceCalib& calib) {
    TransitionSample out;
    out.before = warp_observation(s.before, g, calib);
    out.action.pick = se2_compose(g, s.action.pick);
    out.action.place = se2_compose(g, s.action.place);
    out.after = warp_observation(s.after, g, calib);
    return out;
}

// True when the pick and place squares of an action do not overlap; foresight
// accuracy is only specified for disjoint squares (overlapping cut/paste
// regions have no defined semantics).
inline bool action_squares_disjoint(const WorkspaceCalib& calib, const PickPlaceAction& a, int side) {
    const PixelPose p = world_to_pixel(calib, a.pick);
    const PixelPose q = world_to_pixel(calib, a.place);
    return std::max(std::abs(p.u - q.u), std::abs(p.v - q.v)) >= side;
}

// --- equivariance verification harness -------------------------------------

struct EquivarianceCase {
    WorldState world;
    Observation obs;
    PickPlaceAction action;
    PoseSE2 g;
    bool pure_translation = false;
};

// Randomized scene + action + transform. One or two default blocks near the
// workspace center; actions sit on pixel centers the way planner actions do,
// with enough margin that both action squares stay inside the raster under
// the transform. Pure translations are whole-pixel shifts; rotations are
// whole bin widths about the workspace center.
inline EquivarianceCase make_equivariance_case(std::uint64_t seed, const WorkspaceCalib& calib, int mask_side,
                                               bool pure_translation, int max_shift_px = 15) {
    Rng rng(seed);
    EquivarianceCase out;
    out.pure_translation = pure_translation;
    out.world.calib = calib;

    const int n_blocks = 1 + static_cast<int>(rng.uniform_int(2));
    for (int i = 0; i < n_blocks; ++i) {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            BlockState b;
            b.id = i;
            b.pose = PoseSE2(rng.uniform(0.17, 0.33), rng.uniform(0.17, 0.33), rng.uniform(0.0, kTwoPi));
            bool clear = true;
            for (const BlockState& other : out.world.blocks) {
                if (footprints_overlap(b, other)) clear = false;
            }
            if (!clear) continue;
            out.world.blocks.push_back(b);
            break;
        }
    }
    out.obs = render(out.world);

    const PixelPose pick_px = world_to_pixel(calib, out.world.blocks[0].pose);
    const int margin = mask_side / 2 + max_shift_px + 2;
    PixelPose place_px;
    place_px.u = margin + static_cast<int>(rng.uniform_int(calib.height_px - 2 * margin));
    place_px.v = margin + static_cast<int>(rng.uniform_int(calib.width_px - 2 * margin));
    place_px.rot_bin = static_cast<int>(rng.uniform_int(calib.rotation_bins));
    const PoseSE2 pick_pose = pixel_to_world(calib, pick_px);
    out.action.pick = PoseSE2(pick_pose.x, pick_pose.y, 0.0);
    out.action.place = pixel_to_world(calib, place_px);

    if (pure_translation) {
        const int du = static_cast<int>(rng.uniform_int(2 * max_shift_px + 1)) - max_shift_px;
        const int dv = static_cast<int>(rng.uniform_int(2 * max_shift_px + 1)) - max_shift_px;
        out.g = PoseSE2(du * calib.pixel_pitch, dv * calib.pixel_pitch, 0.0);
    } else {
        const int bins = 1 + static_cast<int>(rng.uniform_int(3));
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double theta = sign * bins * kTwoPi / calib.rotation_bins;
        const Vec2 c = calib.center();
        out.g = se2_compose(PoseSE2(c.x, c.y, 0.0), se2_compose(PoseSE2(0.0, 0.0, theta), PoseSE2(-c.x, -c.y, 0.0)));
    }
    return out;
}

// || f(g.o, g.a) - g.f(o, a) ||_1, unit weights, averaged over pixels valid
// under both the forward and inverse warp (zero-fill borders excluded).
inline double equivariance_residual(const ForesightPredictor& f, const Observation& o, const PickPlaceAction& a,
                                    const PoseSE2& g, const WorkspaceCalib& calib) {
    PickPlaceAction ga;
    ga.pick = se2_compose(g, a.pick);
    ga.place = se2_compose(g, a.place);
    const Observation lhs = f.predict(warp_observation(o, g, calib), ga);
    const Observation rhs = warp_observation(f.predict(o, a), g, calib);

    const auto valid_bwd = warp_valid_mask(g, calib);
    const auto valid_fwd = warp_valid_mask(se2_inverse(g), calib);
    double err = 0.0;
    long n = 0;
    for (int u = 0; u < lhs.rows(); ++u) {
        for (int v = 0; v < lhs.cols(); ++v) {
            const std::size_t i = static_cast<std::size_t>(u) * lhs.cols() + v;
            if (!valid_bwd[i] || !valid_fwd[i]) continue;
            for (int c = 0; c < kChannels; ++c) {
                err += std::fabs(lhs.at(u, v, c) - rhs.at(u, v, c));
                ++n;
            }
        }
    }
    return n == 0 ? 0.0 : err / static_cast<double>(n);
}

}  // namespace tvf
