#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvf/geometry.hpp"
#include "tvf/observation.hpp"
#include "tvf/rng.hpp"

namespace tvf {

inline constexpr double kTranslationTolerance = 0.01;   // 1 cm
inline constexpr double kZTolerance = 0.005;            // 0.5 cm
inline constexpr double kRotationTolerance = 15.0 * kPi / 180.0;
inline constexpr double kGeomEps = 1e-9;

struct Color {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
};

inline constexpr Color kTableColor{0.25, 0.25, 0.25};
inline constexpr Color kBlockRed{0.85, 0.10, 0.10};

enum class FootprintKind { square, rect, circle };

struct Footprint {
    FootprintKind kind = FootprintKind::square;
    double a = 0.04;  // square: side; rect: x extent; circle: radius
    double b = 0.04;  // rect: y extent; unused otherwise

    static Footprint make_square(double side) { return {FootprintKind::square, side, side}; }
    static Footprint make_rect(double lx, double ly) { return {FootprintKind::rect, lx, ly}; }
    static Footprint make_circle(double radius) { return {FootprintKind::circle, radius, radius}; }

    // radius of the circumscribed circle
    double bounding_radius() const {
        switch (kind) {
            case FootprintKind::square: return 0.5 * a * std::sqrt(2.0);
            case FootprintKind::rect: return 0.5 * std::hypot(a, b);
            default: return a;
        }
    }
    // rotation period of the footprint symmetry group; 0 means rotation ignored
    double symmetry_period() const {
        switch (kind) {
            case FootprintKind::square: return kPi / 2.0;
            case FootprintKind::rect: return kPi;
            default: return 0.0;
        }
    }
};

struct BlockState {
    int id = 0;
    Footprint footprint;
    double thickness = 0.03;
    Color color = kBlockRed;
    PoseSE2 pose;
    double z = 0.0;  // bottom face height

    double top() const { return z + thickness; }
};

inline bool point_in_footprint(const BlockState& b, Vec2 p) {
    const Vec2 l = se2_inverse_apply_point(b.pose, p);
    switch (b.footprint.kind) {
        case FootprintKind::square:
        case FootprintKind::rect:
            return std::fabs(l.x) <= 0.5 * b.footprint.a && std::fabs(l.y) <= 0.5 * b.footprint.b;
        default:
            return l.x * l.x + l.y * l.y <= b.footprint.a * b.footprint.a;
    }
}

namespace detail {

inline std::array<Vec2, 4> rect_corners(const BlockState& b) {
    const double hx = 0.5 * b.footprint.a;
    const double hy = 0.5 * b.footprint.b;
    return {se2_apply_point(b.pose, {hx, hy}), se2_apply_point(b.pose, {hx, -hy}),
            se2_apply_point(b.pose, {-hx, -hy}), se2_apply_point(b.pose, {-hx, hy})};
}

// separating axis test on one rectangle's edge normals
inline bool rects_separated_on(const BlockState& axis_owner, const std::array<Vec2, 4>& other) {
    const double c = std::cos(axis_owner.pose.theta);
    const double s = std::sin(axis_owner.pose.theta);
    const Vec2 axes[2] = {{c, s}, {-s, c}};
    const double half[2] = {0.5 * axis_owner.footprint.a, 0.5 * axis_owner.footprint.b};
    for (int i = 0; i < 2; ++i) {
        double lo = 1e30, hi = -1e30;
        for (const Vec2& p : other) {
            const double t = (p.x - axis_owner.pose.x) * axes[i].x + (p.y - axis_owner.pose.y) * axes[i].y;
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        if (lo >= half[i] - kGeomEps || hi <= -half[i] + kGeomEps) {
            return true;
        }
    }
    return false;
}

inline bool circle_rect_overlap(const BlockState& circle, const BlockState& rect) {
    const Vec2 l = se2_inverse_apply_point(rect.pose, circle.pose.translation());
    const double cx = std::clamp(l.x, -0.5 * rect.footprint.a, 0.5 * rect.footprint.a);
    const double cy = std::clamp(l.y, -0.5 * rect.footprint.b, 0.5 * rect.footprint.b);
    const double d = std::hypot(l.x - cx, l.y - cy);
    return d < circle.footprint.a - kGeomEps;
}

}  // namespace detail

// Positive-area overlap of two footprints; exact edge contact does not count.
inline bool footprints_overlap(const BlockState& a, const BlockState& b) {
    const double d = norm(a.pose.translation() - b.pose.translation());
    if (d >= a.footprint.bounding_radius() + b.footprint.bounding_radius() - kGeomEps) {
        return false;
    }
    const bool a_circle = a.footprint.kind == FootprintKind::circle;
    const bool b_circle = b.footprint.kind == FootprintKind::circle;
    if (a_circle && b_circle) {
        return d < a.footprint.a + b.footprint.a - kGeomEps;
    }
    if (a_circle) return detail::circle_rect_overlap(a, b);
    if (b_circle) return detail::circle_rect_overlap(b, a);
    return !detail::rects_separated_on(a, detail::rect_corners(b)) &&
           !detail::rects_separated_on(b, detail::rect_corners(a));
}

inline bool z_extents_overlap(double z1, double t1, double z2, double t2) {
    return z1 < z2 + t2 - kGeomEps && z2 < z1 + t1 - kGeomEps;
}

inline bool blocks_interpenetrate(const BlockState& a, const BlockState& b) {
    return z_extents_overlap(a.z, a.thickness, b.z, b.thickness) && footprints_overlap(a, b);
}

struct WorldState {
    std::vector<BlockState> blocks;
    WorkspaceCalib calib;
    bool unstable = false;
};

inline bool world_collision_free(const WorldState& w) {
    for (std::size_t i = 0; i < w.blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < w.blocks.size(); ++j) {
            if (blocks_interpenetrate(w.blocks[i], w.blocks[j])) {
                return false;
            }
        }
    }
    return true;
}

struct BlockSpec {
    Footprint footprint;
    double thickness = 0.03;
    Color color = kBlockRed;
};

struct GoalPose {
    PoseSE2 pose;
    double z = 0.0;
};

struct Rect {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.5;
    double max_y = 0.5;
};

struct TaskSpec {
    std::string name;
    std::vector<BlockSpec> blocks;
    std::vector<GoalPose> goal_poses;
    Rect spawn_region{0.05, 0.05, 0.45, 0.45};
    std::uint64_t seed = 0;
    WorkspaceCalib calib;
    double max_height = 0.25;  // height normalization constant for L1 values
    int mask_side = 65;        // pick/place square side in pixels
};

// theta_pick is 0 for planner- and oracle-issued actions (symmetric gripper);
// transformed training samples may carry a nonzero pick rotation.
struct PickPlaceAction {
    PoseSE2 pick;
    PoseSE2 place;
};

struct EpisodeStep {
    Observation obs;
    PickPlaceAction action;
};

struct Episode {
    std::vector<EpisodeStep> steps;
    Observation final_observation;
    std::string task;
};

// --- rendering ----------------------------------------------------------

// Per pixel: top height and color of the tallest block covering the pixel
// center, table color and zero height where none does.
inline Observation render(const WorldState& w) {
    Observation o(w.calib.height_px, w.calib.width_px);
    for (int u = 0; u < o.rows(); ++u) {
        for (int v = 0; v < o.cols(); ++v) {
            o.at(u, v, 0) = kTableColor.r;
            o.at(u, v, 1) = kTableColor.g;
            o.at(u, v, 2) = kTableColor.b;
        }
    }
    std::vector<int> order(w.blocks.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        const double ti = w.blocks[i].top();
        const double tj = w.blocks[j].top();
        return ti != tj ? ti < tj : w.blocks[i].id < w.blocks[j].id;
    });
    for (int bi : order) {
        const BlockState& b = w.blocks[bi];
        const double r = b.footprint.bounding_radius();
        const Vec2 lo = world_to_pixel_continuous(w.calib, {b.pose.x - r, b.pose.y - r});
        const Vec2 hi = world_to_pixel_continuous(w.calib, {b.pose.x + r, b.pose.y + r});
        const int u0 = std::max(0, static_cast<int>(std::floor(lo.x)));
        const int v0 = std::max(0, static_cast<int>(std::floor(lo.y)));
        const int u1 = std::min(w.calib.height_px - 1, static_cast<int>(std::ceil(hi.x)));
        const int v1 = std::min(w.calib.width_px - 1, static_cast<int>(std::ceil(hi.y)));
        for (int u = u0; u <= u1; ++u) {
            for (int v = v0; v <= v1; ++v) {
                if (!point_in_footprint(b, w.calib.pixel_center(u, v))) continue;
                o.at(u, v, 0) = b.color.r;
                o.at(u, v, 1) = b.color.g;
                o.at(u, v, 2) = b.color.b;
                o.height(u, v) = b.top();
            }
        }
    }
    return o;
}

// --- success metrics ----------------------------------------------------

namespace detail {

inline bool same_block_type(const BlockSpec& a, const BlockSpec& b) {
    return a.footprint.kind == b.footprint.kind && std::fabs(a.footprint.a - b.footprint.a) < kGeomEps &&
           std::fabs(a.footprint.b - b.footprint.b) < kGeomEps && std::fabs(a.thickness - b.thickness) < kGeomEps &&
           std::fabs(a.color.r - b.color.r) < kGeomEps && std::fabs(a.color.g - b.color.g) < kGeomEps &&
           std::fabs(a.color.b - b.color.b) < kGeomEps;
}

inline BlockSpec spec_of(const BlockState& b) { return {b.footprint, b.thickness, b.color}; }

inline bool block_matches_goal(const BlockState& b, const BlockState& goal) {
    if (norm(b.pose.translation() - goal.pose.translation()) >= kTranslationTolerance) return false;
    if (std::fabs(b.z - goal.z) >= kZTolerance) return false;
    const double period = b.footprint.symmetry_period();
    if (period == 0.0) return true;  // circles: rotation ignored
    return angular_distance_mod(b.pose.theta, goal.pose.theta, period) < kRotationTolerance;
}

// maximum bipartite matching (Kuhn's augmenting paths) over pass/fail edges
inline int max_matching(const std::vector<std::vector<int>>& adj, int n_right) {
    std::vector<int> match_right(n_right, -1);
    std::vector<char> used;
    std::function<bool(int)> try_kuhn = [&](int left) -> bool {
        for (int r : adj[left]) {
            if (used[r]) continue;
            used[r] = 1;
            if (match_right[r] < 0 || try_kuhn(match_right[r])) {
                match_right[r] = left;
                return true;
            }
        }
        return false;
    };
    int matched = 0;
    for (std::size_t l = 0; l < adj.size(); ++l) {
        used.assign(n_right, 0);
        if (try_kuhn(static_cast<int>(l))) ++matched;
    }
    return matched;
}

}  // namespace detail

// Number of world blocks that can be simultaneously assigned to distinct
// same-type goal slots within the success tolerances.
inline int count_blocks_in_place(const WorldState& world, const WorldState& goal) {
    if (world.blocks.size() != goal.blocks.size()) {
        throw std::invalid_argument("simulator.check_success: block count mismatch");
    }
    const int n = static_cast<int>(world.blocks.size());
    // verify the multisets of block types agree
    std::vector<char> taken(n, 0);
    for (const BlockState& b : world.blocks) {
        bool found = false;
        for (int j = 0; j < n; ++j) {
            if (!taken[j] && detail::same_block_type(detail::spec_of(b), detail::spec_of(goal.blocks[j]))) {
                taken[j] = 1;
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument("simulator.check_success: block type multiset mismatch");
        }
    }
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (detail::same_block_type(detail::spec_of(world.blocks[i]), detail::spec_of(goal.blocks[j])) &&
                detail::block_matches_goal(world.blocks[i], goal.blocks[j])) {
                adj[i].push_back(j);
            }
        }
    }
    return detail::max_matching(adj, n);
}

inline bool check_success(const WorldState& world, const WorldState& goal) {
    return count_blocks_in_place(world, goal) == static_cast<int>(world.blocks.size());
}

inline double rate_of_progress(const WorldState& world, const WorldState& goal) {
    if (world.blocks.empty()) return 1.0;
    return static_cast<double>(count_blocks_in_place(world, goal)) / static_cast<double>(world.blocks.size());
}

// --- task loading -------------------------------------------------------

inline WorldState goal_world(const TaskSpec& spec) {
    if (spec.blocks.size() != spec.goal_poses.size()) {
        throw std::invalid_argument("simulator.load_task: |goal_poses| != |blocks| in " + spec.name);
    }
    WorldState w;
    w.calib = spec.calib;
    for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
        BlockState b;
        b.id = static_cast<int>(i);
        b.footprint = spec.blocks[i].footprint;
        b.thickness = spec.blocks[i].thickness;
        b.color = spec.blocks[i].color;
        b.pose = spec.goal_poses[i].pose;
        b.z = spec.goal_poses[i].z;
        w.blocks.push_back(b);
    }
    if (!world_collision_free(w)) {
        throw std::invalid_argument("simulator.load_task: goal configuration collides in " + spec.name);
    }
    return w;
}

// Initial world: every block at z=0 at a collision-free pose uniformly
// sampled inside the spawn region. Poses already within the success tolerance
// of a same-type goal slot are rejected so that every block still has to be
// moved (keeps oracle rollouts at exactly one action per block).
inline std::pair<WorldState, WorldState> load_task(const TaskSpec& spec, std::uint64_t seed) {
    const WorldState goal = goal_world(spec);
    WorldState w;
    w.calib = spec.calib;
    Rng rng(seed ^ (0x51ed270b * 0x100000001b3ull));
    for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
        BlockState b;
        b.id = static_cast<int>(i);
        b.footprint = spec.blocks[i].footprint;
        b.thickness = spec.blocks[i].thickness;
        b.color = spec.blocks[i].color;
        b.z = 0.0;
        const double r = b.footprint.bounding_radius();
        bool placed = false;
        for (int attempt = 0; attempt < 10000; ++attempt) {
            b.pose = PoseSE2(rng.uniform(spec.spawn_region.min_x, spec.spawn_region.max_x),
                             rng.uniform(spec.spawn_region.min_y, spec.spawn_region.max_y),
                             rng.uniform(0.0, kTwoPi));
            // keep the footprint inside the rendered workspace
            if (b.pose.x - r < spec.calib.origin_x || b.pose.x + r > spec.calib.origin_x + spec.calib.extent_x() ||
                b.pose.y - r < spec.calib.origin_y || b.pose.y + r > spec.calib.origin_y + spec.calib.extent_y()) {
                continue;
            }
            bool bad = false;
            for (const BlockState& other : w.blocks) {
                if (blocks_interpenetrate(b, other)) {
                    bad = true;
                    break;
                }
            }
            for (const BlockState& slot : goal.blocks) {
                if (bad) break;
                if (detail::same_block_type(detail::spec_of(b), detail::spec_of(slot)) &&
                    detail::block_matches_goal(b, slot)) {
                    bad = true;
                }
            }
            if (!bad) {
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw std::runtime_error("simulator.load_task: spawn sampling failed for " + spec.name);
        }
        w.blocks.push_back(b);
    }
    return {w, goal};
}

inline std::pair<WorldState, WorldState> load_task(const TaskSpec& spec) { return load_task(spec, spec.seed); }

// --- action execution ---------------------------------------------------

namespace detail {

// top of the support stack under the footprint of `b` placed among `others`
inline double landing_height(const BlockState& b, const std::vector<BlockState>& others, int skip_id) {
    double z = 0.0;
    for (const BlockState& o : others) {
        if (o.id == skip_id) continue;
        if (footprints_overlap(b, o)) {
            z = std::max(z, o.top());
        }
    }
    return z;
}

// Re-derive support heights bottom-up so no block hovers after its support
// was picked away.
inline void settle(WorldState& w) {
    std::vector<int> order(w.blocks.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return w.blocks[i].z != w.blocks[j].z ? w.blocks[i].z < w.blocks[j].z : w.blocks[i].id < w.blocks[j].id;
    });
    std::vector<BlockState> settled;
    settled.reserve(w.blocks.size());
    for (int bi : order) {
        BlockState& b = w.blocks[bi];
        b.z = landing_height(b, settled, b.id);
        settled.push_back(b);
    }
}

// topmost block whose footprint contains the point; -1 if none
inline int topmost_block_at(const WorldState& w, Vec2 p) {
    int best = -1;
    for (std::size_t i = 0; i < w.blocks.size(); ++i) {
        if (!point_in_footprint(w.blocks[i], p)) continue;
        if (best < 0 || w.blocks[i].top() > w.blocks[best].top() + kGeomEps ||
            (std::fabs(w.blocks[i].top() - w.blocks[best].top()) <= kGeomEps && w.blocks[i].id < w.blocks[best].id)) {
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace detail

// Suction pick on the topmost block под the pick position, rigid transport by
// place o pick^-1, landing on the highest support under the new footprint.
// A pick over bare table is a legal no-op.
inline WorldState apply_action(const WorldState& world, const PickPlaceAction& a) {
    WorldState w = world;
    const int picked = detail::topmost_block_at(w, a.pick.translation());
    if (picked < 0) {
        return w;  // failed pick
    }
    BlockState& b = w.blocks[picked];
    const PoseSE2 motion = se2_compose(a.place, se2_inverse(a.pick));
    b.pose = se2_compose(motion, b.pose);
    b.z = detail::landing_height(b, w.blocks, b.id);
    for (const BlockState& other : w.blocks) {
        if (other.id != b.id && blocks_interpenetrate(b, other)) {
            w.unstable = true;
            break;
        }
    }
    detail::settle(w);
    return w;
}

// --- scripted oracle ----------------------------------------------------

namespace detail {

struct Assignment {
    std::vector<char> block_placed;
    std::vector<char> slot_filled;
};

inline Assignment placed_assignment(const WorldState& world, const WorldState& goal) {
    const int n = static_cast<int>(world.blocks.size());
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (same_block_type(spec_of(world.blocks[i]), spec_of(goal.blocks[j])) &&
                block_matches_goal(world.blocks[i], goal.blocks[j])) {
                adj[i].push_back(j);
            }
        }
    }
    std::vector<int> match_right(n, -1);
    std::vector<char> used;
    std::function<bool(int)> try_kuhn = [&](int left) -> bool {
        for (int r : adj[left]) {
            if (used[r]) continue;
            used[r] = 1;
            if (match_right[r] < 0 || try_kuhn(match_right[r])) {
                match_right[r] = left;
                return true;
            }
        }
        return false;
    };
    for (int l = 0; l < n; ++l) {
        used.assign(n, 0);
        try_kuhn(l);
    }
    Assignment out;
    out.block_placed.assign(n, 0);
    out.slot_filled.assign(n, 0);
    for (int r = 0; r < n; ++r) {
        if (match_right[r] >= 0) {
            out.slot_filled[r] = 1;
            out.block_placed[match_right[r]] = 1;
        }
    }
    return out;
}

// smallest-magnitude rotation that brings `from` onto `to` modulo the
// footprint symmetry
inline double minimal_goal_rotation(double from, double to, double period) {
    if (period <= 0.0) return 0.0;
    double d = std::fmod(to - from, period);
    if (d > 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    return d;
}

}  // namespace detail

// One expert action: fill the lowest unfilled goal slot that is currently
// supported and unobstructed, moving the best matching unmoved block (blocks
// squatting on the slot cell are preferred, then nearest).
inline PickPlaceAction oracle_policy(const WorldState& world, const WorldState& goal) {
    if (world.blocks.size() != goal.blocks.size()) {
        throw std::invalid_argument("simulator.oracle_policy: block count mismatch");
    }
    if (check_success(world, goal)) {
        throw std::logic_error("simulator.oracle_policy: world already satisfies the goal");
    }
    const int n = static_cast<int>(world.blocks.size());
    const detail::Assignment assign = detail::placed_assignment(world, goal);

    std::vector<int> slots;
    for (int j = 0; j < n; ++j) {
        if (!assign.slot_filled[j]) slots.push_back(j);
    }
    std::sort(slots.begin(), slots.end(), [&](int i, int j) {
        return goal.blocks[i].z != goal.blocks[j].z ? goal.blocks[i].z < goal.blocks[j].z : i < j;
    });

    for (int sj : slots) {
        const BlockState& slot = goal.blocks[sj];
        // candidate blocks: same type, not yet placed; squatters on the slot
        // cell first, then by distance, then by id
        std::vector<int> cands;
        for (int i = 0; i < n; ++i) {
            if (assign.block_placed[i]) continue;
            if (!detail::same_block_type(detail::spec_of(world.blocks[i]), detail::spec_of(slot))) continue;
            cands.push_back(i);
        }
        auto overlaps_slot = [&](int i) {
            BlockState probe = world.blocks[i];
            return footprints_overlap(probe, slot);
        };
        std::sort(cands.begin(), cands.end(), [&](int i, int j) {
            const bool oi = overlaps_slot(i);
            const bool oj = overlaps_slot(j);
            if (oi != oj) return oi;
            const double di = norm(world.blocks[i].pose.translation() - slot.pose.translation());
            const double dj = norm(world.blocks[j].pose.translation() - slot.pose.translation());
            if (di != dj) return di < dj;
            return i < j;
        });
        for (int bi : cands) {
            // the slot must be clear of every other unmoved block
            bool obstructed = false;
            for (int i = 0; i < n && !obstructed; ++i) {
                if (i == bi || assign.block_placed[i]) continue;
                obstructed = footprints_overlap(world.blocks[i], slot);
            }
            if (obstructed) continue;
            // landing on the current stack must reach exactly the slot height
            BlockState probe = world.blocks[bi];
            probe.pose = slot.pose;
            std::vector<BlockState> others;
            for (int i = 0; i < n; ++i) {
                if (i != bi) others.push_back(world.blocks[i]);
            }
            if (std::fabs(detail::landing_height(probe, others, probe.id) - slot.z) > kGeomEps) continue;
            // grasp at the block center; it must be the topmost block there
            const BlockState& b = world.blocks[bi];
            if (detail::topmost_block_at(world, b.pose.translation()) != bi) continue;
            const double dtheta =
                detail::minimal_goal_rotation(b.pose.theta, slot.pose.theta, b.footprint.symmetry_period());
            PickPlaceAction a;
            a.pick = PoseSE2(b.pose.x, b.pose.y, 0.0);
            a.place = PoseSE2(slot.pose.x, slot.pose.y, dtheta);
            return a;
        }
    }
    throw std::runtime_error("simulator.oracle_policy: no supported goal slot can be filled");
}

// Random exploratory action: pick the center of a uniformly chosen tabletop
// block, place at a collision-free pose on the bare table, uniform rotation.
inline PickPlaceAction sample_random_action(const WorldState& world, Rng& rng) {
    std::vector<int> tabletop;
    for (std::size_t i = 0; i < world.blocks.size(); ++i) {
        if (world.blocks[i].z > kGeomEps) continue;
        if (detail::topmost_block_at(world, world.blocks[i].pose.translation()) != static_cast<int>(i)) continue;
        tabletop.push_back(static_cast<int>(i));
    }
    if (tabletop.empty()) {
        throw std::runtime_error("simulator.sample_random_action: no pickable tabletop block");
    }
    const BlockState& b = world.blocks[tabletop[rng.uniform_int(tabletop.size())]];
    const double r = b.footprint.bounding_radius();
    const WorkspaceCalib& calib = world.calib;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        BlockState probe = b;
        probe.z = 0.0;
        probe.pose = PoseSE2(rng.uniform(calib.origin_x + r, calib.origin_x + calib.extent_x() - r),
                             rng.uniform(calib.origin_y + r, calib.origin_y + calib.extent_y() - r),
                             rng.uniform(0.0, kTwoPi));
        bool clear = true;
        for (const BlockState& other : world.blocks) {
            if (other.id == b.id) continue;
            if (footprints_overlap(probe, other)) {
                clear = false;
                break;
            }
        }
        if (!clear) continue;
        PickPlaceAction a;
        a.pick = PoseSE2(b.pose.x, b.pose.y, 0.0);
        a.place = PoseSE2(probe.pose.x, probe.pose.y, wrap_angle(probe.pose.theta - b.pose.theta));
        return a;
    }
    throw std::runtime_error("simulator.sample_random_action: no collision-free placement found");
}

inline PickPlaceAction sample_random_action(const WorldState& world, std::uint64_t seed) {
    Rng rng(seed);
    return sample_random_action(world, rng);
}

// Expert demonstration: n_random exploratory actions followed by oracle
// actions until the goal is reached; records (o_t, a_t) pairs plus o_g.
inline Episode record_demo(const TaskSpec& spec, std::uint64_t seed, int n_random = 2) {
    auto [world, goal] = load_task(spec, seed);
    Rng rng = Rng(seed).fork(0x6f7261636c65ull);
    Episode ep;
    ep.task = spec.name;
    for (int i = 0; i < n_random; ++i) {
        const PickPlaceAction a = sample_random_action(world, rng);
        ep.steps.push_back({render(world), a});
        world = apply_action(world, a);
    }
    const int step_budget = 10 * static_cast<int>(spec.blocks.size()) + n_random + 1;
    int guard = 0;
    while (!check_success(world, goal)) {
        if (++guard > step_budget) {
            throw std::runtime_error("simulator.record_demo: oracle failed to finish " + spec.name);
        }
        const PickPlaceAction a = oracle_policy(world, goal);
        ep.steps.push_back({render(world), a});
        world = apply_action(world, a);
    }
    ep.final_observation = render(world);
    return ep;
}

}  // namespace tvf
