#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvf/simulator.hpp"

// Shipped block-rearrangement tasks. All use the default 4 cm square block
// (3 cm thick, red) on a 0.5 x 0.5 m workspace; layouts are centered so a
// rotated block never leaves the raster.

namespace tvf {

namespace detail {

inline TaskSpec base_task(const std::string& name, int n_blocks) {
    TaskSpec t;
    t.name = name;
    t.blocks.assign(n_blocks, BlockSpec{});
    return t;
}

inline void add_goal(TaskSpec& t, std::size_t i, double x, double y, double z, double theta = 0.0) {
    if (i >= t.goal_poses.size()) t.goal_poses.resize(i + 1);
    t.goal_poses[i] = {PoseSE2(x, y, theta), z};
}

}  // namespace detail

inline const std::vector<std::string>& task_names() {
    static const std::vector<std::string> names = {
        // training-style
        "tower", "row", "square", "t-shape", "pyramid", "palace",
        // unseen-style
        "plane-t", "plane-square", "stair-2", "stair-3", "twin-tower", "rectangle", "pallet", "building"};
    return names;
}

inline TaskSpec make_task(const std::string& name) {
    using detail::add_goal;
    using detail::base_task;
    const double t = 0.03;  // block thickness
    if (name == "tower") {
        TaskSpec spec = base_task(name, 3);
        for (int i = 0; i < 3; ++i) add_goal(spec, i, 0.25, 0.25, i * t);
        return spec;
    }
    if (name == "row") {
        TaskSpec spec = base_task(name, 3);
        add_goal(spec, 0, 0.25, 0.19, 0.0);
        add_goal(spec, 1, 0.25, 0.25, 0.0);
        add_goal(spec, 2, 0.25, 0.31, 0.0);
        return spec;
    }
    if (name == "square") {
        TaskSpec spec = base_task(name, 4);
        add_goal(spec, 0, 0.19, 0.19, 0.0);
        add_goal(spec, 1, 0.19, 0.31, 0.0);
        add_goal(spec, 2, 0.31, 0.19, 0.0);
        add_goal(spec, 3, 0.31, 0.31, 0.0);
        return spec;
    }
    if (name == "t-shape") {
        // upside-down T in elevation: three-block base, one stacked mid
        TaskSpec spec = base_task(name, 4);
        add_goal(spec, 0, 0.25, 0.21, 0.0);
        add_goal(spec, 1, 0.25, 0.25, 0.0);
        add_goal(spec, 2, 0.25, 0.29, 0.0);
        add_goal(spec, 3, 0.25, 0.25, t);
        return spec;
    }
    if (name == "pyramid") {
        TaskSpec spec = base_task(name, 6);
        add_goal(spec, 0, 0.25, 0.21, 0.0);
        add_goal(spec, 1, 0.25, 0.25, 0.0);
        add_goal(spec, 2, 0.25, 0.29, 0.0);
        add_goal(spec, 3, 0.25, 0.23, t);
        add_goal(spec, 4, 0.25, 0.27, t);
        add_goal(spec, 5, 0.25, 0.25, 2 * t);
        return spec;
    }
    if (name == "palace") {
        // 2x2 base with two bridging blocks on top
        TaskSpec spec = base_task(name, 6);
        add_goal(spec, 0, 0.23, 0.23, 0.0);
        add_goal(spec, 1, 0.23, 0.27, 0.0);
        add_goal(spec, 2, 0.27, 0.23, 0.0);
        add_goal(spec, 3, 0.27, 0.27, 0.0);
        add_goal(spec, 4, 0.23, 0.25, t);
        add_goal(spec, 5, 0.27, 0.25, t);
        return spec;
    }
    if (name == "plane-t") {
        TaskSpec spec = base_task(name, 4);
        add_goal(spec, 0, 0.31, 0.19, 0.0);
        add_goal(spec, 1, 0.31, 0.25, 0.0);
        add_goal(spec, 2, 0.31, 0.31, 0.0);
        add_goal(spec, 3, 0.25, 0.25, 0.0);
        return spec;
    }
    if (name == "plane-square") {
        // solid 2x2 square of touching blocks
        TaskSpec spec = base_task(name, 4);
        add_goal(spec, 0, 0.23, 0.23, 0.0);
        add_goal(spec, 1, 0.23, 0.27, 0.0);
        add_goal(spec, 2, 0.27, 0.23, 0.0);
        add_goal(spec, 3, 0.27, 0.27, 0.0);
        return spec;
    }
    if (name == "stair-2") {
        TaskSpec spec = base_task(name, 3);
        add_goal(spec, 0, 0.25, 0.23, 0.0);
        add_goal(spec, 1, 0.25, 0.27, 0.0);
        add_goal(spec, 2, 0.25, 0.23, t);
        return spec;
    }
    if (name == "stair-3") {
        TaskSpec spec = base_task(name, 6);
        add_goal(spec, 0, 0.25, 0.21, 0.0);
        add_goal(spec, 1, 0.25, 0.25, 0.0);
        add_goal(spec, 2, 0.25, 0.29, 0.0);
        add_goal(spec, 3, 0.25, 0.21, t);
        add_goal(spec, 4, 0.25, 0.25, t);
        add_goal(spec, 5, 0.25, 0.21, 2 * t);
        return spec;
    }
    if (name == "twin-tower") {
        TaskSpec spec = base_task(name, 6);
        for (int i = 0; i < 3; ++i) add_goal(spec, i, 0.25, 0.19, i * t);
        for (int i = 0; i < 3; ++i) add_goal(spec, 3 + i, 0.25, 0.31, i * t);
        return spec;
    }
    if (name == "rectangle") {
        // flat 2x3 slab of touching blocks
        TaskSpec spec = base_task(name, 6);
        int i = 0;
        for (double x : {0.23, 0.27}) {
            for (double y : {0.21, 0.25, 0.29}) {
                add_goal(spec, i++, x, y, 0.0);
            }
        }
        return spec;
    }
    if (name == "pallet") {
        // criss-cross stack: row of three along y, two across, one on top
        TaskSpec spec = base_task(name, 6);
        add_goal(spec, 0, 0.25, 0.21, 0.0);
        add_goal(spec, 1, 0.25, 0.25, 0.0);
        add_goal(spec, 2, 0.25, 0.29, 0.0);
        add_goal(spec, 3, 0.23, 0.25, t);
        add_goal(spec, 4, 0.27, 0.25, t);
        add_goal(spec, 5, 0.25, 0.25, 2 * t);
        return spec;
    }
    if (name == "building") {
        // 2x2 base with a two-block tower on top
        TaskSpec spec = base_task(name, 6);
        add_goal(spec, 0, 0.23, 0.23, 0.0);
        add_goal(spec, 1, 0.23, 0.27, 0.0);
        add_goal(spec, 2, 0.27, 0.23, 0.0);
        add_goal(spec, 3, 0.27, 0.27, 0.0);
        add_goal(spec, 4, 0.25, 0.25, t);
        add_goal(spec, 5, 0.25, 0.25, 2 * t);
        return spec;
    }
    throw std::invalid_argument("tasks.make_task: unknown task '" + name + "'");
}

// --- JSON (de)serialization ----------------------------------------------

inline void to_json(nlohmann::json& j, const WorkspaceCalib& c) {
    j = {{"origin", {c.origin_x, c.origin_y}},
         {"pixel_pitch", c.pixel_pitch},
         {"height_px", c.height_px},
         {"width_px", c.width_px},
         {"rotation_bins", c.rotation_bins}};
}

inline void from_json(const nlohmann::json& j, WorkspaceCalib& c) {
    c.origin_x = j.at("origin").at(0).get<double>();
    c.origin_y = j.at("origin").at(1).get<double>();
    j.at("pixel_pitch").get_to(c.pixel_pitch);
    j.at("height_px").get_to(c.height_px);
    j.at("width_px").get_to(c.width_px);
    j.at("rotation_bins").get_to(c.rotation_bins);
    if (c.pixel_pitch <= 0.0 || c.height_px <= 0 || c.width_px <= 0 || c.rotation_bins <= 0) {
        throw std::invalid_argument("tasks.from_json: invalid calibration");
    }
}

inline void to_json(nlohmann::json& j, const PoseSE2& p) { j = {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

inline void from_json(const nlohmann::json& j, PoseSE2& p) {
    p = PoseSE2(j.at("x").get<double>(), j.at("y").get<double>(), j.at("theta").get<double>());
}

inline void to_json(nlohmann::json& j, const PickPlaceAction& a) { j = {{"pick", a.pick}, {"place", a.place}}; }

inline void from_json(const nlohmann::json& j, PickPlaceAction& a) {
    j.at("pick").get_to(a.pick);
    j.at("place").get_to(a.place);
}

inline const char* footprint_kind_name(FootprintKind k) {
    switch (k) {
        case FootprintKind::square: return "square";
        case FootprintKind::rect: return "rect";
        default: return "circle";
    }
}

inline FootprintKind footprint_kind_from_name(const std::string& s) {
    if (s == "square") return FootprintKind::square;
    if (s == "rect") return FootprintKind::rect;
    if (s == "circle") return FootprintKind::circle;
    throw std::invalid_argument("tasks.from_json: unknown footprint kind '" + s + "'");
}

inline void to_json(nlohmann::json& j, const BlockSpec& b) {
    j = {{"footprint", {{"kind", footprint_kind_name(b.footprint.kind)}, {"a", b.footprint.a}, {"b", b.footprint.b}}},
         {"thickness", b.thickness},
         {"color", {b.color.r, b.color.g, b.color.b}}};
}

inline void from_json(const nlohmann::json& j, BlockSpec& b) {
    b.footprint.kind = footprint_kind_from_name(j.at("footprint").at("kind").get<std::string>());
    j.at("footprint").at("a").get_to(b.footprint.a);
    j.at("footprint").at("b").get_to(b.footprint.b);
    j.at("thickness").get_to(b.thickness);
    b.color = {j.at("color").at(0).get<double>(), j.at("color").at(1).get<double>(), j.at("color").at(2).get<double>()};
}

inline void to_json(nlohmann::json& j, const TaskSpec& t) {
    nlohmann::json goals = nlohmann::json::array();
    for (const GoalPose& g : t.goal_poses) {
        goals.push_back({{"pose", g.pose}, {"z", g.z}});
    }
    j = {{"name", t.name},
         {"blocks", t.blocks},
         {"goal_poses", goals},
         {"spawn_region", {t.spawn_region.min_x, t.spawn_region.min_y, t.spawn_region.max_x, t.spawn_region.max_y}},
         {"seed", t.seed},
         {"calib", t.calib},
         {"max_height", t.max_height},
         {"mask_side", t.mask_side}};
}

inline void from_json(const nlohmann::json& j, TaskSpec& t) {
    j.at("name").get_to(t.name);
    t.blocks = j.at("blocks").get<std::vector<BlockSpec>>();
    t.goal_poses.clear();
    for (const auto& g : j.at("goal_poses")) {
        GoalPose gp;
        g.at("pose").get_to(gp.pose);
        g.at("z").get_to(gp.z);
        t.goal_poses.push_back(gp);
    }
    const auto& r = j.at("spawn_region");
    t.spawn_region = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()};
    t.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("calib")) j.at("calib").get_to(t.calib);
    t.max_height = j.value("max_height", 0.25);
    t.mask_side = j.value("mask_side", 65);
    if (t.blocks.size() != t.goal_poses.size()) {
        throw std::invalid_argument("tasks.from_json: |goal_poses| != |blocks| in " + t.name);
    }
}

}  // namespace tvf
