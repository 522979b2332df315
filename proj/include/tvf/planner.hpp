#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvf/foresight.hpp"
#include "tvf/observation.hpp"
#include "tvf/proposal.hpp"
#include "tvf/simulator.hpp"

namespace tvf {

struct SearchNode {
    Observation obs;
    int depth = 0;
    std::vector<PickPlaceAction> trajectory;
};

struct PlannerConfig {
    int d_max = 1;
    double c = 1.0;       // value offset: v = gamma^(d-1) * (c - L1)
    double gamma = 0.99;
    ProposalConfig proposal;
    ChannelWeights weights = ChannelWeights::unit();
    WorkspaceCalib calib;
    double height_scale = 0.25;     // heights normalized by this before L1
    std::vector<int> schedule;      // per-depth cluster counts; empty = proposal.k everywhere

    void validate() const {
        if (d_max < 1) {
            throw std::invalid_argument("planner.config: d_max must be >= 1");
        }
        if (!(gamma > 0.0 && gamma < 1.0)) {
            throw std::invalid_argument("planner.config: gamma must be in (0,1)");
        }
        if (c <= 0.0) {
            throw std::invalid_argument("planner.config: c must be positive");
        }
        if (!schedule.empty() && static_cast<int>(schedule.size()) != d_max) {
            throw std::invalid_argument("planner.config: schedule length must equal d_max");
        }
        for (int k : schedule) {
            if (k < 1) throw std::invalid_argument("planner.config: schedule entries must be >= 1");
        }
        proposal.validate();
    }

    int clusters_at_depth(int depth) const {  // depth of the produced children, 1-based
        return schedule.empty() ? proposal.k : schedule[depth - 1];
    }

    static PlannerConfig tvf_small() {
        PlannerConfig cfg;
        cfg.proposal.k = 2;
        cfg.d_max = 1;
        return cfg;
    }
    static PlannerConfig tvf_large() {
        PlannerConfig cfg;
        cfg.proposal.k = 3;
        cfg.d_max = 3;
        return cfg;
    }
    static PlannerConfig greedy() {
        PlannerConfig cfg;
        cfg.proposal.k = 1;
        cfg.d_max = 1;
        return cfg;
    }
};

class planning_failure_error : public std::runtime_error {
public:
    explicit planning_failure_error(const std::string& what) : std::runtime_error(what) {}
};

// Full breadth-first expansion to d_max. Returns all non-root nodes in
// deterministic order: depth-major, then parent order, then cluster index.
// A node with an empty proposal becomes a leaf. When root_proposal is given
// it receives the root node's proposal for logging.
inline std::vector<SearchNode> tree_search(const Observation& o_t, const Observation& o_g,
                                           const ForesightPredictor& f, const Scorer& scorer,
                                           const PlannerConfig& cfg, ProposalResult* root_proposal = nullptr) {
    cfg.validate();
    // deque: frontier pointers must survive appends
    std::deque<SearchNode> nodes;
    std::vector<const SearchNode*> frontier;
    const SearchNode root{o_t, 0, {}};
    frontier.push_back(&root);

    for (int depth = 1; depth <= cfg.d_max && !frontier.empty(); ++depth) {
        ProposalConfig pcfg = cfg.proposal;
        pcfg.k = cfg.clusters_at_depth(depth);
        const std::size_t level_start = nodes.size();
        for (const SearchNode* parent : frontier) {
            std::optional<ProposalResult> proposal;
            try {
                proposal = multimodal_propose(parent->obs, o_g, scorer, pcfg);
            } catch (const empty_proposal_error&) {
                continue;  // leaf: no admissible placement from this state
            }
            if (depth == 1 && root_proposal != nullptr) {
                *root_proposal = *proposal;
            }
            const PoseSE2 pick_pose = pixel_to_world(cfg.calib, proposal->pick);
            for (const PixelPose& place_px : proposal->places) {
                PickPlaceAction a;
                a.pick = PoseSE2(pick_pose.x, pick_pose.y, 0.0);
                a.place = pixel_to_world(cfg.calib, place_px);
                SearchNode child;
                child.obs = f.predict(parent->obs, a);
                child.depth = depth;
                child.trajectory = parent->trajectory;
                child.trajectory.push_back(a);
                nodes.push_back(std::move(child));
            }
        }
        frontier.clear();
        for (std::size_t i = level_start; i < nodes.size(); ++i) {
            frontier.push_back(&nodes[i]);
        }
    }
    std::vector<SearchNode> out;
    out.reserve(nodes.size());
    for (SearchNode& n : nodes) {
        out.push_back(std::move(n));
    }
    return out;
}

// gamma^(d-1) * (c - L1(obs, goal)) with planner weights over height-normalized
// observations. The root (depth 0) is never valued.
inline double node_value(const SearchNode& n, const Observation& o_g, const PlannerConfig& cfg) {
    if (n.depth < 1) {
        throw std::invalid_argument("planner.node_value: depth must be >= 1");
    }
    const double l1 = l1_distance(normalize_height(n.obs, cfg.height_scale),
                                  normalize_height(o_g, cfg.height_scale), cfg.weights);
    return std::pow(cfg.gamma, n.depth - 1) * (cfg.c - l1);
}

struct Selection {
    int index = -1;
    double value = 0.0;
    std::vector<double> values;  // one per node, in node order
};

// Scan in node order with strict >, starting from 0: shallower nodes win ties
// because the order is depth-major. No positive value means planning failed.
inline Selection select_best(const std::vector<SearchNode>& nodes, const Observation& o_g,
                             const PlannerConfig& cfg) {
    if (nodes.empty()) {
        throw planning_failure_error("planner.tvf_select: empty node list");
    }
    const Observation goal_norm = normalize_height(o_g, cfg.height_scale);
    Selection sel;
    sel.values.reserve(nodes.size());
    double v_max = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double l1 = l1_distance(normalize_height(nodes[i].obs, cfg.height_scale), goal_norm, cfg.weights);
        const double v = std::pow(cfg.gamma, nodes[i].depth - 1) * (cfg.c - l1);
        sel.values.push_back(v);
        if (v > v_max) {
            v_max = v;
            sel.index = static_cast<int>(i);
            sel.value = v;
        }
    }
    if (sel.index < 0) {
        throw planning_failure_error("planner.tvf_select: no node with positive value");
    }
    return sel;
}

inline PickPlaceAction tvf_select(const std::vector<SearchNode>& nodes, const Observation& o_g,
                                  const PlannerConfig& cfg) {
    const Selection sel = select_best(nodes, o_g, cfg);
    return nodes[sel.index].trajectory.front();
}

// --- rollout --------------------------------------------------------------

struct StepTrace {
    PickPlaceAction action;
    int chosen_node = -1;
    double chosen_value = 0.0;
    int node_count = 0;
    std::vector<double> node_values;
    ProposalResult root_proposal;
};

struct RolloutResult {
    bool success = false;
    bool planning_failed = false;
    double progress = 0.0;
    int steps = 0;
    std::vector<StepTrace> trace;
    WorldState final_world;
};

// plan -> act -> replan until success or the step budget runs out
// (max_steps = 0 means one step per block).
inline RolloutResult run_policy(const WorldState& world, const WorldState& goal, ForesightPredictor& f,
                                const Scorer& scorer, const PlannerConfig& cfg, int max_steps = 0) {
    cfg.validate();
    if (max_steps <= 0) {
        max_steps = static_cast<int>(world.blocks.size());
    }
    const Observation o_g = render(goal);
    RolloutResult out;
    WorldState cur = world;
    for (int step = 0; step < max_steps; ++step) {
        if (check_success(cur, goal)) break;
        const Observation o_t = render(cur);
        f.sync_world(cur);
        StepTrace trace;
        try {
            const std::vector<SearchNode> nodes = tree_search(o_t, o_g, f, scorer, cfg, &trace.root_proposal);
            const Selection sel = select_best(nodes, o_g, cfg);
            trace.action = nodes[sel.index].trajectory.front();
            trace.chosen_node = sel.index;
            trace.chosen_value = sel.value;
            trace.node_count = static_cast<int>(nodes.size());
            trace.node_values = sel.values;
        } catch (const planning_failure_error&) {
            out.planning_failed = true;
            break;
        } catch (const empty_proposal_error&) {
            out.planning_failed = true;
            break;
        }
        cur = apply_action(cur, trace.action);
        out.trace.push_back(std::move(trace));
        ++out.steps;
    }
    out.success = check_success(cur, goal);
    out.progress = rate_of_progress(cur, goal);
    out.final_world = cur;
    return out;
}

}  // namespace tvf
