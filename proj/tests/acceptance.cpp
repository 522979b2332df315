// Acceptance suite: one check per shipped guarantee, one PASS/FAIL line each.
// Exit code equals the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tvf/harness.hpp"
#include "tvf/planner.hpp"
#include "tvf/tasks.hpp"

using namespace tvf;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    bool pass = true;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. scripted oracle finishes every shipped task in exactly one action per
// block, 20 seeds each, inside the runtime budget
Criterion oracle_completeness() {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion out;
    int ok = 0, total = 0;
    for (const std::string& name : task_names()) {
        const TaskSpec spec = make_task(name);
        const int n_blocks = static_cast<int>(spec.blocks.size());
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            ++total;
            auto [world, goal] = load_task(spec, seed);
            int steps = 0;
            bool good = true;
            try {
                while (!check_success(world, goal) && steps <= n_blocks) {
                    world = apply_action(world, oracle_policy(world, goal));
                    ++steps;
                }
            } catch (const std::exception&) {
                good = false;
            }
            if (good && steps == n_blocks && check_success(world, goal)) {
                ++ok;
            } else {
                out.pass = false;
            }
        }
    }
    const double dt = seconds_since(t0);
    if (dt >= 120.0) out.pass = false;
    out.pass = out.pass && ok == total;
    std::ostringstream d;
    d << ok << "/" << total << " rollouts in exactly #blocks steps, " << std::fixed << dt << " s (budget 120 s)";
    out.detail = d.str();
    return out;
}

// 2. geometric foresight within 0.02 unit-weight L1 of ground truth on >= 95%
// of disjoint-square expert transitions, 10 demos per task
Criterion foresight_fidelity() {
    Criterion out;
    int within = 0, evaluated = 0, skipped = 0;
    double worst = 0.0;
    for (const std::string& name : task_names()) {
        const TaskSpec spec = make_task(name);
        const GeometricForesight model(spec.calib, spec.mask_side);
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const Episode ep = record_demo(spec, seed, 2);
            for (std::size_t i = 0; i < ep.steps.size(); ++i) {
                const Observation& truth = i + 1 < ep.steps.size() ? ep.steps[i + 1].obs : ep.final_observation;
                if (!action_squares_disjoint(spec.calib, ep.steps[i].action, spec.mask_side)) {
                    ++skipped;
                    continue;
                }
                const Observation predicted = model.predict(ep.steps[i].obs, ep.steps[i].action);
                const double err = l1_distance(normalize_height(predicted, spec.max_height),
                                               normalize_height(truth, spec.max_height));
                ++evaluated;
                worst = std::max(worst, err);
                if (err <= 0.02) ++within;
            }
        }
    }
    const double frac = evaluated > 0 ? static_cast<double>(within) / evaluated : 0.0;
    out.pass = evaluated > 0 && frac >= 0.95;
    std::ostringstream d;
    d << within << "/" << evaluated << " disjoint transitions within 0.02 (" << std::fixed << 100.0 * frac
      << "%, worst " << worst << "; " << skipped << " overlapping skipped)";
    out.detail = d.str();
    return out;
}

// 3. equivariance residuals: exactly zero for integer translations, bounded
// for whole-bin rotations, 100 randomized cases
Criterion equivariance() {
    Criterion out;
    const WorkspaceCalib calib;
    const GeometricForesight model(calib, 65);
    int exact = 0, translations = 0, rotations = 0;
    double worst_rotation = 0.0;
    for (int i = 0; i < 100; ++i) {
        const bool translation = i % 2 == 0;
        const EquivarianceCase c = make_equivariance_case(9000 + i, calib, 65, translation);
        const double r = equivariance_residual(model, c.obs, c.action, c.g, calib);
        if (translation) {
            ++translations;
            if (r == 0.0) ++exact;
        } else {
            ++rotations;
            worst_rotation = std::max(worst_rotation, r);
        }
    }
    out.pass = exact == translations && worst_rotation <= 0.05;
    std::ostringstream d;
    d << exact << "/" << translations << " translations exactly zero; max rotation residual " << std::scientific
      << worst_rotation << " (bound 5e-2) over " << rotations << " cases";
    out.detail = d.str();
    return out;
}

// 4. proposal invariants on 1000 synthetic Q-map cases
Criterion proposal_invariants() {
    Criterion out;
    Rng rng(1234);
    ProposalConfig cfg;
    cfg.k = 3;
    int checked = 0, degenerate = 0;
    for (int trial = 0; trial < 1000 && out.pass; ++trial) {
        const int rows = 12 + static_cast<int>(rng.uniform_int(12));
        const int cols = 12 + static_cast<int>(rng.uniform_int(12));
        const int bins = 2 + static_cast<int>(rng.uniform_int(6));
        const double density = rng.uniform(0.001, 0.08);
        ActionValueMaps maps(rows, cols, bins);
        for (double& q : maps.q_place) {
            q = rng.uniform() < density ? rng.uniform() : 0.0;
        }
        double q_max = 0.0;
        for (double q : maps.q_place) q_max = std::max(q_max, q);
        if (q_max <= 0.0) {
            ++degenerate;
            try {
                propose_from_maps(maps, cfg);
                out.pass = false;
            } catch (const empty_proposal_error&) {
            }
            continue;
        }
        const ProposalResult r = propose_from_maps(maps, cfg);
        ++checked;

        int s_size = 0;
        for (int u = 0; u < rows; ++u) {
            for (int v = 0; v < cols; ++v) {
                double best = 0.0;
                for (int b = 0; b < bins; ++b) best = std::max(best, maps.place_at(u, v, b));
                if (best > cfg.alpha * q_max) ++s_size;
            }
        }
        if (static_cast<int>(r.places.size()) != std::min(cfg.k, std::min(s_size, cfg.top_n))) out.pass = false;
        for (double v : r.values) {
            if (!(v > cfg.alpha * q_max)) out.pass = false;
        }
        // global argmax triple must appear
        int bu = 0, bv = 0, br = 0;
        double best = -1.0;
        for (int u = 0; u < rows; ++u) {
            for (int v = 0; v < cols; ++v) {
                for (int b = 0; b < bins; ++b) {
                    if (maps.place_at(u, v, b) > best) {
                        best = maps.place_at(u, v, b);
                        bu = u;
                        bv = v;
                        br = b;
                    }
                }
            }
        }
        bool found = false;
        for (const PixelPose& p : r.places) {
            if (p.u == bu && p.v == bv && p.rot_bin == br) found = true;
        }
        if (!found) out.pass = false;
        // deterministic across repeated runs
        const ProposalResult r2 = propose_from_maps(maps, cfg);
        if (r2.places.size() != r.places.size()) out.pass = false;
        for (std::size_t i = 0; i < r.places.size() && out.pass; ++i) {
            if (!(r2.places[i] == r.places[i]) || r2.values[i] != r.values[i]) out.pass = false;
        }
    }
    std::ostringstream d;
    d << checked << " live cases + " << degenerate << " degenerate cases, all invariants held";
    out.detail = d.str();
    return out;
}

// 5. node-count law and the greedy reduction
Criterion tree_laws() {
    Criterion out;
    const WorkspaceCalib calib;

    // fixed-mode scorer: K synthetic placement peaks, observation-independent
    class FixedModes : public Scorer {
    public:
        FixedModes(const WorkspaceCalib& c, int modes) : calib_(c), modes_(modes) {}
        ActionValueMaps score(const Observation&, const Observation&) const override {
            ActionValueMaps maps(calib_.height_px, calib_.width_px, calib_.rotation_bins);
            maps.pick_at(80, 80) = 1.0;
            for (int m = 0; m < modes_; ++m) {
                maps.place_at(40, 30 + 18 * m, m % calib_.rotation_bins) = 1.0 - 0.05 * m;
            }
            return maps;
        }

    private:
        WorkspaceCalib calib_;
        int modes_;
    };
    class Frozen : public ForesightPredictor {
    public:
        Observation predict(const Observation& o, const PickPlaceAction&) const override { return o; }
    };

    const Observation o(calib.height_px, calib.width_px);
    const Frozen f;
    const int shapes[3][3] = {{2, 1, 2}, {3, 3, 39}, {2, 3, 14}};
    std::ostringstream d;
    for (const auto& s : shapes) {
        PlannerConfig cfg;
        cfg.calib = calib;
        cfg.proposal.k = s[0];
        cfg.d_max = s[1];
        const FixedModes scorer(calib, s[0]);
        const int n = static_cast<int>(tree_search(o, o, f, scorer, cfg).size());
        if (n != s[2]) out.pass = false;
        d << "(K=" << s[0] << ",d=" << s[1] << ")->" << n << " ";
    }

    // K=1, d=1 equals the greedy single-modal policy
    int compared = 0;
    for (const char* task_name : {"row", "tower"}) {
        const TaskSpec spec = make_task(task_name);
        const HeuristicScorer scorer(spec.calib, spec.mask_side, spec.max_height);
        for (std::uint64_t seed : {3ull, 7ull}) {
            auto [world, goal] = load_task(spec, seed);
            const Observation o_g = render(goal);
            PlannerConfig cfg = PlannerConfig::greedy();
            cfg.calib = spec.calib;
            cfg.height_scale = spec.max_height;
            GeometricForesight fg(spec.calib, spec.mask_side);
            const RolloutResult planned = run_policy(world, goal, fg, scorer, cfg);

            WorldState cur = world;
            std::vector<PickPlaceAction> greedy;
            for (int step = 0; step < static_cast<int>(spec.blocks.size()); ++step) {
                if (check_success(cur, goal)) break;
                const ActionValueMaps maps = scorer.score(render(cur), o_g);
                int bu = 0, bv = 0, br = 0;
                double best = -1.0;
                for (int u = 0; u < maps.rows; ++u) {
                    for (int v = 0; v < maps.cols; ++v) {
                        for (int r = 0; r < maps.bins; ++r) {
                            if (maps.place_at(u, v, r) > best) {
                                best = maps.place_at(u, v, r);
                                bu = u;
                                bv = v;
                                br = r;
                            }
                        }
                    }
                }
                if (best <= 0.0) break;
                PickPlaceAction a;
                const PoseSE2 pw = pixel_to_world(spec.calib, select_pick(maps));
                a.pick = PoseSE2(pw.x, pw.y, 0.0);
                a.place = pixel_to_world(spec.calib, {bu, bv, br});
                greedy.push_back(a);
                cur = apply_action(cur, a);
            }
            if (planned.trace.size() != greedy.size()) {
                out.pass = false;
                continue;
            }
            for (std::size_t i = 0; i < greedy.size(); ++i) {
                const PickPlaceAction& pa = planned.trace[i].action;
                if (pa.pick.x != greedy[i].pick.x || pa.pick.y != greedy[i].pick.y ||
                    pa.place.x != greedy[i].place.x || pa.place.y != greedy[i].place.y ||
                    pa.place.theta != greedy[i].place.theta) {
                    out.pass = false;
                }
            }
            ++compared;
        }
    }
    d << "; greedy reduction matched on " << compared << " rollouts";
    out.detail = d.str();
    return out;
}

// 6. discounted value arithmetic and shallow-node preference
Criterion value_arithmetic() {
    Criterion out;
    PlannerConfig cfg;
    cfg.height_scale = 0.25;
    Observation goal(8, 8);
    goal.height(3, 3) = 0.12;

    const SearchNode d3{goal, 3, {}};
    const double v = node_value(d3, goal, cfg);
    if (std::fabs(v - 0.9801) >= 1e-12) out.pass = false;

    const SearchNode d1{goal, 1, {}};
    if (std::fabs(node_value(d1, goal, cfg) - 1.0) >= 1e-12) out.pass = false;

    Rng rng(555);
    int pairs = 0;
    for (int i = 0; i < 100; ++i) {
        Observation obs(8, 8);
        for (double& x : obs.data()) x = rng.uniform();
        Observation g2(8, 8);
        for (double& x : g2.data()) x = rng.uniform();
        const int depth = 1 + static_cast<int>(rng.uniform_int(5));
        const SearchNode shallow{obs, depth, {}};
        const SearchNode deep{obs, depth + 1, {}};
        if (!(node_value(shallow, g2, cfg) > node_value(deep, g2, cfg))) out.pass = false;
        ++pairs;
    }
    std::ostringstream d;
    d << "gamma^2*(C-0) = " << std::setprecision(17) << v << "; shallow-over-deep held on " << pairs << " pairs";
    out.detail = d.str();
    return out;
}

// 7. end-to-end planning on tower and row, 20 seeds per configuration
Criterion end_to_end() {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion out;
    std::ostringstream d;
    for (const std::string& foresight : {std::string("oracle"), std::string("geometric")}) {
        for (const char* task_name : {"tower", "row"}) {
            const TaskSpec spec = make_task(task_name);
            MethodOverrides overrides;
            overrides.k = 3;
            overrides.d_max = 1;
            int successes = 0;
            double progress = 0.0;
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                const RolloutRun run = run_rollout(spec, seed, "custom", foresight, overrides);
                successes += run.result.success ? 1 : 0;
                progress += run.result.progress;
            }
            const double rate = successes * 5.0;       // percent of 20
            const double mean_progress = progress * 5.0;
            if (foresight == "oracle" && rate < 100.0) out.pass = false;
            if (foresight == "geometric" && (rate < 80.0 || mean_progress < 90.0)) out.pass = false;
            d << foresight << "/" << task_name << " " << rate << "% (" << mean_progress << "% progress) ";
        }
    }
    const double dt = seconds_since(t0);
    if (dt >= 300.0) out.pass = false;
    d << std::fixed << std::setprecision(1) << dt << " s (budget 300 s)";
    out.detail = d.str();
    return out;
}

// 8. success thresholds and rate-of-progress definition at their boundaries
Criterion metric_definitions() {
    Criterion out;
    const TaskSpec row = make_task("row");
    const WorldState goal = goal_world(row);

    if (!check_success(goal, goal)) out.pass = false;

    WorldState off = goal;
    off.blocks[0].pose = PoseSE2(goal.blocks[0].pose.x + 0.012, goal.blocks[0].pose.y, goal.blocks[0].pose.theta);
    if (check_success(off, goal)) out.pass = false;  // 1.2 cm must fail

    WorldState rot = goal;
    rot.blocks[1].pose = PoseSE2(goal.blocks[1].pose.x, goal.blocks[1].pose.y, 14.0 * kPi / 180.0);
    if (!check_success(rot, goal)) out.pass = false;  // 14 degrees passes
    rot.blocks[1].pose = PoseSE2(goal.blocks[1].pose.x, goal.blocks[1].pose.y, 104.0 * kPi / 180.0);
    if (!check_success(rot, goal)) out.pass = false;  // square symmetry folds 104 to 14

    WorldState zoff = goal;
    zoff.blocks[2].z = 0.006;
    if (check_success(zoff, goal)) out.pass = false;  // 0.6 cm z must fail

    const TaskSpec square = make_task("square");
    const WorldState sq_goal = goal_world(square);
    WorldState half = sq_goal;
    half.blocks[0].pose = PoseSE2(0.10, 0.10, 0.0);
    half.blocks[1].pose = PoseSE2(0.10, 0.40, 0.0);
    if (rate_of_progress(half, sq_goal) != 0.5) out.pass = false;

    out.detail = "1.2 cm fails, 14 deg passes, 104 deg passes, 0.6 cm z fails, 2/4 blocks -> 0.5";
    return out;
}

// 9. repeated CLI rollouts with identical flags write byte-identical logs
Criterion cli_determinism(const std::string& cli_path) {
    Criterion out;
    if (cli_path.empty() || !fs::exists(cli_path)) {
        out.pass = false;
        out.detail = "CLI binary not found at '" + cli_path + "'";
        return out;
    }
    const fs::path base = fs::temp_directory_path() / "tvf_acceptance_cli";
    fs::remove_all(base);
    fs::create_directories(base);
    int compared = 0;
    const std::string invocations[2] = {
        " rollout --task tower --method tvf-small --foresight geometric --seed 7 --no-dump-images --out ",
        " rollout --task row --method custom --k 3 --dmax 1 --foresight oracle --seed 3 --no-dump-images --out ",
    };
    for (int i = 0; i < 2 && out.pass; ++i) {
        const fs::path d1 = base / ("run" + std::to_string(i) + "a");
        const fs::path d2 = base / ("run" + std::to_string(i) + "b");
        const std::string quiet = " > /dev/null 2>&1";
        if (std::system((cli_path + invocations[i] + d1.string() + quiet).c_str()) != 0 ||
            std::system((cli_path + invocations[i] + d2.string() + quiet).c_str()) != 0) {
            out.pass = false;
            out.detail = "CLI invocation failed";
            return out;
        }
        std::ifstream f1(d1 / "rollout.jsonl", std::ios::binary);
        std::ifstream f2(d2 / "rollout.jsonl", std::ios::binary);
        const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
        const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
        if (b1.empty() || b1 != b2) {
            out.pass = false;
        }
        ++compared;
    }
    fs::remove_all(base);
    std::ostringstream d;
    d << compared << " invocation pairs byte-identical";
    out.detail = d.str();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli_path;
#ifdef TVF_CLI_PATH
    cli_path = TVF_CLI_PATH;
#endif
    if (argc > 1) cli_path = argv[1];

    struct Entry {
        const char* name;
        std::function<Criterion()> run;
    };
    const std::vector<Entry> criteria = {
        {"oracle completeness (14 tasks x 20 seeds, exact steps, <2 min)", oracle_completeness},
        {"geometric foresight fidelity (<=0.02 L1 on >=95% of disjoint transitions)", foresight_fidelity},
        {"SE(2) equivariance (translations exact, bin rotations <=0.05)", equivariance},
        {"multi-modal proposal invariants (1000 synthetic Q-maps)", proposal_invariants},
        {"tree laws (node counts; K=1,d=1 greedy reduction)", tree_laws},
        {"discounted value arithmetic", value_arithmetic},
        {"end-to-end planning on tower/row (oracle 100%, geometric >=80%/90%, <5 min)", end_to_end},
        {"metric definitions (1 cm / 0.5 cm / 15 deg, progress = placed/total)", metric_definitions},
        {"CLI rollout determinism (byte-identical logs)", [&] { return cli_determinism(cli_path); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Criterion r = criteria[i].run();
        std::printf("[%s] %zu. %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
    }
    std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
