#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvf/foresight.hpp"
#include "tvf/image_io.hpp"
#include "tvf/planner.hpp"
#include "tvf/proposal.hpp"
#include "tvf/simulator.hpp"
#include "tvf/tasks.hpp"

namespace tvf {

inline constexpr const char* kRolloutSchema = "tvf.rollout.v1";
inline constexpr const char* kEpisodeSchema = "tvf.episode.v1";
inline constexpr const char* kReportSchema = "tvf.report.v1";

// --- method / foresight selection -------------------------------------------

struct MethodOverrides {
    std::optional<int> k;
    std::optional<int> d_max;
    std::vector<int> schedule;
};

inline const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names = {"tvf-small", "tvf-large", "greedy", "oracle", "custom"};
    return names;
}

inline bool is_planner_method(const std::string& method) { return method != "oracle"; }

inline PlannerConfig make_planner_config(const std::string& method, const TaskSpec& task,
                                         const MethodOverrides& overrides = {}) {
    PlannerConfig cfg;
    if (method == "tvf-small") {
        cfg = PlannerConfig::tvf_small();
    } else if (method == "tvf-large") {
        cfg = PlannerConfig::tvf_large();
    } else if (method == "greedy") {
        cfg = PlannerConfig::greedy();
    } else if (method == "custom") {
        cfg = PlannerConfig::tvf_small();
    } else {
        throw std::invalid_argument("harness.config: unknown method '" + method + "'");
    }
    cfg.calib = task.calib;
    cfg.height_scale = task.max_height;
    if (overrides.k) cfg.proposal.k = *overrides.k;
    if (overrides.d_max) cfg.d_max = *overrides.d_max;
    if (!overrides.schedule.empty()) {
        cfg.schedule = overrides.schedule;
        cfg.d_max = static_cast<int>(overrides.schedule.size());
    }
    cfg.proposal.top_n = std::max(cfg.proposal.top_n, cfg.proposal.k);
    cfg.validate();
    return cfg;
}

inline std::unique_ptr<ForesightPredictor> make_foresight(const std::string& kind, const TaskSpec& task) {
    if (kind == "geometric") {
        return std::make_unique<GeometricForesight>(task.calib, task.mask_side);
    }
    if (kind == "oracle") {
        return std::make_unique<OracleForesight>();
    }
    throw std::invalid_argument("harness.config: unknown foresight '" + kind + "'");
}

// Task lookup: a shipped task name, or a path to a TaskSpec JSON file.
inline TaskSpec resolve_task(const std::string& name_or_path) {
    if (name_or_path.size() > 5 && name_or_path.substr(name_or_path.size() - 5) == ".json") {
        std::ifstream f(name_or_path);
        if (!f) {
            throw std::invalid_argument("harness.config: cannot open task file " + name_or_path);
        }
        nlohmann::json j;
        f >> j;
        return j.get<TaskSpec>();
    }
    return make_task(name_or_path);
}

// --- single rollout ----------------------------------------------------------

struct RolloutRun {
    RolloutResult result;
    std::vector<std::string> log_lines;  // JSONL, timing-free and reproducible
    double plan_seconds = 0.0;
    int plan_calls = 0;
};

inline nlohmann::json thresholds_json() {
    return {{"translation_m", kTranslationTolerance},
            {"z_m", kZTolerance},
            {"rotation_deg", kRotationTolerance * 180.0 / kPi}};
}

inline nlohmann::json planner_config_json(const PlannerConfig& cfg) {
    return {{"d_max", cfg.d_max},
            {"c", cfg.c},
            {"gamma", cfg.gamma},
            {"alpha", cfg.proposal.alpha},
            {"top_n", cfg.proposal.top_n},
            {"k", cfg.proposal.k},
            {"kmeans_iters", cfg.proposal.kmeans_iters},
            {"schedule", cfg.schedule},
            {"height_scale", cfg.height_scale},
            {"weights", {cfg.weights.r, cfg.weights.g, cfg.weights.b, cfg.weights.height}}};
}

// Scripted-expert rollout (method = "oracle").
inline RolloutRun run_oracle_rollout(const TaskSpec& task, std::uint64_t seed) {
    auto [world, goal] = load_task(task, seed);
    RolloutRun run;
    nlohmann::json header = {{"schema", kRolloutSchema}, {"task", task.name},   {"seed", seed},
                             {"method", "oracle"},       {"foresight", "none"}, {"thresholds", thresholds_json()}};
    run.log_lines.push_back(header.dump());
    const int max_steps = static_cast<int>(task.blocks.size());
    WorldState cur = world;
    int steps = 0;
    for (; steps < max_steps && !check_success(cur, goal); ++steps) {
        const auto t0 = std::chrono::steady_clock::now();
        const PickPlaceAction a = oracle_policy(cur, goal);
        run.plan_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ++run.plan_calls;
        nlohmann::json step = {{"type", "step"}, {"step", steps}, {"action", a}};
        run.log_lines.push_back(step.dump());
        StepTrace trace;
        trace.action = a;
        run.result.trace.push_back(trace);
        cur = apply_action(cur, a);
    }
    run.result.success = check_success(cur, goal);
    run.result.progress = rate_of_progress(cur, goal);
    run.result.steps = steps;
    run.result.final_world = cur;
    nlohmann::json footer = {{"type", "result"},
                             {"success", run.result.success},
                             {"progress", run.result.progress},
                             {"steps", run.result.steps},
                             {"planning_failed", false}};
    run.log_lines.push_back(footer.dump());
    return run;
}

// Planner rollout for the tvf-small / tvf-large / greedy / custom methods.
inline RolloutRun run_planner_rollout(const TaskSpec& task, std::uint64_t seed, const std::string& method,
                                      const std::string& foresight, const MethodOverrides& overrides = {}) {
    const PlannerConfig cfg = make_planner_config(method, task, overrides);
    auto fmodel = make_foresight(foresight, task);
    const HeuristicScorer scorer(task.calib, task.mask_side, task.max_height);
    auto [world, goal] = load_task(task, seed);

    RolloutRun run;
    nlohmann::json header = {{"schema", kRolloutSchema},   {"task", task.name},
                             {"seed", seed},               {"method", method},
                             {"foresight", foresight},     {"config", planner_config_json(cfg)},
                             {"thresholds", thresholds_json()}};
    run.log_lines.push_back(header.dump());

    const auto t0 = std::chrono::steady_clock::now();
    run.result = run_policy(world, goal, *fmodel, scorer, cfg);
    run.plan_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.plan_calls = run.result.steps;

    for (std::size_t i = 0; i < run.result.trace.size(); ++i) {
        const StepTrace& t = run.result.trace[i];
        nlohmann::json proposal = {{"pick", {t.root_proposal.pick.u, t.root_proposal.pick.v}},
                                   {"places", nlohmann::json::array()},
                                   {"values", t.root_proposal.values}};
        for (const PixelPose& p : t.root_proposal.places) {
            proposal["places"].push_back({p.u, p.v, p.rot_bin});
        }
        nlohmann::json step = {{"type", "step"},           {"step", i},
                               {"action", t.action},       {"chosen_node", t.chosen_node},
                               {"chosen_value", t.chosen_value}, {"node_count", t.node_count},
                               {"node_values", t.node_values},   {"proposal", proposal}};
        run.log_lines.push_back(step.dump());
    }
    nlohmann::json footer = {{"type", "result"},
                             {"success", run.result.success},
                             {"progress", run.result.progress},
                             {"steps", run.result.steps},
                             {"planning_failed", run.result.planning_failed}};
    run.log_lines.push_back(footer.dump());
    return run;
}

inline RolloutRun run_rollout(const TaskSpec& task, std::uint64_t seed, const std::string& method,
                              const std::string& foresight, const MethodOverrides& overrides = {}) {
    return is_planner_method(method) ? run_planner_rollout(task, seed, method, foresight, overrides)
                                     : run_oracle_rollout(task, seed);
}

inline void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    std::ofstream f(path, std::ios::binary);  // binary: byte-identical across platforms
    if (!f) {
        throw std::runtime_error("harness.write_lines: cannot open " + path.string());
    }
    for (const std::string& line : lines) {
        f << line << '\n';
    }
}

// --- benchmark ---------------------------------------------------------------

struct BenchmarkConfig {
    std::vector<std::string> tasks;
    int rollouts_per_task = 1;
    std::vector<std::uint64_t> seeds;  // empty: 1..rollouts_per_task
    std::string method = "tvf-small";
    std::string foresight = "geometric";
    MethodOverrides overrides;
    bool dump_images = false;  // off by default: I/O dominates benchmark runs

    void validate() const {
        if (tasks.empty()) {
            throw std::invalid_argument("harness.config: no tasks given");
        }
        for (const std::string& t : tasks) {
            resolve_task(t);
        }
        if (rollouts_per_task < 1) {
            throw std::invalid_argument("harness.config: rollouts_per_task must be >= 1");
        }
        if (!seeds.empty() && static_cast<int>(seeds.size()) < rollouts_per_task) {
            throw std::invalid_argument("harness.config: fewer seeds than rollouts_per_task");
        }
        if (std::find(method_names().begin(), method_names().end(), method) == method_names().end()) {
            throw std::invalid_argument("harness.config: unknown method '" + method + "'");
        }
        if (is_planner_method(method) && foresight != "geometric" && foresight != "oracle") {
            throw std::invalid_argument("harness.config: unknown foresight '" + foresight + "'");
        }
    }

    std::vector<std::uint64_t> rollout_seeds() const {
        if (!seeds.empty()) {
            return {seeds.begin(), seeds.begin() + rollouts_per_task};
        }
        std::vector<std::uint64_t> out;
        for (int i = 1; i <= rollouts_per_task; ++i) {
            out.push_back(static_cast<std::uint64_t>(i));
        }
        return out;
    }
};

inline void from_json(const nlohmann::json& j, MethodOverrides& o) {
    if (j.contains("k")) o.k = j.at("k").get<int>();
    if (j.contains("dmax")) o.d_max = j.at("dmax").get<int>();
    if (j.contains("schedule")) o.schedule = j.at("schedule").get<std::vector<int>>();
}

inline void from_json(const nlohmann::json& j, BenchmarkConfig& c) {
    c.tasks = j.at("tasks").get<std::vector<std::string>>();
    c.rollouts_per_task = j.value("rollouts_per_task", 1);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.method = j.value("method", "tvf-small");
    c.foresight = j.value("foresight", "geometric");
    j.get_to(c.overrides);
    c.dump_images = j.value("dump_images", false);
}

inline void to_json(nlohmann::json& j, const BenchmarkConfig& c) {
    j = {{"tasks", c.tasks},
         {"rollouts_per_task", c.rollouts_per_task},
         {"seeds", c.seeds},
         {"method", c.method},
         {"foresight", c.foresight},
         {"dump_images", c.dump_images}};
    if (c.overrides.k) j["k"] = *c.overrides.k;
    if (c.overrides.d_max) j["dmax"] = *c.overrides.d_max;
    if (!c.overrides.schedule.empty()) j["schedule"] = c.overrides.schedule;
}

struct TaskRates {
    std::string task;
    int rollouts = 0;
    double success_rate = 0.0;      // percent
    double rate_of_progress = 0.0;  // percent, mean over rollouts
};

struct BenchmarkReport {
    nlohmann::json config_echo;
    std::vector<TaskRates> per_task;
    double average_success_rate = 0.0;
    double average_progress = 0.0;
    double seconds_per_planning_step = 0.0;  // informational; not in logs
    double total_seconds = 0.0;

    nlohmann::json results_json() const {
        nlohmann::json per = nlohmann::json::array();
        for (const TaskRates& t : per_task) {
            per.push_back({{"task", t.task},
                           {"rollouts", t.rollouts},
                           {"success_rate", t.success_rate},
                           {"rate_of_progress", t.rate_of_progress}});
        }
        return {{"per_task", per},
                {"average", {{"success_rate", average_success_rate}, {"rate_of_progress", average_progress}}}};
    }

    nlohmann::json to_json() const {
        return {{"schema", kReportSchema},
                {"config", config_echo},
                {"thresholds", thresholds_json()},
                {"results", results_json()},
                {"timing",
                 {{"seconds_per_planning_step", seconds_per_planning_step}, {"total_seconds", total_seconds}}}};
    }

    // success rate (%) / rate of progress (%) per task, paper-table style
    std::string to_markdown() const {
        std::ostringstream out;
        out << "| Task | Rollouts | Success rate (%) / Rate of progress (%) |\n";
        out << "|------|----------|------------------------------------------|\n";
        char buf[64];
        for (const TaskRates& t : per_task) {
            std::snprintf(buf, sizeof(buf), "%.1f / %.1f", t.success_rate, t.rate_of_progress);
            out << "| " << t.task << " | " << t.rollouts << " | " << buf << " |\n";
        }
        std::snprintf(buf, sizeof(buf), "%.1f / %.1f", average_success_rate, average_progress);
        out << "| **average** | | " << buf << " |\n";
        return out.str();
    }
};

// Runs rollouts_per_task x |tasks| rollouts, writes one JSONL log per rollout
// under out_dir/logs/<task>/seed_<seed>.jsonl plus report.json / report.md.
inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    const auto bench_t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out_dir / "logs");

    BenchmarkReport report;
    report.config_echo = cfg;
    double plan_seconds = 0.0;
    long plan_calls = 0;
    double success_sum = 0.0;
    double progress_sum = 0.0;

    for (const std::string& task_name : cfg.tasks) {
        const TaskSpec task = resolve_task(task_name);
        std::filesystem::create_directories(out_dir / "logs" / task.name);
        TaskRates rates;
        rates.task = task.name;
        for (std::uint64_t seed : cfg.rollout_seeds()) {
            const RolloutRun run = run_rollout(task, seed, cfg.method, cfg.foresight, cfg.overrides);
            write_lines(out_dir / "logs" / task.name / ("seed_" + std::to_string(seed) + ".jsonl"), run.log_lines);
            ++rates.rollouts;
            rates.success_rate += run.result.success ? 1.0 : 0.0;
            rates.rate_of_progress += run.result.progress;
            plan_seconds += run.plan_seconds;
            plan_calls += run.plan_calls;
        }
        rates.success_rate *= 100.0 / rates.rollouts;
        rates.rate_of_progress *= 100.0 / rates.rollouts;
        success_sum += rates.success_rate;
        progress_sum += rates.rate_of_progress;
        report.per_task.push_back(rates);
    }
    report.average_success_rate = success_sum / report.per_task.size();
    report.average_progress = progress_sum / report.per_task.size();
    report.seconds_per_planning_step = plan_calls > 0 ? plan_seconds / plan_calls : 0.0;
    report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - bench_t0).count();

    std::ofstream rj(out_dir / "report.json");
    rj << report.to_json().dump(2) << '\n';
    std::ofstream rm(out_dir / "report.md");
    rm << report.to_markdown();
    return report;
}

// Recompute the rates section from raw rollout logs alone; must reproduce the
// report's numbers exactly.
inline std::vector<TaskRates> recompute_rates(const std::filesystem::path& logs_dir) {
    std::map<std::string, std::vector<std::pair<bool, double>>> by_task;
    std::vector<std::string> task_order;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(logs_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::ifstream f(path);
        std::string line;
        std::string task;
        while (std::getline(f, line)) {
            const nlohmann::json j = nlohmann::json::parse(line);
            if (j.contains("schema")) {
                task = j.at("task").get<std::string>();
                if (by_task.find(task) == by_task.end()) {
                    task_order.push_back(task);
                }
            } else if (j.value("type", "") == "result") {
                by_task[task].emplace_back(j.at("success").get<bool>(), j.at("progress").get<double>());
            }
        }
    }
    std::vector<TaskRates> out;
    for (const std::string& task : task_order) {
        const auto& rs = by_task[task];
        TaskRates r;
        r.task = task;
        r.rollouts = static_cast<int>(rs.size());
        for (const auto& [success, progress] : rs) {
            r.success_rate += success ? 1.0 : 0.0;
            r.rate_of_progress += progress;
        }
        r.success_rate *= 100.0 / r.rollouts;
        r.rate_of_progress *= 100.0 / r.rollouts;
        out.push_back(r);
    }
    return out;
}

// --- demo recording / foresight evaluation -----------------------------------

// One directory per episode: episode.jsonl plus rgb/height PNG pairs per step.
inline std::filesystem::path write_episode(const Episode& ep, const TaskSpec& task, std::uint64_t seed, int n_random,
                                           const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> lines;
    nlohmann::json header = {{"schema", kEpisodeSchema},
                             {"task", ep.task},
                             {"seed", seed},
                             {"n_random", n_random},
                             {"steps", ep.steps.size()},
                             {"max_height", task.max_height},
                             {"mask_side", task.mask_side},
                             {"calib", task.calib}};
    lines.push_back(header.dump());
    char name[64];
    for (std::size_t i = 0; i < ep.steps.size(); ++i) {
        std::snprintf(name, sizeof(name), "obs_%03zu", i);
        const std::string base(name);
        write_observation_png(ep.steps[i].obs, (dir / (base + "_rgb.png")).string(),
                              (dir / (base + "_height.png")).string());
        nlohmann::json step = {{"type", "step"},
                               {"index", i},
                               {"action", ep.steps[i].action},
                               {"rgb", base + "_rgb.png"},
                               {"height", base + "_height.png"}};
        lines.push_back(step.dump());
    }
    write_observation_png(ep.final_observation, (dir / "final_rgb.png").string(), (dir / "final_height.png").string());
    nlohmann::json footer = {{"type", "final"}, {"rgb", "final_rgb.png"}, {"height", "final_height.png"}};
    lines.push_back(footer.dump());
    write_lines(dir / "episode.jsonl", lines);
    return dir / "episode.jsonl";
}

struct ForesightEvalRow {
    std::string task;
    int transitions = 0;          // disjoint-square transitions evaluated
    int skipped_overlapping = 0;  // source/destination squares overlap
    double color_l1 = 0.0;        // mean over evaluated transitions
    double height_l1 = 0.0;       // heights normalized by the task max height
    double frac_within_002 = 0.0; // unit-weight L1 <= 0.02
};

// Replay recorded episodes through the geometric predictor and compare with
// the recorded ground-truth next observations.
inline std::vector<ForesightEvalRow> evaluate_foresight_demos(const std::filesystem::path& demos_dir) {
    std::vector<std::filesystem::path> episodes;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(demos_dir)) {
        if (entry.is_regular_file() && entry.path().filename() == "episode.jsonl") {
            episodes.push_back(entry.path());
        }
    }
    std::sort(episodes.begin(), episodes.end());
    if (episodes.empty()) {
        throw std::runtime_error("harness.foresight_eval: no episode.jsonl under " + demos_dir.string());
    }

    struct Acc {
        int n = 0, skipped = 0, within = 0;
        double color = 0.0, height = 0.0;
    };
    std::map<std::string, Acc> by_task;
    std::vector<std::string> task_order;

    for (const auto& path : episodes) {
        std::ifstream f(path);
        std::string line;
        std::getline(f, line);
        const nlohmann::json header = nlohmann::json::parse(line);
        const std::string task = header.at("task").get<std::string>();
        const double max_height = header.at("max_height").get<double>();
        const int mask_side = header.at("mask_side").get<int>();
        const WorkspaceCalib calib = header.at("calib").get<WorkspaceCalib>();
        const GeometricForesight model(calib, mask_side);
        if (by_task.find(task) == by_task.end()) {
            task_order.push_back(task);
        }
        Acc& acc = by_task[task];

        const auto dir = path.parent_path();
        struct Step {
            Observation obs;
            PickPlaceAction action;
        };
        std::vector<Step> steps;
        Observation final_obs;
        while (std::getline(f, line)) {
            const nlohmann::json j = nlohmann::json::parse(line);
            if (j.value("type", "") == "step") {
                Step s;
                s.obs = read_observation_png((dir / j.at("rgb").get<std::string>()).string(),
                                             (dir / j.at("height").get<std::string>()).string());
                j.at("action").get_to(s.action);
                steps.push_back(std::move(s));
            } else if (j.value("type", "") == "final") {
                final_obs = read_observation_png((dir / j.at("rgb").get<std::string>()).string(),
                                                 (dir / j.at("height").get<std::string>()).string());
            }
        }
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const Observation& truth = i + 1 < steps.size() ? steps[i + 1].obs : final_obs;
            if (!action_squares_disjoint(calib, steps[i].action, mask_side)) {
                ++acc.skipped;
                continue;
            }
            const Observation predicted = model.predict(steps[i].obs, steps[i].action);
            double color = 0.0, height = 0.0;
            const std::size_t n_px = static_cast<std::size_t>(truth.rows()) * truth.cols();
            for (int u = 0; u < truth.rows(); ++u) {
                for (int v = 0; v < truth.cols(); ++v) {
                    for (int c = 0; c < 3; ++c) {
                        color += std::fabs(predicted.at(u, v, c) - truth.at(u, v, c));
                    }
                    height += std::fabs(predicted.height(u, v) - truth.height(u, v)) / max_height;
                }
            }
            color /= 3.0 * n_px;
            height /= static_cast<double>(n_px);
            acc.color += color;
            acc.height += height;
            const double unit_l1 = (3.0 * color + height) / 4.0;
            if (unit_l1 <= 0.02) ++acc.within;
            ++acc.n;
        }
    }

    std::vector<ForesightEvalRow> rows;
    for (const std::string& task : task_order) {
        const Acc& a = by_task[task];
        ForesightEvalRow r;
        r.task = task;
        r.transitions = a.n;
        r.skipped_overlapping = a.skipped;
        if (a.n > 0) {
            r.color_l1 = a.color / a.n;
            r.height_l1 = a.height / a.n;
            r.frac_within_002 = static_cast<double>(a.within) / a.n;
        }
        rows.push_back(r);
    }
    return rows;
}

inline std::string foresight_eval_markdown(const std::vector<ForesightEvalRow>& rows) {
    std::ostringstream out;
    out << "| Task | Transitions | Color L1 | Height L1 | within 0.02 |\n";
    out << "|------|-------------|----------|-----------|-------------|\n";
    char buf[96];
    double color = 0.0, height = 0.0;
    int n = 0;
    for (const ForesightEvalRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "| %s | %d | %.4f | %.4f | %.1f%% |", r.task.c_str(), r.transitions,
                      r.color_l1, r.height_l1, 100.0 * r.frac_within_002);
        out << buf << '\n';
        color += r.color_l1 * r.transitions;
        height += r.height_l1 * r.transitions;
        n += r.transitions;
    }
    if (n > 0) {
        std::snprintf(buf, sizeof(buf), "| **all** | %d | %.4f | %.4f | |", n, color / n, height / n);
        out << buf << '\n';
    }
    return out.str();
}

// --- equivariance sweep --------------------------------------------------------

// CSV of residuals over randomized cases; half integer translations, half
// whole-bin rotations.
inline std::string equivariance_csv(int samples, std::uint64_t seed, const WorkspaceCalib& calib, int mask_side) {
    const GeometricForesight model(calib, mask_side);
    std::ostringstream out;
    out << "seed,kind,theta,tx,ty,residual\n";
    char buf[160];
    for (int i = 0; i < samples; ++i) {
        const bool translation = i % 2 == 0;
        const std::uint64_t case_seed = seed + static_cast<std::uint64_t>(i);
        const EquivarianceCase c = make_equivariance_case(case_seed, calib, mask_side, translation);
        const double residual = equivariance_residual(model, c.obs, c.action, c.g, calib);
        std::snprintf(buf, sizeof(buf), "%llu,%s,%.10g,%.10g,%.10g,%.12g",
                      static_cast<unsigned long long>(case_seed), translation ? "translation" : "rotation",
                      c.g.theta, c.g.x, c.g.y, residual);
        out << buf << '\n';
    }
    return out.str();
}

// --- q-map visualization ---------------------------------------------------------

// Blue -> red heat ramp composited over the scene.
inline Observation qmap_overlay(const Observation& scene, const std::vector<double>& values, int rows, int cols) {
    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, v);
    Observation out = scene;
    for (int u = 0; u < rows; ++u) {
        for (int v = 0; v < cols; ++v) {
            const double q = vmax > 0.0 ? values[static_cast<std::size_t>(u) * cols + v] / vmax : 0.0;
            if (q <= 0.0) continue;
            const double heat_r = std::clamp(2.0 * q, 0.0, 1.0);
            const double heat_b = std::clamp(2.0 * (1.0 - q), 0.0, 1.0);
            out.at(u, v, 0) = 0.4 * out.at(u, v, 0) + 0.6 * heat_r;
            out.at(u, v, 1) = 0.4 * out.at(u, v, 1);
            out.at(u, v, 2) = 0.4 * out.at(u, v, 2) + 0.6 * heat_b;
        }
    }
    return out;
}

inline void write_qmap_overlays(const TaskSpec& task, std::uint64_t seed, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto [world, goal] = load_task(task, seed);
    const Observation o = render(world);
    const Observation og = render(goal);
    const HeuristicScorer scorer(task.calib, task.mask_side, task.max_height);
    const ActionValueMaps maps = scorer.score(o, og);

    write_observation_png(o, (out_dir / "scene_rgb.png").string(), (out_dir / "scene_height.png").string());
    write_observation_png(og, (out_dir / "goal_rgb.png").string(), (out_dir / "goal_height.png").string());
    write_file((out_dir / "qpick.png").string(), encode_rgb8(qmap_overlay(o, maps.q_pick, maps.rows, maps.cols)));

    std::vector<double> q_place_max(static_cast<std::size_t>(maps.rows) * maps.cols, 0.0);
    for (int u = 0; u < maps.rows; ++u) {
        for (int v = 0; v < maps.cols; ++v) {
            double best = 0.0;
            for (int r = 0; r < maps.bins; ++r) best = std::max(best, maps.place_at(u, v, r));
            q_place_max[static_cast<std::size_t>(u) * maps.cols + v] = best;
        }
    }
    write_file((out_dir / "qplace.png").string(), encode_rgb8(qmap_overlay(og, q_place_max, maps.rows, maps.cols)));
}

}  // namespace tvf
