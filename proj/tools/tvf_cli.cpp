// Command-line entry point: rollouts, benchmarks, demo recording, foresight
// evaluation, equivariance sweeps, and q-map visualization.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvf/harness.hpp"

namespace fs = std::filesystem;

namespace {

void dump_rollout_images(const tvf::TaskSpec& task, std::uint64_t seed, const tvf::RolloutRun& run,
                         const fs::path& dir) {
    fs::create_directories(dir);
    auto [world, goal] = tvf::load_task(task, seed);
    tvf::write_observation_png(tvf::render(goal), (dir / "goal_rgb.png").string(), (dir / "goal_height.png").string());
    tvf::WorldState cur = world;
    char name[64];
    int i = 0;
    for (const tvf::StepTrace& t : run.result.trace) {
        std::snprintf(name, sizeof(name), "obs_%03d", i++);
        tvf::write_observation_png(tvf::render(cur), (dir / (std::string(name) + "_rgb.png")).string(),
                                   (dir / (std::string(name) + "_height.png")).string());
        cur = tvf::apply_action(cur, t.action);
    }
    tvf::write_observation_png(tvf::render(cur), (dir / "final_rgb.png").string(),
                               (dir / "final_height.png").string());
}

int cmd_rollout(const std::string& task_name, const std::string& method, const std::string& foresight,
                std::uint64_t seed, int dmax, int k, const std::string& out, bool dump_images) {
    const tvf::TaskSpec task = tvf::resolve_task(task_name);
    tvf::MethodOverrides overrides;
    if (dmax > 0) overrides.d_max = dmax;
    if (k > 0) overrides.k = k;
    const std::string effective_method = (dmax > 0 || k > 0) && tvf::is_planner_method(method) ? "custom" : method;
    if (effective_method == "custom" && method != "custom" && tvf::is_planner_method(method)) {
        // --dmax/--k refine a preset: start from it
        tvf::PlannerConfig base = tvf::make_planner_config(method, task);
        if (!overrides.k) overrides.k = base.proposal.k;
        if (!overrides.d_max) overrides.d_max = base.d_max;
    }
    const tvf::RolloutRun run = tvf::run_rollout(task, seed, effective_method, foresight, overrides);

    const fs::path out_dir(out);
    fs::create_directories(out_dir);
    tvf::write_lines(out_dir / "rollout.jsonl", run.log_lines);
    if (dump_images) {
        dump_rollout_images(task, seed, run, out_dir / "images");
    }
    std::printf("%s seed %llu: %s, progress %.1f%%, %d steps (logs: %s)\n", task.name.c_str(),
                static_cast<unsigned long long>(seed), run.result.success ? "success" : "failure",
                100.0 * run.result.progress, run.result.steps, (out_dir / "rollout.jsonl").string().c_str());
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out) {
    std::ifstream f(config_path);
    if (!f) {
        throw std::runtime_error("bench: cannot open config " + config_path);
    }
    nlohmann::json j;
    f >> j;
    const tvf::BenchmarkConfig cfg = j.get<tvf::BenchmarkConfig>();
    const tvf::BenchmarkReport report = tvf::run_benchmark(cfg, out);
    std::printf("%s", report.to_markdown().c_str());
    std::printf("report: %s\n", (fs::path(out) / "report.json").string().c_str());
    return 0;
}

int cmd_demos(const std::string& task_name, int count, std::uint64_t seed, int n_random, const std::string& out) {
    const tvf::TaskSpec task = tvf::resolve_task(task_name);
    char name[64];
    for (int i = 0; i < count; ++i) {
        const std::uint64_t ep_seed = seed + static_cast<std::uint64_t>(i);
        const tvf::Episode ep = tvf::record_demo(task, ep_seed, n_random);
        std::snprintf(name, sizeof(name), "ep_%04d", i);
        tvf::write_episode(ep, task, ep_seed, n_random, fs::path(out) / name);
    }
    std::printf("recorded %d episodes of %s under %s\n", count, task.name.c_str(), out.c_str());
    return 0;
}

int cmd_foresight_eval(const std::string& demos_dir, const std::string& out) {
    const auto rows = tvf::evaluate_foresight_demos(demos_dir);
    const std::string table = tvf::foresight_eval_markdown(rows);
    std::printf("%s", table.c_str());
    if (!out.empty()) {
        fs::create_directories(out);
        std::ofstream md(fs::path(out) / "foresight_eval.md");
        md << table;
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) {
            j.push_back({{"task", r.task},
                         {"transitions", r.transitions},
                         {"skipped_overlapping", r.skipped_overlapping},
                         {"color_l1", r.color_l1},
                         {"height_l1", r.height_l1},
                         {"frac_within_002", r.frac_within_002}});
        }
        std::ofstream js(fs::path(out) / "foresight_eval.json");
        js << j.dump(2) << '\n';
    }
    return 0;
}

int cmd_equivariance(int samples, std::uint64_t seed, const std::string& out) {
    const tvf::WorkspaceCalib calib;
    const std::string csv = tvf::equivariance_csv(samples, seed, calib, 65);
    if (out.empty()) {
        std::printf("%s", csv.c_str());
    } else {
        std::ofstream f(out);
        f << csv;
        std::printf("wrote %d residuals to %s\n", samples, out.c_str());
    }
    return 0;
}

int cmd_viz_qmaps(const std::string& task_name, std::uint64_t seed, const std::string& out) {
    const tvf::TaskSpec task = tvf::resolve_task(task_name);
    tvf::write_qmap_overlays(task, seed, out);
    std::printf("q-map overlays for %s (seed %llu) under %s\n", task.name.c_str(),
                static_cast<unsigned long long>(seed), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabletop rearrangement planner: tree search over visual foresight"};
    app.require_subcommand(1);

    // rollout
    std::string task = "tower", method = "tvf-small", foresight = "geometric", out = "out";
    std::uint64_t seed = 1;
    int dmax = 0, k = 0;
    bool dump_images = true;
    auto* rollout = app.add_subcommand("rollout", "run a single planning episode");
    rollout->add_option("--task", task, "task name or TaskSpec JSON path");
    rollout->add_option("--method", method, "tvf-small | tvf-large | greedy | oracle | custom");
    rollout->add_option("--foresight", foresight, "geometric | oracle");
    rollout->add_option("--seed", seed, "spawn seed");
    rollout->add_option("--dmax", dmax, "tree depth override");
    rollout->add_option("--k", k, "cluster count override");
    rollout->add_option("--out", out, "output directory");
    rollout->add_flag("--dump-images,!--no-dump-images", dump_images, "write per-step PNG dumps (default on)");

    // bench
    std::string bench_config, bench_out = "bench_out";
    auto* bench = app.add_subcommand("bench", "run a benchmark from a JSON config");
    bench->add_option("--config", bench_config, "benchmark config JSON")->required();
    bench->add_option("--out", bench_out, "output directory");

    // demos
    std::string demo_task = "tower", demo_out = "demos";
    int demo_count = 10, n_random = 2;
    std::uint64_t demo_seed = 1;
    auto* demos = app.add_subcommand("demos", "record expert demonstration episodes");
    demos->add_option("--task", demo_task, "task name or TaskSpec JSON path");
    demos->add_option("--count", demo_count, "number of episodes");
    demos->add_option("--seed", demo_seed, "base seed (episode i uses seed+i)");
    demos->add_option("--n-random", n_random, "random actions per episode before the oracle");
    demos->add_option("--out", demo_out, "output directory");

    // foresight-eval
    std::string eval_demos, eval_out;
    auto* feval = app.add_subcommand("foresight-eval", "geometric foresight L1 vs recorded ground truth");
    feval->add_option("--demos", eval_demos, "directory of recorded episodes")->required();
    feval->add_option("--out", eval_out, "optional output directory for md/json");

    // equivariance
    int eq_samples = 100;
    std::uint64_t eq_seed = 1;
    std::string eq_out;
    auto* equi = app.add_subcommand("equivariance", "residual sweep over random transforms");
    equi->add_option("--samples", eq_samples, "number of cases");
    equi->add_option("--seed", eq_seed, "base seed");
    equi->add_option("--out", eq_out, "CSV path (stdout if omitted)");

    // viz-qmaps
    std::string viz_task = "tower", viz_out = "qmaps";
    std::uint64_t viz_seed = 1;
    auto* viz = app.add_subcommand("viz-qmaps", "false-color pick/place value overlays");
    viz->add_option("--task", viz_task, "task name or TaskSpec JSON path");
    viz->add_option("--seed", viz_seed, "spawn seed");
    viz->add_option("--out", viz_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rollout->parsed()) return cmd_rollout(task, method, foresight, seed, dmax, k, out, dump_images);
        if (bench->parsed()) return cmd_bench(bench_config, bench_out);
        if (demos->parsed()) return cmd_demos(demo_task, demo_count, demo_seed, n_random, demo_out);
        if (feval->parsed()) return cmd_foresight_eval(eval_demos, eval_out);
        if (equi->parsed()) return cmd_equivariance(eq_samples, eq_seed, eq_out);
        if (viz->parsed()) return cmd_viz_qmaps(viz_task, viz_seed, viz_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
