// lvs: command-line harness for the servoing simulator and benchmarks.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lvs/bench/experiments.hpp"
#include "lvs/bench/plot.hpp"
#include "lvs/nn/qnetwork.hpp"
#include "lvs/simd/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lvs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAssert = 2;
constexpr int kExitRuntime = 3;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::optional<int> jobs;
};

bench::ExperimentConfig load_config(const Globals& g) {
    bench::ExperimentConfig cfg;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw bench::ConfigError("cannot read config " + g.config_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw bench::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        cfg = bench::config_from_json(j);
    }
    if (g.seed) {
        cfg.suite_seed = *g.seed;
        cfg.train_seed = *g.seed;
    }
    if (g.jobs) cfg.jobs = *g.jobs;
    cfg.validate();
    return cfg;
}

std::string out_path(const Globals& g, const std::string& name) { return (fs::path(g.out) / name).string(); }

void prepare_out(const Globals& g) {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec || !fs::is_directory(g.out)) throw bench::ConfigError("cannot create output directory " + g.out);
}

void write_json(const std::string& path, const json& j) { bench::write_text_file(path, j.dump(2) + "\n"); }

json run_meta(const std::string& command, const bench::ExperimentConfig& cfg) {
    json config = bench::config_to_json(cfg);
    config.erase("jobs");
    return {{"command", command}, {"config", config}};
}

nn::QNetwork load_net(const std::optional<std::string>& path) {
    if (!path) throw bench::ConfigError("a checkpoint is required (--checkpoint or config key 'checkpoint')");
    if (!fs::is_regular_file(*path)) throw bench::ConfigError("checkpoint not found: " + *path);
    return nn::load_checkpoint(*path);
}

json checks_json(const std::vector<bench::OrderingCheck>& checks) {
    json a = json::array();
    for (const auto& c : checks) a.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return a;
}

int report_checks(const std::vector<bench::OrderingCheck>& checks, bool enforce) {
    bool ok = true;
    for (const auto& c : checks) {
        std::fprintf(stderr, "[%s] %s: %s\n", c.passed ? "ok" : "FAILED", c.name.c_str(), c.detail.c_str());
        ok = ok && c.passed;
    }
    return enforce && !ok ? kExitAssert : kExitOk;
}

void print_table(const bench::ResultTable& t) {
    std::fprintf(stderr, "%s\n", t.name.c_str());
    for (const auto& r : t.rows) {
        std::fprintf(stderr, "  %-32s %4d/%-4d  %.3f  steps %.1f  d_polar %.3f%s\n", r.label.c_str(), r.successes,
                     r.episodes, r.success_rate(), r.mean_steps, r.mean_final_d_polar, r.flagged ? "  [flagged]" : "");
    }
}

bench::TrajectoryPlot trajectory_plot(const std::string& title, const Scene& scene, const Pose2D& start,
                                      const Pose2D& goal) {
    bench::TrajectoryPlot p;
    p.title = title;
    p.start = start;
    p.goal = goal;
    p.walls = scene.walls;
    return p;
}

bench::SweepPlot sweep_plot(const bench::ResultTable& t, const std::string& title, const std::string& x_label,
                            const std::vector<double>& xs) {
    bench::SweepPlot p;
    p.title = title;
    p.x_label = x_label;
    p.y_label = "success rate";
    bench::SweepSeries s;
    s.label = "LVS";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        s.x.push_back(xs.at(i));
        s.y.push_back(t.rows[i].success_rate());
    }
    p.series.push_back(std::move(s));
    return p;
}

// ------------------------------------------------------------- subcommands

struct SimulateOpts {
    int episode = 0;
    std::string controller = "ibvs";
    std::string depth = "gt";
    std::optional<std::string> checkpoint;
};

int cmd_simulate(const Globals& g, const SimulateOpts& o) {
    bench::ExperimentConfig cfg = load_config(g);
    if (o.checkpoint) cfg.checkpoint = o.checkpoint;
    const nn::World world = bench::make_world(cfg);
    const auto suite = bench::make_suite(cfg, world);
    if (o.episode < 0 || o.episode >= static_cast<int>(suite.size())) {
        throw bench::ConfigError("--episode out of range [0, " + std::to_string(suite.size()) + ")");
    }
    prepare_out(g);
    const auto& c = suite[static_cast<std::size_t>(o.episode)];
    const Scene& scene = *world.scenes[c.scene_index];
    auto plot = trajectory_plot("episode " + std::to_string(o.episode), scene, c.spec.start, c.spec.goal);
    json meta = run_meta("simulate", cfg);
    meta["episode"] = {{"index", o.episode},
                       {"scene_index", c.scene_index},
                       {"start", {c.spec.start.x, c.spec.start.y, c.spec.start.theta}},
                       {"goal", {c.spec.goal.x, c.spec.goal.y, c.spec.goal.theta}}};
    meta["controller"] = o.controller;
    bench::TrajectorySeries series;
    if (o.controller == "ibvs") {
        IbvsConfig ic = cfg.ibvs;
        if (o.depth == "gt") ic.depth = DepthPolicy::ground_truth();
        else if (o.depth == "const") ic.depth = DepthPolicy::constant(cfg.const_depth);
        else if (o.depth == "noisy") ic.depth = DepthPolicy::noisy(cfg.noisy_depth_sigma, cfg.suite_seed);
        else if (o.depth == "none") ic.depth = DepthPolicy::none();
        else throw bench::ConfigError("--depth must be gt, const, noisy or none");
        const IbvsResult r = ibvs_episode(scene, c.spec.start, c.spec.goal, world.cam, ic);
        bench::write_text_file(out_path(g, "trajectory.csv"), trajectory_csv(r.rows));
        for (const auto& row : r.rows) series.poses.push_back(row.pose);
        series.label = "IBVS (" + o.depth + ")";
        meta["depth"] = o.depth;
        meta["outcome"] = std::string(to_string(r.outcome));
        meta["steps"] = r.steps;
        meta["final_d_polar"] = d_polar(r.final_pose, c.spec.goal);
    } else if (o.controller == "lvs") {
        nn::QNetwork net = load_net(cfg.checkpoint);
        Env env(world.scenes[c.scene_index], world.cam, c.spec);
        std::string log;
        series.poses.push_back(env.pose());
        while (!env.terminal()) {
            const int a = nn::act_greedy(net, *env.observation());
            const Transition t = env.step(a);
            log += episode_log_line(env.steps(), env.last_info(), a, t.reward) + "\n";
            series.poses.push_back(env.pose());
        }
        bench::write_text_file(out_path(g, "episode.jsonl"), log);
        series.label = "LVS";
        meta["outcome"] = env.success() ? "Success" : "MaxSteps";
        meta["steps"] = env.steps();
        meta["final_d_polar"] = env.last_info().d_polar;
    } else {
        throw bench::ConfigError("--controller must be ibvs or lvs");
    }
    plot.series.push_back(std::move(series));
    bench::emit_plot(plot, out_path(g, "trajectory.svg"));
    write_json(out_path(g, "run.json"), meta);
    std::fprintf(stderr, "outcome %s after %d steps\n", meta["outcome"].get<std::string>().c_str(),
                 meta["steps"].get<int>());
    return kExitOk;
}

struct TrainOpts {
    std::optional<int> iterations;
    std::string checkpoint_name = "qnet.bin";
    bool quiet = false;
};

int cmd_train(const Globals& g, const TrainOpts& o) {
    bench::ExperimentConfig cfg = load_config(g);
    if (o.iterations) {
        cfg.train.iterations = *o.iterations;
        cfg.validate();
    }
    prepare_out(g);
    const nn::World world = bench::make_world(cfg);
    nn::TrainConfig tc = cfg.train;
    tc.max_steps = cfg.lvs_max_steps;
    tc.smoothing_kernel = cfg.smoothing_kernel;
    nn::TrainResult tr = nn::train(world, tc, cfg.train_seed, [&](const nn::CurvePoint& p) {
        if (!o.quiet) {
            std::fprintf(stderr, "iteration %6d  loss %.6f  eval success %.3f\n", p.iteration, p.loss,
                         p.eval_success_rate);
        }
    });
    json meta = run_meta("train", cfg);
    meta["iterations_run"] = tr.iterations_run;
    meta["diverged"] = tr.diverged;
    bench::write_text_file(out_path(g, "learning_curve.csv"), nn::learning_curve_csv(tr.curve));
    if (!tr.curve.empty()) {
        bench::SweepPlot p;
        p.title = "learning curve";
        p.x_label = "iteration";
        p.y_label = "evaluation success rate";
        bench::SweepSeries s;
        s.label = "greedy policy";
        for (const auto& c : tr.curve) {
            s.x.push_back(c.iteration);
            s.y.push_back(c.eval_success_rate);
        }
        p.series.push_back(std::move(s));
        bench::emit_plot(p, out_path(g, "learning_curve.svg"));
    }
    if (tr.diverged) {
        write_json(out_path(g, "run.json"), meta);
        std::fprintf(stderr, "training diverged at iteration %d\n", tr.iterations_run);
        return kExitRuntime;
    }
    nn::save_checkpoint(tr.net, out_path(g, o.checkpoint_name));
    // Held-out evaluation on the configured suite, against the uniform-random baseline.
    const auto suite = bench::make_suite(cfg, world);
    bench::ResultTable t;
    t.name = "train_eval";
    t.rows.push_back(bench::make_row(bench::kRowLvs, nn::evaluate(world, suite, nn::greedy_policy(tr.net))));
    t.rows.push_back(bench::make_row("Random", nn::evaluate(world, suite, nn::random_policy(), {}, {}, cfg.suite_seed)));
    bench::write_text_file(out_path(g, "eval.csv"), t.csv());
    meta["evaluation"] = t.to_json();
    meta["checkpoint"] = o.checkpoint_name;
    write_json(out_path(g, "run.json"), meta);
    print_table(t);
    return kExitOk;
}

struct EvalOpts {
    std::optional<std::string> checkpoint;
    bool no_smoothing = false;
    bool random_baseline = true;
};

int cmd_eval(const Globals& g, const EvalOpts& o) {
    bench::ExperimentConfig cfg = load_config(g);
    if (o.checkpoint) cfg.checkpoint = o.checkpoint;
    nn::QNetwork net = load_net(cfg.checkpoint);
    prepare_out(g);
    const nn::World world = bench::make_world(cfg);
    const auto suite = bench::make_suite(cfg, world);
    bench::ResultTable t;
    t.name = "eval";
    nn::ObservationOverride raw;
    raw.smoothing_kernel = 1;
    const nn::EvalResult smoothed = nn::evaluate(world, suite, nn::greedy_policy(net));
    t.rows.push_back(bench::make_row("LVS(smoothed)", smoothed));
    if (o.no_smoothing) {
        t.rows.push_back(bench::make_row("LVS(raw)", nn::evaluate(world, suite, nn::greedy_policy(net), {}, raw)));
    }
    if (o.random_baseline) {
        t.rows.push_back(bench::make_row("Random", nn::evaluate(world, suite, nn::random_policy(), {}, {}, cfg.suite_seed)));
    }
    std::string per_episode = "episode,scene_index,success,steps,final_d_polar,min_d_polar\n";
    char buf[160];
    for (std::size_t i = 0; i < smoothed.outcomes.size(); ++i) {
        const auto& e = smoothed.outcomes[i];
        std::snprintf(buf, sizeof buf, "%zu,%zu,%d,%d,%.6f,%.6f\n", i, suite[i].scene_index, e.success ? 1 : 0, e.steps,
                      e.final_d_polar, e.min_d_polar);
        per_episode += buf;
    }
    bench::write_text_file(out_path(g, "eval.csv"), t.csv());
    bench::write_text_file(out_path(g, "episodes.csv"), per_episode);
    json meta = run_meta("eval", cfg);
    meta["results"] = t.to_json();
    write_json(out_path(g, "run.json"), meta);
    print_table(t);
    return kExitOk;
}

int cmd_ablate_ibvs(const Globals& g, std::optional<std::string> checkpoint, bool assert_orderings) {
    bench::ExperimentConfig cfg = load_config(g);
    if (checkpoint) cfg.checkpoint = checkpoint;
    std::optional<nn::QNetwork> net;
    if (cfg.checkpoint) net = load_net(cfg.checkpoint);
    prepare_out(g);
    const bench::ResultTable t = bench::run_ibvs_ablation(cfg, net ? &*net : nullptr);
    const auto checks = bench::check_ibvs_orderings(t);
    bench::write_text_file(out_path(g, "ibvs_ablation.csv"), t.csv());
    json meta = run_meta("ablate-ibvs", cfg);
    meta["results"] = t.to_json();
    meta["checks"] = checks_json(checks);
    write_json(out_path(g, "run.json"), meta);
    print_table(t);
    return report_checks(checks, assert_orderings);
}

int cmd_ablate_reward(const Globals& g, bool assert_orderings) {
    bench::ExperimentConfig cfg = load_config(g);
    prepare_out(g);
    const bench::RewardAblation r = bench::run_reward_ablation(cfg);
    const auto checks = bench::check_reward_orderings(r.table);
    bench::write_text_file(out_path(g, "reward_ablation.csv"), r.table.csv());
    bench::SweepPlot p;
    p.title = "reward ablation learning curves";
    p.x_label = "iteration";
    p.y_label = "evaluation success rate";
    for (std::size_t i = 0; i < r.curves.size(); ++i) {
        bench::SweepSeries s;
        s.label = r.table.rows[i].label;
        for (const auto& c : r.curves[i]) {
            s.x.push_back(c.iteration);
            s.y.push_back(c.eval_success_rate);
        }
        bench::write_text_file(out_path(g, "learning_curve_" + std::to_string(i) + ".csv"),
                               nn::learning_curve_csv(r.curves[i]));
        p.series.push_back(std::move(s));
    }
    bool any_points = false;
    for (const auto& s : p.series) any_points = any_points || !s.x.empty();
    if (any_points) bench::emit_plot(p, out_path(g, "reward_ablation.svg"));
    json meta = run_meta("ablate-reward", cfg);
    meta["results"] = r.table.to_json();
    meta["checks"] = checks_json(checks);
    write_json(out_path(g, "run.json"), meta);
    print_table(r.table);
    return report_checks(checks, assert_orderings);
}

int cmd_sweep_noise(const Globals& g, std::optional<std::string> checkpoint, bool assert_orderings) {
    bench::ExperimentConfig cfg = load_config(g);
    if (checkpoint) cfg.checkpoint = checkpoint;
    nn::QNetwork net = load_net(cfg.checkpoint);
    prepare_out(g);
    const bench::NoiseSweep s = bench::run_noise_sweep(cfg, net);
    const auto checks = bench::check_noise_trends(s);
    bench::write_text_file(out_path(g, "noise_sigma.csv"), s.sigma.csv());
    bench::write_text_file(out_path(g, "noise_coverage.csv"), s.coverage.csv());
    bench::emit_plot(sweep_plot(s.sigma, "success vs offset noise", "sigma (px)", cfg.sweep_sigmas),
                     out_path(g, "noise_sigma.svg"));
    bench::emit_plot(sweep_plot(s.coverage, "success vs coverage", "coverage", cfg.sweep_coverages),
                     out_path(g, "noise_coverage.svg"));
    json meta = run_meta("sweep-noise", cfg);
    meta["results"] = {s.sigma.to_json(), s.coverage.to_json()};
    meta["checks"] = checks_json(checks);
    write_json(out_path(g, "run.json"), meta);
    print_table(s.sigma);
    print_table(s.coverage);
    return report_checks(checks, assert_orderings);
}

int cmd_hardcase(const Globals& g, std::optional<std::string> checkpoint, bool assert_orderings) {
    bench::ExperimentConfig cfg = load_config(g);
    if (checkpoint) cfg.checkpoint = checkpoint;
    nn::QNetwork net = load_net(cfg.checkpoint);
    prepare_out(g);
    const bench::HardCase h = bench::run_hardcase(cfg, net);
    const auto checks = bench::check_hardcase(h);
    bench::write_text_file(out_path(g, "hardcase_ibvs.csv"), trajectory_csv(h.ibvs.rows));
    bench::write_text_file(out_path(g, "hardcase_lvs.csv"), bench::lvs_trace_csv(h.lvs));
    auto plot = trajectory_plot("overlap-loss case", *h.scene, h.start, h.goal);
    bench::TrajectorySeries si{"IBVS (" + std::string(to_string(h.ibvs.outcome)) + ")", {}};
    for (const auto& r : h.ibvs.rows) si.poses.push_back(r.pose);
    bench::TrajectorySeries sl{h.lvs_success ? "LVS (Success)" : "LVS (MaxSteps)", {}};
    for (const auto& r : h.lvs) sl.poses.push_back(r.pose);
    plot.series = {si, sl};
    bench::emit_plot(plot, out_path(g, "hardcase.svg"));
    json meta = run_meta("hardcase", cfg);
    meta["start"] = {h.start.x, h.start.y, h.start.theta};
    meta["goal"] = {h.goal.x, h.goal.y, h.goal.theta};
    meta["ibvs"] = {{"outcome", std::string(to_string(h.ibvs.outcome))},
                    {"steps", h.ibvs.steps},
                    {"final_d_polar", h.ibvs_final_d_polar}};
    meta["lvs"] = {{"success", h.lvs_success},
                   {"steps", static_cast<int>(h.lvs.size()) - 1},
                   {"first_overlap_loss_step", h.lvs_first_loss_step},
                   {"steps_after_loss", h.lvs_steps_after_loss},
                   {"final_d_polar", h.lvs_final_d_polar}};
    meta["checks"] = checks_json(checks);
    write_json(out_path(g, "run.json"), meta);
    return report_checks(checks, assert_orderings);
}

// Reads a CSV produced by this tool and renders it: trajectories (x,y,theta columns) or
// result tables (label,success_rate columns).
int cmd_plot(const Globals& g, const std::string& input, std::string output) {
    std::ifstream in(input);
    if (!in) throw bench::ConfigError("cannot read " + input);
    std::string header_line;
    std::getline(in, header_line);
    std::vector<std::string> header;
    {
        std::stringstream ss(header_line);
        std::string col;
        while (std::getline(ss, col, ',')) header.push_back(col);
    }
    auto col_index = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    if (output.empty()) output = (fs::path(g.out) / fs::path(input).stem()).string() + ".svg";
    if (const auto parent = fs::path(output).parent_path(); !parent.empty()) fs::create_directories(parent);
    const int ix = col_index("x"), iy = col_index("y"), it = col_index("theta");
    const int il = col_index("label"), is = col_index("success_rate");
    try {
        if (ix >= 0 && iy >= 0 && it >= 0) {
            bench::TrajectoryPlot p;
            p.title = fs::path(input).filename().string();
            bench::TrajectorySeries s{"trajectory", {}};
            for (const auto& r : rows) {
                s.poses.push_back({std::stod(r.at(ix)), std::stod(r.at(iy)), std::stod(r.at(it))});
            }
            if (!s.poses.empty()) p.start = s.poses.front();
            p.series.push_back(std::move(s));
            bench::emit_plot(p, output);
        } else if (il >= 0 && is >= 0) {
            bench::SweepPlot p;
            p.title = fs::path(input).filename().string();
            p.x_label = "row";
            p.y_label = "success rate";
            bench::SweepSeries s{"success rate", {}, {}};
            for (std::size_t i = 0; i < rows.size(); ++i) {
                s.x.push_back(static_cast<double>(i));
                s.y.push_back(std::stod(rows[i].at(is)));
            }
            p.series.push_back(std::move(s));
            bench::emit_plot(p, output);
        } else {
            throw bench::ConfigError("unrecognised CSV layout in " + input);
        }
    } catch (const std::invalid_argument&) {
        throw bench::ConfigError("non-numeric cell in " + input);
    } catch (const std::out_of_range&) {
        throw bench::ConfigError("short row in " + input);
    }
    std::fprintf(stderr, "wrote %s\n", output.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planar visual-servoing simulator and benchmarks"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master seed (episode suite and training)");
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads for episode pools")->check(CLI::PositiveNumber);
    std::string isa;
    app.add_option("--isa", isa, "kernel selection: auto, scalar or avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    SimulateOpts sim;
    auto* s_sim = app.add_subcommand("simulate", "run one episode and write its trajectory");
    s_sim->add_option("--episode", sim.episode, "index into the episode suite");
    s_sim->add_option("--controller", sim.controller, "ibvs or lvs")->capture_default_str();
    s_sim->add_option("--depth", sim.depth, "IBVS depth: gt, const, noisy or none")->capture_default_str();
    s_sim->add_option("--checkpoint", sim.checkpoint, "network checkpoint for --controller lvs");

    TrainOpts tr;
    auto* s_train = app.add_subcommand("train", "train the Q-network and evaluate it");
    s_train->add_option("--iterations", tr.iterations, "override train.iterations");
    s_train->add_flag("--quiet", tr.quiet, "suppress progress lines");

    EvalOpts ev;
    auto* s_eval = app.add_subcommand("eval", "evaluate a checkpoint on the episode suite");
    s_eval->add_option("--checkpoint", ev.checkpoint, "network checkpoint");
    s_eval->add_flag("--no-smoothing", ev.no_smoothing, "also evaluate on unsmoothed correspondence maps");

    std::optional<std::string> ckpt;
    bool assert_orderings = false;
    auto* s_ibvs = app.add_subcommand("ablate-ibvs", "IBVS depth and feature variants on a paired suite");
    s_ibvs->add_option("--checkpoint", ckpt, "add an LVS row from this checkpoint");
    s_ibvs->add_flag("--assert-orderings", assert_orderings, "exit 2 unless the expected orderings hold");

    auto* s_reward = app.add_subcommand("ablate-reward", "train and compare reward structures");
    s_reward->add_flag("--assert-orderings", assert_orderings, "exit 2 unless the expected orderings hold");

    auto* s_noise = app.add_subcommand("sweep-noise", "success under offset noise and coverage loss");
    s_noise->add_option("--checkpoint", ckpt, "network checkpoint");
    s_noise->add_flag("--assert-orderings", assert_orderings, "exit 2 unless degradation stays within 0.15");

    auto* s_hard = app.add_subcommand("hardcase", "overlap-loss scenario for IBVS and LVS");
    s_hard->add_option("--checkpoint", ckpt, "network checkpoint");
    s_hard->add_flag("--assert-orderings", assert_orderings, "exit 2 unless the expected outcomes hold");

    std::string plot_in, plot_out;
    auto* s_plot = app.add_subcommand("plot", "render a trajectory or result CSV as SVG");
    s_plot->add_option("input", plot_in, "CSV written by another subcommand")->required();
    s_plot->add_option("-o,--output", plot_out, "SVG path (default: <out>/<input stem>.svg)");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (isa == "scalar") simd::set_active_isa(simd::Isa::Scalar);
        else if (isa == "avx2") simd::set_active_isa(simd::Isa::Avx2);
        if (*s_sim) return cmd_simulate(g, sim);
        if (*s_train) return cmd_train(g, tr);
        if (*s_eval) return cmd_eval(g, ev);
        if (*s_ibvs) return cmd_ablate_ibvs(g, ckpt, assert_orderings);
        if (*s_reward) return cmd_ablate_reward(g, assert_orderings);
        if (*s_noise) return cmd_sweep_noise(g, ckpt, assert_orderings);
        if (*s_hard) return cmd_hardcase(g, ckpt, assert_orderings);
        if (*s_plot) return cmd_plot(g, plot_in, plot_out);
    } catch (const bench::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitConfig;
}
