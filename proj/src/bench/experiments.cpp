#include "lvs/bench/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lvs/bench/parallel.hpp"

namespace lvs::bench {

using nlohmann::json;

// ------------------------------------------------------------- tables

const ResultRow& ResultTable::row(const std::string& label) const {
    for (const ResultRow& r : rows) {
        if (r.label == label) return r;
    }
    throw Error("ResultTable: no row labelled " + label);
}

std::string ResultTable::csv() const {
    std::string out = "label,success_rate,successes,episodes,mean_steps,mean_final_d_polar,flagged\n";
    char buf[256];
    for (const ResultRow& r : rows) {
        std::snprintf(buf, sizeof buf, ",%.6f,%d,%d,%.6f,%.6f,%d\n", r.success_rate(), r.successes, r.episodes,
                      r.mean_steps, r.mean_final_d_polar, r.flagged ? 1 : 0);
        out += r.label;
        out += buf;
    }
    return out;
}

json ResultTable::to_json() const {
    json rows_j = json::array();
    for (const ResultRow& r : rows) {
        json j = {{"label", r.label},
                  {"successes", r.successes},
                  {"episodes", r.episodes},
                  {"success_rate", r.success_rate()},
                  {"mean_steps", r.mean_steps},
                  {"mean_final_d_polar", r.mean_final_d_polar},
                  {"flagged", r.flagged}};
        if (!r.note.empty()) j["note"] = r.note;
        rows_j.push_back(std::move(j));
    }
    return {{"name", name}, {"rows", std::move(rows_j)}};
}

ResultRow make_row(std::string label, const nn::EvalResult& r) {
    ResultRow row;
    row.label = std::move(label);
    row.successes = r.successes;
    row.episodes = r.episodes;
    row.mean_steps = r.mean_steps;
    row.mean_final_d_polar = r.mean_final_d_polar;
    return row;
}

ResultRow make_row(std::string label, const std::vector<IbvsResult>& runs, const std::vector<Pose2D>& goals) {
    ResultRow row;
    row.label = std::move(label);
    row.episodes = static_cast<int>(runs.size());
    double steps = 0.0, dp = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        row.successes += runs[i].outcome == ServoOutcome::Success ? 1 : 0;
        steps += runs[i].steps;
        dp += d_polar(runs[i].final_pose, goals.at(i));
    }
    if (!runs.empty()) {
        row.mean_steps = steps / static_cast<double>(runs.size());
        row.mean_final_d_polar = dp / static_cast<double>(runs.size());
    }
    return row;
}

// ------------------------------------------------------------- config

void ExperimentConfig::validate() const {
    if (scene_count < 1) throw ConfigError("scene_count must be >= 1");
    if (clutter < 0) throw ConfigError("clutter must be >= 0");
    if (!(room_width > 1.0) || !(room_depth > 1.0)) throw ConfigError("room dimensions must exceed 1 m");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    if (!(const_depth > 0.0)) throw ConfigError("const_depth must be positive");
    if (!(noisy_depth_sigma >= 0.0)) throw ConfigError("noisy_depth_sigma must be >= 0");
    if (lvs_max_steps < 1 || ibvs.max_steps < 1) throw ConfigError("max steps must be >= 1");
    if (smoothing_kernel < 1 || smoothing_kernel % 2 == 0) throw ConfigError("smoothing_kernel must be odd and >= 1");
    if (ibvs.num_features < 2) throw ConfigError("ibvs.num_features must be >= 2");
    if (!(ibvs.gain > 0.0) || !(ibvs.dt > 0.0)) throw ConfigError("ibvs gain and dt must be positive");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (sweep_sigmas.empty() || sweep_coverages.empty()) throw ConfigError("noise grids must be non-empty");
    try {
        cam.validate();
        detected_features.validate();
        for (double s : sweep_sigmas) NoiseSpec{s, 1.0, 0}.validate();
        for (double c : sweep_coverages) NoiseSpec{0.0, c, 0}.validate();
        train.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: wrong type for '" + key + "'");
    }
}

template <typename F>
void for_each_key(const json& j, const std::string& scope, F&& f) {
    if (!j.is_object()) throw ConfigError("config: '" + scope + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!f(it.key(), it.value())) {
            throw ConfigError("config: unknown key '" + (scope.empty() ? "" : scope + ".") + it.key() + "'");
        }
    }
}

NoiseSpec noise_from_json(const json& j, NoiseSpec n, const std::string& scope) {
    for_each_key(j, scope, [&](const std::string& k, const json& v) {
        if (k == "sigma") n.sigma = get_as<double>(v, k);
        else if (k == "coverage") n.coverage = get_as<double>(v, k);
        else if (k == "seed") n.rng_seed = get_as<std::uint64_t>(v, k);
        else return false;
        return true;
    });
    return n;
}

json noise_to_json(const NoiseSpec& n) { return {{"sigma", n.sigma}, {"coverage", n.coverage}, {"seed", n.rng_seed}}; }

RewardSpec reward_from_json(const json& j, RewardSpec r) {
    for_each_key(j, "reward", [&](const std::string& k, const json& v) {
        try {
            if (k == "kind") r.kind = parse_reward_kind(get_as<std::string>(v, k));
            else if (k == "metric") r.metric = parse_distance_metric(get_as<std::string>(v, k));
            else if (k == "lambda_alpha") r.lambda_alpha = get_as<double>(v, k);
            else if (k == "lambda_beta") r.lambda_beta = get_as<double>(v, k);
            else if (k == "lambda_theta") r.lambda_theta = get_as<double>(v, k);
            else return false;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        return true;
    });
    return r;
}

json reward_to_json(const RewardSpec& r) {
    return {{"kind", std::string(to_string(r.kind))},
            {"metric", std::string(to_string(r.metric))},
            {"lambda_alpha", r.lambda_alpha},
            {"lambda_beta", r.lambda_beta},
            {"lambda_theta", r.lambda_theta}};
}

}  // namespace

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
    for_each_key(j, "", [&](const std::string& k, const json& v) {
        if (k == "scene_count") c.scene_count = get_as<int>(v, k);
        else if (k == "scene_seed") c.scene_seed = get_as<std::uint64_t>(v, k);
        else if (k == "clutter") c.clutter = get_as<int>(v, k);
        else if (k == "room_width") c.room_width = get_as<double>(v, k);
        else if (k == "room_depth") c.room_depth = get_as<double>(v, k);
        else if (k == "episodes") c.episodes = get_as<int>(v, k);
        else if (k == "suite_seed") c.suite_seed = get_as<std::uint64_t>(v, k);
        else if (k == "const_depth") c.const_depth = get_as<double>(v, k);
        else if (k == "noisy_depth_sigma") c.noisy_depth_sigma = get_as<double>(v, k);
        else if (k == "lvs_max_steps") c.lvs_max_steps = get_as<int>(v, k);
        else if (k == "smoothing_kernel") c.smoothing_kernel = get_as<int>(v, k);
        else if (k == "train_seed") c.train_seed = get_as<std::uint64_t>(v, k);
        else if (k == "sweep_sigmas") c.sweep_sigmas = get_as<std::vector<double>>(v, k);
        else if (k == "sweep_coverages") c.sweep_coverages = get_as<std::vector<double>>(v, k);
        else if (k == "checkpoint") c.checkpoint = get_as<std::string>(v, k);
        else if (k == "jobs") c.jobs = get_as<int>(v, k);
        else if (k == "detected_features") c.detected_features = noise_from_json(v, c.detected_features, k);
        else if (k == "camera") {
            for_each_key(v, k, [&](const std::string& ck, const json& cv) {
                if (ck == "size") c.cam = CameraIntrinsics::square(get_as<int>(cv, ck), c.cam.focal * get_as<int>(cv, ck) / c.cam.width);
                else if (ck == "cam_height") c.cam.cam_height = get_as<double>(cv, ck);
                else return false;
                return true;
            });
        } else if (k == "sampling") {
            for_each_key(v, k, [&](const std::string& sk, const json& sv) {
                SamplingOptions& s = c.sampling;
                if (sk == "min_distance") s.min_distance = get_as<double>(sv, sk);
                else if (sk == "max_distance") s.max_distance = get_as<double>(sv, sk);
                else if (sk == "max_bearing") s.max_bearing = get_as<double>(sv, sk);
                else if (sk == "max_heading") s.max_heading = get_as<double>(sv, sk);
                else if (sk == "robot_radius") s.robot_radius = get_as<double>(sv, sk);
                else if (sk == "clearance") s.clearance = get_as<double>(sv, sk);
                else if (sk == "min_overlap") s.min_overlap = get_as<std::size_t>(sv, sk);
                else if (sk == "require_clear_path") s.require_clear_path = get_as<bool>(sv, sk);
                else if (sk == "max_attempts") s.max_attempts = get_as<int>(sv, sk);
                else return false;
                return true;
            });
        } else if (k == "ibvs") {
            for_each_key(v, k, [&](const std::string& ik, const json& iv) {
                IbvsConfig& b = c.ibvs;
                if (ik == "gain") b.gain = get_as<double>(iv, ik);
                else if (ik == "dt") b.dt = get_as<double>(iv, ik);
                else if (ik == "max_steps") b.max_steps = get_as<int>(iv, ik);
                else if (ik == "num_features") b.num_features = get_as<int>(iv, ik);
                else if (ik == "min_separation") b.min_separation = get_as<double>(iv, ik);
                else if (ik == "min_overlap") b.min_overlap = get_as<std::size_t>(iv, ik);
                else if (ik == "holonomic") b.holonomic = get_as<bool>(iv, ik);
                else if (ik == "robot_radius") b.robot_radius = get_as<double>(iv, ik);
                else return false;
                return true;
            });
        } else if (k == "train") {
            for_each_key(v, k, [&](const std::string& tk, const json& tv) {
                nn::TrainConfig& t = c.train;
                if (tk == "batch") t.batch = get_as<int>(tv, tk);
                else if (tk == "learning_rate") t.learning_rate = get_as<double>(tv, tk);
                else if (tk == "rms_decay") t.rms_decay = get_as<double>(tv, tk);
                else if (tk == "rms_eps") t.rms_eps = get_as<double>(tv, tk);
                else if (tk == "iterations") t.iterations = get_as<int>(tv, tk);
                else if (tk == "gamma") t.gamma = get_as<double>(tv, tk);
                else if (tk == "epsilon_start") t.epsilon_start = get_as<double>(tv, tk);
                else if (tk == "epsilon_end") t.epsilon_end = get_as<double>(tv, tk);
                else if (tk == "epsilon_decay_fraction") t.epsilon_decay_fraction = get_as<double>(tv, tk);
                else if (tk == "target_sync") t.target_sync = get_as<int>(tv, tk);
                else if (tk == "replay_capacity") t.replay_capacity = get_as<std::size_t>(tv, tk);
                else if (tk == "learn_start") t.learn_start = get_as<int>(tv, tk);
                else if (tk == "max_steps") t.max_steps = get_as<int>(tv, tk);
                else if (tk == "smoothing_kernel") t.smoothing_kernel = get_as<int>(tv, tk);
                else if (tk == "reward") t.reward = reward_from_json(tv, t.reward);
                else if (tk == "train_noise_sigma_max") t.train_noise_sigma_max = get_as<double>(tv, tk);
                else if (tk == "train_coverage_min") t.train_coverage_min = get_as<double>(tv, tk);
                else if (tk == "eval_every") t.eval_every = get_as<int>(tv, tk);
                else if (tk == "eval_episodes") t.eval_episodes = get_as<int>(tv, tk);
                else if (tk == "eval_seed") t.eval_seed = get_as<std::uint64_t>(tv, tk);
                else return false;
                return true;
            });
        } else {
            return false;
        }
        return true;
    });
    c.validate();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    const nn::TrainConfig& t = c.train;
    json j = {
        {"scene_count", c.scene_count},
        {"scene_seed", c.scene_seed},
        {"clutter", c.clutter},
        {"room_width", c.room_width},
        {"room_depth", c.room_depth},
        {"episodes", c.episodes},
        {"suite_seed", c.suite_seed},
        {"camera", {{"size", c.cam.width}, {"cam_height", c.cam.cam_height}}},
        {"sampling",
         {{"min_distance", c.sampling.min_distance},
          {"max_distance", c.sampling.max_distance},
          {"max_bearing", c.sampling.max_bearing},
          {"max_heading", c.sampling.max_heading},
          {"robot_radius", c.sampling.robot_radius},
          {"clearance", c.sampling.clearance},
          {"min_overlap", c.sampling.min_overlap},
          {"require_clear_path", c.sampling.require_clear_path},
          {"max_attempts", c.sampling.max_attempts}}},
        {"ibvs",
         {{"gain", c.ibvs.gain},
          {"dt", c.ibvs.dt},
          {"max_steps", c.ibvs.max_steps},
          {"num_features", c.ibvs.num_features},
          {"min_separation", c.ibvs.min_separation},
          {"min_overlap", c.ibvs.min_overlap},
          {"holonomic", c.ibvs.holonomic},
          {"robot_radius", c.ibvs.robot_radius}}},
        {"const_depth", c.const_depth},
        {"noisy_depth_sigma", c.noisy_depth_sigma},
        {"detected_features", noise_to_json(c.detected_features)},
        {"lvs_max_steps", c.lvs_max_steps},
        {"smoothing_kernel", c.smoothing_kernel},
        {"train",
         {{"batch", t.batch},
          {"learning_rate", t.learning_rate},
          {"rms_decay", t.rms_decay},
          {"rms_eps", t.rms_eps},
          {"iterations", t.iterations},
          {"gamma", t.gamma},
          {"epsilon_start", t.epsilon_start},
          {"epsilon_end", t.epsilon_end},
          {"epsilon_decay_fraction", t.epsilon_decay_fraction},
          {"target_sync", t.target_sync},
          {"replay_capacity", t.replay_capacity},
          {"learn_start", t.learn_start},
          {"max_steps", t.max_steps},
          {"smoothing_kernel", t.smoothing_kernel},
          {"reward", reward_to_json(t.reward)},
          {"train_noise_sigma_max", t.train_noise_sigma_max},
          {"train_coverage_min", t.train_coverage_min},
          {"eval_every", t.eval_every},
          {"eval_episodes", t.eval_episodes},
          {"eval_seed", t.eval_seed}}},
        {"train_seed", c.train_seed},
        {"sweep_sigmas", c.sweep_sigmas},
        {"sweep_coverages", c.sweep_coverages},
        {"jobs", c.jobs},
    };
    if (c.checkpoint) j["checkpoint"] = *c.checkpoint;
    return j;
}

nn::World make_world(const ExperimentConfig& cfg) {
    nn::World w = nn::World::rooms(cfg.scene_count, cfg.scene_seed, cfg.clutter, cfg.cam, cfg.room_width,
                                   cfg.room_depth);
    w.sampling = cfg.sampling;
    return w;
}

std::vector<nn::EpisodeCase> make_suite(const ExperimentConfig& cfg, const nn::World& world) {
    auto suite = nn::make_suite(world, cfg.episodes, cfg.suite_seed, cfg.lvs_max_steps);
    for (auto& c : suite) c.spec.smoothing_kernel = cfg.smoothing_kernel;
    return suite;
}

// ------------------------------------------------------------- IBVS ablation

namespace {

std::vector<IbvsResult> run_ibvs_suite(const nn::World& world, const std::vector<nn::EpisodeCase>& suite,
                                       const IbvsConfig& base, int jobs) {
    std::vector<IbvsResult> out(suite.size());
    parallel_for(suite.size(), jobs, [&](std::size_t i) {
        IbvsConfig c = base;
        c.depth.seed = mix_seed(base.depth.seed, i);
        c.feature_noise.rng_seed = mix_seed(base.feature_noise.rng_seed, i);
        IbvsResult r = ibvs_episode(*world.scenes[suite[i].scene_index], suite[i].spec.start, suite[i].spec.goal,
                                    world.cam, c);
        r.rows.clear();
        r.rows.shrink_to_fit();
        out[i] = std::move(r);
    });
    return out;
}

nn::EvalResult evaluate_lvs(const nn::World& world, const std::vector<nn::EpisodeCase>& suite, nn::QNetwork& net,
                            const nn::ObservationOverride& obs = {}) {
    // The network holds per-call scratch buffers, so evaluation stays on one thread.
    return nn::evaluate(world, suite, nn::greedy_policy(net), EnvConfig{}, obs, 0, 1);
}

}  // namespace

ResultTable run_ibvs_ablation(const ExperimentConfig& cfg, nn::QNetwork* lvs) {
    cfg.validate();
    const nn::World world = make_world(cfg);
    const auto suite = make_suite(cfg, world);
    std::vector<Pose2D> goals;
    for (const auto& c : suite) goals.push_back(c.spec.goal);

    struct Variant {
        const char* label;
        DepthPolicy depth;
        NoiseSpec features;
        bool holonomic;
    };
    const bool holo = cfg.ibvs.holonomic;
    const std::vector<Variant> variants = {
        {kRowGtDepth, DepthPolicy::ground_truth(), {}, holo},
        {kRowConstDepth, DepthPolicy::constant(cfg.const_depth), {}, holo},
        {kRowNoisyDepth, DepthPolicy::noisy(cfg.noisy_depth_sigma, cfg.suite_seed), {}, holo},
        {kRowNoDepth, DepthPolicy::none(), {}, holo},
        {kRowDetected, DepthPolicy::ground_truth(), cfg.detected_features, holo},
        {kRowNonHolonomic, DepthPolicy::ground_truth(), {}, false},
    };
    ResultTable t;
    t.name = "ibvs_ablation";
    for (const Variant& v : variants) {
        IbvsConfig c = cfg.ibvs;
        c.depth = v.depth;
        c.feature_noise = v.features;
        c.holonomic = v.holonomic;
        t.rows.push_back(make_row(v.label, run_ibvs_suite(world, suite, c, cfg.jobs), goals));
    }
    if (lvs) {
        t.rows.push_back(make_row(kRowLvs, evaluate_lvs(world, suite, *lvs)));
    }
    return t;
}

// ------------------------------------------------------------- reward ablation

RewardAblation run_reward_ablation(const ExperimentConfig& cfg) {
    cfg.validate();
    const nn::World world = make_world(cfg);
    const auto suite = make_suite(cfg, world);
    struct Cell {
        RewardKind kind;
        DistanceMetric metric;
    };
    const Cell cells[] = {{RewardKind::DistMinimize, DistanceMetric::Polar},
                          {RewardKind::Progress, DistanceMetric::Polar},
                          {RewardKind::Progress, DistanceMetric::Pose}};
    RewardAblation out;
    out.table.name = "reward_ablation";
    for (const Cell& cell : cells) {
        nn::TrainConfig tc = cfg.train;
        tc.reward.kind = cell.kind;
        tc.reward.metric = cell.metric;
        tc.max_steps = cfg.lvs_max_steps;
        const std::string label = std::string(to_string(cell.kind)) + "/" + std::string(to_string(cell.metric));
        nn::TrainResult tr = nn::train(world, tc, cfg.train_seed);
        out.curves.push_back(tr.curve);
        if (tr.diverged) {
            ResultRow r;
            r.label = label;
            r.episodes = static_cast<int>(suite.size());
            r.flagged = true;
            r.note = "training diverged at iteration " + std::to_string(tr.iterations_run);
            out.table.rows.push_back(r);
            continue;
        }
        out.table.rows.push_back(make_row(label, evaluate_lvs(world, suite, tr.net)));
    }
    return out;
}

// ------------------------------------------------------------- noise sweep

namespace {

std::string grid_label(const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%g", key, v);
    return buf;
}

}  // namespace

NoiseSweep run_noise_sweep(const ExperimentConfig& cfg, nn::QNetwork& net) {
    cfg.validate();
    const nn::World world = make_world(cfg);
    const auto suite = make_suite(cfg, world);
    NoiseSweep s;
    s.sigma.name = "noise_sigma";
    s.coverage.name = "noise_coverage";
    for (double sigma : cfg.sweep_sigmas) {
        nn::ObservationOverride o;
        o.noise = NoiseSpec{sigma, 1.0, cfg.suite_seed};
        s.sigma.rows.push_back(make_row(grid_label("sigma", sigma), evaluate_lvs(world, suite, net, o)));
    }
    for (double cov : cfg.sweep_coverages) {
        nn::ObservationOverride o;
        o.noise = NoiseSpec{0.0, cov, cfg.suite_seed};
        s.coverage.rows.push_back(make_row(grid_label("coverage", cov), evaluate_lvs(world, suite, net, o)));
    }
    return s;
}

// ------------------------------------------------------------- hard case

Scene hardcase_scene() {
    Scene s;
    const double W = 8.0, D = 6.0, H = 2.5;
    s.walls = {{{0, 0}, {W, 0}, 0, H, 0},   {{W, 0}, {W, D}, 0, H, 1}, {{W, D}, {0, D}, 0, H, 2},
               {{0, D}, {0, 0}, 0, H, 3},   {{3.5, 2.3}, {3.5, 3.7}, 0, H, 4}};
    s.ceiling_height = H;
    s.rng_seed = 0x4A8D;
    s.validate();
    return s;
}

std::string lvs_trace_csv(const std::vector<LvsTraceRow>& rows) {
    std::string out = "step,x,y,theta,action,d_polar,overlap_count\n";
    char buf[256];
    for (const LvsTraceRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%d,%.6f,%zu\n", r.step, r.pose.x, r.pose.y, r.pose.theta,
                      r.action, r.d_polar, r.overlap);
        out += buf;
    }
    return out;
}

HardCase run_hardcase(const ExperimentConfig& cfg, nn::QNetwork& net) {
    cfg.validate();
    HardCase h;
    h.scene = std::make_shared<const Scene>(hardcase_scene());
    const Scene& scene = *h.scene;
    const CameraIntrinsics& cam = cfg.cam;
    const double keep_out = cfg.sampling.robot_radius + cfg.sampling.clearance;

    // The partition stands between the start and every candidate goal. Both views share the far
    // wall at first; closing in on the goal fills the current view with the partition, which the
    // goal camera (facing away from it) never sees.
    h.start = Pose2D{1.5, 3.0, 0.0};
    bool found = false;
    for (double dist : {3.5, 3.0, 4.0}) {
        for (double bearing : {kPi / 12, -kPi / 12, kPi / 8, 0.0}) {
            for (double heading : {-kPi / 6, kPi / 6, 0.0}) {
                const double b = h.start.theta + bearing;
                const Pose2D goal{h.start.x + dist * std::cos(b), h.start.y + dist * std::sin(b),
                                  h.start.theta + heading};
                if (!scene.is_free(goal.x, goal.y, keep_out) ||
                    overlap_count(correspondence_map(scene, h.start, goal, cam)) < cfg.sampling.min_overlap) {
                    continue;
                }
                IbvsResult r = ibvs_episode(scene, h.start, goal, cam, cfg.ibvs);
                if (r.outcome == ServoOutcome::CorrespondenceLost && r.steps >= 2) {
                    h.goal = goal;
                    h.ibvs = std::move(r);
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
        if (found) break;
    }
    if (!found) {
        throw Error("run_hardcase: no goal in the search grid makes IBVS lose overlap");
    }
    h.ibvs_final_d_polar = d_polar(h.ibvs.final_pose, h.goal);

    EpisodeSpec spec;
    spec.scene_seed = scene.rng_seed;
    spec.start = h.start;
    spec.goal = h.goal;
    spec.max_steps = cfg.lvs_max_steps;
    spec.smoothing_kernel = cfg.smoothing_kernel;
    Env env(h.scene, cam, spec);
    auto record = [&](int action) {
        const StepInfo& info = env.last_info();
        h.lvs.push_back({env.steps(), env.pose(), action, info.d_polar, info.valid_count});
    };
    while (!env.terminal()) {
        const int a = nn::act_greedy(net, *env.observation());
        record(a);
        env.step(a);
    }
    record(-1);
    h.lvs_success = env.success();
    h.lvs_final_d_polar = env.last_info().d_polar;
    for (const LvsTraceRow& r : h.lvs) {
        if (r.overlap < cfg.ibvs.min_overlap) {
            h.lvs_first_loss_step = r.step;
            break;
        }
    }
    if (h.lvs_first_loss_step >= 0) {
        h.lvs_steps_after_loss = env.steps() - h.lvs_first_loss_step;
    }
    return h;
}

// ------------------------------------------------------------- checks

namespace {

OrderingCheck ge(const std::string& name, const ResultRow& a, const ResultRow& b, double margin = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %.4f vs %s %.4f (margin %.2f)", a.label.c_str(), a.success_rate(),
                  b.label.c_str(), b.success_rate(), margin);
    // Compare exact counts when the margin is zero so the check is free of rounding.
    const bool ok = margin == 0.0 ? static_cast<long>(a.successes) * b.episodes >= static_cast<long>(b.successes) * a.episodes
                                  : a.success_rate() - b.success_rate() >= margin - 1e-12;
    return {name, ok && !a.flagged, buf};
}

}  // namespace

std::vector<OrderingCheck> check_ibvs_orderings(const ResultTable& t) {
    const ResultRow& gt = t.row(kRowGtDepth);
    const ResultRow& cd = t.row(kRowConstDepth);
    const ResultRow& nd = t.row(kRowNoDepth);
    return {ge("GtDepth >= ConstantDepth", gt, cd), ge("ConstantDepth >= NoDepth", cd, nd),
            ge("GtDepth - NoDepth >= 0.15", gt, nd, 0.15)};
}

std::vector<OrderingCheck> check_reward_orderings(const ResultTable& t) {
    return {ge("DistMinimize/d_polar >= Progress/d_pose", t.row("DistMinimize/d_polar"), t.row("Progress/d_pose"))};
}

std::vector<OrderingCheck> check_noise_trends(const NoiseSweep& s, double tolerance) {
    std::vector<OrderingCheck> out;
    auto trend = [&](const ResultTable& tab, const std::string& name) {
        const ResultRow& clean = tab.rows.front();
        const ResultRow& worst = tab.rows.back();
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s %.4f vs %s %.4f (tolerance %.2f)", worst.label.c_str(),
                      worst.success_rate(), clean.label.c_str(), clean.success_rate(), tolerance);
        out.push_back({name, worst.success_rate() >= clean.success_rate() - tolerance - 1e-12, buf});
    };
    trend(s.sigma, "largest sigma within tolerance of clean");
    trend(s.coverage, "lowest coverage within tolerance of clean");
    return out;
}

std::vector<OrderingCheck> check_hardcase(const HardCase& h) {
    std::vector<OrderingCheck> out;
    out.push_back({"IBVS outcome is CorrespondenceLost", h.ibvs.outcome == ServoOutcome::CorrespondenceLost,
                   std::string(to_string(h.ibvs.outcome))});
    const int lvs_actions = static_cast<int>(h.lvs.size()) - 1;
    char buf[256];
    std::snprintf(buf, sizeof buf, "IBVS lost overlap at step %d; LVS actions %d; LVS own first loss step %d", h.ibvs.steps,
                  lvs_actions, h.lvs_first_loss_step);
    const bool continues = h.lvs_first_loss_step >= 0 ? h.lvs_steps_after_loss >= 1 : lvs_actions > h.ibvs.steps;
    out.push_back({"LVS keeps acting past the overlap loss", continues, buf});
    std::snprintf(buf, sizeof buf, "LVS %.4f vs IBVS %.4f", h.lvs_final_d_polar, h.ibvs_final_d_polar);
    out.push_back({"LVS final d_polar < IBVS final d_polar", h.lvs_final_d_polar < h.ibvs_final_d_polar, buf});
    std::snprintf(buf, sizeof buf, "(%.3f, %.3f, %.3f)", h.start.x, h.start.y, h.start.theta);
    const bool same_start = !h.ibvs.rows.empty() && !h.lvs.empty() && h.ibvs.rows.front().pose == h.start &&
                            h.lvs.front().pose == h.start;
    out.push_back({"both traces share the step-0 pose", same_start, buf});
    return out;
}

}  // namespace lvs::bench
