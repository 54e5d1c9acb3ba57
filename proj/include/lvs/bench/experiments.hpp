#pragma once

// Seeded experiment drivers behind the command-line tool. Every driver consumes a
// fully enumerated episode suite, so all rows of a table are paired.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lvs/env.hpp"
#include "lvs/nn/trainer.hpp"
#include "lvs/servo.hpp"

namespace lvs::bench {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct ResultRow {
    std::string label;
    int successes = 0;
    int episodes = 0;
    double mean_steps = 0.0;
    double mean_final_d_polar = 0.0;
    bool flagged = false;  // e.g. training diverged
    std::string note;

    double success_rate() const { return episodes ? static_cast<double>(successes) / episodes : 0.0; }
};

struct ResultTable {
    std::string name;
    std::vector<ResultRow> rows;

    const ResultRow& row(const std::string& label) const;
    /// Header: label,success_rate,successes,episodes,mean_steps,mean_final_d_polar,flagged
    std::string csv() const;
    nlohmann::json to_json() const;
};

ResultRow make_row(std::string label, const nn::EvalResult& r);
ResultRow make_row(std::string label, const std::vector<IbvsResult>& runs, const std::vector<Pose2D>& goals);

struct ExperimentConfig {
    // Scenes and suite.
    int scene_count = 4;
    std::uint64_t scene_seed = 100;
    int clutter = 4;
    double room_width = 8.0;
    double room_depth = 8.0;
    int episodes = 100;
    std::uint64_t suite_seed = 7;
    SamplingOptions sampling;
    CameraIntrinsics cam;

    // Controllers.
    IbvsConfig ibvs;
    double const_depth = 4.0;
    double noisy_depth_sigma = 0.5;
    NoiseSpec detected_features{2.0, 0.25, 0};  // corruption applied for the detected-feature row
    int lvs_max_steps = 50;
    int smoothing_kernel = 5;

    // Learning.
    nn::TrainConfig train;
    std::uint64_t train_seed = 1;

    // Noise sweep grid.
    std::vector<double> sweep_sigmas{0.0, 4.0, 8.0, 16.0, 32.0};
    std::vector<double> sweep_coverages{1.0, 0.9, 0.8, 0.7, 0.6, 0.5};

    std::optional<std::string> checkpoint;
    int jobs = 1;

    void validate() const;
};

/// Unknown keys and invalid values raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& cfg);

nn::World make_world(const ExperimentConfig& cfg);
std::vector<nn::EpisodeCase> make_suite(const ExperimentConfig& cfg, const nn::World& world);

// Row labels used by the orderings checks.
inline constexpr const char* kRowGtDepth = "GtCorr+GtDepth";
inline constexpr const char* kRowConstDepth = "GtCorr+ConstantDepth";
inline constexpr const char* kRowNoisyDepth = "GtCorr+NoisyDepth";
inline constexpr const char* kRowNoDepth = "GtCorr+NoDepth";
inline constexpr const char* kRowDetected = "DetectedCorr+GtDepth";
inline constexpr const char* kRowNonHolonomic = "GtCorr+GtDepth(nonholonomic)";
inline constexpr const char* kRowLvs = "LVS";

/// IBVS variants on one paired suite; an LVS row is appended when `lvs` is given.
ResultTable run_ibvs_ablation(const ExperimentConfig& cfg, nn::QNetwork* lvs = nullptr);

struct RewardAblation {
    ResultTable table;
    std::vector<std::vector<nn::CurvePoint>> curves;  // one per row
};

/// Trains one policy per (reward, metric) cell and evaluates all on the same suite.
RewardAblation run_reward_ablation(const ExperimentConfig& cfg);

struct NoiseSweep {
    ResultTable sigma;     // label "sigma=<v>"
    ResultTable coverage;  // label "coverage=<v>"
};

NoiseSweep run_noise_sweep(const ExperimentConfig& cfg, nn::QNetwork& net);

struct LvsTraceRow {
    int step = 0;
    Pose2D pose;
    int action = -1;  // -1 on the final row
    double d_polar = 0.0;
    std::size_t overlap = 0;
};

struct HardCase {
    std::shared_ptr<const Scene> scene;
    Pose2D start;
    Pose2D goal;
    IbvsResult ibvs;
    std::vector<LvsTraceRow> lvs;
    bool lvs_success = false;
    int lvs_first_loss_step = -1;  // first LVS step with overlap below the IBVS threshold
    int lvs_steps_after_loss = 0;
    double ibvs_final_d_polar = 0.0;
    double lvs_final_d_polar = 0.0;
};

/// Builds the overlap-loss scene, picks the goal deterministically and runs IBVS and LVS from the same start.
HardCase run_hardcase(const ExperimentConfig& cfg, nn::QNetwork& net);

/// Overlap-loss scene: an 8 x 6 m room with a 1.4 m partition across the start heading.
Scene hardcase_scene();

/// Header: step,x,y,theta,action,d_polar,overlap_count
std::string lvs_trace_csv(const std::vector<LvsTraceRow>& rows);

struct OrderingCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<OrderingCheck> check_ibvs_orderings(const ResultTable& t);
std::vector<OrderingCheck> check_reward_orderings(const ResultTable& t);
std::vector<OrderingCheck> check_noise_trends(const NoiseSweep& s, double tolerance = 0.15);
std::vector<OrderingCheck> check_hardcase(const HardCase& h);

}  // namespace lvs::bench
