#include "lvs/servo.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <Eigen/SVD>

#include "lvs/metrics.hpp"

namespace lvs {

void DepthPolicy::validate() const {
    if (variant == DepthVariant::Constant && !(value > 0.0)) {
        throw Error("depth policy: constant depth must be positive");
    }
    if (variant == DepthVariant::Noisy && !(sigma >= 0.0)) {
        throw Error("depth policy: noisy sigma must be >= 0");
    }
}

std::vector<PixelFeature> select_features(const CorrespondenceMap& m, int k, double min_separation) {
    if (k < 2) {
        throw Error("select_features: k must be >= 2");
    }
    struct Candidate {
        double mag2;
        std::size_t index;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.valid[i]) {
            cands.push_back({m.dx[i] * m.dx[i] + m.dy[i] * m.dy[i], i});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.mag2 != b.mag2 ? a.mag2 > b.mag2 : a.index < b.index;
    });

    std::vector<PixelFeature> out;
    const double sep2 = min_separation * min_separation;
    for (const Candidate& c : cands) {
        if (static_cast<int>(out.size()) == k) {
            break;
        }
        const Pixel p = pixel_center(static_cast<int>(c.index % m.width), static_cast<int>(c.index / m.width));
        const bool spread = std::all_of(out.begin(), out.end(), [&](const PixelFeature& f) {
            return (f.u - p.u) * (f.u - p.u) + (f.v - p.v) * (f.v - p.v) >= sep2;
        });
        if (spread) {
            out.push_back({p.u, p.v, p.u + m.dx[c.index], p.v + m.dy[c.index], 0.0});
        }
    }
    if (out.size() < 2) {
        throw FeatureStarvation("select_features: fewer than 2 usable correspondences");
    }
    return out;
}

InteractionBlock interaction_row(const PixelFeature& f, const CameraIntrinsics& cam) {
    if (!(f.Z > 0.0)) {
        throw Error("interaction_row: depth must be positive");
    }
    const double lambda = cam.focal;
    const double du = f.u - cam.u0;
    const double dv = f.v - cam.v0;
    InteractionBlock L;
    L << -lambda / f.Z, du / f.Z, -(lambda + du * du / lambda),
         0.0, dv / f.Z, -du * dv / lambda;
    return L;
}

InteractionMatrix stack_interaction(const std::vector<PixelFeature>& features, const CameraIntrinsics& cam) {
    InteractionMatrix J(2 * static_cast<Eigen::Index>(features.size()), 3);
    for (std::size_t i = 0; i < features.size(); ++i) {
        J.block<2, 3>(2 * static_cast<Eigen::Index>(i), 0) = interaction_row(features[i], cam);
    }
    return J;
}

RobotTwist clamp_twist(const RobotTwist& t, const VelocityLimits& limits) {
    double scale = 1.0;
    if (std::abs(t.vx) > limits.linear) scale = std::min(scale, limits.linear / std::abs(t.vx));
    if (std::abs(t.vz) > limits.linear) scale = std::min(scale, limits.linear / std::abs(t.vz));
    if (std::abs(t.wy) > limits.angular) scale = std::min(scale, limits.angular / std::abs(t.wy));
    return {t.vx * scale, t.vz * scale, t.wy * scale};
}

IbvsCommand ibvs_twist(const std::vector<PixelFeature>& features, const CameraIntrinsics& cam, double gain,
                       bool holonomic, const IbvsSolverOptions& opt) {
    if (features.size() < 2) {
        throw FeatureStarvation("ibvs_twist: need at least 2 features");
    }
    const InteractionMatrix full = stack_interaction(features, cam);
    Eigen::MatrixXd J = holonomic ? Eigen::MatrixXd(full) : Eigen::MatrixXd(full.rightCols<2>());
    Eigen::VectorXd e(J.rows());
    for (std::size_t i = 0; i < features.size(); ++i) {
        e(2 * i) = features[i].u_star - features[i].u;
        e(2 * i + 1) = features[i].v_star - features[i].v;
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv(0) < 1e-12) {
        throw DegenerateJacobian("ibvs_twist: interaction matrix is rank 0");
    }
    // Damped pseudo-inverse: sigma / (sigma^2 + mu^2) on each singular direction.
    const double mu2 = opt.damping * opt.damping;
    Eigen::VectorXd inv = sv.unaryExpr([mu2](double s) { return s / (s * s + mu2); });
    const Eigen::VectorXd x = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * e;

    IbvsCommand cmd;
    cmd.min_singular = sv(sv.size() - 1);
    cmd.degenerate = cmd.min_singular < opt.singular_threshold;
    RobotTwist t = holonomic ? RobotTwist{gain * x(0), gain * x(1), gain * x(2)} : RobotTwist{0.0, gain * x(0), gain * x(1)};
    cmd.twist = clamp_twist(t, opt.limits);
    return cmd;
}

PixelFeature resolve_depth(PixelFeature f, const DepthPolicy& policy, const DepthImage& gt, std::mt19937_64& rng) {
    policy.validate();
    const int col = static_cast<int>(std::floor(f.u));
    const int row = static_cast<int>(std::floor(f.v));
    if (col < 0 || row < 0 || col >= gt.width || row >= gt.height) {
        throw Error("resolve_depth: pixel out of bounds");
    }
    switch (policy.variant) {
        case DepthVariant::GroundTruth:
            f.Z = gt.at(col, row);
            break;
        case DepthVariant::Constant:
            f.Z = policy.value;
            break;
        case DepthVariant::Noisy: {
            std::normal_distribution<double> noise(0.0, 1.0);
            f.Z = std::max(kNoisyDepthFloor, gt.at(col, row) + policy.sigma * noise(rng));
            break;
        }
        case DepthVariant::None:
            f.Z = 0.0;
            break;
    }
    return f;
}

RobotTwist nodepth_control(const std::vector<PixelFeature>& features, const CameraIntrinsics& cam, double gain,
                           const VelocityLimits& limits) {
    if (features.empty()) {
        throw FeatureStarvation("nodepth_control: no features");
    }
    double jj = 0.0;
    double je = 0.0;
    for (const PixelFeature& f : features) {
        const double du = f.u - cam.u0;
        const double j = -(cam.focal + du * du / cam.focal);
        jj += j * j;
        je += j * (f.u_star - f.u);
    }
    RobotTwist t{0.0, kNoDepthForwardSpeed, gain * je / jj};
    t.wy = std::clamp(t.wy, -limits.angular, limits.angular);
    return t;
}

Pose2D integrate_twist(const Pose2D& pose, const RobotTwist& t, double dt) {
    const double v_fwd = t.vz;
    const double v_left = -t.vx;
    const double w = -t.wy;
    const double dth = w * dt;
    double bx, by;
    if (std::abs(dth) < 1e-9) {
        bx = v_fwd * dt;
        by = v_left * dt;
    } else {
        const double s = std::sin(dth) / w;
        const double c = (1.0 - std::cos(dth)) / w;
        bx = s * v_fwd - c * v_left;
        by = c * v_fwd + s * v_left;
    }
    const double ct = std::cos(pose.theta);
    const double st = std::sin(pose.theta);
    return {pose.x + ct * bx - st * by, pose.y + st * bx + ct * by, pose.theta + dth};
}

std::string_view to_string(ServoOutcome o) {
    switch (o) {
        case ServoOutcome::Running: return "Running";
        case ServoOutcome::Success: return "Success";
        case ServoOutcome::CorrespondenceLost: return "CorrespondenceLost";
        case ServoOutcome::DegenerateJacobian: return "DegenerateJacobian";
        case ServoOutcome::MaxSteps: return "MaxSteps";
    }
    return "Unknown";
}

IbvsResult ibvs_episode(const Scene& scene, const Pose2D& start, const Pose2D& goal, const CameraIntrinsics& cam,
                        const IbvsConfig& cfg) {
    cfg.depth.validate();
    IbvsResult res;
    std::mt19937_64 depth_rng(cfg.depth.seed);
    Pose2D pose = start;
    auto finish = [&](int step, std::size_t overlap, ServoOutcome outcome) {
        res.rows.push_back({step, pose, {}, d_polar(pose, goal), overlap, outcome});
        res.outcome = outcome;
        res.steps = step;
        res.final_pose = pose;
        return res;
    };
    const bool noisy_features = cfg.feature_noise.sigma > 0.0 || cfg.feature_noise.coverage < 1.0;

    for (int step = 0;; ++step) {
        const DepthImage depth = render_depth(scene, pose, cam);
        CorrespondenceMap map = correspondence_map(scene, depth, pose, goal, cam, cfg.correspondence);
        if (noisy_features) {
            NoiseSpec n = cfg.feature_noise;
            n.rng_seed += static_cast<std::uint64_t>(step);
            map = inject_noise(map, n);
        }
        const std::size_t overlap = overlap_count(map);
        if (is_success(pose, goal)) {
            return finish(step, overlap, ServoOutcome::Success);
        }
        if (step >= cfg.max_steps) {
            return finish(step, overlap, ServoOutcome::MaxSteps);
        }
        if (overlap < cfg.min_overlap) {
            return finish(step, overlap, ServoOutcome::CorrespondenceLost);
        }
        std::vector<PixelFeature> features;
        try {
            features = select_features(map, cfg.num_features, cfg.min_separation);
        } catch (const FeatureStarvation&) {
            return finish(step, overlap, ServoOutcome::CorrespondenceLost);
        }
        for (PixelFeature& f : features) {
            f = resolve_depth(f, cfg.depth, depth, depth_rng);
        }
        RobotTwist twist;
        if (cfg.depth.variant == DepthVariant::None) {
            twist = nodepth_control(features, cam, cfg.gain, cfg.solver.limits);
        } else {
            IbvsCommand cmd;
            try {
                cmd = ibvs_twist(features, cam, cfg.gain, cfg.holonomic, cfg.solver);
            } catch (const DegenerateJacobian&) {
                return finish(step, overlap, ServoOutcome::DegenerateJacobian);
            }
            twist = cmd.twist;
        }
        res.rows.push_back({step, pose, twist, d_polar(pose, goal), overlap, ServoOutcome::Running});
        const Pose2D next = integrate_twist(pose, twist, cfg.dt);
        if (scene.segment_clear({pose.x, pose.y}, {next.x, next.y}, cfg.robot_radius)) {
            pose = next;
        }
    }
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
    std::string out = "step,x,y,theta,vx,vz,wy,d_polar,overlap_count,outcome\n";
    char buf[256];
    for (const TrajectoryRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%zu,", r.step, r.pose.x, r.pose.y,
                      r.pose.theta, r.twist.vx, r.twist.vz, r.twist.wy, r.d_polar, r.overlap);
        out += buf;
        out += to_string(r.outcome);
        out += '\n';
    }
    return out;
}

}  // namespace lvs
