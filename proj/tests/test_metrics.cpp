#include <doctest.h>

#include <random>

#include "lvs/metrics.hpp"

using namespace lvs;

namespace {
bool near(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }
}  // namespace

TEST_CASE("polar_error examples") {
    auto e = polar_error(Pose2D(0, -1, kPi / 2), Pose2D(0, 0, kPi / 2));
    CHECK(near(e.rho, 1.0));
    CHECK(near(e.alpha, 0.0));
    CHECK(near(e.beta, 0.0));

    e = polar_error(Pose2D(1, 2, 0.3), Pose2D(1, 2, 0.3));
    CHECK(e.rho == 0.0);
    CHECK(e.alpha == 0.0);
    CHECK(e.beta == 0.0);

    e = polar_error(Pose2D(0, 0, 0), Pose2D(1, 0, 0));
    CHECK(near(e.rho, 1.0));
    CHECK(near(e.alpha, 0.0));
    CHECK(near(e.beta, 0.0));

    // Degenerate range: beta carries the whole heading error.
    e = polar_error(Pose2D(0, 0, 0), Pose2D(0, 0, 1.0));
    CHECK(e.alpha == 0.0);
    CHECK(near(e.beta, 1.0));
}

TEST_CASE("d_polar examples") {
    CHECK(d_polar(Pose2D(3, 4, 1), Pose2D(3, 4, 1)) == 0.0);
    CHECK(near(d_polar(Pose2D(0, -1, kPi / 2), Pose2D(0, 0, kPi / 2)), 1.0));
    const double v = d_polar(Pose2D(0, 0, 0), Pose2D(-1, 0, 0));
    CHECK(near(v, 1.0 + 0.4 * kPi));
    CHECK(std::abs(v - 2.2566) < 1e-4);
}

TEST_CASE("d_pose examples") {
    CHECK(d_pose(Pose2D(1, 1, 1), Pose2D(1, 1, 1)) == 0.0);
    CHECK(near(d_pose(Pose2D(0, 0, 0.5), Pose2D(1, 0, 0.5)), 1.0));
    CHECK(near(d_pose(Pose2D(0, 0, 0), Pose2D(0, 0, kPi)), 0.2 * kPi));
}

TEST_CASE("reward examples") {
    CHECK(reward(1.3, 1.3, 2.0, RewardKind::DistMinimize) == 0.0);
    CHECK(near(reward(1.0, 0.5, 2.0, RewardKind::DistMinimize), 0.25));
    CHECK(reward(1.0, 1.5, 2.0, RewardKind::DistMinimize) == 0.0);
    CHECK(near(reward(0.3, 1.0, 2.0, RewardKind::Progress), 0.5));
    CHECK(near(reward(1.7, 1.0, 2.0, RewardKind::Progress), 0.5));
    CHECK(reward(1.0, 2.5, 2.0, RewardKind::Progress) == 0.0);
    CHECK_THROWS_AS(reward(1.0, 1.0, 0.0, RewardKind::DistMinimize), Error);
}

TEST_CASE("is_success boundary") {
    CHECK(is_success(Pose2D(0.19, 0, 0), Pose2D(0, 0, 0)));
    CHECK_FALSE(is_success(Pose2D(0.21, 0, 0), Pose2D(0, 0, 0)));
    CHECK(is_success(Pose2D(0.2, 0, 0), Pose2D(0, 0, 0)));
    CHECK(is_success(Pose2D(0, 0, 3), Pose2D(0, 0, 0)));
    CHECK_FALSE(is_success(Pose2D(0, 0, 3), Pose2D(0, 0, 0), 0.1));
}

TEST_CASE("d_polar invariants") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-4, 4), A(-kPi, kPi);
    for (int i = 0; i < 10000; ++i) {
        const Pose2D a(U(rng), U(rng), A(rng)), b(U(rng), U(rng), A(rng));
        const double d = d_polar(a, b);
        CHECK(d >= 0.0);
        // Joint rigid transform of both poses.
        const double phi = A(rng), tx = U(rng), ty = U(rng);
        auto T = [&](const Pose2D& p) {
            return Pose2D(std::cos(phi) * p.x - std::sin(phi) * p.y + tx, std::sin(phi) * p.x + std::cos(phi) * p.y + ty,
                          p.theta + phi);
        };
        CHECK(std::abs(d_polar(T(a), T(b)) - d) < 1e-9);
    }
}

TEST_CASE("reward range and telescoping over random trajectories") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int n = 0; n < 10000; ++n) {
        const double d_init = 0.1 + 4.0 * U(rng);
        const int len = 1 + static_cast<int>(U(rng) * 60);
        const bool monotone = n % 2 == 0;
        double d = d_init, sum = 0.0, rises = 0.0;
        auto clip = [&](double x) { return std::min(x / d_init, 1.0); };
        for (int t = 0; t < len; ++t) {
            const double next = monotone ? d * U(rng) : std::max(0.0, d + (U(rng) - 0.6) * d_init);
            const double r = reward(d, next, d_init, RewardKind::DistMinimize);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            const double rp = reward(d, next, d_init, RewardKind::Progress);
            CHECK(rp >= 0.0);
            CHECK(rp <= 1.0);
            sum += r;
            rises += std::max(0.0, clip(next) - clip(d));
            d = next;
        }
        // Sum of rewards telescopes to the net decrease plus every clipped increase.
        CHECK(std::abs(sum - (1.0 - clip(d) + rises)) < 1e-9);
        if (monotone) {
            CHECK(sum <= 1.0 + 1e-12);
            CHECK(std::abs(sum - (1.0 - d / d_init)) < 1e-9);
        }
    }
    // A monotone trajectory that reaches the goal collects exactly 1.
    double sum = 0.0;
    const double path[] = {2.0, 1.5, 0.7, 0.2, 0.0};
    for (int i = 0; i + 1 < 5; ++i) sum += reward(path[i], path[i + 1], 2.0, RewardKind::DistMinimize);
    CHECK(near(sum, 1.0));
}

TEST_CASE("reward/metric names round-trip") {
    CHECK(parse_reward_kind(to_string(RewardKind::Progress)) == RewardKind::Progress);
    CHECK(parse_distance_metric(to_string(DistanceMetric::Pose)) == DistanceMetric::Pose);
    CHECK_THROWS_AS(parse_reward_kind("Bogus"), Error);
}
