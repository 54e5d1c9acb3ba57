#include <doctest.h>

#include <random>

#include "lvs/env.hpp"

using namespace lvs;
using doctest::Approx;

namespace {
std::shared_ptr<const Scene> room() { return std::make_shared<const Scene>(generate_scene({8.0, 8.0, 0, 1, 2.5})); }
}  // namespace

TEST_CASE("apply_action examples") {
    Pose2D p = apply_action(Pose2D(0, 0, 0), 3);
    CHECK(p.x == Approx(0.1));
    CHECK(p.y == Approx(0.0));
    CHECK(p.theta == 0.0);
    p = apply_action(Pose2D(0, 0, 0), 0);
    CHECK(p.x == Approx(0.1 * std::cos(-kPi / 4)));
    CHECK(p.y == Approx(0.1 * std::sin(-kPi / 4)));
    CHECK(p.theta == Approx(-kPi / 4));
    CHECK(std::abs(apply_action(apply_action(Pose2D(0, 0, 0), 0), 6).theta) < 1e-15);
    for (int a = 0; a < ActionSpace::kCount; ++a) {
        CHECK(position_distance(apply_action(Pose2D(1, 2, 0.4), a), Pose2D(1, 2, 0.4)) == Approx(0.1));
    }
    CHECK_THROWS_AS(apply_action(Pose2D(), 7), Error);
    CHECK_THROWS_AS(apply_action(Pose2D(), -1), Error);
}

TEST_CASE("sample_episode invariants and determinism") {
    const auto s = room();
    const CameraIntrinsics cam;
    SamplingOptions opt;
    std::mt19937_64 r1(5), r2(5);
    for (int i = 0; i < 10; ++i) {
        const EpisodeSpec a = sample_episode(*s, r1, cam, opt);
        const EpisodeSpec b = sample_episode(*s, r2, cam, opt);
        CHECK(a.start == b.start);
        CHECK(a.goal == b.goal);
        const double d = position_distance(a.start, a.goal);
        CHECK(d >= opt.min_distance - 1e-12);
        CHECK(d <= opt.max_distance + 1e-12);
        const double bearing = std::atan2(a.goal.y - a.start.y, a.goal.x - a.start.x);
        CHECK(angular_distance(bearing, a.start.theta) <= opt.max_bearing + 1e-9);
        CHECK(angular_distance(a.goal.theta, a.start.theta) <= opt.max_heading + 1e-9);
        CHECK(s->is_free(a.start.x, a.start.y, opt.robot_radius + opt.clearance));
        CHECK(s->is_free(a.goal.x, a.goal.y, opt.robot_radius + opt.clearance));
        CHECK(overlap_count(correspondence_map(*s, a.start, a.goal, cam)) >= opt.min_overlap);
    }
    const Scene closet = generate_scene({1.0, 1.0, 0, 1, 2.5});
    opt.max_attempts = 500;
    CHECK_THROWS_AS(sample_episode(closet, r1, cam, opt), SamplingExhausted);
}

TEST_CASE("env step rewards and termination") {
    const auto s = room();
    const CameraIntrinsics cam;
    EpisodeSpec spec;
    spec.start = Pose2D(3.0, 4.0, 0.0);
    spec.goal = Pose2D(4.0, 4.0, 0.0);
    Env env(s, cam, spec);
    CHECK(env.d_init() == Approx(1.0));
    CHECK(env.observation()->width == cam.width);
    const Transition t = env.step(ActionSpace::kStraight);
    CHECK(t.reward == Approx(0.1).epsilon(1e-12));
    CHECK_FALSE(t.terminal);
    CHECK(t.observation != t.next_observation);
    for (int i = 0; i < 6; ++i) env.step(ActionSpace::kStraight);
    CHECK_FALSE(env.terminal());
    env.step(ActionSpace::kStraight);  // 0.8 m covered, within 0.2 m
    CHECK(env.terminal());
    CHECK(env.success());
    CHECK_THROWS_AS(env.step(3), Error);

    // Into a wall: pose unchanged, zero reward, step counted.
    EpisodeSpec w;
    w.start = Pose2D(7.8, 4.0, 0.0);
    w.goal = Pose2D(6.0, 4.0, 0.0);
    Env blocked(s, cam, w);
    const Transition b = blocked.step(ActionSpace::kStraight);
    CHECK(blocked.last_info().blocked);
    CHECK(blocked.pose() == w.start);
    CHECK(b.reward == 0.0);
    CHECK(blocked.steps() == 1);
}

TEST_CASE("env max steps and logging") {
    const auto s = room();
    EpisodeSpec spec;
    spec.start = Pose2D(2.0, 2.0, 0.0);
    spec.goal = Pose2D(5.0, 2.5, 0.0);
    spec.max_steps = 3;
    Env env(s, CameraIntrinsics{}, spec);
    int n = 0;
    while (!env.terminal()) {
        env.step(n % 2 ? 2 : 4);
        ++n;
    }
    CHECK(n == 3);
    CHECK_FALSE(env.success());
    const std::string line = episode_log_line(env.steps(), env.last_info(), 4, 0.0);
    CHECK(line.front() == '{');
    CHECK(line.find("\"valid_count\"") != std::string::npos);
}
