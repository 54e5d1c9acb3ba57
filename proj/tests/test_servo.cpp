#include <doctest.h>

#include <Eigen/Dense>

#include "lvs/metrics.hpp"
#include "lvs/servo.hpp"
#include "oracles.hpp"

using namespace lvs;
using doctest::Approx;

TEST_CASE("interaction_row examples") {
    CameraIntrinsics cam;
    PixelFeature f{cam.u0, cam.v0, 0, 0, 2.0};
    InteractionBlock L = interaction_row(f, cam);
    CHECK(L(0, 0) == Approx(-cam.focal / 2.0));
    CHECK(L(0, 1) == 0.0);
    CHECK(L(0, 2) == Approx(-cam.focal));
    CHECK(L.row(1).norm() == 0.0);

    cam.focal = 1.0;
    f = {cam.u0 + 1.0, cam.v0, 0, 0, 1.0};
    L = interaction_row(f, cam);
    CHECK(L(0, 0) == Approx(-1.0));
    CHECK(L(0, 1) == Approx(1.0));
    CHECK(L(0, 2) == Approx(-2.0));
    CHECK(L.row(1).norm() == 0.0);

    f.Z = 0.0;
    CHECK_THROWS_AS(interaction_row(f, cam), Error);
}

TEST_CASE("interaction matrix agrees with finite differences") {
    const auto rep = oracle::interaction_fd_check(1000, 77);
    CHECK(rep.features == 1000);
    CHECK(rep.max_rel_error < 1e-3);
}

TEST_CASE("select_features") {
    CorrespondenceMap m(8, 8);
    const int cells[4][2] = {{0, 0}, {7, 0}, {0, 7}, {7, 7}};
    for (auto& c : cells) {
        const auto i = m.index(c[0], c[1]);
        m.valid[i] = 1;
        m.dx[i] = 1.0 + c[0];
    }
    auto f = select_features(m, 4, 2.0);
    CHECK(f.size() == 4);

    CorrespondenceMap u(16, 16);
    std::fill(u.valid.begin(), u.valid.end(), 1);
    std::fill(u.dx.begin(), u.dx.end(), 2.0);
    f = select_features(u, 3, 4.0);
    REQUIRE(f.size() == 3);
    // Equal offsets: raster order, respecting the separation.
    CHECK(f[0].u == 0.5);
    CHECK(f[0].v == 0.5);
    CHECK(f[1].u == 4.5);
    CHECK(f[1].v == 0.5);
    CHECK(f[2].u == 8.5);
    for (std::size_t a = 0; a < f.size(); ++a)
        for (std::size_t b = a + 1; b < f.size(); ++b) CHECK(std::hypot(f[a].u - f[b].u, f[a].v - f[b].v) >= 4.0);
    CHECK(f[0].u_star == f[0].u + 2.0);

    CHECK_THROWS_AS(select_features(CorrespondenceMap(8, 8), 4, 1.0), FeatureStarvation);
}

TEST_CASE("ibvs_twist") {
    const CameraIntrinsics cam;
    std::vector<PixelFeature> same = {{10, 12, 10, 12, 2.0}, {40, 30, 40, 30, 3.0}, {20, 50, 20, 50, 1.5}};
    const IbvsCommand zero = ibvs_twist(same, cam, 0.5, true);
    CHECK(zero.twist.vx == 0.0);
    CHECK(zero.twist.vz == 0.0);
    CHECK(zero.twist.wy == 0.0);

    // One feature, non-holonomic: the (vz, wy) columns form an invertible 2x2 system.
    // The solver requires two features, so duplicate it; the stacked system is still exact.
    PixelFeature f{44.0, 50.0, 44.5, 49.8, 2.0};
    const IbvsCommand c = ibvs_twist({f, f}, cam, 0.5, false, {0.0, 1e-12, {1e9, 1e9}});
    Eigen::Matrix2d J = interaction_row(f, cam).rightCols<2>();
    const Eigen::Vector2d want = 0.5 * J.inverse() * Eigen::Vector2d(f.u_star - f.u, f.v_star - f.v);
    CHECK(c.twist.vx == 0.0);
    CHECK(std::abs(c.twist.vz - want(0)) < 1e-9);
    CHECK(std::abs(c.twist.wy - want(1)) < 1e-9);

    // Overdetermined, consistent: recover the generating twist.
    const Eigen::Vector3d gen(0.01, -0.02, 0.015);
    std::vector<PixelFeature> fs = {{8, 10, 0, 0, 2.0}, {55, 12, 0, 0, 3.0}, {12, 52, 0, 0, 1.2}, {50, 48, 0, 0, 4.0}};
    for (auto& p : fs) {
        const Eigen::Vector2d d = interaction_row(p, cam) * gen;
        p.u_star = p.u + d(0);
        p.v_star = p.v + d(1);
    }
    const IbvsCommand r = ibvs_twist(fs, cam, 1.0, true, {0.0, 1e-12, {1e9, 1e9}});
    CHECK(std::abs(r.twist.vx - gen(0)) <= 1e-3 * gen.norm());
    CHECK(std::abs(r.twist.vz - gen(1)) <= 1e-3 * gen.norm());
    CHECK(std::abs(r.twist.wy - gen(2)) <= 1e-3 * gen.norm());

    CHECK_THROWS_AS(ibvs_twist({f}, cam, 0.5, true), FeatureStarvation);
}

TEST_CASE("clamp_twist preserves direction") {
    const RobotTwist t = clamp_twist({1.0, 0.25, 0.1}, {0.5, 1.0});
    CHECK(t.vx == Approx(0.5));
    CHECK(t.vz == Approx(0.125));
    CHECK(t.wy == Approx(0.05));
}

TEST_CASE("resolve_depth policies") {
    const CameraIntrinsics cam;
    DepthImage gt;
    gt.width = cam.width;
    gt.height = cam.height;
    gt.values.assign(static_cast<std::size_t>(cam.width * cam.height), 2.5);
    std::mt19937_64 rng(1);
    const PixelFeature f{10.5, 20.5, 12, 20, 0};
    CHECK(resolve_depth(f, DepthPolicy::ground_truth(), gt, rng).Z == 2.5);
    CHECK(resolve_depth(f, DepthPolicy::constant(4.0), gt, rng).Z == 4.0);
    double sum = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double z = resolve_depth(f, DepthPolicy::noisy(0.5, 3), gt, rng).Z;
        CHECK(z >= kNoisyDepthFloor);
        sum += z;
    }
    CHECK(sum / 2000 == Approx(2.5).epsilon(0.02));
}

TEST_CASE("nodepth_control") {
    const CameraIntrinsics cam;
    std::vector<PixelFeature> fs = {{10, 20, 10, 25, 0}, {40, 30, 40, 10, 0}};
    RobotTwist t = nodepth_control(fs, cam, 0.5);
    CHECK(t.vz == kNoDepthForwardSpeed);
    CHECK(t.vx == 0.0);
    CHECK(t.wy == 0.0);

    const double delta = 3.0;
    t = nodepth_control({{cam.u0, cam.v0, cam.u0 + delta, cam.v0, 0}}, cam, 0.5);
    CHECK(t.wy == Approx(0.5 * delta / -cam.focal));
    CHECK_THROWS_AS(nodepth_control({}, cam, 0.5), FeatureStarvation);
}

TEST_CASE("nodepth sign: goal rotated left commands a left turn") {
    const Scene s = generate_scene({8.0, 8.0, 0, 1, 2.5});
    const CameraIntrinsics cam;
    const Pose2D cur(4, 4, 0), goal(4, 4, kPi / 8);
    const auto m = correspondence_map(s, cur, goal, cam);
    const RobotTwist t = nodepth_control(select_features(m, 4, 8.0), cam, 0.5);
    // World yaw rate is -wy; a left (CCW) turn needs wy < 0.
    CHECK(t.wy < 0.0);
    CHECK(integrate_twist(cur, t, 0.2).theta > 0.0);
}

TEST_CASE("integrate_twist") {
    const Pose2D p = integrate_twist(Pose2D(1, 2, kPi / 2), {0.0, 0.5, 0.0}, 2.0);
    CHECK(p.x == Approx(1.0));
    CHECK(p.y == Approx(3.0));
    const Pose2D l = integrate_twist(Pose2D(0, 0, 0), {-0.5, 0.0, 0.0}, 1.0);
    CHECK(l.y == Approx(0.5));
    const Pose2D r = integrate_twist(Pose2D(0, 0, 0), {0.0, 0.0, 0.5}, 1.0);
    CHECK(r.theta == Approx(-0.5));
}

TEST_CASE("ibvs_episode closed loop") {
    const Scene s = generate_scene({8.0, 8.0, 0, 1, 2.5});
    const CameraIntrinsics cam;
    IbvsConfig cfg;

    const IbvsResult same = ibvs_episode(s, Pose2D(4, 4, 0), Pose2D(4, 4, 0), cam, cfg);
    CHECK(same.outcome == ServoOutcome::Success);
    CHECK(same.steps == 0);

    // Frontal wall, goal 1 m ahead: minimal step count at full speed is 1 / (0.5 * 0.2) = 10.
    const IbvsResult fwd = ibvs_episode(s, Pose2D(3, 4, 0), Pose2D(4, 4, 0), cam, cfg);
    CHECK(fwd.outcome == ServoOutcome::Success);
    CHECK(fwd.steps <= 20);
    CHECK(fwd.rows.front().pose == Pose2D(3, 4, 0));
    CHECK(is_success(fwd.final_pose, Pose2D(4, 4, 0)));

    // Goal behind a wall relative to the view: no overlap at all.
    const IbvsResult lost = ibvs_episode(s, Pose2D(2, 4, 0), Pose2D(2, 5.5, kPi), cam, cfg);
    CHECK(lost.outcome == ServoOutcome::CorrespondenceLost);

    const std::string csv = trajectory_csv(fwd.rows);
    CHECK(csv.rfind("step,x,y,theta,vx,vz,wy,d_polar,overlap_count,outcome\n", 0) == 0);
}
