#include <doctest.h>

#include <filesystem>
#include <random>

#include <nlohmann/json.hpp>

#include "lvs/correspondence.hpp"
#include "lvs/env.hpp"
#include "lvs/scene.hpp"
#include "oracles.hpp"

using namespace lvs;
using doctest::Approx;

namespace {

Scene empty_room() { return generate_scene({8.0, 8.0, 0, 1, 2.5}); }

CorrespondenceMap constant_map(int w, int h, double dx, double dy) {
    CorrespondenceMap m(w, h);
    std::fill(m.dx.begin(), m.dx.end(), dx);
    std::fill(m.dy.begin(), m.dy.end(), dy);
    std::fill(m.valid.begin(), m.valid.end(), 1);
    return m;
}

}  // namespace

TEST_CASE("generate_scene examples") {
    const Scene a = empty_room();
    CHECK(a.walls.size() == 4);
    CHECK(a == empty_room());

    const Scene c = generate_scene({8.0, 8.0, 5, 7, 2.5});
    REQUIRE(c.walls.size() == 9);
    for (std::size_t i = 4; i < c.walls.size(); ++i) {
        for (const Vec2& p : {c.walls[i].a, c.walls[i].b}) {
            CHECK(p.x >= 0.0);
            CHECK(p.x <= 8.0);
            CHECK(p.y >= 0.0);
            CHECK(p.y <= 8.0);
        }
        CHECK(c.walls[i].length() > 0.0);
    }
    CHECK(c != generate_scene({8.0, 8.0, 5, 8, 2.5}));
    CHECK_THROWS_AS(generate_scene({-1.0, 8.0, 0, 1, 2.5}), Error);
}

TEST_CASE("scene json round trip") {
    const Scene s = generate_scene({6.0, 5.0, 3, 42, 2.5});
    const nlohmann::json j = s;
    CHECK(j.get<Scene>() == s);
    const auto path = std::filesystem::temp_directory_path() / "lvs_scene_rt.json";
    save_scene(s, path.string());
    CHECK(load_scene(path.string()) == s);
    std::filesystem::remove(path);
}

TEST_CASE("segment distance and free space") {
    CHECK(segment_distance({0, 0}, {1, 0}, {0, 1}, {1, 1}) == Approx(1.0));
    CHECK(segment_distance({0, 0}, {2, 2}, {0, 2}, {2, 0}) == Approx(0.0));
    const Scene s = empty_room();
    CHECK(s.is_free(4, 4, 0.5));
    CHECK_FALSE(s.is_free(0.1, 4, 0.5));
    CHECK_FALSE(s.is_free(-1, 4));
    CHECK(s.segment_clear({2, 2}, {6, 6}, 0.3));
    CHECK_FALSE(s.segment_clear({2, 2}, {7.9, 2}, 0.3));
}

TEST_CASE("render_depth on a frontal wall") {
    const Scene s = empty_room();
    const CameraIntrinsics cam;
    const double d = 8.0 - 6.0;
    const DepthImage img = render_depth(s, Pose2D(6.0, 4.0, 0.0), cam);
    const int cr = cam.height / 2;
    CHECK(img.at(cam.width / 2, cr) == Approx(d).epsilon(1e-12));
    // Z, not ray length, is stored: constant along the centre row.
    CHECK(img.at(0, cr) == Approx(d).epsilon(1e-12));
    CHECK(img.at(cam.width - 1, cr) == Approx(d).epsilon(1e-12));

    Scene open = s;
    open.floor = open.ceiling = false;
    open.max_range = 2.0;
    const DepthImage far = render_depth(open, Pose2D(3.0, 4.0, 0.0), cam);
    CHECK(far.at(cam.width / 2, cr) == 2.0);
    CHECK_FALSE(far.hit(cam.width / 2, cr));
    CHECK_THROWS_AS(render_depth(s, Pose2D(-1, 4, 0), cam), Error);
}

TEST_CASE("correspondence at identity pose") {
    const Scene s = empty_room();
    const CameraIntrinsics cam;
    const CorrespondenceMap m = correspondence_map(s, Pose2D(4, 4, 0.3), Pose2D(4, 4, 0.3), cam);
    // Floor and ceiling close the room, so every pixel hits a surface.
    CHECK(overlap_count(m) == static_cast<std::size_t>(cam.width * cam.height));
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(m.dx[i] == Approx(0.0).scale(1.0).epsilon(1e-9));
        CHECK(m.dy[i] == Approx(0.0).scale(1.0).epsilon(1e-9));
    }
}

TEST_CASE("forward translation gives inward offsets toward the principal point") {
    Scene s = empty_room();
    const CameraIntrinsics cam;
    const Pose2D cur(2.0, 4.0, 0.0), goal(3.0, 4.0, 0.0);
    const CorrespondenceMap m = correspondence_map(s, cur, goal, cam);
    const auto rep = oracle::correspondence_check(s, cur, goal, cam);
    CHECK(rep.max_oracle_error < 1e-6);
    int checked = 0;
    for (int row = 0; row < cam.height; ++row) {
        for (int col = 0; col < cam.width; ++col) {
            const std::size_t i = m.index(col, row);
            if (!m.valid[i]) continue;
            const Pixel p = pixel_center(col, row);
            const double ru = p.u - cam.u0, rv = p.v - cam.v0;
            // The goal view is closer, so features move away from the centre of the goal image;
            // seen from the current view the offset is radial.
            const double radial = ru * m.dx[i] + rv * m.dy[i];
            const double cross = ru * m.dy[i] - rv * m.dx[i];
            CHECK(radial >= -1e-9);
            CHECK(std::abs(cross) < 1e-6 * (1 + std::hypot(ru, rv)));
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("pure rotation gives a horizontal shift consistent with projection") {
    const Scene s = empty_room();
    const CameraIntrinsics cam;
    const Pose2D cur(4.0, 4.0, 0.0), goal(4.0, 4.0, kPi / 6);
    const CorrespondenceMap m = correspondence_map(s, cur, goal, cam);
    const auto rep = oracle::correspondence_check(s, cur, goal, cam);
    CHECK(rep.valid > 0);
    CHECK(rep.max_oracle_error < 1e-6);
    // Goal is turned left, so the scene appears shifted right in the goal view.
    const int r = cam.height / 2;
    for (int col = 0; col < cam.width; ++col) {
        const std::size_t i = m.index(col, r);
        if (m.valid[i]) CHECK(m.dx[i] > 0.0);
    }
}

TEST_CASE("correspondence oracle and symmetry on random instances") {
    const CameraIntrinsics cam;
    std::mt19937_64 rng(21);
    SamplingOptions opt;
    for (int k = 0; k < 4; ++k) {
        const Scene s = generate_scene({8.0, 8.0, 4, 100u + k, 2.5});
        const EpisodeSpec e = sample_episode(s, rng, cam, opt);
        const auto rep = oracle::correspondence_check(s, e.start, e.goal, cam);
        CHECK(rep.valid >= opt.min_overlap);
        CHECK(rep.max_oracle_error < 1e-6);
        CHECK(rep.symmetric_checked > 0);
        CHECK(rep.max_symmetry_error <= 1.0);
    }
}

TEST_CASE("smooth_map examples") {
    const CorrespondenceMap c = constant_map(9, 7, 1.5, -2.0);
    const CorrespondenceMap sm = smooth_map(c, 5);
    for (std::size_t i = 0; i < sm.size(); ++i) {
        CHECK(sm.dx[i] == Approx(1.5).epsilon(1e-12));
        CHECK(sm.dy[i] == Approx(-2.0).epsilon(1e-12));
    }
    CHECK(overlap_count(sm) == sm.size());

    CorrespondenceMap hole = c;
    const std::size_t h = hole.index(4, 3);
    hole.valid[h] = 0;
    hole.dx[h] = hole.dy[h] = 0.0;
    const CorrespondenceMap filled = smooth_map(hole, 3);
    CHECK(filled.valid[h] == 1);
    CHECK(filled.dx[h] == Approx(1.5));
    CHECK(filled.dy[h] == Approx(-2.0));

    const CorrespondenceMap none(6, 6);
    CHECK(smooth_map(none, 5) == none);
    CHECK(smooth_map(c, 1) == c);
    CHECK_THROWS_AS(smooth_map(c, 4), Error);
}

TEST_CASE("inject_noise examples") {
    const CorrespondenceMap c = constant_map(128, 128, 3.0, -1.0);
    CHECK(inject_noise(c, {0.0, 1.0, 5}) == c);
    CHECK(overlap_count(inject_noise(c, {0.0, 0.0, 5})) == 0);

    const CorrespondenceMap n = inject_noise(c, {8.0, 1.0, 9});
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        mx += std::abs(n.dx[i] - 3.0);
        my += std::abs(n.dy[i] + 1.0);
    }
    const double expect = 8.0 * std::sqrt(2.0 / kPi);
    CHECK(mx / n.size() == Approx(expect).epsilon(0.05));
    CHECK(my / n.size() == Approx(expect).epsilon(0.05));
    CHECK(inject_noise(c, {8.0, 1.0, 9}) == n);

    const double N = static_cast<double>(c.size());
    const double kept = static_cast<double>(overlap_count(inject_noise(c, {0.0, 0.5, 3})));
    CHECK(std::abs(kept - 0.5 * N) <= 3.0 * std::sqrt(N * 0.25));

    CHECK_THROWS_AS(inject_noise(c, {-1.0, 1.0, 0}), Error);
    CHECK_THROWS_AS(inject_noise(c, {0.0, 1.5, 0}), Error);
}

TEST_CASE("overlap_count examples") {
    CHECK(overlap_count(CorrespondenceMap(5, 5)) == 0);
    CHECK(overlap_count(constant_map(5, 4, 0, 0)) == 20);
}

TEST_CASE("correspondence binary round trip") {
    CorrespondenceMap m = constant_map(4, 3, 0.5, -0.25);
    m.valid[2] = 0;
    m.dx[2] = m.dy[2] = 0.0;
    const auto path = std::filesystem::temp_directory_path() / "lvs_corr_rt.bin";
    write_correspondence(m, path.string());
    CHECK(read_correspondence(path.string()) == m);
    std::filesystem::remove(path);
}
