#include "lvs/scene.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

namespace lvs {

namespace {

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
Vec2 sub(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = sub(b, a);
    const double len2 = dot(ab, ab);
    double s = len2 > 0.0 ? dot(sub(p, a), ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::hypot(p.x - (a.x + s * ab.x), p.y - (a.y + s * ab.y));
}

bool segments_intersect(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1) {
    const Vec2 r = sub(p1, p0);
    const Vec2 s = sub(q1, q0);
    const double denom = cross(r, s);
    if (denom == 0.0) {
        return false;
    }
    const double t = cross(sub(q0, p0), s) / denom;
    const double u = cross(sub(q0, p0), r) / denom;
    return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

}  // namespace

double segment_distance(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1) {
    if (segments_intersect(p0, p1, q0, q1)) {
        return 0.0;
    }
    return std::min({point_segment_distance(p0, q0, q1), point_segment_distance(p1, q0, q1),
                     point_segment_distance(q0, p0, p1), point_segment_distance(q1, p0, p1)});
}

void Scene::validate() const {
    if (walls.empty()) {
        throw Error("scene: no walls");
    }
    for (const Wall& w : walls) {
        if (!(w.length() > 0.0) || !(w.z_max > w.z_min)) {
            throw Error("scene: degenerate wall");
        }
    }
    if (!(max_range > 0.0)) {
        throw Error("scene: max_range must be positive");
    }
}

std::pair<Vec2, Vec2> Scene::bounds() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Vec2 lo{inf, inf};
    Vec2 hi{-inf, -inf};
    for (const Wall& w : walls) {
        for (const Vec2& p : {w.a, w.b}) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
    }
    return {lo, hi};
}

std::optional<double> Scene::raycast(const Vec3& o, const Vec3& d, double t_max) const {
    double best = t_max;
    bool hit = false;
    const Vec2 o2{o.x, o.y};
    const Vec2 d2{d.x, d.y};
    for (const Wall& w : walls) {
        const Vec2 e = sub(w.b, w.a);
        const double denom = cross(d2, e);
        if (denom == 0.0) {
            continue;
        }
        const Vec2 ao = sub(w.a, o2);
        const double t = cross(ao, e) / denom;
        const double s = cross(ao, d2) / denom;
        if (t <= 0.0 || t > best || s < 0.0 || s > 1.0) {
            continue;
        }
        const double z = o.z + t * d.z;
        if (z < w.z_min || z > w.z_max) {
            continue;
        }
        best = t;
        hit = true;
    }
    if (floor && d.z < 0.0) {
        const double t = -o.z / d.z;
        if (t > 0.0 && t <= best) {
            best = t;
            hit = true;
        }
    }
    if (ceiling && d.z > 0.0) {
        const double t = (ceiling_height - o.z) / d.z;
        if (t > 0.0 && t <= best) {
            best = t;
            hit = true;
        }
    }
    if (!hit) {
        return std::nullopt;
    }
    return best;
}

bool Scene::is_free(double x, double y, double clearance) const {
    const auto [lo, hi] = bounds();
    if (!(x > lo.x + clearance && x < hi.x - clearance && y > lo.y + clearance && y < hi.y - clearance)) {
        return false;
    }
    const Vec2 p{x, y};
    return std::all_of(walls.begin(), walls.end(),
                       [&](const Wall& w) { return point_segment_distance(p, w.a, w.b) > clearance; });
}

bool Scene::segment_clear(Vec2 p, Vec2 q, double radius) const {
    return std::all_of(walls.begin(), walls.end(),
                       [&](const Wall& w) { return segment_distance(p, q, w.a, w.b) > radius; });
}

Scene generate_scene(const RoomSpec& spec) {
    if (!(spec.width > 0.0) || !(spec.depth > 0.0) || !(spec.wall_height > 0.0) || spec.clutter < 0) {
        throw Error("generate_scene: room dimensions must be positive");
    }
    Scene scene;
    scene.rng_seed = spec.seed;
    scene.ceiling_height = spec.wall_height;
    const double W = spec.width;
    const double D = spec.depth;
    const double H = spec.wall_height;
    scene.walls = {
        {{0, 0}, {W, 0}, 0.0, H, 0},
        {{W, 0}, {W, D}, 0.0, H, 1},
        {{W, D}, {0, D}, 0.0, H, 2},
        {{0, D}, {0, 0}, 0.0, H, 3},
    };

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double margin = std::min({0.5, W / 4.0, D / 4.0});
    for (int i = 0; i < spec.clutter; ++i) {
        const double cx = margin + unit(rng) * (W - 2 * margin);
        const double cy = margin + unit(rng) * (D - 2 * margin);
        const double phi = unit(rng) * kPi;
        const double half = 0.5 * (0.4 + unit(rng) * 1.1);
        const double top = std::min(H, 0.8 + unit(rng) * (H - 0.8));
        auto clip_x = [&](double v) { return std::clamp(v, margin, W - margin); };
        auto clip_y = [&](double v) { return std::clamp(v, margin, D - margin); };
        Wall w;
        w.a = {clip_x(cx - half * std::cos(phi)), clip_y(cy - half * std::sin(phi))};
        w.b = {clip_x(cx + half * std::cos(phi)), clip_y(cy + half * std::sin(phi))};
        w.z_min = 0.0;
        w.z_max = top;
        w.texture_id = 4 + i;
        if (w.length() < 0.1) {
            // clipping collapsed it; fall back to an axis-aligned stub
            w.b = {clip_x(w.a.x + 0.2), w.a.y};
            if (w.length() < 0.1) {
                w.b = {clip_x(w.a.x - 0.2), w.a.y};
            }
        }
        scene.walls.push_back(w);
    }
    scene.validate();
    return scene;
}

void to_json(nlohmann::json& j, const Scene& s) {
    nlohmann::json walls = nlohmann::json::array();
    for (const Wall& w : s.walls) {
        walls.push_back({{"a", {w.a.x, w.a.y}}, {"b", {w.b.x, w.b.y}}, {"z", {w.z_min, w.z_max}},
                         {"texture_id", w.texture_id}});
    }
    j = {{"walls", walls},
         {"floor", s.floor},
         {"ceiling", s.ceiling},
         {"ceiling_height", s.ceiling_height},
         {"max_range", s.max_range},
         {"rng_seed", s.rng_seed}};
}

void from_json(const nlohmann::json& j, Scene& s) {
    s = Scene{};
    for (const auto& jw : j.at("walls")) {
        Wall w;
        w.a = {jw.at("a").at(0).get<double>(), jw.at("a").at(1).get<double>()};
        w.b = {jw.at("b").at(0).get<double>(), jw.at("b").at(1).get<double>()};
        if (jw.contains("z")) {
            w.z_min = jw["z"].at(0).get<double>();
            w.z_max = jw["z"].at(1).get<double>();
        }
        w.texture_id = jw.value("texture_id", 0);
        s.walls.push_back(w);
    }
    s.floor = j.value("floor", true);
    s.ceiling = j.value("ceiling", true);
    s.ceiling_height = j.value("ceiling_height", 2.5);
    s.max_range = j.value("max_range", 20.0);
    s.rng_seed = j.value("rng_seed", std::uint64_t{0});
    s.validate();
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open scene file: " + path);
    }
    return nlohmann::json::parse(in).get<Scene>();
}

void save_scene(const Scene& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write scene file: " + path);
    }
    out << nlohmann::json(s).dump(2) << '\n';
}

}  // namespace lvs
