#include "lvs/bench/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace lvs::bench {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 48.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Box {
    double x0 = std::numeric_limits<double>::infinity();
    double y0 = std::numeric_limits<double>::infinity();
    double x1 = -std::numeric_limits<double>::infinity();
    double y1 = -std::numeric_limits<double>::infinity();

    void add(double x, double y) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
    }
    void pad() {
        const double span = std::max({x1 - x0, y1 - y0, 1e-9});
        if (x1 - x0 < 1e-9) { x0 -= 0.5 * span; x1 += 0.5 * span; }
        if (y1 - y0 < 1e-9) { y0 -= 0.5 * span; y1 += 0.5 * span; }
        const double m = 0.05 * std::max(x1 - x0, y1 - y0);
        x0 -= m; x1 += m; y0 -= m; y1 += m;
    }
};

// Maps data coordinates to the drawing area; y grows upwards in data space.
struct Frame {
    Box box;
    bool equal_aspect;
    double sx, sy, ox, oy;

    Frame(Box b, bool equal) : box(b), equal_aspect(equal) {
        const double w = kWidth - 2 * kMargin, h = kHeight - 2 * kMargin;
        sx = w / (box.x1 - box.x0);
        sy = h / (box.y1 - box.y0);
        if (equal_aspect) sx = sy = std::min(sx, sy);
        ox = kMargin + 0.5 * (w - sx * (box.x1 - box.x0));
        oy = kMargin + 0.5 * (h - sy * (box.y1 - box.y0));
    }
    double X(double x) const { return ox + sx * (x - box.x0); }
    double Y(double y) const { return kHeight - oy - sy * (y - box.y0); }
};

std::string header(const std::string& title) {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) + "\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + escape(title) + "</text>\n";
    return s;
}

std::string legend(const std::vector<std::string>& labels) {
    std::string s;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = 44.0 + 16.0 * static_cast<double>(i);
        s += "<line x1=\"" + fmt(kWidth - 170) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(kWidth - 150) + "\" y2=\"" +
             fmt(y) + "\" stroke=\"" + kPalette[i % 6] + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + fmt(kWidth - 145) + "\" y=\"" + fmt(y + 4) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(labels[i]) + "</text>\n";
    }
    return s;
}

std::string pose_marker(const Frame& f, const Pose2D& p, const char* color, const char* name) {
    const double x = f.X(p.x), y = f.Y(p.y);
    const double hx = x + 14.0 * std::cos(p.theta), hy = y - 14.0 * std::sin(p.theta);
    std::string s = "<g class=\"" + std::string(name) + "\">";
    s += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"6\" fill=\"" + color + "\"/>";
    s += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(hx) + "\" y2=\"" + fmt(hy) + "\" stroke=\"" +
         color + "\" stroke-width=\"2\"/>";
    s += "</g>\n";
    return s;
}

}  // namespace

std::string render_svg(const TrajectoryPlot& plot) {
    Box box;
    std::size_t points = 0;
    for (const auto& s : plot.series) {
        for (const Pose2D& p : s.poses) box.add(p.x, p.y);
        points += s.poses.size();
    }
    if (points == 0) {
        throw Error("emit_plot: empty trajectory");
    }
    if (plot.start) box.add(plot.start->x, plot.start->y);
    if (plot.goal) box.add(plot.goal->x, plot.goal->y);
    for (const Wall& w : plot.walls) {
        box.add(w.a.x, w.a.y);
        box.add(w.b.x, w.b.y);
    }
    box.pad();
    const Frame f(box, true);
    std::string s = header(plot.title);
    for (const Wall& w : plot.walls) {
        s += "<line x1=\"" + fmt(f.X(w.a.x)) + "\" y1=\"" + fmt(f.Y(w.a.y)) + "\" x2=\"" + fmt(f.X(w.b.x)) +
             "\" y2=\"" + fmt(f.Y(w.b.y)) + "\" stroke=\"#444\" stroke-width=\"3\"/>\n";
    }
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < plot.series.size(); ++i) {
        const auto& ser = plot.series[i];
        if (ser.poses.empty()) continue;
        labels.push_back(ser.label);
        const char* color = kPalette[i % 6];
        if (ser.poses.size() == 1) {
            s += "<circle class=\"point\" cx=\"" + fmt(f.X(ser.poses[0].x)) + "\" cy=\"" + fmt(f.Y(ser.poses[0].y)) +
                 "\" r=\"3\" fill=\"" + color + "\"/>\n";
            continue;
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < ser.poses.size(); ++k) {
            if (k) s += ' ';
            s += fmt(f.X(ser.poses[k].x)) + "," + fmt(f.Y(ser.poses[k].y));
        }
        s += "\"/>\n";
    }
    if (plot.start) s += pose_marker(f, *plot.start, "#2ca02c", "start");
    if (plot.goal) s += pose_marker(f, *plot.goal, "#d62728", "goal");
    s += legend(labels);
    s += "</svg>\n";
    return s;
}

std::string render_svg(const SweepPlot& plot) {
    Box box;
    std::size_t points = 0;
    for (const auto& ser : plot.series) {
        if (ser.x.size() != ser.y.size()) {
            throw Error("emit_plot: sweep series has mismatched x/y lengths");
        }
        for (std::size_t i = 0; i < ser.x.size(); ++i) box.add(ser.x[i], ser.y[i]);
        points += ser.x.size();
    }
    if (points == 0) {
        throw Error("emit_plot: empty sweep");
    }
    box.pad();
    const Frame f(box, false);
    std::string s = header(plot.title);
    // Axes with end labels.
    const double ax0 = f.X(box.x0), ax1 = f.X(box.x1), ay0 = f.Y(box.y0), ay1 = f.Y(box.y1);
    s += "<line x1=\"" + fmt(ax0) + "\" y1=\"" + fmt(ay0) + "\" x2=\"" + fmt(ax1) + "\" y2=\"" + fmt(ay0) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + fmt(ax0) + "\" y1=\"" + fmt(ay0) + "\" x2=\"" + fmt(ax0) + "\" y2=\"" + fmt(ay1) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt((ax0 + ax1) / 2) + "\" y=\"" + fmt(kHeight - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(plot.x_label) + "</text>\n";
    s += "<text x=\"14\" y=\"" + fmt((ay0 + ay1) / 2) + "\" transform=\"rotate(-90 14 " + fmt((ay0 + ay1) / 2) +
         ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(plot.y_label) +
         "</text>\n";
    for (double v : {box.x0, box.x1}) {
        s += "<text x=\"" + fmt(f.X(v)) + "\" y=\"" + fmt(ay0 + 14) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(v) + "</text>\n";
    }
    for (double v : {box.y0, box.y1}) {
        s += "<text x=\"" + fmt(ax0 - 4) + "\" y=\"" + fmt(f.Y(v) + 3) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(v) + "</text>\n";
    }
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < plot.series.size(); ++i) {
        const auto& ser = plot.series[i];
        if (ser.x.empty()) continue;
        labels.push_back(ser.label);
        const char* color = kPalette[i % 6];
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < ser.x.size(); ++k) {
            if (k) s += ' ';
            s += fmt(f.X(ser.x[k])) + "," + fmt(f.Y(ser.y[k]));
        }
        s += "\"/>\n";
        for (std::size_t k = 0; k < ser.x.size(); ++k) {
            s += "<circle cx=\"" + fmt(f.X(ser.x[k])) + "\" cy=\"" + fmt(f.Y(ser.y[k])) + "\" r=\"3\" fill=\"" +
                 color + "\"/>\n";
        }
    }
    s += legend(labels);
    s += "</svg>\n";
    return s;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    out << text;
    if (!out) {
        throw Error("failed writing " + path);
    }
}

void emit_plot(const TrajectoryPlot& plot, const std::string& path) { write_text_file(path, render_svg(plot)); }

void emit_plot(const SweepPlot& plot, const std::string& path) { write_text_file(path, render_svg(plot)); }

}  // namespace lvs::bench
