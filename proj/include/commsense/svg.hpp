#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "commsense/error.hpp"
#include "commsense/iq.hpp"

namespace commsense {

/// Fixed series palette shared by every plot.
inline const std::vector<std::string>& plot_palette() {
    static const std::vector<std::string> colors = {
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
        "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
        "#bcbd22", "#17becf"};
    return colors;
}

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

/// Maps data coordinates into one plot rectangle (SVG y grows downward).
struct PlotBox {
    double x0, y0, w, h;      // pixel rectangle
    double xmin, xmax, ymin, ymax;

    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }

    void frame(std::string& out, const std::string& x_label, const std::string& y_label) const {
        out += "<rect x=\"" + svg_num(x0) + "\" y=\"" + svg_num(y0) + "\" width=\"" + svg_num(w) +
               "\" height=\"" + svg_num(h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + svg_num(x0 + w / 2) + "\" y=\"" + svg_num(y0 + h + 32) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + svg_escape(x_label) + "</text>\n";
        out += "<text x=\"" + svg_num(x0 - 34) + "\" y=\"" + svg_num(y0 + h / 2) +
               "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 " +
               svg_num(x0 - 34) + " " + svg_num(y0 + h / 2) + ")\">" + svg_escape(y_label) +
               "</text>\n";
        out += "<text x=\"" + svg_num(x0 - 4) + "\" y=\"" + svg_num(y0 + h + 14) +
               "\" font-size=\"10\" text-anchor=\"start\">" + svg_tick(xmin) + "</text>\n";
        out += "<text x=\"" + svg_num(x0 + w) + "\" y=\"" + svg_num(y0 + h + 14) +
               "\" font-size=\"10\" text-anchor=\"end\">" + svg_tick(xmax) + "</text>\n";
        out += "<text x=\"" + svg_num(x0 - 6) + "\" y=\"" + svg_num(y0 + h) +
               "\" font-size=\"10\" text-anchor=\"end\">" + svg_tick(ymin) + "</text>\n";
        out += "<text x=\"" + svg_num(x0 - 6) + "\" y=\"" + svg_num(y0 + 10) +
               "\" font-size=\"10\" text-anchor=\"end\">" + svg_tick(ymax) + "</text>\n";
    }
};

inline void svg_write(const std::filesystem::path& path, int width, int height,
                      const std::string& title, const std::string& body) {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(width) + "\" height=\"" + std::to_string(height) +
                      "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                      std::to_string(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + std::to_string(width / 2) +
           "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\" font-weight=\"bold\">" +
           svg_escape(title) + "</text>\n";
    out += body;
    out += "</svg>\n";
    write_file_bytes(path, out);
}

} // namespace detail

/// One named, colored data series.
struct PlotSeries {
    std::string name;
    std::string color;
    std::vector<double> xs;
    std::vector<double> ys;  // unused by histograms
};

/// Step-outline histogram of values in [lo, hi], one outline per series.
inline void write_histogram_svg(const std::filesystem::path& path, const std::string& title,
                                const std::vector<PlotSeries>& series, const std::string& x_label,
                                double lo = 0.0, double hi = 1.0, int bins = 50) {
    if (bins < 1 || !(hi > lo)) throw DomainError("write_histogram_svg: bad bin layout");
    std::vector<std::vector<double>> counts(series.size(), std::vector<double>(bins, 0.0));
    double peak = 1.0;
    for (std::size_t s = 0; s < series.size(); ++s) {
        for (double v : series[s].xs) {
            int b = static_cast<int>((v - lo) / (hi - lo) * bins);
            b = std::clamp(b, 0, bins - 1);
            counts[s][static_cast<std::size_t>(b)] += 1.0;
        }
        for (double c : counts[s]) peak = std::max(peak, c);
    }

    detail::PlotBox box{60, 40, 560, 320, lo, hi, 0.0, peak * 1.05};
    std::string body;
    box.frame(body, x_label, "count");
    for (std::size_t s = 0; s < series.size(); ++s) {
        std::string pts;
        pts += detail::svg_num(box.px(lo)) + "," + detail::svg_num(box.py(0.0)) + " ";
        for (int b = 0; b < bins; ++b) {
            const double x0 = lo + (hi - lo) * b / bins;
            const double x1 = lo + (hi - lo) * (b + 1) / bins;
            const double y = counts[s][static_cast<std::size_t>(b)];
            pts += detail::svg_num(box.px(x0)) + "," + detail::svg_num(box.py(y)) + " ";
            pts += detail::svg_num(box.px(x1)) + "," + detail::svg_num(box.py(y)) + " ";
        }
        pts += detail::svg_num(box.px(hi)) + "," + detail::svg_num(box.py(0.0));
        body += "<polyline fill=\"none\" stroke=\"" + series[s].color +
                "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        body += "<text x=\"630\" y=\"" + detail::svg_num(50.0 + 16.0 * s) +
                "\" font-size=\"11\" fill=\"" + series[s].color + "\">" +
                detail::svg_escape(series[s].name) + "</text>\n";
    }
    detail::svg_write(path, 760, 420, title, body);
}

/// One scatter panel: series share axes, drawn as small dots.
struct ScatterPanel {
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

/// Row of scatter panels (pairwise feature views).
inline void write_scatter_svg(const std::filesystem::path& path, const std::string& title,
                              const std::vector<ScatterPanel>& panels) {
    if (panels.empty()) throw DomainError("write_scatter_svg: no panels");
    const double panel_w = 300, panel_h = 300, gap = 70;
    std::string body;
    for (std::size_t p = 0; p < panels.size(); ++p) {
        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool first = true;
        for (const auto& s : panels[p].series)
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (first) {
                    xmin = xmax = s.xs[i];
                    ymin = ymax = s.ys[i];
                    first = false;
                }
                xmin = std::min(xmin, s.xs[i]);
                xmax = std::max(xmax, s.xs[i]);
                ymin = std::min(ymin, s.ys[i]);
                ymax = std::max(ymax, s.ys[i]);
            }
        const double xpad = (xmax - xmin) * 0.05 + 1e-12;
        const double ypad = (ymax - ymin) * 0.05 + 1e-12;
        detail::PlotBox box{60 + p * (panel_w + gap), 40, panel_w, panel_h,
                            xmin - xpad, xmax + xpad, ymin - ypad, ymax + ypad};
        box.frame(body, panels[p].x_label, panels[p].y_label);
        for (const auto& s : panels[p].series)
            for (std::size_t i = 0; i < s.xs.size(); ++i)
                body += "<circle cx=\"" + detail::svg_num(box.px(s.xs[i])) + "\" cy=\"" +
                        detail::svg_num(box.py(s.ys[i])) + "\" r=\"1.4\" fill=\"" + s.color +
                        "\" fill-opacity=\"0.55\"/>\n";
    }
    // Legend along the bottom edge.
    for (std::size_t s = 0; s < panels[0].series.size(); ++s)
        body += "<text x=\"" + detail::svg_num(60.0 + 110.0 * s) +
                "\" y=\"395\" font-size=\"11\" fill=\"" + panels[0].series[s].color + "\">" +
                detail::svg_escape(panels[0].series[s].name) + "</text>\n";
    const int width = static_cast<int>(60 + panels.size() * (panel_w + gap));
    detail::svg_write(path, width, 420, title, body);
}

/// Plain multi-series line chart.
inline void write_curves_svg(const std::filesystem::path& path, const std::string& title,
                             const std::vector<PlotSeries>& curves, const std::string& x_label,
                             const std::string& y_label) {
    if (curves.empty()) throw DomainError("write_curves_svg: no curves");
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.xs.size(); ++i) {
            if (first) {
                xmin = xmax = c.xs[i];
                ymin = ymax = c.ys[i];
                first = false;
            }
            xmin = std::min(xmin, c.xs[i]);
            xmax = std::max(xmax, c.xs[i]);
            ymin = std::min(ymin, c.ys[i]);
            ymax = std::max(ymax, c.ys[i]);
        }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    detail::PlotBox box{60, 40, 560, 320, xmin, xmax, ymin, ymax * 1.02};
    std::string body;
    box.frame(body, x_label, y_label);
    for (std::size_t c = 0; c < curves.size(); ++c) {
        std::string pts;
        for (std::size_t i = 0; i < curves[c].xs.size(); ++i)
            pts += detail::svg_num(box.px(curves[c].xs[i])) + "," +
                   detail::svg_num(box.py(curves[c].ys[i])) + " ";
        body += "<polyline fill=\"none\" stroke=\"" + curves[c].color +
                "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        body += "<text x=\"630\" y=\"" + detail::svg_num(50.0 + 16.0 * c) +
                "\" font-size=\"11\" fill=\"" + curves[c].color + "\">" +
                detail::svg_escape(curves[c].name) + "</text>\n";
    }
    detail::svg_write(path, 760, 420, title, body);
}

} // namespace commsense
