#include "featlearn/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace featlearn {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 25.0;
constexpr double kMarginTop = 45.0;
constexpr double kMarginBottom = 55.0;

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

// fixed-precision rendering keeps output byte-stable
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void expand(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (lo > hi) {
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

struct Mapper {
    Range xr;
    Range yr;

    double x(double v) const {
        return kMarginLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kWidth - kMarginLeft - kMarginRight);
    }
    double y(double v) const {
        return kHeight - kMarginBottom -
               (v - yr.lo) / (yr.hi - yr.lo) * (kHeight - kMarginTop - kMarginBottom);
    }
};

void draw_axes(std::ostringstream& svg, const Mapper& m, const PlotSpec& spec) {
    svg << "<rect x=\"" << fmt(kMarginLeft) << "\" y=\"" << fmt(kMarginTop) << "\" width=\""
        << fmt(kWidth - kMarginLeft - kMarginRight) << "\" height=\""
        << fmt(kHeight - kMarginTop - kMarginBottom)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    constexpr int kTicks = 5;
    for (int t = 0; t <= kTicks; ++t) {
        const double fx = m.xr.lo + (m.xr.hi - m.xr.lo) * t / kTicks;
        const double px = m.x(fx);
        svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kHeight - kMarginBottom) << "\" x2=\""
            << fmt(px) << "\" y2=\"" << fmt(kHeight - kMarginBottom + 5.0)
            << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kHeight - kMarginBottom + 20.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
            << fmt_tick(fx) << "</text>\n";

        const double fy = m.yr.lo + (m.yr.hi - m.yr.lo) * t / kTicks;
        const double py = m.y(fy);
        svg << "<line x1=\"" << fmt(kMarginLeft - 5.0) << "\" y1=\"" << fmt(py) << "\" x2=\""
            << fmt(kMarginLeft) << "\" y2=\"" << fmt(py)
            << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(kMarginLeft - 9.0) << "\" y=\"" << fmt(py + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << fmt_tick(fy)
            << "</text>\n";
    }

    if (!spec.title.empty()) {
        svg << "<text x=\"" << fmt(kWidth / 2.0) << "\" y=\"" << fmt(kMarginTop - 18.0)
            << "\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">"
            << escape_xml(spec.title) << "</text>\n";
    }
    if (!spec.x_label.empty()) {
        svg << "<text x=\"" << fmt(kWidth / 2.0) << "\" y=\"" << fmt(kHeight - 12.0)
            << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
            << escape_xml(spec.x_label) << "</text>\n";
    }
    if (!spec.y_label.empty()) {
        svg << "<text x=\"18\" y=\"" << fmt(kHeight / 2.0)
            << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\""
            << " transform=\"rotate(-90 18 " << fmt(kHeight / 2.0) << ")\">"
            << escape_xml(spec.y_label) << "</text>\n";
    }
}

void validate(const PlotSpec& spec) {
    if (spec.series.empty()) {
        throw Error(errc::empty_series, "plot spec has no series");
    }
    for (const Series& s : spec.series) {
        if (s.x.empty() || s.x.size() != s.y.size()) {
            throw Error(errc::empty_series, "series '" + s.name + "' is empty or unaligned");
        }
    }
    if (spec.band) {
        if (spec.kind != PlotKind::LineWithBand) {
            throw Error(errc::bad_config, "band is only valid for line-with-band plots");
        }
        if (spec.band->lower.size() != spec.series[0].x.size() ||
            spec.band->upper.size() != spec.series[0].x.size()) {
            throw Error(errc::length_mismatch, "band length does not match series");
        }
    }
}

} // namespace

std::string render_svg(const PlotSpec& spec) {
    validate(spec);

    Mapper m;
    for (const Series& s : spec.series) {
        for (const double v : s.x) m.xr.expand(v);
        for (const double v : s.y) m.yr.expand(v);
    }
    if (spec.band) {
        for (const double v : spec.band->lower) m.yr.expand(v);
        for (const double v : spec.band->upper) m.yr.expand(v);
    }
    if (spec.kind == PlotKind::Histogram) m.yr.expand(0.0);
    m.xr.pad();
    m.yr.pad();

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
    draw_axes(svg, m, spec);

    if (spec.kind == PlotKind::Histogram) {
        // series[0]: x holds bin left edges plus a final right edge sentinel
        // handled by histogram_spec; here x/y are bin centers and counts.
        const Series& s = spec.series[0];
        const double base = m.y(0.0);
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double half = s.x.size() > 1
                                    ? (m.x(s.x[1]) - m.x(s.x[0])) / 2.0
                                    : (kWidth - kMarginLeft - kMarginRight) / 2.0;
            const double cx = m.x(s.x[i]);
            const double top = m.y(s.y[i]);
            svg << "<rect x=\"" << fmt(cx - half) << "\" y=\"" << fmt(std::min(top, base))
                << "\" width=\"" << fmt(2.0 * half) << "\" height=\"" << fmt(std::abs(base - top))
                << "\" fill=\"#4c78a8\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n";
        }
    } else {
        if (spec.band) {
            const Series& s = spec.series[0];
            std::ostringstream points;
            for (std::size_t i = 0; i < s.x.size(); ++i)
                points << fmt(m.x(s.x[i])) << ',' << fmt(m.y(spec.band->upper[i])) << ' ';
            for (std::size_t i = s.x.size(); i-- > 0;)
                points << fmt(m.x(s.x[i])) << ',' << fmt(m.y(spec.band->lower[i])) << ' ';
            std::string pts = points.str();
            if (!pts.empty()) pts.pop_back();
            svg << "<polygon points=\"" << pts << "\" fill=\"#aec7e8\" fill-opacity=\"0.5\" "
                   "stroke=\"none\"/>\n";
        }
        for (std::size_t si = 0; si < spec.series.size(); ++si) {
            const Series& s = spec.series[si];
            std::ostringstream points;
            for (std::size_t i = 0; i < s.x.size(); ++i)
                points << fmt(m.x(s.x[i])) << ',' << fmt(m.y(s.y[i])) << ' ';
            std::string pts = points.str();
            if (!pts.empty()) pts.pop_back();
            svg << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\""
                << kSeriesColors[si % 4] << "\" stroke-width=\"1.5\"/>\n";
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

void render_plot(const PlotSpec& spec, const std::string& path) {
    const std::string svg = render_svg(spec);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(errc::missing_file, "cannot write '" + path + "'");
    }
    out << svg;
}

PlotSpec histogram_spec(const Histogram& h, const std::string& title, const std::string& x_label) {
    PlotSpec spec;
    spec.kind = PlotKind::Histogram;
    spec.title = title;
    spec.x_label = x_label;
    spec.y_label = "count";
    Series s;
    s.name = "counts";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        s.x.push_back((h.bin_edges[i] + h.bin_edges[i + 1]) / 2.0);
        s.y.push_back(static_cast<double>(h.counts[i]));
    }
    spec.series.push_back(std::move(s));
    return spec;
}

PlotSpec gap_plot_spec(const GapReport& report, const std::string& title) {
    PlotSpec spec;
    spec.kind = PlotKind::LineWithBand;
    spec.title = title;
    spec.x_label = "number of principal components";
    spec.y_label = "gap";
    Series s;
    s.name = "gap";
    Band band;
    for (std::size_t i = 0; i < report.gap.size(); ++i) {
        s.x.push_back(static_cast<double>(i + 1));
        s.y.push_back(report.gap[i]);
        band.lower.push_back(report.gap[i] - report.se[i]);
        band.upper.push_back(report.gap[i] + report.se[i]);
    }
    spec.series.push_back(std::move(s));
    spec.band = std::move(band);
    return spec;
}

PlotSpec val_rmse_plot_spec(const GridSearchResult& result) {
    PlotSpec spec;
    spec.kind = PlotKind::Line;
    spec.title = "validation RMSE vs hidden units";
    spec.x_label = "hidden units";
    spec.y_label = "validation RMSE";
    Series s;
    s.name = "val_rmse";
    for (std::size_t i = 0; i < result.hidden_grid.size(); ++i) {
        s.x.push_back(static_cast<double>(result.hidden_grid[i]));
        s.y.push_back(result.val_rmse_per_hidden[i]);
    }
    spec.series.push_back(std::move(s));
    return spec;
}

} // namespace featlearn
