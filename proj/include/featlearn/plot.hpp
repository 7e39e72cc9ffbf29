#ifndef FEATLEARN_PLOT_HPP
#define FEATLEARN_PLOT_HPP

#include <optional>
#include <string>
#include <vector>

#include "featlearn/autoencoder.hpp"
#include "featlearn/dataset.hpp"
#include "featlearn/error.hpp"
#include "featlearn/pca.hpp"

namespace featlearn {

enum class PlotKind { Histogram, Line, LineWithBand };

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Band {
    std::vector<double> lower; // y - se
    std::vector<double> upper; // y + se
};

struct PlotSpec {
    PlotKind kind = PlotKind::Line;
    std::vector<Series> series;
    std::optional<Band> band; // only for LineWithBand, aligned with series[0]
    std::string x_label;
    std::string y_label;
    std::string title;
};

// Renders an 800x600 SVG with fixed styling; identical specs produce
// byte-identical files.
std::string render_svg(const PlotSpec& spec);

void render_plot(const PlotSpec& spec, const std::string& path);

PlotSpec histogram_spec(const Histogram& h, const std::string& title, const std::string& x_label);

// Gap curve with its +/- se band over k.
PlotSpec gap_plot_spec(const GapReport& report, const std::string& title);

// Validation RMSE over hidden-unit counts at the winning weight decay.
PlotSpec val_rmse_plot_spec(const GridSearchResult& result);

} // namespace featlearn

#endif
