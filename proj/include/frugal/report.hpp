#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "frugal/frugality.hpp"
#include "frugal/pareto.hpp"

namespace frugal {

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 860;
    int height = 540;
    bool y_log10 = false;
    std::vector<std::string> legend;  // optional; must be unique when set
};

struct Rgb {
    int r = 0, g = 0, b = 0;
};

struct ColorStop {
    double value = 0.0;
    Rgb color;
};

struct HeatmapSpec {
    std::vector<std::string> row_order;  // dataset ids, dendrogram leaf order
    std::vector<std::string> col_order;  // algorithm ids, Pareto column order
    std::vector<ColorStop> color_stops;  // monotone in score
    std::string title;
    int cell_size = 12;

    // white -> yellow -> red over [-1, 1]
    static std::vector<ColorStop> default_stops();
};

Rgb interpolate_color(const std::vector<ColorStop>& stops, double value);

// One polyline per curve plus dashed vertical markers at every pairwise
// crossing inside the plotted range. Curves must share one w grid.
std::string emit_curves(std::span<const FrugalityCurve> curves, const PlotSpec& spec,
                        bool mark_crossings = true);

// Dominated points hollow, front points filled and connected in time order.
std::string emit_pareto(std::span<const ParetoPoint> points, const ParetoFront& front,
                        const PlotSpec& spec);

// scores is indexed [dataset][algorithm] in the matrix's own axis order; the
// spec's row/col orders select the drawing order.
std::string emit_heatmap(const Eigen::MatrixXd& scores,
                         const std::vector<std::string>& dataset_ids,
                         const std::vector<std::string>& algorithm_ids,
                         const HeatmapSpec& spec);

// Labelled scatter of 2-D coordinates, one color per group label.
std::string emit_scatter(const Eigen::MatrixXd& coords, std::span<const int> groups,
                         const PlotSpec& spec);

}  // namespace frugal
