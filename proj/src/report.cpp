#include "frugal/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "frugal/text.hpp"

namespace frugal {

namespace {

// SVG coordinates are rounded to 4 significant digits for byte stability.
std::string px(double v) { return fmt_double(v, 4); }

constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* palette(std::size_t i) { return kPalette[i % kPalette.size()]; }

struct Margins {
    double left = 64, right = 16, top = 36, bottom = 46;
};

struct Axis {
    double lo = 0.0, hi = 1.0;  // data range
    double p0 = 0.0, p1 = 1.0;  // pixel range

    double map(double v) const {
        if (hi == lo) return (p0 + p1) / 2.0;
        return p0 + (v - lo) / (hi - lo) * (p1 - p0);
    }
};

void pad_range(double& lo, double& hi) {
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    } else {
        const double pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
    }
}

std::string svg_open(const PlotSpec& spec) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
           "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " +
           std::to_string(spec.width) + " " + std::to_string(spec.height) + "\">\n";
    out += "<rect width=\"" + std::to_string(spec.width) + "\" height=\"" +
           std::to_string(spec.height) + "\" fill=\"#ffffff\"/>\n";
    if (!spec.title.empty())
        out += "<text x=\"" + px(spec.width / 2.0) +
               "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"14\">" +
               xml_escape(spec.title) + "</text>\n";
    return out;
}

std::string axes_frame(const PlotSpec& spec, const Margins& m, const Axis& x, const Axis& y,
                       bool y_log10) {
    std::string out;
    const double x0 = m.left, x1 = spec.width - m.right;
    const double y0 = spec.height - m.bottom, y1 = m.top;
    out += "<g stroke=\"#333333\" stroke-width=\"1\">\n";
    out += "<line x1=\"" + px(x0) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(x1) + "\" y2=\"" +
           px(y0) + "\"/>\n";
    out += "<line x1=\"" + px(x0) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(x0) + "\" y2=\"" +
           px(y1) + "\"/>\n";
    out += "</g>\n";
    out += "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#333333\">\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x.lo + (x.hi - x.lo) * t / 4.0;
        const double fy = y.lo + (y.hi - y.lo) * t / 4.0;
        out += "<text x=\"" + px(x.map(fx)) + "\" y=\"" + px(y0 + 14) +
               "\" text-anchor=\"middle\">" + fmt_double(fx, 4) + "</text>\n";
        const std::string y_label =
            y_log10 ? "1e" + fmt_double(fy, 4) : fmt_double(fy, 4);
        out += "<text x=\"" + px(x0 - 6) + "\" y=\"" + px(y.map(fy) + 3) +
               "\" text-anchor=\"end\">" + y_label + "</text>\n";
    }
    if (!spec.x_label.empty())
        out += "<text x=\"" + px((x0 + x1) / 2.0) + "\" y=\"" + px(spec.height - 10.0) +
               "\" text-anchor=\"middle\" font-size=\"12\">" + xml_escape(spec.x_label) +
               "</text>\n";
    if (!spec.y_label.empty())
        out += "<text x=\"14\" y=\"" + px((y0 + y1) / 2.0) +
               "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " +
               px((y0 + y1) / 2.0) + ")\">" + xml_escape(spec.y_label) + "</text>\n";
    out += "</g>\n";
    return out;
}

void check_legend(const std::vector<std::string>& entries) {
    std::set<std::string> seen;
    for (const auto& entry : entries)
        if (!seen.insert(entry).second)
            throw Error(ErrorKind::argument, "legend entries must be unique: '" + entry + "'");
}

}  // namespace

std::vector<ColorStop> HeatmapSpec::default_stops() {
    return {{-1.0, {255, 255, 255}}, {0.0, {255, 204, 0}}, {1.0, {204, 0, 0}}};
}

Rgb interpolate_color(const std::vector<ColorStop>& stops, double value) {
    if (stops.empty()) throw Error(ErrorKind::argument, "color stops must be nonempty");
    if (value <= stops.front().value) return stops.front().color;
    if (value >= stops.back().value) return stops.back().color;
    for (std::size_t i = 1; i < stops.size(); ++i) {
        if (value <= stops[i].value) {
            const double span = stops[i].value - stops[i - 1].value;
            const double t = span > 0.0 ? (value - stops[i - 1].value) / span : 1.0;
            auto lerp = [t](int a, int b) {
                return static_cast<int>(std::lround(a + t * (b - a)));
            };
            return {lerp(stops[i - 1].color.r, stops[i].color.r),
                    lerp(stops[i - 1].color.g, stops[i].color.g),
                    lerp(stops[i - 1].color.b, stops[i].color.b)};
        }
    }
    return stops.back().color;
}

namespace {

std::string hex_color(const Rgb& c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

}  // namespace

std::string emit_curves(std::span<const FrugalityCurve> curves, const PlotSpec& spec,
                        bool mark_crossings) {
    if (curves.empty()) throw Error(ErrorKind::argument, "emit_curves: no curves");
    const auto& grid = curves.front().points;
    if (grid.empty()) throw Error(ErrorKind::argument, "emit_curves: empty w grid");
    for (const auto& curve : curves) {
        if (curve.points.size() != grid.size())
            throw Error(ErrorKind::argument, "emit_curves: curves do not share one w grid");
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (curve.points[i].w != grid[i].w)
                throw Error(ErrorKind::argument, "emit_curves: curves do not share one w grid");
    }
    std::vector<std::string> legend = spec.legend;
    if (legend.empty())
        for (const auto& curve : curves) legend.push_back(curve.algorithm_id);
    check_legend(legend);

    Margins m;
    double y_lo = curves[0].points[0].score, y_hi = y_lo;
    for (const auto& curve : curves)
        for (const auto& pt : curve.points) {
            y_lo = std::min(y_lo, pt.score);
            y_hi = std::max(y_hi, pt.score);
        }
    pad_range(y_lo, y_hi);
    const double w_lo = grid.front().w;
    const double w_hi = grid.back().w;
    Axis x{w_lo, w_hi, m.left, spec.width - m.right};
    if (x.hi == x.lo) x.hi = x.lo + 1.0;
    Axis y{y_lo, y_hi, spec.height - m.bottom, m.top};

    std::string out = svg_open(spec);
    out += axes_frame(spec, m, x, y, false);

    if (mark_crossings) {
        std::vector<double> marks;
        for (std::size_t i = 0; i < curves.size(); ++i)
            for (std::size_t j = i + 1; j < curves.size(); ++j)
                if (auto w = crossing_w_lines(curves[i], curves[j]);
                    w && *w >= w_lo && *w <= w_hi)
                    marks.push_back(*w);
        std::sort(marks.begin(), marks.end());
        for (double w : marks)
            out += "<line class=\"crossing\" x1=\"" + px(x.map(w)) + "\" y1=\"" +
                   px(y.map(y.lo)) + "\" x2=\"" + px(x.map(w)) + "\" y2=\"" + px(y.map(y.hi)) +
                   "\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
    }

    for (std::size_t i = 0; i < curves.size(); ++i) {
        std::string pts;
        for (const auto& pt : curves[i].points) {
            if (!pts.empty()) pts += " ";
            pts += px(x.map(pt.w)) + "," + px(y.map(pt.score));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(palette(i)) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }

    double ly = m.top + 6;
    out += "<g font-family=\"sans-serif\" font-size=\"10\">\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        out += "<rect x=\"" + px(spec.width - m.right - 150.0) + "\" y=\"" + px(ly) +
               "\" width=\"10\" height=\"3\" fill=\"" + std::string(palette(i)) + "\"/>\n";
        out += "<text x=\"" + px(spec.width - m.right - 136.0) + "\" y=\"" + px(ly + 5) + "\">" +
               xml_escape(legend[i]) + "</text>\n";
        ly += 14;
    }
    out += "</g>\n</svg>\n";
    return out;
}

std::string emit_pareto(std::span<const ParetoPoint> points, const ParetoFront& front,
                        const PlotSpec& spec) {
    if (points.empty()) throw Error(ErrorKind::argument, "emit_pareto: no points");
    auto y_value = [&](double time_ms) {
        if (!spec.y_log10) return time_ms;
        if (!(time_ms > 0.0))
            throw Error(ErrorKind::argument,
                        "emit_pareto: non-positive time with a log10 axis");
        return std::log10(time_ms);
    };

    Margins m;
    double x_lo = points[0].auc, x_hi = x_lo;
    double y_lo = y_value(points[0].time_ms), y_hi = y_lo;
    for (const auto& pt : points) {
        x_lo = std::min(x_lo, pt.auc);
        x_hi = std::max(x_hi, pt.auc);
        const double yv = y_value(pt.time_ms);
        y_lo = std::min(y_lo, yv);
        y_hi = std::max(y_hi, yv);
    }
    pad_range(x_lo, x_hi);
    pad_range(y_lo, y_hi);
    Axis x{x_lo, x_hi, m.left, spec.width - m.right};
    Axis y{y_lo, y_hi, spec.height - m.bottom, m.top};

    std::string out = svg_open(spec);
    out += axes_frame(spec, m, x, y, spec.y_log10);

    std::string pts;
    for (const auto& pt : front.points) {
        if (!pts.empty()) pts += " ";
        pts += px(x.map(pt.auc)) + "," + px(y.map(y_value(pt.time_ms)));
    }
    if (front.points.size() > 1)
        out += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"" +
               pts + "\"/>\n";

    for (const auto& pt : points) {
        const bool on_front = front.contains(pt.algorithm_id);
        out += "<circle cx=\"" + px(x.map(pt.auc)) + "\" cy=\"" +
               px(y.map(y_value(pt.time_ms))) + "\" r=\"4\" stroke=\"" +
               (on_front ? "#d62728" : "#1f77b4") + "\" fill=\"" +
               (on_front ? "#d62728" : "none") + "\"><title>" + xml_escape(pt.algorithm_id) +
               "</title></circle>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string emit_heatmap(const Eigen::MatrixXd& scores,
                         const std::vector<std::string>& dataset_ids,
                         const std::vector<std::string>& algorithm_ids,
                         const HeatmapSpec& spec) {
    const auto n_rows = static_cast<std::size_t>(scores.rows());
    const auto n_cols = static_cast<std::size_t>(scores.cols());
    if (dataset_ids.size() != n_rows || algorithm_ids.size() != n_cols)
        throw Error(ErrorKind::argument, "emit_heatmap: ids do not match the score matrix");
    if (spec.color_stops.size() < 2)
        throw Error(ErrorKind::argument, "emit_heatmap: need at least 2 color stops");
    for (std::size_t i = 1; i < spec.color_stops.size(); ++i)
        if (!(spec.color_stops[i].value > spec.color_stops[i - 1].value))
            throw Error(ErrorKind::argument, "emit_heatmap: color stops must be increasing");

    auto permutation = [](const std::vector<std::string>& order,
                          const std::vector<std::string>& axis, const char* what) {
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < axis.size(); ++i) index[axis[i]] = i;
        if (order.size() != axis.size())
            throw Error(ErrorKind::argument,
                        std::string("emit_heatmap: ") + what + " order does not permute the axis");
        std::vector<std::size_t> perm;
        std::set<std::string> seen;
        for (const auto& id : order) {
            const auto it = index.find(id);
            if (it == index.end() || !seen.insert(id).second)
                throw Error(ErrorKind::argument, std::string("emit_heatmap: ") + what +
                                                     " order does not permute the axis");
            perm.push_back(it->second);
        }
        return perm;
    };
    const auto row_perm = permutation(spec.row_order, dataset_ids, "row");
    const auto col_perm = permutation(spec.col_order, algorithm_ids, "column");

    const int cell = spec.cell_size;
    const bool label_rows = n_rows <= 48;
    const bool label_cols = n_cols <= 48;
    const int left = label_rows ? 120 : 8;
    const int top = spec.title.empty() ? 8 : 30;
    const int bottom = label_cols ? 110 : 8;
    const int width = left + cell * static_cast<int>(n_cols) + 8;
    const int height = top + cell * static_cast<int>(n_rows) + bottom;

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) + "\">\n";
    out += "<rect width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(height) +
           "\" fill=\"#ffffff\"/>\n";
    if (!spec.title.empty())
        out += "<text x=\"" + px(width / 2.0) +
               "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"13\">" +
               xml_escape(spec.title) + "</text>\n";

    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            const double score = scores(static_cast<Eigen::Index>(row_perm[r]),
                                        static_cast<Eigen::Index>(col_perm[c]));
            out += "<rect x=\"" + std::to_string(left + cell * static_cast<int>(c)) + "\" y=\"" +
                   std::to_string(top + cell * static_cast<int>(r)) + "\" width=\"" +
                   std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" +
                   hex_color(interpolate_color(spec.color_stops, score)) + "\"/>\n";
        }
    }

    out += "<g font-family=\"sans-serif\" font-size=\"9\" fill=\"#333333\">\n";
    if (label_rows)
        for (std::size_t r = 0; r < n_rows; ++r)
            out += "<text x=\"" + std::to_string(left - 4) + "\" y=\"" +
                   std::to_string(top + cell * static_cast<int>(r) + cell / 2 + 3) +
                   "\" text-anchor=\"end\">" + xml_escape(spec.row_order[r]) + "</text>\n";
    if (label_cols)
        for (std::size_t c = 0; c < n_cols; ++c) {
            const int cx = left + cell * static_cast<int>(c) + cell / 2;
            const int cy = top + cell * static_cast<int>(n_rows) + 8;
            out += "<text x=\"" + std::to_string(cx) + "\" y=\"" + std::to_string(cy) +
                   "\" text-anchor=\"end\" transform=\"rotate(-60 " + std::to_string(cx) + " " +
                   std::to_string(cy) + ")\">" + xml_escape(spec.col_order[c]) + "</text>\n";
        }
    out += "</g>\n</svg>\n";
    return out;
}

std::string emit_scatter(const Eigen::MatrixXd& coords, std::span<const int> groups,
                         const PlotSpec& spec) {
    if (coords.rows() == 0 || coords.cols() < 2)
        throw Error(ErrorKind::argument, "emit_scatter: need n x 2 coordinates");
    if (!groups.empty() && groups.size() != static_cast<std::size_t>(coords.rows()))
        throw Error(ErrorKind::argument, "emit_scatter: group labels do not match points");

    Margins m;
    double x_lo = coords(0, 0), x_hi = x_lo, y_lo = coords(0, 1), y_hi = y_lo;
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        x_lo = std::min(x_lo, coords(i, 0));
        x_hi = std::max(x_hi, coords(i, 0));
        y_lo = std::min(y_lo, coords(i, 1));
        y_hi = std::max(y_hi, coords(i, 1));
    }
    pad_range(x_lo, x_hi);
    pad_range(y_lo, y_hi);
    Axis x{x_lo, x_hi, m.left, spec.width - m.right};
    Axis y{y_lo, y_hi, spec.height - m.bottom, m.top};

    std::string out = svg_open(spec);
    out += axes_frame(spec, m, x, y, false);
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        const std::size_t group =
            groups.empty() ? 0 : static_cast<std::size_t>(std::max(0, groups[static_cast<std::size_t>(i)]));
        out += "<circle cx=\"" + px(x.map(coords(i, 0))) + "\" cy=\"" + px(y.map(coords(i, 1))) +
               "\" r=\"3\" fill=\"" + std::string(palette(group)) + "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace frugal
