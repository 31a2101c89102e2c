#include "frugal/frugality.hpp"

#include <algorithm>
#include <cmath>

#include "frugal/text.hpp"

namespace frugal {

double resource_total(double train_ms, double test_ms) {
    if (!(train_ms >= 0.0) || !(test_ms >= 0.0))
        throw Error(ErrorKind::domain, "resource_total: times must be non-negative");
    return std::max(train_ms + test_ms, 0.001);
}

double ram_hours(double ram_gb, double cpu_hours) {
    if (!(ram_gb >= 0.0) || !(cpu_hours >= 0.0))
        throw Error(ErrorKind::domain, "ram_hours: inputs must be non-negative");
    return ram_gb * cpu_hours;
}

double frug_score(double p, double w, double r) {
    if (!(r > 0.0)) throw Error(ErrorKind::domain, "frug_score: R must be positive");
    return p - w / (1.0 + 1.0 / r);
}

double resource_weight(double r) {
    if (!(r > 0.0)) throw Error(ErrorKind::domain, "resource_weight: R must be positive");
    return r / (1.0 + r);
}

double a3r(double sr_j, double sr_ref, double t_j, double t_ref, long n) {
    if (!(sr_j > 0.0) || !(sr_ref > 0.0) || !(t_j > 0.0) || !(t_ref > 0.0) || n < 1)
        throw Error(ErrorKind::domain, "a3r: all inputs must be strictly positive");
    return (sr_j / sr_ref) / std::pow(t_j / t_ref, 1.0 / static_cast<double>(n));
}

double a3r_prime(double sr, double t, long n) {
    if (!(sr > 0.0) || !(t > 0.0) || n < 1)
        throw Error(ErrorKind::domain, "a3r_prime: all inputs must be strictly positive");
    return sr / std::pow(t, 1.0 / static_cast<double>(n));
}

namespace {

void check_grid(std::span<const double> w_grid) {
    if (w_grid.empty())
        throw Error(ErrorKind::argument, "frugality_curve: w grid must be nonempty");
    for (std::size_t i = 1; i < w_grid.size(); ++i)
        if (w_grid[i] < w_grid[i - 1])
            throw Error(ErrorKind::argument, "frugality_curve: w grid must be ascending");
}

}  // namespace

FrugalityCurve frugality_curve(double p, double r, std::span<const double> w_grid) {
    check_grid(w_grid);
    FrugalityCurve curve;
    curve.intercept = p;
    curve.slope = -resource_weight(r);
    curve.points.reserve(w_grid.size());
    for (double w : w_grid) curve.points.push_back({w, frug_score(p, w, r)});
    return curve;
}

FrugalityCurve curve_from_line(double intercept, double slope, std::span<const double> w_grid) {
    check_grid(w_grid);
    FrugalityCurve curve;
    curve.intercept = intercept;
    curve.slope = slope;
    curve.points.reserve(w_grid.size());
    for (double w : w_grid) curve.points.push_back({w, intercept + slope * w});
    return curve;
}

std::optional<double> crossing_w(double p_a, double r_a, double p_b, double r_b) {
    const double c_a = resource_weight(r_a);
    const double c_b = resource_weight(r_b);
    if (c_a == c_b) return std::nullopt;
    const double w = (p_a - p_b) / (c_a - c_b);
    if (w < 0.0) return std::nullopt;
    return w;
}

std::optional<double> crossing_w_lines(const FrugalityCurve& a, const FrugalityCurve& b) {
    if (a.slope == b.slope) return std::nullopt;
    const double w = (a.intercept - b.intercept) / (b.slope - a.slope);
    if (w < 0.0) return std::nullopt;
    return w;
}

double zero_crossing_w(double p, double r) {
    if (!(p > 0.0) || !(r > 0.0))
        throw Error(ErrorKind::domain, "zero_crossing_w: P and R must be positive");
    return p * (1.0 + r) / r;
}

RankTable rank_algorithms(const EvalMatrix& matrix, double w) {
    if (!matrix.complete())
        throw Error(ErrorKind::precondition,
                    "rank_algorithms: matrix has unobserved cells; impute it first");
    RankTable table;
    table.w = w;
    table.rows.reserve(static_cast<std::size_t>(matrix.cols()));
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        double sum = 0.0;
        for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
            const double res = resource_total(matrix.train_ms(r, c), matrix.test_ms(r, c));
            sum += frug_score(matrix.auc(r, c), w, res);
        }
        table.rows.push_back({matrix.algorithms[static_cast<std::size_t>(c)],
                              sum / static_cast<double>(matrix.rows())});
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const RankRow& a, const RankRow& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.algorithm_id < b.algorithm_id;
    });
    return table;
}

std::vector<FrugalityCurve> averaged_curves(const EvalMatrix& matrix,
                                            std::span<const double> w_grid) {
    if (!matrix.complete())
        throw Error(ErrorKind::precondition,
                    "averaged_curves: matrix has unobserved cells; impute it first");
    std::vector<FrugalityCurve> curves;
    curves.reserve(static_cast<std::size_t>(matrix.cols()));
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        double p_sum = 0.0;
        double c_sum = 0.0;
        for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
            p_sum += matrix.auc(r, c);
            c_sum += resource_weight(resource_total(matrix.train_ms(r, c), matrix.test_ms(r, c)));
        }
        const double n = static_cast<double>(matrix.rows());
        FrugalityCurve curve = curve_from_line(p_sum / n, -c_sum / n, w_grid);
        curve.algorithm_id = matrix.algorithms[static_cast<std::size_t>(c)];
        curves.push_back(std::move(curve));
    }
    return curves;
}

std::string rank_table_csv(const RankTable& table) {
    std::string out = "rank,algorithm_id,score\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        out += std::to_string(i + 1) + "," + table.rows[i].algorithm_id + "," +
               fmt_double(table.rows[i].score) + "\n";
    return out;
}

nlohmann::json rank_table_json(const RankTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        rows.push_back({{"rank", i + 1},
                        {"algorithm_id", table.rows[i].algorithm_id},
                        {"score", table.rows[i].score}});
    }
    return nlohmann::json{{"w", table.w}, {"rows", rows}};
}

std::string curves_csv(std::span<const FrugalityCurve> curves) {
    std::string out = "algorithm_id,w,score\n";
    for (const auto& curve : curves)
        for (const auto& pt : curve.points)
            out += curve.algorithm_id + "," + fmt_double(pt.w) + "," + fmt_double(pt.score) + "\n";
    return out;
}

}  // namespace frugal
