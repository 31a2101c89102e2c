#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frugal/eval_data.hpp"

namespace frugal {

enum class ResourceKind { cpu_time_ms, ram_hours };

struct FrugalityParams {
    double w = 0.0;  // trade-off weight; [0, 1] is the documented sweep
    ResourceKind resource_kind = ResourceKind::cpu_time_ms;
};

// Combined train+test time in milliseconds, clamped to a 0.001 ms floor so
// the resource term is always non-zero.
double resource_total(double train_ms, double test_ms);

// RAM usage (GB) times CPU time (hours).
double ram_hours(double ram_gb, double cpu_hours);

// P - w / (1 + 1/R); algebraically equal to P - w * sigmoid(log R).
double frug_score(double p, double w, double r);

// Penalty coefficient c = R / (1 + R); the score is P - w*c.
double resource_weight(double r);

// (sr_j / sr_ref) / (t_j / t_ref)^(1/N)
double a3r(double sr_j, double sr_ref, double t_j, double t_ref, long n);

// sr / t^(1/N)
double a3r_prime(double sr, double t, long n);

struct CurvePoint {
    double w = 0.0;
    double score = 0.0;
};

// Frugality score as an affine function of w.
struct FrugalityCurve {
    std::string algorithm_id;
    double intercept = 0.0;  // P
    double slope = 0.0;      // -R/(1+R)
    std::vector<CurvePoint> points;

    double at(double w) const { return intercept + slope * w; }
};

FrugalityCurve frugality_curve(double p, double r, std::span<const double> w_grid);

// Curve defined directly by its affine coefficients; used for dataset-averaged
// curves, whose slope is the mean penalty coefficient rather than -R/(1+R) of
// any single R.
FrugalityCurve curve_from_line(double intercept, double slope, std::span<const double> w_grid);

// w* where the two Eq.-3 lines intersect, if it exists and is >= 0.
std::optional<double> crossing_w(double p_a, double r_a, double p_b, double r_b);
std::optional<double> crossing_w_lines(const FrugalityCurve& a, const FrugalityCurve& b);

// The unique w > 0 where the score reaches zero: P * (1 + R) / R.
double zero_crossing_w(double p, double r);

struct RankRow {
    std::string algorithm_id;
    double score = 0.0;  // mean frugality score across datasets
};

struct RankTable {
    double w = 0.0;
    std::vector<RankRow> rows;  // descending score, ties by algorithm_id
};

// Requires a complete (imputed) matrix.
RankTable rank_algorithms(const EvalMatrix& matrix, double w);

// Per-algorithm curve averaged over all datasets: intercept is the mean AUC,
// slope the negated mean penalty coefficient.
std::vector<FrugalityCurve> averaged_curves(const EvalMatrix& matrix,
                                            std::span<const double> w_grid);

std::string rank_table_csv(const RankTable& table);
nlohmann::json rank_table_json(const RankTable& table);

// `algorithm_id,w,score`
std::string curves_csv(std::span<const FrugalityCurve> curves);

}  // namespace frugal
