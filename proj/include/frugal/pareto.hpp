#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "frugal/eval_data.hpp"
#include "frugal/meta_space.hpp"

namespace frugal {

struct ParetoPoint {
    std::string algorithm_id;
    double auc = 0.0;      // maximise
    double time_ms = 0.0;  // minimise, > 0
};

// p dominates q iff p.auc >= q.auc and p.time <= q.time, at least one strict.
bool dominates(const ParetoPoint& p, const ParetoPoint& q);

// Non-dominated set, sorted by ascending time (hence strictly ascending AUC).
// Coordinate-identical points keep only the lexicographically smallest id.
struct ParetoFront {
    std::vector<ParetoPoint> points;

    bool contains(const std::string& algorithm_id) const;
};

ParetoFront pareto_front(std::span<const ParetoPoint> points);

// One front per dataset row, from (auc, train+test) pairs. Matrix must be
// complete.
std::map<std::string, ParetoFront> per_dataset_fronts(const EvalMatrix& matrix);

// Per cluster, each algorithm reduced to its mean (auc, time) over the
// cluster's member datasets before the front is taken.
std::map<int, ParetoFront> cluster_averaged_fronts(const EvalMatrix& matrix,
                                                   const ClusterAssignment& assignment);

ParetoFront global_front(const EvalMatrix& matrix);

// Grand-mean points per algorithm; used by the front/column-order routines.
std::vector<ParetoPoint> grand_mean_points(const EvalMatrix& matrix);

// Heat-map column ordering: the global front by ascending AUC first, then
// the dominated algorithms by ascending mean AUC.
std::vector<std::string> column_order(const EvalMatrix& matrix);

// Rows `key,algorithm_id,auc,time_ms,on_front` appended to `out`.
void append_front_csv(std::string& out, const std::string& key,
                      std::span<const ParetoPoint> points, const ParetoFront& front);

}  // namespace frugal
