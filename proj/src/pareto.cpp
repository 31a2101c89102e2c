#include "frugal/pareto.hpp"

#include <algorithm>

#include "frugal/frugality.hpp"
#include "frugal/text.hpp"

namespace frugal {

bool dominates(const ParetoPoint& p, const ParetoPoint& q) {
    if (p.auc < q.auc || p.time_ms > q.time_ms) return false;
    return p.auc > q.auc || p.time_ms < q.time_ms;
}

bool ParetoFront::contains(const std::string& algorithm_id) const {
    for (const auto& pt : points)
        if (pt.algorithm_id == algorithm_id) return true;
    return false;
}

ParetoFront pareto_front(std::span<const ParetoPoint> points) {
    if (points.empty())
        throw Error(ErrorKind::argument, "pareto_front: point list must be nonempty");
    std::vector<ParetoPoint> sorted(points.begin(), points.end());
    // Ascending time; within a time, best AUC first; within identical
    // coordinates, the smallest id first so it is the one retained.
    std::sort(sorted.begin(), sorted.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.time_ms != b.time_ms) return a.time_ms < b.time_ms;
        if (a.auc != b.auc) return a.auc > b.auc;
        return a.algorithm_id < b.algorithm_id;
    });
    ParetoFront front;
    double best_auc = -1.0;
    for (const auto& pt : sorted) {
        if (pt.auc > best_auc) {
            front.points.push_back(pt);
            best_auc = pt.auc;
        }
    }
    return front;
}

namespace {

std::vector<ParetoPoint> row_points(const EvalMatrix& matrix, Eigen::Index row) {
    std::vector<ParetoPoint> points;
    points.reserve(static_cast<std::size_t>(matrix.cols()));
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        points.push_back({matrix.algorithms[static_cast<std::size_t>(c)], matrix.auc(row, c),
                          resource_total(matrix.train_ms(row, c), matrix.test_ms(row, c))});
    }
    return points;
}

void require_complete(const EvalMatrix& matrix, const char* op) {
    if (!matrix.complete())
        throw Error(ErrorKind::precondition,
                    std::string(op) + ": matrix has unobserved cells; impute it first");
}

}  // namespace

std::map<std::string, ParetoFront> per_dataset_fronts(const EvalMatrix& matrix) {
    require_complete(matrix, "per_dataset_fronts");
    std::map<std::string, ParetoFront> fronts;
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        const auto points = row_points(matrix, r);
        fronts.emplace(matrix.datasets[static_cast<std::size_t>(r)], pareto_front(points));
    }
    return fronts;
}

std::map<int, ParetoFront> cluster_averaged_fronts(const EvalMatrix& matrix,
                                                   const ClusterAssignment& assignment) {
    require_complete(matrix, "cluster_averaged_fronts");
    std::vector<int> row_label(static_cast<std::size_t>(matrix.rows()));
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        const auto& id = matrix.datasets[static_cast<std::size_t>(r)];
        const int label = assignment.label_of(id);
        if (label < 0)
            throw Error(ErrorKind::argument,
                        "cluster_averaged_fronts: dataset '" + id + "' missing from assignment");
        row_label[static_cast<std::size_t>(r)] = label;
    }

    std::map<int, ParetoFront> fronts;
    for (int cluster = 0; cluster < assignment.k; ++cluster) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index r = 0; r < matrix.rows(); ++r)
            if (row_label[static_cast<std::size_t>(r)] == cluster) members.push_back(r);
        if (members.empty()) continue;
        std::vector<ParetoPoint> points;
        points.reserve(static_cast<std::size_t>(matrix.cols()));
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
            double auc_sum = 0.0;
            double time_sum = 0.0;
            for (Eigen::Index r : members) {
                auc_sum += matrix.auc(r, c);
                time_sum += resource_total(matrix.train_ms(r, c), matrix.test_ms(r, c));
            }
            const double n = static_cast<double>(members.size());
            points.push_back({matrix.algorithms[static_cast<std::size_t>(c)], auc_sum / n,
                              time_sum / n});
        }
        fronts.emplace(cluster, pareto_front(points));
    }
    return fronts;
}

std::vector<ParetoPoint> grand_mean_points(const EvalMatrix& matrix) {
    require_complete(matrix, "grand_mean_points");
    std::vector<ParetoPoint> points;
    points.reserve(static_cast<std::size_t>(matrix.cols()));
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        double auc_sum = 0.0;
        double time_sum = 0.0;
        for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
            auc_sum += matrix.auc(r, c);
            time_sum += resource_total(matrix.train_ms(r, c), matrix.test_ms(r, c));
        }
        const double n = static_cast<double>(matrix.rows());
        points.push_back(
            {matrix.algorithms[static_cast<std::size_t>(c)], auc_sum / n, time_sum / n});
    }
    return points;
}

ParetoFront global_front(const EvalMatrix& matrix) {
    return pareto_front(grand_mean_points(matrix));
}

std::vector<std::string> column_order(const EvalMatrix& matrix) {
    const auto points = grand_mean_points(matrix);
    const ParetoFront front = pareto_front(points);

    std::vector<std::string> order;
    order.reserve(points.size());
    for (const auto& pt : front.points) order.push_back(pt.algorithm_id);

    std::vector<const ParetoPoint*> dominated;
    for (const auto& pt : points)
        if (!front.contains(pt.algorithm_id)) dominated.push_back(&pt);
    std::sort(dominated.begin(), dominated.end(), [](const ParetoPoint* a, const ParetoPoint* b) {
        if (a->auc != b->auc) return a->auc < b->auc;
        return a->algorithm_id < b->algorithm_id;
    });
    for (const auto* pt : dominated) order.push_back(pt->algorithm_id);
    return order;
}

void append_front_csv(std::string& out, const std::string& key,
                      std::span<const ParetoPoint> points, const ParetoFront& front) {
    for (const auto& pt : points) {
        out += key + "," + pt.algorithm_id + "," + fmt_double(pt.auc) + "," +
               fmt_double(pt.time_ms) + "," + (front.contains(pt.algorithm_id) ? "1" : "0") +
               "\n";
    }
}

}  // namespace frugal
