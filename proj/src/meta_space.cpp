#include "frugal/meta_space.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "frugal/rng.hpp"
#include "frugal/text.hpp"

namespace frugal {

namespace {

constexpr int kLloydMaxIterations = 300;
constexpr int kKmeansRestarts = 10;

double sq_dist(const Eigen::MatrixXd& x, Eigen::Index a, Eigen::Index b) {
    return (x.row(a) - x.row(b)).squaredNorm();
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dist = (x.row(i) - x.row(j)).norm();
            d(i, j) = dist;
            d(j, i) = dist;
        }
    }
    return d;
}

void check_points(const PointSet& points, const char* op) {
    if (static_cast<std::size_t>(points.coordinates.rows()) != points.ids.size())
        throw Error(ErrorKind::argument, std::string(op) + ": ids do not match coordinates");
    if (!points.coordinates.allFinite())
        throw Error(ErrorKind::argument, std::string(op) + ": non-finite coordinate");
}

}  // namespace

PointSet standardize(const PointSet& points) {
    check_points(points, "standardize");
    const Eigen::Index n = points.size();
    const Eigen::Index d = points.dims();
    std::vector<Eigen::Index> kept;
    Eigen::MatrixXd out(n, d);
    Eigen::Index out_col = 0;
    for (Eigen::Index c = 0; c < d; ++c) {
        const double mean = points.coordinates.col(c).mean();
        const double var =
            (points.coordinates.col(c).array() - mean).square().sum() / static_cast<double>(n);
        if (var <= 0.0) continue;  // constant column
        out.col(out_col) = (points.coordinates.col(c).array() - mean) / std::sqrt(var);
        ++out_col;
    }
    PointSet result;
    result.ids = points.ids;
    result.coordinates = out.leftCols(out_col);
    result.standardized = true;
    return result;
}

int ClusterAssignment::label_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return labels[i];
    return -1;
}

std::vector<long> ClusterAssignment::cluster_sizes() const {
    std::vector<long> sizes(static_cast<std::size_t>(k), 0);
    for (int label : labels) sizes[static_cast<std::size_t>(label)] += 1;
    return sizes;
}

double hopkins(const PointSet& points, int m, std::uint64_t seed) {
    check_points(points, "hopkins");
    const Eigen::Index n = points.size();
    if (n < 4) throw Error(ErrorKind::argument, "hopkins: need at least 4 points");
    if (m < 1 || 2 * static_cast<Eigen::Index>(m) > n)
        throw Error(ErrorKind::argument, "hopkins: m must be in [1, n/2]");
    const Eigen::Index d = points.dims();
    if (d == 0) throw Error(ErrorKind::argument, "hopkins: points have no dimensions");

    const Eigen::VectorXd lo = points.coordinates.colwise().minCoeff();
    const Eigen::VectorXd hi = points.coordinates.colwise().maxCoeff();
    for (Eigen::Index c = 0; c < d; ++c)
        if (!(hi(c) > lo(c)))
            throw Error(ErrorKind::argument, "hopkins: degenerate (zero volume) bounding box");

    Rng rng(seed);
    const auto sample = rng.sample_without_replacement(static_cast<std::size_t>(n),
                                                       static_cast<std::size_t>(m));

    auto nearest_data = [&](const Eigen::RowVectorXd& q, Eigen::Index exclude) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == exclude) continue;
            best = std::min(best, (points.coordinates.row(j) - q).squaredNorm());
        }
        return std::sqrt(best);
    };

    double w_sum = 0.0;
    for (std::size_t idx : sample) {
        const auto i = static_cast<Eigen::Index>(idx);
        w_sum += nearest_data(points.coordinates.row(i), i);
    }
    double u_sum = 0.0;
    Eigen::RowVectorXd q(d);
    for (int s = 0; s < m; ++s) {
        for (Eigen::Index c = 0; c < d; ++c) q(c) = rng.uniform(lo(c), hi(c));
        u_sum += nearest_data(q, -1);
    }
    const double total = u_sum + w_sum;
    return total > 0.0 ? w_sum / total : 0.5;
}

SilhouetteResult silhouette(const PointSet& points, const ClusterAssignment& assignment) {
    check_points(points, "silhouette");
    if (assignment.k < 2) throw Error(ErrorKind::argument, "silhouette: need k >= 2");
    const Eigen::Index n = points.size();
    if (assignment.labels.size() != static_cast<std::size_t>(n) ||
        assignment.ids != points.ids)
        throw Error(ErrorKind::argument, "silhouette: assignment does not cover the points");
    const auto sizes = assignment.cluster_sizes();
    for (long size : sizes)
        if (size == 0) throw Error(ErrorKind::argument, "silhouette: empty cluster");

    const Eigen::MatrixXd dist = pairwise_distances(points.coordinates);
    SilhouetteResult result;
    result.per_point.resize(static_cast<std::size_t>(n), 0.0);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = assignment.labels[static_cast<std::size_t>(i)];
        std::vector<double> sums(static_cast<std::size_t>(assignment.k), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[static_cast<std::size_t>(assignment.labels[static_cast<std::size_t>(j)])] +=
                dist(i, j);
        }
        double s = 0.0;
        if (sizes[static_cast<std::size_t>(own)] > 1) {
            const double a =
                sums[static_cast<std::size_t>(own)] /
                static_cast<double>(sizes[static_cast<std::size_t>(own)] - 1);
            double b = std::numeric_limits<double>::infinity();
            for (int c = 0; c < assignment.k; ++c) {
                if (c == own) continue;
                b = std::min(b, sums[static_cast<std::size_t>(c)] /
                                    static_cast<double>(sizes[static_cast<std::size_t>(c)]));
            }
            const double denom = std::max(a, b);
            s = denom > 0.0 ? (b - a) / denom : 0.0;
        }
        result.per_point[static_cast<std::size_t>(i)] = s;
        total += s;
    }
    result.mean = total / static_cast<double>(n);
    return result;
}

namespace {

struct LloydResult {
    std::vector<int> labels;
    Eigen::MatrixXd centers;
    double wcss = 0.0;
    std::vector<double> wcss_trace;
};

int nearest_center(const Eigen::MatrixXd& x, Eigen::Index i, const Eigen::MatrixXd& centers) {
    int best = 0;
    double best_d = (x.row(i) - centers.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < centers.rows(); ++c) {
        const double d = (x.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& x, int k, Rng& rng) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd centers(k, x.cols());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());

    Eigen::Index first = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    centers.row(0) = x.row(first);
    chosen[static_cast<std::size_t>(first)] = true;
    for (int c = 1; c < k; ++c) {
        for (Eigen::Index i = 0; i < n; ++i)
            dist2(i) = std::min(dist2(i), (x.row(i) - centers.row(c - 1)).squaredNorm());
        const double total = dist2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += dist2(i);
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;
        } else {
            // every point coincides with a center; take the first unused one
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = 0;
        }
        centers.row(c) = x.row(pick);
        chosen[static_cast<std::size_t>(pick)] = true;
    }
    return centers;
}

LloydResult lloyd(const Eigen::MatrixXd& x, int k, Rng& rng) {
    const Eigen::Index n = x.rows();
    LloydResult res;
    res.centers = kmeanspp_seed(x, k, rng);
    res.labels.assign(static_cast<std::size_t>(n), -1);

    for (int iter = 0; iter < kLloydMaxIterations; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int c = nearest_center(x, i, res.centers);
            if (c != res.labels[static_cast<std::size_t>(i)]) {
                res.labels[static_cast<std::size_t>(i)] = c;
                changed = true;
            }
        }
        // revive empty clusters with the point farthest from its center
        std::vector<long> counts(static_cast<std::size_t>(k), 0);
        for (int label : res.labels) counts[static_cast<std::size_t>(label)] += 1;
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int owner = res.labels[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(owner)] < 2) continue;
                const double d = (x.row(i) - res.centers.row(owner)).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far >= 0) {
                counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(far)])] -= 1;
                res.labels[static_cast<std::size_t>(far)] = c;
                counts[static_cast<std::size_t>(c)] += 1;
                changed = true;
            }
        }
        // update step
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
        std::fill(counts.begin(), counts.end(), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(res.labels[static_cast<std::size_t>(i)]) += x.row(i);
            counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])] += 1;
        }
        for (int c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                res.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);

        double wcss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            wcss += (x.row(i) - res.centers.row(res.labels[static_cast<std::size_t>(i)]))
                        .squaredNorm();
        res.wcss = wcss;
        res.wcss_trace.push_back(wcss);
        if (!changed) break;
    }
    return res;
}

}  // namespace

ClusterAssignment kmeans(const PointSet& points, int k, std::uint64_t seed) {
    check_points(points, "kmeans");
    const Eigen::Index n = points.size();
    if (k < 1 || static_cast<Eigen::Index>(k) > n)
        throw Error(ErrorKind::argument, "kmeans: k must be in [1, |points|]");

    LloydResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < kKmeansRestarts; ++restart) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(restart));
        LloydResult res = lloyd(points.coordinates, k, rng);
        if (res.wcss < best.wcss) best = std::move(res);
    }

    ClusterAssignment out;
    out.k = k;
    out.ids = points.ids;
    out.labels = std::move(best.labels);
    out.centers = std::move(best.centers);
    return out;
}

double kmeans_wcss(const PointSet& points, const ClusterAssignment& assignment) {
    double wcss = 0.0;
    for (Eigen::Index i = 0; i < points.size(); ++i)
        wcss += (points.coordinates.row(i) -
                 assignment.centers.row(assignment.labels[static_cast<std::size_t>(i)]))
                    .squaredNorm();
    return wcss;
}

namespace {

double pam_cost(const Eigen::MatrixXd& dist, const std::vector<Eigen::Index>& medoids) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < dist.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index m : medoids) best = std::min(best, dist(i, m));
        cost += best;
    }
    return cost;
}

}  // namespace

ClusterAssignment pam_medoids(const PointSet& points, int k, std::uint64_t seed) {
    (void)seed;  // BUILD + SWAP is deterministic
    check_points(points, "pam_medoids");
    const Eigen::Index n = points.size();
    if (k < 1 || static_cast<Eigen::Index>(k) > n)
        throw Error(ErrorKind::argument, "pam_medoids: k must be in [1, |points|]");

    const Eigen::MatrixXd dist = pairwise_distances(points.coordinates);
    std::vector<Eigen::Index> medoids;
    std::vector<bool> is_medoid(static_cast<std::size_t>(n), false);

    // BUILD: first medoid minimises total distance, the rest maximise the
    // total decrease in nearest-medoid distance.
    {
        Eigen::Index best = 0;
        double best_sum = dist.col(0).sum();
        for (Eigen::Index j = 1; j < n; ++j) {
            const double s = dist.col(j).sum();
            if (s < best_sum) {
                best_sum = s;
                best = j;
            }
        }
        medoids.push_back(best);
        is_medoid[static_cast<std::size_t>(best)] = true;
    }
    Eigen::VectorXd nearest = dist.col(medoids[0]);
    while (static_cast<int>(medoids.size()) < k) {
        Eigen::Index best = -1;
        double best_gain = -1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (is_medoid[static_cast<std::size_t>(j)]) continue;
            double gain = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                gain += std::max(0.0, nearest(i) - dist(i, j));
            if (gain > best_gain) {
                best_gain = gain;
                best = j;
            }
        }
        medoids.push_back(best);
        is_medoid[static_cast<std::size_t>(best)] = true;
        for (Eigen::Index i = 0; i < n; ++i) nearest(i) = std::min(nearest(i), dist(i, best));
    }

    // SWAP: apply the best strictly improving (medoid, candidate) exchange
    // until none exists.
    double current_cost = pam_cost(dist, medoids);
    while (true) {
        double best_cost = current_cost;
        std::size_t best_slot = 0;
        Eigen::Index best_candidate = -1;
        for (std::size_t s = 0; s < medoids.size(); ++s) {
            for (Eigen::Index h = 0; h < n; ++h) {
                if (is_medoid[static_cast<std::size_t>(h)]) continue;
                std::vector<Eigen::Index> trial = medoids;
                trial[s] = h;
                const double cost = pam_cost(dist, trial);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_slot = s;
                    best_candidate = h;
                }
            }
        }
        if (best_candidate < 0) break;
        is_medoid[static_cast<std::size_t>(medoids[best_slot])] = false;
        medoids[best_slot] = best_candidate;
        is_medoid[static_cast<std::size_t>(best_candidate)] = true;
        current_cost = best_cost;
    }

    std::sort(medoids.begin(), medoids.end());
    ClusterAssignment out;
    out.k = k;
    out.ids = points.ids;
    out.labels.assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double best_d = dist(i, medoids[0]);
        for (std::size_t s = 1; s < medoids.size(); ++s) {
            if (dist(i, medoids[s]) < best_d) {
                best_d = dist(i, medoids[s]);
                best = static_cast<int>(s);
            }
        }
        out.labels[static_cast<std::size_t>(i)] = best;
    }
    // a medoid always belongs to its own cluster, even under distance ties
    for (std::size_t s = 0; s < medoids.size(); ++s)
        out.labels[static_cast<std::size_t>(medoids[s])] = static_cast<int>(s);
    for (Eigen::Index m : medoids)
        out.medoid_ids.push_back(points.ids[static_cast<std::size_t>(m)]);
    return out;
}

KSelection choose_k_silhouette(const PointSet& points, int k_min, int k_max,
                               std::uint64_t seed) {
    check_points(points, "choose_k_silhouette");
    if (k_min < 2) throw Error(ErrorKind::argument, "choose_k_silhouette: k_min must be >= 2");
    if (k_max < k_min)
        throw Error(ErrorKind::argument, "choose_k_silhouette: k_max must be >= k_min");
    if (static_cast<Eigen::Index>(k_max) >= points.size())
        throw Error(ErrorKind::argument, "choose_k_silhouette: k_max must be < |points|");

    KSelection selection;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = k_min; k <= k_max; ++k) {
        const ClusterAssignment assignment = kmeans(points, k, seed);
        const double score = silhouette(points, assignment).mean;
        selection.per_k.emplace_back(k, score);
        if (score > best_score) {
            best_score = score;
            selection.k_best = k;
        }
    }
    return selection;
}

std::vector<std::string> select_representatives(const PointSet& points,
                                                const ClusterAssignment& assignment,
                                                int n_total, std::uint64_t seed) {
    check_points(points, "select_representatives");
    if (assignment.ids != points.ids)
        throw Error(ErrorKind::argument,
                    "select_representatives: assignment does not cover the points");
    if (n_total < assignment.k)
        throw Error(ErrorKind::argument, "select_representatives: n_total must be >= k");
    if (static_cast<Eigen::Index>(n_total) > points.size())
        throw Error(ErrorKind::argument,
                    "select_representatives: n_total exceeds the number of points");

    const auto sizes = assignment.cluster_sizes();
    const long total = std::accumulate(sizes.begin(), sizes.end(), 0L);
    const std::size_t k = sizes.size();

    // largest-remainder quotas
    std::vector<int> quota(k, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double share =
            static_cast<double>(n_total) * static_cast<double>(sizes[c]) / static_cast<double>(total);
        quota[c] = static_cast<int>(std::floor(share));
        assigned += quota[c];
        remainders.emplace_back(share - std::floor(share), c);
    }
    std::sort(remainders.begin(), remainders.end(),
              [&](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  if (sizes[a.second] != sizes[b.second]) return sizes[a.second] > sizes[b.second];
                  return a.second < b.second;
              });
    for (std::size_t i = 0; assigned < n_total; ++assigned, ++i)
        quota[remainders[i % k].second] += 1;

    auto take_from_largest = [&](std::size_t except) {
        std::size_t donor = k;
        for (std::size_t c = 0; c < k; ++c) {
            if (c == except || quota[c] < 2) continue;
            if (donor == k || quota[c] > quota[donor]) donor = c;
        }
        quota[donor] -= 1;
    };
    for (std::size_t c = 0; c < k; ++c)
        while (quota[c] == 0) {
            take_from_largest(c);
            quota[c] += 1;
        }
    // quotas cannot exceed cluster sizes
    for (std::size_t c = 0; c < k; ++c) {
        while (quota[c] > sizes[c]) {
            std::size_t receiver = k;
            for (std::size_t h = 0; h < k; ++h) {
                if (h == c || quota[h] >= sizes[h]) continue;
                if (receiver == k ||
                    sizes[h] - quota[h] > sizes[receiver] - quota[receiver])
                    receiver = h;
            }
            quota[c] -= 1;
            quota[receiver] += 1;
        }
    }

    std::vector<std::string> representatives;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < points.size(); ++i)
            if (assignment.labels[static_cast<std::size_t>(i)] == static_cast<int>(c))
                members.push_back(i);
        PointSet sub;
        sub.coordinates.resize(static_cast<Eigen::Index>(members.size()), points.dims());
        for (std::size_t i = 0; i < members.size(); ++i) {
            sub.ids.push_back(points.ids[static_cast<std::size_t>(members[i])]);
            sub.coordinates.row(static_cast<Eigen::Index>(i)) =
                points.coordinates.row(members[i]);
        }
        sub.standardized = points.standardized;
        const ClusterAssignment sub_pam = pam_medoids(sub, quota[c], seed);
        for (const auto& id : sub_pam.medoid_ids) representatives.push_back(id);
    }
    return representatives;
}

LatentSpace svd_latent(const Eigen::MatrixXd& matrix, int k) {
    if (matrix.rows() == 0 || matrix.cols() == 0)
        throw Error(ErrorKind::argument, "svd_latent: matrix is empty");
    if (k < 1 || static_cast<Eigen::Index>(k) > std::min(matrix.rows(), matrix.cols()))
        throw Error(ErrorKind::argument, "svd_latent: k must be in [1, min(dims)]");
    if (!matrix.allFinite())
        throw Error(ErrorKind::argument, "svd_latent: matrix has non-finite cells");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    LatentSpace latent;
    latent.singular_values = sv.head(k);
    latent.u = svd.matrixU().leftCols(k) * latent.singular_values.asDiagonal();
    const double total = sv.squaredNorm();
    latent.explained_variance = total > 0.0 ? sv.head(k).squaredNorm() / total : 1.0;
    return latent;
}

Eigen::MatrixXd pca_project(const PointSet& points, int dims) {
    check_points(points, "pca_project");
    if (!points.standardized)
        throw Error(ErrorKind::argument, "pca_project: points must be standardized first");
    if (dims < 1 || static_cast<Eigen::Index>(dims) > points.dims())
        throw Error(ErrorKind::argument, "pca_project: dims must be in [1, d]");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(points.coordinates, Eigen::ComputeThinV);
    Eigen::MatrixXd axes = svd.matrixV().leftCols(dims);
    for (Eigen::Index c = 0; c < axes.cols(); ++c) {
        Eigen::Index arg_max = 0;
        axes.col(c).cwiseAbs().maxCoeff(&arg_max);
        if (axes(arg_max, c) < 0.0) axes.col(c) = -axes.col(c);
    }
    return points.coordinates * axes;
}

Dendrogram hierarchical_cluster(const PointSet& points) {
    check_points(points, "hierarchical_cluster");
    const Eigen::Index n = points.size();
    if (n < 2) throw Error(ErrorKind::argument, "hierarchical_cluster: need at least 2 points");

    // Lance-Williams Ward recurrence on squared Euclidean distances;
    // recorded heights are the square roots.
    const std::size_t slots = static_cast<std::size_t>(n);
    std::vector<std::vector<double>> d2(slots, std::vector<double>(slots, 0.0));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = sq_dist(points.coordinates, i, j);
            d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d;
            d2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = d;
        }

    std::vector<bool> active(slots, true);
    std::vector<long> size(slots, 1);
    std::vector<int> node_id(slots);
    std::vector<double> node_height(2 * slots - 1, 0.0);
    for (std::size_t i = 0; i < slots; ++i) node_id[i] = static_cast<int>(i);

    Dendrogram out;
    for (Eigen::Index step = 0; step < n - 1; ++step) {
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < slots; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < slots; ++j) {
                if (!active[j]) continue;
                if (d2[i][j] < best) {
                    best = d2[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        const int new_node = static_cast<int>(n + step);
        double height = std::sqrt(std::max(best, 0.0));
        // non-decreasing along root paths; absorbs floating-point jitter
        height = std::max({height, node_height[static_cast<std::size_t>(node_id[bi])],
                           node_height[static_cast<std::size_t>(node_id[bj])]});
        node_height[static_cast<std::size_t>(new_node)] = height;
        out.merges.push_back({std::min(node_id[bi], node_id[bj]),
                              std::max(node_id[bi], node_id[bj]), height});

        const long si = size[bi];
        const long sj = size[bj];
        for (std::size_t t = 0; t < slots; ++t) {
            if (!active[t] || t == bi || t == bj) continue;
            const double st = static_cast<double>(size[t]);
            d2[bi][t] = ((static_cast<double>(si) + st) * d2[bi][t] +
                         (static_cast<double>(sj) + st) * d2[bj][t] - st * d2[bi][bj]) /
                        static_cast<double>(si + sj + size[t]);
            d2[t][bi] = d2[bi][t];
        }
        size[bi] = si + sj;
        node_id[bi] = new_node;
        active[bj] = false;
    }

    // leaf order: depth-first, smaller child (by leaf count, then node id) first
    std::vector<long> leaves(2 * slots - 1, 1);
    for (std::size_t i = 0; i < out.merges.size(); ++i)
        leaves[slots + i] = leaves[static_cast<std::size_t>(out.merges[i].node_a)] +
                            leaves[static_cast<std::size_t>(out.merges[i].node_b)];
    std::vector<int> stack{static_cast<int>(2 * slots - 2)};
    while (!stack.empty()) {
        const int node = stack.back();
        stack.pop_back();
        if (node < static_cast<int>(slots)) {
            out.leaf_order.push_back(points.ids[static_cast<std::size_t>(node)]);
            continue;
        }
        const auto& merge = out.merges[static_cast<std::size_t>(node) - slots];
        int first = merge.node_a, second = merge.node_b;
        if (leaves[static_cast<std::size_t>(second)] < leaves[static_cast<std::size_t>(first)] ||
            (leaves[static_cast<std::size_t>(second)] == leaves[static_cast<std::size_t>(first)] &&
             second < first))
            std::swap(first, second);
        stack.push_back(second);  // visited after `first`
        stack.push_back(first);
    }
    return out;
}

std::vector<int> cut_dendrogram(const Dendrogram& dendrogram, int k) {
    const std::size_t n = dendrogram.merges.size() + 1;
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw Error(ErrorKind::argument, "cut_dendrogram: k must be in [1, n]");

    std::vector<int> parent(2 * n - 1);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    const std::size_t applied = n - static_cast<std::size_t>(k);
    for (std::size_t i = 0; i < applied; ++i) {
        const auto& merge = dendrogram.merges[i];
        const int target = static_cast<int>(n + i);
        parent[static_cast<std::size_t>(find(merge.node_a))] = target;
        parent[static_cast<std::size_t>(find(merge.node_b))] = target;
    }

    std::vector<int> labels(n, -1);
    std::vector<int> root_label(2 * n - 1, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int root = find(static_cast<int>(i));
        if (root_label[static_cast<std::size_t>(root)] < 0)
            root_label[static_cast<std::size_t>(root)] = next++;
        labels[i] = root_label[static_cast<std::size_t>(root)];
    }
    return labels;
}

std::string assignment_csv(const ClusterAssignment& assignment) {
    std::string out = "id,cluster\n";
    for (std::size_t i = 0; i < assignment.ids.size(); ++i)
        out += assignment.ids[i] + "," + std::to_string(assignment.labels[i]) + "\n";
    return out;
}

nlohmann::json dendrogram_json(const Dendrogram& dendrogram) {
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& merge : dendrogram.merges)
        merges.push_back({merge.node_a, merge.node_b, merge.height});
    return nlohmann::json{{"merges", merges}, {"leaf_order", dendrogram.leaf_order}};
}

std::string latent_csv(const LatentSpace& latent, const std::vector<std::string>& ids) {
    std::string out = "# singular_values:";
    for (Eigen::Index i = 0; i < latent.singular_values.size(); ++i)
        out += (i == 0 ? " " : ",") + fmt_double(latent.singular_values(i));
    out += "\nid";
    for (Eigen::Index c = 0; c < latent.u.cols(); ++c)
        out += ",z" + std::to_string(c + 1);
    out += "\n";
    for (Eigen::Index r = 0; r < latent.u.rows(); ++r) {
        out += ids[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < latent.u.cols(); ++c)
            out += "," + fmt_double(latent.u(r, c));
        out += "\n";
    }
    return out;
}

}  // namespace frugal
