#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "frugal/error.hpp"
#include "json.hpp"

namespace frugal {

// Datasets embedded in performance / meta-feature space.
struct PointSet {
    std::vector<std::string> ids;
    Eigen::MatrixXd coordinates;  // |ids| x d
    bool standardized = false;

    Eigen::Index size() const { return coordinates.rows(); }
    Eigen::Index dims() const { return coordinates.cols(); }
};

// z-score per column; constant columns are dropped.
PointSet standardize(const PointSet& points);

struct ClusterAssignment {
    int k = 0;
    std::vector<std::string> ids;       // aligned with labels
    std::vector<int> labels;            // in [0, k), every index used
    Eigen::MatrixXd centers;            // k x d (kmeans); empty for PAM
    std::vector<std::string> medoid_ids;  // k entries (PAM); empty for kmeans

    int label_of(const std::string& id) const;  // -1 when absent
    std::vector<long> cluster_sizes() const;
};

// Clustering-tendency statistic: near 0 for clustered data, near 0.5 for
// uniformly random data. m data points are sampled without replacement and m
// uniform points are drawn in the axis-aligned bounding box.
double hopkins(const PointSet& points, int m, std::uint64_t seed);

struct SilhouetteResult {
    double mean = 0.0;
    std::vector<double> per_point;
};

// s(i) = (b(i) - a(i)) / max(a(i), b(i)); singletons score 0.
SilhouetteResult silhouette(const PointSet& points, const ClusterAssignment& assignment);

struct KSelection {
    int k_best = 0;
    std::vector<std::pair<int, double>> per_k;  // (k, mean silhouette)
};

KSelection choose_k_silhouette(const PointSet& points, int k_min, int k_max,
                               std::uint64_t seed);

// Lloyd iterations from k-means++ seeding, best of 10 restarts by WCSS.
ClusterAssignment kmeans(const PointSet& points, int k, std::uint64_t seed);

double kmeans_wcss(const PointSet& points, const ClusterAssignment& assignment);

// Classic PAM (BUILD + SWAP) on Euclidean distances. Deterministic; the seed
// is accepted for interface symmetry but the search itself is exhaustive.
ClusterAssignment pam_medoids(const PointSet& points, int k, std::uint64_t seed);

// Proportional medoid selection: per-cluster quotas by largest remainder with
// a floor of one, then PAM medoids within each cluster.
std::vector<std::string> select_representatives(const PointSet& points,
                                                const ClusterAssignment& assignment,
                                                int n_total, std::uint64_t seed);

struct LatentSpace {
    Eigen::MatrixXd u;                // |rows| x k, scaled by singular values
    Eigen::VectorXd singular_values;  // k, descending
    double explained_variance = 0.0;  // sum(top-k sigma^2) / sum(all sigma^2)
};

LatentSpace svd_latent(const Eigen::MatrixXd& matrix, int k);

// Projection onto the top principal axes. Requires standardized points; the
// largest-magnitude loading of each axis is made positive.
Eigen::MatrixXd pca_project(const PointSet& points, int dims);

struct DendrogramMerge {
    int node_a = 0;  // leaves are 0..n-1, merge i creates node n+i
    int node_b = 0;
    double height = 0.0;
};

struct Dendrogram {
    std::vector<DendrogramMerge> merges;  // n-1 merges, heights non-decreasing
    std::vector<std::string> leaf_order;  // crossing-free permutation of ids
};

// Agglomerative clustering, Ward linkage on Euclidean distances. The leaf
// order places the smaller child first at every internal node.
Dendrogram hierarchical_cluster(const PointSet& points);

// Labels per input point obtained by undoing the last k-1 merges. Labels are
// numbered by first appearance in input order.
std::vector<int> cut_dendrogram(const Dendrogram& dendrogram, int k);

std::string assignment_csv(const ClusterAssignment& assignment);
nlohmann::json dendrogram_json(const Dendrogram& dendrogram);

// Latent coordinates as CSV with the singular values in a `#` header comment.
std::string latent_csv(const LatentSpace& latent, const std::vector<std::string>& ids);

}  // namespace frugal
