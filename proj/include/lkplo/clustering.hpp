#pragma once

// Stage 2a: k-means partition of the kernel feature rows.

#include "lkplo/types.hpp"

#include <cstdint>
#include <vector>

namespace lkplo {

struct ClusterModel {
    Index k = 0;
    Matrix centroids;  // k x q
    std::vector<Index> sizes;
    std::vector<Index> membership;
    double inertia = 0.0;
};

struct KmeansOptions {
    int n_init = 10;
    int max_iter = 300;
    double tol = 1e-6;
};

// One Lloyd run from a k-means++ start. inertia_trace holds the inertia after
// every assignment step.
struct KmeansRun {
    ClusterModel model;
    std::vector<double> inertia_trace;
    int iterations = 0;
};

KmeansRun kmeans_single_run(const Matrix& F, Index k, std::uint64_t seed, const KmeansOptions& opts = {});

// Best of opts.n_init restarts (restart r seeded with seed + r).
ClusterModel kmeans_fit(const Matrix& F, Index k, std::uint64_t seed, const KmeansOptions& opts = {});

// The whole sample as one cluster; centroid computed exactly as kmeans_fit would.
ClusterModel single_cluster(const Matrix& F);

// Nearest centroid by Euclidean distance, lowest index on ties.
Index assign_nearest(const ClusterModel& model, const Eigen::Ref<const Vector>& f);

}  // namespace lkplo
