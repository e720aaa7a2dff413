#include "lkplo/clustering.hpp"

#include "lkplo/errors.hpp"

#include <limits>
#include <random>
#include <string>

namespace lkplo {

namespace {

double sq_dist_row(const Matrix& F, Index i, const Matrix& C, Index c) {
    return (F.row(i) - C.row(c)).squaredNorm();
}

Index nearest(const Matrix& C, const Eigen::Ref<const Eigen::RowVectorXd>& f, double* best_out = nullptr) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < C.rows(); ++c) {
        const double d = (f - C.row(c)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    if (best_out) *best_out = best_d;
    return best;
}

// Centroids as member means, accumulated in row order.
Matrix member_means(const Matrix& F, const std::vector<Index>& membership, Index k, std::vector<Index>& sizes) {
    Matrix C = Matrix::Zero(k, F.cols());
    sizes.assign(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < F.rows(); ++i) {
        const Index c = membership[static_cast<std::size_t>(i)];
        C.row(c) += F.row(i);
        ++sizes[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) C.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    }
    return C;
}

Matrix kmeanspp_init(const Matrix& F, Index k, std::mt19937_64& rng) {
    const Index n = F.rows();
    Matrix C(k, F.cols());
    std::uniform_int_distribution<Index> pick(0, n - 1);
    C.row(0) = F.row(pick(rng));

    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist_row(F, i, C, 0);

    for (Index c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        Index chosen;
        if (total > 0.0) {
            std::discrete_distribution<Index> weighted(d2.begin(), d2.end());
            chosen = weighted(rng);
        } else {
            chosen = pick(rng);
        }
        C.row(c) = F.row(chosen);
        for (Index i = 0; i < n; ++i) {
            d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], sq_dist_row(F, i, C, c));
        }
    }
    return C;
}

// Moves the point farthest from its centroid (among clusters that can spare one)
// into each empty cluster as a singleton.
void repair_empty(const Matrix& F, Matrix& C, std::vector<Index>& membership, std::vector<Index>& sizes) {
    const Index k = C.rows();
    for (Index c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) continue;
        Index far = -1;
        double far_d = -1.0;
        for (Index i = 0; i < F.rows(); ++i) {
            const Index owner = membership[static_cast<std::size_t>(i)];
            if (sizes[static_cast<std::size_t>(owner)] < 2) continue;
            const double d = sq_dist_row(F, i, C, owner);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        const Index owner = membership[static_cast<std::size_t>(far)];
        --sizes[static_cast<std::size_t>(owner)];
        membership[static_cast<std::size_t>(far)] = c;
        sizes[static_cast<std::size_t>(c)] = 1;
        C.row(c) = F.row(far);
    }
}

double assign_all(const Matrix& F, const Matrix& C, std::vector<Index>& membership) {
    double inertia = 0.0;
    for (Index i = 0; i < F.rows(); ++i) {
        double d = 0.0;
        membership[static_cast<std::size_t>(i)] = nearest(C, F.row(i), &d);
        inertia += d;
    }
    return inertia;
}

void check_k(const Matrix& F, Index k) {
    if (k < 1 || k > F.rows()) {
        throw InvalidKError("k must satisfy 1 <= k <= N (k=" + std::to_string(k) +
                            ", N=" + std::to_string(F.rows()) + ")");
    }
}

}  // namespace

KmeansRun kmeans_single_run(const Matrix& F, Index k, std::uint64_t seed, const KmeansOptions& opts) {
    check_k(F, k);
    const Index n = F.rows();
    std::mt19937_64 rng(seed);

    KmeansRun run;
    Matrix C = kmeanspp_init(F, k, rng);
    std::vector<Index> membership(static_cast<std::size_t>(n), -1);
    std::vector<Index> sizes;

    // Lloyd iterations until the partition is a fixed point; a stable
    // partition means the centroid shift is exactly zero.
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        std::vector<Index> previous = membership;
        double inertia = assign_all(F, C, membership);
        member_means(F, membership, k, sizes);
        repair_empty(F, C, membership, sizes);
        inertia = 0.0;
        for (Index i = 0; i < n; ++i) inertia += sq_dist_row(F, i, C, membership[static_cast<std::size_t>(i)]);
        run.inertia_trace.push_back(inertia);
        run.iterations = iter + 1;

        const Matrix next = member_means(F, membership, k, sizes);
        const double shift = (next - C).rowwise().norm().maxCoeff();
        C = next;
        if (membership == previous) break;
        if (shift < opts.tol) {
            // Centroids barely moved; accept once a reassignment leaves the partition unchanged.
            std::vector<Index> probe = membership;
            assign_all(F, C, probe);
            if (probe == membership) break;
        }
    }

    run.model.k = k;
    run.model.centroids = member_means(F, membership, k, sizes);
    run.model.sizes = sizes;
    run.model.membership = std::move(membership);
    double inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
        inertia += sq_dist_row(F, i, run.model.centroids, run.model.membership[static_cast<std::size_t>(i)]);
    }
    run.model.inertia = inertia;
    return run;
}

ClusterModel kmeans_fit(const Matrix& F, Index k, std::uint64_t seed, const KmeansOptions& opts) {
    check_k(F, k);
    ClusterModel best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < opts.n_init; ++r) {
        KmeansRun run = kmeans_single_run(F, k, seed + static_cast<std::uint64_t>(r), opts);
        if (run.model.inertia < best.inertia) best = std::move(run.model);
    }
    return best;
}

ClusterModel single_cluster(const Matrix& F) {
    if (F.rows() < 1) throw InvalidKError("cannot build a cluster from zero rows");
    ClusterModel m;
    m.k = 1;
    m.membership.assign(static_cast<std::size_t>(F.rows()), 0);
    m.centroids = member_means(F, m.membership, 1, m.sizes);
    m.inertia = (F.rowwise() - m.centroids.row(0)).rowwise().squaredNorm().sum();
    return m;
}

Index assign_nearest(const ClusterModel& model, const Eigen::Ref<const Vector>& f) {
    if (f.size() != model.centroids.cols()) {
        throw DimensionError("assign_nearest: expected " + std::to_string(model.centroids.cols()) +
                             " components, got " + std::to_string(f.size()));
    }
    return nearest(model.centroids, f.transpose());
}

}  // namespace lkplo
