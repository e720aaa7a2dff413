#include "lkplo/kernel_feature.hpp"

#include "lkplo/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace lkplo {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double squared_distance(const double* a, const double* b, Index d) {
    double s = 0.0;
    for (Index j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

double dot(const double* a, const double* b, Index d) {
    double s = 0.0;
    for (Index j = 0; j < d; ++j) s += a[j] * b[j];
    return s;
}

// Rectangular kernel block between the rows of A (M x d) and B (N x d).
Matrix cross_kernel(const Matrix& A, const Matrix& B, KernelKind kind, const KernelParams& params) {
    const RowMatrix a = A;
    const RowMatrix b = B;
    const Index d = A.cols();
    Matrix out(A.rows(), B.rows());
    for (Index i = 0; i < A.rows(); ++i) {
        const double* ai = a.row(i).data();
        for (Index j = 0; j < B.rows(); ++j) {
            const double* bj = b.row(j).data();
            out(i, j) = kind == KernelKind::Rbf ? std::exp(-params.gamma * squared_distance(ai, bj, d))
                                                : dot(ai, bj, d);
        }
    }
    return out;
}

Matrix symmetric_gram(const Matrix& X, KernelKind kind, const KernelParams& params) {
    const RowMatrix x = X;
    const Index n = X.rows();
    const Index d = X.cols();
    Matrix K(n, n);
    for (Index i = 0; i < n; ++i) {
        const double* xi = x.row(i).data();
        K(i, i) = kind == KernelKind::Rbf ? 1.0 : dot(xi, xi, d);
        for (Index j = i + 1; j < n; ++j) {
            const double* xj = x.row(j).data();
            const double v = kind == KernelKind::Rbf ? std::exp(-params.gamma * squared_distance(xi, xj, d))
                                                     : dot(xi, xj, d);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

// Largest-magnitude entry of each column made positive.
void fix_signs(Matrix& V) {
    for (Index j = 0; j < V.cols(); ++j) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < V.rows(); ++i) {
            const double a = std::abs(V(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (V(arg, j) < 0.0) V.col(j) *= -1.0;
    }
}

KpcaModel fit_with_gram(const Matrix& X, const Matrix& K, KernelKind kind, const KernelParams& params,
                        Index q_requested) {
    const Index n = X.rows();
    if (n < 2) throw InvalidArgumentError("kernel PCA needs at least 2 samples, got " + std::to_string(n));
    if (q_requested < 1) throw InvalidArgumentError("q must be >= 1");

    CenteredGram cg = center_gram(K);
    const Index top = std::min(q_requested, n);

    // dsyevr overwrites the lower triangle; returns eigenvalues ascending.
    Matrix a = cg.centered;
    std::vector<double> w(static_cast<std::size_t>(n));
    Matrix z(n, top);
    std::vector<lapack_int> support(static_cast<std::size_t>(2 * top));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(
        LAPACK_COL_MAJOR, 'V', 'I', 'L', static_cast<lapack_int>(n), a.data(), static_cast<lapack_int>(n), 0.0,
        0.0, static_cast<lapack_int>(n - top + 1), static_cast<lapack_int>(n), LAPACKE_dlamch('S'), &found,
        w.data(), z.data(), static_cast<lapack_int>(n), support.data());
    if (info != 0 || found != top) {
        throw DegenerateKernelError("symmetric eigensolver failed (info=" + std::to_string(info) + ")");
    }

    const double lambda_max = w[static_cast<std::size_t>(top - 1)];
    const double floor = eigenvalue_floor(lambda_max);
    Index kept = 0;
    for (Index j = top - 1; j >= 0 && w[static_cast<std::size_t>(j)] > floor; --j) ++kept;
    if (kept == 0) {
        throw DegenerateKernelError("all eigenvalues of the centered Gram matrix are below the floor " +
                                    std::to_string(floor));
    }

    KpcaModel model;
    model.kind = kind;
    model.params = params;
    model.train_points = X;
    model.eigenvalues.resize(kept);
    model.eigenvectors.resize(n, kept);
    for (Index j = 0; j < kept; ++j) {
        const Index src = top - 1 - j;
        model.eigenvalues(j) = w[static_cast<std::size_t>(src)];
        model.eigenvectors.col(j) = z.col(src).normalized();
    }
    fix_signs(model.eigenvectors);
    model.gram_row_means = std::move(cg.row_means);
    model.gram_total_mean = cg.total_mean;
    return model;
}

}  // namespace

void KernelParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgumentError("gamma must be a positive finite number, got " + std::to_string(gamma));
    }
}

double rbf_kernel(std::span<const double> x, std::span<const double> y, const KernelParams& params) {
    if (x.size() != y.size()) {
        throw DimensionError("rbf_kernel: dimension mismatch " + std::to_string(x.size()) + " vs " +
                             std::to_string(y.size()));
    }
    return std::exp(-params.gamma * squared_distance(x.data(), y.data(), static_cast<Index>(x.size())));
}

Matrix gram_matrix(const Matrix& X, const KernelParams& params) {
    return symmetric_gram(X, KernelKind::Rbf, params);
}

Matrix linear_gram_matrix(const Matrix& X) { return symmetric_gram(X, KernelKind::Linear, KernelParams{}); }

CenteredGram center_gram(const Matrix& K) {
    const Index n = K.rows();
    CenteredGram out;
    out.row_means = K.rowwise().mean();
    out.total_mean = out.row_means.mean();
    out.centered.resize(n, n);
    // K is symmetric, so column means equal row means.
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            out.centered(i, j) = K(i, j) - (out.row_means(i) + out.row_means(j)) + out.total_mean;
        }
    }
    return out;
}

double eigenvalue_floor(double lambda_max) { return std::max(1e-10, 1e-12 * lambda_max); }

Matrix KpcaModel::training_features() const {
    return eigenvectors * eigenvalues.cwiseSqrt().asDiagonal();
}

KpcaModel fit_kpca(const Matrix& X, const KernelParams& params, Index q_requested) {
    params.validate();
    return fit_with_gram(X, gram_matrix(X, params), KernelKind::Rbf, params, q_requested);
}

KpcaModel fit_kpca_linear(const Matrix& X, Index q_requested) {
    return fit_with_gram(X, linear_gram_matrix(X), KernelKind::Linear, KernelParams{}, q_requested);
}

Matrix transform(const KpcaModel& model, const Matrix& Xnew) {
    if (Xnew.cols() != model.dim()) {
        throw DimensionError("transform: expected " + std::to_string(model.dim()) + " columns, got " +
                             std::to_string(Xnew.cols()));
    }
    if (Xnew.rows() == 0) return Matrix(0, model.q());

    Matrix k = cross_kernel(Xnew, model.train_points, model.kind, model.params);
    const Vector new_means = k.rowwise().mean();
    for (Index m = 0; m < k.rows(); ++m) {
        for (Index i = 0; i < k.cols(); ++i) {
            k(m, i) += model.gram_total_mean - new_means(m) - model.gram_row_means(i);
        }
    }
    return (k * model.eigenvectors) * model.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
}

}  // namespace lkplo
