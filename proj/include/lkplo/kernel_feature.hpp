#pragma once

// Stage 1: RBF kernel PCA feature map.

#include "lkplo/types.hpp"

#include <span>

namespace lkplo {

struct KernelParams {
    double gamma = 1.0;

    void validate() const;
};

// Linear exists only so tests can compare the feature map against plain PCA.
enum class KernelKind { Rbf, Linear };

double rbf_kernel(std::span<const double> x, std::span<const double> y, const KernelParams& params);

// Symmetric N x N matrix of pairwise RBF evaluations over the rows of X.
Matrix gram_matrix(const Matrix& X, const KernelParams& params);
Matrix linear_gram_matrix(const Matrix& X);

struct CenteredGram {
    Matrix centered;
    Vector row_means;
    double total_mean = 0.0;
};

// Double centering: K - 1K - K1 + 1K1.
CenteredGram center_gram(const Matrix& K);

struct KpcaModel {
    KernelKind kind = KernelKind::Rbf;
    KernelParams params;
    Matrix train_points;  // N x d
    Vector eigenvalues;   // q, non-increasing, above the floor
    Matrix eigenvectors;  // N x q, unit-norm columns
    Vector gram_row_means;
    double gram_total_mean = 0.0;

    Index q() const { return eigenvalues.size(); }
    Index n_train() const { return train_points.rows(); }
    Index dim() const { return train_points.cols(); }

    // Training features sqrt(lambda_j) * v_ij.
    Matrix training_features() const;
};

// Eigenpairs with lambda <= max(1e-10, 1e-12 * lambda_1) are dropped.
double eigenvalue_floor(double lambda_max);

KpcaModel fit_kpca(const Matrix& X, const KernelParams& params, Index q_requested);
KpcaModel fit_kpca_linear(const Matrix& X, Index q_requested);

// Out-of-sample projection of the rows of Xnew (M x d) into the q-dim feature space.
Matrix transform(const KpcaModel& model, const Matrix& Xnew);

}  // namespace lkplo
