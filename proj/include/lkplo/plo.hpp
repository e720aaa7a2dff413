#pragma once

// Projection-based loss outlyingness: direction ensembles, the Robust-Z and
// SVM-like losses, per-cluster local scores and the size-weighted final score.

#include "lkplo/clustering.hpp"
#include "lkplo/kernel_feature.hpp"
#include "lkplo/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lkplo {

enum class Variant { Plo, Kplo, Lkplo };
enum class LossKind { RobustZ, SvmLike };

std::string_view to_string(Variant v);
std::string_view to_string(LossKind k);
Variant parse_variant(std::string_view s);
LossKind parse_loss_kind(std::string_view s);

// MAD values below this are replaced by it in the Robust-Z denominator.
inline constexpr double kMadFloor = 1e-9;

struct LossSpec {
    LossKind kind = LossKind::SvmLike;
    double c = 2.0;  // margin multiplier, SvmLike only

    void validate() const;
};

// A unit-norm projection direction.
class Direction {
public:
    // Normalizes v; throws DegenerateDirectionsError if its norm is below 1e-12.
    static Direction from(const Vector& v);
    // Takes an already unit-norm vector as is (used when loading a saved model).
    static Direction from_unit(Vector u);

    const Vector& u() const { return u_; }
    Index dim() const { return u_.size(); }

private:
    explicit Direction(Vector u) : u_(std::move(u)) {}
    Vector u_;
};

inline constexpr double kMinDirectionNorm = 1e-12;

struct DirectionConfig {
    std::size_t n_random = 100;
    bool include_basis = true;
    // Unset means min(50, n_k) for one-point and min(50, n_k(n_k-1)/2) for two-points.
    std::optional<std::size_t> n_one_point;
    std::optional<std::size_t> n_two_points;

    void validate() const;
};

// Random, Basis, One-Point and Two-Points directions for one cluster's centered members.
std::vector<Direction> gen_directions(const Matrix& centered_members, const DirectionConfig& config,
                                      std::uint64_t seed);

struct ProjectionStats {
    Direction direction;
    double median_proj = 0.0;
    double mad_proj = 0.0;
};

ProjectionStats projection_stats(const Direction& u, const Matrix& centered_members);

// |u'f - median| / max(MAD, kMadFloor)
double robust_z_loss(const ProjectionStats& stats, const Eigen::Ref<const Vector>& f_prime);
// max(0, |u'f| - c * MAD)
double svm_like_loss(const ProjectionStats& stats, const Eigen::Ref<const Vector>& f_prime, double c);
double loss_value(const LossSpec& loss, const ProjectionStats& stats, const Eigen::Ref<const Vector>& f_prime);

struct ClusterEntry {
    Vector centroid;
    Index size = 0;
    std::vector<ProjectionStats> stats;
};

// Max loss over the cluster's directions, applied to f_new - centroid.
double local_score(const Eigen::Ref<const Vector>& f_new, const ClusterEntry& cluster, const LossSpec& loss);

struct FitConfig {
    Variant variant = Variant::Lkplo;
    KernelParams kernel;
    Index q = 10;
    Index k = 5;
    LossSpec loss;
    DirectionConfig directions;
    std::uint64_t seed = 42;
};

struct LkploModel {
    Variant variant = Variant::Lkplo;
    Index input_dim = 0;
    std::optional<KpcaModel> kpca;
    ClusterModel clusters;
    LossSpec loss;
    std::vector<ClusterEntry> per_cluster;
    DirectionConfig direction_config;
    std::uint64_t seed = 0;

    Index feature_dim() const { return kpca ? kpca->q() : input_dim; }
    // Throws FormatError when the variant/kpca/cluster invariants do not hold.
    void validate() const;
};

LkploModel fit(const Matrix& X, const FitConfig& config);

// Feature rows of Xnew under the model's map (identity for PLO).
Matrix features(const LkploModel& model, const Matrix& Xnew);

// (1 / N_k) * local_score for every row of Xnew; larger means more outlying.
std::vector<double> score(const LkploModel& model, const Matrix& Xnew);

}  // namespace lkplo
