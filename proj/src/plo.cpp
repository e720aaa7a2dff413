#include "lkplo/plo.hpp"

#include "lkplo/errors.hpp"
#include "lkplo/robust_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <utility>

namespace lkplo {

namespace {

constexpr std::size_t kAutoDirections = 50;
constexpr std::uint64_t kKmeansStream = 0x6b6d65616e73ULL;

std::size_t retry_budget(std::size_t requested) { return std::max<std::size_t>(10, 10 * requested); }

bool try_push(std::vector<Direction>& out, const Vector& v) {
    if (!(v.norm() >= kMinDirectionNorm) || !v.allFinite()) return false;
    out.push_back(Direction::from(v));
    return true;
}

}  // namespace

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Plo: return "plo";
        case Variant::Kplo: return "kplo";
        case Variant::Lkplo: return "lkplo";
    }
    return "?";
}

std::string_view to_string(LossKind k) { return k == LossKind::RobustZ ? "rz" : "svm"; }

Variant parse_variant(std::string_view s) {
    if (s == "plo") return Variant::Plo;
    if (s == "kplo") return Variant::Kplo;
    if (s == "lkplo") return Variant::Lkplo;
    throw InvalidArgumentError("unknown variant '" + std::string(s) + "' (expected plo, kplo or lkplo)");
}

LossKind parse_loss_kind(std::string_view s) {
    if (s == "rz") return LossKind::RobustZ;
    if (s == "svm") return LossKind::SvmLike;
    throw InvalidArgumentError("unknown loss '" + std::string(s) + "' (expected rz or svm)");
}

void LossSpec::validate() const {
    if (kind == LossKind::SvmLike && !(c > 0.0 && std::isfinite(c))) {
        throw InvalidArgumentError("SVM-like loss needs c > 0, got " + std::to_string(c));
    }
}

Direction Direction::from(const Vector& v) {
    const double n = v.norm();
    if (!(n >= kMinDirectionNorm) || !std::isfinite(n)) {
        throw DegenerateDirectionsError("direction candidate has norm " + std::to_string(n));
    }
    return Direction(v / n);
}

Direction Direction::from_unit(Vector u) {
    if (std::abs(u.norm() - 1.0) > 1e-9) throw FormatError("stored direction is not unit norm");
    return Direction(std::move(u));
}

void DirectionConfig::validate() const {
    const bool any = n_random > 0 || include_basis || !n_one_point || *n_one_point > 0 || !n_two_points ||
                     *n_two_points > 0;
    if (!any) throw InvalidArgumentError("direction config requests zero directions");
}

std::vector<Direction> gen_directions(const Matrix& centered_members, const DirectionConfig& config,
                                      std::uint64_t seed) {
    config.validate();
    const Index n = centered_members.rows();
    const Index q = centered_members.cols();
    if (n < 1 || q < 1) throw InvalidArgumentError("gen_directions needs at least one member and one dimension");

    std::mt19937_64 rng(seed);
    std::vector<Direction> out;

    // Random: iid standard normal, normalized.
    std::normal_distribution<double> normal(0.0, 1.0);
    {
        std::size_t made = 0;
        for (std::size_t tries = 0; made < config.n_random && tries < retry_budget(config.n_random); ++tries) {
            Vector v(q);
            for (Index j = 0; j < q; ++j) v(j) = normal(rng);
            if (try_push(out, v)) ++made;
        }
    }

    if (config.include_basis) {
        for (Index j = 0; j < q; ++j) out.push_back(Direction::from(Vector::Unit(q, j)));
    }

    // One-Point: member rows without replacement, extra draws with replacement.
    const auto nk = static_cast<std::size_t>(n);
    const std::size_t n_one = config.n_one_point.value_or(std::min(kAutoDirections, nk));
    if (n_one > 0) {
        std::vector<Index> order(nk);
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::uniform_int_distribution<Index> any_row(0, n - 1);
        std::size_t made = 0;
        for (std::size_t tries = 0; made < n_one && tries < n_one + retry_budget(n_one); ++tries) {
            const Index row = tries < nk ? order[tries] : any_row(rng);
            if (try_push(out, centered_members.row(row).transpose())) ++made;
        }
    }

    // Two-Points: distinct unordered member pairs.
    const std::size_t pairs = nk * (nk - 1) / 2;
    const std::size_t n_two = std::min(config.n_two_points.value_or(std::min(kAutoDirections, pairs)), pairs);
    if (n_two > 0) {
        if (n_two == pairs) {
            for (Index i = 0; i < n; ++i) {
                for (Index j = i + 1; j < n; ++j) {
                    try_push(out, (centered_members.row(i) - centered_members.row(j)).transpose());
                }
            }
        } else {
            std::uniform_int_distribution<Index> any_row(0, n - 1);
            std::set<std::pair<Index, Index>> seen;
            std::size_t made = 0;
            for (std::size_t tries = 0; made < n_two && tries < n_two + retry_budget(n_two); ++tries) {
                Index i = any_row(rng);
                Index j = any_row(rng);
                if (i == j) continue;
                if (i > j) std::swap(i, j);
                if (!seen.insert({i, j}).second) continue;
                if (try_push(out, (centered_members.row(i) - centered_members.row(j)).transpose())) ++made;
            }
        }
    }

    if (out.empty()) throw DegenerateDirectionsError("no usable projection direction after retries");
    return out;
}

ProjectionStats projection_stats(const Direction& u, const Matrix& centered_members) {
    if (u.dim() != centered_members.cols()) throw DimensionError("projection_stats: direction dimension mismatch");
    const Vector proj = centered_members * u.u();
    const std::span<const double> z(proj.data(), static_cast<std::size_t>(proj.size()));
    return ProjectionStats{u, median(z), mad(z)};
}

double robust_z_loss(const ProjectionStats& stats, const Eigen::Ref<const Vector>& f_prime) {
    const double p = stats.direction.u().dot(f_prime);
    return std::abs(p - stats.median_proj) / std::max(stats.mad_proj, kMadFloor);
}

double svm_like_loss(const ProjectionStats& stats, const Eigen::Ref<const Vector>& f_prime, double c) {
    const double p = stats.direction.u().dot(f_prime);
    return std::max(0.0, std::abs(p) - c * stats.mad_proj);
}

double loss_value(const LossSpec& loss, const ProjectionStats& stats, const Eigen::Ref<const Vector>& f_prime) {
    return loss.kind == LossKind::RobustZ ? robust_z_loss(stats, f_prime) : svm_like_loss(stats, f_prime, loss.c);
}

double local_score(const Eigen::Ref<const Vector>& f_new, const ClusterEntry& cluster, const LossSpec& loss) {
    if (f_new.size() != cluster.centroid.size()) throw DimensionError("local_score: feature dimension mismatch");
    const Vector f_prime = f_new - cluster.centroid;
    double best = 0.0;
    for (const ProjectionStats& s : cluster.stats) best = std::max(best, loss_value(loss, s, f_prime));
    return best;
}

void LkploModel::validate() const {
    const bool ok_shape = (variant == Variant::Plo && !kpca && clusters.k == 1) ||
                          (variant == Variant::Kplo && kpca && clusters.k == 1) ||
                          (variant == Variant::Lkplo && kpca && clusters.k >= 1);
    if (!ok_shape) throw FormatError("model variant inconsistent with its kernel map / cluster count");
    if (static_cast<Index>(per_cluster.size()) != clusters.k) throw FormatError("per-cluster record count != k");
    if (clusters.centroids.rows() != clusters.k || clusters.centroids.cols() != feature_dim()) {
        throw FormatError("centroid matrix shape mismatch");
    }
    if (kpca && kpca->dim() != input_dim) throw FormatError("kernel map input dimension mismatch");
    for (const ClusterEntry& e : per_cluster) {
        if (e.stats.empty()) throw FormatError("cluster without projection directions");
        if (e.size < 1) throw FormatError("empty cluster");
        if (e.centroid.size() != feature_dim()) throw FormatError("cluster centroid dimension mismatch");
        for (const ProjectionStats& s : e.stats) {
            if (s.direction.dim() != feature_dim() || !std::isfinite(s.median_proj) || !std::isfinite(s.mad_proj) ||
                s.mad_proj < 0.0) {
                throw FormatError("invalid projection statistics");
            }
        }
    }
    loss.validate();
}

LkploModel fit(const Matrix& X, const FitConfig& config) {
    if (X.rows() < 2) throw InvalidArgumentError("fit needs at least 2 samples");
    config.loss.validate();
    config.directions.validate();

    LkploModel model;
    model.variant = config.variant;
    model.input_dim = X.cols();
    model.loss = config.loss;
    model.direction_config = config.directions;
    model.seed = config.seed;

    Matrix F;
    if (config.variant == Variant::Plo) {
        F = X;
    } else {
        model.kpca = fit_kpca(X, config.kernel, config.q);
        F = model.kpca->training_features();
    }

    if (config.variant == Variant::Lkplo) {
        model.clusters = kmeans_fit(F, config.k, derive_seed(config.seed, kKmeansStream));
    } else {
        model.clusters = single_cluster(F);
    }

    const Index k = model.clusters.k;
    model.per_cluster.resize(static_cast<std::size_t>(k));
    for (Index c = 0; c < k; ++c) {
        ClusterEntry& entry = model.per_cluster[static_cast<std::size_t>(c)];
        entry.centroid = model.clusters.centroids.row(c).transpose();
        entry.size = model.clusters.sizes[static_cast<std::size_t>(c)];

        Matrix members(entry.size, F.cols());
        Index r = 0;
        for (Index i = 0; i < F.rows(); ++i) {
            if (model.clusters.membership[static_cast<std::size_t>(i)] == c) {
                members.row(r++) = F.row(i) - entry.centroid.transpose();
            }
        }
        const std::vector<Direction> dirs =
            gen_directions(members, config.directions, derive_seed(config.seed, static_cast<std::uint64_t>(c)));
        entry.stats.reserve(dirs.size());
        for (const Direction& u : dirs) entry.stats.push_back(projection_stats(u, members));
    }
    return model;
}

Matrix features(const LkploModel& model, const Matrix& Xnew) {
    if (Xnew.cols() != model.input_dim) {
        throw DimensionError("expected " + std::to_string(model.input_dim) + " feature columns, got " +
                             std::to_string(Xnew.cols()));
    }
    return model.kpca ? transform(*model.kpca, Xnew) : Xnew;
}

std::vector<double> score(const LkploModel& model, const Matrix& Xnew) {
    const Matrix F = features(model, Xnew);
    std::vector<double> out(static_cast<std::size_t>(F.rows()));
    for (Index m = 0; m < F.rows(); ++m) {
        const Vector f = F.row(m).transpose();
        const Index c = assign_nearest(model.clusters, f);
        const ClusterEntry& entry = model.per_cluster[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(m)] = local_score(f, entry, model.loss) / static_cast<double>(entry.size);
    }
    return out;
}

}  // namespace lkplo
