#include "lkplo/errors.hpp"
#include "lkplo/plo.hpp"
#include "lkplo/robust_stats.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numeric>
#include <random>
#include <vector>

using namespace lkplo;

namespace {

ProjectionStats stats_1d(double median_proj, double mad_proj) {
    return ProjectionStats{Direction::from(Vector::Ones(1)), median_proj, mad_proj};
}

Vector scalar(double v) { return Vector::Constant(1, v); }

DirectionConfig random_only(std::size_t n) {
    DirectionConfig c;
    c.n_random = n;
    c.include_basis = false;
    c.n_one_point = 0;
    c.n_two_points = 0;
    return c;
}

Matrix three_blobs(std::mt19937_64& rng, int per_blob) {
    Matrix X = oracle::random_matrix(rng, 3 * per_blob, 2, 0.3);
    X.block(per_blob, 0, per_blob, 1).array() += 8.0;
    X.block(2 * per_blob, 1, per_blob, 1).array() += 8.0;
    return X;
}

}  // namespace

TEST_CASE("median and mad") {
    CHECK(median(std::vector<double>{5.0}) == 5.0);
    CHECK(median(std::vector<double>{1, 2, 3, 4}) == 2.5);
    CHECK(median(std::vector<double>{3, 1, 2}) == 2.0);
    CHECK(mad(std::vector<double>(7, 4.2)) == 0.0);
    CHECK(mad(std::vector<double>{1, 2, 3, 4, 5}) == doctest::Approx(1.4826).epsilon(1e-15));
    CHECK_THROWS_AS(median(std::vector<double>{}), InvalidArgumentError);
    CHECK_THROWS_AS(mad(std::vector<double>{}), InvalidArgumentError);

    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> len(1, 40);
    std::normal_distribution<double> nd(0.0, 10.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(static_cast<std::size_t>(len(rng)));
        for (double& x : v) x = nd(rng);
        CHECK(median(v) == oracle::sorted_median(v));
        CHECK(mad(v) == oracle::sorted_mad(v));
    }
}

TEST_CASE("gen_directions types") {
    DirectionConfig basis_only;
    basis_only.n_random = 0;
    basis_only.n_one_point = 0;
    basis_only.n_two_points = 0;
    std::mt19937_64 rng0(1);
    const auto basis = gen_directions(oracle::random_matrix(rng0, 5, 3), basis_only, 0);
    REQUIRE(basis.size() == 3);
    for (Index j = 0; j < 3; ++j) CHECK(basis[static_cast<std::size_t>(j)].u() == Vector::Unit(3, j));

    DirectionConfig one_point = basis_only;
    one_point.include_basis = false;
    one_point.n_one_point = 1;
    Matrix single(1, 3);
    single << 3.0, 0.0, -4.0;
    const auto op = gen_directions(single, one_point, 9);
    REQUIRE(op.size() == 1);
    CHECK((op[0].u() - Eigen::Vector3d(0.6, 0.0, -0.8)).cwiseAbs().maxCoeff() < 1e-15);

    std::mt19937_64 rng(6);
    const auto many = gen_directions(oracle::random_matrix(rng, 20, 5), random_only(100), 4);
    REQUIRE(many.size() == 100);
    for (const Direction& d : many) CHECK(std::abs(d.u().norm() - 1.0) < 1e-9);
}

TEST_CASE("gen_directions defaults and degenerate members") {
    std::mt19937_64 rng(8);
    const Matrix members = oracle::random_matrix(rng, 12, 4);
    // 100 random + 4 basis + min(50, 12) one-point + min(50, 66) two-points.
    CHECK(gen_directions(members, DirectionConfig{}, 1).size() == 100 + 4 + 12 + 50);

    DirectionConfig data_only;
    data_only.n_random = 0;
    data_only.include_basis = false;
    CHECK_THROWS_AS(gen_directions(Matrix::Zero(4, 2), data_only, 1), DegenerateDirectionsError);

    // One-point count above n_k draws the extras with replacement.
    DirectionConfig extra = data_only;
    extra.n_one_point = 30;
    extra.n_two_points = 0;
    CHECK(gen_directions(members, extra, 2).size() == 30);

    const auto a = gen_directions(members, DirectionConfig{}, 77);
    const auto b = gen_directions(members, DirectionConfig{}, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].u() == b[i].u());
}

TEST_CASE("robust_z_loss") {
    const ProjectionStats s = stats_1d(2.0, 1.4826);
    CHECK(robust_z_loss(s, scalar(2.0)) == 0.0);
    CHECK(robust_z_loss(stats_1d(0.5, 2.0), scalar(2.5)) == 1.0);
    CHECK(robust_z_loss(s, scalar(5.0)) == doctest::Approx(2.023472278429786).epsilon(1e-14));

    // Projected sample 0..4 has median 2 and MAD 1.4826.
    Matrix members(5, 1);
    members << 0, 1, 2, 3, 4;
    const ProjectionStats fitted = projection_stats(Direction::from(Vector::Ones(1)), members);
    CHECK(fitted.median_proj == 2.0);
    CHECK(fitted.mad_proj == doctest::Approx(1.4826).epsilon(1e-15));

    // MAD of zero is floored.
    CHECK(robust_z_loss(stats_1d(0.0, 0.0), scalar(1e-9)) == doctest::Approx(1.0));
}

TEST_CASE("svm_like_loss") {
    CHECK(svm_like_loss(stats_1d(0.0, 1.0), scalar(1.5), 2.0) == 0.0);
    CHECK(svm_like_loss(stats_1d(0.0, 1.0), scalar(-2.0), 2.0) == 0.0);
    CHECK(svm_like_loss(stats_1d(2.0, 1.4826), scalar(5.0), 2.0) == doctest::Approx(2.0348).epsilon(1e-14));
    // The margin is about zero, not about the projected median.
    CHECK(svm_like_loss(stats_1d(10.0, 1.0), scalar(10.0), 1.0) == 9.0);
    CHECK(svm_like_loss(stats_1d(0.0, 1.0), scalar(1e6), 1e12) == 0.0);
    CHECK_THROWS_AS((LossSpec{LossKind::SvmLike, 0.0}.validate()), InvalidArgumentError);
}

TEST_CASE("local_score is the max over directions") {
    std::mt19937_64 rng(12);
    const Matrix members = oracle::random_matrix(rng, 20, 3);
    ClusterEntry entry;
    entry.centroid = members.colwise().mean().transpose();
    entry.size = 20;
    const Matrix centered = members.rowwise() - entry.centroid.transpose();
    for (const Direction& u : gen_directions(centered, random_only(10), 3)) {
        entry.stats.push_back(projection_stats(u, centered));
    }
    for (const LossSpec loss : {LossSpec{LossKind::RobustZ, 1.0}, LossSpec{LossKind::SvmLike, 1.5}}) {
        for (int t = 0; t < 20; ++t) {
            const Vector f = oracle::random_matrix(rng, 3, 1, 2.0).col(0);
            double brute = 0.0;
            for (const ProjectionStats& s : entry.stats) brute = std::max(brute, loss_value(loss, s, f - entry.centroid));
            CHECK(local_score(f, entry, loss) == brute);
        }
    }

    ClusterEntry single = entry;
    single.stats.erase(single.stats.begin() + 1, single.stats.end());
    const Vector f = Vector::Constant(3, 0.7);
    CHECK(local_score(f, single, LossSpec{LossKind::RobustZ}) ==
          robust_z_loss(single.stats[0], f - single.centroid));
    CHECK(local_score(entry.centroid, entry, LossSpec{LossKind::SvmLike, 1.0}) == 0.0);
}

TEST_CASE("fit variants") {
    std::mt19937_64 rng(21);
    const Matrix X = three_blobs(rng, 20);

    FitConfig plo;
    plo.variant = Variant::Plo;
    const LkploModel pm = fit(X, plo);
    CHECK(pm.feature_dim() == 2);
    CHECK(pm.clusters.k == 1);
    CHECK_FALSE(pm.kpca.has_value());

    FitConfig kplo;
    kplo.variant = Variant::Kplo;
    kplo.kernel.gamma = 0.05;
    kplo.q = 6;
    FitConfig lk1 = kplo;
    lk1.variant = Variant::Lkplo;
    lk1.k = 1;
    const LkploModel a = fit(X, kplo);
    const LkploModel b = fit(X, lk1);
    REQUIRE(a.per_cluster.size() == 1);
    REQUIRE(b.per_cluster.size() == 1);
    CHECK(a.per_cluster[0].centroid == b.per_cluster[0].centroid);
    REQUIRE(a.per_cluster[0].stats.size() == b.per_cluster[0].stats.size());
    for (std::size_t i = 0; i < a.per_cluster[0].stats.size(); ++i) {
        CHECK(a.per_cluster[0].stats[i].direction.u() == b.per_cluster[0].stats[i].direction.u());
        CHECK(a.per_cluster[0].stats[i].median_proj == b.per_cluster[0].stats[i].median_proj);
        CHECK(a.per_cluster[0].stats[i].mad_proj == b.per_cluster[0].stats[i].mad_proj);
    }

    FitConfig lk3 = lk1;
    lk3.k = 3;
    const LkploModel c = fit(X, lk3);
    std::vector<int> blob(60);
    for (int i = 0; i < 60; ++i) blob[static_cast<std::size_t>(i)] = i / 20;
    CHECK(oracle::same_partition(blob, c.clusters.membership));

    FitConfig bad = lk3;
    bad.k = 100;
    CHECK_THROWS_AS(fit(X, bad), InvalidKError);
    CHECK_THROWS_AS(score(c, Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("score weighting and margins") {
    std::mt19937_64 rng(33);
    const Matrix X = oracle::random_matrix(rng, 40, 2);

    FitConfig cfg;
    cfg.variant = Variant::Kplo;
    cfg.kernel.gamma = 0.3;
    cfg.q = 5;
    cfg.loss = LossSpec{LossKind::SvmLike, 1.5};
    const LkploModel m = fit(X, cfg);
    const Matrix F = features(m, X);
    const std::vector<double> s = score(m, X);
    for (Index i = 0; i < X.rows(); ++i) {
        CHECK(s[static_cast<std::size_t>(i)] == local_score(F.row(i).transpose(), m.per_cluster[0], m.loss) / 40.0);
    }

    // The most central training point sits inside every margin when c >= 1.
    const LkploModel lk = [&] {
        FitConfig c2 = cfg;
        c2.variant = Variant::Lkplo;
        c2.k = 3;
        return fit(X, c2);
    }();
    const Matrix Fl = features(lk, X);
    int checked = 0;
    for (Index i = 0; i < X.rows(); ++i) {
        const Index c = assign_nearest(lk.clusters, Fl.row(i).transpose());
        const ClusterEntry& e = lk.per_cluster[static_cast<std::size_t>(c)];
        const Vector fp = Fl.row(i).transpose() - e.centroid;
        bool inside = true;
        for (const ProjectionStats& st : e.stats) inside = inside && std::abs(st.direction.u().dot(fp)) <= lk.loss.c * st.mad_proj;
        if (inside) {
            CHECK(score(lk, X.row(i))[0] == 0.0);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("PLO + Robust-Z + random directions equals classical RPD") {
    std::mt19937_64 rng(44);
    const Matrix X = oracle::random_matrix(rng, 50, 4);
    FitConfig cfg;
    cfg.variant = Variant::Plo;
    cfg.loss = LossSpec{LossKind::RobustZ};
    cfg.directions = random_only(60);
    const LkploModel m = fit(X, cfg);

    std::vector<Eigen::VectorXd> dirs;
    for (const ProjectionStats& s : m.per_cluster[0].stats) dirs.push_back(s.direction.u());
    const Matrix Xnew = oracle::random_matrix(rng, 30, 4, 2.0);
    const std::vector<double> rpd = oracle::rpd_outlyingness(X, dirs, Xnew);
    const std::vector<double> ours = score(m, Xnew);
    for (std::size_t i = 0; i < rpd.size(); ++i) CHECK(ours[i] * 50.0 == doctest::Approx(rpd[i]).epsilon(1e-9));

    std::vector<std::size_t> ra(rpd.size()), rb(rpd.size());
    std::iota(ra.begin(), ra.end(), 0);
    std::iota(rb.begin(), rb.end(), 0);
    std::sort(ra.begin(), ra.end(), [&](auto a, auto b) { return rpd[a] < rpd[b]; });
    std::sort(rb.begin(), rb.end(), [&](auto a, auto b) { return ours[a] < ours[b]; });
    CHECK(ra == rb);
}

TEST_CASE("SVM-like scores fall as c grows") {
    std::mt19937_64 rng(55);
    const Matrix X = oracle::random_matrix(rng, 30, 3);
    FitConfig cfg;
    cfg.variant = Variant::Lkplo;
    cfg.kernel.gamma = 0.4;
    cfg.q = 5;
    cfg.k = 2;
    LkploModel m = fit(X, cfg);
    m.loss.c = 0.1;
    const Matrix probe = oracle::random_matrix(rng, 20, 3, 2.0);
    std::vector<double> prev = score(m, probe);
    for (double c : {0.5, 1.0, 2.0, 4.0, 1e12}) {
        m.loss.c = c;
        const std::vector<double> cur = score(m, probe);
        for (std::size_t i = 0; i < cur.size(); ++i) CHECK(cur[i] <= prev[i]);
        prev = cur;
    }
    for (double v : prev) CHECK(v == 0.0);
}
