#include "lkplo/errors.hpp"
#include "lkplo/eval.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace lkplo;

namespace {

std::vector<int> labels(int zeros, int ones) {
    std::vector<int> y(static_cast<std::size_t>(zeros), 0);
    y.insert(y.end(), static_cast<std::size_t>(ones), 1);
    return y;
}

// Dataset whose first feature is the label; later columns are noise.
Dataset label_leaking_dataset(int zeros, int ones) {
    Dataset d;
    d.name = "leak";
    d.y = labels(zeros, ones);
    std::mt19937_64 rng(1);
    d.X = oracle::random_matrix(rng, zeros + ones, 2);
    for (std::size_t i = 0; i < d.y.size(); ++i) d.X(static_cast<Index>(i), 0) = d.y[i];
    return d;
}

Method feature_method(std::string name, bool constant) {
    Method m;
    m.name = std::move(name);
    m.space.entries.push_back({"unused", UniformReal{0.0, 1.0}});
    m.fit = [constant](const Matrix&, const Params&, std::uint64_t) -> Scorer {
        return [constant](const Matrix& X) {
            std::vector<double> s(static_cast<std::size_t>(X.rows()));
            for (Index i = 0; i < X.rows(); ++i) s[static_cast<std::size_t>(i)] = constant ? 1.0 : X(i, 0);
            return s;
        };
    };
    return m;
}

}  // namespace

TEST_CASE("stratified_kfold") {
    const FoldPlan plan = stratified_kfold(labels(50, 10), 5, 42);
    const std::vector<int> y = labels(50, 10);
    for (int f = 0; f < 5; ++f) {
        int zeros = 0, ones = 0;
        for (Index i : plan.test_indices(f)) (y[static_cast<std::size_t>(i)] ? ones : zeros) += 1;
        CHECK(zeros == 10);
        CHECK(ones == 2);
    }

    const std::vector<int> y7 = labels(45, 7);
    const FoldPlan p7 = stratified_kfold(y7, 5, 3);
    int total = 0;
    for (int f = 0; f < 5; ++f) {
        int ones = 0;
        for (Index i : p7.test_indices(f)) ones += y7[static_cast<std::size_t>(i)];
        CHECK((ones == 1 || ones == 2));
        total += ones;
    }
    CHECK(total == 7);

    CHECK(stratified_kfold(y7, 5, 3).assignments == p7.assignments);
    CHECK_THROWS_AS(stratified_kfold(labels(50, 4), 5, 1), StratificationError);
    CHECK_THROWS_AS(stratified_kfold(labels(50, 0), 5, 1), StratificationError);
}

TEST_CASE("stratified_split") {
    const std::vector<int> y = labels(40, 8);
    std::vector<Index> rows(48);
    std::iota(rows.begin(), rows.end(), Index{0});
    const HoldoutSplit s = stratified_split(y, rows, 0.25, 7);
    CHECK(s.validation.size() == 12);
    CHECK(s.train.size() == 36);
    int val_ones = 0;
    for (Index i : s.validation) val_ones += y[static_cast<std::size_t>(i)];
    CHECK(val_ones == 2);
    CHECK_THROWS_AS(stratified_split(labels(10, 1), std::vector<Index>{0, 1, 2, 10}, 0.25, 1), StratificationError);
}

TEST_CASE("roc_auc") {
    CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(roc_auc(std::vector<double>(6, 3.0), std::vector<int>{0, 1, 0, 1, 0, 0}) == 0.5);
    CHECK(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) == 0.75);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{1, 2}, std::vector<int>{0, 0}), InvalidArgumentError);

    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> coarse(0, 5);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> s(60);
        std::vector<int> y(60);
        for (std::size_t i = 0; i < 60; ++i) {
            s[i] = coarse(rng);
            y[i] = i % 4 == 0;
        }
        CHECK(roc_auc(s, y) == oracle::pairwise_auc(s, y));
    }
}

TEST_CASE("random_search") {
    SearchSpace space;
    space.entries.push_back({"K", IntRange{2, 30}});
    space.entries.push_back({"gamma", LogUniformReal{1e-4, 1e1}});
    space.entries.push_back({"kind", Categorical{{"a", "b"}}});

    const SearchResult one = random_search(space, 1, 5, [](const Params&) { return 0.3; });
    CHECK(one.best == one.trials[0].params);

    const SearchResult flat = random_search(space, 20, 5, [](const Params&) { return 1.0; });
    CHECK(flat.best_trial == 0);

    const SearchResult hit = random_search(space, 200, 9, [](const Params& p) { return get_int(p, "K") == 7 ? 1.0 : 0.0; });
    CHECK(get_int(hit.best, "K") == 7);

    for (const Trial& t : hit.trials) {
        const double g = get_real(t.params, "gamma");
        CHECK(g >= 1e-4);
        CHECK(g <= 1e1);
    }
    const SearchResult again = random_search(space, 200, 9, [](const Params&) { return 0.0; });
    for (std::size_t i = 0; i < again.trials.size(); ++i) CHECK(again.trials[i].params == hit.trials[i].params);

    const SearchResult failing = random_search(space, 3, 1, [](const Params& p) -> double {
        if (std::get<std::string>(p.at("kind")) == "a") throw InvalidKError("boom");
        return 0.1;
    });
    CHECK(failing.trials.size() == 3);

    SearchSpace bad;
    bad.entries.push_back({"g", LogUniformReal{0.0, 1.0}});
    CHECK_THROWS_AS(random_search(bad, 1, 1, [](const Params&) { return 0.0; }), InvalidArgumentError);
}

TEST_CASE("fit_config_from clamps K") {
    Params p{{"K", std::int64_t{30}}, {"gamma", 0.5}, {"q", std::int64_t{8}}, {"c", 2.5}};
    const FitConfig cfg = fit_config_from(Variant::Lkplo, LossKind::SvmLike, p, 12, 3);
    CHECK(cfg.k == 12);
    CHECK(cfg.q == 8);
    CHECK(cfg.loss.c == 2.5);
    CHECK(default_space(Variant::Plo, LossKind::SvmLike).entries.size() == 1);
    CHECK(default_space(Variant::Lkplo, LossKind::RobustZ).entries.size() == 3);
    CHECK(default_space(Variant::Lkplo, LossKind::SvmLike).entries.size() == 4);
}

TEST_CASE("evaluate_method with reference scorers") {
    const Dataset d = label_leaking_dataset(60, 15);
    Protocol p;
    p.trials = 3;
    const ExperimentReport constant = evaluate_method(d, feature_method("constant", true), p);
    CHECK(constant.mean == 0.5);
    CHECK(constant.std == 0.0);
    CHECK(constant.folds.size() == 5);

    const ExperimentReport perfect = evaluate_method(d, feature_method("oracle", false), p);
    CHECK(perfect.mean == 1.0);

    Dataset single = d;
    std::fill(single.y.begin(), single.y.end(), 0);
    CHECK_THROWS_AS(evaluate_method(single, feature_method("c", true), p), StratificationError);
}

TEST_CASE("report outputs") {
    const Dataset d = label_leaking_dataset(30, 10);
    Protocol p;
    p.trials = 2;
    const ExperimentReport r = evaluate_method(d, feature_method("oracle", false), p);
    const std::string csv = reports_csv({r});
    CHECK(csv.rfind("dataset,method,mean,std,auc_fold_1,auc_fold_2,auc_fold_3,auc_fold_4,auc_fold_5\n", 0) == 0);
    CHECK(csv.find("leak,oracle,1,0,1,1,1,1,1") != std::string::npos);
    const nlohmann::json j = report_json(r);
    CHECK(j.at("folds").size() == 5);
    CHECK(j.at("folds")[0].at("trials").size() == 2);
    CHECK_FALSE(j.contains("wall_seconds"));
    CHECK(report_json(r, true).contains("wall_seconds"));
    CHECK(format_mean_std(0.7884, 0.1411) == "0.788 ± 0.141");
}

TEST_CASE("LKPLO pipeline on a small synthetic task") {
    Dataset d = gen_three_gaussians(1);
    Protocol p;
    p.folds = 3;
    p.trials = 4;
    const ExperimentReport r = evaluate_method(d, make_method("lkplo-svm"), p);
    CHECK(r.folds.size() == 3);
    for (const FoldResult& f : r.folds) {
        CHECK(f.auc >= 0.0);
        CHECK(f.auc <= 1.0);
        CHECK(get_int(f.best_params, "K") >= 2);
    }
    CHECK_THROWS_AS(make_method("knn"), InvalidArgumentError);
}
