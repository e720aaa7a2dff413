#pragma once

// Cross-validated evaluation: stratified folds, ROC AUC, random hyperparameter
// search, per-method protocols and the PLO / KPLO / LKPLO ablation ladder.

#include "lkplo/data.hpp"
#include "lkplo/plo.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lkplo {

struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;  // fold index per sample
    std::uint64_t seed = 0;

    std::vector<Index> test_indices(int fold) const;
    std::vector<Index> train_indices(int fold) const;
};

// Shuffles each class, then deals it round-robin over the folds.
FoldPlan stratified_kfold(std::span<const int> y, int k, std::uint64_t seed);

struct HoldoutSplit {
    std::vector<Index> train;
    std::vector<Index> validation;
};

// Stratified split of `rows` (indices into y); each class sends
// round(fraction * n_c), clamped to [1, n_c - 1], to validation.
HoldoutSplit stratified_split(std::span<const int> y, const std::vector<Index>& rows, double val_fraction,
                              std::uint64_t seed);

// Twice the Mann-Whitney U of the outliers (label 1) over the inliers:
// 2 * wins + ties, exact in integer arithmetic.
std::uint64_t mann_whitney_twice_u(std::span<const double> scores, std::span<const int> y);

// P(outlier score > inlier score) + 0.5 * P(equal).
double roc_auc(std::span<const double> scores, std::span<const int> y);

struct IntRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};
struct UniformReal {
    double lo = 0.0;
    double hi = 1.0;
};
struct LogUniformReal {
    double lo = 1.0;
    double hi = 10.0;
};
struct Categorical {
    std::vector<std::string> options;
};

struct ParamSpec {
    std::string name;
    std::variant<IntRange, UniformReal, LogUniformReal, Categorical> domain;
};

struct SearchSpace {
    std::vector<ParamSpec> entries;

    void validate() const;
};

using ParamValue = std::variant<std::int64_t, double, std::string>;
using Params = std::map<std::string, ParamValue>;

std::int64_t get_int(const Params& p, const std::string& name);
double get_real(const Params& p, const std::string& name);
nlohmann::json params_json(const Params& p);

Params sample_params(const SearchSpace& space, std::uint64_t seed);

struct Trial {
    int index = 0;
    Params params;
    double objective = 0.0;  // -inf when the objective threw
    std::string error;
};

struct SearchResult {
    int best_trial = 0;
    Params best;
    double best_value = 0.0;
    std::vector<Trial> trials;
};

// Trial t samples with derive_seed(seed, t). Highest objective wins, earliest on ties.
SearchResult random_search(const SearchSpace& space, int n_trials, std::uint64_t seed,
                           const std::function<double(const Params&)>& objective);

using Scorer = std::function<std::vector<double>(const Matrix&)>;

// fit receives standardized training rows and returns a scorer for new rows.
struct Method {
    std::string name;
    SearchSpace space;
    std::function<Scorer(const Matrix& train, const Params& params, std::uint64_t seed)> fit;
};

// Default search spaces: K in [2,30], gamma log-uniform [1e-4, 1e1],
// q in [5,30], c uniform [1,5]; parameters a variant lacks are omitted.
SearchSpace default_space(Variant variant, LossKind loss);

// Builds the model config for one trial; K is clamped to the training size.
FitConfig fit_config_from(Variant variant, LossKind loss, const Params& params, Index n_train, std::uint64_t seed);

// "plo", "kplo", "lkplo-rz" or "lkplo-svm". PLO and KPLO use the SVM-like loss.
Method make_method(const std::string& name);
const std::vector<std::string>& method_names();

struct Protocol {
    int folds = 5;
    int trials = 50;
    double val_fraction = 0.25;
    std::uint64_t seed = 42;
};

struct FoldResult {
    int fold = 0;
    double auc = 0.0;
    int best_trial = 0;
    Params best_params;
    double best_validation_auc = 0.0;
    std::vector<Trial> trials;
    Standardizer standardizer;         // fitted on the outer-train rows
    std::vector<double> train_scores;  // refitted model on its own training rows
};

struct ExperimentReport {
    std::string dataset;
    std::string method;
    Protocol protocol;
    std::vector<FoldResult> folds;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over folds
    double wall_seconds = 0.0;

    std::vector<double> fold_aucs() const;
};

// Requires at least one inlier and one outlier per fold and per inner split.
void check_evaluable(const Dataset& data, const Protocol& protocol);

ExperimentReport evaluate_method(const Dataset& data, const Method& method, const Protocol& protocol);

inline const std::vector<std::string> kAblationMethods{"plo", "kplo", "lkplo-svm"};

// Dataset-major: for each dataset, one report per ablation method.
std::vector<ExperimentReport> run_ablation(const std::vector<Dataset>& datasets, const Protocol& protocol);

nlohmann::json report_json(const ExperimentReport& report, bool include_timing = false);

// Header: dataset,method,mean,std,auc_fold_1..auc_fold_k
std::string reports_csv(const std::vector<ExperimentReport>& reports);

// Aligned text table with one row per method and one column per dataset.
std::string ablation_table(const std::vector<ExperimentReport>& reports);

std::string format_mean_std(double mean, double std);

}  // namespace lkplo
