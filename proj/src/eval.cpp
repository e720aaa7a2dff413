#include "lkplo/eval.hpp"

#include "lkplo/errors.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

namespace lkplo {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kSearchStream = 2;
constexpr std::uint64_t kModelStream = 3;

void check_labels(std::span<const int> y) {
    for (int v : y) {
        if (v != 0 && v != 1) throw InvalidArgumentError("labels must be 0 or 1");
    }
}

double population_std(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

std::vector<Index> FoldPlan::test_indices(int fold) const {
    std::vector<Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(static_cast<Index>(i));
    }
    return out;
}

std::vector<Index> FoldPlan::train_indices(int fold) const {
    std::vector<Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) out.push_back(static_cast<Index>(i));
    }
    return out;
}

FoldPlan stratified_kfold(std::span<const int> y, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidArgumentError("fold count must be >= 2, got " + std::to_string(k));
    check_labels(y);

    std::array<std::vector<Index>, 2> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(static_cast<Index>(i));
    for (int c = 0; c < 2; ++c) {
        if (by_class[static_cast<std::size_t>(c)].size() < static_cast<std::size_t>(k)) {
            throw StratificationError("class " + std::to_string(c) + " has " +
                                      std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
                                      " samples, fewer than the " + std::to_string(k) + " folds");
        }
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(y.size(), -1);
    std::mt19937_64 rng(seed);
    std::size_t offset = 0;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t p = 0; p < members.size(); ++p) {
            plan.assignments[static_cast<std::size_t>(members[p])] = static_cast<int>((offset + p) % static_cast<std::size_t>(k));
        }
        offset += members.size();
    }
    return plan;
}

HoldoutSplit stratified_split(std::span<const int> y, const std::vector<Index>& rows, double val_fraction,
                              std::uint64_t seed) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw InvalidArgumentError("validation fraction must be in (0,1)");
    std::array<std::vector<Index>, 2> by_class;
    for (Index r : rows) {
        const int label = y[static_cast<std::size_t>(r)];
        if (label != 0 && label != 1) throw InvalidArgumentError("labels must be 0 or 1");
        by_class[static_cast<std::size_t>(label)].push_back(r);
    }
    HoldoutSplit split;
    std::mt19937_64 rng(seed);
    for (int c = 0; c < 2; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        if (members.size() < 2) {
            throw StratificationError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                                      " training samples; the validation split needs at least 2");
        }
        std::shuffle(members.begin(), members.end(), rng);
        const auto n = static_cast<double>(members.size());
        auto n_val = static_cast<std::size_t>(std::lround(val_fraction * n));
        n_val = std::clamp<std::size_t>(n_val, 1, members.size() - 1);
        split.validation.insert(split.validation.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
        split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

std::uint64_t mann_whitney_twice_u(std::span<const double> scores, std::span<const int> y) {
    if (scores.size() != y.size()) throw DimensionError("roc_auc: score and label counts differ");
    check_labels(y);
    for (double s : scores) {
        if (std::isnan(s)) throw InvalidArgumentError("roc_auc: NaN score");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::uint64_t twice_u = 0;
    std::uint64_t inliers_below = 0;
    for (std::size_t start = 0; start < order.size();) {
        std::size_t end = start;
        std::uint64_t pos = 0;
        std::uint64_t neg = 0;
        while (end < order.size() && scores[order[end]] == scores[order[start]]) {
            (y[order[end]] == 1 ? pos : neg) += 1;
            ++end;
        }
        twice_u += 2 * pos * inliers_below + pos * neg;
        inliers_below += neg;
        start = end;
    }
    return twice_u;
}

double roc_auc(std::span<const double> scores, std::span<const int> y) {
    const std::uint64_t twice_u = mann_whitney_twice_u(scores, y);
    const auto n_pos = static_cast<std::uint64_t>(std::count(y.begin(), y.end(), 1));
    const std::uint64_t n_neg = y.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw InvalidArgumentError("roc_auc needs both inliers and outliers");
    return static_cast<double>(twice_u) / static_cast<double>(2 * n_pos * n_neg);
}

void SearchSpace::validate() const {
    for (const ParamSpec& p : entries) {
        std::visit(
            [&](const auto& d) {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, Categorical>) {
                    if (d.options.empty()) throw InvalidArgumentError(p.name + ": empty categorical set");
                } else {
                    if (!(d.lo < d.hi)) throw InvalidArgumentError(p.name + ": range needs lo < hi");
                    if constexpr (std::is_same_v<D, LogUniformReal>) {
                        if (!(d.lo > 0.0)) throw InvalidArgumentError(p.name + ": log-uniform range needs lo > 0");
                    }
                }
            },
            p.domain);
    }
}

std::int64_t get_int(const Params& p, const std::string& name) {
    const auto it = p.find(name);
    if (it == p.end()) throw InvalidArgumentError("missing parameter '" + name + "'");
    if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
    throw InvalidArgumentError("parameter '" + name + "' is not an integer");
}

double get_real(const Params& p, const std::string& name) {
    const auto it = p.find(name);
    if (it == p.end()) throw InvalidArgumentError("missing parameter '" + name + "'");
    if (const auto* v = std::get_if<double>(&it->second)) return *v;
    if (const auto* v = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*v);
    throw InvalidArgumentError("parameter '" + name + "' is not numeric");
}

json params_json(const Params& p) {
    json j = json::object();
    for (const auto& [name, value] : p) {
        std::visit([&](const auto& v) { j[name] = v; }, value);
    }
    return j;
}

Params sample_params(const SearchSpace& space, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Params out;
    for (const ParamSpec& p : space.entries) {
        std::visit(
            [&](const auto& d) {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, IntRange>) {
                    out[p.name] = std::uniform_int_distribution<std::int64_t>(d.lo, d.hi)(rng);
                } else if constexpr (std::is_same_v<D, UniformReal>) {
                    out[p.name] = std::uniform_real_distribution<double>(d.lo, d.hi)(rng);
                } else if constexpr (std::is_same_v<D, LogUniformReal>) {
                    out[p.name] =
                        std::exp(std::uniform_real_distribution<double>(std::log(d.lo), std::log(d.hi))(rng));
                } else {
                    std::uniform_int_distribution<std::size_t> pick(0, d.options.size() - 1);
                    out[p.name] = d.options[pick(rng)];
                }
            },
            p.domain);
    }
    return out;
}

SearchResult random_search(const SearchSpace& space, int n_trials, std::uint64_t seed,
                           const std::function<double(const Params&)>& objective) {
    if (n_trials < 1) throw InvalidArgumentError("n_trials must be >= 1");
    space.validate();
    SearchResult result;
    result.best_value = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_trials; ++t) {
        Trial trial;
        trial.index = t;
        trial.params = sample_params(space, derive_seed(seed, static_cast<std::uint64_t>(t)));
        try {
            trial.objective = objective(trial.params);
            if (std::isnan(trial.objective)) trial.objective = -std::numeric_limits<double>::infinity();
        } catch (const std::exception& e) {
            trial.objective = -std::numeric_limits<double>::infinity();
            trial.error = e.what();
        }
        if (t == 0 || trial.objective > result.best_value) {
            result.best_trial = t;
            result.best_value = trial.objective;
            result.best = trial.params;
        }
        result.trials.push_back(std::move(trial));
    }
    return result;
}

SearchSpace default_space(Variant variant, LossKind loss) {
    SearchSpace s;
    if (variant == Variant::Lkplo) s.entries.push_back({"K", IntRange{2, 30}});
    if (variant != Variant::Plo) {
        s.entries.push_back({"gamma", LogUniformReal{1e-4, 1e1}});
        s.entries.push_back({"q", IntRange{5, 30}});
    }
    if (loss == LossKind::SvmLike) s.entries.push_back({"c", UniformReal{1.0, 5.0}});
    return s;
}

FitConfig fit_config_from(Variant variant, LossKind loss, const Params& params, Index n_train, std::uint64_t seed) {
    FitConfig cfg;
    cfg.variant = variant;
    cfg.seed = seed;
    cfg.loss.kind = loss;
    if (loss == LossKind::SvmLike) cfg.loss.c = get_real(params, "c");
    if (variant != Variant::Plo) {
        cfg.kernel.gamma = get_real(params, "gamma");
        cfg.q = static_cast<Index>(get_int(params, "q"));
    }
    cfg.k = variant == Variant::Lkplo ? std::min<Index>(static_cast<Index>(get_int(params, "K")), n_train) : 1;
    return cfg;
}

Method make_method(const std::string& name) {
    Variant variant;
    LossKind loss = LossKind::SvmLike;
    if (name == "plo") {
        variant = Variant::Plo;
    } else if (name == "kplo") {
        variant = Variant::Kplo;
    } else if (name == "lkplo-svm") {
        variant = Variant::Lkplo;
    } else if (name == "lkplo-rz") {
        variant = Variant::Lkplo;
        loss = LossKind::RobustZ;
    } else {
        throw InvalidArgumentError("unknown method '" + name + "' (expected plo, kplo, lkplo-rz or lkplo-svm)");
    }
    Method m;
    m.name = name;
    m.space = default_space(variant, loss);
    m.fit = [variant, loss](const Matrix& train, const Params& params, std::uint64_t seed) -> Scorer {
        auto model = std::make_shared<const LkploModel>(
            fit(train, fit_config_from(variant, loss, params, train.rows(), seed)));
        return [model](const Matrix& X) { return score(*model, X); };
    };
    return m;
}

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names{"plo", "kplo", "lkplo-rz", "lkplo-svm"};
    return names;
}

std::vector<double> ExperimentReport::fold_aucs() const {
    std::vector<double> out;
    for (const FoldResult& f : folds) out.push_back(f.auc);
    return out;
}

void check_evaluable(const Dataset& data, const Protocol& protocol) {
    if (static_cast<Index>(data.y.size()) != data.n()) throw InvalidArgumentError(data.name + ": labels missing");
    const auto outliers = static_cast<int>(data.n_outliers());
    const auto inliers = static_cast<int>(data.y.size()) - outliers;
    if (outliers < protocol.folds || inliers < protocol.folds) {
        throw StratificationError(data.name + ": " + std::to_string(inliers) + " inliers / " +
                                  std::to_string(outliers) + " outliers cannot fill " +
                                  std::to_string(protocol.folds) + " stratified folds");
    }
}

ExperimentReport evaluate_method(const Dataset& data, const Method& method, const Protocol& protocol) {
    check_evaluable(data, protocol);
    const auto started = std::chrono::steady_clock::now();

    ExperimentReport report;
    report.dataset = data.name;
    report.method = method.name;
    report.protocol = protocol;

    const FoldPlan plan = stratified_kfold(data.y, protocol.folds, protocol.seed);
    for (int f = 0; f < protocol.folds; ++f) {
        const auto fold_id = static_cast<std::uint64_t>(f);
        const std::vector<Index> outer_train = plan.train_indices(f);
        const std::vector<Index> test = plan.test_indices(f);
        const HoldoutSplit inner =
            stratified_split(data.y, outer_train, protocol.val_fraction, derive_seed(protocol.seed, kSplitStream, fold_id));
        const std::uint64_t model_seed = derive_seed(protocol.seed, kModelStream, fold_id);

        const Dataset inner_train = subset(data, inner.train);
        const Dataset validation = subset(data, inner.validation);
        const Standardizer inner_std = fit_standardizer(inner_train.X);
        const Matrix inner_X = apply(inner_std, inner_train.X);
        const Matrix val_X = apply(inner_std, validation.X);

        const SearchResult search = random_search(
            method.space, protocol.trials, derive_seed(protocol.seed, kSearchStream, fold_id), [&](const Params& p) {
                const Scorer scorer = method.fit(inner_X, p, model_seed);
                return roc_auc(scorer(val_X), validation.y);
            });

        const Dataset train_set = subset(data, outer_train);
        const Dataset test_set = subset(data, test);
        FoldResult fr;
        fr.fold = f;
        fr.best_trial = search.best_trial;
        fr.best_params = search.best;
        fr.best_validation_auc = search.best_value;
        fr.trials = search.trials;
        fr.standardizer = fit_standardizer(train_set.X);
        const Matrix train_X = apply(fr.standardizer, train_set.X);
        const Scorer scorer = method.fit(train_X, search.best, model_seed);
        fr.train_scores = scorer(train_X);
        fr.auc = roc_auc(scorer(apply(fr.standardizer, test_set.X)), test_set.y);
        report.folds.push_back(std::move(fr));
    }

    const std::vector<double> aucs = report.fold_aucs();
    report.mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / static_cast<double>(aucs.size());
    report.std = population_std(aucs, report.mean);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

std::vector<ExperimentReport> run_ablation(const std::vector<Dataset>& datasets, const Protocol& protocol) {
    for (const Dataset& d : datasets) check_evaluable(d, protocol);
    std::vector<ExperimentReport> out;
    for (const Dataset& d : datasets) {
        for (const std::string& m : kAblationMethods) out.push_back(evaluate_method(d, make_method(m), protocol));
    }
    return out;
}

json report_json(const ExperimentReport& report, bool include_timing) {
    json folds = json::array();
    for (const FoldResult& f : report.folds) {
        json trials = json::array();
        for (const Trial& t : f.trials) {
            json jt{{"trial", t.index}, {"params", params_json(t.params)}};
            jt["validation_auc"] = std::isfinite(t.objective) ? json(t.objective) : json(nullptr);
            if (!t.error.empty()) jt["error"] = t.error;
            trials.push_back(std::move(jt));
        }
        folds.push_back(json{{"fold", f.fold},
                             {"test_auc", f.auc},
                             {"best_trial", f.best_trial},
                             {"best_params", params_json(f.best_params)},
                             {"best_validation_auc",
                              std::isfinite(f.best_validation_auc) ? json(f.best_validation_auc) : json(nullptr)},
                             {"trials", std::move(trials)}});
    }
    json j{{"dataset", report.dataset},
           {"method", report.method},
           {"protocol",
            json{{"folds", report.protocol.folds},
                 {"trials", report.protocol.trials},
                 {"val_fraction", report.protocol.val_fraction},
                 {"seed", report.protocol.seed}}},
           {"fold_aucs", report.fold_aucs()},
           {"mean", report.mean},
           {"std", report.std},
           {"folds", std::move(folds)}};
    if (include_timing) j["wall_seconds"] = report.wall_seconds;
    return j;
}

std::string reports_csv(const std::vector<ExperimentReport>& reports) {
    std::size_t max_folds = 0;
    for (const auto& r : reports) max_folds = std::max(max_folds, r.folds.size());
    std::string out = "dataset,method,mean,std";
    for (std::size_t f = 0; f < max_folds; ++f) out += ",auc_fold_" + std::to_string(f + 1);
    out += '\n';
    for (const auto& r : reports) {
        out += r.dataset + ',' + r.method + ',' + format_double(r.mean) + ',' + format_double(r.std);
        for (std::size_t f = 0; f < max_folds; ++f) {
            out += ',';
            if (f < r.folds.size()) out += format_double(r.folds[f].auc);
        }
        out += '\n';
    }
    return out;
}

std::string format_mean_std(double mean, double std) { return fixed3(mean) + " ± " + fixed3(std); }

std::string ablation_table(const std::vector<ExperimentReport>& reports) {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    for (const auto& r : reports) {
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    }
    // "±" is two bytes but one column wide.
    auto width = [](const std::string& s) {
        std::size_t w = 0;
        for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
        return w;
    };
    auto pad = [&](const std::string& s, std::size_t w) { return s + std::string(w > width(s) ? w - width(s) : 0, ' '); };

    std::vector<std::vector<std::string>> cells(methods.size() + 1);
    cells[0].push_back("variant");
    for (const auto& d : datasets) cells[0].push_back(d);
    for (std::size_t m = 0; m < methods.size(); ++m) {
        cells[m + 1].push_back(methods[m]);
        for (const auto& d : datasets) {
            std::string cell = "-";
            for (const auto& r : reports) {
                if (r.method == methods[m] && r.dataset == d) cell = format_mean_std(r.mean, r.std);
            }
            cells[m + 1].push_back(cell);
        }
    }
    std::vector<std::size_t> widths(datasets.size() + 1, 0);
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
    }
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += c + 1 < row.size() ? pad(row[c], widths[c] + 2) : row[c];
        }
        out += '\n';
    }
    return out;
}

}  // namespace lkplo
