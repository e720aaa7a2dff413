#include "commands.hpp"

#include "lkplo/data.hpp"
#include "lkplo/errors.hpp"
#include "lkplo/eval.hpp"
#include "lkplo/model_io.hpp"
#include "lkplo/plo.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace lkplo::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kSynthPrefix = "synth:";

// Writes through a sibling temporary so a failed run never leaves a partial artifact.
void write_file(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("IOError", "cannot write '" + path.string() + "'");
        f << content;
        f.flush();
        if (!f) {
            f.close();
            fs::remove(tmp);
            throw Error("IOError", "write failed for '" + path.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

Dataset resolve_dataset(const std::string& spec, std::uint64_t data_seed) {
    if (spec.rfind(kSynthPrefix, 0) == 0) return generate_synthetic(spec.substr(std::char_traits<char>::length(kSynthPrefix)), data_seed);
    return load_csv(spec);
}

struct FitOptions {
    std::string data;
    std::string out;
    std::string method = "lkplo-svm";
    std::string loss;
    double gamma = 1.0;
    long long q = 10;
    long long k = 5;
    double c = 2.0;
    std::size_t n_random = 100;
    bool basis = true;
    std::optional<std::size_t> n_one_point;
    std::optional<std::size_t> n_two_points;
    std::uint64_t seed = 42;
    bool no_standardize = false;
};

FitConfig to_fit_config(const FitOptions& o) {
    FitConfig cfg;
    if (o.method == "plo") {
        cfg.variant = Variant::Plo;
    } else if (o.method == "kplo") {
        cfg.variant = Variant::Kplo;
    } else if (o.method == "lkplo-svm" || o.method == "lkplo") {
        cfg.variant = Variant::Lkplo;
    } else if (o.method == "lkplo-rz") {
        cfg.variant = Variant::Lkplo;
        cfg.loss.kind = LossKind::RobustZ;
    } else {
        throw InvalidArgumentError("unknown method '" + o.method + "'");
    }
    if (!o.loss.empty()) cfg.loss.kind = parse_loss_kind(o.loss);
    cfg.loss.c = o.c;
    cfg.kernel.gamma = o.gamma;
    cfg.q = static_cast<Index>(o.q);
    cfg.k = cfg.variant == Variant::Lkplo ? static_cast<Index>(o.k) : 1;
    cfg.directions.n_random = o.n_random;
    cfg.directions.include_basis = o.basis;
    cfg.directions.n_one_point = o.n_one_point;
    cfg.directions.n_two_points = o.n_two_points;
    cfg.seed = o.seed;
    return cfg;
}

int cmd_fit(const FitOptions& o, std::ostream& out) {
    const Dataset data = load_csv(o.data, /*require_label=*/false);
    SavedModel saved;
    Matrix X = data.X;
    if (!o.no_standardize) {
        saved.standardizer = fit_standardizer(data.X);
        X = apply(*saved.standardizer, data.X);
    }
    saved.model = fit(X, to_fit_config(o));
    write_file(o.out, serialize(saved));

    const LkploModel& m = saved.model;
    std::string counts;
    for (const ClusterEntry& e : m.per_cluster) {
        if (!counts.empty()) counts += ',';
        counts += std::to_string(e.stats.size());
    }
    out << "variant=" << to_string(m.variant) << " loss=" << to_string(m.loss.kind) << " q=" << m.feature_dim()
        << " K=" << m.clusters.k << " directions=" << counts << '\n';
    return 0;
}

struct ScoreOptions {
    std::string model;
    std::string data;
    std::string out;
};

int cmd_score(const ScoreOptions& o, std::ostream& out) {
    const SavedModel saved = load_model(o.model);
    const Dataset data = load_csv(o.data, /*require_label=*/false);
    const std::vector<double> scores = score_raw(saved, data.X);
    std::string csv = "row_index,score\n";
    for (std::size_t i = 0; i < scores.size(); ++i) csv += std::to_string(i) + ',' + format_double(scores[i]) + '\n';
    write_file(o.out, csv);
    out << "scored " << scores.size() << " rows\n";
    return 0;
}

struct ProtocolOptions {
    int folds = 5;
    int trials = 50;
    std::uint64_t seed = 42;
    std::uint64_t data_seed = 42;
    bool timing = false;

    Protocol protocol() const {
        Protocol p;
        p.folds = folds;
        p.trials = trials;
        p.seed = seed;
        return p;
    }
};

struct BenchmarkOptions {
    std::string data;
    std::string method = "lkplo-svm";
    std::string out;
    ProtocolOptions protocol;
};

int cmd_benchmark(const BenchmarkOptions& o, std::ostream& out) {
    const Dataset data = resolve_dataset(o.data, o.protocol.data_seed);
    const Method method = make_method(o.method);
    const ExperimentReport report = evaluate_method(data, method, o.protocol.protocol());
    write_file(o.out + ".json", report_json(report, o.protocol.timing).dump(1) + "\n");
    write_file(o.out + ".csv", reports_csv({report}));
    out << report.dataset << ' ' << report.method << ' ' << format_mean_std(report.mean, report.std) << '\n';
    if (o.protocol.timing) out << "wall_seconds=" << report.wall_seconds << '\n';
    return 0;
}

struct AblationOptions {
    std::vector<std::string> data;
    std::string out;
    ProtocolOptions protocol;
};

int cmd_ablation(const AblationOptions& o, std::ostream& out) {
    std::vector<Dataset> datasets;
    if (o.data.empty()) {
        for (const std::string& name : synthetic_names()) datasets.push_back(generate_synthetic(name, o.protocol.data_seed));
    } else {
        for (const std::string& spec : o.data) datasets.push_back(resolve_dataset(spec, o.protocol.data_seed));
    }
    const std::vector<ExperimentReport> reports = run_ablation(datasets, o.protocol.protocol());
    const std::string table = ablation_table(reports);
    nlohmann::json all = nlohmann::json::array();
    for (const auto& r : reports) all.push_back(report_json(r, o.protocol.timing));
    write_file(o.out + ".csv", reports_csv(reports));
    write_file(o.out + ".txt", table);
    write_file(o.out + ".json", all.dump(1) + "\n");
    out << table;
    return 0;
}

struct GenerateOptions {
    std::string data;
    std::uint64_t seed = 42;
    std::string out;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
    std::string name = o.data;
    if (name.rfind(kSynthPrefix, 0) == 0) name = name.substr(std::char_traits<char>::length(kSynthPrefix));
    const Dataset d = generate_synthetic(name, o.seed);
    write_file(o.out, to_csv(d));
    out << d.name << ": " << d.n() << " rows, " << d.n_outliers() << " outliers\n";
    return 0;
}

struct GridOptions {
    std::string model;
    std::vector<double> bounds;
    int resolution = 100;
    std::string out;
};

int cmd_grid(const GridOptions& o, std::ostream& out) {
    if (o.bounds.size() != 4 || !(o.bounds[0] < o.bounds[1]) || !(o.bounds[2] < o.bounds[3])) {
        throw InvalidArgumentError("--bounds expects xmin,xmax,ymin,ymax with xmin < xmax and ymin < ymax");
    }
    if (o.resolution < 2) throw InvalidArgumentError("--resolution must be >= 2");
    const SavedModel saved = load_model(o.model);
    if (saved.model.input_dim != 2) {
        throw DimensionError("boundary grid needs a model trained on 2-D data, this one has " +
                             std::to_string(saved.model.input_dim) + " features");
    }
    const int n = o.resolution;
    Matrix lattice(static_cast<Index>(n) * n, 2);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const Index row = static_cast<Index>(iy) * n + ix;
            lattice(row, 0) = o.bounds[0] + (o.bounds[1] - o.bounds[0]) * ix / (n - 1);
            lattice(row, 1) = o.bounds[2] + (o.bounds[3] - o.bounds[2]) * iy / (n - 1);
        }
    }
    const std::vector<double> scores = score_raw(saved, lattice);
    std::string csv = "x,y,score\n";
    for (Index r = 0; r < lattice.rows(); ++r) {
        csv += format_double(lattice(r, 0)) + ',' + format_double(lattice(r, 1)) + ',' +
               format_double(scores[static_cast<std::size_t>(r)]) + '\n';
    }
    write_file(o.out, csv);
    out << "wrote " << lattice.rows() << " grid points\n";
    return 0;
}

void add_protocol_options(CLI::App* cmd, ProtocolOptions& p) {
    cmd->add_option("--folds", p.folds, "Stratified outer folds")->capture_default_str()->check(CLI::Range(2, 1000));
    cmd->add_option("--trials", p.trials, "Random-search trials per fold")->capture_default_str()->check(CLI::Range(1, 100000));
    cmd->add_option("--seed", p.seed, "Protocol seed (folds, splits, search, model)")->capture_default_str();
    cmd->add_option("--data-seed", p.data_seed, "Seed for synth: datasets")->capture_default_str();
    cmd->add_flag("--timing", p.timing, "Include wall-clock seconds in the outputs");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-stage localized kernel projection outlyingness (LKPLO)", "lkplo"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Configuration file: [command] sections of key = value lines");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.fallthrough();  // lets "--config" appear after the subcommand too

    FitOptions fit_o;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a detector on a CSV and save the model");
    fit_cmd->add_option("--data", fit_o.data, "Training CSV (a label column, if present, is ignored)")->required();
    fit_cmd->add_option("--out", fit_o.out, "Model output path (JSON)")->required();
    fit_cmd->add_option("--method", fit_o.method, "plo | kplo | lkplo-rz | lkplo-svm")
        ->capture_default_str()
        ->check(CLI::IsMember({"plo", "kplo", "lkplo", "lkplo-rz", "lkplo-svm"}));
    fit_cmd->add_option("--loss", fit_o.loss, "Override the method's loss: rz | svm")->check(CLI::IsMember({"rz", "svm"}));
    fit_cmd->add_option("--gamma", fit_o.gamma, "RBF kernel width")->capture_default_str();
    fit_cmd->add_option("--q", fit_o.q, "Kernel PCA components (clamped to the usable rank)")->capture_default_str();
    fit_cmd->add_option("--k", fit_o.k, "Clusters (lkplo only)")->capture_default_str();
    fit_cmd->add_option("--c", fit_o.c, "SVM-like margin multiplier")->capture_default_str();
    fit_cmd->add_option("--n-random", fit_o.n_random, "Random directions per cluster")->capture_default_str();
    fit_cmd->add_flag("--basis,!--no-basis", fit_o.basis, "Include the canonical basis directions");
    fit_cmd->add_option("--n-one-point", fit_o.n_one_point, "One-point directions (default min(50, n_k))");
    fit_cmd->add_option("--n-two-points", fit_o.n_two_points, "Two-point directions (default min(50, pairs))");
    fit_cmd->add_option("--seed", fit_o.seed, "Model seed")->capture_default_str();
    fit_cmd->add_flag("--no-standardize", fit_o.no_standardize, "Skip per-feature standardization");

    ScoreOptions score_o;
    CLI::App* score_cmd = app.add_subcommand("score", "Score the rows of a CSV; writes row_index,score");
    score_cmd->add_option("--model", score_o.model, "Model file")->required();
    score_cmd->add_option("--data", score_o.data, "CSV to score")->required();
    score_cmd->add_option("--out", score_o.out, "Scores CSV output")->required();

    BenchmarkOptions bench_o;
    CLI::App* bench_cmd = app.add_subcommand(
        "benchmark",
        "Cross-validated ROC AUC with per-fold random search.\n"
        "Writes <out>.json (full trial logs) and <out>.csv with columns\n"
        "dataset,method,mean,std,auc_fold_1,...,auc_fold_<folds>");
    bench_cmd->add_option("--data", bench_o.data, "CSV path or synth:{three_gaussians,inside_outside,moons}")->required();
    bench_cmd->add_option("--method", bench_o.method, "plo | kplo | lkplo-rz | lkplo-svm")
        ->capture_default_str()
        ->check(CLI::IsMember(method_names()));
    bench_cmd->add_option("--out", bench_o.out, "Output prefix")->required();
    add_protocol_options(bench_cmd, bench_o.protocol);

    AblationOptions abl_o;
    CLI::App* abl_cmd = app.add_subcommand(
        "ablation",
        "PLO / KPLO / LKPLO (SVM-like) on each dataset.\n"
        "Writes <out>.csv (dataset,method,mean,std,auc_fold_1..), <out>.txt and <out>.json");
    abl_cmd->add_option("--data", abl_o.data, "CSV paths or synth: names (default: all three synthetics)");
    abl_cmd->add_option("--out", abl_o.out, "Output prefix")->required();
    add_protocol_options(abl_cmd, abl_o.protocol);

    GenerateOptions gen_o;
    CLI::App* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
    gen_cmd->add_option("--data", gen_o.data, "synth:{three_gaussians,inside_outside,moons}")->required();
    gen_cmd->add_option("--seed", gen_o.seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--out", gen_o.out, "CSV output path")->required();

    GridOptions grid_o;
    CLI::App* grid_cmd = app.add_subcommand(
        "grid", "Score a resolution x resolution lattice for a 2-D model; rows x,y,score with x varying fastest");
    grid_cmd->add_option("--model", grid_o.model, "Model file")->required();
    grid_cmd->add_option("--bounds", grid_o.bounds, "xmin,xmax,ymin,ymax")->required()->delimiter(',')->expected(4);
    grid_cmd->add_option("--resolution", grid_o.resolution, "Points per axis")->capture_default_str();
    grid_cmd->add_option("--out", grid_o.out, "Grid CSV output path")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*fit_cmd) return cmd_fit(fit_o, out);
        if (*score_cmd) return cmd_score(score_o, out);
        if (*bench_cmd) return cmd_benchmark(bench_o, out);
        if (*abl_cmd) return cmd_ablation(abl_o, out);
        if (*gen_cmd) return cmd_generate(gen_o, out);
        if (*grid_cmd) return cmd_grid(grid_o, out);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: " << msg << '\n';
        return 1;
    }
    return 1;
}

}  // namespace lkplo::cli
