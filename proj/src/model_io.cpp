#include "lkplo/model_io.hpp"

#include "lkplo/errors.hpp"

#include <fstream>
#include <sstream>

namespace lkplo {

using nlohmann::json;

namespace {

json vec_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json mat_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Vector vec_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

Matrix mat_from(const json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const json& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows) throw FormatError("matrix row count mismatch");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const Vector r = vec_from(data.at(static_cast<std::size_t>(i)));
        if (r.size() != cols) throw FormatError("matrix column count mismatch");
        m.row(i) = r.transpose();
    }
    return m;
}

json kpca_json(const KpcaModel& k) {
    return json{{"kernel", k.kind == KernelKind::Rbf ? "rbf" : "linear"},
                {"gamma", k.params.gamma},
                {"train_points", mat_json(k.train_points)},
                {"eigenvalues", vec_json(k.eigenvalues)},
                {"eigenvectors", mat_json(k.eigenvectors)},
                {"gram_row_means", vec_json(k.gram_row_means)},
                {"gram_total_mean", k.gram_total_mean}};
}

KpcaModel kpca_from(const json& j) {
    KpcaModel k;
    const auto kind = j.at("kernel").get<std::string>();
    if (kind == "rbf") {
        k.kind = KernelKind::Rbf;
    } else if (kind == "linear") {
        k.kind = KernelKind::Linear;
    } else {
        throw FormatError("unknown kernel '" + kind + "'");
    }
    k.params.gamma = j.at("gamma").get<double>();
    k.train_points = mat_from(j.at("train_points"));
    k.eigenvalues = vec_from(j.at("eigenvalues"));
    k.eigenvectors = mat_from(j.at("eigenvectors"));
    k.gram_row_means = vec_from(j.at("gram_row_means"));
    k.gram_total_mean = j.at("gram_total_mean").get<double>();
    if (k.eigenvectors.rows() != k.n_train() || k.eigenvectors.cols() != k.q() ||
        k.gram_row_means.size() != k.n_train()) {
        throw FormatError("kernel map shapes inconsistent");
    }
    return k;
}

json optional_count(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::size_t> optional_count_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::size_t>();
}

}  // namespace

json to_json(const SavedModel& saved) {
    const LkploModel& m = saved.model;
    json clusters{{"k", m.clusters.k},
                  {"centroids", mat_json(m.clusters.centroids)},
                  {"sizes", m.clusters.sizes},
                  {"membership", m.clusters.membership},
                  {"inertia", m.clusters.inertia}};

    json per_cluster = json::array();
    for (const ClusterEntry& e : m.per_cluster) {
        json stats = json::array();
        for (const ProjectionStats& s : e.stats) {
            stats.push_back(json{{"u", vec_json(s.direction.u())}, {"median", s.median_proj}, {"mad", s.mad_proj}});
        }
        per_cluster.push_back(json{{"centroid", vec_json(e.centroid)}, {"size", e.size}, {"stats", std::move(stats)}});
    }

    json j{{"format", kModelFormat},
           {"variant", std::string(to_string(m.variant))},
           {"input_dim", m.input_dim},
           {"kpca", m.kpca ? kpca_json(*m.kpca) : json(nullptr)},
           {"clusters", std::move(clusters)},
           {"loss", json{{"kind", std::string(to_string(m.loss.kind))}, {"c", m.loss.c}}},
           {"direction_config",
            json{{"n_random", m.direction_config.n_random},
                 {"include_basis", m.direction_config.include_basis},
                 {"n_one_point", optional_count(m.direction_config.n_one_point)},
                 {"n_two_points", optional_count(m.direction_config.n_two_points)}}},
           {"seed", m.seed},
           {"per_cluster", std::move(per_cluster)}};
    if (saved.standardizer) {
        j["standardizer"] = json{{"means", vec_json(saved.standardizer->means)},
                                 {"stds", vec_json(saved.standardizer->stds)}};
    } else {
        j["standardizer"] = nullptr;
    }
    return j;
}

SavedModel saved_model_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat) {
            throw FormatError("unsupported model format '" + j.at("format").get<std::string>() + "'");
        }
        SavedModel saved;
        LkploModel& m = saved.model;
        m.variant = parse_variant(j.at("variant").get<std::string>());
        m.input_dim = j.at("input_dim").get<Index>();
        if (!j.at("kpca").is_null()) m.kpca = kpca_from(j.at("kpca"));

        const json& c = j.at("clusters");
        m.clusters.k = c.at("k").get<Index>();
        m.clusters.centroids = mat_from(c.at("centroids"));
        m.clusters.sizes = c.at("sizes").get<std::vector<Index>>();
        m.clusters.membership = c.at("membership").get<std::vector<Index>>();
        m.clusters.inertia = c.at("inertia").get<double>();

        m.loss.kind = parse_loss_kind(j.at("loss").at("kind").get<std::string>());
        m.loss.c = j.at("loss").at("c").get<double>();

        const json& dc = j.at("direction_config");
        m.direction_config.n_random = dc.at("n_random").get<std::size_t>();
        m.direction_config.include_basis = dc.at("include_basis").get<bool>();
        m.direction_config.n_one_point = optional_count_from(dc.at("n_one_point"));
        m.direction_config.n_two_points = optional_count_from(dc.at("n_two_points"));
        m.seed = j.at("seed").get<std::uint64_t>();

        for (const json& e : j.at("per_cluster")) {
            ClusterEntry entry;
            entry.centroid = vec_from(e.at("centroid"));
            entry.size = e.at("size").get<Index>();
            for (const json& s : e.at("stats")) {
                entry.stats.push_back(ProjectionStats{Direction::from_unit(vec_from(s.at("u"))),
                                                      s.at("median").get<double>(), s.at("mad").get<double>()});
            }
            m.per_cluster.push_back(std::move(entry));
        }

        if (!j.at("standardizer").is_null()) {
            Standardizer s;
            s.means = vec_from(j.at("standardizer").at("means"));
            s.stds = vec_from(j.at("standardizer").at("stds"));
            if (s.means.size() != m.input_dim || s.stds.size() != m.input_dim) {
                throw FormatError("standardizer dimension mismatch");
            }
            saved.standardizer = std::move(s);
        }
        m.validate();
        return saved;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    }
}

std::string serialize(const SavedModel& saved) { return to_json(saved).dump(1) + "\n"; }

SavedModel deserialize(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("model file is not valid JSON: ") + e.what());
    }
    return saved_model_from_json(j);
}

void save_model(const SavedModel& saved, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path.string() + "'");
    out << serialize(saved);
    if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

SavedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

std::vector<double> score_raw(const SavedModel& saved, const Matrix& X_raw) {
    if (X_raw.cols() != saved.model.input_dim) {
        throw DimensionError("model expects " + std::to_string(saved.model.input_dim) + " features, got " +
                             std::to_string(X_raw.cols()));
    }
    return saved.standardizer ? score(saved.model, apply(*saved.standardizer, X_raw)) : score(saved.model, X_raw);
}

}  // namespace lkplo
