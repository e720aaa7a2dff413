#include "lkplo/data.hpp"

#include "lkplo/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string_view>

namespace lkplo {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string location(const std::string& name, std::size_t line, std::size_t col, std::string_view header) {
    return name + ":" + std::to_string(line) + ": column " + std::to_string(col + 1) + " ('" + std::string(header) +
           "')";
}

}  // namespace

std::size_t Dataset::n_outliers() const { return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1)); }

Dataset parse_csv(const std::string& text, const std::string& name, bool require_label) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    // Header, skipping a UTF-8 byte-order mark.
    if (!std::getline(in, line)) throw ParseError(name + ": empty file, header row expected");
    ++line_no;
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    std::vector<std::string> header;
    for (std::string_view h : split_fields(line)) header.emplace_back(trim(h));

    std::ptrdiff_t label_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "label") {
            if (label_col >= 0) throw ParseError(name + ": duplicate 'label' column");
            label_col = static_cast<std::ptrdiff_t>(j);
        }
    }
    if (require_label && label_col < 0) throw ParseError(name + ": missing 'label' column");

    Dataset data;
    data.name = name;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<std::ptrdiff_t>(j) != label_col) data.feature_names.push_back(header[j]);
    }
    if (data.feature_names.empty()) throw ParseError(name + ": no feature columns");

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw ParseError(name + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            const std::string_view cell = trim(fields[j]);
            if (static_cast<std::ptrdiff_t>(j) == label_col) {
                if (cell == "0") {
                    data.y.push_back(0);
                } else if (cell == "1") {
                    data.y.push_back(1);
                } else {
                    throw ParseError(location(name, line_no, j, header[j]) + ": label must be 0 or 1, got '" +
                                     std::string(cell) + "'");
                }
                continue;
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
                throw ParseError(location(name, line_no, j, header[j]) + ": non-numeric cell '" +
                                 std::string(cell) + "'");
            }
            values.push_back(v);
        }
        ++rows;
    }

    const auto d = static_cast<Index>(data.feature_names.size());
    data.X.resize(static_cast<Index>(rows), d);
    for (std::size_t i = 0; i < rows; ++i) {
        for (Index j = 0; j < d; ++j) data.X(static_cast<Index>(i), j) = values[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
    }
    return data;
}

Dataset load_csv(const std::filesystem::path& path, bool require_label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path.stem().string(), require_label);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string to_csv(const Dataset& data) {
    std::string out;
    for (Index j = 0; j < data.d(); ++j) {
        out += j < static_cast<Index>(data.feature_names.size()) ? data.feature_names[static_cast<std::size_t>(j)]
                                                                 : "x" + std::to_string(j);
        out += ',';
    }
    out += "label\n";
    for (Index i = 0; i < data.n(); ++i) {
        for (Index j = 0; j < data.d(); ++j) {
            out += format_double(data.X(i, j));
            out += ',';
        }
        out += std::to_string(data.y[static_cast<std::size_t>(i)]);
        out += '\n';
    }
    return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    out << to_csv(data);
    if (!out) throw ParseError("write failed for '" + path.string() + "'");
}

Standardizer fit_standardizer(const Matrix& X_train) {
    if (X_train.rows() < 1) throw InvalidArgumentError("standardizer needs at least one row");
    Standardizer s;
    s.means = X_train.colwise().mean().transpose();
    s.stds.resize(X_train.cols());
    for (Index j = 0; j < X_train.cols(); ++j) {
        if (X_train.col(j).minCoeff() == X_train.col(j).maxCoeff()) {
            s.means(j) = X_train(0, j);
            s.stds(j) = 0.0;
            continue;
        }
        const double var = (X_train.col(j).array() - s.means(j)).square().mean();
        s.stds(j) = std::sqrt(var);
    }
    return s;
}

Matrix apply(const Standardizer& s, const Matrix& X) {
    if (X.cols() != s.means.size()) {
        throw DimensionError("standardizer fitted on " + std::to_string(s.means.size()) + " features, got " +
                             std::to_string(X.cols()));
    }
    Matrix out(X.rows(), X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        const double scale = s.constant_feature(j) ? 1.0 : s.stds(j);
        out.col(j) = (X.col(j).array() - s.means(j)) / scale;
    }
    return out;
}

namespace {

Dataset make_2d(std::string name, const std::vector<std::array<double, 2>>& pts, const std::vector<int>& y) {
    Dataset d;
    d.name = std::move(name);
    d.feature_names = {"x0", "x1"};
    d.X.resize(static_cast<Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        d.X(static_cast<Index>(i), 0) = pts[i][0];
        d.X(static_cast<Index>(i), 1) = pts[i][1];
    }
    d.y = y;
    return d;
}

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

Dataset gen_three_gaussians(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.5);
    const std::array<std::array<double, 2>, 3> centers{{{0.0, 0.0}, {5.0, 0.0}, {2.5, 4.5}}};

    std::vector<std::array<double, 2>> pts;
    std::vector<int> y;
    for (const auto& c : centers) {
        for (int i = 0; i < 150; ++i) {
            const double px = c[0] + noise(rng);
            const double py = c[1] + noise(rng);
            pts.push_back({px, py});
            y.push_back(0);
        }
    }
    std::uniform_real_distribution<double> box(-3.0, 8.0);
    while (y.size() < 480) {
        const double px = box(rng);
        const double py = box(rng);
        const std::array<double, 2> p{px, py};
        if (std::any_of(centers.begin(), centers.end(), [&](const auto& c) { return dist(p, c) < 2.0; })) continue;
        pts.push_back(p);
        y.push_back(1);
    }
    return make_2d("three_gaussians", pts, y);
}

Dataset gen_inside_outside(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> radius(3.0, 0.15);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

    std::vector<std::array<double, 2>> pts;
    std::vector<int> y;
    for (int i = 0; i < 400; ++i) {
        const double r = radius(rng);
        const double t = angle(rng);
        pts.push_back({r * std::cos(t), r * std::sin(t)});
        y.push_back(0);
    }

    std::normal_distribution<double> blob(0.0, 0.2);
    for (int i = 0; i < 20;) {
        const std::array<double, 2> p{blob(rng), blob(rng)};
        if (std::hypot(p[0], p[1]) >= 1.0) continue;  // redraw the (astronomically rare) wide sample
        pts.push_back(p);
        y.push_back(1);
        ++i;
    }

    std::uniform_real_distribution<double> box(-6.0, 6.0);
    for (int i = 0; i < 20;) {
        const std::array<double, 2> p{box(rng), box(rng)};
        const double r = std::hypot(p[0], p[1]);
        if (r >= 2.2 && r <= 3.8) continue;
        pts.push_back(p);
        y.push_back(1);
        ++i;
    }
    return make_2d("inside_outside", pts, y);
}

Dataset gen_moons(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.08);
    constexpr int kPerMoon = 200;

    std::vector<std::array<double, 2>> pts;
    std::vector<int> y;
    for (int i = 0; i < kPerMoon; ++i) {
        const double t = std::numbers::pi * i / (kPerMoon - 1);
        const double px = std::cos(t) + noise(rng);
        const double py = std::sin(t) + noise(rng);
        pts.push_back({px, py});
        y.push_back(0);
    }
    for (int i = 0; i < kPerMoon; ++i) {
        const double t = std::numbers::pi * i / (kPerMoon - 1);
        const double px = 1.0 - std::cos(t) + noise(rng);
        const double py = 0.5 - std::sin(t) + noise(rng);
        pts.push_back({px, py});
        y.push_back(0);
    }

    double lo_x = pts[0][0], hi_x = pts[0][0], lo_y = pts[0][1], hi_y = pts[0][1];
    for (const auto& p : pts) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
    }
    std::uniform_real_distribution<double> ux(lo_x - 1.0, hi_x + 1.0);
    std::uniform_real_distribution<double> uy(lo_y - 1.0, hi_y + 1.0);
    const std::size_t n_inliers = pts.size();
    while (y.size() < n_inliers + 25) {
        const double px = ux(rng);
        const double py = uy(rng);
        const std::array<double, 2> p{px, py};
        bool near = false;
        for (std::size_t i = 0; i < n_inliers && !near; ++i) near = dist(p, pts[i]) < 0.3;
        if (near) continue;
        pts.push_back(p);
        y.push_back(1);
    }
    return make_2d("moons", pts, y);
}

const std::vector<std::string>& synthetic_names() {
    static const std::vector<std::string> names{"three_gaussians", "inside_outside", "moons"};
    return names;
}

Dataset generate_synthetic(const std::string& name, std::uint64_t seed) {
    if (name == "three_gaussians") return gen_three_gaussians(seed);
    if (name == "inside_outside") return gen_inside_outside(seed);
    if (name == "moons") return gen_moons(seed);
    throw InvalidArgumentError("unknown synthetic dataset '" + name +
                               "' (expected three_gaussians, inside_outside or moons)");
}

Dataset subset(const Dataset& data, const std::vector<Index>& rows) {
    Dataset out;
    out.name = data.name;
    out.feature_names = data.feature_names;
    out.X.resize(static_cast<Index>(rows.size()), data.d());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.X.row(static_cast<Index>(r)) = data.X.row(rows[r]);
        if (!data.y.empty()) out.y.push_back(data.y[static_cast<std::size_t>(rows[r])]);
    }
    return out;
}

}  // namespace lkplo
