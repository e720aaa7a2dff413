#pragma once

#include "lkplo/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lkplo {

struct Dataset {
    std::string name;
    std::vector<std::string> feature_names;
    Matrix X;
    std::vector<int> y;  // 0 = inlier, 1 = outlier

    Index n() const { return X.rows(); }
    Index d() const { return X.cols(); }
    std::size_t n_outliers() const;
};

// Header row required. With require_label, a "label" column holding 0/1 is
// mandatory; otherwise it is optional and y stays empty when absent.
Dataset load_csv(const std::filesystem::path& path, bool require_label = true);
Dataset parse_csv(const std::string& text, const std::string& name, bool require_label = true);

// Features in order, then "label". Doubles are written in shortest round-trip form.
void save_csv(const Dataset& data, const std::filesystem::path& path);
std::string to_csv(const Dataset& data);

std::string format_double(double v);

struct Standardizer {
    Vector means;
    Vector stds;  // population std; 0 marks a zero-variance feature

    bool constant_feature(Index j) const { return stds(j) == 0.0; }
};

Standardizer fit_standardizer(const Matrix& X_train);
// (x - mean) / std per feature; zero-variance features are only centered.
Matrix apply(const Standardizer& s, const Matrix& X);

Dataset gen_three_gaussians(std::uint64_t seed);
Dataset gen_inside_outside(std::uint64_t seed);
Dataset gen_moons(std::uint64_t seed);

// "three_gaussians", "inside_outside" or "moons".
Dataset generate_synthetic(const std::string& name, std::uint64_t seed);
const std::vector<std::string>& synthetic_names();

Dataset subset(const Dataset& data, const std::vector<Index>& rows);

}  // namespace lkplo
