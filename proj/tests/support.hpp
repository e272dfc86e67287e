#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "iotsentry/data.hpp"

namespace test {

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("iotsentry_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

inline iotsentry::LabelVector labels(std::vector<int> ids, std::size_t classes) {
    iotsentry::LabelVector y;
    y.ids = std::move(ids);
    for (std::size_t c = 0; c < classes; ++c) y.class_names.push_back("c" + std::to_string(c));
    return y;
}

inline iotsentry::FeatureMatrix matrix(std::size_t cols, std::vector<double> values) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
    return iotsentry::FeatureMatrix(names, std::move(values));
}

inline iotsentry::FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& g,
                                              int distinct_levels = 0) {
    std::vector<double> v(rows * cols);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> lv(0, distinct_levels > 0 ? distinct_levels - 1 : 0);
    for (auto& x : v) x = distinct_levels > 0 ? static_cast<double>(lv(g)) : u(g);
    return matrix(cols, std::move(v));
}

inline iotsentry::LabelVector random_labels(std::size_t rows, std::size_t classes, std::mt19937_64& g) {
    std::uniform_int_distribution<int> d(0, static_cast<int>(classes) - 1);
    std::vector<int> ids(rows);
    for (auto& i : ids) i = d(g);
    return labels(std::move(ids), classes);
}

}  // namespace test
