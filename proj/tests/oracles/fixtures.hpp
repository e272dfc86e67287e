#pragma once
// Synthetic data for tests: Gaussian blobs and CSV files in the CICIoT2023
// layout (46 named features plus a label column).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "iotsentry/data.hpp"
#include "iotsentry/taxonomy.hpp"

namespace fixtures {

inline double gauss(std::mt19937_64& g) {
    // Box-Muller keeps the stream identical across standard libraries.
    const double u1 = (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(g() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// `n` rows, `classes` blobs centred at distinct corners, `spread` noise.
inline iotsentry::Labeled blobs(std::size_t n, std::size_t features, std::size_t classes, std::uint64_t seed,
                                double spread = 0.6) {
    std::mt19937_64 g(seed);
    std::vector<std::string> names;
    for (std::size_t f = 0; f < features; ++f) names.push_back("f" + std::to_string(f));
    std::vector<double> values;
    iotsentry::LabelVector y;
    for (std::size_t c = 0; c < classes; ++c) y.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = i % classes;
        y.ids.push_back(static_cast<int>(c));
        for (std::size_t f = 0; f < features; ++f) {
            const double centre = static_cast<double>((c >> (f % 4)) & 1u) * 2.0 + (f == 0 ? static_cast<double>(c) : 0.0);
            values.push_back(centre + spread * gauss(g));
        }
    }
    return {iotsentry::FeatureMatrix(names, std::move(values)), std::move(y)};
}

/// Writes a CICIoT2023-layout CSV: `rows_per_label[i]` rows of `labels[i]`.
/// Each label gets its own feature profile so the classes are learnable.
/// `missing_every` > 0 blanks one cell in every that many rows.
inline void write_ciciot_csv(const std::filesystem::path& path, const std::vector<std::string>& labels,
                             const std::vector<std::size_t>& rows_per_label, std::uint64_t seed,
                             std::size_t missing_every = 0) {
    const auto& names = iotsentry::ciciot2023_feature_names();
    std::mt19937_64 g(seed);
    std::ofstream out(path);
    for (const auto& n : names) out << n << ',';
    out << "label\n";
    std::size_t row = 0;
    std::size_t total = 0;
    for (const auto r : rows_per_label) total += r;
    // Interleave labels so files are not sorted by class.
    std::vector<std::size_t> left = rows_per_label;
    while (row < total) {
        for (std::size_t l = 0; l < labels.size(); ++l) {
            if (left[l] == 0) continue;
            --left[l];
            for (std::size_t f = 0; f < names.size(); ++f) {
                if (missing_every && row % missing_every == 0 && f == row % names.size()) {
                    out << ',';
                    continue;
                }
                const double centre = static_cast<double>(((l * 7 + f * 3) % 11)) + static_cast<double>(l % 3) * (f % 5);
                out << centre + 0.8 * gauss(g) << ',';
            }
            out << labels[l] << '\n';
            ++row;
        }
    }
}

}  // namespace fixtures
