#include "iotsentry/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "iotsentry/error.hpp"
#include "iotsentry/rng.hpp"
#include "iotsentry/textio.hpp"

namespace iotsentry {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Splits on commas without allocating when the line has no quoting.
void split_fields(std::string_view line, std::vector<std::string_view>& out,
                  std::vector<std::string>& storage) {
    out.clear();
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find('"') != std::string_view::npos) {
        storage = split_csv_line(line);
        for (const auto& s : storage) out.emplace_back(s);
        return;
    }
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::vector<std::string> feature_names, std::size_t rows)
    : names_(std::move(feature_names)), rows_(rows), values_(rows * names_.size(), 0.0) {}

FeatureMatrix::FeatureMatrix(std::vector<std::string> feature_names, std::vector<double> values)
    : names_(std::move(feature_names)), values_(std::move(values)) {
    if (names_.empty()) {
        if (!values_.empty()) throw Error("feature matrix without columns cannot hold values");
        return;
    }
    if (values_.size() % names_.size() != 0)
        throw Error("value count " + std::to_string(values_.size()) +
                    " is not a multiple of the column count " + std::to_string(names_.size()));
    rows_ = values_.size() / names_.size();
    std::set<std::string> unique(names_.begin(), names_.end());
    if (unique.size() != names_.size()) throw SchemaError("feature names must be unique");
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
    std::vector<double> out;
    out.reserve(rows.size() * cols());
    for (const auto r : rows) {
        const auto src = row(r);
        out.insert(out.end(), src.begin(), src.end());
    }
    FeatureMatrix m;
    m.names_ = names_;
    m.rows_ = rows.size();
    m.values_ = std::move(out);
    return m;
}

std::size_t FeatureMatrix::missing_count() const {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double v) { return std::isnan(v); }));
}

LabelVector LabelVector::select(std::span<const std::size_t> rows) const {
    LabelVector out{{}, class_names, level};
    out.ids.reserve(rows.size());
    for (const auto r : rows) out.ids.push_back(ids[r]);
    return out;
}

std::vector<std::size_t> LabelVector::class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (const int id : ids) ++counts[static_cast<std::size_t>(id)];
    return counts;
}

LoadedCsv load_csv(const std::filesystem::path& path, const std::string& label_column,
                   const std::optional<std::vector<std::string>>& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open dataset file " + path.string());

    std::string line;
    if (!std::getline(in, line) || trim(line).empty())
        throw Error(path.string() + ": empty file (no header row)");

    auto header = split_csv_line(line);
    for (auto& h : header) h = std::string(trim(h));
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end())
        throw SchemaError(path.string() + ": label column '" + label_column + "' not in header");
    const auto label_index = static_cast<std::size_t>(label_it - header.begin());

    std::vector<std::string> names;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != label_index) names.push_back(header[i]);
    if (schema && *schema != names) {
        std::string detail;
        for (std::size_t i = 0; i < std::max(schema->size(), names.size()); ++i) {
            const std::string want = i < schema->size() ? (*schema)[i] : "<none>";
            const std::string got = i < names.size() ? names[i] : "<none>";
            if (want != got) {
                detail = "column " + std::to_string(i) + ": expected '" + want + "', found '" + got + "'";
                break;
            }
        }
        throw SchemaError(path.string() + ": header does not match the expected feature schema (" +
                          detail + ")");
    }

    LoadedCsv out;
    std::vector<std::size_t> missing_per_column(names.size(), 0);
    std::vector<double> values;
    std::vector<std::string_view> fields;
    std::vector<std::string> storage;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line) == "\r") continue;
        ++out.report.rows_read;
        split_fields(line, fields, storage);
        if (fields.size() != header.size())
            throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
        const auto label = trim(fields[label_index]);
        if (label.empty()) {
            ++out.report.rows_dropped;
            continue;
        }
        out.raw_labels.emplace_back(label);
        std::size_t col = 0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == label_index) continue;
            double v = 0.0;
            if (!parse_double(fields[i], v) || !std::isfinite(v)) {
                v = kMissing;
                ++missing_per_column[col];
            }
            values.push_back(v);
            ++col;
        }
    }

    for (std::size_t c = 0; c < names.size(); ++c)
        out.report.imputed_cells_per_column[names[c]] = missing_per_column[c];
    for (const auto& l : out.raw_labels) ++out.report.class_counts[l];
    out.features = FeatureMatrix(std::move(names), std::move(values));
    return out;
}

ColumnMedians ColumnMedians::fit(const FeatureMatrix& m) {
    ColumnMedians out;
    out.median.resize(m.cols(), 0.0);
    std::vector<double> column;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        column.clear();
        for (std::size_t r = 0; r < m.rows(); ++r)
            if (!std::isnan(m(r, c))) column.push_back(m(r, c));
        if (column.empty()) {
            if (m.rows() == 0) continue;
            throw Error("column '" + m.feature_names()[c] + "' has no observed values to impute from");
        }
        const std::size_t mid = column.size() / 2;
        std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
        double med = column[mid];
        if (column.size() % 2 == 0) {
            const double lower = *std::max_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid));
            med = lower + (med - lower) / 2.0;
        }
        out.median[c] = med;
    }
    return out;
}

FeatureMatrix ColumnMedians::apply(const FeatureMatrix& m) const {
    if (m.cols() != median.size()) throw SchemaError("imputer column count mismatch");
    FeatureMatrix out = m;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c)
            if (std::isnan(row[c])) row[c] = median[c];
    }
    return out;
}

FeatureMatrix impute_missing(const FeatureMatrix& m) {
    if (m.missing_count() == 0) return m;
    return ColumnMedians::fit(m).apply(m);
}

LabelVector encode_labels(std::span<const std::string> raw, const LabelTaxonomy& taxonomy,
                          TaxonomyLevel level) {
    std::set<std::string> unknown;
    for (const auto& name : raw)
        if (!taxonomy.knows(name)) unknown.insert(name);
    if (!unknown.empty()) {
        std::string list;
        for (const auto& u : unknown) list += (list.empty() ? "'" : ", '") + u + "'";
        throw Error("unknown label name(s): " + list);
    }

    LabelVector out;
    out.level = level;
    out.ids.reserve(raw.size());
    std::unordered_map<std::string, int> index;
    for (const auto& name : raw) {
        const auto& cls = taxonomy.label_at(name, level);
        auto [it, inserted] = index.emplace(cls, static_cast<int>(out.class_names.size()));
        if (inserted) out.class_names.push_back(cls);
        out.ids.push_back(it->second);
    }
    return out;
}

LabelVector encode_with_classes(std::span<const std::string> names,
                                const std::vector<std::string>& class_names, TaxonomyLevel level) {
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < class_names.size(); ++i) index.emplace(class_names[i], static_cast<int>(i));
    LabelVector out{{}, class_names, level};
    out.ids.reserve(names.size());
    for (const auto& n : names) {
        const auto it = index.find(n);
        if (it == index.end()) throw Error("label '" + n + "' is not one of the known classes");
        out.ids.push_back(it->second);
    }
    return out;
}

std::vector<std::size_t> stratified_quotas(std::span<const std::size_t> class_counts, double fraction) {
    const std::size_t total = std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0});
    const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(total) * fraction));

    std::vector<std::size_t> quota(class_counts.size());
    std::vector<double> remainder(class_counts.size());
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        const double exact = static_cast<double>(class_counts[c]) * fraction;
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - static_cast<double>(quota[c]);
        assigned += quota[c];
    }
    std::vector<std::size_t> order(class_counts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < target && i < order.size(); ++i) {
        if (quota[order[i]] < class_counts[order[i]]) {
            ++quota[order[i]];
            ++assigned;
        }
    }
    return quota;
}

namespace {

std::vector<std::vector<std::size_t>> rows_by_class(const LabelVector& y) {
    std::vector<std::vector<std::size_t>> rows(y.num_classes());
    for (std::size_t i = 0; i < y.size(); ++i) rows[static_cast<std::size_t>(y.ids[i])].push_back(i);
    return rows;
}

}  // namespace

DatasetSplit stratified_split(const FeatureMatrix& m, const LabelVector& y, double train_fraction,
                              std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error("train_fraction must lie strictly between 0 and 1");
    if (m.rows() != y.size()) throw Error("feature rows and labels differ in length");

    auto by_class = rows_by_class(y);
    std::vector<std::size_t> counts(by_class.size());
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        counts[c] = by_class[c].size();
        if (counts[c] == 1)
            throw Error("class '" + y.class_names[c] + "' has a single row and cannot be stratified");
    }
    const auto quota = stratified_quotas(counts, train_fraction);

    DatasetSplit split;
    split.seed = seed;
    split.train_fraction = train_fraction;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        Rng rng(derive_seed(seed, 0x5b117, c));
        rng.shuffle(by_class[c]);
        auto& rows = by_class[c];
        split.train_rows.insert(split.train_rows.end(), rows.begin(),
                                rows.begin() + static_cast<std::ptrdiff_t>(quota[c]));
        split.test_rows.insert(split.test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(quota[c]),
                               rows.end());
    }
    std::sort(split.train_rows.begin(), split.train_rows.end());
    std::sort(split.test_rows.begin(), split.test_rows.end());
    split.train = {m.select_rows(split.train_rows), y.select(split.train_rows)};
    split.test = {m.select_rows(split.test_rows), y.select(split.test_rows)};
    return split;
}

std::vector<std::size_t> downsample_rows(const LabelVector& y, std::size_t cap, std::uint64_t seed) {
    if (cap < 1) throw Error("cap_per_class must be at least 1");
    auto by_class = rows_by_class(y);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        if (rows.size() > cap) {
            Rng rng(derive_seed(seed, 0xd0a5, c));
            const auto picked = sample_without_replacement(rows.size(), cap, rng);
            for (const auto p : picked) keep.push_back(rows[p]);
        } else {
            keep.insert(keep.end(), rows.begin(), rows.end());
        }
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

Labeled downsample_majority(const FeatureMatrix& m, const LabelVector& y, std::size_t cap,
                            std::uint64_t seed) {
    const auto keep = downsample_rows(y, cap, seed);
    return {m.select_rows(keep), y.select(keep)};
}

Standardizer Standardizer::fit(const FeatureMatrix& train) {
    if (train.rows() == 0) throw Error("cannot fit standardization on an empty matrix");
    Standardizer s;
    const std::size_t cols = train.cols();
    s.mean.assign(cols, 0.0);
    s.stddev.assign(cols, 0.0);
    const auto n = static_cast<double>(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r) {
        const auto row = train.row(r);
        for (std::size_t c = 0; c < cols; ++c) s.mean[c] += row[c];
    }
    for (auto& v : s.mean) v /= n;
    for (std::size_t r = 0; r < train.rows(); ++r) {
        const auto row = train.row(r);
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = row[c] - s.mean[c];
            s.stddev[c] += d * d;
        }
    }
    for (auto& v : s.stddev) v = std::sqrt(v / n);
    return s;
}

void Standardizer::apply_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < in.size(); ++c)
        out[c] = stddev[c] > 0.0 ? (in[c] - mean[c]) / stddev[c] : in[c];
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& m) const {
    if (m.cols() != mean.size()) throw SchemaError("standardization column count mismatch");
    FeatureMatrix out = m;
    for (std::size_t r = 0; r < out.rows(); ++r) apply_row(m.row(r), out.row(r));
    return out;
}

Standardized standardize(const FeatureMatrix& train, const FeatureMatrix& apply_to) {
    auto stats = Standardizer::fit(train);
    auto values = stats.apply(apply_to);
    return {std::move(values), std::move(stats)};
}

}  // namespace iotsentry
