#include "iotsentry/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "iotsentry/error.hpp"
#include "iotsentry/persist.hpp"
#include "iotsentry/rng.hpp"
#include "iotsentry/svg.hpp"
#include "iotsentry/textio.hpp"

namespace iotsentry {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) {
    if (p.is_absolute() || base.empty()) return p;
    return base / p;
}

std::vector<fs::path> expand_dataset(const std::vector<fs::path>& inputs) {
    std::vector<fs::path> files;
    for (const auto& p : inputs) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path());
            std::sort(found.begin(), found.end());
            if (found.empty()) throw Error("no .csv files in " + p.string());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            if (!fs::exists(p)) throw Error("dataset not found: " + p.string());
            files.push_back(p);
        }
    }
    if (files.empty()) throw Error("no dataset configured");
    return files;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string labeled_csv(const Labeled& d, const std::string& label_column) {
    std::string out;
    for (const auto& n : d.x.feature_names()) out += csv_field(n) + ',';
    out += csv_field(label_column) + '\n';
    for (std::size_t r = 0; r < d.x.rows(); ++r) {
        for (const double v : d.x.row(r)) {
            out += format_double(v);
            out += ',';
        }
        out += csv_field(d.y.name_of(r));
        out += '\n';
    }
    return out;
}

Labeled read_labeled(const fs::path& path, const std::string& label_column, const std::vector<std::string>& features,
                     const std::vector<std::string>& classes, TaxonomyLevel level) {
    auto loaded = load_csv(path, label_column, features);
    if (loaded.features.missing_count() != 0) throw Error(path.string() + ": unexpected missing values");
    auto y = encode_with_classes(loaded.raw_labels, classes, level);
    return {std::move(loaded.features), std::move(y)};
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string fixed(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::optional<std::size_t> row_limit(const PipelineConfig& c, ModelKind kind) {
    const auto it = c.row_limits.find(kind);
    if (it == c.row_limits.end()) return std::nullopt;
    return it->second;
}

// Splits a per-model limit on total rows between train and test.
std::size_t share(std::size_t limit, double fraction) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(limit) * fraction));
}

}  // namespace

// ---- config ---------------------------------------------------------------

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir) {
    static const std::vector<std::string> known = {
        "dataset", "label_column", "level", "train_fraction", "seed", "models", "hyperparameters", "grids",
        "folds", "scoring", "imbalance_cap", "max_rows", "row_limits", "out"};
    if (!j.is_object()) throw Error("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw Error("unknown config key: " + key);

    PipelineConfig c;
    try {
        if (j.contains("dataset")) {
            const auto& d = j["dataset"];
            if (d.is_string()) {
                c.dataset.push_back(resolve(d.get<std::string>(), base_dir));
            } else {
                for (const auto& p : d) c.dataset.push_back(resolve(p.get<std::string>(), base_dir));
            }
        }
        if (j.contains("label_column")) c.label_column = j["label_column"].get<std::string>();
        if (j.contains("level")) c.level = parse_level(j["level"].get<std::string>());
        if (j.contains("train_fraction")) c.train_fraction = j["train_fraction"].get<double>();
        if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("models")) {
            const auto& m = j["models"];
            if (m.is_string()) {
                c.models = parse_model_list(m.get<std::string>());
            } else {
                c.models.clear();
                for (const auto& s : m) c.models.push_back(parse_model_kind(s.get<std::string>()));
            }
        }
        if (j.contains("hyperparameters"))
            for (const auto& [k, v] : j["hyperparameters"].items()) c.hyperparameters[parse_model_kind(k)] = params_from_json(v);
        if (j.contains("grids"))
            for (const auto& [k, v] : j["grids"].items()) c.grids[parse_model_kind(k)] = grid_from_json(v);
        if (j.contains("folds")) c.folds = j["folds"].get<int>();
        if (j.contains("scoring")) c.scoring = parse_scoring(j["scoring"].get<std::string>());
        if (j.contains("imbalance_cap") && !j["imbalance_cap"].is_null())
            c.imbalance_cap = j["imbalance_cap"].get<std::size_t>();
        if (j.contains("max_rows") && !j["max_rows"].is_null()) c.max_rows = j["max_rows"].get<std::size_t>();
        if (j.contains("row_limits"))
            for (const auto& [k, v] : j["row_limits"].items()) c.row_limits[parse_model_kind(k)] = v.get<std::size_t>();
        if (j.contains("out")) c.out = resolve(j["out"].get<std::string>(), base_dir);
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    try {
        return from_json(read_json(path), path.parent_path());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

json PipelineConfig::to_json() const {
    json j;
    j["dataset"] = json::array();
    for (const auto& p : dataset) j["dataset"].push_back(p.generic_string());
    j["label_column"] = label_column;
    j["level"] = std::string(iotsentry::to_string(level));
    j["train_fraction"] = train_fraction;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["models"] = json::array();
    for (const auto m : models) j["models"].push_back(std::string(iotsentry::to_string(m)));
    j["hyperparameters"] = json::object();
    for (const auto& [k, v] : hyperparameters) j["hyperparameters"][std::string(iotsentry::to_string(k))] = iotsentry::to_json(v);
    j["grids"] = json::object();
    for (const auto& [k, g] : grids) {
        json gj = json::object();
        for (const auto& [name, values] : g) {
            gj[name] = json::array();
            for (const auto& v : values) gj[name].push_back(iotsentry::to_json(v));
        }
        j["grids"][std::string(iotsentry::to_string(k))] = gj;
    }
    j["folds"] = folds;
    j["scoring"] = std::string(iotsentry::to_string(scoring));
    j["imbalance_cap"] = imbalance_cap ? json(*imbalance_cap) : json(nullptr);
    j["max_rows"] = max_rows ? json(*max_rows) : json(nullptr);
    j["row_limits"] = json::object();
    for (const auto& [k, v] : row_limits) j["row_limits"][std::string(iotsentry::to_string(k))] = v;
    j["out"] = out.generic_string();
    return j;
}

void PipelineConfig::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error("train_fraction must be in (0, 1)");
    if (folds < 2) throw Error("folds must be at least 2");
    if (models.empty()) throw Error("no models selected");
    if (imbalance_cap && *imbalance_cap == 0) throw Error("imbalance_cap must be positive");
    if (max_rows && *max_rows < 2) throw Error("max_rows must be at least 2");
    for (const auto& [k, v] : row_limits)
        if (v < 2) throw Error("row limit for " + std::string(iotsentry::to_string(k)) + " must be at least 2");
    for (const auto& [k, p] : hyperparameters) make_hyperparams(k, p, 0);
    if (out.empty()) throw Error("output directory is empty");
}

std::uint64_t PipelineConfig::require_seed() const {
    if (!seed) throw Error("a seed is required (config \"seed\" or --seed)");
    return *seed;
}

// ---- preprocess -----------------------------------------------------------

Labeled limit_rows(const Labeled& labeled, std::optional<std::size_t> limit, std::uint64_t seed) {
    const std::size_t n = labeled.y.size();
    if (!limit || *limit >= n) return labeled;
    const auto counts = labeled.y.class_counts();
    const auto quota = stratified_quotas(counts, static_cast<double>(*limit) / static_cast<double>(n));
    std::vector<std::vector<std::size_t>> members(counts.size());
    for (std::size_t r = 0; r < n; ++r) members[labeled.y.ids[r]].push_back(r);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < members.size(); ++c) {
        Rng rng(derive_seed(seed, 0x11a1, c));
        for (const auto i : sample_without_replacement(members[c].size(), quota[c], rng)) keep.push_back(members[c][i]);
    }
    std::sort(keep.begin(), keep.end());
    return {labeled.x.select_rows(keep), labeled.y.select(keep)};
}

PreprocessReport run_preprocess(const PipelineConfig& config) {
    config.validate();
    const auto seed = config.require_seed();
    const auto files = expand_dataset(config.dataset);

    PreprocessReport report;
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<std::string> raw;
    for (const auto& f : files) {
        auto loaded = names.empty() ? load_csv(f, config.label_column)
                                    : load_csv(f, config.label_column, names);
        if (names.empty()) names = loaded.features.feature_names();
        report.rows_read += loaded.report.rows_read;
        report.rows_dropped += loaded.report.rows_dropped;
        for (const auto& [col, n] : loaded.report.imputed_cells_per_column) report.imputed_cells_per_column[col] += n;
        values.insert(values.end(), loaded.features.values().begin(), loaded.features.values().end());
        raw.insert(raw.end(), std::make_move_iterator(loaded.raw_labels.begin()),
                   std::make_move_iterator(loaded.raw_labels.end()));
    }
    Labeled all{FeatureMatrix(names, std::move(values)), {}};
    try {
        all.y = encode_labels(raw, LabelTaxonomy::ciciot2023(), config.level);
    } catch (const Error& e) {
        throw Error(files.front().string() + (files.size() > 1 ? " (and others)" : "") + ": " + e.what());
    }
    raw.clear();
    if (all.y.num_classes() < 2) throw Error("dataset has fewer than two classes at level " +
                                             std::string(to_string(config.level)));

    all = limit_rows(all, config.max_rows, derive_seed(seed, 0x5ab5, 0));
    if (config.imbalance_cap) all = downsample_majority(all.x, all.y, *config.imbalance_cap, seed);

    const auto counts = all.y.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) report.class_counts[all.y.class_names[c]] = counts[c];

    auto split = stratified_split(all.x, all.y, config.train_fraction, seed);
    const auto medians = ColumnMedians::fit(split.train.x);
    for (const double m : medians.median)
        if (std::isnan(m)) throw Error("a feature column has no observed values in the train split");
    split.train.x = medians.apply(split.train.x);
    split.test.x = medians.apply(split.test.x);

    fs::create_directories(config.out);
    write_file_atomic(config.out / "train.csv", labeled_csv(split.train, config.label_column));
    write_file_atomic(config.out / "test.csv", labeled_csv(split.test, config.label_column));

    json ds;
    ds["feature_names"] = names;
    ds["class_names"] = all.y.class_names;
    ds["level"] = std::string(to_string(config.level));
    ds["label_column"] = config.label_column;
    ds["medians"] = medians.median;
    ds["seed"] = seed;
    ds["train_fraction"] = config.train_fraction;
    ds["train_rows"] = split.train.y.size();
    ds["test_rows"] = split.test.y.size();
    write_file_atomic(config.out / "dataset.json", dump(ds));
    write_file_atomic(config.out / "preprocess_report.json", dump(to_json(report)));
    return report;
}

PreparedData load_prepared(const fs::path& out_dir) {
    const auto ds_path = out_dir / "dataset.json";
    if (!fs::exists(ds_path)) throw Error(ds_path.string() + " not found; run preprocess first");
    const auto ds = read_json(ds_path);
    PreparedData d;
    try {
        const auto features = ds.at("feature_names").get<std::vector<std::string>>();
        const auto classes = ds.at("class_names").get<std::vector<std::string>>();
        const auto level = parse_level(ds.at("level").get<std::string>());
        d.label_column = ds.at("label_column").get<std::string>();
        d.medians = ds.at("medians").get<std::vector<double>>();
        d.train = read_labeled(out_dir / "train.csv", d.label_column, features, classes, level);
        d.test = read_labeled(out_dir / "test.csv", d.label_column, features, classes, level);
    } catch (const json::exception& e) {
        throw Error(ds_path.string() + ": " + e.what());
    }
    return d;
}

// ---- train / tune ---------------------------------------------------------

namespace {

ModelArtifact make_artifact(FittedModel model, const Labeled& train, std::uint64_t seed) {
    ModelArtifact a{kArtifactFormatVersion, std::move(model), train.x.feature_names(), {}};
    a.training.seed = seed;
    a.training.row_count = train.y.size();
    a.training.timestamp = artifact_timestamp();
    return a;
}

fs::path model_path(const PipelineConfig& c, ModelKind k) {
    return c.out / ("model_" + std::string(to_string(k)) + ".json");
}

template <typename Body>
int for_each_model(const PipelineConfig& config, std::ostream& log, const char* verb, Body body) {
    int failures = 0;
    for (const auto kind : config.models) {
        try {
            body(kind);
            log << verb << ' ' << to_string(kind) << ": ok\n";
        } catch (const std::exception& e) {
            ++failures;
            log << verb << ' ' << to_string(kind) << ": FAILED: " << e.what() << '\n';
        }
    }
    return failures;
}

}  // namespace

int run_train(const PipelineConfig& config, std::ostream& log) {
    config.validate();
    const auto seed = config.require_seed();
    const auto data = load_prepared(config.out);
    return for_each_model(config, log, "train", [&](ModelKind kind) {
        const auto it = config.hyperparameters.find(kind);
        const auto hp = make_hyperparams(kind, it == config.hyperparameters.end() ? ParamSet{} : it->second, seed);
        const auto limit = row_limit(config, kind);
        const auto train = limit_rows(data.train, limit ? std::optional(share(*limit, config.train_fraction)) : std::nullopt,
                                      derive_seed(seed, 0x7a1, 0));
        save_artifact(model_path(config, kind), make_artifact(fit_model(hp, train.x, train.y), train, seed));
    });
}

int run_tune(const PipelineConfig& config, std::ostream& log) {
    config.validate();
    const auto seed = config.require_seed();
    const auto data = load_prepared(config.out);
    const auto defaults = default_grids();
    return for_each_model(config, log, "tune", [&](ModelKind kind) {
        const auto it = config.grids.find(kind);
        const auto& grid = it == config.grids.end() ? defaults.at(kind) : it->second;
        const auto limit = row_limit(config, kind);
        const auto train = limit_rows(data.train, limit ? std::optional(share(*limit, config.train_fraction)) : std::nullopt,
                                      derive_seed(seed, 0x7a1, 0));
        auto outcome = grid_search(kind, train.x, train.y, grid, config.folds, seed, config.scoring);
        write_file_atomic(config.out / ("cv_" + std::string(to_string(kind)) + ".json"), dump(to_json(outcome.cv)));
        save_artifact(model_path(config, kind), make_artifact(std::move(outcome.best_model), train, seed));
    });
}

// ---- evaluate -------------------------------------------------------------

std::string confusion_csv(const ConfusionMatrix& cm, bool normalized) {
    const auto norm = cm.normalized();
    std::string out = "true\\predicted";
    for (const auto& n : cm.class_names) out += ',' + csv_field(n);
    out += '\n';
    for (std::size_t t = 0; t < cm.classes(); ++t) {
        out += csv_field(cm.class_names[t]);
        for (std::size_t p = 0; p < cm.classes(); ++p)
            out += ',' + (normalized ? format_double(norm(t, p)) : std::to_string(cm(t, p)));
        out += '\n';
    }
    return out;
}

std::string roc_csv(const EvaluationReport& report) {
    std::string out = "curve,fpr,tpr\n";
    const auto emit = [&](const RocCurve& c) {
        for (const auto& p : c.points) out += csv_field(c.tag) + ',' + format_double(p.fpr) + ',' + format_double(p.tpr) + '\n';
    };
    for (const auto& c : report.class_roc) emit(c);
    emit(report.macro_roc);
    emit(report.micro_roc);
    return out;
}

json evaluation_json(ModelKind kind, const EvaluationReport& report, TaxonomyLevel level) {
    json j;
    j["model"] = std::string(to_string(kind));
    j["level"] = std::string(to_string(level));
    j["test_rows"] = report.confusion.total();
    j["accuracy"] = report.accuracy;
    const auto agg = [](const Aggregate& a) {
        return json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
    };
    j["macro"] = agg(report.macro);
    j["weighted"] = agg(report.weighted);
    j["auc_macro"] = report.macro_roc.auc;
    j["auc_micro"] = report.micro_roc.auc;
    j["per_class"] = json::array();
    for (const auto& c : report.per_class) {
        json cj{{"class", c.name}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn},
                {"precision", c.precision.value}, {"recall", c.recall.value}, {"f1", c.f1},
                {"precision_undefined", c.precision.undefined}, {"recall_undefined", c.recall.undefined}};
        cj["auc"] = nullptr;
        for (const auto& r : report.class_roc)
            if (r.tag == c.name) cj["auc"] = r.auc;
        j["per_class"].push_back(std::move(cj));
    }
    return j;
}

int run_evaluate(const PipelineConfig& config, std::ostream& log) {
    config.validate();
    const auto seed = config.require_seed();
    const auto data = load_prepared(config.out);
    json metrics;
    metrics["format_version"] = kArtifactFormatVersion;
    metrics["level"] = std::string(to_string(data.test.y.level));
    metrics["records"] = json::array();
    metrics["models"] = json::object();
    const int failures = for_each_model(config, log, "evaluate", [&](ModelKind kind) {
        const auto name = std::string(to_string(kind));
        const auto path = model_path(config, kind);
        if (!fs::exists(path)) throw Error(path.string() + " not found; run train or tune first");
        const auto artifact = load_artifact(path);
        if (kind_of(artifact.model) != kind) throw Error(path.string() + ": artifact holds a different model kind");
        if (artifact.feature_names != data.test.x.feature_names())
            throw SchemaError(path.string() + ": feature schema differs from the test data");
        if (class_names_of(artifact.model) != data.test.y.class_names ||
            level_of(artifact.model) != data.test.y.level)
            throw SchemaError(path.string() + ": class names or level differ from the test data");

        const auto limit = row_limit(config, kind);
        const auto test = limit_rows(data.test,
                                     limit ? std::optional(share(*limit, 1.0 - config.train_fraction)) : std::nullopt,
                                     derive_seed(seed, 0x7e57, 0));
        const auto pred = predict(artifact.model, test.x);
        const auto proba = predict_proba(artifact.model, test.x);
        const auto report = evaluate(test.y, pred, proba);

        for (const auto& [scheme, a] : {std::pair{"macro", report.macro}, std::pair{"weighted", report.weighted}}) {
            metrics["records"].push_back({{"model", name}, {"level", metrics["level"]}, {"scheme", scheme},
                                          {"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1},
                                          {"accuracy", report.accuracy}});
        }
        metrics["models"][name] = evaluation_json(kind, report, test.y.level);

        write_file_atomic(config.out / ("confusion_" + name + ".csv"), confusion_csv(report.confusion, false));
        write_file_atomic(config.out / ("confusion_" + name + "_normalized.csv"), confusion_csv(report.confusion, true));
        write_file_atomic(config.out / ("roc_" + name + ".csv"), roc_csv(report));
        write_file_atomic(config.out / ("roc_" + name + ".svg"),
                          roc_svg("ROC " + name, report.class_roc, report.macro_roc, report.micro_roc));
        write_file_atomic(config.out / ("confusion_" + name + ".svg"),
                          confusion_svg("Normalised confusion " + name, report.confusion));
    });
    write_file_atomic(config.out / "metrics.json", dump(metrics));
    return failures;
}

// ---- report ---------------------------------------------------------------

std::string run_report(const PipelineConfig& config) {
    const auto metrics_path = config.out / "metrics.json";
    if (!fs::exists(metrics_path)) throw Error(metrics_path.string() + " not found; run evaluate first");
    const auto metrics = read_json(metrics_path);

    std::ostringstream md;
    md << "# Evaluation report\n\n";
    md << "Level: `" << metrics.at("level").get<std::string>() << "`\n\n";

    const auto pre_path = config.out / "preprocess_report.json";
    if (fs::exists(pre_path)) {
        const auto pre = preprocess_report_from_json(read_json(pre_path));
        std::size_t imputed = 0;
        for (const auto& [_, n] : pre.imputed_cells_per_column) imputed += n;
        md << "## Data\n\n";
        md << "Rows read: " << pre.rows_read << ", dropped: " << pre.rows_dropped << ", imputed cells: " << imputed
           << "\n\n| Class | Rows |\n|---|---:|\n";
        for (const auto& [cls, n] : pre.class_counts) md << "| " << cls << " | " << n << " |\n";
        md << '\n';
    }

    for (const char* scheme : {"weighted", "macro"}) {
        md << "## Test set, " << scheme << " average\n\n";
        md << "| Model | Precision | Recall | F1 | Accuracy (%) | AUC (macro) |\n|---|---:|---:|---:|---:|---:|\n";
        for (const auto& r : metrics.at("records")) {
            if (r.at("scheme").get<std::string>() != scheme) continue;
            const auto model = r.at("model").get<std::string>();
            const auto& detail = metrics.at("models").at(model);
            md << "| " << model << " | " << fixed(r.at("precision").get<double>(), 4) << " | "
               << fixed(r.at("recall").get<double>(), 4) << " | " << fixed(r.at("f1").get<double>(), 4) << " | "
               << fixed(100.0 * r.at("accuracy").get<double>(), 2) << " | "
               << fixed(detail.at("auc_macro").get<double>(), 4) << " |\n";
        }
        md << '\n';
    }

    bool cv_header = false;
    for (const auto kind : config.models) {
        const auto path = config.out / ("cv_" + std::string(to_string(kind)) + ".json");
        if (!fs::exists(path)) continue;
        const auto cv = cv_from_json(read_json(path));
        if (!cv_header) {
            md << "## Cross-validation\n\n| Model | Folds | Scoring | Best parameters | Mean | Std |\n|---|---:|---|---|---:|---:|\n";
            cv_header = true;
        }
        md << "| " << to_string(kind) << " | " << cv.folds << " | " << to_string(cv.scoring) << " | `"
           << to_string(cv.best().params) << "` | " << fixed(cv.best().mean, 4) << " | " << fixed(cv.best().stddev, 4)
           << " |\n";
    }
    if (cv_header) md << '\n';

    md << "## Configuration\n\n```json\n" << dump(config.to_json()) << "```\n";
    const auto text = md.str();
    write_file_atomic(config.out / "report.md", text);
    return text;
}

}  // namespace iotsentry
