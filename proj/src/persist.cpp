#include "iotsentry/persist.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>

#include "iotsentry/error.hpp"
#include "iotsentry/textio.hpp"

namespace iotsentry {

using nlohmann::json;

std::string artifact_timestamp() {
    std::time_t t = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string dump(const json& j) { return j.dump(1, '\t') + "\n"; }

json to_json(const ParamValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

ParamValue param_from_json(const json& j) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return std::string(j.get<bool>() ? "true" : "false");
    if (j.is_null()) return std::string("none");
    throw Error("parameter values must be numbers, strings or booleans, got " + j.dump());
}

json to_json(const ParamSet& p) {
    json out = json::object();
    for (const auto& [name, v] : p) out[name] = to_json(v);
    return out;
}

ParamSet params_from_json(const json& j) {
    if (!j.is_object()) throw Error("parameter set must be a JSON object");
    ParamSet out;
    for (const auto& [name, v] : j.items()) out[name] = param_from_json(v);
    return out;
}

ParamGrid grid_from_json(const json& j) {
    if (!j.is_object()) throw Error("parameter grid must be a JSON object");
    ParamGrid out;
    for (const auto& [name, values] : j.items()) {
        auto& list = out[name];
        if (values.is_array()) {
            for (const auto& v : values) list.push_back(param_from_json(v));
        } else {
            list.push_back(param_from_json(values));
        }
    }
    return out;
}

// Trees are written as nested node records. Reading replays the builder's
// depth-first numbering so a loaded tree compares equal to the saved one.
json to_json(const Tree& tree) {
    const auto node_json = [&](auto&& self, std::int32_t id) -> json {
        const auto& n = tree.nodes[static_cast<std::size_t>(id)];
        json j;
        j["samples"] = n.samples;
        if (n.is_leaf()) {
            const auto v = tree.leaf_value(id);
            j["value"] = std::vector<double>(v.begin(), v.end());
        } else {
            j["feature"] = n.feature;
            j["threshold"] = n.threshold;
            j["left"] = self(self, n.left);
            j["right"] = self(self, n.right);
        }
        return j;
    };
    return node_json(node_json, 0);
}

Tree tree_from_json(const json& j, std::size_t n_features, std::size_t value_count) {
    Tree tree;
    tree.n_features = n_features;
    tree.value_count = value_count;
    tree.nodes.push_back(TreeNode{});
    struct Frame {
        std::int32_t id;
        const json* node;
        std::uint32_t depth;
    };
    std::vector<Frame> stack{{0, &j, 0}};
    while (!stack.empty()) {
        const auto f = stack.back();
        stack.pop_back();
        const json& node = *f.node;
        auto& out = tree.nodes[static_cast<std::size_t>(f.id)];
        out.samples = node.at("samples").get<std::uint32_t>();
        out.depth = f.depth;
        if (node.contains("value")) {
            const auto values = node.at("value").get<std::vector<double>>();
            if (values.size() != value_count) throw Error("tree leaf has the wrong number of values");
            out.value_offset = static_cast<std::uint32_t>(tree.leaf_values.size());
            tree.leaf_values.insert(tree.leaf_values.end(), values.begin(), values.end());
            continue;
        }
        out.feature = node.at("feature").get<std::int32_t>();
        if (out.feature < 0 || static_cast<std::size_t>(out.feature) >= n_features)
            throw Error("tree node feature index out of range");
        out.threshold = node.at("threshold").get<double>();
        const auto left = static_cast<std::int32_t>(tree.nodes.size());
        out.left = left;
        out.right = left + 1;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        stack.push_back({left + 1, &node.at("right"), f.depth + 1});
        stack.push_back({left, &node.at("left"), f.depth + 1});
    }
    return tree;
}

namespace {

json trees_json(const std::vector<Tree>& trees) {
    json out = json::array();
    for (const auto& t : trees) out.push_back(to_json(t));
    return out;
}

std::vector<Tree> trees_from_json(const json& j, std::size_t n_features, std::size_t value_count) {
    std::vector<Tree> out;
    for (const auto& t : j) out.push_back(tree_from_json(t, n_features, value_count));
    return out;
}

json matrix_rows(const FeatureMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

}  // namespace

json to_json(const ModelArtifact& a) {
    const auto& model = a.model;
    const auto kind = kind_of(model);
    const auto h = hyperparams_of(model);
    json j;
    j["format_version"] = a.format_version;
    j["model_kind"] = std::string(to_string(kind));
    j["hyperparameters"] = to_json(describe(h));
    j["feature_names"] = a.feature_names;
    j["class_names"] = class_names_of(model);
    j["level"] = std::string(to_string(level_of(model)));
    j["standardization"] = nullptr;

    json body;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FittedTree>) {
                body["tree"] = to_json(m.tree);
            } else if constexpr (std::is_same_v<T, FittedForest>) {
                body["trees"] = trees_json(m.trees);
            } else if constexpr (std::is_same_v<T, FittedAdaBoost>) {
                body["learners"] = trees_json(m.learners);
            } else if constexpr (std::is_same_v<T, FittedGbm>) {
                body["initial_scores"] = m.initial_scores;
                json stages = json::array();
                for (const auto& s : m.stages) stages.push_back(trees_json(s));
                body["stages"] = std::move(stages);
                body["train_deviance"] = m.train_deviance;
            } else {
                if (m.config.standardize)
                    j["standardization"] = {{"mean", m.scaling.mean}, {"stddev", m.scaling.stddev}};
                body["train"] = matrix_rows(m.train);
                body["labels"] = m.labels.ids;
            }
        },
        model);
    j["body"] = std::move(body);
    j["training"] = {{"seed", a.training.seed}, {"row_count", a.training.row_count}, {"timestamp", a.training.timestamp}};
    return j;
}

ModelArtifact artifact_from_json(const json& j) {
    ModelArtifact a;
    a.format_version = j.at("format_version").get<int>();
    if (a.format_version != kArtifactFormatVersion)
        throw Error("unsupported model format_version " + std::to_string(a.format_version));
    const auto kind = parse_model_kind(j.at("model_kind").get<std::string>());
    a.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto class_names = j.at("class_names").get<std::vector<std::string>>();
    const auto level = parse_level(j.at("level").get<std::string>());
    const auto& t = j.at("training");
    a.training.seed = t.at("seed").get<std::uint64_t>();
    a.training.row_count = t.at("row_count").get<std::size_t>();
    a.training.timestamp = t.at("timestamp").get<std::string>();

    const auto h = make_hyperparams(kind, params_from_json(j.at("hyperparameters")), a.training.seed);
    const auto& body = j.at("body");
    const std::size_t f = a.feature_names.size();
    const std::size_t k = class_names.size();

    switch (kind) {
        case ModelKind::dt: {
            FittedTree m{std::get<TreeConfig>(h), tree_from_json(body.at("tree"), f, k), class_names, level};
            a.model = std::move(m);
            break;
        }
        case ModelKind::rf: {
            FittedForest m{std::get<ForestConfig>(h), trees_from_json(body.at("trees"), f, k), class_names, level};
            a.model = std::move(m);
            break;
        }
        case ModelKind::ada: {
            FittedAdaBoost m;
            m.config = std::get<AdaBoostConfig>(h);
            m.learners = trees_from_json(body.at("learners"), f, k);
            m.class_names = class_names;
            m.level = level;
            a.model = std::move(m);
            break;
        }
        case ModelKind::gbm: {
            FittedGbm m;
            m.config = std::get<GbmConfig>(h);
            m.initial_scores = body.at("initial_scores").get<std::vector<double>>();
            for (const auto& s : body.at("stages")) m.stages.push_back(trees_from_json(s, f, 1));
            m.class_names = class_names;
            m.level = level;
            if (body.contains("train_deviance")) m.train_deviance = body.at("train_deviance").get<std::vector<double>>();
            a.model = std::move(m);
            break;
        }
        case ModelKind::knn: {
            FittedKnn m;
            m.config = std::get<KnnConfig>(h);
            std::vector<double> values;
            for (const auto& row : body.at("train")) {
                const auto r = row.get<std::vector<double>>();
                if (r.size() != f) throw Error("stored k-NN row has the wrong width");
                values.insert(values.end(), r.begin(), r.end());
            }
            m.train = FeatureMatrix(a.feature_names, std::move(values));
            m.labels = LabelVector{body.at("labels").get<std::vector<int>>(), class_names, level};
            if (m.config.standardize) {
                const auto& s = j.at("standardization");
                m.scaling.mean = s.at("mean").get<std::vector<double>>();
                m.scaling.stddev = s.at("stddev").get<std::vector<double>>();
            }
            a.model = std::move(m);
            break;
        }
    }
    return a;
}

void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact) {
    write_file_atomic(path, dump(to_json(artifact)));
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
    try {
        return artifact_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw Error(path.string() + ": malformed model artifact: " + e.what());
    }
}

json to_json(const CVResult& cv) {
    json j;
    j["model"] = std::string(to_string(cv.kind));
    j["folds"] = cv.folds;
    j["scoring"] = std::string(to_string(cv.scoring));
    j["seed"] = cv.seed;
    j["best_index"] = cv.best_index;
    j["best_params"] = to_json(cv.best().params);
    json records = json::array();
    for (const auto& r : cv.records)
        records.push_back({{"params", to_json(r.params)},
                           {"fold_scores", r.fold_scores},
                           {"mean", r.mean},
                           {"stddev", r.stddev}});
    j["records"] = std::move(records);
    return j;
}

CVResult cv_from_json(const json& j) {
    CVResult cv;
    cv.kind = parse_model_kind(j.at("model").get<std::string>());
    cv.folds = j.at("folds").get<int>();
    cv.scoring = parse_scoring(j.at("scoring").get<std::string>());
    cv.seed = j.at("seed").get<std::uint64_t>();
    cv.best_index = j.at("best_index").get<std::size_t>();
    for (const auto& r : j.at("records")) {
        CVRecord rec;
        rec.params = params_from_json(r.at("params"));
        rec.fold_scores = r.at("fold_scores").get<std::vector<double>>();
        rec.mean = r.at("mean").get<double>();
        rec.stddev = r.at("stddev").get<double>();
        cv.records.push_back(std::move(rec));
    }
    return cv;
}

json to_json(const PreprocessReport& report) {
    json j;
    j["rows_read"] = report.rows_read;
    j["rows_dropped"] = report.rows_dropped;
    j["imputed_cells_per_column"] = report.imputed_cells_per_column;
    j["class_counts"] = report.class_counts;
    return j;
}

PreprocessReport preprocess_report_from_json(const json& j) {
    PreprocessReport r;
    r.rows_read = j.at("rows_read").get<std::size_t>();
    r.rows_dropped = j.at("rows_dropped").get<std::size_t>();
    r.imputed_cells_per_column = j.at("imputed_cells_per_column").get<std::map<std::string, std::size_t>>();
    r.class_counts = j.at("class_counts").get<std::map<std::string, std::size_t>>();
    return r;
}

}  // namespace iotsentry
