#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iotsentry/error.hpp"
#include "iotsentry/pipeline.hpp"

using namespace iotsentry;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string models;
    std::string level;
    std::string out;
    std::vector<std::string> dataset;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON pipeline config");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--models", o.models, "comma-separated subset of dt,rf,gbm,ada,knn");
    cmd->add_option("--level", o.level, "attack34, category10 or binary2");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--dataset", o.dataset, "CSV file or directory (repeatable)");
}

PipelineConfig build_config(const Overrides& o) {
    PipelineConfig c = o.config.empty() ? PipelineConfig{} : PipelineConfig::load(o.config);
    if (o.seed) c.seed = o.seed;
    if (!o.models.empty()) c.models = parse_model_list(o.models);
    if (!o.level.empty()) c.level = parse_level(o.level);
    if (!o.out.empty()) c.out = o.out;
    if (!o.dataset.empty()) c.dataset.assign(o.dataset.begin(), o.dataset.end());
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intrusion detection pipeline for IoT flow records"};
    app.require_subcommand(1);
    Overrides o;

    auto* pre = app.add_subcommand("preprocess", "load, impute, encode and split the dataset");
    auto* train = app.add_subcommand("train", "fit models with configured hyperparameters");
    auto* tune = app.add_subcommand("tune", "grid search with stratified k-fold CV");
    auto* eval = app.add_subcommand("evaluate", "score saved models on the test split");
    auto* report = app.add_subcommand("report", "render report.md from evaluation outputs");
    for (auto* cmd : {pre, train, tune, eval, report}) add_common(cmd, o);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = build_config(o);
        if (pre->parsed()) {
            const auto r = run_preprocess(config);
            std::cout << "preprocess: " << r.rows_read << " rows read, " << r.rows_dropped << " dropped, "
                      << r.class_counts.size() << " classes -> " << config.out.string() << '\n';
            return 0;
        }
        if (train->parsed()) return run_train(config, std::cout) == 0 ? 0 : 1;
        if (tune->parsed()) return run_tune(config, std::cout) == 0 ? 0 : 1;
        if (eval->parsed()) return run_evaluate(config, std::cout) == 0 ? 0 : 1;
        if (report->parsed()) {
            std::cout << run_report(config);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
