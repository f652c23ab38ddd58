#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cascade/experiment.hpp"
#include "cascade/features.hpp"
#include "cascade/fit.hpp"
#include "cascade/io.hpp"
#include "cascade/model.hpp"
#include "cascade/prediction.hpp"
#include "cascade/rng.hpp"
#include "cascade/simulation.hpp"

namespace {

using cascade::experiment::DataFormat;
using cascade::experiment::ExperimentConfig;

struct Settings {
    ExperimentConfig exp;
    double horizon{0.0};
    std::string method{"hawkes"};
    std::string format{"extended"};
    std::size_t observed_count{25};
};

const std::set<std::string> kKnownKeys = {
    "horizon_seconds", "alpha",           "m_min",
    "seed",            "method",          "format",
    "train_fraction",  "split_date",      "min_fit_events",
    "max_fit_iterations", "gradient_tolerance", "n_star_slack",
    "n_trees",         "min_leaf",        "max_depth",
    "features_per_split", "bootstrap",    "workers",
    "cv_folds",        "classification_runs", "observed_count",
};

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double parsed = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return parsed;
    } catch (const std::exception&) {
        throw cascade::ConfigError("config key '" + key + "' has a non-numeric value '" + value +
                                   "'");
    }
}

std::size_t to_count(const std::string& key, const std::string& value) {
    const double parsed = to_double(key, value);
    if (parsed < 0.0 || parsed != static_cast<double>(static_cast<std::size_t>(parsed))) {
        throw cascade::ConfigError("config key '" + key + "' must be a non-negative integer");
    }
    return static_cast<std::size_t>(parsed);
}

void apply_config_file(Settings& settings, const std::string& path) {
    const auto config = cascade::io::parse_config_file(path);
    for (const auto& [key, value] : config) {
        if (kKnownKeys.find(key) == kKnownKeys.end()) {
            throw cascade::ConfigError("unknown config key '" + key + "'");
        }
    }
    const auto get = [&](const char* key) -> std::optional<std::string> {
        const auto it = config.find(key);
        if (it == config.end()) {
            return std::nullopt;
        }
        return it->second;
    };
    if (auto v = get("horizon_seconds")) settings.horizon = to_double("horizon_seconds", *v);
    if (auto v = get("alpha")) settings.exp.dist.alpha = to_double("alpha", *v);
    if (auto v = get("m_min")) settings.exp.dist.m_min = to_double("m_min", *v);
    if (auto v = get("seed")) settings.exp.seed = static_cast<std::uint64_t>(to_count("seed", *v));
    if (auto v = get("method")) settings.method = *v;
    if (auto v = get("format")) settings.format = *v;
    if (auto v = get("train_fraction")) settings.exp.train_fraction = to_double("train_fraction", *v);
    if (auto v = get("split_date")) settings.exp.split_date = to_double("split_date", *v);
    if (auto v = get("min_fit_events")) settings.exp.min_fit_events = to_count("min_fit_events", *v);
    if (auto v = get("max_fit_iterations"))
        settings.exp.max_fit_iterations = to_count("max_fit_iterations", *v);
    if (auto v = get("gradient_tolerance"))
        settings.exp.gradient_tolerance = to_double("gradient_tolerance", *v);
    if (auto v = get("n_star_slack")) settings.exp.n_star_slack = to_double("n_star_slack", *v);
    if (auto v = get("n_trees")) settings.exp.forest.n_trees = to_count("n_trees", *v);
    if (auto v = get("min_leaf")) settings.exp.forest.min_leaf = to_count("min_leaf", *v);
    if (auto v = get("max_depth")) settings.exp.forest.max_depth = to_count("max_depth", *v);
    if (auto v = get("features_per_split"))
        settings.exp.forest.features_per_split = to_count("features_per_split", *v);
    if (auto v = get("bootstrap")) {
        if (*v != "true" && *v != "false") {
            throw cascade::ConfigError("config key 'bootstrap' must be true or false");
        }
        settings.exp.forest.bootstrap = (*v == "true");
    }
    if (auto v = get("workers")) settings.exp.workers = to_count("workers", *v);
    if (auto v = get("cv_folds")) settings.exp.cv_folds = to_count("cv_folds", *v);
    if (auto v = get("classification_runs"))
        settings.exp.classification_runs = to_count("classification_runs", *v);
    if (auto v = get("observed_count")) settings.observed_count = to_count("observed_count", *v);
}

DataFormat parse_format(const std::string& format) {
    if (format == "basic") {
        return DataFormat::basic;
    }
    if (format == "extended") {
        return DataFormat::extended;
    }
    throw cascade::ConfigError("format must be 'basic' or 'extended', got '" + format + "'");
}

cascade::Cascade load_input(const std::string& path, const std::string& format,
                            cascade::io::ParseStats* stats) {
    return parse_format(format) == DataFormat::extended
               ? cascade::io::parse_extended_cascade_file(path, stats)
               : cascade::io::parse_basic_cascade_file(path, stats);
}

// Output sink: file when --out was given, stdout otherwise.
class Sink {
  public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw cascade::ConfigError("cannot open output file '" + path + "'");
            }
        }
    }

    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

void print_fit(std::ostream& out, const cascade::FitResult& result, std::size_t n_observed,
               std::size_t clamped) {
    using cascade::io::format_double;
    out << "n_observed=" << n_observed << '\n';
    out << "clamped_magnitudes=" << clamped << '\n';
    out << "kappa=" << format_double(result.params.kappa) << '\n';
    out << "beta=" << format_double(result.params.beta) << '\n';
    out << "c=" << format_double(result.params.c) << '\n';
    out << "theta=" << format_double(result.params.theta) << '\n';
    out << "log_likelihood=" << format_double(result.log_likelihood) << '\n';
    out << "n_star=" << format_double(result.n_star) << '\n';
    out << "converged=" << (result.converged ? "true" : "false") << '\n';
    out << "active_constraints=";
    for (std::size_t i = 0; i < result.active_constraints.size(); ++i) {
        out << (i > 0 ? ";" : "") << result.active_constraints[i];
    }
    out << '\n';
    out << "starts_tried=" << result.starts_tried << '\n';
}

int run_fit(const Settings& settings, const std::string& input, const std::string& out_path) {
    if (settings.horizon <= 0.0) {
        throw cascade::ConfigError("fit requires --horizon-seconds > 0");
    }
    cascade::io::ParseStats stats;
    const cascade::Cascade full = load_input(input, settings.format, &stats);
    cascade::FitConfig fit_config;
    fit_config.horizon = settings.horizon;
    fit_config.max_iterations = settings.exp.max_fit_iterations;
    fit_config.gradient_tolerance = settings.exp.gradient_tolerance;
    fit_config.n_star_slack = settings.exp.n_star_slack;
    const cascade::FitResult result = cascade::fit(full, fit_config, settings.exp.dist);
    const cascade::Cascade prefix = cascade::observed_prefix(full, settings.horizon);
    Sink sink(out_path);
    print_fit(sink.stream(), result, prefix.events.size(), stats.clamped_magnitudes);
    return 0;
}

int run_predict(const Settings& settings, const std::string& input, const std::string& layer_path,
                const std::string& out_path) {
    if (settings.horizon <= 0.0) {
        throw cascade::ConfigError("predict requires --horizon-seconds > 0");
    }
    cascade::io::ParseStats stats;
    const cascade::Cascade full = load_input(input, settings.format, &stats);
    cascade::FitConfig fit_config;
    fit_config.horizon = settings.horizon;
    fit_config.max_iterations = settings.exp.max_fit_iterations;
    fit_config.gradient_tolerance = settings.exp.gradient_tolerance;
    fit_config.n_star_slack = settings.exp.n_star_slack;
    const cascade::FitResult result = cascade::fit(full, fit_config, settings.exp.dist);
    const cascade::Cascade prefix = cascade::observed_prefix(full, settings.horizon);

    cascade::PredictionOutcome outcome;
    if (!layer_path.empty()) {
        std::ifstream in(layer_path, std::ios::binary);
        if (!in) {
            throw cascade::ConfigError("cannot open layer file '" + layer_path + "'");
        }
        const cascade::PredictiveLayer layer = cascade::PredictiveLayer::load(in);
        outcome = cascade::predict_corrected(layer, result, prefix, settings.horizon);
    } else {
        outcome = cascade::predict_raw(result.params, prefix, settings.horizon, settings.exp.dist);
    }

    Sink sink(out_path);
    std::ostream& out = sink.stream();
    print_fit(out, result, prefix.events.size(), stats.clamped_magnitudes);
    using cascade::io::format_double;
    out << "a1=" << format_double(outcome.a1) << '\n';
    out << "n_inf_raw=" << format_double(outcome.n_inf_raw) << '\n';
    if (outcome.omega) {
        out << "omega=" << format_double(*outcome.omega) << '\n';
        out << "n_inf_corrected=" << format_double(*outcome.n_inf_corrected) << '\n';
    }
    return 0;
}

int run_simulate(const Settings& settings, const cascade::HawkesParams& params, double m0,
                 double horizon, std::size_t max_events, bool lineage,
                 const std::string& out_path) {
    cascade::SimConfig config;
    config.params = params;
    config.dist = settings.exp.dist;
    config.seed_magnitude = m0;
    if (horizon > 0.0) {
        config.horizon = horizon;
    }
    config.max_events = max_events;
    config.rng_seed = settings.exp.seed;
    const cascade::SimCascade sim = cascade::simulate(config);
    Sink sink(out_path);
    if (lineage) {
        cascade::io::write_sim_cascade(sink.stream(), sim);
    } else {
        cascade::io::write_basic_cascade(sink.stream(), sim.cascade);
    }
    std::cerr << "n_events=" << sim.cascade.events.size() << '\n'
              << "truncated=" << (sim.truncated ? "true" : "false") << '\n';
    return 0;
}

int run_features(const Settings& settings, const std::string& index_path, const std::string& task,
                 const std::string& out_path) {
    const cascade::io::DatasetIndex index = cascade::io::parse_dataset_index(index_path);
    cascade::UserHistory history;
    for (const auto& entry : index.entries) {
        if (entry.split == cascade::io::SplitLabel::history && !entry.initiator.empty()) {
            history.add(entry.initiator, entry.n_real);
        }
    }
    std::vector<std::string> ids;
    std::vector<cascade::FeatureVector> rows;
    for (const auto& entry : index.entries) {
        if (entry.split == cascade::io::SplitLabel::history) {
            continue;
        }
        const cascade::Cascade full =
            cascade::io::parse_extended_cascade_file(index.base_dir / entry.file);
        if (task == "regression") {
            if (settings.horizon <= 0.0) {
                throw cascade::ConfigError("features --task regression requires --horizon-seconds");
            }
            const cascade::Cascade prefix = cascade::observed_prefix(full, settings.horizon);
            if (prefix.events.size() < 2) {
                continue;
            }
            ids.push_back(full.id);
            rows.push_back(cascade::regression_features(prefix, history));
        } else if (task == "classification") {
            if (full.events.size() < settings.observed_count) {
                continue;
            }
            const cascade::Cascade prefix =
                cascade::observed_prefix_by_count(full, settings.observed_count);
            ids.push_back(full.id);
            rows.push_back(cascade::classification_features(prefix, history));
        } else {
            throw cascade::ConfigError("task must be 'regression' or 'classification'");
        }
    }
    Sink sink(out_path);
    cascade::io::write_feature_matrix(sink.stream(), ids, rows);
    return 0;
}

int run_train_layer(const Settings& settings, const std::string& index_path,
                    const std::string& out_path) {
    if (settings.horizon <= 0.0) {
        throw cascade::ConfigError("train-layer requires --horizon-seconds > 0");
    }
    if (out_path.empty()) {
        throw cascade::ConfigError("train-layer requires --out");
    }
    const cascade::io::DatasetIndex index = cascade::io::parse_dataset_index(index_path);

    cascade::FitConfig fit_config;
    fit_config.horizon = settings.horizon;
    fit_config.max_iterations = settings.exp.max_fit_iterations;
    fit_config.gradient_tolerance = settings.exp.gradient_tolerance;
    fit_config.n_star_slack = settings.exp.n_star_slack;

    std::vector<cascade::LayerTrainingExample> examples;
    std::size_t failed = 0;
    for (const auto& entry : index.entries) {
        if (entry.split == cascade::io::SplitLabel::test ||
            entry.split == cascade::io::SplitLabel::history) {
            continue;
        }
        const cascade::Cascade full =
            parse_format(settings.format) == DataFormat::extended
                ? cascade::io::parse_extended_cascade_file(index.base_dir / entry.file)
                : cascade::io::parse_basic_cascade_file(index.base_dir / entry.file);
        const cascade::Cascade prefix = cascade::observed_prefix(full, settings.horizon);
        if (prefix.events.size() < settings.exp.min_fit_events) {
            ++failed;
            continue;
        }
        try {
            cascade::LayerTrainingExample example;
            example.fit = cascade::fit(prefix, fit_config, settings.exp.dist);
            example.a1 =
                cascade::expected_first_generation(example.fit.params, prefix, settings.horizon);
            example.n_observed = prefix.events.size();
            example.n_real = entry.n_real;
            examples.push_back(std::move(example));
        } catch (const cascade::FitFailureError&) {
            ++failed;
        }
    }

    cascade::forest::ForestConfig forest_config = settings.exp.forest;
    forest_config.rng_seed = cascade::derive_seed(settings.exp.seed, 0xF0);
    const cascade::PredictiveLayer layer = cascade::train_layer(examples, forest_config);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw cascade::ConfigError("cannot open output file '" + out_path + "'");
    }
    layer.save(out);
    std::cout << "trained_on=" << examples.size() << '\n' << "failed=" << failed << '\n';
    return 0;
}

int run_evaluate_regression(const Settings& settings, const std::string& index_path,
                            const std::string& out_path) {
    if (settings.horizon <= 0.0) {
        throw cascade::ConfigError("evaluate-regression requires --horizon-seconds > 0");
    }
    Settings effective = settings;
    effective.exp.format = parse_format(settings.format);
    const cascade::io::DatasetIndex index = cascade::io::parse_dataset_index(index_path);
    const auto method = cascade::experiment::method_from_string(settings.method);
    const cascade::experiment::ExperimentReport report =
        cascade::experiment::run_regression_experiment(index, settings.horizon, method,
                                                       effective.exp);
    Sink sink(out_path);
    cascade::experiment::write_regression_report(sink.stream(), report);
    if (report.predicted_count == 0) {
        throw cascade::FitFailureError("no cascade produced a prediction", {});
    }
    return 0;
}

int run_evaluate_classification(const Settings& settings, const std::string& index_path,
                                const std::string& out_path) {
    Settings effective = settings;
    effective.exp.format = parse_format(settings.format);
    const cascade::io::DatasetIndex index = cascade::io::parse_dataset_index(index_path);
    const auto method = cascade::experiment::classify_method_from_string(settings.method);
    const cascade::experiment::ClassificationReport report =
        cascade::experiment::run_classification_experiment(index, settings.observed_count, method,
                                                           effective.exp);
    Sink sink(out_path);
    cascade::experiment::write_classification_report(sink.stream(), report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marked Hawkes cascade modeling, prediction and benchmarking"};
    app.require_subcommand(1);

    Settings settings;
    std::string config_path;
    std::string input;
    std::string index_path;
    std::string out_path;
    std::string layer_path;
    std::string task{"regression"};
    bool lineage = false;
    double sim_kappa = 0.8;
    double sim_beta = 0.3;
    double sim_c = 10.0;
    double sim_theta = 0.6;
    double sim_m0 = 1000.0;
    double sim_horizon = 0.0;
    std::size_t sim_max_events = 1000000;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value configuration file");
        cmd->add_option("--horizon-seconds", settings.horizon, "observation horizon in seconds");
        cmd->add_option("--alpha", settings.exp.dist.alpha, "influence power-law exponent");
        cmd->add_option("--seed", settings.exp.seed, "root seed for all randomness");
        cmd->add_option("--method", settings.method, "hawkes | feature-driven | hybrid (hawkesc for classification)");
        cmd->add_option("--format", settings.format, "basic | extended");
        cmd->add_option("--out", out_path, "output path (stdout when omitted)");
        cmd->add_option("--workers", settings.exp.workers, "worker pool size (0 = hardware)");
    };

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit Hawkes parameters on one cascade");
    add_common(fit_cmd);
    fit_cmd->add_option("--input", input, "cascade file")->required();

    CLI::App* predict_cmd = app.add_subcommand("predict", "fit and predict the final size");
    add_common(predict_cmd);
    predict_cmd->add_option("--input", input, "cascade file")->required();
    predict_cmd->add_option("--layer", layer_path, "trained predictive layer file");

    CLI::App* sim_cmd = app.add_subcommand("simulate", "sample a cascade from the model");
    add_common(sim_cmd);
    sim_cmd->add_option("--kappa", sim_kappa, "content virality");
    sim_cmd->add_option("--beta", sim_beta, "influence warping exponent");
    sim_cmd->add_option("--c", sim_c, "temporal shift (seconds)");
    sim_cmd->add_option("--theta", sim_theta, "memory decay exponent");
    sim_cmd->add_option("--m0", sim_m0, "seed event magnitude");
    sim_cmd->add_option("--sim-horizon", sim_horizon, "stop time (0 = run to extinction)");
    sim_cmd->add_option("--max-events", sim_max_events, "event cap");
    sim_cmd->add_flag("--lineage", lineage, "emit generation and parent columns");

    CLI::App* feat_cmd = app.add_subcommand("features", "emit the feature matrix for an index");
    add_common(feat_cmd);
    feat_cmd->add_option("--index", index_path, "dataset index file")->required();
    feat_cmd->add_option("--task", task, "regression | classification");
    feat_cmd->add_option("--observed-count", settings.observed_count,
                         "events observed for the classification task");

    CLI::App* layer_cmd = app.add_subcommand("train-layer", "train the omega predictive layer");
    add_common(layer_cmd);
    layer_cmd->add_option("--index", index_path, "dataset index file")->required();

    CLI::App* reg_cmd =
        app.add_subcommand("evaluate-regression", "fit, predict and score a dataset");
    add_common(reg_cmd);
    reg_cmd->add_option("--index", index_path, "dataset index file")->required();

    CLI::App* cls_cmd =
        app.add_subcommand("evaluate-classification", "will-double classification benchmark");
    add_common(cls_cmd);
    cls_cmd->add_option("--index", index_path, "dataset index file")->required();
    cls_cmd->add_option("--observed-count", settings.observed_count, "25 or 50 observed events");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }

    try {
        if (!config_path.empty()) {
            Settings from_file;
            apply_config_file(from_file, config_path);
            // CLI flags override file values: re-apply any flag the user passed.
            Settings merged = from_file;
            for (CLI::App* cmd : {fit_cmd, predict_cmd, sim_cmd, feat_cmd, layer_cmd, reg_cmd, cls_cmd}) {
                if (!cmd->parsed()) {
                    continue;
                }
                const auto passed = [&](const std::string& flag) {
                    const CLI::Option* option = cmd->get_option_no_throw(flag);
                    return option != nullptr && option->count() > 0;
                };
                if (passed("--horizon-seconds")) merged.horizon = settings.horizon;
                if (passed("--alpha")) merged.exp.dist.alpha = settings.exp.dist.alpha;
                if (passed("--seed")) merged.exp.seed = settings.exp.seed;
                if (passed("--method")) merged.method = settings.method;
                if (passed("--format")) merged.format = settings.format;
                if (passed("--workers")) merged.exp.workers = settings.exp.workers;
                if (passed("--observed-count")) merged.observed_count = settings.observed_count;
            }
            settings = merged;
        }

        if (fit_cmd->parsed()) {
            return run_fit(settings, input, out_path);
        }
        if (predict_cmd->parsed()) {
            return run_predict(settings, input, layer_path, out_path);
        }
        if (sim_cmd->parsed()) {
            const cascade::HawkesParams params{sim_kappa, sim_beta, sim_c, sim_theta};
            return run_simulate(settings, params, sim_m0, sim_horizon, sim_max_events, lineage,
                                out_path);
        }
        if (feat_cmd->parsed()) {
            return run_features(settings, index_path, task, out_path);
        }
        if (layer_cmd->parsed()) {
            return run_train_layer(settings, index_path, out_path);
        }
        if (reg_cmd->parsed()) {
            return run_evaluate_regression(settings, index_path, out_path);
        }
        if (cls_cmd->parsed()) {
            return run_evaluate_classification(settings, index_path, out_path);
        }
    } catch (const cascade::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const cascade::FitFailureError& e) {
        std::cerr << "fit failure: " << e.what() << '\n';
        return 3;
    } catch (const cascade::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 4;
    } catch (const cascade::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
