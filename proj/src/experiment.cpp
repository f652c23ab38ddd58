#include "cascade/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "cascade/features.hpp"
#include "cascade/model.hpp"
#include "cascade/rng.hpp"

namespace cascade::experiment {

namespace {

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(run);
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

struct ResolvedSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::size_t> history;
};

ResolvedSplit resolve_split(const io::DatasetIndex& index, const ExperimentConfig& config) {
    ResolvedSplit split;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
        const io::DatasetEntry& entry = index.entries[i];
        switch (entry.split) {
            case io::SplitLabel::train: split.train.push_back(i); break;
            case io::SplitLabel::test: split.test.push_back(i); break;
            case io::SplitLabel::history: split.history.push_back(i); break;
            case io::SplitLabel::unassigned:
                if (config.split_date && entry.date) {
                    (*entry.date < *config.split_date ? split.train : split.test).push_back(i);
                } else {
                    pending.push_back(i);
                }
                break;
        }
    }
    if (!pending.empty()) {
        std::mt19937_64 rng = make_rng(config.seed, 0x5114);
        std::shuffle(pending.begin(), pending.end(), rng);
        const auto train_count = static_cast<std::size_t>(
            std::llround(config.train_fraction * static_cast<double>(pending.size())));
        for (std::size_t i = 0; i < pending.size(); ++i) {
            (i < train_count ? split.train : split.test).push_back(pending[i]);
        }
        std::sort(split.train.begin(), split.train.end());
        std::sort(split.test.begin(), split.test.end());
    }
    return split;
}

bool needs_metadata(Method method) { return method != Method::hawkes; }
bool needs_metadata(ClassifyMethod method) { return method != ClassifyMethod::hawkesc; }

Cascade load_cascade(const io::DatasetIndex& index, std::size_t entry_index, DataFormat format) {
    const io::DatasetEntry& entry = index.entries[entry_index];
    const std::filesystem::path path = index.base_dir / entry.file;
    return format == DataFormat::extended ? io::parse_extended_cascade_file(path)
                                          : io::parse_basic_cascade_file(path);
}

UserHistory history_from_index(const io::DatasetIndex& index,
                               const std::vector<std::size_t>& history_entries) {
    UserHistory history;
    for (std::size_t i : history_entries) {
        const io::DatasetEntry& entry = index.entries[i];
        if (!entry.initiator.empty()) {
            history.add(entry.initiator, entry.n_real);
        }
    }
    return history;
}

FitConfig make_fit_config(double horizon, const ExperimentConfig& config) {
    FitConfig fit_config;
    fit_config.horizon = horizon;
    fit_config.max_iterations = config.max_fit_iterations;
    fit_config.gradient_tolerance = config.gradient_tolerance;
    fit_config.n_star_slack = config.n_star_slack;
    return fit_config;
}

struct CascadeWork {
    std::string id;
    double n_real{0.0};
    Cascade prefix;
    std::string failure;                // empty while usable
    std::optional<FitResult> fit;
    double a1{0.0};
    std::optional<FeatureVector> features;
};

// The per-cascade fit/feature stage shared by train and test sets.
std::vector<CascadeWork> prepare_cascades(const io::DatasetIndex& index,
                                          const std::vector<std::size_t>& entries, double horizon,
                                          Method method, const ExperimentConfig& config,
                                          const UserHistory& history) {
    std::vector<CascadeWork> work(entries.size());
    const FitConfig fit_config = make_fit_config(horizon, config);
    const bool want_fit = method != Method::feature_driven;
    const bool want_features = needs_metadata(method);

    parallel_for(entries.size(), config.workers, [&](std::size_t w) {
        const io::DatasetEntry& entry = index.entries[entries[w]];
        CascadeWork& item = work[w];
        item.n_real = entry.n_real;

        const Cascade full = load_cascade(index, entries[w], config.format);
        item.id = full.id;
        item.prefix = observed_prefix(full, horizon);
        if (entry.n_real < static_cast<double>(item.prefix.events.size())) {
            throw ConfigError("index entry '" + entry.file +
                              "': n_real smaller than the observed prefix");
        }

        if (want_fit) {
            if (item.prefix.events.size() < config.min_fit_events) {
                item.failure = "too_few_events";
                return;
            }
            try {
                item.fit = fit(item.prefix, fit_config, config.dist);
                item.a1 = expected_first_generation(item.fit->params, item.prefix, horizon);
            } catch (const FitFailureError&) {
                item.failure = "fit_failed";
                return;
            } catch (const InsufficientEventsError&) {
                item.failure = "too_few_events";
                return;
            }
            if (!(item.fit->n_star < 1.0)) {
                item.failure = "supercritical";
                return;
            }
        }
        if (want_features) {
            if (item.prefix.events.size() < 2) {
                item.failure = "too_few_events";
                return;
            }
            item.features = regression_features(item.prefix, history);
        }
    });
    return work;
}

double sample_std(const std::vector<double>& values, double mean) {
    if (values.size() < 2) {
        return 0.0;
    }
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double median_of(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Deterministic fold ids for cross-validation.
std::vector<std::size_t> fold_assignment(std::size_t count, std::size_t folds, std::uint64_t seed) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> fold(count);
    for (std::size_t i = 0; i < count; ++i) {
        fold[order[i]] = i % folds;
    }
    return fold;
}

// Picks min_leaf by k-fold mean ARE of the candidate forest on held-out
// folds; ties keep the earlier grid entry.
std::size_t tune_min_leaf(const forest::Matrix& x, const std::vector<double>& y,
                          const std::vector<double>& n_reals,
                          const std::vector<std::size_t>& n_observed,
                          const std::vector<double>& futures, bool target_is_omega,
                          const std::vector<std::string>& schema, const ExperimentConfig& config) {
    if (config.cv_min_leaf_grid.size() <= 1 || config.cv_folds < 2 || x.size() < 2 * config.cv_folds) {
        return config.cv_min_leaf_grid.empty() ? config.forest.min_leaf
                                               : config.cv_min_leaf_grid.front();
    }
    const std::size_t folds = std::min(config.cv_folds, x.size());
    const std::vector<std::size_t> fold =
        fold_assignment(x.size(), folds, derive_seed(config.seed, 0xCF01));

    double best_score = std::numeric_limits<double>::infinity();
    std::size_t best_leaf = config.cv_min_leaf_grid.front();
    for (std::size_t leaf : config.cv_min_leaf_grid) {
        double total = 0.0;
        std::size_t counted = 0;
        for (std::size_t f = 0; f < folds; ++f) {
            forest::Matrix x_train;
            std::vector<double> y_train;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (fold[i] != f) {
                    x_train.push_back(x[i]);
                    y_train.push_back(y[i]);
                }
            }
            if (x_train.empty()) {
                continue;
            }
            forest::ForestConfig fc = config.forest;
            fc.min_leaf = leaf;
            fc.rng_seed = derive_seed(config.seed, 0xCF02 + f);
            const forest::ForestModel model = forest::train_regressor(x_train, y_train,
                                                                      schema, fc);
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (fold[i] != f) {
                    continue;
                }
                const double out = forest::predict_value(model, x[i]);
                const double predicted =
                    target_is_omega
                        ? static_cast<double>(n_observed[i]) + out * futures[i]
                        : out;
                total += compute_are(predicted, n_reals[i]);
                ++counted;
            }
        }
        if (counted == 0) {
            continue;
        }
        const double score = total / static_cast<double>(counted);
        if (score < best_score) {
            best_score = score;
            best_leaf = leaf;
        }
    }
    return best_leaf;
}

std::vector<double> hybrid_row(const FitResult& fit_result, double a1, const PercentileMap& pmap,
                               const FeatureVector& features) {
    const auto layer = build_layer_features(fit_result, a1, pmap).as_row();
    std::vector<double> row(layer.begin(), layer.end());
    row.insert(row.end(), features.values.begin(), features.values.end());
    return row;
}

std::vector<std::string> hybrid_schema(const FeatureVector& features) {
    std::vector<std::string> schema = LayerFeatures::schema();
    schema.insert(schema.end(), features.names.begin(), features.names.end());
    return schema;
}

} // namespace

Method method_from_string(const std::string& name) {
    if (name == "hawkes") {
        return Method::hawkes;
    }
    if (name == "feature-driven" || name == "feature_driven") {
        return Method::feature_driven;
    }
    if (name == "hybrid") {
        return Method::hybrid;
    }
    throw ConfigError("unknown regression method '" + name + "'");
}

ClassifyMethod classify_method_from_string(const std::string& name) {
    if (name == "hawkesc") {
        return ClassifyMethod::hawkesc;
    }
    if (name == "feature-driven" || name == "feature_driven") {
        return ClassifyMethod::feature_driven;
    }
    if (name == "hybrid") {
        return ClassifyMethod::hybrid;
    }
    throw ConfigError("unknown classification method '" + name + "'");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::hawkes: return "hawkes";
        case Method::feature_driven: return "feature-driven";
        case Method::hybrid: return "hybrid";
    }
    return "?";
}

std::string to_string(ClassifyMethod method) {
    switch (method) {
        case ClassifyMethod::hawkesc: return "hawkesc";
        case ClassifyMethod::feature_driven: return "feature-driven";
        case ClassifyMethod::hybrid: return "hybrid";
    }
    return "?";
}

double compute_are(double predicted, double actual) {
    if (!std::isfinite(actual) || actual < 1.0) {
        throw ParameterDomainError("ARE needs an actual size >= 1");
    }
    if (!std::isfinite(predicted)) {
        throw ParameterDomainError("ARE needs a finite prediction");
    }
    return std::abs(predicted - actual) / actual;
}

ExperimentReport run_regression_experiment(const io::DatasetIndex& index, double horizon,
                                           Method method, const ExperimentConfig& config) {
    config.dist.validate();
    if (!(horizon > 0.0)) {
        throw ConfigError("experiment horizon must be > 0");
    }
    if (needs_metadata(method) && config.format != DataFormat::extended) {
        throw ConfigError("method '" + to_string(method) + "' requires the extended format");
    }
    const ResolvedSplit split = resolve_split(index, config);
    if (split.train.empty() || split.test.empty()) {
        throw ConfigError("experiment needs non-empty train and test splits");
    }

    const UserHistory history = history_from_index(index, split.history);
    std::vector<CascadeWork> train =
        prepare_cascades(index, split.train, horizon, method, config, history);
    std::vector<CascadeWork> test =
        prepare_cascades(index, split.test, horizon, method, config, history);

    // Assemble the training design matrix for the method's forest.
    std::vector<const CascadeWork*> usable;
    for (const CascadeWork& item : train) {
        if (!item.failure.empty()) {
            continue;
        }
        if (method != Method::feature_driven && !(item.a1 > 0.0)) {
            continue;
        }
        usable.push_back(&item);
    }

    PercentileMap pmap;
    forest::Matrix x;
    std::vector<double> y;
    std::vector<double> n_reals;
    std::vector<std::size_t> n_obs;
    std::vector<double> futures;
    std::vector<std::string> schema;
    const bool target_is_omega = method == Method::hawkes;

    if (method != Method::feature_driven) {
        if (usable.size() < 50) {
            throw InsufficientTrainingError(
                "method '" + to_string(method) + "' needs at least 50 usable training cascades, got " +
                std::to_string(usable.size()));
        }
        std::vector<double> thetas;
        std::vector<double> n_stars;
        for (const CascadeWork* item : usable) {
            thetas.push_back(item->fit->params.theta);
            n_stars.push_back(item->fit->n_star);
        }
        pmap = PercentileMap(std::move(thetas), std::move(n_stars));
    }

    for (const CascadeWork* item : usable) {
        if (method == Method::hawkes) {
            const LayerFeatures features = build_layer_features(*item->fit, item->a1, pmap);
            const auto row = features.as_row();
            x.emplace_back(row.begin(), row.end());
            y.push_back(omega_target(item->n_real, item->prefix.events.size(), item->a1,
                                     item->fit->n_star));
            futures.push_back(item->a1 / (1.0 - item->fit->n_star));
        } else if (method == Method::feature_driven) {
            x.push_back(item->features->values);
            y.push_back(item->n_real);
            futures.push_back(0.0);
        } else {
            x.push_back(hybrid_row(*item->fit, item->a1, pmap, *item->features));
            y.push_back(item->n_real);
            futures.push_back(0.0);
        }
        n_reals.push_back(item->n_real);
        n_obs.push_back(item->prefix.events.size());
    }
    if (x.empty()) {
        throw InsufficientTrainingError("no usable training cascades for method '" +
                                        to_string(method) + "'");
    }

    if (method == Method::hawkes) {
        schema = LayerFeatures::schema();
    } else if (method == Method::feature_driven) {
        schema = usable.front()->features->names;
    } else {
        schema = hybrid_schema(*usable.front()->features);
    }

    forest::ForestConfig fc = config.forest;
    fc.min_leaf = tune_min_leaf(x, y, n_reals, n_obs, futures, target_is_omega, schema, config);
    fc.rng_seed = derive_seed(config.seed, 0xF0);
    const forest::ForestModel model = forest::train_regressor(x, y, schema, fc);

    ExperimentReport report;
    report.method = to_string(method);
    report.horizon = horizon;
    report.seed = config.seed;
    std::vector<double> ares;

    for (const CascadeWork& item : test) {
        ReportRow row;
        row.id = item.id;
        row.n_observed = item.prefix.events.size();
        row.n_real = item.n_real;
        row.failure = item.failure;
        if (item.failure.empty() && method != Method::feature_driven && !(item.a1 > 0.0)) {
            row.failure = "degenerate_a1";
        }
        if (row.failure.empty()) {
            double predicted = 0.0;
            if (method == Method::hawkes) {
                const LayerFeatures features = build_layer_features(*item.fit, item.a1, pmap);
                const double omega = forest::predict_value(model, features.as_row());
                const double future = item.a1 / (1.0 - item.fit->n_star);
                row.n_inf_raw = static_cast<double>(row.n_observed) + future;
                predicted = static_cast<double>(row.n_observed) + omega * future;
            } else if (method == Method::feature_driven) {
                predicted = forest::predict_value(model, item.features->values);
            } else {
                if (item.fit) {
                    row.n_inf_raw = static_cast<double>(row.n_observed) +
                                    item.a1 / (1.0 - item.fit->n_star);
                }
                predicted = forest::predict_value(
                    model, hybrid_row(*item.fit, item.a1, pmap, *item.features));
            }
            row.n_inf_corrected = predicted;
            row.are = compute_are(predicted, item.n_real);
            ares.push_back(*row.are);
            ++report.predicted_count;
        } else {
            ++report.failed_count;
        }
        report.rows.push_back(std::move(row));
    }

    if (!ares.empty()) {
        report.mean_are = std::accumulate(ares.begin(), ares.end(), 0.0) /
                          static_cast<double>(ares.size());
        report.std_are = sample_std(ares, report.mean_are);
        report.median_are = median_of(ares);
    }
    return report;
}

void write_regression_report(std::ostream& out, const ExperimentReport& report) {
    out << "id,n_observed,n_real,n_inf_raw,n_inf_corrected,are,failure\n";
    for (const ReportRow& row : report.rows) {
        out << row.id << ',' << row.n_observed << ',' << io::format_double(row.n_real) << ',';
        if (row.n_inf_raw) {
            out << io::format_double(*row.n_inf_raw);
        }
        out << ',';
        if (row.n_inf_corrected) {
            out << io::format_double(*row.n_inf_corrected);
        }
        out << ',';
        if (row.are) {
            out << io::format_double(*row.are);
        }
        out << ',' << row.failure << '\n';
    }
    out << '\n';
    out << "method=" << report.method << '\n';
    out << "horizon_seconds=" << io::format_double(report.horizon) << '\n';
    out << "seed=" << report.seed << '\n';
    out << "cascades_total=" << report.rows.size() << '\n';
    out << "cascades_predicted=" << report.predicted_count << '\n';
    out << "cascades_failed=" << report.failed_count << '\n';
    out << "mean_are=" << io::format_double(report.mean_are) << '\n';
    out << "std_are=" << io::format_double(report.std_are) << '\n';
    out << "median_are=" << io::format_double(report.median_are) << '\n';
}

namespace {

struct ClassifyItem {
    bool label{false};
    std::optional<FitResult> fit;
    double a1{0.0};
    std::optional<FeatureVector> features;
    bool excluded{false};
};

} // namespace

ClassificationReport run_classification_experiment(const io::DatasetIndex& index,
                                                   std::size_t observed_count,
                                                   ClassifyMethod method,
                                                   const ExperimentConfig& config) {
    config.dist.validate();
    if (observed_count < 2) {
        throw ConfigError("classification needs observed_count >= 2");
    }
    if (needs_metadata(method) && config.format != DataFormat::extended) {
        throw ConfigError("method '" + to_string(method) + "' requires the extended format");
    }

    // Entries with enough observed events; history entries never classify.
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
        if (index.entries[i].split != io::SplitLabel::history) {
            eligible.push_back(i);
        }
    }
    if (eligible.empty()) {
        throw ConfigError("classification index has no cascades");
    }

    const UserHistory history = [&] {
        std::vector<std::size_t> history_entries;
        for (std::size_t i = 0; i < index.entries.size(); ++i) {
            if (index.entries[i].split == io::SplitLabel::history) {
                history_entries.push_back(i);
            }
        }
        return history_from_index(index, history_entries);
    }();

    const bool want_fit = method != ClassifyMethod::feature_driven;
    const bool want_features = needs_metadata(method);

    std::vector<ClassifyItem> items(eligible.size());
    std::vector<bool> keep(eligible.size(), false);
    parallel_for(eligible.size(), config.workers, [&](std::size_t w) {
        const io::DatasetEntry& entry = index.entries[eligible[w]];
        const Cascade full = load_cascade(index, eligible[w], config.format);
        if (full.events.size() < observed_count) {
            return;
        }
        keep[w] = true;
        ClassifyItem& item = items[w];
        item.label = entry.n_real >= 2.0 * static_cast<double>(observed_count);
        const Cascade prefix = observed_prefix_by_count(full, observed_count);
        if (want_fit) {
            const double horizon = prefix.observed_until;
            if (horizon <= 0.0 || prefix.events.size() < config.min_fit_events) {
                item.excluded = true;
                return;
            }
            try {
                FitResult fit_result = fit(prefix, make_fit_config(horizon, config), config.dist);
                item.a1 = expected_first_generation(fit_result.params, prefix, horizon);
                item.fit = std::move(fit_result);
            } catch (const Error&) {
                item.excluded = true;
                return;
            }
            if (!(item.fit->n_star < 1.0) || !(item.a1 > 0.0)) {
                item.excluded = true;
                return;
            }
        }
        if (want_features) {
            item.features = classification_features(prefix, history);
        }
    });

    std::vector<ClassifyItem> usable;
    std::size_t eligible_count = 0;
    std::size_t excluded = 0;
    for (std::size_t w = 0; w < items.size(); ++w) {
        if (!keep[w]) {
            continue;
        }
        ++eligible_count;
        if (items[w].excluded) {
            ++excluded;
        } else {
            usable.push_back(std::move(items[w]));
        }
    }

    std::size_t positives = 0;
    for (const ClassifyItem& item : usable) {
        positives += item.label ? 1 : 0;
    }
    if (usable.empty() || positives == 0 || positives == usable.size()) {
        throw InsufficientDataError("classification needs both labels present, got " +
                                    std::to_string(positives) + " positives of " +
                                    std::to_string(usable.size()));
    }

    ClassificationReport report;
    report.method = to_string(method);
    report.observed_count = observed_count;
    report.seed = config.seed;
    report.eligible_count = eligible_count;
    report.excluded_count = excluded;

    std::vector<std::size_t> positive_idx;
    std::vector<std::size_t> negative_idx;
    for (std::size_t i = 0; i < usable.size(); ++i) {
        (usable[i].label ? positive_idx : negative_idx).push_back(i);
    }

    std::vector<double> accuracies;
    for (std::size_t run = 0; run < config.classification_runs; ++run) {
        // Stratified 40/60 split.
        std::vector<std::size_t> train_idx;
        std::vector<std::size_t> test_idx;
        for (const std::vector<std::size_t>* group : {&positive_idx, &negative_idx}) {
            std::vector<std::size_t> shuffled = *group;
            std::mt19937_64 rng = make_rng(config.seed, 0xC100 + run * 2 + (group == &negative_idx));
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            const auto train_count = static_cast<std::size_t>(
                std::llround(config.train_fraction * static_cast<double>(shuffled.size())));
            for (std::size_t i = 0; i < shuffled.size(); ++i) {
                (i < train_count ? train_idx : test_idx).push_back(shuffled[i]);
            }
        }
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(test_idx.begin(), test_idx.end());

        std::size_t train_pos = 0;
        for (std::size_t i : train_idx) {
            train_pos += usable[i].label ? 1 : 0;
        }
        if (train_idx.empty() || train_pos == 0 || train_pos == train_idx.size()) {
            throw InsufficientDataError("training split lost one of the classes");
        }
        if (test_idx.empty()) {
            throw InsufficientDataError("test split is empty");
        }

        // Percentile map from this run's training fits.
        PercentileMap pmap;
        if (want_fit) {
            std::vector<double> thetas;
            std::vector<double> n_stars;
            for (std::size_t i : train_idx) {
                thetas.push_back(usable[i].fit->params.theta);
                n_stars.push_back(usable[i].fit->n_star);
            }
            pmap = PercentileMap(std::move(thetas), std::move(n_stars));
        }

        auto feature_row = [&](const ClassifyItem& item) {
            if (method == ClassifyMethod::hawkesc) {
                const auto row = build_hawkesc_features(*item.fit, item.a1, pmap).as_row();
                return std::vector<double>(row.begin(), row.end());
            }
            if (method == ClassifyMethod::feature_driven) {
                return item.features->values;
            }
            return hybrid_row(*item.fit, item.a1, pmap, *item.features);
        };

        forest::Matrix x_train;
        std::vector<int> y_train;
        for (std::size_t i : train_idx) {
            x_train.push_back(feature_row(usable[i]));
            y_train.push_back(usable[i].label ? 1 : 0);
        }
        std::vector<std::string> schema;
        if (method == ClassifyMethod::hawkesc) {
            schema = LayerFeatures::schema();
        } else if (method == ClassifyMethod::feature_driven) {
            schema = usable[train_idx.front()].features->names;
        } else {
            schema = hybrid_schema(*usable[train_idx.front()].features);
        }

        forest::ForestConfig fc = config.forest;
        fc.rng_seed = derive_seed(config.seed, 0xC900 + run);
        const forest::ForestModel model = forest::train_classifier(x_train, y_train, schema, fc);

        const bool majority_label = 2 * train_pos > train_idx.size();
        std::size_t correct = 0;
        std::size_t majority_correct = 0;
        for (std::size_t i : test_idx) {
            const int predicted = forest::predict_class(model, feature_row(usable[i]));
            correct += (predicted == (usable[i].label ? 1 : 0)) ? 1 : 0;
            majority_correct += (usable[i].label == majority_label) ? 1 : 0;
        }
        ClassificationRun run_result;
        run_result.accuracy = static_cast<double>(correct) / static_cast<double>(test_idx.size());
        run_result.majority_accuracy =
            static_cast<double>(majority_correct) / static_cast<double>(test_idx.size());
        accuracies.push_back(run_result.accuracy);
        report.runs.push_back(run_result);
    }

    report.mean_accuracy = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) /
                           static_cast<double>(accuracies.size());
    report.std_accuracy = sample_std(accuracies, report.mean_accuracy);
    double majority_sum = 0.0;
    for (const ClassificationRun& run : report.runs) {
        majority_sum += run.majority_accuracy;
    }
    report.mean_majority = majority_sum / static_cast<double>(report.runs.size());
    return report;
}

void write_classification_report(std::ostream& out, const ClassificationReport& report) {
    out << "run,accuracy,majority_accuracy\n";
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        out << i << ',' << io::format_double(report.runs[i].accuracy) << ','
            << io::format_double(report.runs[i].majority_accuracy) << '\n';
    }
    out << '\n';
    out << "method=" << report.method << '\n';
    out << "observed_count=" << report.observed_count << '\n';
    out << "seed=" << report.seed << '\n';
    out << "eligible_cascades=" << report.eligible_count << '\n';
    out << "excluded_cascades=" << report.excluded_count << '\n';
    out << "mean_accuracy=" << io::format_double(report.mean_accuracy) << '\n';
    out << "std_accuracy=" << io::format_double(report.std_accuracy) << '\n';
    out << "mean_majority=" << io::format_double(report.mean_majority) << '\n';
}

} // namespace cascade::experiment
