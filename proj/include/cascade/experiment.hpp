#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cascade/fit.hpp"
#include "cascade/forest.hpp"
#include "cascade/io.hpp"
#include "cascade/prediction.hpp"
#include "cascade/types.hpp"

namespace cascade::experiment {

enum class Method { hawkes, feature_driven, hybrid };
enum class ClassifyMethod { hawkesc, feature_driven, hybrid };

Method method_from_string(const std::string& name);
ClassifyMethod classify_method_from_string(const std::string& name);
std::string to_string(Method method);
std::string to_string(ClassifyMethod method);

enum class DataFormat { basic, extended };

struct ExperimentConfig {
    InfluenceDistribution dist{};
    DataFormat format{DataFormat::extended};
    std::uint64_t seed{0};
    std::size_t workers{0};            // 0 = hardware concurrency
    double train_fraction{0.4};        // 40/60 split for unassigned entries
    std::optional<double> split_date;  // date rule: date < split_date -> train
    std::size_t min_fit_events{5};     // below: reported as a failed cascade
    std::size_t max_fit_iterations{300};
    double gradient_tolerance{1e-5};
    double n_star_slack{1e-4};
    forest::ForestConfig forest{};
    std::size_t cv_folds{10};          // forest tuning folds within the training split
    std::vector<std::size_t> cv_min_leaf_grid{2, 5, 10};
    std::size_t classification_runs{10};
};

// ARE = |predicted - actual| / actual; actual must be >= 1.
double compute_are(double predicted, double actual);

struct ReportRow {
    std::string id;
    std::size_t n_observed{0};
    double n_real{0.0};
    std::optional<double> n_inf_raw;
    std::optional<double> n_inf_corrected; // the reported prediction
    std::optional<double> are;
    std::string failure; // empty when predicted
};

struct ExperimentReport {
    std::string method;
    double horizon{0.0};
    std::uint64_t seed{0};
    std::vector<ReportRow> rows; // one per test cascade, in index order
    std::size_t predicted_count{0};
    std::size_t failed_count{0};
    double mean_are{0.0};
    double std_are{0.0};
    double median_are{0.0};
};

// Fit -> predict -> evaluate over the index's train/test split.
//   hawkes: per-cascade MLE plus the omega predictive layer;
//   feature_driven: forest regression of the final size on the feature set;
//   hybrid: forest on the union of layer features and the feature set.
// Failed cascades are excluded from the aggregates and counted.
ExperimentReport run_regression_experiment(const io::DatasetIndex& index, double horizon,
                                           Method method, const ExperimentConfig& config);

void write_regression_report(std::ostream& out, const ExperimentReport& report);

struct ClassificationRun {
    double accuracy{0.0};
    double majority_accuracy{0.0};
};

struct ClassificationReport {
    std::string method;
    std::size_t observed_count{0};
    std::uint64_t seed{0};
    std::size_t eligible_count{0};
    std::size_t excluded_count{0}; // eligible cascades the method could not featurize
    std::vector<ClassificationRun> runs;
    double mean_accuracy{0.0};
    double std_accuracy{0.0};
    double mean_majority{0.0};
};

// Will-double task: observe the first `observed_count` events, label
// n_real >= 2 * observed_count, repeated stratified 40/60 splits.
ClassificationReport run_classification_experiment(const io::DatasetIndex& index,
                                                   std::size_t observed_count,
                                                   ClassifyMethod method,
                                                   const ExperimentConfig& config);

void write_classification_report(std::ostream& out, const ClassificationReport& report);

} // namespace cascade::experiment
