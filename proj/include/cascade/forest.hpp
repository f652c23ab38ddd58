#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cascade/errors.hpp"

namespace cascade::forest {

enum class Task : std::uint8_t { regression = 0, classification = 1 };

struct ForestConfig {
    std::size_t n_trees{100};
    std::size_t max_depth{0};          // 0 = unbounded
    std::size_t min_leaf{0};           // 0 = task default: 5 regression, 1 classification
    std::size_t features_per_split{0}; // 0 = heuristic: d/3 regression, sqrt(d) classification
    bool bootstrap{true};
    std::uint64_t rng_seed{0};
};

struct TreeNode {
    std::int32_t feature{-1}; // -1 marks a leaf
    double threshold{0.0};
    std::uint32_t left{0};
    std::uint32_t right{0};
    double value{0.0}; // leaf prediction; class index for classification
};

struct Tree {
    std::vector<TreeNode> nodes; // node 0 is the root
};

struct ForestModel {
    Task task{Task::regression};
    std::uint32_t n_classes{0}; // 0 for regression
    std::vector<std::string> feature_schema;
    std::vector<Tree> trees;
};

using Matrix = std::vector<std::vector<double>>;

// CART with bootstrap resampling and random feature subsets per split.
// Regression trees split on variance reduction, classification on Gini
// impurity. Thresholds are midpoints between consecutive distinct sorted
// values; impurity ties break to the lowest feature index, then the lowest
// threshold. Deterministic given rng_seed.
ForestModel train_regressor(const Matrix& x, const std::vector<double>& y,
                            std::vector<std::string> schema, const ForestConfig& config = {});

// Class labels must be consecutive integers starting at 0.
ForestModel train_classifier(const Matrix& x, const std::vector<int>& y,
                             std::vector<std::string> schema, const ForestConfig& config = {});

// Mean of tree outputs.
double predict_value(const ForestModel& model, std::span<const double> row);

// Majority vote; ties break toward the lower class index.
int predict_class(const ForestModel& model, std::span<const double> row);

// Versioned binary serialization; see the model-format section of README.md
// for the byte layout.
void save(const ForestModel& model, std::ostream& out);
ForestModel load(std::istream& in);
std::vector<std::uint8_t> save_bytes(const ForestModel& model);
ForestModel load_bytes(std::span<const std::uint8_t> bytes);

} // namespace cascade::forest
