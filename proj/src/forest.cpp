#include "cascade/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "cascade/rng.hpp"

namespace cascade::forest {

namespace {

struct TrainContext {
    const Matrix* x;
    const std::vector<double>* y; // class labels stored as doubles for classification
    Task task;
    std::size_t n_classes;
    std::size_t n_features;
    std::size_t min_leaf;
    std::size_t max_depth; // 0 = unbounded
    std::size_t features_per_split;
};

struct SplitChoice {
    bool found{false};
    std::size_t feature{0};
    double threshold{0.0};
    double score{std::numeric_limits<double>::infinity()};
};

double leaf_value(const TrainContext& ctx, std::span<const std::size_t> rows) {
    const std::vector<double>& y = *ctx.y;
    if (ctx.task == Task::regression) {
        double sum = 0.0;
        for (std::size_t r : rows) {
            sum += y[r];
        }
        return sum / static_cast<double>(rows.size());
    }
    std::vector<std::size_t> counts(ctx.n_classes, 0);
    for (std::size_t r : rows) {
        ++counts[static_cast<std::size_t>(y[r])];
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < counts.size(); ++k) {
        if (counts[k] > counts[best]) {
            best = k; // ties keep the lower class index
        }
    }
    return static_cast<double>(best);
}

bool is_pure(const TrainContext& ctx, std::span<const std::size_t> rows) {
    const std::vector<double>& y = *ctx.y;
    const double first = y[rows.front()];
    for (std::size_t r : rows) {
        if (y[r] != first) {
            return false;
        }
    }
    return true;
}

// Best split of `rows` on one feature; score is the summed child impurity
// (sum of squared deviations for regression, weighted Gini for
// classification). Returns infinity when no valid split exists.
SplitChoice best_split_on_feature(const TrainContext& ctx, std::span<const std::size_t> rows,
                                  std::size_t feature, std::vector<std::size_t>& scratch) {
    const Matrix& x = *ctx.x;
    const std::vector<double>& y = *ctx.y;
    scratch.assign(rows.begin(), rows.end());
    std::sort(scratch.begin(), scratch.end(), [&](std::size_t a, std::size_t b) {
        if (x[a][feature] != x[b][feature]) {
            return x[a][feature] < x[b][feature];
        }
        return a < b;
    });

    SplitChoice choice;
    choice.feature = feature;
    const std::size_t n = scratch.size();

    if (ctx.task == Task::regression) {
        double total_sum = 0.0;
        for (std::size_t r : scratch) {
            total_sum += y[r];
        }
        double left_sum = 0.0;
        double left_sq = 0.0;
        double total_sq = 0.0;
        for (std::size_t r : scratch) {
            total_sq += y[r] * y[r];
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double yr = y[scratch[i]];
            left_sum += yr;
            left_sq += yr * yr;
            const double xv = x[scratch[i]][feature];
            const double xn = x[scratch[i + 1]][feature];
            if (xv == xn) {
                continue;
            }
            const std::size_t left_n = i + 1;
            const std::size_t right_n = n - left_n;
            if (left_n < ctx.min_leaf || right_n < ctx.min_leaf) {
                continue;
            }
            const double right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double score = (left_sq - left_sum * left_sum / static_cast<double>(left_n)) +
                                 (right_sq - right_sum * right_sum / static_cast<double>(right_n));
            const double threshold = 0.5 * (xv + xn);
            if (score < choice.score ||
                (score == choice.score && threshold < choice.threshold)) {
                choice.found = true;
                choice.score = score;
                choice.threshold = threshold;
            }
        }
        return choice;
    }

    std::vector<double> total_counts(ctx.n_classes, 0.0);
    for (std::size_t r : scratch) {
        total_counts[static_cast<std::size_t>(y[r])] += 1.0;
    }
    std::vector<double> left_counts(ctx.n_classes, 0.0);
    double left_n = 0.0;
    const double total_n = static_cast<double>(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        left_counts[static_cast<std::size_t>(y[scratch[i]])] += 1.0;
        left_n += 1.0;
        const double xv = x[scratch[i]][feature];
        const double xn = x[scratch[i + 1]][feature];
        if (xv == xn) {
            continue;
        }
        const double right_n = total_n - left_n;
        if (left_n < static_cast<double>(ctx.min_leaf) ||
            right_n < static_cast<double>(ctx.min_leaf)) {
            continue;
        }
        double left_gini = 1.0;
        double right_gini = 1.0;
        for (std::size_t k = 0; k < ctx.n_classes; ++k) {
            const double pl = left_counts[k] / left_n;
            const double pr = (total_counts[k] - left_counts[k]) / right_n;
            left_gini -= pl * pl;
            right_gini -= pr * pr;
        }
        const double score = left_n * left_gini + right_n * right_gini;
        const double threshold = 0.5 * (xv + xn);
        if (score < choice.score || (score == choice.score && threshold < choice.threshold)) {
            choice.found = true;
            choice.score = score;
            choice.threshold = threshold;
        }
    }
    return choice;
}

std::uint32_t build_node(const TrainContext& ctx, Tree& tree, std::vector<std::size_t>& rows,
                         std::size_t begin, std::size_t end, std::size_t depth,
                         std::mt19937_64& rng) {
    const std::span<const std::size_t> node_rows(rows.data() + begin, end - begin);
    const std::uint32_t index = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});

    const bool depth_capped = ctx.max_depth != 0 && depth >= ctx.max_depth;
    if (node_rows.size() < 2 * ctx.min_leaf || depth_capped || is_pure(ctx, node_rows)) {
        tree.nodes[index].value = leaf_value(ctx, node_rows);
        return index;
    }

    // Features are scanned in a shuffled order. The first features_per_split
    // entries that admit a split form the candidate pool; when none of the
    // scanned features admits one, scanning continues so that an impure node
    // only becomes a leaf if no feature can separate it.
    std::vector<std::size_t> order(ctx.n_features);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    SplitChoice best;
    std::size_t usable_seen = 0;
    std::vector<std::size_t> scratch;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const SplitChoice candidate = best_split_on_feature(ctx, node_rows, order[pos], scratch);
        if (candidate.found) {
            ++usable_seen;
            if (candidate.score < best.score ||
                (candidate.score == best.score &&
                 (!best.found || candidate.feature < best.feature ||
                  (candidate.feature == best.feature && candidate.threshold < best.threshold)))) {
                best = candidate;
            }
        }
        if (usable_seen >= 1 && pos + 1 >= ctx.features_per_split) {
            break;
        }
    }

    if (!best.found) {
        tree.nodes[index].value = leaf_value(ctx, node_rows);
        return index;
    }

    const Matrix& x = *ctx.x;
    auto middle = std::stable_partition(
        rows.begin() + static_cast<std::ptrdiff_t>(begin),
        rows.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t r) { return x[r][best.feature] <= best.threshold; });
    const std::size_t split_at = static_cast<std::size_t>(middle - rows.begin());

    tree.nodes[index].feature = static_cast<std::int32_t>(best.feature);
    tree.nodes[index].threshold = best.threshold;
    const std::uint32_t left = build_node(ctx, tree, rows, begin, split_at, depth + 1, rng);
    const std::uint32_t right = build_node(ctx, tree, rows, split_at, end, depth + 1, rng);
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
    return index;
}

ForestModel train_impl(const Matrix& x, const std::vector<double>& y, Task task,
                       std::size_t n_classes, std::vector<std::string> schema,
                       const ForestConfig& config) {
    if (x.empty()) {
        throw ParameterDomainError("forest training set is empty");
    }
    if (x.size() != y.size()) {
        throw ParameterDomainError("forest feature and target counts differ");
    }
    const std::size_t n_features = x.front().size();
    if (n_features == 0) {
        throw ParameterDomainError("forest training rows have no features");
    }
    if (schema.size() != n_features) {
        throw SchemaMismatchError("forest schema size does not match feature count");
    }
    for (const auto& row : x) {
        if (row.size() != n_features) {
            throw SchemaMismatchError("forest training rows have inconsistent widths");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw ParameterDomainError("forest training features must be finite");
            }
        }
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw ParameterDomainError("forest training targets must be finite");
        }
    }
    if (config.n_trees < 1) {
        throw ConfigError("forest needs at least one tree");
    }

    TrainContext ctx;
    ctx.x = &x;
    ctx.y = &y;
    ctx.task = task;
    ctx.n_classes = n_classes;
    ctx.n_features = n_features;
    ctx.min_leaf = config.min_leaf != 0 ? config.min_leaf
                                        : (task == Task::regression ? std::size_t{5} : std::size_t{1});
    ctx.max_depth = config.max_depth;
    if (config.features_per_split != 0) {
        ctx.features_per_split = std::min(config.features_per_split, n_features);
    } else if (task == Task::regression) {
        ctx.features_per_split = std::max<std::size_t>(1, n_features / 3);
    } else {
        ctx.features_per_split =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features))));
    }

    ForestModel model;
    model.task = task;
    model.n_classes = static_cast<std::uint32_t>(n_classes);
    model.feature_schema = std::move(schema);
    model.trees.resize(config.n_trees);

    const std::size_t n_rows = x.size();
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        std::mt19937_64 rng(derive_seed(config.rng_seed, t));
        std::vector<std::size_t> rows;
        rows.reserve(n_rows);
        if (config.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, n_rows - 1);
            for (std::size_t i = 0; i < n_rows; ++i) {
                rows.push_back(pick(rng));
            }
            std::sort(rows.begin(), rows.end());
        } else {
            rows.resize(n_rows);
            std::iota(rows.begin(), rows.end(), 0);
        }
        build_node(ctx, model.trees[t], rows, 0, rows.size(), 0, rng);
    }
    return model;
}

double traverse(const Tree& tree, std::span<const double> row) {
    std::uint32_t node = 0;
    while (tree.nodes[node].feature >= 0) {
        const TreeNode& n = tree.nodes[node];
        node = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[node].value;
}

void check_row(const ForestModel& model, std::span<const double> row) {
    if (row.size() != model.feature_schema.size()) {
        throw SchemaMismatchError("prediction row width does not match the model schema");
    }
    for (double v : row) {
        if (!std::isfinite(v)) {
            throw ParameterDomainError("prediction features must be finite");
        }
    }
}

template <class T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) {
        throw ModelFormatError("forest payload truncated");
    }
    return value;
}

constexpr std::uint32_t kMagic = 0x52465354; // "RFST"
constexpr std::uint32_t kVersion = 1;

} // namespace

ForestModel train_regressor(const Matrix& x, const std::vector<double>& y,
                            std::vector<std::string> schema, const ForestConfig& config) {
    return train_impl(x, y, Task::regression, 0, std::move(schema), config);
}

ForestModel train_classifier(const Matrix& x, const std::vector<int>& y,
                             std::vector<std::string> schema, const ForestConfig& config) {
    if (y.empty()) {
        throw ParameterDomainError("forest training set is empty");
    }
    int max_label = 0;
    for (int label : y) {
        if (label < 0) {
            throw ParameterDomainError("class labels must be >= 0");
        }
        max_label = std::max(max_label, label);
    }
    std::vector<double> targets(y.begin(), y.end());
    return train_impl(x, targets, Task::classification,
                      static_cast<std::size_t>(max_label) + 1, std::move(schema), config);
}

double predict_value(const ForestModel& model, std::span<const double> row) {
    if (model.task != Task::regression) {
        throw SchemaMismatchError("predict_value requires a regression forest");
    }
    check_row(model, row);
    double sum = 0.0;
    for (const Tree& tree : model.trees) {
        sum += traverse(tree, row);
    }
    return sum / static_cast<double>(model.trees.size());
}

int predict_class(const ForestModel& model, std::span<const double> row) {
    if (model.task != Task::classification) {
        throw SchemaMismatchError("predict_class requires a classification forest");
    }
    check_row(model, row);
    std::vector<std::size_t> votes(model.n_classes, 0);
    for (const Tree& tree : model.trees) {
        const auto label = static_cast<std::size_t>(traverse(tree, row));
        ++votes[label];
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < votes.size(); ++k) {
        if (votes[k] > votes[best]) {
            best = k;
        }
    }
    return static_cast<int>(best);
}

void save(const ForestModel& model, std::ostream& out) {
    if (model.trees.empty()) {
        throw ModelFormatError("refusing to serialize an empty forest");
    }
    write_pod(out, kMagic);
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint8_t>(model.task));
    write_pod(out, model.n_classes);
    write_pod(out, static_cast<std::uint32_t>(model.feature_schema.size()));
    for (const std::string& name : model.feature_schema) {
        write_pod(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
    write_pod(out, static_cast<std::uint32_t>(model.trees.size()));
    for (const Tree& tree : model.trees) {
        write_pod(out, static_cast<std::uint32_t>(tree.nodes.size()));
        for (const TreeNode& node : tree.nodes) {
            write_pod(out, node.feature);
            write_pod(out, node.threshold);
            write_pod(out, node.left);
            write_pod(out, node.right);
            write_pod(out, node.value);
        }
    }
    if (!out) {
        throw ModelFormatError("failed to write forest payload");
    }
}

ForestModel load(std::istream& in) {
    if (read_pod<std::uint32_t>(in) != kMagic) {
        throw ModelFormatError("not a forest payload (bad magic)");
    }
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kVersion) {
        throw ModelFormatError("unsupported forest format version " + std::to_string(version));
    }
    ForestModel model;
    const auto task = read_pod<std::uint8_t>(in);
    if (task > 1) {
        throw ModelFormatError("corrupt forest payload: unknown task");
    }
    model.task = static_cast<Task>(task);
    model.n_classes = read_pod<std::uint32_t>(in);
    const auto schema_count = read_pod<std::uint32_t>(in);
    model.feature_schema.reserve(schema_count);
    for (std::uint32_t i = 0; i < schema_count; ++i) {
        const auto len = read_pod<std::uint32_t>(in);
        std::string name(len, '\0');
        in.read(name.data(), static_cast<std::streamsize>(len));
        if (!in) {
            throw ModelFormatError("forest payload truncated");
        }
        model.feature_schema.push_back(std::move(name));
    }
    const auto n_trees = read_pod<std::uint32_t>(in);
    if (n_trees == 0) {
        throw ModelFormatError("corrupt forest payload: zero trees");
    }
    model.trees.resize(n_trees);
    for (Tree& tree : model.trees) {
        const auto n_nodes = read_pod<std::uint32_t>(in);
        if (n_nodes == 0) {
            throw ModelFormatError("corrupt forest payload: empty tree");
        }
        tree.nodes.reserve(n_nodes);
        for (std::uint32_t i = 0; i < n_nodes; ++i) {
            TreeNode node;
            node.feature = read_pod<std::int32_t>(in);
            node.threshold = read_pod<double>(in);
            node.left = read_pod<std::uint32_t>(in);
            node.right = read_pod<std::uint32_t>(in);
            node.value = read_pod<double>(in);
            if (node.feature >= static_cast<std::int32_t>(model.feature_schema.size())) {
                throw ModelFormatError("corrupt forest payload: split feature out of range");
            }
            if (node.feature >= 0 && (node.left >= n_nodes || node.right >= n_nodes)) {
                throw ModelFormatError("corrupt forest payload: child index out of range");
            }
            tree.nodes.push_back(node);
        }
    }
    return model;
}

std::vector<std::uint8_t> save_bytes(const ForestModel& model) {
    std::ostringstream out(std::ios::binary);
    save(model, out);
    const std::string str = out.str();
    return std::vector<std::uint8_t>(str.begin(), str.end());
}

ForestModel load_bytes(std::span<const std::uint8_t> bytes) {
    std::istringstream in(std::string(bytes.begin(), bytes.end()), std::ios::binary);
    return load(in);
}

} // namespace cascade::forest
