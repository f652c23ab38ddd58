#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cascade/types.hpp"

namespace cascade {

struct FivePoint {
    double min{0.0};
    double p25{0.0};
    double median{0.0};
    double p75{0.0};
    double max{0.0};
};

// Order statistics with linear interpolation between closest ranks.
FivePoint five_point(std::span<const double> values);

// Ordered (name, value) pairs; the schema is fixed per task and partial
// vectors concatenate into the full one.
struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;

    void push(std::string name, double value);
    void push(const std::string& prefix, const FivePoint& fp);
    void append(const FeatureVector& other);
    std::size_t size() const noexcept { return values.size(); }
};

// Mean final size of past cascades per initiating user. A user is active
// once they initiated at least two; non-active users score 0.
class UserHistory {
  public:
    void add(const std::string& user_key, double final_size);
    double success(const std::string& user_key) const;
    bool is_active(const std::string& user_key) const;
    std::size_t user_count() const noexcept { return sizes_.size(); }

  private:
    std::unordered_map<std::string, std::vector<double>> sizes_;
};

UserHistory build_user_history(std::span<const std::pair<std::string, double>> initiated);
UserHistory build_user_history(std::span<const Cascade> past_cascades,
                               std::span<const double> final_sizes);

// Five-point summaries of followers, friends, statuses and account age
// (seconds between account creation and the cascade start) over the
// observed prefix: 20 named values. Every event must carry user metadata.
FeatureVector basic_user_features(const Cascade& cascade);

// First/second-half mean waiting times (halves split by count), the waiting
// time five-point summary, and, for classification, the exposure summary
// (follower counts of all users before the last retweet, seed included).
FeatureVector temporal_features(const Cascade& cascade, bool for_classification);

// Number of events in the observed prefix.
double volume(const Cascade& cascade);

// Five-point summary of per-event past user success over the observed prefix.
FeatureVector past_user_success(const Cascade& cascade, const UserHistory& history);

// Full per-task schemas: regression includes volume; classification swaps it
// for the exposure distribution.
FeatureVector regression_features(const Cascade& cascade, const UserHistory& history);
FeatureVector classification_features(const Cascade& cascade, const UserHistory& history);

} // namespace cascade
