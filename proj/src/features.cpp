#include "cascade/features.hpp"

#include <algorithm>
#include <cmath>

namespace cascade {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) {
        return sorted.front();
    }
    const double h = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

const UserMeta& meta_at(const Cascade& cascade, std::size_t index) {
    if (!cascade.events[index].user) {
        throw MissingMetadataError("event " + std::to_string(index) + " of cascade '" +
                                       cascade.id + "' lacks user metadata",
                                   index);
    }
    return *cascade.events[index].user;
}

} // namespace

FivePoint five_point(std::span<const double> values) {
    if (values.empty()) {
        throw ParameterDomainError("five-point summary of an empty sample");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return FivePoint{sorted.front(), quantile(sorted, 0.25), quantile(sorted, 0.5),
                     quantile(sorted, 0.75), sorted.back()};
}

void FeatureVector::push(std::string name, double value) {
    names.push_back(std::move(name));
    values.push_back(value);
}

void FeatureVector::push(const std::string& prefix, const FivePoint& fp) {
    push(prefix + "_min", fp.min);
    push(prefix + "_p25", fp.p25);
    push(prefix + "_median", fp.median);
    push(prefix + "_p75", fp.p75);
    push(prefix + "_max", fp.max);
}

void FeatureVector::append(const FeatureVector& other) {
    names.insert(names.end(), other.names.begin(), other.names.end());
    values.insert(values.end(), other.values.begin(), other.values.end());
}

void UserHistory::add(const std::string& user_key, double final_size) {
    sizes_[user_key].push_back(final_size);
}

double UserHistory::success(const std::string& user_key) const {
    const auto it = sizes_.find(user_key);
    if (it == sizes_.end() || it->second.size() < 2) {
        return 0.0;
    }
    double sum = 0.0;
    for (double s : it->second) {
        sum += s;
    }
    return sum / static_cast<double>(it->second.size());
}

bool UserHistory::is_active(const std::string& user_key) const {
    const auto it = sizes_.find(user_key);
    return it != sizes_.end() && it->second.size() >= 2;
}

UserHistory build_user_history(std::span<const std::pair<std::string, double>> initiated) {
    UserHistory history;
    for (const auto& [user_key, final_size] : initiated) {
        history.add(user_key, final_size);
    }
    return history;
}

UserHistory build_user_history(std::span<const Cascade> past_cascades,
                               std::span<const double> final_sizes) {
    if (past_cascades.size() != final_sizes.size()) {
        throw ParameterDomainError("past cascade and final size counts differ");
    }
    UserHistory history;
    for (std::size_t i = 0; i < past_cascades.size(); ++i) {
        const Cascade& cascade = past_cascades[i];
        if (cascade.events.empty() || !cascade.events.front().user) {
            throw MissingMetadataError(
                "past cascade '" + cascade.id + "' does not name its initiating user", 0);
        }
        history.add(cascade.events.front().user->user_key, final_sizes[i]);
    }
    return history;
}

FeatureVector basic_user_features(const Cascade& cascade) {
    cascade.validate();
    const std::size_t n = cascade.events.size();
    std::vector<double> followers(n);
    std::vector<double> friends(n);
    std::vector<double> statuses(n);
    std::vector<double> ages(n);
    for (std::size_t i = 0; i < n; ++i) {
        const UserMeta& meta = meta_at(cascade, i);
        followers[i] = meta.followers;
        friends[i] = meta.friends;
        statuses[i] = meta.statuses;
        ages[i] = cascade.start_epoch - meta.account_created;
    }
    FeatureVector out;
    out.push("followers", five_point(followers));
    out.push("friends", five_point(friends));
    out.push("statuses", five_point(statuses));
    out.push("account_age", five_point(ages));
    return out;
}

FeatureVector temporal_features(const Cascade& cascade, bool for_classification) {
    cascade.validate();
    const std::size_t n = cascade.events.size();
    if (n < 2) {
        throw InsufficientEventsError("temporal features need at least 2 events, got " +
                                      std::to_string(n));
    }
    std::vector<double> waits(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        waits[i] = cascade.events[i + 1].time - cascade.events[i].time;
    }

    const std::size_t first_half = waits.size() / 2;
    auto mean_of = [](std::span<const double> slice) {
        if (slice.empty()) {
            return 0.0;
        }
        double sum = 0.0;
        for (double w : slice) {
            sum += w;
        }
        return sum / static_cast<double>(slice.size());
    };

    FeatureVector out;
    out.push("first_half_rate", mean_of(std::span(waits).first(first_half)));
    out.push("second_half_rate", mean_of(std::span(waits).subspan(first_half)));
    out.push("wait", five_point(waits));

    if (for_classification) {
        // Follower counts of every user before the last retweet, seed included.
        std::vector<double> exposure(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            exposure[i] = meta_at(cascade, i).followers;
        }
        out.push("exposure", five_point(exposure));
    }
    return out;
}

double volume(const Cascade& cascade) { return static_cast<double>(cascade.events.size()); }

FeatureVector past_user_success(const Cascade& cascade, const UserHistory& history) {
    cascade.validate();
    std::vector<double> successes(cascade.events.size());
    for (std::size_t i = 0; i < cascade.events.size(); ++i) {
        successes[i] = history.success(meta_at(cascade, i).user_key);
    }
    FeatureVector out;
    out.push("past_success", five_point(successes));
    return out;
}

FeatureVector regression_features(const Cascade& cascade, const UserHistory& history) {
    FeatureVector out = basic_user_features(cascade);
    out.append(temporal_features(cascade, false));
    out.push("volume", volume(cascade));
    out.append(past_user_success(cascade, history));
    return out;
}

FeatureVector classification_features(const Cascade& cascade, const UserHistory& history) {
    FeatureVector out = basic_user_features(cascade);
    out.append(temporal_features(cascade, true));
    out.append(past_user_success(cascade, history));
    return out;
}

} // namespace cascade
