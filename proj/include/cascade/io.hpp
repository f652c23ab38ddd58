#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascade/features.hpp"
#include "cascade/simulation.hpp"
#include "cascade/types.hpp"

namespace cascade::io {

// Shortest round-trip decimal representation of a double.
std::string format_double(double value);
double parse_double(const std::string& text, std::size_t line, const std::string& field);

struct ParseStats {
    std::size_t clamped_magnitudes{0};
};

// Basic format: header "time,magnitude", rows of two finite non-negative
// numbers, first row at time 0, times non-decreasing. Magnitudes below 1 are
// clamped to 1 and counted in stats.
Cascade parse_basic_cascade(std::istream& in, std::string id, ParseStats* stats = nullptr);
Cascade parse_basic_cascade_file(const std::filesystem::path& path, ParseStats* stats = nullptr);

// Extended format: header
// "time,followers,friends,statuses,account_created,user_key"; count columns
// must be non-negative integers. The event magnitude is the follower count
// clamped to >= 1.
Cascade parse_extended_cascade(std::istream& in, std::string id, ParseStats* stats = nullptr);
Cascade parse_extended_cascade_file(const std::filesystem::path& path,
                                    ParseStats* stats = nullptr);

void write_basic_cascade(std::ostream& out, const Cascade& cascade);
void write_extended_cascade(std::ostream& out, const Cascade& cascade);

// Basic columns plus generation and parent (parent empty for immigrants).
void write_sim_cascade(std::ostream& out, const SimCascade& sim);

enum class SplitLabel { unassigned, train, test, history };

struct DatasetEntry {
    std::string file;
    double n_real{0.0};
    std::string initiator;
    SplitLabel split{SplitLabel::unassigned};
    std::optional<double> date; // seconds since epoch, for date-rule splits
};

struct DatasetIndex {
    std::filesystem::path base_dir;
    std::vector<DatasetEntry> entries;
};

// Index format: header "file,n_real,initiator,split,date"; split may be
// empty, train, test or history; date may be empty.
DatasetIndex parse_dataset_index(const std::filesystem::path& path);
void write_dataset_index(std::ostream& out, const DatasetIndex& index);

// Feature matrix: header "id,<feature names...>", one cascade per row.
void write_feature_matrix(std::ostream& out, const std::vector<std::string>& ids,
                          const std::vector<FeatureVector>& rows);

struct FeatureMatrix {
    std::vector<std::string> ids;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
};

FeatureMatrix parse_feature_matrix(std::istream& in);

// Flat key=value configuration file; '#' starts a comment line.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

} // namespace cascade::io
