#include "cascade/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cascade::io {

namespace {

constexpr const char* kBasicHeader = "time,magnitude";
constexpr const char* kExtendedHeader = "time,followers,friends,statuses,account_created,user_key";
constexpr const char* kIndexHeader = "file,n_real,initiator,split,date";

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

void expect_header(std::istream& in, const char* expected) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("missing header row", 1);
    }
    line = strip_cr(line);
    if (line != expected) {
        throw ParseError("expected header '" + std::string(expected) + "', got '" + line + "'", 1);
    }
}

double require_count(const std::string& text, std::size_t line, const std::string& field) {
    const double value = parse_double(text, line, field);
    if (value < 0.0) {
        throw ParseError(field + " must be >= 0", line);
    }
    if (value != std::floor(value)) {
        throw ParseError(field + " must be an integer count", line);
    }
    return value;
}

void check_event_row(double time, double prev_time, bool first, std::size_t line) {
    if (time < 0.0) {
        throw ParseError("event time must be >= 0", line);
    }
    if (first && time != 0.0) {
        throw ParseError("first event must be at time 0", line);
    }
    if (!first && time < prev_time) {
        throw ParseError("event times must be non-decreasing", line);
    }
}

double clamp_magnitude(double magnitude, ParseStats* stats) {
    if (magnitude < 1.0) {
        if (stats != nullptr) {
            ++stats->clamped_magnitudes;
        }
        return 1.0;
    }
    return magnitude;
}

Cascade finish_parsed(std::string id, std::vector<Event> events, std::size_t line) {
    if (events.empty()) {
        throw ParseError("cascade file has no event rows", line);
    }
    Cascade cascade;
    cascade.id = std::move(id);
    cascade.events = std::move(events);
    cascade.observed_until = cascade.events.back().time;
    return cascade;
}

template <class ParseFn>
Cascade parse_file(const std::filesystem::path& path, ParseStats* stats, ParseFn&& parse) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path.string() + "'", 0);
    }
    return parse(in, path.stem().string(), stats);
}

std::string split_to_string(SplitLabel split) {
    switch (split) {
        case SplitLabel::train: return "train";
        case SplitLabel::test: return "test";
        case SplitLabel::history: return "history";
        case SplitLabel::unassigned: return "";
    }
    return "";
}

SplitLabel split_from_string(const std::string& text, std::size_t line) {
    if (text.empty()) {
        return SplitLabel::unassigned;
    }
    if (text == "train") {
        return SplitLabel::train;
    }
    if (text == "test") {
        return SplitLabel::test;
    }
    if (text == "history") {
        return SplitLabel::history;
    }
    throw ParseError("unknown split label '" + text + "'", line);
}

} // namespace

std::string format_double(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

double parse_double(const std::string& text, std::size_t line, const std::string& field) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end || text.empty()) {
        throw ParseError("cannot parse " + field + " from '" + text + "'", line);
    }
    if (!std::isfinite(value)) {
        throw ParseError(field + " must be finite", line);
    }
    return value;
}

Cascade parse_basic_cascade(std::istream& in, std::string id, ParseStats* stats) {
    expect_header(in, kBasicHeader);
    std::vector<Event> events;
    std::string raw;
    std::size_t line = 1;
    while (std::getline(in, raw)) {
        ++line;
        const std::string row = strip_cr(raw);
        if (row.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_fields(row);
        if (fields.size() != 2) {
            throw ParseError("expected 2 columns, got " + std::to_string(fields.size()), line);
        }
        const double time = parse_double(fields[0], line, "time");
        double magnitude = parse_double(fields[1], line, "magnitude");
        if (magnitude < 0.0) {
            throw ParseError("magnitude must be >= 0", line);
        }
        check_event_row(time, events.empty() ? 0.0 : events.back().time, events.empty(), line);
        magnitude = clamp_magnitude(magnitude, stats);
        events.push_back(Event{time, magnitude, std::nullopt});
    }
    return finish_parsed(std::move(id), std::move(events), line);
}

Cascade parse_basic_cascade_file(const std::filesystem::path& path, ParseStats* stats) {
    return parse_file(path, stats, [](std::istream& in, std::string id, ParseStats* s) {
        return parse_basic_cascade(in, std::move(id), s);
    });
}

Cascade parse_extended_cascade(std::istream& in, std::string id, ParseStats* stats) {
    expect_header(in, kExtendedHeader);
    std::vector<Event> events;
    std::string raw;
    std::size_t line = 1;
    while (std::getline(in, raw)) {
        ++line;
        const std::string row = strip_cr(raw);
        if (row.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_fields(row);
        if (fields.size() != 6) {
            throw ParseError("expected 6 columns, got " + std::to_string(fields.size()), line);
        }
        const double time = parse_double(fields[0], line, "time");
        const double followers = require_count(fields[1], line, "followers");
        const double friends = require_count(fields[2], line, "friends");
        const double statuses = require_count(fields[3], line, "statuses");
        const double created = parse_double(fields[4], line, "account_created");
        check_event_row(time, events.empty() ? 0.0 : events.back().time, events.empty(), line);
        Event event;
        event.time = time;
        event.magnitude = clamp_magnitude(followers, stats);
        event.user = UserMeta{followers, friends, statuses, created, fields[5]};
        events.push_back(std::move(event));
    }
    return finish_parsed(std::move(id), std::move(events), line);
}

Cascade parse_extended_cascade_file(const std::filesystem::path& path, ParseStats* stats) {
    return parse_file(path, stats, [](std::istream& in, std::string id, ParseStats* s) {
        return parse_extended_cascade(in, std::move(id), s);
    });
}

void write_basic_cascade(std::ostream& out, const Cascade& cascade) {
    out << kBasicHeader << '\n';
    for (const Event& e : cascade.events) {
        out << format_double(e.time) << ',' << format_double(e.magnitude) << '\n';
    }
}

void write_extended_cascade(std::ostream& out, const Cascade& cascade) {
    out << kExtendedHeader << '\n';
    for (std::size_t i = 0; i < cascade.events.size(); ++i) {
        const Event& e = cascade.events[i];
        if (!e.user) {
            throw MissingMetadataError("event " + std::to_string(i) + " of cascade '" +
                                           cascade.id + "' lacks user metadata",
                                       i);
        }
        out << format_double(e.time) << ',' << format_double(e.user->followers) << ','
            << format_double(e.user->friends) << ',' << format_double(e.user->statuses) << ','
            << format_double(e.user->account_created) << ',' << e.user->user_key << '\n';
    }
}

void write_sim_cascade(std::ostream& out, const SimCascade& sim) {
    out << kBasicHeader << ",generation,parent\n";
    for (std::size_t i = 0; i < sim.cascade.events.size(); ++i) {
        const Event& e = sim.cascade.events[i];
        out << format_double(e.time) << ',' << format_double(e.magnitude) << ','
            << sim.generation[i] << ',';
        if (sim.parent[i]) {
            out << *sim.parent[i];
        }
        out << '\n';
    }
}

DatasetIndex parse_dataset_index(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open index '" + path.string() + "'", 0);
    }
    expect_header(in, kIndexHeader);
    DatasetIndex index;
    index.base_dir = path.parent_path();
    std::string raw;
    std::size_t line = 1;
    while (std::getline(in, raw)) {
        ++line;
        const std::string row = strip_cr(raw);
        if (row.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_fields(row);
        if (fields.size() != 5) {
            throw ParseError("expected 5 columns, got " + std::to_string(fields.size()), line);
        }
        DatasetEntry entry;
        entry.file = fields[0];
        if (entry.file.empty()) {
            throw ParseError("cascade file reference is empty", line);
        }
        entry.n_real = parse_double(fields[1], line, "n_real");
        if (entry.n_real < 1.0) {
            throw ParseError("n_real must be >= 1", line);
        }
        entry.initiator = fields[2];
        entry.split = split_from_string(fields[3], line);
        if (!fields[4].empty()) {
            entry.date = parse_double(fields[4], line, "date");
        }
        index.entries.push_back(std::move(entry));
    }
    return index;
}

void write_dataset_index(std::ostream& out, const DatasetIndex& index) {
    out << kIndexHeader << '\n';
    for (const DatasetEntry& entry : index.entries) {
        out << entry.file << ',' << format_double(entry.n_real) << ',' << entry.initiator << ','
            << split_to_string(entry.split) << ',';
        if (entry.date) {
            out << format_double(*entry.date);
        }
        out << '\n';
    }
}

void write_feature_matrix(std::ostream& out, const std::vector<std::string>& ids,
                          const std::vector<FeatureVector>& rows) {
    if (ids.size() != rows.size()) {
        throw ParameterDomainError("feature matrix id and row counts differ");
    }
    out << "id";
    if (!rows.empty()) {
        for (const std::string& name : rows.front().names) {
            out << ',' << name;
        }
    }
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows.empty() && rows[r].names != rows.front().names) {
            throw SchemaMismatchError("feature matrix rows have differing schemas");
        }
        out << ids[r];
        for (double v : rows[r].values) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

FeatureMatrix parse_feature_matrix(std::istream& in) {
    std::string raw;
    if (!std::getline(in, raw)) {
        throw ParseError("missing feature matrix header", 1);
    }
    const std::vector<std::string> header = split_fields(strip_cr(raw));
    if (header.empty() || header.front() != "id") {
        throw ParseError("feature matrix header must start with 'id'", 1);
    }
    FeatureMatrix matrix;
    matrix.names.assign(header.begin() + 1, header.end());
    std::size_t line = 1;
    while (std::getline(in, raw)) {
        ++line;
        const std::string row = strip_cr(raw);
        if (row.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_fields(row);
        if (fields.size() != header.size()) {
            throw ParseError("feature row width does not match the header", line);
        }
        matrix.ids.push_back(fields.front());
        std::vector<double> values;
        values.reserve(matrix.names.size());
        for (std::size_t i = 1; i < fields.size(); ++i) {
            values.push_back(parse_double(fields[i], line, matrix.names[i - 1]));
        }
        matrix.values.push_back(std::move(values));
    }
    return matrix;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    std::map<std::string, std::string> config;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string row = strip_cr(raw);
        const std::size_t hash = row.find('#');
        if (hash != std::string::npos) {
            row = row.substr(0, hash);
        }
        // trim
        const auto is_space = [](char ch) { return ch == ' ' || ch == '\t'; };
        while (!row.empty() && is_space(row.front())) {
            row.erase(row.begin());
        }
        while (!row.empty() && is_space(row.back())) {
            row.pop_back();
        }
        if (row.empty()) {
            continue;
        }
        const std::size_t eq = row.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line) + " is not key=value: '" +
                              row + "'");
        }
        std::string key = row.substr(0, eq);
        std::string value = row.substr(eq + 1);
        while (!key.empty() && is_space(key.back())) {
            key.pop_back();
        }
        while (!value.empty() && is_space(value.front())) {
            value.erase(value.begin());
        }
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line) + " has an empty key");
        }
        config[key] = value;
    }
    return config;
}

} // namespace cascade::io
