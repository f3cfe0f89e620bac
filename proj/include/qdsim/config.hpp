#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qd {

inline constexpr const char* kToolName = "qdsim";
inline constexpr const char* kToolVersion = "1.0.0";

// Flat-section key = value dialect with full-line # comments. Parsing and
// serialization round-trip: parse(serialize(doc)) reproduces the doc.
struct ConfigDoc {
    struct Entry {
        std::string key;
        std::string value;
        bool operator==(const Entry&) const = default;
    };
    struct Section {
        std::string name;
        std::vector<Entry> entries;
        bool operator==(const Section&) const = default;
    };
    std::vector<Section> sections;

    static ConfigDoc parse(const std::string& text);  // SchemaError on malformed lines
    static ConfigDoc load(const std::string& path);   // SchemaError on unreadable file
    std::string serialize() const;
    void save(const std::string& path) const;

    const Section* find(const std::string& name) const;
    const std::string* get(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

    bool operator==(const ConfigDoc&) const = default;
};

double to_double(const std::string& s, const std::string& context);   // SchemaError
long long to_int(const std::string& s, const std::string& context);   // SchemaError
bool to_bool(const std::string& s, const std::string& context);       // SchemaError
std::vector<std::string> split_list(const std::string& s);            // comma separated, trimmed

std::string format_double(double v, int precision);  // shortest %.Ng form, deterministic

// FNV-1a 64-bit, used to stamp outputs with the configuration they came from.
std::uint64_t fnv1a64(const std::string& data);

}  // namespace qd
