#include "qdsim/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qdsim/errors.hpp"

namespace qd {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ConfigDoc ConfigDoc::parse(const std::string& text) {
    ConfigDoc doc;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    Section* cur = nullptr;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw SchemaError("line " + std::to_string(lineno) + ": malformed section header");
            doc.sections.push_back(Section{trim(line.substr(1, line.size() - 2)), {}});
            cur = &doc.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SchemaError("line " + std::to_string(lineno) + ": expected key = value");
        if (!cur)
            throw SchemaError("line " + std::to_string(lineno) + ": key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw SchemaError("line " + std::to_string(lineno) + ": empty key");
        cur->entries.push_back(Entry{key, trim(line.substr(eq + 1))});
    }
    return doc;
}

ConfigDoc ConfigDoc::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string ConfigDoc::serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& sec : sections) {
        if (!first) out << "\n";
        first = false;
        out << "[" << sec.name << "]\n";
        for (const auto& e : sec.entries) out << e.key << " = " << e.value << "\n";
    }
    return out.str();
}

void ConfigDoc::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write config file '" + path + "'");
    out << serialize();
}

const ConfigDoc::Section* ConfigDoc::find(const std::string& name) const {
    for (const auto& sec : sections)
        if (sec.name == name) return &sec;
    return nullptr;
}

const std::string* ConfigDoc::get(const std::string& section, const std::string& key) const {
    const Section* sec = find(section);
    if (!sec) return nullptr;
    for (const auto& e : sec->entries)
        if (e.key == key) return &e.value;
    return nullptr;
}

void ConfigDoc::set(const std::string& section, const std::string& key, const std::string& value) {
    for (auto& sec : sections) {
        if (sec.name != section) continue;
        for (auto& e : sec.entries) {
            if (e.key == key) {
                e.value = value;
                return;
            }
        }
        sec.entries.push_back(Entry{key, value});
        return;
    }
    sections.push_back(Section{section, {Entry{key, value}}});
}

double to_double(const std::string& s, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw SchemaError(context + ": '" + s + "' is not a number");
    return v;
}

long long to_int(const std::string& s, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw SchemaError(context + ": '" + s + "' is not an integer");
    return v;
}

bool to_bool(const std::string& s, const std::string& context) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw SchemaError(context + ": '" + s + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::string format_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace qd
