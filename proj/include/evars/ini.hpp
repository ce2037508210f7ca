#pragma once

// Flat key-value configuration documents:
//
//   # comment
//   [section]
//   key = value
//
// Sections may repeat (a scenario grid is a list of [scenario] sections).
// Keys that appear before any section header belong to the unnamed section "".

#include <charconv>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evars/error.hpp"

namespace evars::ini {

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

struct Section {
    std::string name;
    int line = 0;
    std::vector<Entry> entries;

    [[nodiscard]] const Entry* find(std::string_view key) const {
        for (const auto& e : entries) {
            if (e.key == key) return &e;
        }
        return nullptr;
    }
};

struct Document {
    std::vector<Section> sections;

    [[nodiscard]] std::vector<const Section*> all(std::string_view name) const {
        std::vector<const Section*> out;
        for (const auto& s : sections) {
            if (s.name == name) out.push_back(&s);
        }
        return out;
    }

    [[nodiscard]] const Section* first(std::string_view name) const {
        for (const auto& s : sections) {
            if (s.name == name) return &s;
        }
        return nullptr;
    }
};

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline Document parse(std::istream& in, const std::string& origin = "<input>") {
    Document doc;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                fail(ErrorKind::Parse, origin + ":" + std::to_string(line_no) + ": unterminated section header");
            }
            doc.sections.push_back(Section{trim(std::string_view(line).substr(1, line.size() - 2)), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::Parse, origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) {
            fail(ErrorKind::Parse, origin + ":" + std::to_string(line_no) + ": empty key");
        }
        if (doc.sections.empty()) doc.sections.push_back(Section{"", 0, {}});
        auto& sec = doc.sections.back();
        if (sec.find(key) != nullptr) {
            fail(ErrorKind::Parse, origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        sec.entries.push_back(Entry{std::move(key), std::move(value), line_no});
    }
    return doc;
}

inline Document parse_string(const std::string& text, const std::string& origin = "<string>") {
    std::istringstream in(text);
    return parse(in, origin);
}

inline Document parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
    return parse(in, path);
}

/// Typed, consumption-tracking view over one section. finish() rejects any key
/// that was never read, so a misspelled parameter name is an error rather than
/// a silently ignored default.
class Reader {
public:
    Reader(const Section& section, std::string origin) : section_(&section), origin_(std::move(origin)) {}

    [[nodiscard]] bool has(std::string_view key) const { return section_->find(key) != nullptr; }

    std::optional<std::string> string(std::string_view key) {
        const Entry* e = lookup(key);
        if (e == nullptr) return std::nullopt;
        return e->value;
    }

    std::optional<double> real(std::string_view key) {
        const Entry* e = lookup(key);
        if (e == nullptr) return std::nullopt;
        return to_real(*e);
    }

    std::optional<std::int64_t> integer(std::string_view key) {
        const Entry* e = lookup(key);
        if (e == nullptr) return std::nullopt;
        return to_integer(*e);
    }

    std::optional<bool> boolean(std::string_view key) {
        const Entry* e = lookup(key);
        if (e == nullptr) return std::nullopt;
        if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
        if (e->value == "false" || e->value == "0" || e->value == "no") return false;
        error(*e, "expected boolean");
    }

    std::optional<std::vector<std::int64_t>> integer_list(std::string_view key) {
        const Entry* e = lookup(key);
        if (e == nullptr) return std::nullopt;
        std::vector<std::int64_t> out;
        for (const auto& item : split_list(e->value)) {
            out.push_back(to_integer(Entry{e->key, item, e->line}));
        }
        return out;
    }

    std::optional<std::vector<std::string>> string_list(std::string_view key) {
        const Entry* e = lookup(key);
        if (e == nullptr) return std::nullopt;
        return split_list(e->value);
    }

    void set_if(std::string_view key, double& target) {
        if (auto v = real(key)) target = *v;
    }
    void set_if(std::string_view key, int& target) {
        if (auto v = integer(key)) target = static_cast<int>(*v);
    }
    void set_if(std::string_view key, bool& target) {
        if (auto v = boolean(key)) target = *v;
    }
    void set_if(std::string_view key, std::string& target) {
        if (auto v = string(key)) target = *v;
    }

    void finish() const {
        for (const auto& e : section_->entries) {
            if (!used_.contains(e.key)) {
                error(e, "unknown key '" + e.key + "' in section [" + section_->name + "]");
            }
        }
    }

    [[noreturn]] void error(const Entry& e, const std::string& what) const {
        fail(ErrorKind::Parse, origin_ + ":" + std::to_string(e.line) + ": " + what);
    }

private:
    const Entry* lookup(std::string_view key) {
        const Entry* e = section_->find(key);
        if (e != nullptr) used_.insert(e->key);
        return e;
    }

    double to_real(const Entry& e) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(e.value, &pos);
            if (pos == e.value.size()) return v;
        } catch (const std::exception&) {
        }
        if (e.value == "inf") return std::numeric_limits<double>::infinity();
        error(e, "expected a number for '" + e.key + "', got '" + e.value + "'");
    }

    std::int64_t to_integer(const Entry& e) const {
        std::int64_t v = 0;
        const char* first = e.value.data();
        const char* last = first + e.value.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) {
            error(e, "expected an integer for '" + e.key + "', got '" + e.value + "'");
        }
        return v;
    }

    static std::vector<std::string> split_list(const std::string& value) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(value);
        while (std::getline(in, item, ',')) {
            auto t = trim(item);
            if (!t.empty()) out.push_back(std::move(t));
        }
        return out;
    }

    const Section* section_;
    std::string origin_;
    std::set<std::string> used_;
};

/// Rejects sections whose names are not in `allowed`.
inline void require_sections(const Document& doc, const std::set<std::string>& allowed, const std::string& origin) {
    for (const auto& s : doc.sections) {
        if (!allowed.contains(s.name)) {
            fail(ErrorKind::Parse, origin + ":" + std::to_string(s.line) + ": unknown section [" + s.name + "]");
        }
    }
}

/// Shortest text that parse() reads back as the identical double.
inline std::string format_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace evars::ini
