#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace popdescent {

// Flat `key = value` configuration with [section] headers and # comments.
// Keys are addressed as "section.key". Every key must be consumed by a typed
// getter; leftovers are reported as errors so stale or misspelled settings
// cannot silently change an experiment.
class ConfigMap {
public:
    static ConfigMap parse_string(const std::string& text, const std::string& origin = "<string>") {
        ConfigMap cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line, section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string trimmed = trim(strip_comment(line));
            if (trimmed.empty()) continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']')
                    throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                             ": malformed section header");
                section = trim(trimmed.substr(1, trimmed.size() - 2));
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                         ": expected 'key = value'");
            const std::string key = qualify(section, trim(trimmed.substr(0, eq)));
            if (key.empty() || key.back() == '.')
                throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty key");
            if (cfg.values_.count(key))
                throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                         ": duplicate key '" + key + "'");
            cfg.values_[key] = trim(trimmed.substr(eq + 1));
        }
        return cfg;
    }

    static ConfigMap parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    std::string require_string(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end())
            throw std::runtime_error(origin_ + ": missing required key '" + key + "'");
        consumed_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        return to_double(key, it->second);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        return to_u64(key, it->second);
    }

    bool get_bool(const std::string& key, bool fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        const std::string& v = it->second;
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        throw std::runtime_error("config key '" + key + "': expected a boolean, got '" + v + "'");
    }

    std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        std::vector<double> out;
        for (const auto& item : split_list(it->second)) out.push_back(to_double(key, item));
        return out;
    }

    std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                            std::vector<std::uint64_t> fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        std::vector<std::uint64_t> out;
        for (const auto& item : split_list(it->second)) out.push_back(to_u64(key, item));
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key,
                                             std::vector<std::string> fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        return split_list(it->second);
    }

    // Fail-fast on anything no getter asked for.
    void require_all_consumed() const {
        std::string unknown;
        for (const auto& [key, value] : values_) {
            if (!consumed_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
        }
        if (!unknown.empty())
            throw std::runtime_error(origin_ + ": unknown config keys: " + unknown);
    }

private:
    static std::string strip_comment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }

    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) return "";
        const auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }

    static std::string qualify(const std::string& section, const std::string& key) {
        return section.empty() ? key : section + "." + key;
    }

    static std::vector<std::string> split_list(const std::string& s) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(s);
        while (std::getline(in, item, ',')) {
            const std::string t = trim(item);
            if (!t.empty()) out.push_back(t);
        }
        return out;
    }

    static double to_double(const std::string& key, const std::string& value) {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::runtime_error("config key '" + key + "': expected a number, got '" + value +
                                     "'");
        }
    }

    static std::uint64_t to_u64(const std::string& key, const std::string& value) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(value, &used);
            if (used != value.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::runtime_error("config key '" + key + "': expected a nonnegative integer, got '" +
                                     value + "'");
        }
    }

    std::string origin_;
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

}  // namespace popdescent
