#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "lpnet/core.hpp"

namespace lpnet {

/// Flat key=value configuration with [section] grouping. Keys are stored
/// fully qualified ("train.epochs"); values are raw strings until read.
class Config {
public:
    Config() = default;

    static Config from_string(const std::string& text, const std::string& origin = "<config>") {
        Config c;
        std::istringstream in(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                check(line.back() == ']', ErrorKind::data,
                      origin + ":" + std::to_string(lineno) + ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            check(eq != std::string::npos, ErrorKind::data,
                  origin + ":" + std::to_string(lineno) + ": expected key=value");
            const std::string key = trim(line.substr(0, eq));
            check(!key.empty(), ErrorKind::data,
                  origin + ":" + std::to_string(lineno) + ": empty key");
            c.set(section.empty() ? key : section + "." + key, trim(line.substr(eq + 1)));
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        check(in.good(), ErrorKind::data, "cannot open config " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_string(ss.str(), path);
    }

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::optional<std::string> get(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double number_or(const std::string& key, double fallback) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw Error(ErrorKind::data, "config key '" + key + "' is not a number: '" +
                                             it->second + "'");
        }
    }

    long long integer_or(const std::string& key, long long fallback) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            return std::stoll(it->second);
        } catch (const std::exception&) {
            throw Error(ErrorKind::data, "config key '" + key + "' is not an integer: '" +
                                             it->second + "'");
        }
    }

    bool flag_or(const std::string& key, bool fallback) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
        if (v == "0" || v == "false" || v == "off" || v == "no") return false;
        throw Error(ErrorKind::data, "config key '" + key + "' is not a boolean: '" + v + "'");
    }

    /// Deterministic serialization: sections in lexical order, keys within.
    std::string serialize() const {
        std::map<std::string, std::map<std::string, std::string>> grouped;
        for (const auto& [key, value] : kv_) {
            const auto dot = key.find('.');
            if (dot == std::string::npos)
                grouped[""][key] = value;
            else
                grouped[key.substr(0, dot)][key.substr(dot + 1)] = value;
        }
        std::ostringstream out;
        for (const auto& [section, entries] : grouped) {
            if (!section.empty()) out << '[' << section << "]\n";
            for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
        }
        return out.str();
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        check(out.good(), ErrorKind::data, "cannot write config " + path);
        out << serialize();
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    std::map<std::string, std::string> kv_;
};

} // namespace lpnet
