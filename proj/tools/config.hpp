#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ymcli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// key = value text with '#' comments. Every key a run does not consume is an
/// error (silent misconfiguration would corrupt measured constants).
class Config {
 public:
  static Config from_string(const std::string& text, const std::string& name) {
    Config cfg;
    cfg.raw_ = text;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
      if (cfg.entries_.count(key))
        throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      cfg.entries_[key] = Entry{value, lineno, false};
    }
    cfg.name_ = name;
    return cfg;
  }

  static Config from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_string(ss.str(), path);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string str(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(name_ + ": missing required key '" + key + "'");
    it->second.used = true;
    return it->second.value;
  }
  std::string str_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  double num(const std::string& key) const {
    const std::string v = str(key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') throw bad_value(key, v, "a number");
    return x;
  }
  double num_or(const std::string& key, double fallback) const {
    return has(key) ? num(key) : fallback;
  }

  long long integer(const std::string& key) const {
    const std::string v = str(key);
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') throw bad_value(key, v, "an integer");
    return x;
  }
  long long integer_or(const std::string& key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  bool flag_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw bad_value(key, v, "a boolean");
  }

  std::array<int, 4> ints4(const std::string& key) const {
    const std::string v = str(key);
    std::istringstream is(v);
    std::array<int, 4> out{};
    for (int i = 0; i < 4; ++i)
      if (!(is >> out[i])) throw bad_value(key, v, "four integers");
    std::string tail;
    if (is >> tail) throw bad_value(key, v, "four integers");
    return out;
  }

  /// Strict schema check: any key outside the documented set is an error.
  void require_known(const std::vector<std::string>& schema) const {
    std::string bad;
    for (const auto& [key, entry] : entries_) {
      if (std::find(schema.begin(), schema.end(), key) != schema.end()) continue;
      if (!bad.empty()) bad += ", ";
      bad += "'" + key + "' (line " + std::to_string(entry.line) + ")";
    }
    if (!bad.empty()) throw ConfigError(name_ + ": unknown keys: " + bad);
  }

  const std::string& raw() const { return raw_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  ConfigError bad_value(const std::string& key, const std::string& v, const char* want) const {
    auto it = entries_.find(key);
    return ConfigError(name_ + ":" + std::to_string(it->second.line) + ": key '" + key + "' = '" +
                       v + "' is not " + want);
  }

  std::map<std::string, Entry> entries_;
  std::string raw_;
  std::string name_;
};

}  // namespace ymcli
