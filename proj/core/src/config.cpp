#include "cutflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace cutflow {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text,
                                    const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": empty key or value");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.entries_.count(full))
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": duplicate key '" + full + "'");
    cfg.entries_[full] = {value, line_no, false};
  }
  return cfg;
}

bool ConfigFile::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

void ConfigFile::fail(const std::string& key, const std::string& msg) const {
  const auto it = entries_.find(key);
  const std::string at =
      it == entries_.end() ? origin_
                           : origin_ + ":" + std::to_string(it->second.line);
  throw ConfigError(at + ": " + msg);
}

std::string ConfigFile::get_string(const std::string& key,
                                   const std::string& fallback) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  it->second.used = true;
  return it->second.value;
}

std::string ConfigFile::require_string(const std::string& key) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) fail(key, "missing required key '" + key + "'");
  it->second.used = true;
  return it->second.value;
}

double ConfigFile::get_double(const std::string& key, double fallback) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  it->second.used = true;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second.value, &pos);
    if (pos != it->second.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(key, "key '" + key + "' is not a number: '" + it->second.value + "'");
  }
}

int ConfigFile::get_int(const std::string& key, int fallback) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  it->second.used = true;
  try {
    size_t pos = 0;
    const int v = std::stoi(it->second.value, &pos);
    if (pos != it->second.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(key, "key '" + key + "' is not an integer: '" + it->second.value + "'");
  }
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  it->second.used = true;
  std::string v = it->second.value;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(key, "key '" + key + "' is not a boolean: '" + it->second.value + "'");
}

void ConfigFile::finish() const {
  std::string unknown;
  for (const auto& [key, entry] : entries_) {
    if (!entry.used) {
      if (!unknown.empty()) unknown += "; ";
      unknown += "'" + key + "' (line " + std::to_string(entry.line) + ")";
    }
  }
  if (!unknown.empty())
    throw ConfigError(origin_ + ": unknown keys: " + unknown);
}

}  // namespace cutflow
