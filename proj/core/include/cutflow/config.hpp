#pragma once

#include "cutflow/common.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cutflow {

/// Flat key-value configuration with [section] headers. '#' and ';' start
/// comments. Keys are addressed as "section.key"; keys before any section
/// header have no prefix. Every key must be consumed by the schema: unknown
/// keys are reported with their line number.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text,
                                 const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);

  /// Throws ConfigError listing any keys never consumed.
  void finish() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const;

  std::string origin_;
  std::map<std::string, Entry> entries_;
};

}  // namespace cutflow
