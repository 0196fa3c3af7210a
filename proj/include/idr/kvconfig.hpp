#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace idr {

// Flat key = value config file. One assignment per line, '#' starts a
// comment, values are scalars or comma-separated lists. Keys are
// case-sensitive. Unknown keys are rejected by the consumer, not here.
class KvConfig {
 public:
  static KvConfig parse_file(const std::filesystem::path& path);
  static KvConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  // Canonical "k=v\n" dump in key order; used for config hashing.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace idr
