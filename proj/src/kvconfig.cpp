#include "idr/kvconfig.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "idr/errors.hpp"
#include "idr/strutil.hpp"

namespace idr {

KvConfig KvConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

KvConfig KvConfig::parse_string(const std::string& text) {
  KvConfig cfg;
  int lineno = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw DataError("config line " + std::to_string(lineno) +
                      ": expected key = value");
    std::string key(trim(body.substr(0, eq)));
    std::string value(trim(body.substr(eq + 1)));
    if (key.empty())
      throw DataError("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.entries_.count(key))
      throw DataError("config line " + std::to_string(lineno) +
                      ": duplicate key '" + key + "'");
    cfg.entries_[key] = value;
  }
  return cfg;
}

bool KvConfig::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string KvConfig::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw DataError("config: missing key '" + key + "'");
  return it->second;
}

std::string KvConfig::get_string(const std::string& key,
                                 const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::int64_t KvConfig::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    std::int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw DataError("config: key '" + key + "' is not an integer: " + v);
  }
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double KvConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(out)) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw DataError("config: key '" + key + "' is not a finite number: " + v);
  }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError("config: key '" + key + "' is not a boolean: " + v);
}

std::vector<std::string> KvConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& part : split(get_string(key), ',')) {
    auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::string KvConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace idr
