#include "idr/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "idr/errors.hpp"
#include "idr/strutil.hpp"
#include "nlohmann/json.hpp"

namespace idr {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw DataError("sha256 digest failed");
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fstr("%02x", digest[i]);
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for hashing: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

void write_manifest(const std::filesystem::path& out_dir,
                    const std::string& command,
                    const std::string& config_string,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::pair<std::string, std::int64_t>>& stats) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = sha256_hex(config_string);
  nlohmann::json digests;
  for (const auto& path : inputs)
    digests[path.filename().string()] = sha256_file(path);
  j["input_digests"] = digests;
  j["tool_version"] = kToolVersion;
  const auto now = std::chrono::system_clock::now();
  const auto secs =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch());
  j["timestamp_unix"] = secs.count();
  for (const auto& [key, value] : stats) j["stats"][key] = value;

  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out) throw DataError("cannot write manifest in " + out_dir.string());
  out << j.dump(2) << '\n';
}

}  // namespace idr
